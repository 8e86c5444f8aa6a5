import pytest
from hypothesis import given, settings, strategies as st

import catdom as cd

from conftest import MIXED_BEHAVIORS_3X2


def realized_ranks(order, profile, behaviors):
    alloc, _ = cd.run_csam(order, profile, behaviors)
    return {j: profile.pref(j).rank_of(alloc[j]) for j in order.shape.agents()}


class TestMixedWitness:
    def test_pessimistic_agent_ranking_pinned(self, mixed_order_3x2):
        profile = cd.worst_case_profile(mixed_order_3x2, MIXED_BEHAVIORS_3X2)
        expected = ["13", "11", "12", "21", "22", "32", "33", "31", "23"]
        got = [
            "".join(map(str, profile.pref(3).bundle_at(r)))
            for r in range(1, 10)
        ]
        assert got == expected

    def test_bounds_attained_exactly(self, mixed_order_3x2):
        profile = cd.worst_case_profile(mixed_order_3x2, MIXED_BEHAVIORS_3X2)
        report = cd.worst_case_report(mixed_order_3x2, MIXED_BEHAVIORS_3X2)
        ranks = realized_ranks(mixed_order_3x2, profile, MIXED_BEHAVIORS_3X2)
        assert ranks == {1: 9, 2: 9, 3: 7}
        for j in (1, 2, 3):
            assert ranks[j] == report.bound(j)

    def test_everyone_replays_own_items(self, mixed_order_3x2):
        profile = cd.worst_case_profile(mixed_order_3x2, MIXED_BEHAVIORS_3X2)
        alloc, trace = cd.run_csam(mixed_order_3x2, profile, MIXED_BEHAVIORS_3X2)
        for record in trace.rounds:
            assert record.item == record.agent
        assert dict(alloc.bundles) == {1: (1, 1), 2: (2, 2), 3: (3, 3)}

    def test_near_optimal_pinned(self, mixed_order_3x2):
        profile = cd.worst_case_profile(mixed_order_3x2, MIXED_BEHAVIORS_3X2)
        near = cd.near_optimal_allocation(mixed_order_3x2, profile)
        assert dict(near.bundles) == {1: (2, 1), 2: (3, 2), 3: (1, 3)}
        ranks = [profile.pref(j).rank_of(near[j]) for j in (1, 2, 3)]
        assert ranks == [2, 1, 1]

    def test_pin_tops(self, mixed_order_3x2):
        profile = cd.worst_case_profile(mixed_order_3x2, MIXED_BEHAVIORS_3X2)
        # non-first pickers of category 1 rank their predecessor bundle first
        assert profile.pref(2).top() == (3, 2)
        assert profile.pref(3).top() == (1, 3)
        # the first picker keeps the swap bundle second
        assert profile.pref(1).bundle_at(2) == (2, 1)


@st.composite
def witness_instance(draw, max_n=4, max_p=3):
    n = draw(st.integers(1, max_n))
    p = draw(st.integers(1, max_p))
    shape = cd.DomainShape(n, p)
    pairs = [(j, i) for j in shape.agents() for i in shape.categories()]
    rounds = tuple(draw(st.permutations(pairs)))
    kinds = tuple(draw(st.sampled_from(["opt", "pess"])) for _ in shape.agents())
    behaviors = [cd.OPTIMISTIC if k == "opt" else cd.PESSIMISTIC for k in kinds]
    return cd.PickingOrder(shape, rounds), behaviors


class TestWitnessProperty:
    @settings(max_examples=120, deadline=None)
    @given(witness_instance())
    def test_every_bound_attained(self, instance):
        order, behaviors = instance
        profile = cd.worst_case_profile(order, behaviors)
        report = cd.worst_case_report(order, behaviors)
        ranks = realized_ranks(order, profile, behaviors)
        for j in order.shape.agents():
            assert ranks[j] == report.bound(j)

    @settings(max_examples=120, deadline=None)
    @given(witness_instance())
    def test_near_optimal_condition(self, instance):
        order, behaviors = instance
        n = order.shape.n
        profile = cd.worst_case_profile(order, behaviors)
        near = cd.near_optimal_allocation(order, profile)
        assert cd.validate_allocation(order.shape, near).ok
        ranks = sorted(profile.pref(j).rank_of(near[j]) for j in order.shape.agents())
        assert ranks[-1] <= 2
        assert ranks[: n - 1] == [1] * (n - 1)


class TestNearOptimalValidation:
    def test_rejects_unsupportive_profile(self, mixed_order_3x2):
        shape = mixed_order_3x2.shape
        ascending = cd.Preference(shape, list(shape.bundles()))
        profile = cd.Profile(shape, [ascending] * 3)
        with pytest.raises(cd.ConstructionError):
            cd.near_optimal_allocation(mixed_order_3x2, profile)


class TestEdgeShapes:
    def test_single_agent(self):
        shape = cd.DomainShape(1, 3)
        order = cd.PickingOrder(shape, ((1, 2), (1, 1), (1, 3)))
        profile = cd.worst_case_profile(order, [cd.OPTIMISTIC])
        alloc, _ = cd.run_csam(order, profile, [cd.OPTIMISTIC])
        assert alloc[1] == (1, 1, 1)
        assert profile.pref(1).rank_of((1, 1, 1)) == 1

    def test_single_category_pessimists(self):
        shape = cd.DomainShape(4, 1)
        order = cd.PickingOrder(shape, ((2, 1), (4, 1), (1, 1), (3, 1)))
        behaviors = [cd.PESSIMISTIC] * 4
        profile = cd.worst_case_profile(order, behaviors)
        report = cd.worst_case_report(order, behaviors)
        ranks = realized_ranks(order, profile, behaviors)
        for j in (1, 2, 3, 4):
            assert ranks[j] == report.bound(j)

    def test_behavior_count_checked(self, mixed_order_3x2):
        with pytest.raises(cd.ValidationError):
            cd.worst_case_profile(mixed_order_3x2, [cd.OPTIMISTIC] * 2)

    def test_scripted_rejected(self, mixed_order_3x2):
        behaviors = [cd.Scripted((1, 1)), cd.OPTIMISTIC, cd.OPTIMISTIC]
        with pytest.raises(cd.ValidationError):
            cd.worst_case_profile(mixed_order_3x2, behaviors)


class TestStrategicWitness:
    def test_game_order_rankings(self, game_order_2x2):
        profile = cd.strategic_worst_profile(game_order_2x2)
        r1 = [profile.pref(1).bundle_at(r) for r in range(1, 5)]
        r2 = [profile.pref(2).bundle_at(r) for r in range(1, 5)]
        assert r1 == [(1, 1), (2, 1), (1, 2), (2, 2)]
        assert r2 == [(1, 1), (1, 2), (2, 1), (2, 2)]

    def test_game_order_equilibrium_hits_bound(self, game_order_2x2):
        profile = cd.strategic_worst_profile(game_order_2x2)
        alloc, _ = cd.solve_spne(game_order_2x2, profile)
        assert dict(alloc.bundles) == {1: (1, 2), 2: (2, 1)}
        an = game_order_2x2.analytics
        for j in (1, 2):
            assert profile.pref(j).rank_of(alloc[j]) == cd.strategic_bound(an, j)

    @pytest.mark.parametrize("p", [1, 2, 3, 4])
    def test_tight_across_category_counts(self, p):
        shape = cd.DomainShape(2, p)
        pairs = [(j, i) for j in (1, 2) for i in range(1, p + 1)]
        # interleave the agents to keep both slack products nontrivial
        rounds = tuple(sorted(pairs, key=lambda pair: (pair[1], pair[0])))
        order = cd.PickingOrder(shape, rounds)
        profile = cd.strategic_worst_profile(order)
        alloc, _ = cd.solve_spne(order, profile)
        an = order.analytics
        for j in (1, 2):
            assert profile.pref(j).rank_of(alloc[j]) == cd.strategic_bound(an, j)

    def test_requires_two_agents(self):
        order = cd.serial_dictatorship_order([1, 2, 3], 2)
        with pytest.raises(cd.ValidationError):
            cd.strategic_worst_profile(order)
