import itertools

import pytest
from hypothesis import given, settings, strategies as st

import catdom as cd

from conftest import MIXED_BEHAVIORS_3X2, pref_of


def reference_run(order, profile, kinds):
    """Protocol re-implementation used as an oracle: tracks full availability
    and recomputes each pick by scanning the preference list directly."""
    shape = order.shape
    avail = {i: set(shape.agents()) for i in shape.categories()}
    picks = {j: {} for j in shape.agents()}

    def feasible(j, bundle):
        for i in shape.categories():
            if i in picks[j]:
                if bundle[i - 1] != picks[j][i]:
                    return False
            elif bundle[i - 1] not in avail[i]:
                return False
        return True

    for (j, c) in order.rounds:
        pref = profile.pref(j)
        if kinds[j - 1] == "opt":
            item = None
            for rank in range(1, shape.bundle_count + 1):
                bundle = pref.bundle_at(rank)
                if feasible(j, bundle):
                    item = bundle[c - 1]
                    break
        else:
            item, item_rank = None, None
            for d in sorted(avail[c]):
                worst = None
                for rank in range(shape.bundle_count, 0, -1):
                    bundle = pref.bundle_at(rank)
                    if bundle[c - 1] == d and feasible(j, bundle):
                        worst = rank
                        break
                if item_rank is None or worst < item_rank:
                    item, item_rank = d, worst
        picks[j][c] = item
        avail[c].remove(item)
    return cd.Allocation(
        {j: tuple(picks[j][i] for i in shape.categories()) for j in shape.agents()}
    )


@st.composite
def instance_strategy(draw, max_n=3, max_p=2):
    n = draw(st.integers(1, max_n))
    p = draw(st.integers(1, max_p))
    shape = cd.DomainShape(n, p)
    bundles = list(shape.bundles())
    prefs = [
        cd.Preference(shape, draw(st.permutations(bundles)))
        for _ in shape.agents()
    ]
    pairs = [(j, i) for j in shape.agents() for i in shape.categories()]
    rounds = tuple(draw(st.permutations(pairs)))
    kinds = tuple(draw(st.sampled_from(["opt", "pess"])) for _ in shape.agents())
    return cd.PickingOrder(shape, rounds), cd.Profile(shape, prefs), kinds


def as_behaviors(kinds):
    return [cd.OPTIMISTIC if k == "opt" else cd.PESSIMISTIC for k in kinds]


class TestMixedRun:
    def test_allocation_and_trace(self, mixed_order_3x2, profile_3x2):
        alloc, trace = cd.run_csam(mixed_order_3x2, profile_3x2, MIXED_BEHAVIORS_3X2)
        assert dict(alloc.bundles) == {1: (1, 1), 2: (2, 2), 3: (3, 3)}
        picks = [(r.t, r.agent, r.category, r.item) for r in trace.rounds]
        assert picks == [
            (1, 1, 1, 1),
            (2, 2, 2, 2),
            (3, 3, 1, 3),
            (4, 3, 2, 3),
            (5, 2, 1, 2),
            (6, 1, 2, 1),
        ]

    def test_round_three_comparison(self, mixed_order_3x2, profile_3x2):
        _, trace = cd.run_csam(mixed_order_3x2, profile_3x2, MIXED_BEHAVIORS_3X2)
        round3 = trace.rounds[2]
        assert round3.available == (2, 3)
        assert round3.comparison == {2: (2, 3), 3: (3, 1)}

    def test_optimistic_rounds_have_no_comparison(self, mixed_order_3x2, profile_3x2):
        _, trace = cd.run_csam(mixed_order_3x2, profile_3x2, MIXED_BEHAVIORS_3X2)
        assert trace.rounds[0].comparison is None
        assert trace.rounds[1].comparison is None

    def test_message_count(self, mixed_order_3x2, profile_3x2):
        _, trace = cd.run_csam(mixed_order_3x2, profile_3x2, MIXED_BEHAVIORS_3X2)
        assert trace.message_count == (1 + 3 * 2) * 3
        assert cd.message_count(trace) == 21


class TestChoiceOracles:
    @settings(max_examples=150, deadline=None)
    @given(instance_strategy())
    def test_run_matches_reference(self, instance):
        order, profile, kinds = instance
        alloc, _ = cd.run_csam(order, profile, as_behaviors(kinds))
        expected = reference_run(order, profile, kinds)
        assert dict(alloc.bundles) == dict(expected.bundles)

    def test_pessimistic_comparison_values(self):
        # one category, three items: candidate 2 leaves worst bundle (2,),
        # candidate 3 leaves (3,); the agent prefers the latter
        shape = cd.DomainShape(3, 1)
        pref = cd.Preference(shape, [(1,), (3,), (2,)])
        comparison = cd.pessimistic_comparison(
            pref, picks={}, available={1: {2, 3}}, category=1
        )
        assert comparison == {2: (2,), 3: (3,)}
        choice = cd.pessimistic_choice(pref, picks={}, available={1: {2, 3}}, category=1)
        assert choice == 3


class TestScripted:
    def test_replay_reproduces_allocation(self, mixed_order_3x2, profile_3x2):
        alloc, trace = cd.run_csam(mixed_order_3x2, profile_3x2, MIXED_BEHAVIORS_3X2)
        scripts = []
        for j in (1, 2, 3):
            scripts.append(
                cd.Scripted([r.item for r in trace.rounds if r.agent == j])
            )
        replay, _ = cd.run_csam(mixed_order_3x2, profile_3x2, scripts)
        assert dict(replay.bundles) == dict(alloc.bundles)

    def test_unavailable_item_rejected(self):
        shape = cd.DomainShape(2, 1)
        order = cd.PickingOrder(shape, ((1, 1), (2, 1)))
        prefs = [cd.Preference(shape, [(1,), (2,)]) for _ in (1, 2)]
        profile = cd.Profile(shape, prefs)
        behaviors = [cd.Scripted([1]), cd.Scripted([1])]
        with pytest.raises(cd.ExecutionError, match="round 2"):
            cd.run_csam(order, profile, behaviors)

    def test_script_length_checked(self, mixed_order_3x2, profile_3x2):
        behaviors = [cd.Scripted([1]), cd.OPTIMISTIC, cd.OPTIMISTIC]
        with pytest.raises(cd.ValidationError):
            cd.run_csam(mixed_order_3x2, profile_3x2, behaviors)


class TestSerialDictatorship:
    def test_direct_equals_sequential(self, profile_3x2):
        for agent_order in itertools.permutations((1, 2, 3)):
            order = cd.serial_dictatorship_order(agent_order, 2)
            alloc, _ = cd.run_csam(order, profile_3x2, [cd.OPTIMISTIC] * 3)
            direct = cd.direct_serial_dictatorship(agent_order, profile_3x2)
            assert dict(direct.bundles) == dict(alloc.bundles)

    def test_first_dictator_gets_top(self, profile_3x2):
        direct = cd.direct_serial_dictatorship([2, 3, 1], profile_3x2)
        assert direct[2] == profile_3x2.pref(2).top()

    def test_known_outcome(self, profile_3x2):
        direct = cd.direct_serial_dictatorship([1, 2, 3], profile_3x2)
        assert dict(direct.bundles) == {1: (1, 2), 2: (2, 1), 3: (3, 3)}


class TestBehaviorValidation:
    def test_wrong_behavior_count(self, mixed_order_3x2, profile_3x2):
        with pytest.raises(cd.ValidationError):
            cd.run_csam(mixed_order_3x2, profile_3x2, [cd.OPTIMISTIC] * 2)

    def test_profile_shape_mismatch(self, mixed_order_3x2):
        shape = cd.DomainShape(2, 2)
        prefs = [
            pref_of(shape, ["11", "12", "21", "22"]),
            pref_of(shape, ["11", "12", "21", "22"]),
        ]
        profile = cd.Profile(shape, prefs)
        with pytest.raises(cd.ValidationError):
            cd.run_csam(mixed_order_3x2, profile, [cd.OPTIMISTIC] * 2)
