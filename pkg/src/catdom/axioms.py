"""Axiom checks for direct allocation mechanisms on categorized domains.

A direct mechanism maps a full preference profile to an allocation. The four
checks here (strategy-proofness, non-bossiness, category-wise neutrality,
Pareto optimality) run either exhaustively over every profile of a small
shape or on seeded random samples, and report the first counterexample found
in a replayable form.

Category-wise neutrality: relabeling the items of one category commutes with
the mechanism. Non-bossiness: no agent can change someone else's bundle by a
misreport that keeps her own bundle fixed.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .domain import (
    Allocation,
    Bundle,
    CapacityError,
    DomainShape,
    Preference,
    Profile,
    ValidationError,
    decode_bundle,
    validate_allocation,
)
from .engine import direct_serial_dictatorship


@dataclass(frozen=True)
class DirectMechanism:
    name: str
    fn: Callable[[Profile], Allocation]

    def apply(self, profile: Profile) -> Allocation:
        allocation = self.fn(profile)
        check = validate_allocation(profile.shape, allocation)
        if not check.ok:
            raise AssertionError(f"mechanism {self.name} broke feasibility: {check.detail}")
        return allocation


@dataclass(frozen=True)
class Exhaustive:
    budget: int = 10_000_000


@dataclass(frozen=True)
class Sampled:
    count: int
    seed: int


Mode = Exhaustive | Sampled


@dataclass(frozen=True)
class Counterexample:
    kind: str
    profile: Profile
    baseline: Allocation
    alternative: Allocation
    agent: int | None = None
    deviation: Preference | None = None
    category: int | None = None
    permutation: tuple[int, ...] | None = None


@dataclass(frozen=True)
class AxiomVerdict:
    axiom: str
    mechanism: str
    passed: bool
    coverage: str
    checked: int
    counterexample: Counterexample | None = None

    def to_json(self) -> dict:
        from .domain import allocation_to_json, profile_to_json

        doc = {
            "axiom": self.axiom,
            "mechanism": self.mechanism,
            "passed": self.passed,
            "coverage": self.coverage,
            "checked": self.checked,
        }
        if self.counterexample is not None:
            ce = self.counterexample
            doc["counterexample"] = {
                "kind": ce.kind,
                "agent": ce.agent,
                "category": ce.category,
                "permutation": list(ce.permutation) if ce.permutation else None,
                "profile": profile_to_json(ce.profile),
                "baseline": allocation_to_json(ce.baseline),
                "alternative": allocation_to_json(ce.alternative),
                "deviation": (
                    [list(b) for b in ce.deviation.order] if ce.deviation else None
                ),
            }
        return doc


def _coverage(mode: Mode) -> str:
    if isinstance(mode, Exhaustive):
        return "exhaustive"
    return f"sampled(count={mode.count}, seed={mode.seed})"


@lru_cache(maxsize=None)
def all_rankings(shape: DomainShape) -> tuple[Preference, ...]:
    """Every strict ranking of the bundle space, in lexicographic order."""
    count = math.factorial(shape.bundle_count)
    if count > 1_000_000:
        raise CapacityError(
            f"{count} rankings exceed what can be materialized; use sampled mode"
        )
    bundles = list(shape.bundles())
    return tuple(Preference(shape, perm) for perm in itertools.permutations(bundles))


@lru_cache(maxsize=None)
def all_allocations(shape: DomainShape) -> tuple[Allocation, ...]:
    """Every feasible allocation: one item permutation per category."""
    count = math.factorial(shape.n) ** shape.p
    if count > 1_000_000:
        raise CapacityError(f"{count} allocations exceed what can be materialized")
    perms = list(itertools.permutations(range(1, shape.n + 1)))
    out = []
    for combo in itertools.product(perms, repeat=shape.p):
        out.append(
            Allocation(
                {
                    j: tuple(combo[i - 1][j - 1] for i in shape.categories())
                    for j in shape.agents()
                }
            )
        )
    return tuple(out)


def _random_preference(shape: DomainShape, rng: np.random.Generator) -> Preference:
    perm = rng.permutation(shape.bundle_count)
    return Preference(shape, [decode_bundle(shape, int(i)) for i in perm])


def _random_profile(shape: DomainShape, rng: np.random.Generator) -> Profile:
    return Profile(shape, [_random_preference(shape, rng) for _ in shape.agents()])


def apply_category_permutation(obj, category: int, permutation: Sequence[int]):
    """Relabel the items of one category (item d becomes permutation[d-1]).

    Accepts a Bundle (with a shape needed for validation elsewhere),
    Preference, Profile, or Allocation and returns the same kind.
    """
    perm = tuple(permutation)
    if isinstance(obj, Preference):
        shape = obj.shape
        _check_perm(shape, category, perm)
        return Preference(
            shape, [_permute_bundle(b, category, perm) for b in obj.order]
        )
    if isinstance(obj, Profile):
        return Profile(
            obj.shape,
            [apply_category_permutation(p, category, perm) for p in obj.preferences],
        )
    if isinstance(obj, Allocation):
        return Allocation(
            {j: _permute_bundle(b, category, perm) for j, b in obj.bundles.items()}
        )
    if isinstance(obj, tuple):
        return _permute_bundle(obj, category, perm)
    raise ValidationError(f"cannot permute object of type {type(obj).__name__}")


def _check_perm(shape: DomainShape, category: int, perm: tuple[int, ...]) -> None:
    if category not in shape.categories():
        raise ValidationError(f"category {category} outside 1..{shape.p}")
    if sorted(perm) != list(shape.agents()):
        raise ValidationError(f"{perm} is not a permutation of 1..{shape.n}")


def _permute_bundle(bundle: Bundle, category: int, perm: tuple[int, ...]) -> Bundle:
    item = bundle[category - 1]
    return bundle[: category - 1] + (perm[item - 1],) + bundle[category:]


def _exhaustive_profiles(shape: DomainShape):
    rankings = all_rankings(shape)
    for idx in itertools.product(range(len(rankings)), repeat=shape.n):
        yield idx, Profile(shape, [rankings[i] for i in idx])


class _MechanismCache:
    def __init__(self, mechanism: DirectMechanism, shape: DomainShape):
        self.mechanism = mechanism
        self.rankings = all_rankings(shape)
        self.shape = shape
        self._memo: dict[tuple[int, ...], Allocation] = {}

    def apply(self, idx: tuple[int, ...]) -> Allocation:
        result = self._memo.get(idx)
        if result is None:
            profile = Profile(self.shape, [self.rankings[i] for i in idx])
            result = self.mechanism.apply(profile)
            self._memo[idx] = result
        return result


def _deviation_space_cost(shape: DomainShape) -> int:
    r = math.factorial(shape.bundle_count)
    return (r**shape.n) * shape.n * r


def check_strategy_proofness(
    mechanism: DirectMechanism, shape: DomainShape, mode: Mode = Exhaustive()
) -> AxiomVerdict:
    """No agent can strictly improve her own bundle by misreporting."""
    checked = 0
    if isinstance(mode, Exhaustive):
        if _deviation_space_cost(shape) > mode.budget:
            raise CapacityError(
                f"exhaustive strategy-proofness over shape {shape.n}x{shape.p} needs "
                f"{_deviation_space_cost(shape)} checks, over budget {mode.budget}"
            )
        cache = _MechanismCache(mechanism, shape)
        rankings = cache.rankings
        for idx, profile in _exhaustive_profiles(shape):
            base = cache.apply(idx)
            for j in shape.agents():
                true_pref = profile.pref(j)
                base_rank = true_pref.rank_of(base[j])
                for dev in range(len(rankings)):
                    if dev == idx[j - 1]:
                        continue
                    alt_idx = idx[: j - 1] + (dev,) + idx[j:]
                    alt = cache.apply(alt_idx)
                    checked += 1
                    if true_pref.rank_of(alt[j]) < base_rank:
                        return AxiomVerdict(
                            "strategy-proofness",
                            mechanism.name,
                            False,
                            _coverage(mode),
                            checked,
                            Counterexample(
                                "strategy-proofness",
                                profile,
                                base,
                                alt,
                                agent=j,
                                deviation=rankings[dev],
                            ),
                        )
        return AxiomVerdict("strategy-proofness", mechanism.name, True, _coverage(mode), checked)

    rng = np.random.default_rng(mode.seed)
    for _ in range(mode.count):
        profile = _random_profile(shape, rng)
        j = int(rng.integers(1, shape.n + 1))
        deviation = _random_preference(shape, rng)
        base = mechanism.apply(profile)
        alt_profile = Profile(
            shape,
            [deviation if a == j else profile.pref(a) for a in shape.agents()],
        )
        alt = mechanism.apply(alt_profile)
        checked += 1
        if profile.pref(j).rank_of(alt[j]) < profile.pref(j).rank_of(base[j]):
            return AxiomVerdict(
                "strategy-proofness",
                mechanism.name,
                False,
                _coverage(mode),
                checked,
                Counterexample(
                    "strategy-proofness", profile, base, alt, agent=j, deviation=deviation
                ),
            )
    return AxiomVerdict("strategy-proofness", mechanism.name, True, _coverage(mode), checked)


def check_non_bossiness(
    mechanism: DirectMechanism, shape: DomainShape, mode: Mode = Exhaustive()
) -> AxiomVerdict:
    """A misreport that leaves the deviator's bundle unchanged must leave the
    whole allocation unchanged."""
    checked = 0
    if isinstance(mode, Exhaustive):
        if _deviation_space_cost(shape) > mode.budget:
            raise CapacityError(
                f"exhaustive non-bossiness over shape {shape.n}x{shape.p} is over "
                f"budget {mode.budget}"
            )
        cache = _MechanismCache(mechanism, shape)
        rankings = cache.rankings
        for idx, profile in _exhaustive_profiles(shape):
            base = cache.apply(idx)
            for j in shape.agents():
                for dev in range(len(rankings)):
                    if dev == idx[j - 1]:
                        continue
                    alt_idx = idx[: j - 1] + (dev,) + idx[j:]
                    alt = cache.apply(alt_idx)
                    checked += 1
                    if alt[j] == base[j] and alt.bundles != base.bundles:
                        return AxiomVerdict(
                            "non-bossiness",
                            mechanism.name,
                            False,
                            _coverage(mode),
                            checked,
                            Counterexample(
                                "non-bossiness",
                                profile,
                                base,
                                alt,
                                agent=j,
                                deviation=rankings[dev],
                            ),
                        )
        return AxiomVerdict("non-bossiness", mechanism.name, True, _coverage(mode), checked)

    rng = np.random.default_rng(mode.seed)
    for _ in range(mode.count):
        profile = _random_profile(shape, rng)
        j = int(rng.integers(1, shape.n + 1))
        deviation = _random_preference(shape, rng)
        base = mechanism.apply(profile)
        alt_profile = Profile(
            shape,
            [deviation if a == j else profile.pref(a) for a in shape.agents()],
        )
        alt = mechanism.apply(alt_profile)
        checked += 1
        if alt[j] == base[j] and alt.bundles != base.bundles:
            return AxiomVerdict(
                "non-bossiness",
                mechanism.name,
                False,
                _coverage(mode),
                checked,
                Counterexample(
                    "non-bossiness", profile, base, alt, agent=j, deviation=deviation
                ),
            )
    return AxiomVerdict("non-bossiness", mechanism.name, True, _coverage(mode), checked)


def check_category_wise_neutrality(
    mechanism: DirectMechanism, shape: DomainShape, mode: Mode = Exhaustive()
) -> AxiomVerdict:
    """Relabeling one category's items commutes with the mechanism."""
    checked = 0
    perms = [p for p in itertools.permutations(range(1, shape.n + 1))]
    if isinstance(mode, Exhaustive):
        r = math.factorial(shape.bundle_count)
        cost = (r**shape.n) * shape.p * len(perms)
        if cost > mode.budget:
            raise CapacityError(
                f"exhaustive neutrality over shape {shape.n}x{shape.p} needs {cost} "
                f"checks, over budget {mode.budget}"
            )
        for _, profile in _exhaustive_profiles(shape):
            base = mechanism.apply(profile)
            for category in shape.categories():
                for perm in perms:
                    if perm == tuple(shape.agents()):
                        continue
                    checked += 1
                    relabeled = apply_category_permutation(profile, category, perm)
                    lhs = mechanism.apply(relabeled)
                    rhs = apply_category_permutation(base, category, perm)
                    if lhs.bundles != rhs.bundles:
                        return AxiomVerdict(
                            "category-wise-neutrality",
                            mechanism.name,
                            False,
                            _coverage(mode),
                            checked,
                            Counterexample(
                                "category-wise-neutrality",
                                profile,
                                lhs,
                                rhs,
                                category=category,
                                permutation=perm,
                            ),
                        )
        return AxiomVerdict(
            "category-wise-neutrality", mechanism.name, True, _coverage(mode), checked
        )

    rng = np.random.default_rng(mode.seed)
    for _ in range(mode.count):
        profile = _random_profile(shape, rng)
        category = int(rng.integers(1, shape.p + 1))
        perm = tuple(int(x) + 1 for x in rng.permutation(shape.n))
        if perm == tuple(shape.agents()):
            continue
        checked += 1
        relabeled = apply_category_permutation(profile, category, perm)
        lhs = mechanism.apply(relabeled)
        rhs = apply_category_permutation(mechanism.apply(profile), category, perm)
        if lhs.bundles != rhs.bundles:
            return AxiomVerdict(
                "category-wise-neutrality",
                mechanism.name,
                False,
                _coverage(mode),
                checked,
                Counterexample(
                    "category-wise-neutrality",
                    profile,
                    lhs,
                    rhs,
                    category=category,
                    permutation=perm,
                ),
            )
    return AxiomVerdict(
        "category-wise-neutrality", mechanism.name, True, _coverage(mode), checked
    )


def _dominates(profile: Profile, alt: Allocation, base: Allocation) -> bool:
    strict = False
    for j in profile.shape.agents():
        ra = profile.pref(j).rank_of(alt[j])
        rb = profile.pref(j).rank_of(base[j])
        if ra > rb:
            return False
        if ra < rb:
            strict = True
    return strict


def check_pareto_optimality(
    mechanism: DirectMechanism, shape: DomainShape, mode: Mode = Exhaustive()
) -> AxiomVerdict:
    """No feasible allocation weakly improves every agent and strictly
    improves at least one."""
    allocations = all_allocations(shape)
    checked = 0
    if isinstance(mode, Exhaustive):
        r = math.factorial(shape.bundle_count)
        cost = (r**shape.n) * len(allocations)
        if cost > mode.budget:
            raise CapacityError(
                f"exhaustive Pareto check over shape {shape.n}x{shape.p} needs {cost} "
                f"comparisons, over budget {mode.budget}"
            )
        for _, profile in _exhaustive_profiles(shape):
            base = mechanism.apply(profile)
            for alt in allocations:
                checked += 1
                if _dominates(profile, alt, base):
                    return AxiomVerdict(
                        "pareto-optimality",
                        mechanism.name,
                        False,
                        _coverage(mode),
                        checked,
                        Counterexample("pareto-optimality", profile, base, alt),
                    )
        return AxiomVerdict("pareto-optimality", mechanism.name, True, _coverage(mode), checked)

    rng = np.random.default_rng(mode.seed)
    for _ in range(mode.count):
        profile = _random_profile(shape, rng)
        base = mechanism.apply(profile)
        checked += 1
        for alt in allocations:
            if _dominates(profile, alt, base):
                return AxiomVerdict(
                    "pareto-optimality",
                    mechanism.name,
                    False,
                    _coverage(mode),
                    checked,
                    Counterexample("pareto-optimality", profile, base, alt),
                )
    return AxiomVerdict("pareto-optimality", mechanism.name, True, _coverage(mode), checked)


def check_all(mechanism: DirectMechanism, shape: DomainShape, mode: Mode) -> list[AxiomVerdict]:
    return [
        check_strategy_proofness(mechanism, shape, mode),
        check_non_bossiness(mechanism, shape, mode),
        check_category_wise_neutrality(mechanism, shape, mode),
        check_pareto_optimality(mechanism, shape, mode),
    ]


# Reference mechanisms


def sd_direct(agent_order: Sequence[int]) -> DirectMechanism:
    """Whole-bundle serial dictatorship in a fixed agent order."""
    order = tuple(agent_order)
    return DirectMechanism(
        f"sd{list(order)}", lambda profile: direct_serial_dictatorship(order, profile)
    )


def welfare_maximizer() -> DirectMechanism:
    """Exact weighted-welfare maximizer.

    An agent's i-th ranked bundle scores (n**p - i) * (1 + (1/(2*n**p))**j)
    where j is the agent index; the perturbation makes every profile's
    maximizer unique (asserted) while preserving the utilitarian flavor.
    Strategy-proofness fails for it, which is the role it plays in tests.
    """

    def fn(profile: Profile) -> Allocation:
        shape = profile.shape
        m = shape.bundle_count
        weights = {j: 1 + Fraction(1, 2 * m) ** j for j in shape.agents()}
        best = None
        best_score = None
        tie = False
        for allocation in all_allocations(shape):
            score = sum(
                (m - profile.pref(j).rank_of(allocation[j])) * weights[j]
                for j in shape.agents()
            )
            if best_score is None or score > best_score:
                best, best_score, tie = allocation, score, False
            elif score == best_score:
                tie = True
        assert best is not None and not tie, "perturbed welfare scores must not tie"
        return best

    return DirectMechanism("welfare-max", fn)


def _conditional_sd(name: str, tail_order) -> DirectMechanism:
    def fn(profile: Profile) -> Allocation:
        shape = profile.shape
        first = profile.pref(1).top()
        taken = {i: {first[i - 1]} for i in shape.categories()}
        bundles = {1: first}
        for j in tail_order(profile, bundles[1]):
            for bundle in profile.pref(j).order:
                if all(comp not in taken[i] for i, comp in enumerate(bundle, 1)):
                    bundles[j] = bundle
                    for i, comp in enumerate(bundle, 1):
                        taken[i].add(comp)
                    break
        return Allocation(bundles)

    return DirectMechanism(name, fn)


def bossy_conditional_sd() -> DirectMechanism:
    """Serial dictatorship whose tail order flips on a payoff-irrelevant
    feature of agent 1's report: if the first component of her second-ranked
    bundle matches her top's, the others pick in ascending order, else
    descending. Strategy-proof but bossy (for three or more agents)."""

    def tail(profile: Profile, _first: Bundle):
        shape = profile.shape
        if shape.bundle_count < 2:
            return list(shape.agents())[1:]
        top = profile.pref(1).top()
        second = profile.pref(1).bundle_at(2)
        ascending = second[0] == top[0]
        rest = list(shape.agents())[1:]
        return rest if ascending else list(reversed(rest))

    return _conditional_sd("bossy-sd", tail)


def non_neutral_conditional_sd() -> DirectMechanism:
    """Serial dictatorship whose tail order flips on whether agent 1 receives
    the all-ones bundle, an item-label-dependent condition that breaks
    category-wise neutrality (for three or more agents)."""

    def tail(profile: Profile, first: Bundle):
        shape = profile.shape
        ascending = first == (1,) * shape.p
        rest = list(shape.agents())[1:]
        return rest if ascending else list(reversed(rest))

    return _conditional_sd("nonneutral-sd", tail)


def worst_pick_sd(agent_order: Sequence[int]) -> DirectMechanism:
    """Each dictator takes her worst still-compatible bundle; violates Pareto
    optimality on purpose (test fixture)."""
    order = tuple(agent_order)

    def fn(profile: Profile) -> Allocation:
        shape = profile.shape
        taken = {i: set() for i in shape.categories()}
        bundles = {}
        for j in order:
            for bundle in reversed(profile.pref(j).order):
                if all(comp not in taken[i] for i, comp in enumerate(bundle, 1)):
                    bundles[j] = bundle
                    for i, comp in enumerate(bundle, 1):
                        taken[i].add(comp)
                    break
        return Allocation(bundles)

    return DirectMechanism(f"worst-pick-sd{list(order)}", fn)


def constant_mechanism(allocation: Allocation) -> DirectMechanism:
    return DirectMechanism("constant", lambda profile: allocation)
