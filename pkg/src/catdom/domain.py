"""Core types for categorized allocation domains.

A domain has ``p`` categories holding ``n`` items each; item identifiers are
local to their category (category ``i`` holds items ``1..n``). A bundle takes
one item from every category, so the bundle space has ``n**p`` elements.
Agents hold strict total orders over the full bundle space, and an allocation
gives every agent one bundle such that every category's items are exactly
partitioned among the ``n`` agents.

Ranks are 1-based: rank 1 is an agent's most preferred bundle, rank ``n**p``
her least preferred. Rank tables are materialized once at ``Preference``
construction so rank lookups are O(1) everywhere else; this is what the
``CAPACITY_LIMIT`` guard protects.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

Bundle = tuple[int, ...]

# Largest bundle space the library will materialize rank tables for.
CAPACITY_LIMIT = 10**6


class ValidationError(ValueError):
    """An input value violates a structural invariant."""


class CapacityError(RuntimeError):
    """A requested computation exceeds a configured capacity or budget."""


@dataclass(frozen=True)
class DomainShape:
    """Domain dimensions: ``n`` agents (and items per category), ``p`` categories."""

    n: int
    p: int

    def __post_init__(self) -> None:
        if not (isinstance(self.n, int) and isinstance(self.p, int)):
            raise ValidationError(f"shape dimensions must be integers, got {self.n!r}, {self.p!r}")
        if self.n < 1 or self.p < 1:
            raise ValidationError(f"shape ({self.n}, {self.p}) invalid: need n >= 1 and p >= 1")
        if self.n**self.p > CAPACITY_LIMIT:
            raise CapacityError(
                f"bundle space {self.n}**{self.p} exceeds the capacity limit {CAPACITY_LIMIT}"
            )

    @property
    def bundle_count(self) -> int:
        return self.n**self.p

    def agents(self) -> range:
        return range(1, self.n + 1)

    def categories(self) -> range:
        return range(1, self.p + 1)

    def bundles(self) -> Iterator[Bundle]:
        """All bundles in ascending bundle-index order."""
        return itertools.product(range(1, self.n + 1), repeat=self.p)

    def validate_bundle(self, bundle: Sequence[int]) -> Bundle:
        b = tuple(bundle)
        if len(b) != self.p:
            raise ValidationError(f"bundle {b} has {len(b)} components, expected {self.p}")
        for item in b:
            if not (isinstance(item, int) and 1 <= item <= self.n):
                raise ValidationError(f"bundle {b} holds item {item!r} outside 1..{self.n}")
        return b


def encode_bundle(shape: DomainShape, bundle: Sequence[int]) -> int:
    """Mixed-radix index of a bundle, 0-based: (1,..,1) -> 0, (n,..,n) -> n**p - 1."""
    b = shape.validate_bundle(bundle)
    idx = 0
    for item in b:
        idx = idx * shape.n + (item - 1)
    return idx


def decode_bundle(shape: DomainShape, index: int) -> Bundle:
    if not (0 <= index < shape.bundle_count):
        raise ValidationError(f"bundle index {index} outside 0..{shape.bundle_count - 1}")
    comps = []
    for _ in range(shape.p):
        comps.append(index % shape.n + 1)
        index //= shape.n
    return tuple(reversed(comps))


class Preference:
    """A strict total order over the full bundle space of a shape.

    ``order[0]`` is the most preferred bundle. Construction validates that the
    sequence is a permutation of the whole bundle space and precomputes the
    rank table.
    """

    __slots__ = ("shape", "order", "_rank")

    def __init__(self, shape: DomainShape, order: Iterable[Sequence[int]]):
        seq = tuple(tuple(b) for b in order)
        count = shape.bundle_count
        if len(seq) != count:
            raise ValidationError(
                f"preference lists {len(seq)} bundles, expected all {count}"
            )
        rank = [0] * count
        for pos, bundle in enumerate(seq):
            idx = encode_bundle(shape, bundle)
            if rank[idx]:
                raise ValidationError(f"bundle {bundle} appears twice in preference")
            rank[idx] = pos + 1
        self.shape = shape
        self.order = seq
        self._rank = rank

    def rank_of(self, bundle: Sequence[int]) -> int:
        return self._rank[encode_bundle(self.shape, bundle)]

    def bundle_at(self, rank: int) -> Bundle:
        if not (1 <= rank <= len(self.order)):
            raise ValidationError(f"rank {rank} outside 1..{len(self.order)}")
        return self.order[rank - 1]

    def top(self) -> Bundle:
        return self.order[0]

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Preference)
            and self.shape == other.shape
            and self.order == other.order
        )

    def __hash__(self) -> int:
        return hash((self.shape, self.order))

    def __repr__(self) -> str:
        head = " > ".join("".join(map(str, b)) for b in self.order[:3])
        return f"Preference({self.shape.n}x{self.shape.p}: {head} > ...)"


class Profile:
    """One preference per agent, agents indexed 1..n."""

    __slots__ = ("shape", "preferences")

    def __init__(self, shape: DomainShape, preferences: Sequence[Preference]):
        prefs = tuple(preferences)
        if len(prefs) != shape.n:
            raise ValidationError(f"profile holds {len(prefs)} preferences, expected {shape.n}")
        for j, pref in enumerate(prefs, 1):
            if pref.shape != shape:
                raise ValidationError(f"agent {j} preference shaped {pref.shape}, expected {shape}")
        self.shape = shape
        self.preferences = prefs

    def pref(self, agent: int) -> Preference:
        if not (1 <= agent <= self.shape.n):
            raise ValidationError(f"agent {agent} outside 1..{self.shape.n}")
        return self.preferences[agent - 1]

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Profile)
            and self.shape == other.shape
            and self.preferences == other.preferences
        )

    def __hash__(self) -> int:
        return hash((self.shape, self.preferences))


@dataclass(frozen=True)
class Allocation:
    """Bundle per agent. Not validated at construction; see validate_allocation."""

    bundles: Mapping[int, Bundle]

    def __getitem__(self, agent: int) -> Bundle:
        return self.bundles[agent]

    def items(self):
        return self.bundles.items()


@dataclass(frozen=True)
class AllocationCheck:
    ok: bool
    detail: str = ""
    category: int | None = None
    item: int | None = None


def validate_allocation(shape: DomainShape, allocation: Allocation) -> AllocationCheck:
    """Check that every category's items are exactly partitioned among agents.

    Returns a report rather than raising, so callers can surface the first
    offending (category, item) pair.
    """
    agents = set(allocation.bundles.keys())
    if agents != set(shape.agents()):
        return AllocationCheck(False, f"agents {sorted(agents)} do not match 1..{shape.n}")
    for j in shape.agents():
        b = allocation.bundles[j]
        if len(b) != shape.p or any(not (1 <= x <= shape.n) for x in b):
            return AllocationCheck(False, f"agent {j} holds malformed bundle {b}")
    for i in shape.categories():
        seen: dict[int, int] = {}
        for j in shape.agents():
            item = allocation.bundles[j][i - 1]
            if item in seen:
                return AllocationCheck(
                    False,
                    f"item {item} of category {i} assigned to agents {seen[item]} and {j}",
                    category=i,
                    item=item,
                )
            seen[item] = j
    return AllocationCheck(True)


def _require_valid(profile: Profile, allocation: Allocation) -> None:
    check = validate_allocation(profile.shape, allocation)
    if not check.ok:
        raise ValidationError(f"invalid allocation: {check.detail}")


def utilitarian_rank(profile: Profile, allocation: Allocation) -> int:
    """Sum of realized ranks over agents (lower is better)."""
    _require_valid(profile, allocation)
    return sum(profile.pref(j).rank_of(allocation[j]) for j in profile.shape.agents())


def egalitarian_rank(profile: Profile, allocation: Allocation) -> int:
    """Worst realized rank over agents (lower is better)."""
    _require_valid(profile, allocation)
    return max(profile.pref(j).rank_of(allocation[j]) for j in profile.shape.agents())


# JSON wire format helpers. Profiles: {"n":3,"p":2,"preferences":[[[1,2],...],...]}
# (agent order, most preferred first). Allocations: {"bundles":{"1":[1,2],...}}.


def _shape_from_json(data: Mapping) -> DomainShape:
    try:
        n, p = data["n"], data["p"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"missing shape field: {exc}") from None
    return DomainShape(n, p)


def profile_to_json(profile: Profile) -> dict:
    return {
        "n": profile.shape.n,
        "p": profile.shape.p,
        "preferences": [[list(b) for b in pref.order] for pref in profile.preferences],
    }


def profile_from_json(data: Mapping) -> Profile:
    shape = _shape_from_json(data)
    prefs_raw = data.get("preferences")
    if not isinstance(prefs_raw, list) or len(prefs_raw) != shape.n:
        raise ValidationError(f"profile needs a 'preferences' list of length {shape.n}")
    prefs = []
    for j, raw in enumerate(prefs_raw, 1):
        try:
            prefs.append(Preference(shape, raw))
        except ValidationError as exc:
            raise ValidationError(f"agent {j}: {exc}") from None
    return Profile(shape, prefs)


def allocation_to_json(allocation: Allocation) -> dict:
    return {"bundles": {str(j): list(b) for j, b in sorted(allocation.bundles.items())}}


def allocation_from_json(shape: DomainShape, data: Mapping) -> Allocation:
    raw = data.get("bundles")
    if not isinstance(raw, Mapping):
        raise ValidationError("allocation needs a 'bundles' mapping")
    bundles = {}
    for key, value in raw.items():
        try:
            agent = int(key)
        except (TypeError, ValueError):
            raise ValidationError(f"agent key {key!r} is not an integer") from None
        bundles[agent] = shape.validate_bundle(value)
    return Allocation(bundles)
