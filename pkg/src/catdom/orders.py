"""Picking orders for sequential category-by-category allocation.

An order fixes, for each of the ``n*p`` rounds, which agent picks from which
category; every (agent, category) pair occurs exactly once. Everything the
bound and witness machinery downstream needs is a function of the order
alone:

* each agent's category suborder (the sequence her categories come up in),
* the slack ``k`` of each pick (1 plus the number of later picks in the same
  category, i.e. how many items are still on the table including hers),
* the uninterrupted index ``K``: the earliest position in her suborder after
  which no other agent's pick can invalidate availability reasoning between
  her own rounds (see ``analyze_order``),
* the remaining-picker sets per (category, round).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .domain import DomainShape, ValidationError

Round = tuple[int, int]


class PickingOrder:
    """A permutation of all (agent, category) pairs; rounds are 1-based."""

    __slots__ = ("shape", "rounds", "_round_of", "__dict__")

    def __init__(self, shape: DomainShape, rounds: Iterable[Sequence[int]]):
        seq = tuple((int(a), int(c)) for a, c in rounds)
        expected = {(j, i) for j in shape.agents() for i in shape.categories()}
        if len(seq) != len(expected) or set(seq) != expected:
            raise ValidationError(
                f"order must list every (agent, category) pair of a {shape.n}x{shape.p} "
                f"domain exactly once, got {seq}"
            )
        self.shape = shape
        self.rounds = seq
        self._round_of = {pair: t for t, pair in enumerate(seq, 1)}

    def round_of(self, agent: int, category: int) -> int:
        try:
            return self._round_of[(agent, category)]
        except KeyError:
            raise ValidationError(f"no round for agent {agent}, category {category}") from None

    def rounds_of_agent(self, agent: int) -> list[tuple[int, int]]:
        """(round, category) pairs for one agent, in round order."""
        return [(t, i) for t, (j, i) in enumerate(self.rounds, 1) if j == agent]

    @cached_property
    def analytics(self) -> "OrderAnalytics":
        return analyze_order(self)

    @cached_property
    def remaining(self) -> "RemainingItemSets":
        return remaining_item_sets(self)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, PickingOrder)
            and self.shape == other.shape
            and self.rounds == other.rounds
        )

    def __hash__(self) -> int:
        return hash((self.shape, self.rounds))

    def __repr__(self) -> str:
        return f"PickingOrder({self.rounds})"


def serial_dictatorship_order(agent_order: Sequence[int], p: int) -> PickingOrder:
    """Each agent, in the given order, picks from categories 1..p back to back."""
    n = len(agent_order)
    shape = DomainShape(n, p)
    if sorted(agent_order) != list(range(1, n + 1)):
        raise ValidationError(f"agent order {agent_order} is not a permutation of 1..{n}")
    rounds = [(j, i) for j in agent_order for i in shape.categories()]
    return PickingOrder(shape, rounds)


def balanced_order(agent_order: Sequence[int], p: int) -> PickingOrder:
    """Category phases with alternating agent direction.

    Phase ``i`` assigns category ``i`` to all agents: in the given order for
    odd phases, reversed for even phases. Every agent's slacks then pair up to
    ``n + 1`` across consecutive phases, which requires an even ``p``.
    """
    n = len(agent_order)
    if sorted(agent_order) != list(range(1, n + 1)):
        raise ValidationError(f"agent order {agent_order} is not a permutation of 1..{n}")
    if p % 2:
        raise ValidationError(f"balanced orders need an even number of categories, got p={p}")
    shape = DomainShape(n, p)
    rounds = []
    for i in shape.categories():
        phase = agent_order if i % 2 else list(reversed(agent_order))
        rounds.extend((j, i) for j in phase)
    return PickingOrder(shape, rounds)


def interrupter_order(n: int, p: int) -> PickingOrder:
    """Balanced order over agents 1..n-1 with agent n's picks inserted as one
    block immediately before the final n-1 rounds.

    The inserted agent picks all categories back to back while the others'
    final picks are still pending, which is the pattern that rewards giving
    the interrupter a pessimistic stance in mixed-behavior comparisons.
    """
    if n < 2:
        raise ValidationError(f"interrupter orders need at least two agents, got n={n}")
    base = balanced_order(list(range(1, n)), p).rounds
    block = [(n, i) for i in range(1, p + 1)]
    cut = len(base) - (n - 1)
    rounds = list(base[:cut]) + block + list(base[cut:])
    return PickingOrder(DomainShape(n, p), rounds)


@dataclass(frozen=True)
class OrderAnalytics:
    """Per-agent order statistics; see module docstring for definitions."""

    shape: DomainShape
    suborders: Mapping[int, tuple[int, ...]]
    slacks: Mapping[tuple[int, int], int]
    uninterrupted: Mapping[int, int]

    def suborder(self, agent: int) -> tuple[int, ...]:
        return self.suborders[agent]

    def slack(self, agent: int, category: int) -> int:
        return self.slacks[(agent, category)]

    def uninterrupted_index(self, agent: int) -> int:
        return self.uninterrupted[agent]


def pickers_in_category(order: PickingOrder, category: int) -> tuple[int, ...]:
    """Agents picking from one category, in round order."""
    if category not in order.shape.categories():
        raise ValidationError(f"category {category} outside 1..{order.shape.p}")
    return tuple(j for j, i in order.rounds if i == category)


def predecessor_in_category(order: PickingOrder, category: int, agent: int) -> int:
    """The agent picking from ``category`` immediately before ``agent``; cyclic,
    so the first picker's predecessor is the last picker."""
    seq = pickers_in_category(order, category)
    return seq[seq.index(agent) - 1]


def analyze_order(order: PickingOrder) -> OrderAnalytics:
    shape = order.shape
    n, p = shape.n, shape.p

    suborders: dict[int, tuple[int, ...]] = {j: () for j in shape.agents()}
    own_round: dict[int, list[int]] = {j: [] for j in shape.agents()}
    for t, (j, i) in enumerate(order.rounds, 1):
        suborders[j] += (i,)
        own_round[j].append(t)

    # slack = 1 + number of later picks in the same category
    slacks: dict[tuple[int, int], int] = {}
    for i in shape.categories():
        seq = pickers_in_category(order, i)
        for pos, j in enumerate(seq):
            slacks[(j, i)] = n - pos

    # pred_round[(j, i)]: round of the pick in category i immediately before
    # agent j's own, or 0 when j is that category's first picker.
    pred_round: dict[tuple[int, int], int] = {}
    for i in shape.categories():
        seq = pickers_in_category(order, i)
        prev = 0
        for j in seq:
            pred_round[(j, i)] = prev
            prev = order.round_of(j, i)

    uninterrupted: dict[int, int] = {}
    for j in shape.agents():
        sub = suborders[j]
        rounds_j = own_round[j]
        k_value = p
        for m in range(1, p + 1):
            # position m works when, for every later position l, nobody picks
            # from category sub[l] strictly between the agent's rounds m and l
            ok = True
            for l in range(m + 1, p + 1):
                if pred_round[(j, sub[l - 1])] > rounds_j[m - 1]:
                    ok = False
                    break
            if ok:
                k_value = m
                break
        uninterrupted[j] = k_value

    return OrderAnalytics(shape, suborders, slacks, uninterrupted)


class RemainingItemSets:
    """For each category ``i`` and round ``t``, the set of agents whose pick in
    category ``i`` happens at round ``t`` or later.

    Under the identity replay used by the witness constructions, agent ``q``
    picks item ``q`` in every category, so these sets double as the items
    still available in category ``i`` entering round ``t``.
    """

    __slots__ = ("shape", "_sets")

    def __init__(self, shape: DomainShape, sets: Mapping[tuple[int, int], frozenset[int]]):
        self.shape = shape
        self._sets = dict(sets)

    def at(self, category: int, round_: int) -> frozenset[int]:
        try:
            return self._sets[(category, round_)]
        except KeyError:
            raise ValidationError(
                f"no remaining set for category {category} at round {round_}"
            ) from None


def remaining_item_sets(order: PickingOrder) -> RemainingItemSets:
    shape = order.shape
    total = shape.n * shape.p
    sets: dict[tuple[int, int], frozenset[int]] = {}
    for i in shape.categories():
        rounds_by_agent = {j: order.round_of(j, i) for j in shape.agents()}
        for t in range(1, total + 2):
            sets[(i, t)] = frozenset(j for j, r in rounds_by_agent.items() if r >= t)
    return RemainingItemSets(shape, sets)


def order_to_json(order: PickingOrder) -> dict:
    return {
        "n": order.shape.n,
        "p": order.shape.p,
        "rounds": [list(r) for r in order.rounds],
    }


def order_from_json(data: Mapping) -> PickingOrder:
    try:
        shape = DomainShape(data["n"], data["p"])
        rounds = data["rounds"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"order document missing field: {exc}") from None
    if not isinstance(rounds, list):
        raise ValidationError("order 'rounds' must be a list of [agent, category] pairs")
    return PickingOrder(shape, rounds)


def load_order(path: str) -> PickingOrder:
    with open(path) as fh:
        return order_from_json(json.load(fh))
