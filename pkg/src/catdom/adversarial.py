"""Constructive worst-case profiles for sequential picking.

``worst_case_profile`` builds, for a picking order and per-agent
optimistic/pessimistic behaviors, one profile on which every agent
simultaneously realizes her worst-case rank bound exactly. The profile is
self-validating: the constructor replays it and raises if any agent ends up
off her bound.

Construction sketch (writing ``own`` for agent j's all-j bundle, i.e. item j
in every category, and ``almost-j`` bundles for bundles equal to ``own``
except in one category):

* The replay is the identity: every agent picks item j in every category.
  Under that replay, item q of category e disappears exactly at the round
  where agent q picks from category e, which makes availability of every
  bundle a pure function of the order.
* Each agent's ranking has three parts: a few pinned almost-j bundles on top,
  then all unconstrained bundles in ascending bundle-index order, then a
  bottom block containing ``own`` and everything the order can force on her.
  The bottom block is sized so that ``own`` sits exactly at the agent's bound.
* Optimistic agents: the block is the product set "item j in suborder
  positions before the uninterrupted index K, any still-obtainable item in
  positions at and after K". At her early rounds (positions before K) some
  pinned almost-j bundle is still fully available and steers her to item j;
  the pins are chosen so that each dies (one of its items is taken by someone
  else) before the round where it could steer her wrong. From position K on,
  every consistent available bundle already lies in the block, whose top
  element is ``own``.
* Pessimistic agents: the block holds ``own`` plus one almost-j bundle per
  (suborder position l, still-obtainable item d != j), stacked so that later
  positions rank higher and, within a position, items ascend. At her round in
  position l, every rival item's worst consistent bundle is its position-l
  bundle, while item j's worst consistent bundle sits strictly higher, so she
  picks j.
* The top pin of every agent except the round-1 agent is the almost-j bundle
  holding the item of her cyclic predecessor in the first round's category;
  giving every agent that pinned bundle is a valid allocation
  (``near_optimal_allocation``) in which all agents except the round-1 agent
  get their rank-1 bundle and the round-1 agent gets rank 1 or 2.

``strategic_worst_profile`` does the analogous job for two fully strategic
agents (n = 2): a recursive profile on which the unique subgame-perfect
equilibrium gives both agents exactly their strategic bound.
"""

from __future__ import annotations

import itertools
from typing import Sequence

from .domain import (
    Allocation,
    Bundle,
    Preference,
    Profile,
    ValidationError,
    validate_allocation,
)
from .engine import Behavior, Optimistic, Pessimistic, run_csam
from .orders import PickingOrder, pickers_in_category, predecessor_in_category


class ConstructionError(RuntimeError):
    """The witness construction produced an inconsistent ranking."""


def _almost(own: Bundle, category: int, item: int) -> Bundle:
    return own[: category - 1] + (item,) + own[category:]


def _death_round(order: PickingOrder, agent: int, pin: Bundle) -> int:
    """Round at which a pinned almost-j bundle stops being fully available
    under the identity replay (its foreign item gets taken)."""
    for i, comp in enumerate(pin, 1):
        if comp != agent:
            return order.round_of(comp, i)
    raise AssertionError("pin equals the agent's own bundle")


def _best_cover(order: PickingOrder, agent: int, after_round: int) -> Bundle:
    """Almost-j pin alive past ``after_round`` that can never misdirect.

    Valid covers are pairs (q, e) where agent q picks category e at a round r
    with after_round < r < (agent's own round in e): the pin dies at r, which
    is before the agent's own e-round, so whenever it is alive it steers the
    agent to item j. Minimality of the uninterrupted index guarantees such a
    pair exists when one is requested. The latest-dying cover is chosen.
    """
    own = (agent,) * order.shape.p
    best: tuple[int, Bundle] | None = None
    for e in order.shape.categories():
        own_round = order.round_of(agent, e)
        for q in order.shape.agents():
            if q == agent:
                continue
            r = order.round_of(q, e)
            if after_round < r < own_round and (best is None or r > best[0]):
                best = (r, _almost(own, e, q))
    if best is None:
        raise ConstructionError(
            f"agent {agent}: no cover pin available past round {after_round}"
        )
    return best[1]


def _optimistic_ranking(order: PickingOrder, agent: int) -> list[Bundle]:
    shape = order.shape
    analytics = order.analytics
    rem = order.remaining
    j1, i1 = order.rounds[0]
    sub = analytics.suborder(agent)
    big_k = analytics.uninterrupted_index(agent)
    own = (agent,) * shape.p
    if shape.n == 1:
        return [own]
    t_at = {l: order.round_of(agent, sub[l - 1]) for l in range(1, shape.p + 1)}

    last_in_i1 = pickers_in_category(order, i1)[-1]
    l_bundle = _almost(own, i1, last_in_i1)

    if agent == j1 and big_k == 1:
        # the agent leads every category: the block is the whole space and the
        # bound is 1; rank own first and the near-optimal bundle second
        rest = sorted(b for b in shape.bundles() if b not in (own, l_bundle))
        return [own, l_bundle] + rest

    per_category: dict[int, tuple[int, ...]] = {}
    for l, cat in enumerate(sub, 1):
        if l < big_k:
            per_category[cat] = (agent,)
        else:
            per_category[cat] = tuple(sorted(rem.at(cat, t_at[l])))
    block = set(
        itertools.product(*(per_category[i] for i in shape.categories()))
    )
    block_rest = sorted(block - {own})

    pins: list[Bundle] = []
    if agent != j1:
        pins.append(_almost(own, i1, predecessor_in_category(order, i1, agent)))
    if big_k > 1:
        guard_round = t_at[big_k - 1]
        c = sub[big_k - 1]
        first_in_c = pickers_in_category(order, c)[0]
        if c != i1 and first_in_c != agent:
            pins.append(_almost(own, c, predecessor_in_category(order, c, agent)))
        if agent == j1:
            if not pins:
                pins.append(_best_cover(order, agent, guard_round))
            pins.append(l_bundle)
        helpers = [b for b in pins if b != l_bundle or agent != j1]
        if not any(_death_round(order, agent, b) > guard_round for b in helpers):
            pins.append(_best_cover(order, agent, guard_round))

    pins = list(dict.fromkeys(pins))
    for pin in pins:
        if pin in block:
            raise ConstructionError(f"agent {agent}: pin {pin} collides with the block")
    excluded = block | set(pins)
    middle = sorted(b for b in shape.bundles() if b not in excluded)
    return pins + middle + [own] + block_rest


def _pessimistic_ranking(order: PickingOrder, agent: int) -> list[Bundle]:
    shape = order.shape
    analytics = order.analytics
    rem = order.remaining
    j1, i1 = order.rounds[0]
    sub = analytics.suborder(agent)
    own = (agent,) * shape.p
    if shape.n == 1:
        return [own]
    t_at = {l: order.round_of(agent, sub[l - 1]) for l in range(1, shape.p + 1)}

    # tier l: almost-j bundles over the items of suborder position l that are
    # still obtainable at the agent's own round there
    tiers: dict[int, list[Bundle]] = {}
    for l, cat in enumerate(sub, 1):
        tiers[l] = [
            _almost(own, cat, d)
            for d in sorted(rem.at(cat, t_at[l]))
            if d != agent
        ]

    def stacked(skip: Bundle | None = None) -> list[Bundle]:
        out = [own]
        for l in range(shape.p, 0, -1):
            out.extend(b for b in tiers[l] if b != skip)
        return out

    if agent != j1:
        near = _almost(own, i1, predecessor_in_category(order, i1, agent))
        block_list = stacked()
        if near in set(block_list):
            raise ConstructionError(f"agent {agent}: near-optimal pin {near} inside the block")
        excluded = set(block_list) | {near}
        middle = sorted(b for b in shape.bundles() if b not in excluded)
        return [near] + middle + block_list

    last_in_i1 = pickers_in_category(order, i1)[-1]
    near = _almost(own, i1, last_in_i1)
    if shape.p == 1:
        # near is itself a block bundle here; own must take rank 1 (the bound
        # is 1), so near settles for rank 2
        block_list = stacked(skip=near)
        return [block_list[0], near] + block_list[1:]

    # swap: pin near on top, and anchor its candidate item with the all-foreign
    # bundle at the very bottom so the round-1 comparison still favors item j
    bottom = (last_in_i1,) * shape.p
    block_list = stacked(skip=near)
    if bottom in set(block_list) or bottom == near:
        raise ConstructionError(f"agent {agent}: bottom anchor {bottom} collides")
    excluded = set(block_list) | {near, bottom}
    middle = sorted(b for b in shape.bundles() if b not in excluded)
    return [near] + middle + block_list + [bottom]


def worst_case_profile(order: PickingOrder, behaviors: Sequence[Behavior]) -> Profile:
    """Profile on which every agent simultaneously hits her rank bound.

    Validates its own output by replay before returning; a failure raises
    ConstructionError rather than returning a near-miss.
    """
    shape = order.shape
    if len(behaviors) != shape.n:
        raise ValidationError(f"{len(behaviors)} behaviors given, expected {shape.n}")
    rankings: list[list[Bundle]] = []
    for j, b in enumerate(behaviors, 1):
        if isinstance(b, Optimistic):
            rankings.append(_optimistic_ranking(order, j))
        elif isinstance(b, Pessimistic):
            rankings.append(_pessimistic_ranking(order, j))
        else:
            raise ValidationError(
                f"agent {j}: worst-case profiles exist for optimistic or pessimistic "
                f"agents only, got {b!r}"
            )
    profile = Profile(shape, [Preference(shape, r) for r in rankings])
    _validate_witness(order, behaviors, profile)
    return profile


def _expected_bound(order: PickingOrder, behavior: Behavior, agent: int) -> int:
    from .bounds import optimistic_bound, pessimistic_bound

    if isinstance(behavior, Optimistic):
        return optimistic_bound(order.analytics, agent)
    return pessimistic_bound(order.analytics, agent)


def _validate_witness(order: PickingOrder, behaviors, profile: Profile) -> None:
    allocation, trace = run_csam(order, profile, behaviors)
    for record in trace.rounds:
        if record.item != record.agent:
            raise ConstructionError(
                f"replay broke at round {record.t}: agent {record.agent} picked item "
                f"{record.item} of category {record.category} instead of her own"
            )
    for j in order.shape.agents():
        own = (j,) * order.shape.p
        realized = profile.pref(j).rank_of(allocation[j])
        expected = _expected_bound(order, behaviors[j - 1], j)
        if allocation[j] != own or realized != expected:
            raise ConstructionError(
                f"agent {j} realized {allocation[j]} at rank {realized}, "
                f"expected {own} at rank {expected}"
            )
    near_optimal_allocation(order, profile)


def near_optimal_allocation(order: PickingOrder, profile: Profile) -> Allocation:
    """Allocation giving every agent her pinned almost-own bundle in the first
    round's category: rank 1 for everyone except possibly the round-1 agent,
    who gets rank 1 or 2.

    Expects a profile built by worst_case_profile for the same order.
    """
    shape = order.shape
    if profile.shape != shape:
        raise ValidationError("profile shape does not match order shape")
    j1, i1 = order.rounds[0]
    bundles = {}
    for j in shape.agents():
        own = (j,) * shape.p
        bundles[j] = _almost(own, i1, predecessor_in_category(order, i1, j))
    allocation = Allocation(bundles)
    check = validate_allocation(shape, allocation)
    if not check.ok:
        raise ConstructionError(f"near-optimal allocation invalid: {check.detail}")
    for j in shape.agents():
        rank = profile.pref(j).rank_of(allocation[j])
        limit = 2 if j == j1 else 1
        if rank > limit:
            raise ConstructionError(
                f"near-optimal bundle of agent {j} sits at rank {rank}, expected <= {limit}"
            )
    return allocation


def strategic_worst_profile(order: PickingOrder) -> Profile:
    """Two-agent profile whose unique subgame-perfect equilibrium puts both
    agents exactly at their strategic bound.

    Built by recursion on the first round: remove the first round's category,
    build a tight profile for the reduced order, then splice the removed
    category back so that the round-1 agent takes item 1 there, the other
    agent item 2, and both equilibrium bundles drop by exactly the factor the
    extra category contributes to the bound.
    """
    shape = order.shape
    if shape.n != 2:
        raise ValidationError(
            f"strategic witnesses are constructed for two agents, got n={shape.n}"
        )
    rankings, _ = _strategic_rec(order.rounds)
    return Profile(shape, [Preference(shape, rankings[j]) for j in (1, 2)])


def _strategic_rec(rounds) -> tuple[dict[int, list[Bundle]], dict[int, Bundle]]:
    cats = sorted({i for _, i in rounds})
    j_star, i_star = rounds[0]
    other = 3 - j_star
    if len(cats) == 1:
        ranking = [(1,), (2,)]
        return {1: list(ranking), 2: list(ranking)}, {j_star: (1,), other: (2,)}

    reduced = tuple((j, i) for j, i in rounds if i != i_star)
    sub_rankings, sub_spne = _strategic_rec(reduced)
    pos = cats.index(i_star)

    def ext(bundle: Bundle, item: int) -> Bundle:
        return bundle[:pos] + (item,) + bundle[pos:]

    rankings: dict[int, list[Bundle]] = {}
    for agent in (1, 2):
        seq = sub_rankings[agent]
        pivot = seq.index(sub_spne[agent])
        top, bottom = seq[:pivot], seq[pivot + 1 :]
        b = sub_spne[agent]
        if agent == j_star:
            rankings[agent] = (
                [ext(d, 1) for d in top]
                + [ext(d, 2) for d in top]
                + [ext(b, 1), ext(b, 2)]
                + [ext(d, 1) for d in bottom]
                + [ext(d, 2) for d in bottom]
            )
        else:
            rankings[agent] = (
                [ext(d, 1) for d in top]
                + [ext(b, 1)]
                + [ext(d, 1) for d in bottom]
                + [ext(d, 2) for d in top]
                + [ext(b, 2)]
                + [ext(d, 2) for d in bottom]
            )
    spne = {j_star: ext(sub_spne[j_star], 1), other: ext(sub_spne[other], 2)}
    return rankings, spne
