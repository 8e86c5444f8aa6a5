"""Subgame-perfect equilibrium play of a picking order.

Full-information backward induction over the extensive-form game where each
round's agent chooses any available item of the round's category. Strict
preferences make the equilibrium outcome unique: two choices at the same node
give the chooser different final bundles (they differ in that category), so
argmax ties cannot occur.

States are canonical: the per-agent partial pick matrix determines the round
number and all availability, so memoization keys on it alone.
"""

from __future__ import annotations

from dataclasses import dataclass

from .domain import Allocation, Bundle, CapacityError, Profile, ValidationError
from .orders import PickingOrder

DEFAULT_STATE_CAP = 10_000_000

# picks-state: tuple over agents of tuple over categories, 0 = not picked yet
State = tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class SpneRound:
    t: int
    agent: int
    category: int
    item: int


def _available(state: State, shape, category: int) -> list[int]:
    gone = {row[category - 1] for row in state}
    return [d for d in range(1, shape.n + 1) if d not in gone]


def solve_spne(
    order: PickingOrder,
    profile: Profile,
    state_cap: int = DEFAULT_STATE_CAP,
    collect_trace: bool = False,
) -> tuple[Allocation, tuple[SpneRound, ...] | None]:
    """Equilibrium allocation (and optionally the equilibrium path).

    Refuses with CapacityError when the memo table would exceed ``state_cap``
    distinct states; the result is exact, never truncated.
    """
    shape = order.shape
    if profile.shape != shape:
        raise ValidationError("profile shape does not match order shape")
    rounds = order.rounds
    total = len(rounds)
    prefs = [profile.pref(j) for j in shape.agents()]

    memo: dict[State, tuple[Bundle, ...]] = {}

    def solve(t: int, state: State) -> tuple[Bundle, ...]:
        if t > total:
            return state
        cached = memo.get(state)
        if cached is not None:
            return cached
        agent, category = rounds[t - 1]
        best_outcome = None
        best_rank = None
        for d in _available(state, shape, category):
            row = list(state[agent - 1])
            row[category - 1] = d
            child = state[: agent - 1] + (tuple(row),) + state[agent:]
            outcome = solve(t + 1, child)
            rank = prefs[agent - 1].rank_of(outcome[agent - 1])
            if best_rank is None or rank < best_rank:
                best_rank = rank
                best_outcome = outcome
        assert best_outcome is not None
        if len(memo) >= state_cap:
            raise CapacityError(
                f"equilibrium solving exceeded the state cap of {state_cap} states"
            )
        memo[state] = best_outcome
        return best_outcome

    root: State = tuple((0,) * shape.p for _ in shape.agents())
    final = solve(1, root)
    allocation = Allocation({j: final[j - 1] for j in shape.agents()})

    trace = None
    if collect_trace:
        path = []
        state = root
        for t, (agent, category) in enumerate(rounds, 1):
            item = final[agent - 1][category - 1]
            path.append(SpneRound(t, agent, category, item))
            row = list(state[agent - 1])
            row[category - 1] = item
            state = state[: agent - 1] + (tuple(row),) + state[agent:]
        trace = tuple(path)
    return allocation, trace


def state_space_size(order: PickingOrder) -> int:
    """Number of distinct reachable decision states plus one terminal class."""
    shape = order.shape
    rounds = order.rounds
    total = len(rounds)
    root: State = tuple((0,) * shape.p for _ in shape.agents())
    frontier = [root]
    count = 0
    for t in range(1, total + 1):
        count += len(frontier)
        agent, category = rounds[t - 1]
        nxt = set()
        for state in frontier:
            for d in _available(state, shape, category):
                row = list(state[agent - 1])
                row[category - 1] = d
                nxt.add(state[: agent - 1] + (tuple(row),) + state[agent:])
        frontier = list(nxt)
    return count + 1
