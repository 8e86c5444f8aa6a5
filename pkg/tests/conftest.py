"""Shared instances reused across test modules.

The 3x2 instance and its mixed-behavior order exercise every interesting
code path at desk scale: an interrupted suborder for agents 1 and 2, a
pessimistic agent with slack 2 in both categories, and a profile whose
serial-dictatorship outcome differs from the mixed-order outcome.
"""

import pytest

import catdom as cd


def pref_of(shape, rows):
    """Build a Preference from compact digit strings like "12"."""
    return cd.Preference(shape, [tuple(int(ch) for ch in row) for row in rows])


def profile_of(shape, rows_by_agent):
    prefs = [pref_of(shape, rows_by_agent[j]) for j in shape.agents()]
    return cd.Profile(shape, prefs)


SHAPE_3X2 = cd.DomainShape(3, 2)

PROFILE_3X2_ROWS = {
    1: ["12", "21", "32", "33", "31", "22", "23", "13", "11"],
    2: ["32", "12", "21", "13", "33", "11", "31", "23", "22"],
    3: ["13", "12", "11", "22", "32", "21", "33", "31", "23"],
}

MIXED_ORDER_3X2_ROUNDS = ((1, 1), (2, 2), (3, 1), (3, 2), (2, 1), (1, 2))
MIXED_BEHAVIORS_3X2 = (cd.OPTIMISTIC, cd.OPTIMISTIC, cd.PESSIMISTIC)

SHAPE_2X2 = cd.DomainShape(2, 2)

GAME_PROFILE_2X2_ROWS = {
    1: ["22", "12", "11", "21"],
    2: ["12", "11", "22", "21"],
}
GAME_ORDER_2X2_ROUNDS = ((1, 1), (2, 2), (2, 1), (1, 2))

WELFARE_PROFILE_2X2_ROWS = {
    1: ["11", "12", "22", "21"],
    2: ["12", "21", "11", "22"],
}


@pytest.fixture
def profile_3x2():
    return profile_of(SHAPE_3X2, PROFILE_3X2_ROWS)


@pytest.fixture
def mixed_order_3x2():
    return cd.PickingOrder(SHAPE_3X2, MIXED_ORDER_3X2_ROUNDS)


@pytest.fixture
def game_profile_2x2():
    return profile_of(SHAPE_2X2, GAME_PROFILE_2X2_ROWS)


@pytest.fixture
def game_order_2x2():
    return cd.PickingOrder(SHAPE_2X2, GAME_ORDER_2X2_ROUNDS)


@pytest.fixture
def welfare_profile_2x2():
    return profile_of(SHAPE_2X2, WELFARE_PROFILE_2X2_ROWS)
