import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qpoker.game import StrategicGame, as_fraction

rationals = st.fractions(min_value=-50, max_value=50, max_denominator=12)


@st.composite
def games(draw):
    n = draw(st.integers(2, 3))
    sizes = [draw(st.integers(1, 3)) for _ in range(n)]
    labels = [[f"p{i}s{k}" for k in range(m)] for i, m in enumerate(sizes)]
    fracs = {}
    for prof in np.ndindex(*sizes):
        fracs[prof] = [draw(rationals) for _ in range(n)]
    return StrategicGame.from_fractions(labels, fracs, name="random")


@given(games())
def test_json_roundtrip_is_exact(game):
    back = StrategicGame.from_json(json.dumps(game.to_json()))
    assert back.equals(game)
    assert back.name == game.name


@given(games())
def test_normalized_keeps_values(game):
    norm = game.normalized()
    assert norm.equals(game)
    assert norm.denom <= game.denom


def test_rational_strings_in_schema():
    g = StrategicGame.from_table([("a", "b"), ("x",)], [[("5/2", "-5/2")], [(0, 0)]])
    data = g.to_json()
    assert data["payoffs"][0][0] == ["5/2", "-5/2"]
    assert data["zero_sum"] is True and data["players"] == 2
    assert g.payoff_by_label("a", "x") == (Fraction(5, 2), Fraction(-5, 2))


def test_from_json_rejects_inconsistent_records():
    g = StrategicGame.from_table([("a",), ("x",)], [[(1, 0)]])
    data = g.to_json()
    with pytest.raises(ValueError):
        StrategicGame.from_json({**data, "zero_sum": True})
    with pytest.raises(ValueError):
        StrategicGame.from_json({**data, "players": 3})


def test_floats_are_refused():
    with pytest.raises(TypeError):
        as_fraction(0.5)
    with pytest.raises(ValueError):
        StrategicGame((("a",), ("x",)), np.zeros((1, 2, 2), dtype=np.int16))


def test_restrict_and_relabel():
    g = StrategicGame.from_table([("a", "b"), ("x", "y")], [[(1, 2), (3, 4)], [(5, 6), (7, 8)]])
    sub = g.restrict([[1], [1, 0]])
    assert sub.labels == (("b",), ("y", "x"))
    assert sub.payoff((0, 0)) == (7, 8)
    assert g.relabel([("A", "B"), ("X", "Y")]).payoff_by_label("B", "X") == (5, 6)
    assert g.numer.flags.writeable is False
