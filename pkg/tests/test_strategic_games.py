import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qpoker import strategic_games as sg
from qpoker.game import StrategicGame

F = Fraction
probs = st.fractions(0, 1, max_denominator=20)


def mix(x):
    return (x, 1 - x)


def test_builtin_tables(pd_game, chicken_game):
    assert pd_game.payoff((0, 1)) == (0, 5) and pd_game.payoff((1, 1)) == (1, 1)
    assert chicken_game.payoff((1, 1)) == (-1, -1)
    with pytest.raises(KeyError):
        sg.builtin_game("poker")


def test_expected_payoff_examples(sp_game, pd_game):
    assert sg.expected_payoff(sp_game, [mix(F(2, 3)), mix(F(2, 3))]) == (F(5, 6), F(-5, 6))
    assert sg.expected_payoff(pd_game, [(0, 1), (1, 0)]) == (5, 0)


@given(probs, probs, probs, probs)
def test_expected_payoff_is_linear_in_each_player(a, b, c, t):
    game = sg.builtin_game("chicken")
    other = mix(c)
    blend = mix(t * a + (1 - t) * b)
    lhs = sg.expected_payoff(game, [blend, other])
    ra = sg.expected_payoff(game, [mix(a), other])
    rb = sg.expected_payoff(game, [mix(b), other])
    assert lhs == tuple(t * x + (1 - t) * y for x, y in zip(ra, rb))


def test_profile_validation(sp_game):
    with pytest.raises(sg.ShapeError):
        sg.expected_payoff(sp_game, [(1, 0, 0), (1, 0)])
    with pytest.raises(ValueError):
        sg.expected_payoff(sp_game, [(F(1, 2), F(1, 3)), (1, 0)])


def test_is_nash_examples(pd_game, chicken_game):
    ok = sg.is_nash(pd_game, [(0, 1), (0, 1)])
    assert ok.is_nash and ok.regret == 0
    bad = sg.is_nash(pd_game, [(1, 0), (1, 0)])
    assert not bad.is_nash and bad.regret == 2
    half = [mix(F(1, 2)), mix(F(1, 2))]
    assert sg.is_nash(chicken_game, half).is_nash
    assert sg.expected_payoff(chicken_game, half) == (1, 1)
    assert sg.pure_nash_equilibria(pd_game) == [(1, 1)]


def test_sp_solution(sp_game):
    sol = sg.solve_zero_sum_2x2(sp_game)
    assert sol.profile == ((F(1, 3), F(2, 3)), (F(2, 3), F(1, 3)))
    assert sol.value == F(5, 6) and not sol.pure
    check = sg.is_nash(sp_game, sol.profile)
    assert check.is_nash and check.regret == 0
    assert sg.security_level(sp_game, 0, sol.profile[0]) == F(5, 6)
    assert sg.security_level(sp_game, 1, sol.profile[1]) == F(-5, 6)
    freq = sg.simplified_poker_frequencies(sol)
    assert (freq.bluff_frequency, freq.call_frequency) == (F(1, 3), F(1, 3))


def test_matching_pennies_and_saddle_point():
    pennies = StrategicGame.from_table([("a", "b"), ("x", "y")],
                                       [[(1, -1), (-1, 1)], [(-1, 1), (1, -1)]])
    sol = sg.solve_zero_sum_2x2(pennies)
    assert sol.profile == ((F(1, 2), F(1, 2)), (F(1, 2), F(1, 2))) and sol.value == 0
    saddle = StrategicGame.from_table([("a", "b"), ("x", "y")],
                                      [[(2, -2), (3, -3)], [(1, -1), (4, -4)]])
    sol = sg.solve_zero_sum_2x2(saddle)
    assert sol.pure and sol.value == 2
    with pytest.raises(ValueError):
        sg.solve_zero_sum_2x2(sg.builtin_game("pd"))


@given(st.lists(st.integers(-9, 9), min_size=4, max_size=4))
def test_zero_sum_values_are_mirror_images(a):
    game = StrategicGame.from_table([("a", "b"), ("x", "y")],
                                    [[(a[0], -a[0]), (a[1], -a[1])], [(a[2], -a[2]), (a[3], -a[3])]])
    sol = sg.solve_zero_sum_2x2(game)
    assert sg.security_level(game, 0, sol.profile[0]) == sol.value
    assert sg.security_level(game, 1, sol.profile[1]) == -sol.value
    assert sg.is_nash(game, sol.profile).is_nash


def test_nash_shapley_solution(ns_game):
    sol = sg.solve_nash_shapley(ns_game)
    p = math.sqrt(7 / 5) - 1
    assert abs(sol.p - 0.1832159566) < 1e-9 and abs(sol.p - p) < 1e-12
    assert abs(sol.z - (4 * p + 8) / (5 * p + 12)) < 1e-12
    assert abs(sol.z - 0.676) < 1e-3
    assert max(sol.indifference_residuals) < 1e-9 and sol.regret < 1e-9
    assert [str(v) for v in sol.payoffs_exact] == ["-2/5", "-2/5", "4/5"]
    assert sg.is_nash(ns_game, sol.profile, 1e-9).is_nash


def test_bluff_weight_reading(ns_game):
    # the (4p+8)/(5p+12) weight belongs to the direct strategy u1; on the bluff it is not stable
    sol = sg.solve_nash_shapley(ns_game)
    p, z = sol.p, sol.z
    swapped = ((1 - p, p), (1 - p, p), (1 - z, z))
    assert not sg.is_nash(ns_game, swapped, 1e-6).is_nash


def test_snap_off():
    p = math.sqrt(7 / 5) - 1
    assert abs(sg.snap_off_probability(p) - 2 / 7) < 1e-12
    assert sg.snap_off_probability(0) == 0
    assert sg.snap_off_probability(1) == 0.75
    with pytest.raises(ValueError):
        sg.snap_off_probability(1.5)
    est, se = sg.simulate_snap_off(p, 200_000, np.random.default_rng(1))
    assert abs(est - 2 / 7) < 4 * se


def test_product_distributions():
    d = sg.tableau_distribution(1, 0)
    assert d[0, 0] == 1 and sum(d.flat) == 1
    assert all(x == F(1, 4) for x in sg.tableau_distribution(F(1, 2), F(1, 2)).flat)
    assert not sg.is_product_realizable(np.array([[F(1, 2), 0], [0, F(1, 2)]], dtype=object))
    assert sg.is_product_realizable(np.array([[0, 0], [1, 0]], dtype=object))


@given(probs, probs)
def test_product_determinant_identity(p, q):
    assert sg.is_product_realizable(sg.tableau_distribution(p, q))


def test_mediated_game(chicken_game, pd_game):
    third = F(1, 3)
    rho = [[third, third], [third, 0]]
    med = sg.build_mediated_game(chicken_game, rho)
    assert med.payoff("C'", "C'") == (F(5, 3), F(5, 3))
    assert med.as_game().shape == (4, 4)
    check = sg.is_correlated_equilibrium(chicken_game, rho)
    assert check.is_correlated_equilibrium and check.payoff == (F(5, 3), F(5, 3))
    coin = sg.build_mediated_game(chicken_game, [[0, F(1, 2)], [F(1, 2), 0]])
    assert coin.payoff("C'", "C'") == (F(3, 2), F(3, 2))
    dd = sg.build_mediated_game(pd_game, [[1, 0], [0, 0]])
    assert dd.payoff("D'", "D'") == pd_game.payoff((1, 1))
    assert dd.payoff("A'", "B'") == pd_game.payoff((0, 1))


def test_prisoners_dilemma_correlated(pd_game):
    assert sg.is_correlated_equilibrium(pd_game, [[0, 0], [0, 1]]).is_correlated_equilibrium
    res = sg.is_correlated_equilibrium(pd_game, [[F(1, 10), 0], [0, F(9, 10)]])
    assert not res.is_correlated_equilibrium and res.violation > 0


@given(st.lists(st.integers(0, 10), min_size=4, max_size=4).filter(lambda w: sum(w[:3]) > 0))
def test_pd_rejects_any_mass_off_equilibrium(w):
    total = sum(w)
    rho = [[F(w[0], total), F(w[1], total)], [F(w[2], total), F(w[3], total)]]
    assert not sg.is_correlated_equilibrium(sg.builtin_game("pd"), rho).is_correlated_equilibrium


def test_bad_rho_rejected(chicken_game):
    with pytest.raises(ValueError):
        sg.build_mediated_game(chicken_game, [[F(1, 2), F(1, 2)], [F(1, 2), 0]])
    with pytest.raises(ValueError):
        sg.build_mediated_game(chicken_game, [[F(3, 2), F(-1, 2)], [0, 0]])
