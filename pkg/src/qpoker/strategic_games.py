"""Classical analysis: mixed extension, equilibria, Bayes, correlated equilibria."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
import sympy as sp

from . import poker_models as pm
from .game import StrategicGame

MixedProfile = Sequence[Sequence]  # one probability vector per player


class ShapeError(ValueError):
    pass


# ---------------------------------------------------------------------------
# built-in games

def _prisoners_dilemma() -> StrategicGame:
    return StrategicGame.from_table(
        [("s1", "s2"), ("t1", "t2")],
        [[(3, 3), (0, 5)], [(5, 0), (1, 1)]], name="PrisonersDilemma")


def _chicken() -> StrategicGame:
    return StrategicGame.from_table(
        [("s1", "s2"), ("t1", "t2")],
        [[(2, 2), (0, 3)], [(3, 0), (-1, -1)]], name="Chicken")


def reduced_poker(spec: pm.PokerSpec) -> StrategicGame:
    """Strategic form reduced by the elimination protocol, with the standard strategy labels."""
    full = pm.strategic_form(spec)
    reduced, quot, _ = pm.eliminate(full)
    named = pm.name_survivors(spec, reduced, quot, full)
    if named is None:
        raise RuntimeError(f"elimination of {spec} did not end at the named strategies")
    return named.relabel(named.labels, name=f"{spec.variant.value}Reduced")


_BUILTINS = {
    "prisonersdilemma": _prisoners_dilemma,
    "chicken": _chicken,
    "simplifiedpokerreduced": lambda: reduced_poker(pm.SIMPLIFIED_POKER),
    "nashshapleyreduced": lambda: reduced_poker(pm.NASH_SHAPLEY),
}
_ALIASES = {"pd": "prisonersdilemma", "sp": "simplifiedpokerreduced",
            "ns": "nashshapleyreduced", "simplifiedpoker": "simplifiedpokerreduced",
            "nashshapley": "nashshapleyreduced"}
_cache: dict[str, StrategicGame] = {}


def builtin_game(name: str) -> StrategicGame:
    key = name.lower().replace("_", "").replace("-", "").replace("'", "")
    key = _ALIASES.get(key, key)
    if key not in _BUILTINS:
        raise KeyError(f"unknown built-in game {name!r}; known: {sorted(_BUILTINS)}")
    if key not in _cache:
        _cache[key] = _BUILTINS[key]()
    return _cache[key]


# ---------------------------------------------------------------------------
# mixed extension

def _is_exact(profile) -> bool:
    return all(isinstance(x, (int, Fraction)) for vec in profile for x in vec)


def check_profile(game: StrategicGame, profile: MixedProfile, atol: float = 1e-12):
    if len(profile) != game.n_players:
        raise ShapeError(f"profile has {len(profile)} vectors for {game.n_players} players")
    for i, vec in enumerate(profile):
        if len(vec) != game.shape[i]:
            raise ShapeError(f"player {i + 1}: {len(vec)} weights for {game.shape[i]} strategies")
        if any(x < 0 for x in vec):
            raise ValueError(f"player {i + 1}: negative probability")
        total = sum(vec)
        if (total != 1) if _is_exact([vec]) else abs(total - 1) > atol:
            raise ValueError(f"player {i + 1}: probabilities sum to {total}")


def product_distribution(profile: MixedProfile, game: StrategicGame) -> np.ndarray:
    """Joint distribution over pure profiles, shaped like the game."""
    check_profile(game, profile)
    if _is_exact(profile):
        out = np.empty(game.shape, dtype=object)
        for prof in game.profiles():
            out[prof] = math.prod((Fraction(profile[i][s]) for i, s in enumerate(prof)), start=Fraction(1))
        return out
    out = np.ones(())
    for vec in profile:
        out = np.multiply.outer(out, np.asarray(vec, dtype=float))
    return out


def expected_payoff(game: StrategicGame, profile: MixedProfile) -> tuple:
    """Product distribution pushed through the game, then averaged.

    Exact (Fractions) when every weight is an int or Fraction.
    """
    dist = product_distribution(profile, game)
    return expectation(game, dist)


def expectation(game: StrategicGame, dist: np.ndarray) -> tuple:
    if dist.shape != game.shape:
        raise ShapeError(f"distribution shape {dist.shape} != game shape {game.shape}")
    if dist.dtype == object:
        totals = [Fraction(0)] * game.n_players
        for prof in game.profiles():
            w = dist[prof]
            if w:
                for i, v in enumerate(game.payoff(prof)):
                    totals[i] += w * v
        return tuple(totals)
    pay = np.tensordot(dist, game.as_float(), axes=game.n_players)
    return tuple(float(x) for x in pay)


def _pure(k: int, s: int, exact: bool):
    one, zero = (Fraction(1), Fraction(0)) if exact else (1.0, 0.0)
    return [one if t == s else zero for t in range(k)]


def deviation_payoffs(game: StrategicGame, profile: MixedProfile, player: int) -> list:
    """Player's payoff for each pure deviation against the others' mixtures."""
    exact = _is_exact(profile)
    out = []
    for s in range(game.shape[player]):
        dev = list(profile)
        dev[player] = _pure(game.shape[player], s, exact)
        out.append(expected_payoff(game, dev)[player])
    return out


@dataclass(frozen=True)
class NashCheck:
    is_nash: bool
    regret: object  # max unilateral gain over all players and pure deviations


def is_nash(game: StrategicGame, profile: MixedProfile, tol=0) -> NashCheck:
    current = expected_payoff(game, profile)
    regret = 0
    for p in range(game.n_players):
        best = max(deviation_payoffs(game, profile, p))
        regret = max(regret, best - current[p])
    return NashCheck(regret <= tol, regret)


def pure_nash_equilibria(game: StrategicGame) -> list[tuple[int, ...]]:
    out = []
    for prof in game.profiles():
        pay = game.payoff(prof)
        stable = True
        for p in range(game.n_players):
            for s in range(game.shape[p]):
                dev = list(prof)
                dev[p] = s
                if game.payoff(dev)[p] > pay[p]:
                    stable = False
        if stable:
            out.append(prof)
    return out


# ---------------------------------------------------------------------------
# zero-sum 2x2

@dataclass(frozen=True)
class ZeroSumSolution:
    profile: tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]
    value: Fraction  # to player 1
    pure: bool

    @property
    def deceptive_frequency(self) -> tuple[Fraction, Fraction]:
        """Weight each player puts on the second (deceptive) strategy."""
        return self.profile[0][1], self.profile[1][1]


def solve_zero_sum_2x2(game: StrategicGame) -> ZeroSumSolution:
    """Exact minimax solution: saddle point if one exists, else indifference."""
    if game.n_players != 2 or game.shape != (2, 2):
        raise ShapeError("need a two-player 2x2 game")
    if not game.is_zero_sum():
        raise ValueError("game is not zero-sum")
    a = [[game.payoff((r, c))[0] for c in range(2)] for r in range(2)]
    for r, c in itertools.product(range(2), range(2)):
        if a[r][c] == min(a[r]) and a[r][c] == max(a[0][c], a[1][c]):
            return ZeroSumSolution((tuple(_pure(2, r, True)), tuple(_pure(2, c, True))),
                                   a[r][c], True)
    den = a[0][0] - a[0][1] - a[1][0] + a[1][1]
    x = (a[1][1] - a[1][0]) / den  # row player weight on first strategy
    y = (a[1][1] - a[0][1]) / den  # column player weight on first strategy
    value = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) / den
    return ZeroSumSolution(((x, 1 - x), (y, 1 - y)), value, False)


def security_level(game: StrategicGame, player: int, mix: Sequence) -> object:
    """Worst-case payoff of ``mix`` over the opponents' pure responses."""
    others = [range(k) for i, k in enumerate(game.shape) if i != player]
    worst = None
    for resp in itertools.product(*others):
        prof = []
        it = iter(resp)
        for i, k in enumerate(game.shape):
            prof.append(list(mix) if i == player else _pure(k, next(it), _is_exact([mix])))
        v = expected_payoff(game, prof)[player]
        worst = v if worst is None else min(worst, v)
    return worst


@dataclass(frozen=True)
class SimplifiedPokerFrequencies:
    first_strategy: Fraction  # P(s1), play directly
    bluff_strategy: Fraction  # P(s2), bet with either card
    bluff_frequency: Fraction  # P(player 1 holds L and bets)
    call_frequency: Fraction  # P(t2) = P(player 2 calls holding L)
    value: Fraction


def simplified_poker_frequencies(sol: ZeroSumSolution) -> SimplifiedPokerFrequencies:
    (x1, x2), (_, y2) = sol.profile
    return SimplifiedPokerFrequencies(x1, x2, Fraction(1, 2) * x2, y2, sol.value)


# ---------------------------------------------------------------------------
# Nash-Shapley 2x2x2

@dataclass(frozen=True)
class NashShapleySolution:
    p_exact: sp.Expr  # weight of players 1 and 2 on their second strategy
    u2_exact: sp.Expr  # weight of player 3 on u2
    p: float
    z: float  # (4p+8)/(5p+12): weight of player 3 on u1
    payoffs: tuple[float, ...]
    payoffs_exact: tuple[sp.Expr, ...]
    indifference_residuals: tuple[float, float, float]
    regret: float

    @property
    def profile(self):
        return ((1 - self.p, self.p), (1 - self.p, self.p), (self.z, 1 - self.z))


def _sym_payoff(game: StrategicGame, player: int, mixes) -> sp.Expr:
    total = sp.Integer(0)
    for prof in game.profiles():
        w = sp.Integer(1)
        for i, s in enumerate(prof):
            w *= mixes[i][s]
        total += w * sp.Rational(game.payoff(prof)[player])
    return sp.expand(total)


def solve_nash_shapley(game: StrategicGame | None = None) -> NashShapleySolution:
    """Completely mixed equilibrium of the reduced Nash-Shapley game.

    Players 1 and 2 are symmetric, so both mix ``(1-p, p)``; player 3's
    indifference fixes ``p`` and player 1's then fixes player 3's mixture.
    """
    game = builtin_game("NashShapleyReduced") if game is None else game
    if game.shape != (2, 2, 2):
        raise ShapeError("need a 2x2x2 game")
    p, w = sp.symbols("p w", real=True)  # w: weight of player 3 on u2
    mix = [(1 - p, p), (1 - p, p), (1 - w, w)]

    def fixed(player, s):
        m = list(mix)
        m[player] = (1, 0) if s == 0 else (0, 1)
        return m

    eq3 = sp.expand(_sym_payoff(game, 2, fixed(2, 0)) - _sym_payoff(game, 2, fixed(2, 1)))
    roots = [r for r in sp.solve(eq3, p) if r.is_real and 0 < float(r) < 1]
    if len(roots) != 1:
        raise ArithmeticError(f"expected one interior root for p, got {roots}")
    p_exact = sp.radsimp(roots[0])
    eq1 = (_sym_payoff(game, 0, fixed(0, 0)) - _sym_payoff(game, 0, fixed(0, 1))).subs(p, p_exact)
    w_roots = sp.solve(eq1, w)
    if len(w_roots) != 1:
        raise ArithmeticError(f"expected one solution for player 3's mixture, got {w_roots}")
    w_exact = sp.radsimp(w_roots[0])
    subs = {p: p_exact, w: w_exact}
    pay_exact = tuple(sp.nsimplify(sp.simplify(_sym_payoff(game, i, mix).subs(subs)))
                      for i in range(3))

    pf, wf = float(p_exact), float(w_exact)
    num_profile = ((1 - pf, pf), (1 - pf, pf), (1 - wf, wf))
    residuals = []
    for player in range(3):
        devs = deviation_payoffs(game, num_profile, player)
        residuals.append(abs(devs[0] - devs[1]))
    check = is_nash(game, num_profile, 1e-9)
    return NashShapleySolution(
        p_exact=p_exact, u2_exact=w_exact, p=pf, z=1 - wf,
        payoffs=expected_payoff(game, num_profile), payoffs_exact=pay_exact,
        indifference_residuals=tuple(residuals), regret=float(check.regret))


def snap_off_probability(p: float) -> float:
    """P(at least one of players 1, 2 slow-played | both passed first time).

    Each early player passes with probability (1+p)/2 and slow-plays
    with probability p/2, so the per-player posterior is p/(1+p).
    """
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    slow = p / (1 + p)
    return 1 - (1 - slow) ** 2


def simulate_snap_off(p: float, n_deals: int, rng: np.random.Generator) -> tuple[float, float]:
    """Monte Carlo of deals and equilibrium strategy draws; returns (estimate, std error).

    First-round actions are read off the named plans, so this exercises the
    strategy tables rather than the closed form.
    """
    spec = pm.NASH_SHAPLEY
    first_sets = ("--", "P")  # player 1 opens, player 2 after a pass
    acts = {}
    for player, (direct, deceptive) in enumerate((("s1", "s2"), ("t1", "t2"))):
        for k, name in enumerate((direct, deceptive)):
            plan = pm.named_plan(spec, player, name)
            for card in pm.CARDS:
                acts[player, k, card] = plan.action(card, first_sets[player])
    high = rng.random((n_deals, 2)) < 0.5
    deceptive = rng.random((n_deals, 2)) < p
    passed = np.zeros((n_deals, 2), dtype=bool)
    for player in range(2):
        for k in range(2):
            for card, is_high in (("H", True), ("L", False)):
                sel = (deceptive[:, player] == bool(k)) & (high[:, player] == is_high)
                passed[sel, player] = acts[player, k, card] == "P"
    both = passed.all(axis=1)
    slowplayed = (passed & high).any(axis=1)
    m = int(both.sum())
    est = float(slowplayed[both].mean())
    return est, math.sqrt(est * (1 - est) / m)


# ---------------------------------------------------------------------------
# product distributions and correlated equilibria

def tableau_distribution(p, q) -> np.ndarray:
    """2x2 joint distribution with P(s1) = p and P(t2) = q."""
    return product_distribution(((p, 1 - p), (1 - q, q)), _prisoners_dilemma())


def is_product_realizable(dist: np.ndarray, atol: float = 1e-12) -> bool:
    """A 2x2 distribution is a product of marginals iff its determinant vanishes."""
    if dist.shape != (2, 2):
        raise ShapeError("need a 2x2 distribution")
    det = dist[0, 0] * dist[1, 1] - dist[0, 1] * dist[1, 0]
    return det == 0 if dist.dtype == object else abs(det) <= atol


MEDIATED_STRATEGIES = ("A'", "B'", "C'", "D'")


def _follow(strategy: int, signal: int) -> int:
    """Action taken by a mediated strategy on hearing ``signal`` (0 = A, 1 = B)."""
    return (0, 1, signal, 1 - signal)[strategy]


def _as_distribution(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=object)
    if rho.shape != (2, 2):
        raise ShapeError("rho must be a 2x2 distribution")
    exact = all(isinstance(x, (int, Fraction)) for x in rho.flat)
    rho = np.vectorize(Fraction, otypes=[object])(rho) if exact else rho.astype(float)
    if any(x < 0 for x in rho.flat):
        raise ValueError("rho has a negative entry")
    total = sum(rho.flat)
    if (total != 1) if exact else abs(total - 1) > 1e-12:
        raise ValueError(f"rho sums to {total}")
    return rho


def _mediated_table(game: StrategicGame, rho: np.ndarray) -> np.ndarray:
    exact = rho.dtype == object
    out = np.empty((4, 4, 2), dtype=object if exact else float)
    for x, y in itertools.product(range(4), range(4)):
        tot = [Fraction(0), Fraction(0)] if exact else [0.0, 0.0]
        for r1, r2 in itertools.product(range(2), range(2)):
            w = rho[r1, r2]
            if w:
                pay = game.payoff((_follow(x, r1), _follow(y, r2)))
                tot = [t + w * (v if exact else float(v)) for t, v in zip(tot, pay)]
        out[x, y] = tot
    return out


@dataclass(frozen=True)
class MediatedGame:
    """Base 2x2 game played through a referee drawing recommendations from rho."""
    base: StrategicGame
    rho: np.ndarray
    payoffs: np.ndarray  # [A'..D', A'..D', player]

    def payoff(self, x: str, y: str) -> tuple:
        return tuple(self.payoffs[MEDIATED_STRATEGIES.index(x), MEDIATED_STRATEGIES.index(y)])

    def as_game(self) -> StrategicGame:
        if self.payoffs.dtype != object:
            raise TypeError("only rational rho gives an exact strategic game")
        fracs = {(x, y): list(self.payoffs[x, y]) for x in range(4) for y in range(4)}
        return StrategicGame.from_fractions([MEDIATED_STRATEGIES] * 2, fracs,
                                            name=f"{self.base.name}-mediated")


def build_mediated_game(game: StrategicGame, rho) -> MediatedGame:
    """A' = always play the first strategy, B' = always the second,
    C' = obey, D' = do the opposite of the recommendation."""
    if game.shape != (2, 2):
        raise ShapeError("mediated games are built for 2x2 games only")
    rho = _as_distribution(rho)
    return MediatedGame(game, rho, _mediated_table(game, rho))


@dataclass(frozen=True)
class CorrelatedCheck:
    is_correlated_equilibrium: bool
    violation: object  # largest gain from abandoning C' (<= 0 when satisfied)
    payoff: tuple  # value of (C', C')


def is_correlated_equilibrium(game: StrategicGame, rho, tol=0) -> CorrelatedCheck:
    """Is obeying the referee, (C', C'), a Nash equilibrium of the mediated game?"""
    table = build_mediated_game(game, rho).payoffs
    obey = 2
    base = table[obey, obey]
    violation = max(max(table[x, obey, 0] - base[0] for x in range(4)),
                    max(table[obey, y, 1] - base[1] for y in range(4)))
    return CorrelatedCheck(bool(violation <= tol), violation, tuple(base))
