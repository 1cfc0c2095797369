"""Simplified Poker (2 players) and the Nash-Shapley model (3 players).

Each player antes, receives an H or L card with probability 1/2, and may
Pass or Bet a fixed amount.  Everything here is exact: payoffs are
Fractions per deal, and the strategic form stores integer numerators.
"""
from __future__ import annotations

import csv
import functools
import hashlib
import io
import itertools
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np

from .game import StrategicGame, as_fraction

CARDS = ("H", "L")
ACTIONS = ("P", "B")


class Variant(str, Enum):
    SIMPLIFIED = "SimplifiedPoker"
    NASH_SHAPLEY = "NashShapley"

    @classmethod
    def parse(cls, name: str) -> Variant:
        key = name.strip().lower().replace("-", "").replace("_", "")
        aliases = {"sp": cls.SIMPLIFIED, "simplified": cls.SIMPLIFIED,
                   "simplifiedpoker": cls.SIMPLIFIED, "ns": cls.NASH_SHAPLEY,
                   "nashshapley": cls.NASH_SHAPLEY}
        if key not in aliases:
            raise ValueError(f"unknown poker variant {name!r}")
        return aliases[key]


# Information sets are named by the action history the player faces.
INFO_SETS = {
    Variant.SIMPLIFIED: (("--",), ("B",)),
    Variant.NASH_SHAPLEY: (("--", "PBB", "PBP", "PPB"),
                           ("B", "P", "PPBB", "PPBP"),
                           ("BB", "BP", "PB", "PP")),
}


class PokerRuleError(ValueError):
    pass


@dataclass(frozen=True)
class PokerSpec:
    variant: Variant
    ante: Fraction = Fraction(1)
    bet: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "ante", as_fraction(self.ante))
        object.__setattr__(self, "bet", as_fraction(self.bet))
        # zero stakes are allowed: the degenerate game is useful as a check
        if self.ante < 0 or self.bet < 0:
            raise PokerRuleError("ante and bet must be non-negative")

    @property
    def players(self) -> int:
        return len(INFO_SETS[self.variant])

    def info_sets(self, player: int) -> tuple[str, ...]:
        return INFO_SETS[self.variant][player]


SIMPLIFIED_POKER = PokerSpec(Variant.SIMPLIFIED, 15, 10)
NASH_SHAPLEY = PokerSpec(Variant.NASH_SHAPLEY, 16, 64)


@dataclass(frozen=True)
class Deal:
    cards: tuple[str, ...]
    probability: Fraction


def deals(spec: PokerSpec) -> list[Deal]:
    n = spec.players
    return [Deal(cards, Fraction(1, 2 ** n)) for cards in itertools.product(CARDS, repeat=n)]


@dataclass(frozen=True)
class PureStrategyPlan:
    """Action per information set, for each card."""
    info_sets: tuple[str, ...]
    high: tuple[str, ...]
    low: tuple[str, ...]

    def __post_init__(self):
        for acts in (self.high, self.low):
            if len(acts) != len(self.info_sets) or any(a not in ACTIONS for a in acts):
                raise PokerRuleError(f"malformed plan {acts!r} for info sets {self.info_sets}")

    @classmethod
    def from_strings(cls, info_sets, high: str, low: str) -> PureStrategyPlan:
        return cls(tuple(info_sets), tuple(high), tuple(low))

    def action(self, card: str, context: str) -> str:
        acts = self.high if card == "H" else self.low
        try:
            return acts[self.info_sets.index(context)]
        except ValueError:
            raise PokerRuleError(f"plan has no action for information set {context!r}") from None

    @property
    def label(self) -> str:
        return f"H:{''.join(self.high)}/L:{''.join(self.low)}"


def _card_options(k: int) -> list[tuple[str, ...]]:
    return list(itertools.product(ACTIONS, repeat=k))


def enumerate_pure_strategies(spec: PokerSpec, player: int) -> list[PureStrategyPlan]:
    """All plans; plan index is ``high_index * 2**k + low_index``."""
    if not 0 <= player < spec.players:
        raise PokerRuleError(f"player {player} out of range")
    sets = spec.info_sets(player)
    opts = _card_options(len(sets))
    return [PureStrategyPlan(sets, h, l) for h in opts for l in opts]


def next_to_act(variant: Variant, history: str) -> tuple[int, str] | None:
    """``(player, information set)`` of the next decision, or None if the hand is over."""
    if variant is Variant.SIMPLIFIED:
        if history == "":
            return 0, "--"
        if history == "B":
            return 1, "B"
        return None
    n = 3
    if len(history) < n:
        return len(history), history if history else "--"
    first_bet = history.find("B")
    if first_bet < 0:
        return None
    # players who passed before the first bet get one more decision, in seat order
    second_round = list(range(first_bet))
    acted_again = len(history) - n
    if acted_again < len(second_round):
        return second_round[acted_again], history
    return None


def enumerate_action_sequences(spec: PokerSpec) -> list[str]:
    out = []

    def walk(hist):
        turn = next_to_act(spec.variant, hist)
        if turn is None:
            out.append(hist)
            return
        for a in ("B", "P"):
            walk(hist + a)

    walk("")
    return out


def settle(spec: PokerSpec, cards: Sequence[str], history: str) -> tuple[Fraction, ...]:
    """Net payoff of every player for a finished action sequence."""
    n = spec.players
    actors = _actor_sequence(spec, history)
    bettors = {p for p, act in zip(actors, history) if act == "B"}
    stake = [spec.ante + (spec.bet if p in bettors else 0) for p in range(n)]
    pot = sum(stake)
    if bettors:
        contenders = sorted(bettors)
    elif spec.variant is Variant.SIMPLIFIED:
        contenders = list(range(n))  # a check forces a showdown
    else:
        return (Fraction(0),) * n  # everyone passed: antes returned
    best = "H" if any(cards[p] == "H" for p in contenders) else "L"
    winners = [p for p in contenders if cards[p] == best]
    share = pot / len(winners)
    return tuple((share if p in winners else 0) - stake[p] for p in range(n))


def play_out(spec: PokerSpec, deal: Deal | Sequence[str],
             plans: Sequence[PureStrategyPlan]) -> tuple[str, tuple[Fraction, ...]]:
    cards = deal.cards if isinstance(deal, Deal) else tuple(deal)
    if len(plans) != spec.players or len(cards) != spec.players:
        raise PokerRuleError("need one plan and one card per player")
    history = ""
    while (turn := next_to_act(spec.variant, history)) is not None:
        player, context = turn
        history += plans[player].action(cards[player], context)
    return history, settle(spec, cards, history)


def _walk(spec: PokerSpec, card_actions) -> str:
    """Action history when each player follows the given per-card action tuple."""
    history = ""
    while (turn := next_to_act(spec.variant, history)) is not None:
        player, context = turn
        history += card_actions[player][spec.info_sets(player).index(context)]
    return history


@functools.lru_cache(maxsize=None)
def _settle_cached(spec: PokerSpec, cards: tuple[str, ...], history: str):
    return settle(spec, cards, history)


def _actor_sequence(spec: PokerSpec, history: str) -> list[int]:
    return [next_to_act(spec.variant, history[:i])[0] for i in range(len(history))]


def strategic_form(spec: PokerSpec) -> StrategicGame:
    """Exact expected payoffs over every pure profile.

    Within one deal a player's behaviour only depends on the half of the plan
    for the card held, so the full tensor is a sum of per-deal tensors
    broadcast over the unused halves.
    """
    n = spec.players
    sizes = [2 ** len(spec.info_sets(p)) for p in range(n)]
    halves = [_card_options(len(spec.info_sets(p))) for p in range(n)]
    per_deal = []
    for deal in deals(spec):
        table = {}
        for idx in itertools.product(*(range(m) for m in sizes)):
            history = _walk(spec, [halves[p][idx[p]] for p in range(n)])
            table[idx] = [deal.probability * v for v in _settle_cached(spec, deal.cards, history)]
        per_deal.append((deal, table))

    denom = 1
    for _, table in per_deal:
        for vec in table.values():
            for v in vec:
                denom = np.lcm(denom, v.denominator)
    denom = int(denom)
    bound = sum(max(abs(v.numerator) * (denom // v.denominator)
                    for vec in table.values() for v in vec) for _, table in per_deal)
    dtype = np.int16 if bound < 2 ** 15 else np.int32 if bound < 2 ** 31 else np.int64

    full_shape = []
    for m in sizes:
        full_shape += [m, m]
    numer = np.zeros(tuple(full_shape) + (n,), dtype=dtype)
    for deal, table in per_deal:
        t = np.zeros(tuple(sizes) + (n,), dtype=dtype)
        for idx, vec in table.items():
            t[idx] = [v.numerator * (denom // v.denominator) for v in vec]
        # place player p's axis on its H or L slot, size-1 on the other
        expanded_shape = []
        for p, c in enumerate(deal.cards):
            expanded_shape += [sizes[p], 1] if c == "H" else [1, sizes[p]]
        numer += t.reshape(tuple(expanded_shape) + (n,))
    numer = numer.reshape(tuple(m * m for m in sizes) + (n,))

    labels = [tuple(pl.label for pl in enumerate_pure_strategies(spec, p)) for p in range(n)]
    return StrategicGame(tuple(labels), numer, denom,
                         name=f"{spec.variant.value}(ante={spec.ante}, bet={spec.bet})",
                         meta={"variant": spec.variant.value, "ante": str(spec.ante),
                               "bet": str(spec.bet)}).normalized()


# ---------------------------------------------------------------------------
# payoff-equivalence quotient

@dataclass
class Quotient:
    game: StrategicGame
    classes: list[list[list[int]]]  # classes[player][class] -> member indices in the input game

    def class_of(self, player: int, index: int) -> int:
        for c, members in enumerate(self.classes[player]):
            if index in members:
                return c
        raise KeyError(index)


def quotient_payoff_equivalent(game: StrategicGame) -> Quotient:
    """Merge strategies whose full payoff vectors agree against every opponent profile."""
    classes = []
    for p in range(game.n_players):
        rows = np.moveaxis(game.numer, p, 0)
        groups: dict[bytes, list[list[int]]] = {}
        for s in range(game.shape[p]):
            row = np.ascontiguousarray(rows[s])
            key = hashlib.blake2b(row.tobytes(), digest_size=16).digest()
            bucket = groups.setdefault(key, [])
            for members in bucket:
                if np.array_equal(rows[members[0]], row):
                    members.append(s)
                    break
            else:
                bucket.append([s])
        found = [m for bucket in groups.values() for m in bucket]
        classes.append(sorted(found, key=lambda m: m[0]))
    reps = [[m[0] for m in cls] for cls in classes]
    return Quotient(game.restrict(reps), classes)


# ---------------------------------------------------------------------------
# iterated dominance

@dataclass(frozen=True)
class Elimination:
    round: int
    player: int
    removed: str
    dominator: str
    mode: str


def _own_payoff_rows(numer: np.ndarray, player: int) -> np.ndarray:
    own = np.moveaxis(numer[..., player], player, 0)
    return own.reshape(own.shape[0], -1).astype(np.promote_types(own.dtype, np.int32))


def dominated_strategies(game: StrategicGame, player: int, mode: str) -> dict[int, int]:
    """Map each dominated strategy of ``player`` to an undominated dominator."""
    if mode not in ("strong", "weak"):
        raise ValueError(f"mode must be 'strong' or 'weak', got {mode!r}")
    rows = _own_payoff_rows(game.numer, player)
    k = rows.shape[0]
    probe = rows[:, :64]
    dominates = np.zeros((k, k), dtype=bool)  # dominates[b, a]: b dominates a
    for b in range(k):
        # cheap necessary condition on a few columns before the full comparison
        cand = np.flatnonzero((probe[b] >= probe).all(axis=1))
        cand = cand[cand != b]
        if cand.size == 0:
            continue
        diff = rows[b] - rows[cand]
        if mode == "strong":
            ok = (diff > 0).all(axis=1)
        else:
            ok = (diff >= 0).all(axis=1) & (diff > 0).any(axis=1)
        dominates[b, cand[ok]] = True
    dominated = dominates.any(axis=0)
    out = {}
    for a in np.flatnonzero(dominated):
        cands = [b for b in np.flatnonzero(dominates[:, a]) if not dominated[b]]
        out[int(a)] = int(cands[0])
    return out


def reduce_by_dominance(game: StrategicGame, mode: str = "strong",
                        order: Sequence[int] | None = None,
                        start_round: int = 1) -> tuple[StrategicGame, list[Elimination]]:
    """Iterate dominance elimination to a fixed point, one player per turn.

    On each turn every strategy of the current player that is dominated is
    removed (own removals never change own comparisons, so this matches
    removing them one by one).  Play passes round-robin in ``order`` until a
    full cycle removes nothing.
    """
    order = list(range(game.n_players)) if order is None else list(order)
    keep = [list(range(k)) for k in game.shape]
    trace: list[Elimination] = []
    current = game
    rnd = start_round
    while True:
        changed = False
        for p in order:
            dom = dominated_strategies(current, p, mode)
            if not dom:
                continue
            changed = True
            for a, b in sorted(dom.items()):
                trace.append(Elimination(rnd, p, current.labels[p][a], current.labels[p][b], mode))
            keep[p] = [s for i, s in enumerate(keep[p]) if i not in dom]
            current = game.restrict(keep)
        if not changed:
            return current, trace
        rnd += 1


def eliminate(game: StrategicGame, order: Sequence[int] | None = None):
    """Quotient, then strong dominance to a fixed point, then weak dominance.

    Returns ``(reduced_game, quotient, trace)``.
    """
    quot = quotient_payoff_equivalent(game)
    strong, trace = reduce_by_dominance(quot.game, "strong", order)
    start = trace[-1].round + 1 if trace else 1
    weak, trace2 = reduce_by_dominance(strong, "weak", order, start_round=start)
    return weak, quot, trace + trace2


def trace_to_csv(trace: Sequence[Elimination]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["round", "player", "removed", "dominator", "mode"])
    for e in trace:
        w.writerow([e.round, e.player + 1, e.removed, e.dominator, e.mode])
    return buf.getvalue()


def verify_trace(game: StrategicGame, trace: Sequence[Elimination]) -> bool:
    """Re-check every recorded removal against the game at that point."""
    keep = [list(game.labels[p]) for p in range(game.n_players)]
    idx = {p: {l: i for i, l in enumerate(game.labels[p])} for p in range(game.n_players)}
    # removals of one (round, player) turn are made simultaneously
    for _, turn in itertools.groupby(trace, key=lambda e: (e.round, e.player, e.mode)):
        turn = list(turn)
        sub = game.restrict([[idx[p][l] for l in keep[p]] for p in range(game.n_players)])
        p, mode = turn[0].player, turn[0].mode
        rows = _own_payoff_rows(sub.numer, p)
        pos = {l: i for i, l in enumerate(keep[p])}
        for e in turn:
            diff = rows[pos[e.dominator]] - rows[pos[e.removed]]
            ok = (diff > 0).all() if mode == "strong" else (diff >= 0).all() and (diff > 0).any()
            if not ok or e.dominator in {x.removed for x in turn}:
                return False
        removed = {e.removed for e in turn}
        keep[p] = [l for l in keep[p] if l not in removed]
    return True


# ---------------------------------------------------------------------------
# the strategies named in the final tables

NAMED_STRATEGIES = {
    Variant.SIMPLIFIED: (
        {"s1": ("B", "P"), "s2": ("B", "B")},
        {"t1": ("B", "P"), "t2": ("B", "B")},
    ),
    Variant.NASH_SHAPLEY: (
        {"s1": ("BBBB", "PPPP"), "s2": ("PBBB", "PPPP")},
        {"t1": ("BBBB", "PPPP"), "t2": ("BPBB", "PPPP")},
        {"u1": ("BBBB", "PPPP"), "u2": ("BBBB", "PPPB")},
    ),
}


def named_plan(spec: PokerSpec, player: int, name: str) -> PureStrategyPlan:
    high, low = NAMED_STRATEGIES[spec.variant][player][name]
    return PureStrategyPlan.from_strings(spec.info_sets(player), high, low)


def name_survivors(spec: PokerSpec, reduced: StrategicGame, quot: Quotient,
                   full: StrategicGame) -> StrategicGame | None:
    """Relabel ``reduced`` with the standard s/t/u names when the survivors are exactly those classes.

    Returns None if some survivor class contains no named plan, or some named
    plan was eliminated.
    """
    labels = []
    for p in range(spec.players):
        names = NAMED_STRATEGIES[spec.variant][p]
        full_index = {l: i for i, l in enumerate(full.labels[p])}
        survivor_classes = {quot.class_of(p, full_index[l]): l for l in reduced.labels[p]}
        new = []
        for name in names:
            cls = quot.class_of(p, full_index[named_plan(spec, p, name).label])
            if cls not in survivor_classes:
                return None
            new.append(name)
        if len(names) != len(reduced.labels[p]):
            return None
        # reorder to follow the survivor order in the reduced game
        by_label = {}
        for name in names:
            cls = quot.class_of(p, full_index[named_plan(spec, p, name).label])
            by_label[survivor_classes[cls]] = name
        labels.append(tuple(by_label[l] for l in reduced.labels[p]))
    renamed = reduced.relabel(labels)
    order = [[renamed.labels[p].index(name) for name in NAMED_STRATEGIES[spec.variant][p]]
             for p in range(spec.players)]
    return renamed.restrict(order)


def named_restriction(spec: PokerSpec, full: StrategicGame) -> StrategicGame:
    """The full strategic form restricted to the named plans."""
    keep, labels = [], []
    for p in range(spec.players):
        names = NAMED_STRATEGIES[spec.variant][p]
        full_index = {l: i for i, l in enumerate(full.labels[p])}
        keep.append([full_index[named_plan(spec, p, nm).label] for nm in names])
        labels.append(tuple(names))
    return full.restrict(keep).relabel(labels)
