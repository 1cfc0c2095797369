"""Finite n-player strategic-form games with exact rational payoffs.

Payoffs are held as an integer tensor of numerators over one shared
denominator, so a 256 x 256 x 256 poker game fits in memory while every
entry stays an exact rational.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    raise TypeError(f"refusing to convert {x!r} to an exact rational")


def _smallest_int_dtype(bound: int):
    for dt in (np.int16, np.int32, np.int64):
        if bound <= np.iinfo(dt).max:
            return dt
    raise OverflowError("payoff numerators exceed int64")


@dataclass(frozen=True, eq=False)
class StrategicGame:
    """Payoff tensor ``numer[s1, ..., sn, player] / denom``."""
    labels: tuple[tuple[str, ...], ...]
    numer: np.ndarray
    denom: int = 1
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        labels = tuple(tuple(str(s) for s in ls) for ls in self.labels)
        object.__setattr__(self, "labels", labels)
        shape = tuple(len(ls) for ls in labels) + (len(labels),)
        if self.numer.shape != shape:
            raise ValueError(f"payoff tensor shape {self.numer.shape} != {shape}")
        if self.denom <= 0:
            raise ValueError("denominator must be positive")
        self.numer.setflags(write=False)

    @classmethod
    def from_table(cls, labels: Sequence[Sequence[str]], table, name: str = "",
                   meta: dict | None = None) -> StrategicGame:
        """Build from a nested table of payoff vectors (ints, Fractions or "a/b" strings)."""
        shape = tuple(len(ls) for ls in labels)
        n = len(shape)
        fracs = {}
        for prof in itertools.product(*(range(k) for k in shape)):
            entry = table
            for s in prof:
                entry = entry[s]
            if len(entry) != n:
                raise ValueError(f"payoff at {prof} has {len(entry)} components, expected {n}")
            fracs[prof] = [as_fraction(v) for v in entry]
        return cls.from_fractions(labels, fracs, name=name, meta=meta)

    @classmethod
    def from_fractions(cls, labels, fracs: dict, name: str = "",
                       meta: dict | None = None) -> StrategicGame:
        shape = tuple(len(ls) for ls in labels)
        denom = 1
        for vec in fracs.values():
            for v in vec:
                denom = math.lcm(denom, v.denominator)
        bound = max((abs(v.numerator) * (denom // v.denominator)
                     for vec in fracs.values() for v in vec), default=0)
        numer = np.zeros(shape + (len(shape),), dtype=_smallest_int_dtype(bound))
        for prof, vec in fracs.items():
            numer[prof] = [v.numerator * (denom // v.denominator) for v in vec]
        return cls(tuple(labels), numer, denom, name, dict(meta or {}))

    @property
    def n_players(self) -> int:
        return len(self.labels)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.numer.shape[:-1]

    def profiles(self):
        return itertools.product(*(range(k) for k in self.shape))

    def payoff(self, profile: Sequence[int]) -> tuple[Fraction, ...]:
        return tuple(Fraction(int(v), self.denom) for v in self.numer[tuple(profile)])

    def payoff_by_label(self, *names: str) -> tuple[Fraction, ...]:
        return self.payoff([self.labels[i].index(s) for i, s in enumerate(names)])

    def as_float(self) -> np.ndarray:
        return self.numer.astype(float) / self.denom

    def is_zero_sum(self) -> bool:
        return bool(np.all(self.numer.astype(np.int64).sum(axis=-1) == 0))

    def restrict(self, keep: Sequence[Sequence[int]], name: str | None = None) -> StrategicGame:
        """Subgame on the listed strategy indices of each player (in the given order)."""
        sub = self.numer[np.ix_(*[list(k) for k in keep])]
        labels = tuple(tuple(self.labels[i][s] for s in k) for i, k in enumerate(keep))
        return StrategicGame(labels, np.array(sub), self.denom,
                             self.name if name is None else name, dict(self.meta))

    def relabel(self, labels, name: str | None = None) -> StrategicGame:
        return StrategicGame(tuple(labels), np.array(self.numer), self.denom,
                             self.name if name is None else name, dict(self.meta))

    def normalized(self) -> StrategicGame:
        """Same game with the denominator reduced as far as possible."""
        g = math.gcd(self.denom, int(np.gcd.reduce(self.numer, axis=None)))
        if g <= 1:
            return self
        return StrategicGame(self.labels, (self.numer // g), self.denom // g,
                             self.name, dict(self.meta))

    def equals(self, other: StrategicGame) -> bool:
        """Exact equality of labels and payoffs (denominators may differ)."""
        if self.labels != other.labels:
            return False
        lhs = self.numer.astype(object) * other.denom
        rhs = other.numer.astype(object) * self.denom
        return bool(np.all(lhs == rhs))

    def to_json(self) -> dict:
        """Game record: players, labels, payoff tensor as rational strings."""
        def nest(idx):
            if len(idx) == self.n_players:
                return [str(v) for v in self.payoff(idx)]
            return [nest(idx + (s,)) for s in range(self.shape[len(idx)])]
        return {
            "name": self.name,
            "players": self.n_players,
            "strategies": [list(ls) for ls in self.labels],
            "payoffs": nest(()),
            "zero_sum": self.is_zero_sum(),
        }

    @classmethod
    def from_json(cls, data: dict | str) -> StrategicGame:
        if isinstance(data, str):
            data = json.loads(data)
        if len(data["strategies"]) != data["players"]:
            raise ValueError("'players' disagrees with the strategy lists")
        game = cls.from_table(data["strategies"], data["payoffs"], name=data.get("name", ""))
        if "zero_sum" in data and bool(data["zero_sum"]) != game.is_zero_sum():
            raise ValueError("zero_sum flag does not match the payoffs")
        return game
