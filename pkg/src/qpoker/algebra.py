"""Quaternion and octonion composition algebras.

Coefficients may be floats or :class:`fractions.Fraction`; every operation
only uses ``+``, ``-``, ``*`` and ``/`` so rational inputs stay exact.
The octonions are built from pairs of quaternions by Cayley-Dickson
doubling, and the Fano-plane multiplication table is read off from that
product rather than typed in.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

ATOL = 1e-12


class AlgebraDomainError(ValueError):
    """Raised for inversions of zero and non-unit inputs where a unit is required."""


@dataclass(frozen=True)
class Quaternion:
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0

    @classmethod
    def from_array(cls, arr) -> Quaternion:
        a, b, c, d = (float(x) for x in arr)
        return cls(a, b, c, d)

    def coeffs(self) -> tuple:
        return (self.a, self.b, self.c, self.d)

    def as_array(self) -> np.ndarray:
        return np.array(self.coeffs(), dtype=float)

    def __add__(self, other: Quaternion) -> Quaternion:
        return Quaternion(*(x + y for x, y in zip(self.coeffs(), other.coeffs())))

    def __sub__(self, other: Quaternion) -> Quaternion:
        return Quaternion(*(x - y for x, y in zip(self.coeffs(), other.coeffs())))

    def __neg__(self) -> Quaternion:
        return Quaternion(*(-x for x in self.coeffs()))

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return quat_mul(self, other)
        return Quaternion(*(x * other for x in self.coeffs()))

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> Quaternion:
        return Quaternion(*(x / scalar for x in self.coeffs()))

    def conj(self) -> Quaternion:
        return Quaternion(self.a, -self.b, -self.c, -self.d)

    def norm2(self):
        return self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d

    def norm(self) -> float:
        return math.sqrt(self.norm2())

    def inverse(self) -> Quaternion:
        n2 = self.norm2()
        if n2 == 0:
            raise AlgebraDomainError("zero quaternion has no inverse")
        return self.conj() / n2

    def is_unit(self, atol: float = ATOL) -> bool:
        return abs(self.norm2() - 1) <= atol

    def isclose(self, other: Quaternion, atol: float = ATOL) -> bool:
        return all(abs(x - y) <= atol for x, y in zip(self.coeffs(), other.coeffs()))


QUAT_ONE = Quaternion(1, 0, 0, 0)
QUAT_I = Quaternion(0, 1, 0, 0)
QUAT_J = Quaternion(0, 0, 1, 0)
QUAT_K = Quaternion(0, 0, 0, 1)
QUAT_UNITS = (QUAT_ONE, QUAT_I, QUAT_J, QUAT_K)


def quat_mul(p: Quaternion, q: Quaternion) -> Quaternion:
    """Hamilton product, i^2 = j^2 = k^2 = ijk = -1."""
    a1, b1, c1, d1 = p.coeffs()
    a2, b2, c2, d2 = q.coeffs()
    return Quaternion(
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    )


def quat_conj_norm_inv(q: Quaternion) -> tuple[Quaternion, float, Quaternion]:
    """Return ``(q*, |q|, q^-1)`` with ``q^-1 = q*/|q|^2``."""
    return q.conj(), q.norm(), q.inverse()


def quat_mul_batch(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Hamilton product over the last axis of two ``(..., 4)`` arrays."""
    a1, b1, c1, d1 = np.moveaxis(p, -1, 0)
    a2, b2, c2, d2 = np.moveaxis(q, -1, 0)
    return np.stack([
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    ], axis=-1)


@dataclass(frozen=True)
class Octonion:
    """Octonion ``e0 + e1 i1 + ... + e7 i7``.

    Stored as a pair of quaternions ``(x, y)`` meaning ``x + y*l`` with
    ``i1, i2, i3 = i, j, k``, ``i4 = l`` and ``i5, i6, i7 = il, jl, kl``.
    """
    coeffs: tuple = (0.0,) * 8

    def __post_init__(self):
        if len(self.coeffs) != 8:
            raise ValueError("an octonion has 8 coefficients")
        object.__setattr__(self, "coeffs", tuple(self.coeffs))

    @classmethod
    def unit(cls, index: int) -> Octonion:
        c = [0] * 8
        c[index] = 1
        return cls(tuple(c))

    @classmethod
    def from_pair(cls, x: Quaternion, y: Quaternion) -> Octonion:
        return cls(x.coeffs() + y.coeffs())

    def pair(self) -> tuple[Quaternion, Quaternion]:
        return Quaternion(*self.coeffs[:4]), Quaternion(*self.coeffs[4:])

    def as_array(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=float)

    def __add__(self, other: Octonion) -> Octonion:
        return Octonion(tuple(x + y for x, y in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: Octonion) -> Octonion:
        return Octonion(tuple(x - y for x, y in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> Octonion:
        return Octonion(tuple(-x for x in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, Octonion):
            return oct_mul(self, other)
        return Octonion(tuple(x * other for x in self.coeffs))

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> Octonion:
        return Octonion(tuple(x / scalar for x in self.coeffs))

    def conj(self) -> Octonion:
        return Octonion((self.coeffs[0],) + tuple(-x for x in self.coeffs[1:]))

    def norm2(self):
        return sum(x * x for x in self.coeffs)

    def norm(self) -> float:
        return math.sqrt(self.norm2())

    def inverse(self) -> Octonion:
        n2 = self.norm2()
        if n2 == 0:
            raise AlgebraDomainError("zero octonion has no inverse")
        return self.conj() / n2

    def is_unit(self, atol: float = ATOL) -> bool:
        return abs(self.norm2() - 1) <= atol

    def isclose(self, other: Octonion, atol: float = ATOL) -> bool:
        return all(abs(x - y) <= atol for x, y in zip(self.coeffs, other.coeffs))


def oct_mul(o1: Octonion, o2: Octonion) -> Octonion:
    """Cayley-Dickson product ``(a, b)(c, d) = (ac - d*b, da + bc*)``."""
    a, b = o1.pair()
    c, d = o2.pair()
    return Octonion.from_pair(a * c - d.conj() * b, d * a + b * c.conj())


def oct_mul_batch(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Cayley-Dickson product over the last axis of two ``(..., 8)`` arrays."""
    a, b = x[..., :4], x[..., 4:]
    c, d = y[..., :4], y[..., 4:]
    conj = np.array([1.0, -1.0, -1.0, -1.0])
    return np.concatenate([quat_mul_batch(a, c) - quat_mul_batch(d * conj, b),
                           quat_mul_batch(d, a) + quat_mul_batch(b, c * conj)], axis=-1)


def oct_conj_norm_inv(o: Octonion) -> tuple[Octonion, float, Octonion]:
    return o.conj(), o.norm(), o.inverse()


class FanoTriple(NamedTuple):
    j: int
    k: int
    l: int


def _unit_product(j: int, k: int) -> tuple[int, int]:
    """Return ``(sign, index)`` with ``i_j i_k = sign * i_index``."""
    prod = oct_mul(Octonion.unit(j), Octonion.unit(k)).coeffs
    idx = next(n for n, x in enumerate(prod) if x != 0)
    return int(prod[idx]), idx


def fano_table() -> list[FanoTriple]:
    """The 7 oriented lines ``(j, k, l)`` with ``i_j i_k = i_l``.

    Each line is reported in its lexicographically smallest cyclic rotation.
    """
    lines = set()
    for j, k in itertools.combinations(range(1, 8), 2):
        sign, l = _unit_product(j, k)
        triple = (j, k, l) if sign > 0 else (k, j, l)
        rotations = [triple[n:] + triple[:n] for n in range(3)]
        lines.add(min(rotations))
    return [FanoTriple(*t) for t in sorted(lines)]


def sample_unit(dimension: int, rng: np.random.Generator):
    """One uniformly distributed unit quaternion (dimension 4) or octonion (8)."""
    v = sample_units(dimension, 1, rng)[0]
    if dimension == 4:
        return Quaternion.from_array(v)
    return Octonion(tuple(float(x) for x in v))


def sample_units(dimension: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """``(n, dimension)`` array of points uniform on the unit sphere."""
    if dimension not in (4, 8):
        raise ValueError(f"dimension must be 4 or 8, got {dimension}")
    v = rng.standard_normal((n, dimension))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


# a + bi + cj + dk  ->  [[a + bi, c + di], [-c + di, a - bi]]
def quat_to_su2(q: Quaternion) -> np.ndarray:
    if not q.is_unit():
        raise AlgebraDomainError(f"quaternion {q} is not a unit")
    return quats_to_su2(q.as_array())


def quats_to_su2(arr: np.ndarray) -> np.ndarray:
    """Vectorised quaternion -> SU(2) over the last axis (no unit check)."""
    arr = np.asarray(arr, dtype=float)
    a, b, c, d = np.moveaxis(arr, -1, 0)
    out = np.empty(arr.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = a + 1j * b
    out[..., 0, 1] = c + 1j * d
    out[..., 1, 0] = -c + 1j * d
    out[..., 1, 1] = a - 1j * b
    return out


def su2_to_quat(u: np.ndarray) -> Quaternion:
    """Inverse of :func:`quat_to_su2`; rejects matrices outside SU(2)."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise AlgebraDomainError("expected a 2x2 matrix")
    if not (np.allclose(u @ u.conj().T, np.eye(2), atol=1e-10)
            and abs(np.linalg.det(u) - 1) < 1e-10):
        raise AlgebraDomainError("matrix is not in SU(2)")
    return Quaternion.from_array(su2_to_quats(u))


def su2_to_quats(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    return np.stack([u[..., 0, 0].real, u[..., 0, 0].imag,
                     u[..., 0, 1].real, u[..., 0, 1].imag], axis=-1)
