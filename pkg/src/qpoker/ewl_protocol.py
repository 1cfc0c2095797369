"""State-vector simulation of the EWL quantization for 2 and 3 players.

Qubit order: player 1 is the most significant bit, so basis index ``b``
of an n-qubit state corresponds to the bit string ``format(b, f"0{n}b")``.
Measurement labels use N (no flip) and F (flip), player 1 leftmost, in
lexicographic order with N < F.
"""
from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .algebra import quats_to_su2, sample_units
from .game import StrategicGame

ATOL = 1e-12
CHUNK = 10_000  # Monte Carlo samples per independent substream


class ProtocolError(ValueError):
    pass


def _check_players(n: int):
    if n not in (2, 3):
        raise ProtocolError(f"only 2 or 3 players are supported, got {n}")


def initial_state(n: int, entangled: bool) -> np.ndarray:
    """|0...0> or (|0...0> + |1...1>)/sqrt(2)."""
    _check_players(n)
    psi = np.zeros(2 ** n, dtype=complex)
    psi[0] = 1
    if entangled:
        psi[0] = psi[-1] = 1 / np.sqrt(2)
    return psi


IDENTITY = np.eye(2, dtype=complex)


def flip_operator(n: int = 2) -> np.ndarray:
    """SU(2) flip swapping |0> and |1> whose N/F images of the entangled state are orthogonal.

    Every such flip has the form [[0, e^{it}], [-e^{-it}, 0]].  Two players
    need cos 2t = 0 and three players need sin 3t = 0, so no single phase
    serves both: t = pi/4 for two players, t = 0 (i.e. iY) for three.
    """
    _check_players(n)
    t = np.pi / 4 if n == 2 else 0.0
    return np.array([[0, np.exp(1j * t)], [-np.exp(-1j * t), 0]], dtype=complex)


def nf_labels(n: int) -> tuple[str, ...]:
    return tuple("".join(x) for x in itertools.product("NF", repeat=n))


def label_to_profile(label: str) -> tuple[int, ...]:
    return tuple(0 if c == "N" else 1 for c in label)


@dataclass(frozen=True)
class MeasurementBasis:
    labels: tuple[str, ...]
    vectors: np.ndarray  # row ``k`` is the state labelled ``labels[k]``

    def is_orthonormal(self, atol: float = ATOL) -> bool:
        gram = self.vectors.conj() @ self.vectors.T
        return bool(np.allclose(gram, np.eye(len(self.labels)), atol=atol))


def _kron_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def measurement_basis(n: int, entangled: bool) -> MeasurementBasis:
    psi0 = initial_state(n, entangled)
    f = flip_operator(n)
    labels = nf_labels(n)
    vecs = []
    for label in labels:
        ops = [f if c == "F" else IDENTITY for c in label]
        v = _kron_all(ops) @ psi0
        vecs.append(v / np.linalg.norm(v))
    return MeasurementBasis(labels, np.array(vecs))


def apply_profile(state: np.ndarray, unitaries: Sequence[np.ndarray]) -> np.ndarray:
    """(U1 x ... x Un) |state>."""
    n = len(unitaries)
    if state.shape != (2 ** n,):
        raise ProtocolError(f"state of length {state.shape} does not match {n} unitaries")
    return apply_profile_batch(state, [np.asarray(u)[None] for u in unitaries])[0]


def apply_profile_batch(state: np.ndarray, unitaries: Sequence[np.ndarray]) -> np.ndarray:
    """Batched version: ``unitaries[k]`` has shape (B, 2, 2) or (1, 2, 2)."""
    n = len(unitaries)
    psi = np.asarray(state, dtype=complex).reshape((1,) + (2,) * n)
    for k, u in enumerate(unitaries):
        u = np.asarray(u, dtype=complex)
        # bring player k's qubit to the last axis, act with u, move it back
        moved = np.moveaxis(psi, k + 1, -1)
        rest = moved.shape[1:-1]
        flat = moved.reshape(moved.shape[0], -1, 2) @ np.swapaxes(u, -1, -2)
        psi = np.moveaxis(flat.reshape((flat.shape[0],) + rest + (2,)), -1, k + 1)
    return psi.reshape(psi.shape[0], 2 ** n)


def outcome_distribution(state: np.ndarray, basis: MeasurementBasis) -> np.ndarray:
    """Probability of each basis label: squared overlap over squared length."""
    amps = basis.vectors.conj() @ np.asarray(state).T
    w = np.abs(amps) ** 2
    return (w / w.sum(axis=0)).T


def _as_game_shape(probs: np.ndarray, n: int) -> np.ndarray:
    # label order NN.., NF.., ... coincides with row-major order of the profile tensor
    return probs.reshape(probs.shape[:-1] + (2,) * n)


def eval_pure_quantum(game: StrategicGame, entangled: bool,
                      profile: Sequence[np.ndarray]) -> tuple[np.ndarray, tuple[float, ...]]:
    """Outcome distribution (shaped like the game) and expected payoffs."""
    n = game.n_players
    if len(profile) != n or game.shape != (2,) * n:
        raise ProtocolError("need one SU(2) element per player of a game with 2 strategies each")
    psi = apply_profile(initial_state(n, entangled), profile)
    dist = _as_game_shape(outcome_distribution(psi, measurement_basis(n, entangled)), n)
    pay = np.tensordot(dist, game.as_float(), axes=n)
    return dist, tuple(float(x) for x in pay)


# ---------------------------------------------------------------------------
# mixed quantum strategies

@dataclass(frozen=True)
class MixedQuantumStrategy:
    """Finitely many weighted SU(2) atoms, or the Haar-uniform distribution."""
    atoms: tuple[tuple[np.ndarray, float], ...] = ()
    haar: bool = False
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.haar:
            if self.atoms:
                raise ValueError("a Haar-uniform strategy has no atoms")
            return
        if not self.atoms:
            raise ValueError("need at least one atom")
        total = sum(float(w) for _, w in self.atoms)
        if any(float(w) < 0 for _, w in self.atoms) or abs(total - 1) > ATOL:
            raise ValueError(f"atom weights must be non-negative and sum to 1, got {total}")

    @classmethod
    def pure(cls, u: np.ndarray, name: str = "") -> MixedQuantumStrategy:
        return cls(((np.asarray(u, dtype=complex), 1.0),), name=name)

    @classmethod
    def mixture(cls, atoms, name: str = "") -> MixedQuantumStrategy:
        return cls(tuple((np.asarray(u, dtype=complex), w) for u, w in atoms), name=name)


HAAR = MixedQuantumStrategy(haar=True, name="haar")


def classical_embedding(n: int, weights: Sequence, name: str = "") -> MixedQuantumStrategy:
    """A classical mixture (P(first), P(second)) as a mixture over N and F."""
    f = flip_operator(n)
    return MixedQuantumStrategy.mixture([(IDENTITY, weights[0]), (f, weights[1])], name=name)


@dataclass(frozen=True)
class MixedEstimate:
    payoff: tuple[float, ...]
    stderr: tuple[float, ...]
    distribution: np.ndarray  # mean outcome distribution, shaped like the game
    distribution_stderr: np.ndarray
    samples: int  # 0 when the evaluation is exact

    @property
    def exact(self) -> bool:
        return self.samples == 0


def _finite_combos(profile: Sequence[MixedQuantumStrategy]):
    finite = [k for k, s in enumerate(profile) if not s.haar]
    for choice in itertools.product(*(profile[k].atoms for k in finite)):
        weight = 1.0
        mats = {}
        for k, (u, w) in zip(finite, choice):
            weight *= float(w)
            mats[k] = u
        yield weight, mats


def _chunk_distribution(profile, entangled, n, basis, psi0, batch, rng):
    haar = [k for k, s in enumerate(profile) if s.haar]
    drawn = {k: quats_to_su2(sample_units(4, batch, rng)) for k in haar}
    acc = np.zeros((batch, 2 ** n))
    for weight, mats in _finite_combos(profile):
        unitaries = [drawn[k] if k in drawn else mats[k][None] for k in range(n)]
        psi = apply_profile_batch(psi0, unitaries)
        acc += weight * outcome_distribution(psi, basis)
    return acc


def eval_mixed_quantum(game: StrategicGame, entangled: bool,
                       profile: Sequence[MixedQuantumStrategy], samples: int = 100_000,
                       seed: int | np.random.SeedSequence | None = None,
                       workers: int = 1) -> MixedEstimate:
    """Expected payoffs of a mixed quantum profile.

    Atoms are summed exactly; Haar-uniform players are integrated by Monte
    Carlo.  Samples are drawn in fixed chunks from spawned substreams, so
    the estimate depends only on ``seed`` and ``samples``, never on
    ``workers``.
    """
    n = game.n_players
    if len(profile) != n or game.shape != (2,) * n:
        raise ProtocolError("profile does not match the game")
    basis = measurement_basis(n, entangled)
    psi0 = initial_state(n, entangled)
    payoff_matrix = game.as_float().reshape(2 ** n, n)

    if not any(s.haar for s in profile):
        probs = _chunk_distribution(profile, entangled, n, basis, psi0, 1, None)[0]
        pay = probs @ payoff_matrix
        return MixedEstimate(tuple(float(x) for x in pay), (0.0,) * n,
                             _as_game_shape(probs, n), np.zeros((2,) * n), 0)

    if samples < 1:
        raise ValueError("Haar-uniform strategies need samples >= 1")
    if seed is None:
        raise ValueError("a seed is required when sampling")
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    sizes = [CHUNK] * (samples // CHUNK) + ([samples % CHUNK] if samples % CHUNK else [])
    streams = ss.spawn(len(sizes))

    def run(k):
        rng = np.random.default_rng(streams[k])
        return _chunk_distribution(profile, entangled, n, basis, psi0, sizes[k], rng)

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(run, range(len(sizes))))
    else:
        parts = [run(k) for k in range(len(sizes))]
    probs = np.concatenate(parts)
    per_sample = probs @ payoff_matrix
    mean = per_sample.mean(axis=0)
    if samples > 1:
        se = per_sample.std(axis=0, ddof=1) / np.sqrt(samples)
        cell_se = probs.std(axis=0, ddof=1) / np.sqrt(samples)
    else:
        se, cell_se = np.zeros(n), np.zeros(2 ** n)
    return MixedEstimate(tuple(float(x) for x in mean), tuple(float(x) for x in se),
                         _as_game_shape(probs.mean(axis=0), n), _as_game_shape(cell_se, n),
                         samples)


def parse_mixture(text: str, n: int) -> MixedQuantumStrategy:
    """Parse ``"mix N:2/3,F:1/3"`` (weights may be fractions or decimals)."""
    body = text.strip()
    if body.startswith("mix"):
        body = body[3:]
    weights = {"N": Fraction(0), "F": Fraction(0)}
    for part in body.split(","):
        key, _, val = part.strip().partition(":")
        key = key.strip().upper()
        if key not in weights or not val:
            raise ValueError(f"cannot parse mixture component {part!r}")
        weights[key] += Fraction(val.strip())
    if sum(weights.values()) != 1:
        raise ValueError(f"mixture weights sum to {sum(weights.values())}")
    return classical_embedding(n, (weights["N"], weights["F"]), name=text.strip())
