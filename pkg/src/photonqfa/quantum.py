"""Measure-once one-way quantum finite automata.

An automaton is ``(zeta, {U_s}, P)``: a normalised initial row vector, one
unitary per symbol and the projector onto the accepting subspace. The
acceptance probability of ``w = s_1..s_k`` is ``||zeta U_{s_1}..U_{s_k} P||^2``,
measured once after the whole word is read.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from numpy.random import PCG64, Generator, SeedSequence

from . import linalg
from .linalg import DEFAULT_TOL

_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class MeasureOnceQfa:
    alphabet: tuple[str, ...]
    initial: np.ndarray
    unitaries: Mapping[str, np.ndarray]
    accepting_projector: np.ndarray
    cut_point: float | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "initial", linalg.as_vector(self.initial))
        object.__setattr__(self, "unitaries", {s: linalg.as_matrix(self.unitaries[s]) for s in self.alphabet})
        object.__setattr__(self, "accepting_projector", linalg.as_matrix(self.accepting_projector))
        n = self.n
        if not linalg.is_normalized(self.initial, DEFAULT_TOL):
            raise ValueError(f"initial state has norm {linalg.norm(self.initial):.12g}, expected 1")
        for sym, u in self.unitaries.items():
            if u.shape != (n, n):
                raise ValueError(f"unitary for {sym!r} has shape {u.shape}, expected {(n, n)}")
            if not linalg.is_unitary(u, DEFAULT_TOL):
                raise ValueError(f"matrix for {sym!r} is not unitary")
        p = self.accepting_projector
        if p.shape != (n, n) or not linalg.is_projector(p, DEFAULT_TOL):
            raise ValueError("accepting operator is not an n x n orthogonal projector")

    @property
    def n(self) -> int:
        return self.initial.shape[0]

    @property
    def is_unary(self) -> bool:
        return len(self.alphabet) == 1

    def evolve(self, word) -> np.ndarray:
        """State ``zeta U_w`` after reading ``word`` (an int means ``a^k``)."""
        if isinstance(word, (int, np.integer)):
            if not self.is_unary:
                raise ValueError("word lengths are only meaningful for unary automata")
            if word < 0:
                raise ValueError(f"word length must be non-negative, got {word}")
            return self.initial @ linalg.matrix_power(self.unitaries[self.alphabet[0]], int(word), unitary=True)
        state = self.initial
        for sym in word:
            if sym not in self.unitaries:
                raise ValueError(f"symbol {sym!r} not in alphabet {list(self.alphabet)}")
            state = state @ self.unitaries[sym]
        return state

    def probability(self, word) -> float:
        return accept_prob(self, word)

    def probabilities_up_to(self, horizon: int) -> np.ndarray:
        if not self.is_unary:
            raise ValueError("scans over word length need a unary automaton")
        u = self.unitaries[self.alphabet[0]]
        p = self.accepting_projector
        state = np.array(self.initial)
        out = np.empty(horizon + 1)
        for k in range(horizon + 1):
            out[k] = _prob(state, p)
            state = state @ u
        return out


def _prob(state: np.ndarray, projector: np.ndarray) -> float:
    projected = state @ projector
    p = float(np.real(np.vdot(projected, projected)))
    if -_SLACK <= p < 0.0:
        return 0.0
    if 1.0 < p <= 1.0 + _SLACK:
        return 1.0
    return p


def accept_prob(a: MeasureOnceQfa, word) -> float:
    return _prob(a.evolve(word), a.accepting_projector)


# ---------------------------------------------------------------------------
# The two-state automaton for {a^k : m | k}
# ---------------------------------------------------------------------------

def rotation(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return linalg.as_matrix([[c, s], [-s, c]])


def build_qfa_a(m: int) -> MeasureOnceQfa:
    """Two basis states, ``zeta = (1, 0)``, rotation by ``pi/m`` per symbol, ``P = diag(1, 0)``."""
    if m < 1:
        raise ValueError(f"modulus must be positive, got {m}")
    lam, _ = cut_point_for_a(m)
    return MeasureOnceQfa(("a",), [1.0, 0.0], {"a": rotation(math.pi / m)}, [[1.0, 0.0], [0.0, 0.0]],
                          cut_point=lam)


def cut_point_for_a(m: int) -> tuple[float, float]:
    """``(lambda, rho)`` = ``((1 + cos^2(pi/m)) / 2, (1 - cos^2(pi/m)) / 2)``."""
    if m < 1:
        raise ValueError(f"modulus must be positive, got {m}")
    c2 = math.cos(math.pi / m) ** 2
    return (1.0 + c2) / 2.0, (1.0 - c2) / 2.0


def unitary_power_closed_form(m: int, k: int) -> np.ndarray:
    if m < 1 or k < 0:
        raise ValueError(f"need m >= 1 and k >= 0, got m={m}, k={k}")
    # reduce modulo the period 2m so huge k keep full precision
    return rotation(math.pi * (k % (2 * m)) / m)


def trivial_qfa(alphabet: Sequence[str] = ("a",)) -> MeasureOnceQfa:
    """One basis state that accepts every word with certainty."""
    return MeasureOnceQfa(tuple(alphabet), [1.0], {s: [[1.0]] for s in alphabet}, [[1.0]])


# ---------------------------------------------------------------------------
# Composition
# ---------------------------------------------------------------------------

def _same_alphabet(a: MeasureOnceQfa, b: MeasureOnceQfa) -> None:
    if a.alphabet != b.alphabet:
        raise ValueError(f"alphabets differ: {list(a.alphabet)} vs {list(b.alphabet)}")


def direct_sum(a: MeasureOnceQfa, b: MeasureOnceQfa,
               weights: tuple[float, float] = (1 / math.sqrt(2), 1 / math.sqrt(2))) -> MeasureOnceQfa:
    """Superpose ``a`` and ``b`` with amplitudes ``weights``.

    The result accepts with probability ``w_a^2 p_a + w_b^2 p_b``.
    """
    _same_alphabet(a, b)
    wa, wb = weights
    if abs(wa * wa + wb * wb - 1.0) > DEFAULT_TOL:
        raise ValueError(f"weights {weights} are not a unit vector")
    zeta = np.concatenate([wa * a.initial, wb * b.initial])
    unitaries = {s: linalg.direct_sum(a.unitaries[s], b.unitaries[s]) for s in a.alphabet}
    proj = linalg.direct_sum(a.accepting_projector, b.accepting_projector)
    return MeasureOnceQfa(a.alphabet, zeta, unitaries, proj)


def tensor_product(a: MeasureOnceQfa, b: MeasureOnceQfa) -> MeasureOnceQfa:
    """Run ``a`` and ``b`` in parallel; accepts with probability ``p_a * p_b``."""
    _same_alphabet(a, b)
    zeta = np.kron(a.initial, b.initial)
    unitaries = {s: linalg.kron(a.unitaries[s], b.unitaries[s]) for s in a.alphabet}
    proj = linalg.kron(a.accepting_projector, b.accepting_projector)
    return MeasureOnceQfa(a.alphabet, zeta, unitaries, proj)


# ---------------------------------------------------------------------------
# Amplification and size bounds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AmplifiedVerdict:
    repetitions: int
    accept_votes: int
    verdict: bool
    outcomes: tuple[bool, ...]
    vote_threshold: float = 0.5

    @property
    def accept_fraction(self) -> float:
        return self.accept_votes / self.repetitions


def amplify_majority(a: MeasureOnceQfa, word, repetitions: int, rng_seed: int,
                     cut_point: float = 0.5) -> AmplifiedVerdict:
    """Run ``repetitions`` independent measure-once trials and vote.

    With the default ``cut_point`` of 1/2 this is a plain majority vote. Passing
    the automaton's isolated cut point instead accepts iff the fraction of
    accepting trials exceeds it, which is the vote that drives the error
    on both sides of an isolated cut point towards zero.

    Trial ``i`` uses the ``i``-th uniform of the stream seeded by
    ``rng_seed``, so the verdict depends only on the seed.
    """
    if repetitions < 1 or repetitions % 2 == 0:
        raise ValueError(f"repetitions must be a positive odd integer, got {repetitions}")
    if not 0.0 <= cut_point < 1.0:
        raise ValueError(f"cut point must lie in [0, 1), got {cut_point}")
    p = accept_prob(a, word)
    uniforms = Generator(PCG64(SeedSequence(rng_seed))).random(repetitions)
    outcomes = tuple(bool(u < p) for u in uniforms)
    votes = sum(outcomes)
    return AmplifiedVerdict(repetitions, votes, votes > cut_point * repetitions, outcomes, cut_point)


def majority_accept_probability(p: float, repetitions: int, cut_point: float = 0.5) -> float:
    """Exact probability that more than ``cut_point * repetitions`` of the trials accept."""
    votes_needed = math.floor(cut_point * repetitions) + 1
    return sum(math.comb(repetitions, j) * p ** j * (1 - p) ** (repetitions - j)
               for j in range(votes_needed, repetitions + 1))


def state_lower_bound(m: int, rho: float) -> float:
    """Minimum basis-state count ``log m / log(1 + 2/rho)`` of any QFA for L_m with isolation ``rho``."""
    if m < 2:
        raise ValueError(f"bound needs m >= 2, got {m}")
    if not 0.0 < rho <= 0.5:
        raise ValueError(f"isolation must lie in (0, 1/2], got {rho}")
    return math.log(m) / math.log(1.0 + 2.0 / rho)
