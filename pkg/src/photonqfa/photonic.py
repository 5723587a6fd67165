"""Polarisation-qubit realisation of the two-state automaton and its detection statistics.

A photon prepared in ``|H>`` passes ``k`` rotators of ``pi/m`` each and hits a
polarising beam splitter; the horizontal port fires with probability
``cos^2(pi k / m)``, the automaton's acceptance probability. Repeating the
experiment yields Poisson counts with mean ``mu_k = <N_c> cos^2(pi k / m)``,
which are classified against a count threshold.

Randomness: every ``(seed, k, run_index)`` cell owns an independent PCG64
stream seeded through ``SeedSequence([seed, k, run_index])``. Poisson draws use
sequential inversion for ``mu < 30`` and Hormann's PTRS transformed
rejection above, both consuming doubles from that stream only, so results do
not depend on evaluation order or numpy's own Poisson routine.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from numpy.random import PCG64, Generator, SeedSequence

from . import linalg

KET_H = linalg.basis_vector(2, 0)
KET_V = linalg.basis_vector(2, 1)
PI_H = linalg.as_matrix([[1, 0], [0, 0]])
PI_V = linalg.as_matrix([[0, 0], [0, 1]])

INVERSION_LIMIT = 30.0
REGIME_WARN = 10.0
CSV_HEADER = ("run", "k", "mu_k", "count", "threshold", "verdict", "truth", "ratio")


class Convention(str, enum.Enum):
    """How the two Gaussian tails combine into one error probability."""

    SUM_OF_TAILS = "sum"
    MEAN_OF_TAILS = "mean"


class Normalization(str, enum.Enum):
    """Denominator of the detected frequency ``f_k``."""

    MEAN = "mean"            # <N_c>
    REFERENCE = "reference"  # sampled N_c(m) in the same run


class RegimeWarning(UserWarning):
    """Gaussian approximation used outside ``mu_1 >> 1``."""


def fmt(x: float) -> str:
    return f"{x:.9g}"


def _round9(x: float) -> float:
    return float(fmt(x))


# ---------------------------------------------------------------------------
# Polarisation states
# ---------------------------------------------------------------------------

def polarization_state(theta: float) -> np.ndarray:
    """``|theta> = cos(theta)|H> + sin(theta)|V>``."""
    theta = math.fmod(theta, 2 * math.pi)
    return linalg.as_vector([math.cos(theta), math.sin(theta)])


def rotator(m: int) -> np.ndarray:
    """Polarisation rotator ``R(pi/m)``, the adjoint of the automaton's unitary."""
    c, s = math.cos(math.pi / m), math.sin(math.pi / m)
    return linalg.adjoint([[c, s], [-s, c]])


def apply_rotators(m: int, k: int, stepwise: bool = False) -> np.ndarray:
    """Polarisation ket after ``k`` rotators act on ``|H>``.

    The default applies one aggregate rotation by ``pi k / m`` as the bench
    setup does; ``stepwise=True`` multiplies ``R(pi/m)`` in ``k`` times.
    """
    if m < 1 or k < 0:
        raise ValueError(f"need m >= 1 and k >= 0, got m={m}, k={k}")
    if not stepwise:
        return polarization_state(math.pi * (k % (2 * m)) / m)
    r = rotator(m)
    ket = np.array(KET_H)
    for _ in range(k):
        ket = r @ ket
    return linalg.as_vector(ket)


def pbs_probabilities(state) -> tuple[float, float]:
    """Detection probabilities at the H and V ports of a polarising beam splitter."""
    state = np.asarray(state)
    if state.shape != (2,):
        raise ValueError(f"polarisation states are 2-vectors, got shape {state.shape}")
    # the ket's adjoint is the row vector the projectors act on
    row = np.conj(state)
    p_h, _ = linalg.measure(row, PI_H)
    p_v, _ = linalg.measure(row, PI_V)
    return p_h, p_v


# ---------------------------------------------------------------------------
# Experiment configuration and sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhotonExperimentConfig:
    m: int
    mean_counts: float
    word_lengths: tuple[int, ...]
    repetitions: int = 1
    rng_seed: int = 0
    convention: Convention = Convention.MEAN_OF_TAILS
    normalization: Normalization = Normalization.MEAN
    stepwise: bool = False

    def __post_init__(self):
        object.__setattr__(self, "word_lengths", tuple(int(k) for k in self.word_lengths))
        object.__setattr__(self, "convention", Convention(self.convention))
        object.__setattr__(self, "normalization", Normalization(self.normalization))
        if self.m < 1:
            raise ValueError(f"modulus must be positive, got {self.m}")
        if not self.mean_counts > 0:
            raise ValueError(f"mean counts must be positive, got {self.mean_counts}")
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be positive, got {self.repetitions}")
        if self.rng_seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.rng_seed}")
        if not self.word_lengths:
            raise ValueError("at least one word length is required")
        if any(k < 0 for k in self.word_lengths):
            raise ValueError("word lengths must be non-negative")

    def mu(self, k: int) -> float:
        """Mean count ``<N_c> p_H(k)`` for the word ``a^k``."""
        p_h, _ = pbs_probabilities(apply_rotators(self.m, k, self.stepwise))
        return self.mean_counts * p_h


def cell_rng(seed: int, k: int, run_index: int) -> Generator:
    return Generator(PCG64(SeedSequence([seed, k, run_index])))


def poisson_variate(rng: Generator, mu: float) -> int:
    if mu < 0:
        raise ValueError(f"Poisson mean must be non-negative, got {mu}")
    if mu == 0:
        return 0
    if mu < INVERSION_LIMIT:
        return _poisson_inversion(rng, mu)
    return _poisson_ptrs(rng, mu)


def _poisson_inversion(rng: Generator, mu: float) -> int:
    u = rng.random()
    k = 0
    p = math.exp(-mu)
    cdf = p
    while u > cdf and p > 0.0:
        k += 1
        p *= mu / k
        cdf += p
    return k


def _poisson_ptrs(rng: Generator, mu: float) -> int:
    # W. Hormann, "The transformed rejection method for generating Poisson
    # random variables", Insurance: Mathematics and Economics 12 (1993).
    slam = math.sqrt(mu)
    loglam = math.log(mu)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    invalpha = 1.1239 + 1.1328 / (b - 3.4)
    vr = 0.9277 - 3.6224 / (b - 2)
    while True:
        u = rng.random() - 0.5
        v = rng.random()
        us = 0.5 - abs(u)
        if us == 0.0:
            continue
        k = math.floor((2 * a / us + b) * u + mu + 0.43)
        if us >= 0.07 and v <= vr:
            return k
        if k < 0 or (us < 0.013 and v > us):
            continue
        if v > 0.0 and (math.log(v) + math.log(invalpha) - math.log(a / (us * us) + b)
                        <= -mu + k * loglam - math.lgamma(k + 1)):
            return k


def sample_counts(cfg: PhotonExperimentConfig, k: int, run_index: int = 0) -> int:
    """One detected-count draw for ``a^k`` in run ``run_index``."""
    return poisson_variate(cell_rng(cfg.rng_seed, k, run_index), cfg.mu(k))


def random_word_lengths(count: int, low: int, high: int, seed: int) -> tuple[int, ...]:
    """``count`` word lengths drawn uniformly from ``[low, high]`` (with replacement)."""
    if count < 1 or low < 0 or high < low:
        raise ValueError(f"bad range request: {count} values in [{low}, {high}]")
    rng = Generator(PCG64(SeedSequence(seed, spawn_key=(0xA5,))))
    return tuple(int(x) for x in rng.integers(low, high, size=count, endpoint=True))


# ---------------------------------------------------------------------------
# Discrimination strategies
# ---------------------------------------------------------------------------

def _check_regime(mu1: float) -> None:
    if mu1 < REGIME_WARN:
        warnings.warn(f"mu_1 = {mu1:.3g} is not >> 1; the Gaussian approximation is poor",
                      RegimeWarning, stacklevel=3)


def count_threshold(m: int, mean_counts: float) -> float:
    """Count where the Gaussian approximations for ``k = 0`` and ``k = 1 (mod m)`` intersect."""
    if m < 2:
        raise ValueError("threshold undefined for m = 1: every word is in the language")
    if not mean_counts > 0:
        raise ValueError(f"mean counts must be positive, got {mean_counts}")
    c = math.cos(math.pi / m)
    s2 = math.sin(math.pi / m) ** 2
    _check_regime(mean_counts * c * c)
    return mean_counts * abs(c) * math.sqrt(1.0 - math.log(c * c) / (mean_counts * s2))


def decide_count(n_c: int, n_th: float) -> bool:
    return n_c >= n_th


def frequency_threshold(m: int) -> tuple[float, float]:
    """``(f_1, f_th)``: largest rejected-word frequency and the midpoint to 1."""
    if m < 2:
        raise ValueError("no rejected words for m = 1")
    f1 = math.cos(math.pi / m) ** 2
    return f1, (1.0 + f1) / 2.0


def decide_frequency(f_k: float, f_th: float) -> bool:
    return f_k > f_th


def detected_frequency(cfg: PhotonExperimentConfig, count: int, run_index: int = 0) -> float:
    """``N_c(k)`` normalised by ``<N_c>`` or by the same run's sampled ``N_c(m)``."""
    if cfg.normalization is Normalization.MEAN:
        return count / cfg.mean_counts
    reference = sample_counts(cfg, cfg.m, run_index)
    if reference == 0:
        raise ValueError("reference count N_c(m) is zero; frequency undefined")
    return count / reference


@dataclass(frozen=True)
class ErrorModel:
    mu0: float
    mu1: float
    n_th: float
    tail_reject: float   # P[member rejected]
    tail_accept: float   # P[k = 1 (mod m) accepted]
    p_err: float
    convention: Convention


def _phi(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def error_probability(m: int, mean_counts: float,
                      convention: Convention = Convention.MEAN_OF_TAILS) -> ErrorModel:
    """Gaussian misclassification probability of the count-threshold strategy."""
    convention = Convention(convention)
    n_th = count_threshold(m, mean_counts)
    mu0 = float(mean_counts)
    mu1 = mean_counts * math.cos(math.pi / m) ** 2
    t0 = _phi((n_th - mu0) / math.sqrt(mu0))
    t1 = 0.5 * math.erfc((n_th - mu1) / math.sqrt(2.0 * mu1)) if mu1 > 0 else 0.0
    total = t0 + t1
    p_err = total if convention is Convention.SUM_OF_TAILS else total / 2.0
    return ErrorModel(mu0, mu1, n_th, t0, t1, p_err, convention)


# ---------------------------------------------------------------------------
# Experiment runs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecisionRecord:
    run_index: int
    k: int
    mu_k: float
    sampled_count: int
    threshold: float
    verdict: bool
    ground_truth: bool
    mean_counts: float

    @property
    def ratio(self) -> float:
        return self.sampled_count / self.mean_counts

    @property
    def correct(self) -> bool:
        return self.verdict == self.ground_truth


def run_experiment(cfg: PhotonExperimentConfig) -> list[DecisionRecord]:
    """Classify every ``(run, k)`` cell with the count-threshold strategy."""
    n_th = count_threshold(cfg.m, cfg.mean_counts)
    mus = {k: cfg.mu(k) for k in set(cfg.word_lengths)}
    records = []
    for run in range(cfg.repetitions):
        for k in cfg.word_lengths:
            count = poisson_variate(cell_rng(cfg.rng_seed, k, run), mus[k])
            records.append(DecisionRecord(run, k, mus[k], count, n_th, decide_count(count, n_th),
                                          k % cfg.m == 0, cfg.mean_counts))
    return records


def empirical_error_rate(records: Sequence[DecisionRecord]) -> float:
    if not records:
        return float("nan")
    return sum(not r.correct for r in records) / len(records)


def records_to_csv(records: Iterable[DecisionRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in records:
        writer.writerow([r.run_index, r.k, fmt(r.mu_k), r.sampled_count, fmt(r.threshold),
                         int(r.verdict), int(r.ground_truth), fmt(r.ratio)])
    return buf.getvalue()


def experiment_summary(cfg: PhotonExperimentConfig, records: Sequence[DecisionRecord]) -> dict:
    model = error_probability(cfg.m, cfg.mean_counts, cfg.convention)
    return {
        "m": cfg.m,
        "mean_counts": _round9(cfg.mean_counts),
        "n_th": _round9(model.n_th),
        "p_err_analytic": _round9(model.p_err),
        "p_err_empirical": _round9(empirical_error_rate(records)),
        "convention": cfg.convention.value,
        "records": len(records),
        "seed": cfg.rng_seed,
    }


def summary_to_json(summary: dict) -> str:
    return json.dumps(summary, indent=2, sort_keys=True) + "\n"
