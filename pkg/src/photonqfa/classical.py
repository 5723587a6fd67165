"""Classical one-way finite automata in matrix form ``(zeta, U, eta)``.

A DFA, NFA and PFA share one representation: an initial row vector, one
``n x n`` transition matrix per symbol, and a 0/1 accepting column vector.
Acceptance is the functional ``zeta U_w eta`` read with the semantics of
the automaton's kind.

Unary words may be passed as their length ``k``; the word is then never
materialised and ``U**k`` is computed by squaring.
"""

from __future__ import annotations

import enum
from collections import deque
from itertools import product
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .linalg import matrix_power

STOCHASTIC_TOL = 1e-12


class Kind(str, enum.Enum):
    DFA = "dfa"
    NFA = "nfa"
    PFA = "pfa"


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ClassicalAutomaton:
    kind: Kind
    alphabet: tuple[str, ...]
    initial: np.ndarray
    transitions: Mapping[str, np.ndarray]
    accepting: np.ndarray
    state_names: tuple[str, ...] | None = field(default=None)

    def __post_init__(self):
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        dtype = np.float64 if kind is Kind.PFA else np.int64
        init = _readonly(np.array(self.initial, dtype=dtype))
        acc = _readonly(np.array(self.accepting, dtype=np.int64))
        trans = {s: _readonly(np.array(self.transitions[s], dtype=dtype)) for s in self.alphabet}
        object.__setattr__(self, "initial", init)
        object.__setattr__(self, "accepting", acc)
        object.__setattr__(self, "transitions", trans)
        self._validate()

    def _validate(self) -> None:
        n = self.initial.shape[0] if self.initial.ndim == 1 else -1
        if n < 1:
            raise ValueError("initial vector must be a non-empty 1-D array")
        if not self.alphabet or len(set(self.alphabet)) != len(self.alphabet):
            raise ValueError(f"alphabet must be non-empty with distinct symbols: {self.alphabet}")
        if self.accepting.shape != (n,) or not np.isin(self.accepting, (0, 1)).all():
            raise ValueError("accepting vector must be a 0/1 vector of length n")
        if self.state_names is not None and len(self.state_names) != n:
            raise ValueError("state_names must name every state")
        for sym, mat in self.transitions.items():
            if mat.shape != (n, n):
                raise ValueError(f"transition for {sym!r} has shape {mat.shape}, expected {(n, n)}")

        if self.kind is Kind.PFA:
            if (self.initial < 0).any() or (self.initial > 1).any() or abs(self.initial.sum() - 1) > STOCHASTIC_TOL:
                raise ValueError("PFA initial vector must be a probability distribution")
            for sym, mat in self.transitions.items():
                if (mat < 0).any() or (mat > 1).any():
                    raise ValueError(f"PFA transition for {sym!r} has entries outside [0, 1]")
                if np.max(np.abs(mat.sum(axis=1) - 1)) > STOCHASTIC_TOL:
                    raise ValueError(f"PFA transition for {sym!r} is not row-stochastic")
            return

        if not np.isin(self.initial, (0, 1)).all():
            raise ValueError("initial vector must be characteristic (0/1)")
        for sym, mat in self.transitions.items():
            if not np.isin(mat, (0, 1)).all():
                raise ValueError(f"transition for {sym!r} is not boolean")
        if self.kind is Kind.DFA:
            if self.initial.sum() != 1:
                raise ValueError("DFA must have exactly one initial state")
            for sym, mat in self.transitions.items():
                if not (mat.sum(axis=1) == 1).all():
                    raise ValueError(f"DFA transition for {sym!r} needs exactly one 1 per row")

    @property
    def n(self) -> int:
        return self.initial.shape[0]

    @property
    def is_unary(self) -> bool:
        return len(self.alphabet) == 1

    def successor(self, state: int, symbol: str) -> int:
        """Target state of a DFA move."""
        return int(np.argmax(self.transitions[symbol][state]))

    def word_matrix(self, word) -> np.ndarray:
        """Product of the transition matrices along ``word`` (saturated for NFAs)."""
        if isinstance(word, (int, np.integer)):
            mat = self.transitions[_unary_symbol(self, word)]
            if self.kind is Kind.NFA:
                return _bool_power(mat, int(word))
            return matrix_power(mat, int(word))
        result = np.eye(self.n, dtype=self.initial.dtype)
        for sym in _check_word(self, word):
            result = result @ self.transitions[sym]
            if self.kind is Kind.NFA:
                result = (result > 0).astype(np.int64)
        return result

    def probability(self, word) -> float:
        """Acceptance probability; 0/1 for the deterministic and nondeterministic kinds."""
        if self.kind is Kind.PFA:
            return accept_prob_pfa(self, word)
        if self.kind is Kind.DFA:
            return float(accept_dfa(self, word))
        return float(accept_nfa(self, word))

    def probabilities_up_to(self, horizon: int) -> np.ndarray:
        """``p(a^k)`` for ``k = 0..horizon`` on a unary automaton, by stepping."""
        sym = _unary_symbol(self, 0)
        mat = self.transitions[sym].astype(np.float64)
        vec = self.initial.astype(np.float64)
        acc = self.accepting.astype(np.float64)
        out = np.empty(horizon + 1)
        for k in range(horizon + 1):
            if self.kind is Kind.NFA:
                out[k] = 1.0 if vec @ acc >= 1 else 0.0
                vec = ((vec @ mat) > 0).astype(np.float64)
            else:
                out[k] = _clamp(float(vec @ acc))
                vec = vec @ mat
        return out


def _unary_symbol(a, k) -> str:
    if not a.is_unary:
        raise ValueError("word lengths are only meaningful for unary automata")
    if k < 0:
        raise ValueError(f"word length must be non-negative, got {k}")
    return a.alphabet[0]


def _check_word(a, word: Sequence[str]) -> Sequence[str]:
    for sym in word:
        if sym not in a.alphabet:
            raise ValueError(f"symbol {sym!r} not in alphabet {list(a.alphabet)}")
    return word


def _bool_power(mat: np.ndarray, k: int) -> np.ndarray:
    """Boolean (OR/AND) matrix power by squaring; counts never exceed n per product."""
    result = np.eye(mat.shape[0], dtype=np.int64)
    base = mat.astype(np.int64)
    while k:
        if k & 1:
            result = ((result @ base) > 0).astype(np.int64)
        k >>= 1
        if k:
            base = ((base @ base) > 0).astype(np.int64)
    return result


def _clamp(p: float) -> float:
    if -STOCHASTIC_TOL <= p < 0.0:
        return 0.0
    if 1.0 < p <= 1.0 + STOCHASTIC_TOL:
        return 1.0
    return p


def _require(a: ClassicalAutomaton, kind: Kind) -> None:
    if a.kind is not kind:
        raise TypeError(f"expected a {kind.value.upper()}, got a {a.kind.value.upper()}")


def accept_dfa(a: ClassicalAutomaton, word) -> bool:
    _require(a, Kind.DFA)
    return int(a.initial @ a.word_matrix(word) @ a.accepting) == 1


def accept_nfa(a: ClassicalAutomaton, word) -> bool:
    _require(a, Kind.NFA)
    return int(a.initial @ a.word_matrix(word) @ a.accepting) >= 1


def accept_prob_pfa(a: ClassicalAutomaton, word) -> float:
    _require(a, Kind.PFA)
    return _clamp(float(a.initial @ a.word_matrix(word) @ a.accepting))


def accepts(a: ClassicalAutomaton, word, cut_point: float = 0.5) -> bool:
    if a.kind is Kind.DFA:
        return accept_dfa(a, word)
    if a.kind is Kind.NFA:
        return accept_nfa(a, word)
    return accept_prob_pfa(a, word) > cut_point


# ---------------------------------------------------------------------------
# Named constructions
# ---------------------------------------------------------------------------

def build_dfa_lm(m: int) -> ClassicalAutomaton:
    """Cyclic unary DFA ``q_i -a-> q_{(i+1) mod m}`` accepting ``{a^k : m | k}``."""
    if m < 1:
        raise ValueError(f"modulus must be positive, got {m}")
    u = np.zeros((m, m), dtype=np.int64)
    for i in range(m):
        u[i, (i + 1) % m] = 1
    zeta = np.zeros(m, dtype=np.int64)
    zeta[0] = 1
    return ClassicalAutomaton(Kind.DFA, ("a",), zeta, {"a": u}, zeta.copy(),
                              tuple(f"q{i}" for i in range(m)))


def build_nfa_ek(k: int) -> ClassicalAutomaton:
    """NFA over ``{a, b}`` accepting words whose k-th symbol from the right is ``b``.

    State 0 loops on both letters and guesses the marked ``b``; states
    ``1..k`` count the remaining ``k - 1`` symbols, state ``k`` accepts.
    """
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    n = k + 1
    ua = np.zeros((n, n), dtype=np.int64)
    ub = np.zeros((n, n), dtype=np.int64)
    ua[0, 0] = ub[0, 0] = 1
    ub[0, 1] = 1
    for i in range(1, k):
        ua[i, i + 1] = ub[i, i + 1] = 1
    zeta = np.zeros(n, dtype=np.int64)
    zeta[0] = 1
    eta = np.zeros(n, dtype=np.int64)
    eta[k] = 1
    return ClassicalAutomaton(Kind.NFA, ("a", "b"), zeta, {"a": ua, "b": ub}, eta,
                              ("s",) + tuple(f"c{i}" for i in range(1, n)))


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def build_pfa_lmn(m: int, n: int) -> ClassicalAutomaton:
    """Unary PFA for ``{a^k : mn | k}``: from ``s`` jump with probability 1/2 into an
    m-cycle or an n-cycle. Accepting states are ``s``, ``p_0`` and ``q_0``, giving
    probability 1 on the language and at most 1/2 elsewhere.
    """
    if not (is_prime(m) and is_prime(n)):
        raise ValueError(f"both arguments must be prime, got {m} and {n}")
    if m == n:
        raise ValueError(f"primes must be distinct, got {m} twice")
    size = m + n + 1
    p = lambda i: 1 + i  # noqa: E731
    q = lambda j: 1 + m + j  # noqa: E731
    u = np.zeros((size, size))
    u[0, p(1 % m)] = 0.5
    u[0, q(1 % n)] = 0.5
    for i in range(m):
        u[p(i), p((i + 1) % m)] = 1.0
    for j in range(n):
        u[q(j), q((j + 1) % n)] = 1.0
    zeta = np.zeros(size)
    zeta[0] = 1.0
    eta = np.zeros(size, dtype=np.int64)
    eta[[0, p(0), q(0)]] = 1
    names = ("s",) + tuple(f"p{i}" for i in range(m)) + tuple(f"q{j}" for j in range(n))
    return ClassicalAutomaton(Kind.PFA, ("a",), zeta, {"a": u}, eta, names)


def from_transition_table(alphabet: Sequence[str], delta: Sequence[Mapping[str, int]],
                          start: int, finals) -> ClassicalAutomaton:
    """Build a DFA from ``delta[state][symbol] -> state``."""
    n = len(delta)
    trans = {s: np.zeros((n, n), dtype=np.int64) for s in alphabet}
    for i, row in enumerate(delta):
        for s in alphabet:
            trans[s][i, row[s]] = 1
    zeta = np.zeros(n, dtype=np.int64)
    zeta[start] = 1
    eta = np.zeros(n, dtype=np.int64)
    eta[list(finals)] = 1
    return ClassicalAutomaton(Kind.DFA, tuple(alphabet), zeta, trans, eta)


def as_nfa(a: ClassicalAutomaton) -> ClassicalAutomaton:
    if a.kind is Kind.PFA:
        raise TypeError("a PFA has no NFA reading")
    return ClassicalAutomaton(Kind.NFA, a.alphabet, a.initial, a.transitions, a.accepting, a.state_names)


# ---------------------------------------------------------------------------
# Conversions
# ---------------------------------------------------------------------------

def subset_construction(a: ClassicalAutomaton) -> ClassicalAutomaton:
    """Determinise an NFA over its reachable subsets (the empty set becomes a sink if reached)."""
    if a.kind is Kind.PFA:
        raise TypeError("subset construction needs a DFA or NFA")
    succ = {s: [frozenset(np.flatnonzero(row)) for row in a.transitions[s]] for s in a.alphabet}
    start = frozenset(np.flatnonzero(a.initial))
    index = {start: 0}
    order = [start]
    delta: list[dict[str, int]] = []
    queue = deque([start])
    while queue:
        subset = queue.popleft()
        row = {}
        for s in a.alphabet:
            target = frozenset().union(*(succ[s][q] for q in subset)) if subset else frozenset()
            if target not in index:
                index[target] = len(order)
                order.append(target)
                queue.append(target)
            row[s] = index[target]
        delta.append(row)
    finals = [i for i, subset in enumerate(order) if any(a.accepting[q] for q in subset)]
    return from_transition_table(a.alphabet, delta, 0, finals)


def _dfa_table(a: ClassicalAutomaton) -> list[dict[str, int]]:
    return [{s: a.successor(i, s) for s in a.alphabet} for i in range(a.n)]


def reachable_states(a: ClassicalAutomaton) -> list[int]:
    _require(a, Kind.DFA)
    start = int(np.argmax(a.initial))
    seen = {start}
    order = [start]
    queue = deque([start])
    while queue:
        i = queue.popleft()
        for s in a.alphabet:
            j = a.successor(i, s)
            if j not in seen:
                seen.add(j)
                order.append(j)
                queue.append(j)
    return order


def minimize_dfa(a: ClassicalAutomaton) -> ClassicalAutomaton:
    """Minimal equivalent DFA: drop unreachable states, then Moore partition refinement.

    States of the result are numbered in breadth-first order from the
    initial state, so equal languages give identical matrices.
    """
    _require(a, Kind.DFA)
    table = _dfa_table(a)
    live = reachable_states(a)
    block = {q: int(a.accepting[q]) for q in live}
    n_blocks = len(set(block.values()))
    while True:
        signatures = {q: (block[q],) + tuple(block[table[q][s]] for s in a.alphabet) for q in live}
        relabel: dict[tuple, int] = {}
        new_block = {q: relabel.setdefault(signatures[q], len(relabel)) for q in live}
        block = new_block
        if len(relabel) == n_blocks:
            break
        n_blocks = len(relabel)

    start = int(np.argmax(a.initial))
    order = {block[start]: 0}
    rep = {block[start]: start}
    queue = deque([start])
    while queue:
        q = queue.popleft()
        for s in a.alphabet:
            t = table[q][s]
            if block[t] not in order:
                order[block[t]] = len(order)
                rep[block[t]] = t
                queue.append(t)
    delta = [None] * len(order)
    finals = []
    for b, idx in order.items():
        q = rep[b]
        delta[idx] = {s: order[block[table[q][s]]] for s in a.alphabet}
        if a.accepting[q]:
            finals.append(idx)
    return from_transition_table(a.alphabet, delta, 0, finals)


# ---------------------------------------------------------------------------
# Descriptional complexity
# ---------------------------------------------------------------------------

def factorize(m: int) -> dict[int, int]:
    if m < 1:
        raise ValueError(f"cannot factor {m}")
    factors: dict[int, int] = {}
    d = 2
    while d * d <= m:
        while m % d == 0:
            factors[d] = factors.get(d, 0) + 1
            m //= d
        d += 1 if d == 2 else 2
    if m > 1:
        factors[m] = factors.get(m, 0) + 1
    return factors


def classical_state_bounds(m: int) -> tuple[int, int]:
    """State counts that are necessary and sufficient for ``{a^k : m | k}``.

    Returns ``(one-way DFA/NFA states, two-way or isolated-cut-point PFA states)``,
    the latter being the sum of the prime powers in the factorisation of m.
    """
    if m < 1:
        raise ValueError(f"modulus must be positive, got {m}")
    prime_powers = sum(p ** e for p, e in factorize(m).items())
    return m, max(prime_powers, 1)


# ---------------------------------------------------------------------------
# Cut points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CutPointReport:
    cut_point: float
    isolation: float
    horizon: int
    min_above: float | None
    max_below: float | None

    @property
    def isolated(self) -> bool:
        return self.isolation > 0.0


def cut_point_scan(a, cut_point: float, horizon: int) -> CutPointReport:
    """Empirical isolation of ``cut_point`` over words ``a^0 .. a^horizon``.

    ``a`` is any unary automaton exposing ``probabilities_up_to`` (classical
    or quantum). Isolation is only certified up to ``horizon``.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    probs = np.asarray(a.probabilities_up_to(horizon))
    dist = np.abs(probs - cut_point)
    rho = float(dist.min())
    if rho < 1e-12:
        rho = 0.0
    above = probs[probs > cut_point]
    below = probs[probs <= cut_point]
    return CutPointReport(
        cut_point=cut_point,
        isolation=rho,
        horizon=horizon,
        min_above=float(above.min()) if above.size else None,
        max_below=float(below.max()) if below.size else None,
    )


def enumerate_words(alphabet: Sequence[str], max_len: int):
    """All words of length ``0..max_len`` in length-lexicographic order."""
    for length in range(max_len + 1):
        for w in product(alphabet, repeat=length):
            yield w
