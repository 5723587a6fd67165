"""Small dense complex linear algebra with the quantum predicates used everywhere else.

States are row vectors and act on matrices from the left (``zeta @ U``).
Vectors and matrices are plain ``complex128`` numpy arrays that are marked
read-only once they pass through :func:`as_vector` / :func:`as_matrix`.
"""

from __future__ import annotations

import numpy as np

DEFAULT_TOL = 1e-10

# Probability below which a measurement outcome has no post-measurement state.
_COLLAPSE_EPS = 1e-15


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def as_vector(entries) -> np.ndarray:
    vec = np.array(entries, dtype=np.complex128)
    if vec.ndim != 1 or vec.size == 0:
        raise ValueError(f"expected a non-empty 1-D vector, got shape {vec.shape}")
    return _freeze(vec)


def as_matrix(entries) -> np.ndarray:
    mat = np.array(entries, dtype=np.complex128)
    if mat.ndim != 2 or mat.size == 0:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {mat.shape}")
    return _freeze(mat)


def identity(n: int) -> np.ndarray:
    return _freeze(np.eye(n, dtype=np.complex128))


def basis_vector(n: int, i: int) -> np.ndarray:
    vec = np.zeros(n, dtype=np.complex128)
    vec[i] = 1.0
    return _freeze(vec)


def matmul(a, b) -> np.ndarray:
    """Matrix product that refuses non-conformable shapes instead of broadcasting."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ValueError(f"cannot multiply shapes {a.shape} and {b.shape}")
    return _freeze(a @ b)


def adjoint(m) -> np.ndarray:
    return _freeze(np.conj(np.asarray(m, dtype=np.complex128)).T.copy())


def norm(v) -> float:
    return float(np.linalg.norm(np.asarray(v)))


def inner(u, v) -> complex:
    """Inner product ``<u, v> = u v^dagger`` for row vectors."""
    return complex(np.vdot(np.asarray(v), np.asarray(u)))


def is_normalized(v, tol: float = DEFAULT_TOL) -> bool:
    return abs(norm(v) - 1.0) <= tol


def _require_square(m: np.ndarray) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")


def _max_dev(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a - b))) if a.size else 0.0


def is_unitary(m, tol: float = DEFAULT_TOL) -> bool:
    m = np.asarray(m, dtype=np.complex128)
    _require_square(m)
    eye = np.eye(m.shape[0])
    mh = m.conj().T
    return _max_dev(m @ mh, eye) <= tol and _max_dev(mh @ m, eye) <= tol


def is_hermitian(m, tol: float = DEFAULT_TOL) -> bool:
    m = np.asarray(m, dtype=np.complex128)
    _require_square(m)
    return _max_dev(m, m.conj().T) <= tol


def is_projector(m, tol: float = DEFAULT_TOL) -> bool:
    m = np.asarray(m, dtype=np.complex128)
    _require_square(m)
    return is_hermitian(m, tol) and _max_dev(m @ m, m) <= tol


def measure(state, projector, tol: float = DEFAULT_TOL) -> tuple[float, np.ndarray | None]:
    """Project ``state`` with ``projector``.

    Returns the outcome probability ``||state P||^2`` and the collapsed
    state ``state P / ||state P||`` (``None`` when the outcome is
    impossible).
    """
    state = np.asarray(state, dtype=np.complex128)
    projector = np.asarray(projector, dtype=np.complex128)
    if not is_normalized(state, tol):
        raise ValueError(f"state is not normalized (norm {norm(state):.12g})")
    if not is_projector(projector, tol):
        raise ValueError("measurement operator is not an orthogonal projector")
    if projector.shape[0] != state.shape[0]:
        raise ValueError(f"cannot project state of dim {state.shape[0]} with {projector.shape}")
    projected = state @ projector
    prob = float(np.real(np.vdot(projected, projected)))
    prob = min(max(prob, 0.0), 1.0)
    if prob <= _COLLAPSE_EPS:
        return prob, None
    return prob, _freeze(projected / np.sqrt(prob))


def direct_sum(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    out = np.zeros((a.shape[0] + b.shape[0], a.shape[1] + b.shape[1]), dtype=np.complex128)
    out[: a.shape[0], : a.shape[1]] = a
    out[a.shape[0]:, a.shape[1]:] = b
    return _freeze(out)


def kron(a, b) -> np.ndarray:
    return _freeze(np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128)))


def nearest_unitary(m) -> np.ndarray:
    """Unitary polar factor of ``m``: the closest unitary in Frobenius norm."""
    w, _, vh = np.linalg.svd(np.asarray(m))
    return w @ vh


def matrix_power(m, k: int, unitary: bool = False) -> np.ndarray:
    """``m**k`` by repeated squaring; ``k`` may be any non-negative int.

    With ``unitary=True`` every product is snapped back to the unitary group,
    so rounding drift cannot push probabilities past 1 for huge ``k``.
    """
    if k < 0:
        raise ValueError(f"negative exponent {k}")
    fix = nearest_unitary if unitary else (lambda x: x)
    m = np.asarray(m)
    result = np.eye(m.shape[0], dtype=m.dtype)
    base = m.copy()
    while k:
        if k & 1:
            result = fix(result @ base)
        k >>= 1
        if k:
            base = fix(base @ base)
    return result


# JSON helpers: complex entries travel as [re, im] pairs, row-major.

def complex_to_json(arr) -> list:
    arr = np.asarray(arr, dtype=np.complex128)
    if arr.ndim == 0:
        z = complex(arr)
        return [z.real, z.imag]
    return [complex_to_json(x) for x in arr]


def complex_from_json(data) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.shape[-1:] != (2,):
        raise ValueError("complex entries must be [re, im] pairs")
    return _freeze(arr[..., 0] + 1j * arr[..., 1])
