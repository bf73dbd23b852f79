"""Small dense linear-algebra helpers shared by the solvers.

All matrices here are tiny (at most 16x16 for the four-level
superoperator), so everything is plain dense numpy.
"""

from __future__ import annotations

import numpy as np


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def anticommutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def check_same_dim(*ops: np.ndarray) -> int:
    """Return the common dimension of square operators or raise ValueError."""
    dims = set()
    for op in ops:
        if op.ndim != 2 or op.shape[0] != op.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {op.shape}")
        dims.add(op.shape[0])
    if len(dims) > 1:
        raise ValueError(f"dimension mismatch: {sorted(dims)}")
    return dims.pop() if dims else 0


def taylor_series(a: np.ndarray, order: int) -> np.ndarray:
    """Truncated exponential series sum_{n<=order} a^n / n!."""
    out = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for n in range(1, order + 1):
        term = term @ a / n
        out = out + term
    return out


def expm(a: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Matrix exponential by scaling and squaring of a Taylor series.

    The matrix is scaled by 2**-s until its 1-norm is at most 0.5, the
    series is summed until the next term drops below ``tol`` (relative),
    and the result is squared s times.
    """
    a = np.asarray(a, dtype=complex)
    norm = np.linalg.norm(a, 1)
    s = 0
    if norm > 0.5:
        s = int(np.ceil(np.log2(norm / 0.5)))
    scaled = a / 2.0**s
    n = a.shape[0]
    out = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    # squaring amplifies the truncation error, hence the margin on tol
    for k in range(1, 60):
        term = term @ scaled / k
        out = out + term
        if np.abs(term).max() <= tol * 1e-4:
            break
    for _ in range(s):
        out = out @ out
    return out
