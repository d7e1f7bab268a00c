"""Small dense linear algebra on numpy object arrays of gmpy2 numbers.

Matrices here are at most 6x6, so plain Gauss-Jordan is fine. All functions
assume the caller has set the working precision with :func:`working_precision`.
"""

from __future__ import annotations

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

DEFAULT_PRECISION = 128


def working_precision(bits: int):
    return gmpy2.context(precision=int(bits))


def to_mpfr(a) -> np.ndarray:
    arr = np.asarray(a, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        if isinstance(v, str):
            out[idx] = mpfr(v.strip())
        elif isinstance(v, (int, np.integer)):
            out[idx] = mpfr(int(v))
        else:
            out[idx] = mpfr(v)
    return out


def to_mpc(a) -> np.ndarray:
    arr = np.asarray(a, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        if isinstance(v, (complex, np.complexfloating)):
            out[idx] = mpc(v.real, v.imag)
        elif isinstance(v, (int, np.integer)):
            out[idx] = mpc(int(v))
        else:
            out[idx] = mpc(v)
    return out


def real(a: np.ndarray) -> np.ndarray:
    out = np.empty(a.shape, dtype=object)
    for idx, v in np.ndenumerate(a):
        out[idx] = mpfr(v.real)
    return out


def imag(a: np.ndarray) -> np.ndarray:
    out = np.empty(a.shape, dtype=object)
    for idx, v in np.ndenumerate(a):
        out[idx] = mpfr(v.imag)
    return out


def conj(a: np.ndarray) -> np.ndarray:
    out = np.empty(a.shape, dtype=object)
    for idx, v in np.ndenumerate(a):
        out[idx] = v.conjugate()
    return out


def to_float(a: np.ndarray) -> np.ndarray:
    return np.array([[float(v) for v in row] for row in a], dtype=float)


def to_complex(a: np.ndarray) -> np.ndarray:
    return np.array([[complex(v) for v in row] for row in a], dtype=complex)


def identity(n: int, kind=mpfr) -> np.ndarray:
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            out[i, j] = kind(1 if i == j else 0)
    return out


def _lu(a: np.ndarray):
    """In-place partial-pivot elimination; returns (rows, sign) or raises on zero pivot."""
    n = a.shape[0]
    m = [list(row) for row in a]
    sign = 1
    for k in range(n):
        p = max(range(k, n), key=lambda r: abs(m[r][k]))
        if m[p][k] == 0:
            return m, 0
        if p != k:
            m[k], m[p] = m[p], m[k]
            sign = -sign
        for r in range(k + 1, n):
            f = m[r][k] / m[k][k]
            if f != 0:
                for c in range(k, n):
                    m[r][c] -= f * m[k][c]
    return m, sign


def det(a: np.ndarray):
    n = a.shape[0]
    if n == 1:
        return a[0, 0]
    if n == 2:
        return a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    if n == 3:
        return (
            a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
            - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
            + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0])
        )
    m, sign = _lu(a)
    if sign == 0:
        return 0 * a[0, 0]
    out = m[0][0] * sign
    for k in range(1, n):
        out *= m[k][k]
    return out


def inv(a: np.ndarray) -> np.ndarray:
    """Gauss-Jordan inverse with partial pivoting."""
    n = a.shape[0]
    one = a[0, 0] ** 0
    zero = one - one
    m = [list(a[i]) + [one if i == j else zero for j in range(n)] for i in range(n)]
    for k in range(n):
        p = max(range(k, n), key=lambda r: abs(m[r][k]))
        if m[p][k] == 0:
            raise ZeroDivisionError("singular matrix")
        m[k], m[p] = m[p], m[k]
        piv = m[k][k]
        m[k] = [v / piv for v in m[k]]
        for r in range(n):
            if r != k:
                f = m[r][k]
                if f != 0:
                    m[r] = [vr - f * vk for vr, vk in zip(m[r], m[k])]
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            out[i, j] = m[i][n + j]
    return out


def cholesky_ok(y: np.ndarray) -> bool:
    """True iff the symmetric mpfr matrix ``y`` is positive definite."""
    n = y.shape[0]
    L = [[mpfr(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1):
            s = y[i, j] - sum((L[i][k] * L[j][k] for k in range(j)), mpfr(0))
            if i == j:
                if s <= 0:
                    return False
                L[i][i] = gmpy2.sqrt(s)
            else:
                L[i][j] = s / L[j][j]
    return True


def max_abs(a: np.ndarray) -> float:
    return max((float(abs(v)) for v in a.flat), default=0.0)
