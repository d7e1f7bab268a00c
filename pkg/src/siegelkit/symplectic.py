"""Exact arithmetic in Sp(2g) over the integers, with a tolerance-checked real mode.

Matrices are laid out as ``[[A, B], [C, D]]`` with ``g x g`` blocks and the
alternating form ``J = [[0, I], [-I, 0]]``. Integer matrices are stored as
numpy object arrays of Python ints so products never overflow.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import GenusMismatchError, MalformedInputError, NotSymplecticError

REAL_TOLERANCE = 1e-9


def _is_integral(arr: np.ndarray) -> bool:
    if arr.dtype.kind in "iu":
        return True
    if arr.dtype == object:
        return all(isinstance(v, (int, np.integer)) and not isinstance(v, bool) for v in arr.flat)
    return False


def _as_int_array(arr) -> np.ndarray:
    a = np.asarray(arr)
    out = np.empty(a.shape, dtype=object)
    for idx, v in np.ndenumerate(a):
        out[idx] = int(v)
    return out


def _as_matrix(M) -> np.ndarray:
    if isinstance(M, SymplecticMatrix):
        return M.entries
    a = np.asarray(M)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise MalformedInputError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] % 2 or a.shape[0] == 0:
        raise MalformedInputError(f"dimension {a.shape[0]} is not a positive even number")
    return _as_int_array(a) if _is_integral(a) else a.astype(float)


def standard_form(g: int, exact: bool = True) -> np.ndarray:
    """The alternating matrix ``[[0, I], [-I, 0]]`` of size ``2g``."""
    J = np.zeros((2 * g, 2 * g), dtype=object if exact else float)
    J[...] = 0
    for i in range(g):
        J[i, g + i] = 1
        J[g + i, i] = -1
    return J


def is_symplectic(M, tol: float | None = None) -> bool:
    a = _as_matrix(M)
    g = a.shape[0] // 2
    exact = a.dtype == object
    if tol is None:
        tol = 0 if exact else REAL_TOLERANCE
    J = standard_form(g, exact)
    resid = a @ J @ a.T - J
    if exact and tol == 0:
        return all(v == 0 for v in resid.flat)
    return float(np.max(np.abs(resid.astype(float)))) <= tol


class SymplecticMatrix:
    """An element of Sp(2g), integral (exact) or real (within ``tol``)."""

    __slots__ = ("_m", "exact", "tol")

    def __init__(self, entries, *, tol: float = REAL_TOLERANCE, check: bool = True):
        m = _as_matrix(entries)
        self.exact = m.dtype == object
        self.tol = 0.0 if self.exact else tol
        if check and not is_symplectic(m, self.tol):
            raise NotSymplecticError("matrix does not satisfy M J M^t = J")
        m = m.copy()
        m.flags.writeable = False
        self._m = m

    @property
    def entries(self) -> np.ndarray:
        return self._m

    @property
    def g(self) -> int:
        return self._m.shape[0] // 2

    @property
    def A(self) -> np.ndarray:
        return self._m[: self.g, : self.g]

    @property
    def B(self) -> np.ndarray:
        return self._m[: self.g, self.g :]

    @property
    def C(self) -> np.ndarray:
        return self._m[self.g :, : self.g]

    @property
    def D(self) -> np.ndarray:
        return self._m[self.g :, self.g :]

    def __matmul__(self, other: "SymplecticMatrix") -> "SymplecticMatrix":
        return sympl_mul(self, other)

    def __neg__(self) -> "SymplecticMatrix":
        return SymplecticMatrix(-self._m, tol=self.tol, check=False)

    def inverse(self) -> "SymplecticMatrix":
        return sympl_inv(self)

    def transpose(self) -> "SymplecticMatrix":
        return SymplecticMatrix(self._m.T, tol=self.tol, check=False)

    def height(self):
        return height(self)

    def key(self) -> tuple:
        return tuple(self._m.flat)

    def rows(self) -> list[list]:
        return [list(r) for r in self._m]

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymplecticMatrix):
            return NotImplemented
        return self._m.shape == other._m.shape and bool(np.all(self._m == other._m))

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"SymplecticMatrix(g={self.g}, {self.rows()})"


def sympl_mul(M1: SymplecticMatrix, M2: SymplecticMatrix) -> SymplecticMatrix:
    if M1.g != M2.g:
        raise GenusMismatchError(f"genus {M1.g} vs {M2.g}")
    if M1.exact and M2.exact:
        return SymplecticMatrix(M1.entries @ M2.entries, check=False)
    prod = M1.entries.astype(float) @ M2.entries.astype(float)
    return SymplecticMatrix(prod, tol=max(M1.tol, M2.tol), check=False)


def sympl_inv(M: SymplecticMatrix) -> SymplecticMatrix:
    # M^{-1} = J^t M^t J = [[D^t, -B^t], [-C^t, A^t]]
    top = np.concatenate([M.D.T, -M.B.T], axis=1)
    bottom = np.concatenate([-M.C.T, M.A.T], axis=1)
    return SymplecticMatrix(np.concatenate([top, bottom], axis=0), tol=M.tol, check=False)


def height(M):
    """``max(1, |m_ij|)``; an exact int for integral input."""
    a = M.entries if isinstance(M, SymplecticMatrix) else np.asarray(M)
    if a.dtype == object and _is_integral(a):
        return max([1] + [abs(int(v)) for v in a.flat])
    return max(1.0, float(np.max(np.abs(a.astype(float)))))


def identity(g: int) -> SymplecticMatrix:
    return SymplecticMatrix(np.eye(2 * g, dtype=int), check=False)


def J(g: int) -> SymplecticMatrix:
    return SymplecticMatrix(standard_form(g), check=False)


def translation(S) -> SymplecticMatrix:
    """``T_S = [[I, S], [0, I]]`` for a symmetric (integer or real) ``S``."""
    S = np.asarray(S)
    g = S.shape[0]
    exact = _is_integral(S)
    S = _as_int_array(S) if exact else S.astype(float)
    I = _as_int_array(np.eye(g, dtype=int)) if exact else np.eye(g)
    Z = I * 0
    m = np.block([[I, S], [Z, I]])
    return SymplecticMatrix(m)


def integer_inverse(U) -> np.ndarray:
    """Exact inverse of a unimodular integer matrix."""
    U = _as_int_array(U)
    n = U.shape[0]
    m = [[Fraction(int(U[i, j])) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)]
         for i in range(n)]
    for k in range(n):
        p = next((r for r in range(k, n) if m[r][k] != 0), None)
        if p is None:
            raise MalformedInputError("matrix is singular")
        m[k], m[p] = m[p], m[k]
        piv = m[k][k]
        m[k] = [v / piv for v in m[k]]
        for r in range(n):
            if r != k and m[r][k] != 0:
                f = m[r][k]
                m[r] = [a - f * b for a, b in zip(m[r], m[k])]
    inv = [[m[i][n + j] for j in range(n)] for i in range(n)]
    if any(v.denominator != 1 for row in inv for v in row):
        raise MalformedInputError("matrix is not unimodular")
    return _as_int_array([[int(v) for v in row] for row in inv])


def gl_embedding(U) -> SymplecticMatrix:
    """``diag(U, U^{-t})`` for ``U`` in GL_g(Z); acts on H_g by ``Z -> U Z U^t``."""
    U = _as_int_array(U)
    Uinv_t = integer_inverse(U).T
    Z = U * 0
    return SymplecticMatrix(np.block([[U, Z], [Z, Uinv_t]]))


def partial_inversion(r: int, g: int) -> SymplecticMatrix:
    """``[[I-P, -P], [P, I-P]]`` with ``P`` the projection on the first ``r`` coordinates."""
    P = np.zeros((g, g), dtype=int)
    P[:r, :r] = np.eye(r, dtype=int)
    Q = np.eye(g, dtype=int) - P
    return SymplecticMatrix(np.block([[Q, -P], [P, Q]]))


def _gl_generators(g: int) -> list[np.ndarray]:
    if g == 1:
        return [np.array([[-1]])]
    gens = []
    flip = np.eye(g, dtype=int)
    flip[0, 0] = -1
    gens.append(flip)
    swap = np.eye(g, dtype=int)
    swap[[0, 1]] = swap[[1, 0]]
    gens.append(swap)
    if g > 2:
        gens.append(np.roll(np.eye(g, dtype=int), 1, axis=0))
    shear = np.eye(g, dtype=int)
    shear[0, 1] = 1
    gens.append(shear)
    return gens


@lru_cache(maxsize=None)
def _generators(g: int) -> tuple[SymplecticMatrix, ...]:
    out = [J(g)]
    for i, j in itertools.combinations_with_replacement(range(g), 2):
        S = np.zeros((g, g), dtype=int)
        S[i, j] = S[j, i] = 1
        out.append(translation(S))
    out.extend(gl_embedding(U) for U in _gl_generators(g))
    return tuple(out)


def generators(g: int) -> list[SymplecticMatrix]:
    """A generating set of Sp(2g, Z), all of height 1.

    Order is fixed: ``J``, then translations ``T_{E_ij + E_ji}`` (``T_{E_ii}``
    on the diagonal) in row-major order of ``i <= j``, then the embeddings
    ``diag(U, U^{-t})`` of a generating set of GL_g(Z) (sign flip, swap,
    cyclic shift, shear; for g = 1 just ``U = -1``).
    """
    if g < 1:
        raise MalformedInputError("genus must be positive")
    return list(_generators(g))


def random_word(g: int, length: int, rng: np.random.Generator) -> SymplecticMatrix:
    gens = generators(g)
    pool = gens + [sympl_inv(m) for m in gens]
    M = identity(g)
    for k in rng.integers(0, len(pool), size=length):
        M = M @ pool[int(k)]
    return M


def random_real_symplectic(g: int, rng: np.random.Generator, scale: float = 1.0) -> SymplecticMatrix:
    """A random element of Sp(2g, R): product of real translations, GL embeddings and J."""
    def sym(n):
        a = rng.normal(scale=scale, size=(n, n))
        return (a + a.T) / 2

    def gl(n):
        while True:
            U = np.eye(n) + rng.normal(scale=0.5 * scale, size=(n, n))
            if abs(np.linalg.det(U)) > 0.2:
                return U

    def emb(U):
        Z = np.zeros_like(U)
        return SymplecticMatrix(np.block([[U, Z], [Z, np.linalg.inv(U).T]]), check=False)

    def tr(S):
        I = np.eye(len(S))
        return SymplecticMatrix(np.block([[I, S], [np.zeros_like(S), I]]), check=False)

    Jf = SymplecticMatrix(standard_form(g, exact=False), check=False)
    M = emb(gl(g)) @ tr(sym(g)) @ Jf @ tr(sym(g)) @ emb(gl(g))
    if not is_symplectic(M.entries, REAL_TOLERANCE):
        raise NotSymplecticError("random real symplectic lost accuracy")
    return M


def canonical_sign(M: SymplecticMatrix) -> SymplecticMatrix:
    """Pick the representative of ``{M, -M}`` whose first nonzero entry is positive."""
    first = next(v for v in M.entries.flat if v != 0)
    return M if first > 0 else -M
