"""Points of the Siegel upper half-space and the action of Sp(2g).

A point ``Z = X + iY`` is stored as two symmetric matrices of gmpy2 ``mpfr``
numbers at the point's working precision. Membership tests and vectorised
helpers work in float64, which is ample once a point is reduced.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

from . import _mp
from .errors import (
    GenusMismatchError,
    MalformedInputError,
    NotPositiveDefiniteError,
    PrecisionError,
)
from .symplectic import (
    SymplecticMatrix,
    gl_embedding,
    integer_inverse,
    partial_inversion,
    translation,
)

DEFAULT_PRECISION = _mp.DEFAULT_PRECISION
MAX_PRECISION = 4096
SQRT3_2 = math.sqrt(3) / 2
MEMBERSHIP_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SiegelPoint:
    X: np.ndarray
    Y: np.ndarray
    precision: int = DEFAULT_PRECISION

    @property
    def g(self) -> int:
        return self.X.shape[0]

    @cached_property
    def Z(self) -> np.ndarray:
        """``X + iY`` as an object array of ``mpc``."""
        with _mp.working_precision(self.precision):
            out = np.empty(self.X.shape, dtype=object)
            for idx in np.ndindex(self.X.shape):
                out[idx] = mpc(self.X[idx], self.Y[idx])
        return out

    @cached_property
    def Xf(self) -> np.ndarray:
        return _mp.to_float(self.X)

    @cached_property
    def Yf(self) -> np.ndarray:
        return _mp.to_float(self.Y)

    @property
    def Zc(self) -> np.ndarray:
        return self.Xf + 1j * self.Yf

    def det_Y(self):
        with _mp.working_precision(self.precision):
            return _mp.det(self.Y)

    def __repr__(self) -> str:
        return f"SiegelPoint(g={self.g}, Z={self.Zc.tolist()}, precision={self.precision})"


def _square(a, name: str) -> np.ndarray:
    arr = np.asarray(a, dtype=object)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise MalformedInputError(f"{name} must be a square matrix, got shape {arr.shape}")
    return arr


def make_point(X, Y, precision: int = DEFAULT_PRECISION, tol: float = 1e-9) -> SiegelPoint:
    """Validate ``(X, Y)`` and build a point of H_g.

    Entries may be numbers, gmpy2 values or decimal strings (parsed at
    ``precision`` bits). ``X`` and ``Y`` are symmetrised after the asymmetry
    check passes.
    """
    X = _square(X, "X")
    Y = _square(Y, "Y")
    if X.shape != Y.shape:
        raise MalformedInputError(f"X has shape {X.shape} but Y has shape {Y.shape}")
    with _mp.working_precision(precision):
        Xm = _mp.to_mpfr(X)
        Ym = _mp.to_mpfr(Y)
        for name, m in (("X", Xm), ("Y", Ym)):
            scale = max(1.0, _mp.max_abs(m))
            if _mp.max_abs(m - m.T) > tol * scale:
                raise MalformedInputError(f"{name} is not symmetric")
        Xm = (Xm + Xm.T) / 2
        Ym = (Ym + Ym.T) / 2
        if not _mp.cholesky_ok(Ym):
            lam = float(np.linalg.eigvalsh(_mp.to_float(Ym))[0])
            raise NotPositiveDefiniteError(lam)
    Xm.flags.writeable = False
    Ym.flags.writeable = False
    return SiegelPoint(Xm, Ym, int(precision))


def point_from_complex(Z, precision: int = DEFAULT_PRECISION) -> SiegelPoint:
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    return make_point(Z.real, Z.imag, precision=precision)


def _blocks(M: SymplecticMatrix, Z: SiegelPoint):
    if M.g != Z.g:
        raise GenusMismatchError(f"matrix genus {M.g} vs point genus {Z.g}")
    return tuple(_mp.to_mpc(b) for b in (M.A, M.B, M.C, M.D))


def act(M: SymplecticMatrix, Z: SiegelPoint) -> SiegelPoint:
    """``(AZ + B)(CZ + D)^{-1}``, retried at doubled precision when ``CZ + D`` is near singular."""
    prec = Z.precision
    while True:
        with _mp.working_precision(prec):
            A, B, C, D = _blocks(M, Z)
            Zm = _mp.to_mpc(Z.Z)
            Q = C @ Zm + D
            d = _mp.det(Q)
            if abs(d) >= gmpy2.exp2(-prec // 2):
                W = (A @ Zm + B) @ _mp.inv(Q)
                W = (W + W.T) / 2
                Xn, Yn = _mp.real(W), _mp.imag(W)
                break
        prec *= 2
        if prec > MAX_PRECISION:
            raise PrecisionError(f"|det(CZ+D)| underflows even at {MAX_PRECISION} bits")
    try:
        return make_point(Xn, Yn, precision=Z.precision)
    except NotPositiveDefiniteError as exc:
        raise PrecisionError(f"action lost positivity of Im: {exc}") from exc


def transformed_imag_inverse(M: SymplecticMatrix, Z: SiegelPoint) -> np.ndarray:
    """``(C conj(Z) + D) Y^{-1} (C Z + D)^t``, which equals ``Im(M Z)^{-1}``."""
    with _mp.working_precision(Z.precision):
        _, _, C, D = _blocks(M, Z)
        Zm = Z.Z
        Yinv = _mp.inv(_mp.to_mpc(Z.Y))
        out = (C @ _mp.conj(Zm) + D) @ Yinv @ (C @ Zm + D).T
        return _mp.real(out)


def symplectic_identity_residual(M: SymplecticMatrix, Z: SiegelPoint) -> float:
    """Max-norm of ``(C conj Z + D)^t (AZ + B) - (A conj Z + B)^t (CZ + D) - 2iY``."""
    with _mp.working_precision(Z.precision):
        A, B, C, D = _blocks(M, Z)
        Zm = Z.Z
        Zb = _mp.conj(Zm)
        lhs = (C @ Zb + D).T @ (A @ Zm + B) - (A @ Zb + B).T @ (C @ Zm + D)
        return _mp.max_abs(lhs - 2j * _mp.to_mpc(Z.Y))


def norm_h(Z: SiegelPoint) -> float:
    """``max(1, |z_ij|, det(Y)^{-1})``."""
    with _mp.working_precision(Z.precision):
        entries = max(abs(v) for v in Z.Z.flat)
        return float(max(mpfr(1), entries, 1 / _mp.det(Z.Y)))


def random_point(g: int, rng: np.random.Generator, x_range: float = 2.0,
                 log10_scale: tuple[float, float] = (-2.0, 1.0),
                 precision: int = DEFAULT_PRECISION) -> SiegelPoint:
    """A generic point: uniform ``X``, ``Y`` a random Gram matrix at a log-uniform scale."""
    X = rng.uniform(-x_range, x_range, size=(g, g))
    X = (X + X.T) / 2
    L = rng.normal(size=(g, g))
    Y = L @ L.T + 0.05 * np.eye(g)
    Y *= 10 ** rng.uniform(*log10_scale) / max(np.linalg.eigvalsh(Y)[-1], 1e-300)
    return make_point(X, Y, precision=precision)


# ---------------------------------------------------------------------------
# Minkowski conditions and determinant conditions

@lru_cache(maxsize=None)
def minkowski_conditions(g: int) -> tuple[tuple[int, tuple[int, ...]], ...]:
    """Pairs ``(k, v)`` meaning ``Y[v] >= y_kk``.

    ``v`` runs over vectors with entries in {-1, 0, 1} and some nonzero entry at
    index ``>= k`` (up to sign). For g <= 4 these, together with
    ``y_{k,k+1} >= 0``, are exactly Minkowski's reduction conditions.
    """
    out = []
    for k in range(g):
        for v in itertools.product((-1, 0, 1), repeat=g):
            if not any(v[k:]):
                continue
            lead = next(x for x in v if x)
            if lead < 0:
                continue
            if sum(x != 0 for x in v) == 1 and v[k] != 0:
                continue  # v = e_k: trivial
            out.append((k, v))
    return tuple(out)


@dataclass(frozen=True)
class DetConditions:
    """Symplectic matrices whose bottom block rows give ``|det(CZ + D)| >= 1`` tests."""

    matrices: tuple[SymplecticMatrix, ...]
    C: np.ndarray
    D: np.ndarray
    heuristic: bool
    labels: tuple[str, ...] = field(default=())


def _primitive_vectors(g: int) -> list[tuple[int, ...]]:
    out = []
    for v in itertools.product((-1, 0, 1), repeat=g):
        if any(v) and next(x for x in v if x) > 0:
            out.append(v)
    return out


def _complete_unimodular(W: np.ndarray) -> np.ndarray | None:
    g, r = W.shape
    if r == g:
        return W if abs(round(np.linalg.det(W))) == 1 else None
    for extra in itertools.product(_primitive_vectors(g), repeat=g - r):
        U = np.column_stack([W] + [np.array(e) for e in extra])
        if abs(round(np.linalg.det(U))) == 1:
            return U.astype(int)
    return None


def _sym_matrices(r: int, values=(-1, 0, 1)):
    idx = [(i, j) for i in range(r) for j in range(i, r)]
    for vals in itertools.product(values, repeat=len(idx)):
        S = np.zeros((r, r), dtype=int)
        for (i, j), v in zip(idx, vals):
            S[i, j] = S[j, i] = v
        yield S


def _block_condition(W: np.ndarray, S: np.ndarray, g: int) -> SymplecticMatrix | None:
    """Symplectic ``M`` with ``|det(CZ + D)| = |det(W^t Z W + S)|``."""
    U = _complete_unimodular(W)
    if U is None:
        return None
    r = W.shape[1]
    Sg = np.zeros((g, g), dtype=int)
    Sg[:r, :r] = S
    return partial_inversion(r, g) @ translation(Sg) @ gl_embedding(U.T)


@lru_cache(maxsize=None)
def det_conditions(g: int) -> DetConditions:
    """Test set for ``|det(CZ + D)| >= 1``.

    Each condition reads ``|det(W^t Z W + S)| >= 1`` for an integral primitive
    ``g x r`` matrix ``W`` and symmetric ``S`` with entries in {-1, 0, 1}.

    * g = 1: the single test ``|z| >= 1``.
    * g = 2: ``r = 1`` with ``w`` in {(1,0), (0,1), (1,1), (1,-1)}, and
      ``r = 2`` with ``W = I``: 39 conditions containing Gottschling's 19.
    * g = 3: the same pattern with ``r = 1, 2, 3``; no finite complete list is
      classical here, so membership is reported as heuristic.
    """
    mats, labels = [], []
    if g == 1:
        mats.append(partial_inversion(1, 1))
        labels.append("w=(1) S=0")
    else:
        vecs = _primitive_vectors(g)
        for r in range(1, g + 1):
            if r == 1:
                Ws = [np.array(v).reshape(g, 1) for v in vecs]
            elif r == g:
                Ws = [np.eye(g, dtype=int)]
            else:
                Ws = []
                for cols in itertools.combinations(vecs, r):
                    W = np.column_stack(cols)
                    minors = [round(np.linalg.det(W[list(rows)]))
                              for rows in itertools.combinations(range(g), r)]
                    if math.gcd(*[abs(m) for m in minors]) == 1:
                        Ws.append(W)
            for W in Ws:
                for S in _sym_matrices(r):
                    M = _block_condition(W, S, g)
                    if M is not None:
                        mats.append(M)
                        labels.append(f"W={W.T.tolist()} S={S.tolist()}")
    C = np.array([m.C for m in mats], dtype=float)
    D = np.array([m.D for m in mats], dtype=float)
    return DetConditions(tuple(mats), C, D, heuristic=g >= 3, labels=tuple(labels))


# ---------------------------------------------------------------------------
# Membership

CONDITIONS = ("(a)", "(c)", "(d)", "minkowski", "det_height")


def _minkowski_arrays(g: int):
    conds = minkowski_conditions(g)
    ks = np.array([k for k, _ in conds], dtype=int)
    vs = np.array([v for _, v in conds], dtype=float).reshape(len(conds), g)
    return ks, vs


def domain_margins(Zc: np.ndarray, chunk: int = 4096) -> dict[str, np.ndarray]:
    """Per-condition margins for a batch of points ``Zc`` of shape ``(N, g, g)``.

    A margin is nonnegative iff the condition holds. ``(a)``, the lower bound
    in ``(c)`` and ``det_height`` are absolute; the remaining ones are relative
    to the diagonal entries involved.
    """
    Zc = np.asarray(Zc, dtype=complex)
    if Zc.ndim == 2:
        Zc = Zc[None]
    N, g, _ = Zc.shape
    X, Y = Zc.real, Zc.imag
    diag = np.diagonal(Y, axis1=1, axis2=2)
    out = {}
    out["(a)"] = 0.5 - np.max(np.abs(X).reshape(N, -1), axis=1)
    c = diag[:, 0] - SQRT3_2
    if g > 1:
        c = np.minimum(c, np.min((diag[:, 1:] - diag[:, :-1]) / diag[:, 1:], axis=1))
    out["(c)"] = c
    if g > 1:
        iu, ju = np.triu_indices(g, 1)
        m = np.minimum(diag[:, iu], diag[:, ju])
        out["(d)"] = np.min(0.5 - np.abs(Y[:, iu, ju]) / m, axis=1)
        ks, vs = _minkowski_arrays(g)
        Yv = np.einsum("ci,nij,cj->nc", vs, Y, vs)
        mk = np.min((Yv - diag[:, ks]) / diag[:, ks], axis=1)
        signs = np.min(Y[:, np.arange(g - 1), np.arange(1, g)] / diag[:, :-1], axis=1)
        out["minkowski"] = np.minimum(mk, signs)
    else:
        out["(d)"] = np.full(N, np.inf)
        out["minkowski"] = np.full(N, np.inf)
    conds = det_conditions(g)
    dets = np.empty(N)
    for s in range(0, N, chunk):
        Zs = Zc[s : s + chunk]
        Q = np.einsum("cij,njk->ncik", conds.C, Zs) + conds.D[None]
        dets[s : s + chunk] = np.min(np.abs(np.linalg.det(Q)), axis=1)
    out["det_height"] = dets - 1.0
    return out


def in_domain_batch(Zc: np.ndarray, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
    margins = domain_margins(Zc)
    ok = np.ones(len(next(iter(margins.values()))), dtype=bool)
    for m in margins.values():
        ok &= m >= -tol
    return ok


@dataclass(frozen=True)
class DomainReport:
    in_domain: bool
    violated_conditions: list[str]
    margins: dict[str, float]
    heuristic: bool = False

    def to_dict(self) -> dict:
        return {
            "in_domain": self.in_domain,
            "violated_conditions": list(self.violated_conditions),
            "margins": {k: (None if math.isinf(v) else v) for k, v in self.margins.items()},
            "heuristic": self.heuristic,
        }


def in_fundamental_domain(Z: SiegelPoint, tol: float = MEMBERSHIP_TOL) -> DomainReport:
    margins = {k: float(v[0]) for k, v in domain_margins(Z.Zc[None]).items()}
    violated = [k for k in CONDITIONS if margins[k] < -tol]
    return DomainReport(not violated, violated, margins, heuristic=Z.g >= 3)


def diagonal_ratio(Y: np.ndarray) -> float:
    """``prod(y_ii) / det(Y)``, which lies in ``[1, c_g]`` on the fundamental domain."""
    Y = np.asarray(Y, dtype=float)
    return float(np.prod(np.diag(Y)) / np.linalg.det(Y))


def act_batch(M: SymplecticMatrix, Zc: np.ndarray) -> np.ndarray:
    """Float64 action on a batch ``(N, g, g)``; for bulk filtering only."""
    A, B, C, D = (np.asarray(b, dtype=float) for b in (M.A, M.B, M.C, M.D))
    num = np.einsum("ij,njk->nik", A, Zc) + B
    den = np.einsum("ij,njk->nik", C, Zc) + D
    # W = num den^{-1}  <=>  den^t W^t = num^t
    W = np.linalg.solve(np.swapaxes(den, 1, 2), np.swapaxes(num, 1, 2))
    W = np.swapaxes(W, 1, 2)
    return (W + np.swapaxes(W, 1, 2)) / 2


__all__ = [
    "SiegelPoint", "make_point", "point_from_complex", "act", "transformed_imag_inverse",
    "symplectic_identity_residual", "norm_h", "in_fundamental_domain", "DomainReport",
    "domain_margins", "in_domain_batch", "det_conditions", "minkowski_conditions",
    "diagonal_ratio", "random_point", "act_batch", "integer_inverse",
]
