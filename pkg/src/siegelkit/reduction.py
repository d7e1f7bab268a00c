"""Reduction of points of H_g into the fundamental domain.

Minkowski reduction of ``Y`` uses the greedy algorithm (size-reduce each basis
vector against the span of the previous ones by an exact small-dimensional
closest-vector search, swap when out of order), followed by a repair loop over
the finite Minkowski condition list. Siegel reduction then alternates
Minkowski reduction, integral translation of ``X`` and the determinant step.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceededError, DegenerateFitError, UnsupportedGenusError
from .fits import BoundFit, fit_loglog
from .geometry import (
    MEMBERSHIP_TOL,
    SiegelPoint,
    act,
    det_conditions,
    in_fundamental_domain,
    minkowski_conditions,
    norm_h,
)
from .symplectic import (
    SymplecticMatrix,
    canonical_sign,
    gl_embedding,
    height,
    identity,
    translation,
)

STEP_BUDGET = 100_000
_REL_EPS = 1e-12


def _closest_combination(G: np.ndarray, k: int) -> np.ndarray:
    """Integer ``x`` minimising ``Q(e_k - sum_i x_i e_i)``, ``i < k``, for Gram matrix ``G``."""
    sub = G[:k, :k]
    rhs = G[:k, k]
    x0 = np.linalg.solve(sub, rhs)
    base = np.round(x0).astype(int)
    best, best_val = np.zeros(k, dtype=int), G[k, k]
    for off in itertools.product(range(-2, 3), repeat=k):
        x = base + np.array(off)
        val = G[k, k] - 2 * x @ rhs + x @ sub @ x
        if val < best_val * (1 - _REL_EPS):
            best, best_val = x, val
    return best


def _greedy(G: np.ndarray, U: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    g = len(G)
    k = 1
    guard = 0
    while k < g:
        guard += 1
        if guard > 10_000:
            raise BudgetExceededError("greedy Minkowski reduction did not settle")
        x = _closest_combination(G, k)
        if np.any(x):
            T = np.eye(g, dtype=int)
            T[k, :k] = -x
            U = T @ U
            G = T @ G @ T.T
        if G[k, k] < G[k - 1, k - 1] * (1 - _REL_EPS):
            P = np.eye(g, dtype=int)
            P[[k - 1, k]] = P[[k, k - 1]]
            U = P @ U
            G = P @ G @ P.T
            k = max(k - 1, 1)
        else:
            k += 1
    return G, U


def _fix_signs(G: np.ndarray, U: np.ndarray):
    g = len(G)
    for k in range(g - 1):
        if G[k, k + 1] < 0:
            T = np.eye(g, dtype=int)
            T[k + 1, k + 1] = -1
            U = T @ U
            G = T @ G @ T.T
    return G, U


def _worst_violation(G: np.ndarray):
    worst = None
    for k, v in minkowski_conditions(len(G)):
        v = np.array(v)
        slack = (v @ G @ v - G[k, k]) / G[k, k]
        if slack < -1e-10 and (worst is None or slack < worst[0]):
            worst = (slack, k, v)
    return worst


def minkowski_reduce(Y) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(U, U Y U^t)`` with ``U`` unimodular and the result Minkowski reduced.

    ``U`` is the identity whenever ``Y`` already satisfies the conditions.
    """
    Y = np.array(Y, dtype=float)
    g = len(Y)
    if g > 3:
        raise UnsupportedGenusError(f"Minkowski reduction is implemented for g <= 3, got {g}")
    U = np.eye(g, dtype=int)
    if g == 1 or _is_reduced(Y):
        return U, Y
    G = Y.copy()
    for _ in range(100):
        G, U = _greedy(G, U)
        G, U = _fix_signs(G, U)
        bad = _worst_violation(G)
        if bad is None:
            return U, G
        _, k, v = bad
        m = max(i for i in range(g) if v[i])
        T = np.eye(g, dtype=int)
        T[m] = v * v[m]
        U = T @ U
        G = T @ G @ T.T
    raise BudgetExceededError("Minkowski repair loop did not converge")


def _is_reduced(Y: np.ndarray) -> bool:
    g = len(Y)
    if any(Y[k, k + 1] < 0 for k in range(g - 1)):
        return False
    return _worst_violation(Y) is None


@dataclass(frozen=True)
class ReductionResult:
    gamma: SymplecticMatrix
    reduced_point: SiegelPoint
    steps: int
    height_in: float
    height_gamma: int
    heuristic: bool = False


def _translate_step(Z: SiegelPoint):
    X = Z.Xf
    S = -np.round(X).astype(int)
    S[np.abs(X) <= 0.5 + MEMBERSHIP_TOL] = 0
    S = np.triu(S) + np.triu(S, 1).T
    return S


def siegel_reduce(Z: SiegelPoint, step_budget: int = STEP_BUDGET) -> ReductionResult:
    """Find ``gamma`` in Sp(2g, Z) with ``gamma . Z`` in the fundamental domain.

    A point already in the (closed) domain is returned with ``gamma = I``.
    ``gamma`` is normalised up to the sign ``-I``, which acts trivially.
    """
    g = Z.g
    if g > 3:
        raise UnsupportedGenusError(f"reduction is implemented for g <= 3, got {g}")
    conds = det_conditions(g)
    gamma = identity(g)
    W = Z
    steps = 0
    detY = W.det_Y()
    while True:
        if steps > step_budget:
            raise BudgetExceededError(
                f"reduction exceeded {step_budget} steps",
                {"steps": steps, "point": W.Zc.tolist(), "height_gamma": height(gamma)},
            )
        U, _ = minkowski_reduce(W.Yf)
        if not np.array_equal(U, np.eye(g, dtype=int)):
            M = gl_embedding(U)
            W, gamma, steps = act(M, W), M @ gamma, steps + 1
        S = _translate_step(W)
        if np.any(S):
            M = translation(S)
            W, gamma, steps = act(M, W), M @ gamma, steps + 1
        dets = np.abs(np.linalg.det(np.einsum("cij,jk->cik", conds.C, W.Zc) + conds.D))
        i = int(np.argmin(dets))
        if dets[i] >= 1 - 1e-12:
            break
        M = conds.matrices[i]
        W, gamma, steps = act(M, W), M @ gamma, steps + 1
        new_detY = W.det_Y()
        if new_detY <= detY:
            raise BudgetExceededError(
                "det(Y) failed to increase on a determinant step",
                {"steps": steps, "before": float(detY), "after": float(new_detY)},
            )
        detY = new_detY
    gamma = canonical_sign(gamma)
    return ReductionResult(
        gamma=gamma,
        reduced_point=W,
        steps=steps,
        height_in=norm_h(Z),
        height_gamma=height(gamma),
        heuristic=g >= 3,
    )


def reduction_height_survey(samples) -> BoundFit:
    """Least-squares fit of ``log H(gamma_Z)`` against ``log h(Z)`` over ``samples``."""
    samples = list(samples)
    if len(samples) < 2:
        raise DegenerateFitError("reduction survey needs at least two samples")
    hz, hg = [], []
    for Z in samples:
        res = siegel_reduce(Z)
        hz.append(res.height_in)
        hg.append(float(res.height_gamma))
    return fit_loglog(hz, hg)


def is_reduced_point(Z: SiegelPoint) -> bool:
    return in_fundamental_domain(Z).in_domain


__all__ = [
    "minkowski_reduce", "siegel_reduce", "reduction_height_survey", "ReductionResult",
    "is_reduced_point",
]

