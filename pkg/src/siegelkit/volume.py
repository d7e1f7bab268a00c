"""Invariant metric on H_g and areas of holomorphic curves.

A curve is given by a polynomial chart ``t -> Z(t)`` over a rectangle in the
``t``-plane. Its induced area density with respect to ``dx dy`` (``t = x + iy``)
is ``Tr(Y^{-1} Z'(t) Y^{-1} conj(Z'(t)))``.

Three integrators are provided:

``monte_carlo``
    stratified, seeded Monte Carlo in the ``t``-plane. When ``Im t`` is
    bounded away from 0 the imaginary coordinate is sampled as ``u = 1/y``
    (``dy = du / u^2``), which flattens ``1/y^2`` densities and turns an
    unbounded upper edge into a finite interval.
``adaptive_grid``
    tensor Gauss-Legendre cells, refined where a 2x2 and a 4x4 rule disagree.
``pushforward`` (g = 1 only)
    stratified Monte Carlo over the target half-plane in coordinates
    ``(x, 1/y)``, where the hyperbolic measure is ``dx du``; the integrand is the
    number of chart preimages inside the chart domain (polynomial roots).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DegenerateFitError, DomainPreconditionError, MalformedInputError
from .fits import BoundFit, fit_loglog
from .geometry import SQRT3_2, SiegelPoint, in_domain_batch, in_fundamental_domain

METHODS = ("monte_carlo", "adaptive_grid", "pushforward")


# ---------------------------------------------------------------------------
# metric

def _as_complex_point(Z) -> np.ndarray:
    if isinstance(Z, SiegelPoint):
        return Z.Zc
    return np.atleast_2d(np.asarray(Z, dtype=complex))


def _check_tangent(dZ, g: int) -> np.ndarray:
    dZ = np.atleast_2d(np.asarray(dZ, dtype=complex))
    if dZ.shape != (g, g):
        raise MalformedInputError(f"tangent must be {g}x{g}, got {dZ.shape}")
    if np.max(np.abs(dZ - dZ.T)) > 1e-12 * max(1.0, np.max(np.abs(dZ))):
        raise MalformedInputError("tangent matrix dZ must be symmetric")
    return dZ


def metric_at(Z, dZ) -> float:
    """``Tr(Y^{-1} dZ Y^{-1} conj(dZ))`` at ``Z``."""
    Zc = _as_complex_point(Z)
    dZ = _check_tangent(dZ, Zc.shape[0])
    Yinv = np.linalg.inv(Zc.imag)
    return float(np.real(np.trace(Yinv @ dZ @ Yinv @ dZ.conj())))


def comparison_bound_check(Z: SiegelPoint, dZ) -> tuple[float, float]:
    """``(metric_at(Z, dZ), sum_ij |dz_ij|^2 / (y_ii y_jj))`` for ``Z`` in the domain."""
    if not in_fundamental_domain(Z).in_domain:
        raise DomainPreconditionError("comparison bound requires a point of the fundamental domain")
    dZ = _check_tangent(dZ, Z.g)
    d = np.diag(Z.Yf)
    rhs = float(np.sum(np.abs(dZ) ** 2 / np.outer(d, d)))
    return metric_at(Z, dZ), rhs


def comparison_ratio_batch(Zc: np.ndarray, dZ: np.ndarray) -> np.ndarray:
    """Vectorised ``lhs / rhs`` for batches ``(N, g, g)``."""
    Y = Zc.imag
    Yinv = np.linalg.inv(Y)
    lhs = np.real(np.einsum("nij,njk,nkl,nli->n", Yinv, dZ, Yinv, dZ.conj()))
    d = np.diagonal(Y, axis1=1, axis2=2)
    rhs = np.sum(np.abs(dZ) ** 2 / (d[:, :, None] * d[:, None, :]), axis=(1, 2))
    return lhs / rhs


def action_differential(M, Z: SiegelPoint, dZ) -> np.ndarray:
    """Exact pushforward ``(CZ + D)^{-t} dZ (CZ + D)^{-1}`` of a tangent vector."""
    Zc = Z.Zc
    Q = np.asarray(M.C, dtype=float) @ Zc + np.asarray(M.D, dtype=float)
    Qi = np.linalg.inv(Q)
    return Qi.T @ np.asarray(dZ, dtype=complex) @ Qi


# ---------------------------------------------------------------------------
# charts

@dataclass(frozen=True)
class ChartDomain:
    re: tuple[float, float]
    im: tuple[float, float]

    def __post_init__(self):
        (a, b), (c, d) = self.re, self.im
        if not (a < b and c < d) or math.isinf(a) or math.isinf(b) or math.isinf(c):
            raise MalformedInputError(f"bad chart domain {self.re} x {self.im}")

    def contains(self, t: np.ndarray) -> np.ndarray:
        return ((t.real >= self.re[0]) & (t.real <= self.re[1])
                & (t.imag >= self.im[0]) & (t.imag <= self.im[1]))


class CurveChart:
    """Symmetric matrix of polynomials in ``t`` (ascending coefficients)."""

    def __init__(self, coeffs, domain: ChartDomain):
        c = np.asarray(coeffs, dtype=complex)
        if c.ndim != 3 or c.shape[0] != c.shape[1] or c.shape[2] < 1:
            raise MalformedInputError("coefficients must have shape (g, g, n)")
        if np.any(c != np.swapaxes(c, 0, 1)):
            raise MalformedInputError("chart entries must be symmetric")
        nz = np.nonzero(np.any(c != 0, axis=(0, 1)))[0]
        n = int(nz[-1]) + 1 if len(nz) else 1
        self.coeffs = c[:, :, :n].copy()
        self.coeffs.flags.writeable = False
        self.domain = domain

    @property
    def g(self) -> int:
        return self.coeffs.shape[0]

    @property
    def degree(self) -> int:
        return self.coeffs.shape[2] - 1

    @property
    def is_affine(self) -> bool:
        return self.degree <= 1

    @property
    def is_constant(self) -> bool:
        return self.degree == 0

    def evaluate(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=complex))
        powers = t[:, None] ** np.arange(self.degree + 1)[None, :]
        return np.einsum("ijk,nk->nij", self.coeffs, powers)

    def derivative(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=complex))
        if self.degree == 0:
            return np.zeros((len(t), self.g, self.g), dtype=complex)
        k = np.arange(1, self.degree + 1)
        powers = t[:, None] ** (k - 1)[None, :]
        return np.einsum("ijk,nk->nij", self.coeffs[:, :, 1:] * k, powers)

    def radius_bound(self, M: float) -> float:
        """``|t|`` bound on ``{t : |z_ij(t)| <= M for all ij}`` (Fujiwara's root bound)."""
        best = math.inf
        for i in range(self.g):
            for j in range(i, self.g):
                p = self.coeffs[i, j]
                nz = np.nonzero(p)[0]
                if len(nz) == 0 or nz[-1] == 0:
                    continue
                k = nz[-1]
                a = np.abs(p[: k + 1]) / abs(p[k])
                a0 = (abs(p[0]) + M) / abs(p[k])
                terms = [a[k - m] ** (1.0 / m) for m in range(1, k)]
                terms.append((a0 / 2) ** (1.0 / k))
                best = min(best, 2 * max(terms))
        return best

    def to_dict(self) -> dict:
        return {
            "g": self.g,
            "entries": [[[[repr(float(c.real)), repr(float(c.imag))] for c in self.coeffs[i, j]]
                         for j in range(self.g)] for i in range(self.g)],
            "domain": {"re": list(self.domain.re),
                       "im": [self.domain.im[0],
                              "inf" if math.isinf(self.domain.im[1]) else self.domain.im[1]]},
        }


def identity_chart(domain: ChartDomain | None = None) -> CurveChart:
    domain = domain or ChartDomain((-0.5, 0.5), (0.5, math.inf))
    return CurveChart([[[0, 1]]], domain)


def power_chart(k: int, domain: ChartDomain | None = None) -> CurveChart:
    domain = domain or ChartDomain((-2.0, 2.0), (-2.0, 2.0))
    c = np.zeros((1, 1, k + 1), dtype=complex)
    c[0, 0, k] = 1
    return CurveChart(c, domain)


def constant_chart(Z, domain: ChartDomain | None = None) -> CurveChart:
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    domain = domain or ChartDomain((-1.0, 1.0), (-1.0, 1.0))
    return CurveChart(Z[:, :, None], domain)


# ---------------------------------------------------------------------------
# densities

def area_density(chart: CurveChart, t) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(density, inside)``; ``inside`` marks ``Z(t)`` in H_g, density is 0 elsewhere."""
    t = np.atleast_1d(np.asarray(t, dtype=complex))
    Z = chart.evaluate(t)
    dens = np.zeros(len(t))
    if chart.g == 1:
        y = Z[:, 0, 0].imag
        inside = y > 0
        if chart.degree > 0:
            dZ = chart.derivative(t[inside])[:, 0, 0]
            dens[inside] = np.abs(dZ) ** 2 / y[inside] ** 2
        return dens, inside
    Y = Z.imag
    inside = np.linalg.eigvalsh(Y)[:, 0] > 0
    if chart.degree > 0 and np.any(inside):
        Yi = np.linalg.inv(Y[inside])
        dZ = chart.derivative(t[inside])
        dens[inside] = np.real(np.einsum("nij,njk,nkl,nli->n", Yi, dZ, Yi, dZ.conj()))
    return dens, inside


def curve_area_element(chart: CurveChart, t: complex) -> float:
    dens, inside = area_density(chart, [t])
    if not inside[0]:
        raise DomainPreconditionError(f"Z({t}) is not in the Siegel upper half-space")
    return float(dens[0])


def norm_h_batch(Zc: np.ndarray) -> np.ndarray:
    entries = np.max(np.abs(Zc).reshape(len(Zc), -1), axis=1)
    detY = np.linalg.det(Zc.imag)
    with np.errstate(divide="ignore"):
        inv_det = np.where(detY > 0, 1.0 / detY, np.inf)
    return np.maximum(1.0, np.maximum(entries, inv_det))


# ---------------------------------------------------------------------------
# integration

@dataclass(frozen=True)
class SamplingConfig:
    seed: int = 0
    strata: int = 64
    per_stratum: int = 4
    target_rel_se: float = 1e-3
    max_samples: int = 4_000_000
    method: str = "monte_carlo"
    truncate_y: float = 1e6
    max_cells: int = 200_000

    def __post_init__(self):
        if self.method not in METHODS:
            raise MalformedInputError(f"unknown integration method {self.method!r}")
        if self.per_stratum < 2:
            raise MalformedInputError("per_stratum must be at least 2 for an error estimate")


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    standard_error: float
    samples_or_cells: int
    method: str
    converged: bool = True
    tail_bound: float = 0.0
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _stratified(f, xr, wr, budget: SamplingConfig, rng):
    """Stratified MC of ``f(x, w)`` over the rectangle ``xr x wr``."""
    n = budget.strata
    m = budget.per_stratum
    while True:
        hx = (xr[1] - xr[0]) / n
        hw = (wr[1] - wr[0]) / n
        ix, iw = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        ix = np.repeat(ix.ravel(), m)
        iw = np.repeat(iw.ravel(), m)
        x = xr[0] + (ix + rng.random(len(ix))) * hx
        w = wr[0] + (iw + rng.random(len(iw))) * hw
        vals = f(x, w).reshape(n * n, m)
        area = hx * hw
        means = vals.mean(axis=1)
        var = vals.var(axis=1, ddof=1)
        value = float(area * means.sum())
        se = float(area * math.sqrt(var.sum() / m))
        total = n * n * m
        ok = se <= budget.target_rel_se * abs(value) or (value == 0 and se == 0)
        if ok or 4 * total > budget.max_samples:
            return value, se, total, ok
        n *= 2


_GL2 = np.polynomial.legendre.leggauss(2)
_GL4 = np.polynomial.legendre.leggauss(4)


def _cell_rule(f, x0, x1, w0, w1, rule):
    nodes, weights = rule
    cx, rx = (x0 + x1) / 2, (x1 - x0) / 2
    cw, rw = (w0 + w1) / 2, (w1 - w0) / 2
    X = cx[:, None, None] + rx[:, None, None] * nodes[None, :, None]
    W = cw[:, None, None] + rw[:, None, None] * nodes[None, None, :]
    X, W = np.broadcast_arrays(X, W)
    vals = f(X.ravel(), W.ravel()).reshape(X.shape)
    return rx * rw * np.einsum("nij,i,j->n", vals, weights, weights)


def _adaptive(f, xr, wr, budget: SamplingConfig):
    n = 16
    e = np.linspace(xr[0], xr[1], n + 1)
    h = np.linspace(wr[0], wr[1], n + 1)
    x0, w0 = np.meshgrid(e[:-1], h[:-1], indexing="ij")
    x1, w1 = np.meshgrid(e[1:], h[1:], indexing="ij")
    cells = [a.ravel() for a in (x0, x1, w0, w1)]
    while True:
        q4 = _cell_rule(f, *cells, _GL4)
        q2 = _cell_rule(f, *cells, _GL2)
        err = np.abs(q4 - q2)
        value, total_err = float(q4.sum()), float(err.sum())
        ncell = len(cells[0])
        if total_err <= budget.target_rel_se * abs(value) or (value == 0 and total_err == 0):
            return value, total_err, ncell, True
        if 4 * ncell > budget.max_cells:
            return value, total_err, ncell, False
        order = np.argsort(err)[::-1]
        k = max(1, len(order) // 4)
        split = np.zeros(ncell, dtype=bool)
        split[order[:k]] = True
        keep = [c[~split] for c in cells]
        sx0, sx1, sw0, sw1 = (c[split] for c in cells)
        mx, mw = (sx0 + sx1) / 2, (sw0 + sw1) / 2
        new = [
            np.concatenate([sx0, mx, sx0, mx]),
            np.concatenate([mx, sx1, mx, sx1]),
            np.concatenate([sw0, sw0, mw, mw]),
            np.concatenate([mw, mw, sw1, sw1]),
        ]
        cells = [np.concatenate([k_, n_]) for k_, n_ in zip(keep, new)]


def _plane_integrand(chart: CurveChart, indicator, reciprocal: bool):
    def f(x, w):
        if reciprocal:
            with np.errstate(divide="ignore"):
                y = np.where(w > 0, 1.0 / w, np.inf)
            jac = np.where(w > 0, y * y, 0.0)
        else:
            y, jac = w, 1.0
        out = np.zeros(len(x))
        finite = np.isfinite(y)
        t = x[finite] + 1j * y[finite]
        dens, inside = area_density(chart, t)
        keep = np.zeros(len(t), dtype=bool)
        if np.any(inside):
            keep[inside] = indicator(chart.evaluate(t[inside]))
        out[finite] = np.where(keep, dens, 0.0)
        return out * jac
    return f


def _plane_integral(chart: CurveChart, indicator, budget: SamplingConfig,
                    re=None, im=None, rng=None) -> VolumeEstimate:
    dom = chart.domain
    re = re or dom.re
    im = im or dom.im
    if chart.is_constant:
        return VolumeEstimate(0.0, 0.0, 0, budget.method)
    rng = rng or np.random.default_rng(budget.seed)
    notes = {}
    tail = 0.0
    reciprocal = im[0] > 0
    if math.isinf(im[1]):
        if im[0] <= 0:
            raise MalformedInputError("an unbounded chart domain needs Im t bounded below by a positive number")
        lo = 0.0 if chart.is_affine else 1.0 / budget.truncate_y
        if lo > 0:
            notes["truncated_at_y"] = budget.truncate_y
        wr = (lo, 1.0 / im[0])
    elif reciprocal:
        wr = (1.0 / im[1], 1.0 / im[0])
    else:
        wr = im
    f = _plane_integrand(chart, indicator, reciprocal)
    if budget.method == "adaptive_grid":
        value, se, count, ok = _adaptive(f, re, wr, budget)
    else:
        value, se, count, ok = _stratified(f, re, wr, budget, rng)
    if notes.get("truncated_at_y"):
        # density decays like c / y^2 in the tail; estimate c on the top sliver
        ys = budget.truncate_y
        xs = np.linspace(re[0], re[1], 257)
        d, inside = area_density(chart, xs + 1j * ys)
        tail = float(np.max(d * ys * ys, initial=0.0) * (re[1] - re[0]) / ys)
    if not ok:
        warnings.warn("sampling budget exhausted before reaching the target standard error",
                      RuntimeWarning, stacklevel=3)
    return VolumeEstimate(value, se, count, budget.method, ok, tail, notes)


def _preimage_counts(chart: CurveChart, z: np.ndarray) -> np.ndarray:
    p = chart.coeffs[0, 0]
    k = chart.degree
    out = np.zeros(len(z), dtype=float)
    if k == 0 or len(z) == 0:
        return out
    if k == 1:
        t = (z - p[0]) / p[1]
        return chart.domain.contains(t).astype(float)
    comp = np.zeros((len(z), k, k), dtype=complex)
    comp[:, 1:, :-1] = np.eye(k - 1)
    lead = p[k]
    comp[:, :, -1] = -p[:k][None, :] / lead
    comp[:, 0, -1] = -(p[0] - z) / lead
    roots = np.linalg.eigvals(comp)
    return chart.domain.contains(roots).sum(axis=1).astype(float)


def _pushforward_integral(chart: CurveChart, region: str, budget: SamplingConfig,
                          M: float | None = None, rng=None) -> VolumeEstimate:
    if chart.g != 1:
        raise MalformedInputError("the pushforward integrator is only available for g = 1")
    if chart.is_constant:
        return VolumeEstimate(0.0, 0.0, 0, "pushforward")
    rng = rng or np.random.default_rng(budget.seed)
    if region == "domain":
        xr, wr = (-0.5, 0.5), (0.0, 1.0 / SQRT3_2)
    else:
        xr, wr = (-M, M), (1.0 / M, M)

    def f(x, u):
        with np.errstate(divide="ignore"):
            z = x + 1j / u
        if region == "domain":
            mask = in_domain_batch(z.reshape(-1, 1, 1))
        else:
            mask = norm_h_batch(z.reshape(-1, 1, 1)) <= M
        out = np.zeros(len(x))
        out[mask] = _preimage_counts(chart, z[mask])
        return out

    value, se, count, ok = _stratified(f, xr, wr, budget, rng)
    if not ok:
        warnings.warn("sampling budget exhausted before reaching the target standard error",
                      RuntimeWarning, stacklevel=3)
    return VolumeEstimate(value, se, count, "pushforward", ok)


def curve_volume_in_domain(chart: CurveChart, budget: SamplingConfig | None = None) -> VolumeEstimate:
    """Area of ``{t in chart domain : Z(t) in the fundamental domain}`` for the induced metric."""
    budget = budget or SamplingConfig()
    if budget.method == "pushforward":
        return _pushforward_integral(chart, "domain", budget)
    return _plane_integral(chart, lambda Zc: in_domain_batch(Zc), budget)


def boundary_volume(chart: CurveChart, M: float, budget: SamplingConfig | None = None,
                    rng=None) -> VolumeEstimate:
    """Area of ``{t : h(Z(t)) <= M}`` with no fundamental-domain restriction."""
    budget = budget or SamplingConfig()
    if budget.method == "pushforward":
        return _pushforward_integral(chart, "height", budget, M=M, rng=rng)
    R = chart.radius_bound(M)
    re = (max(chart.domain.re[0], -R), min(chart.domain.re[1], R))
    im = (max(chart.domain.im[0], -R), min(chart.domain.im[1], R))
    if re[0] >= re[1] or im[0] >= im[1]:
        return VolumeEstimate(0.0, 0.0, 0, budget.method)
    return _plane_integral(chart, lambda Zc: norm_h_batch(Zc) <= M, budget, re, im, rng=rng)


def boundary_volume_rows(chart: CurveChart, M_values, budget: SamplingConfig | None = None):
    budget = budget or SamplingConfig()
    M_values = [float(m) for m in M_values]
    if len(M_values) < 3:
        raise DegenerateFitError("boundary profile needs at least 3 values of M")
    if any(b <= a for a, b in zip(M_values, M_values[1:])) or M_values[0] <= 1:
        raise MalformedInputError("M values must be increasing and > 1")
    rng = np.random.default_rng(budget.seed)
    return [(M, boundary_volume(chart, M, budget, rng=rng)) for M in M_values]


def boundary_volume_profile(chart: CurveChart, M_values, budget: SamplingConfig | None = None) -> BoundFit:
    """Fit ``log vol(C_M)`` against ``log M``; flagged degenerate when all volumes vanish."""
    rows = boundary_volume_rows(chart, M_values, budget)
    vols = [est.value for _, est in rows]
    if all(v == 0 for v in vols):
        return BoundFit.degenerate_fit(len(rows))
    return fit_loglog([M for M, _ in rows], vols)
