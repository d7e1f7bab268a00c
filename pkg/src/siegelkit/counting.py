"""Height-bounded enumeration of Sp(2g, Z) and predicate-filtered counts.

Rows ``r_1, ..., r_2g`` of ``M`` satisfy ``r_i J r_j^t = J_ij``. For g = 2 the
enumerator fixes ``r_1`` and then picks ``r_2`` (orthogonal to ``r_1``),
``r_3`` (pairing 1 with ``r_1``, 0 with ``r_2``) and ``r_4`` from precomputed
pairing tables, so no candidate is built that fails an earlier relation.
Output is in lexicographic order of the flattened entries.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BudgetExceededError,
    DegenerateFitError,
    MalformedInputError,
    UnknownPredicateError,
)
from .fits import BoundFit, fit_loglog
from .geometry import act_batch, in_domain_batch
from .symplectic import SymplecticMatrix, standard_form
from .volume import CurveChart, identity_chart

DEFAULT_BUDGET = {1: 200, 2: 6}


def _check_query(g: int, T: int, budget: dict | None):
    if g not in (1, 2):
        raise MalformedInputError(f"enumeration is implemented for g in {{1, 2}}, got {g}")
    if int(T) != T or T < 1:
        raise MalformedInputError(f"height bound must be an integer >= 1, got {T}")
    limit = (budget or DEFAULT_BUDGET).get(g, DEFAULT_BUDGET[g])
    if T > limit:
        raise BudgetExceededError(
            f"T = {T} exceeds the enumeration budget {limit} for g = {g}",
            {"g": g, "T": T, "limit": limit, "predicted_nodes": predicted_nodes(g, T)},
        )


def predicted_nodes(g: int, T: int) -> int:
    """Rough number of candidate tuples the enumerator will touch."""
    n = 2 * T + 1
    if g == 1:
        return n * n
    # r_1 over the box, r_2 and r_3 over a hyperplane section each
    return n**4 * (n**3) * 2


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a - (a // b) * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def _k_range(base: int, step: int, T: int):
    """Integers ``k`` with ``|base + k * step| <= T`` (all of Z when step = 0 and |base| <= T)."""
    if step == 0:
        return (-math.inf, math.inf) if abs(base) <= T else (1, 0)
    lo, hi = (-T - base) / step, (T - base) / step
    if step < 0:
        lo, hi = hi, lo
    return math.ceil(lo), math.floor(hi)


def _enumerate_g1(T: int) -> np.ndarray:
    out = []
    for a in range(-T, T + 1):
        for b in range(-T, T + 1):
            d_, x, y = _egcd(abs(a), abs(b))
            if d_ != 1:
                continue
            # a*d0 - b*c0 = 1
            d0 = x * (1 if a >= 0 else -1)
            c0 = -y * (1 if b >= 0 else -1)
            lo1, hi1 = _k_range(c0, a, T)
            lo2, hi2 = _k_range(d0, b, T)
            lo, hi = max(lo1, lo2), min(hi1, hi2)
            for k in range(int(lo), int(hi) + 1):
                out.append((a, b, c0 + k * a, d0 + k * b))
    arr = np.array(sorted(out), dtype=np.int64).reshape(-1, 2, 2)
    return arr


def _box(T: int, dim: int) -> np.ndarray:
    r = np.arange(-T, T + 1)
    return np.array(list(itertools.product(r, repeat=dim)), dtype=np.int64)


def _enumerate_g2_row(r1: np.ndarray, V: np.ndarray, VJ: np.ndarray) -> np.ndarray:
    w1 = VJ @ r1  # w1[k] = V[k] J r1^t = omega(V[k], r1)
    Z1 = V[w1 == 0]  # candidates for r2 and r4: omega(r1, .) = 0
    S1 = V[w1 == -1]  # candidates for r3: omega(r1, r3) = 1
    if len(Z1) == 0 or len(S1) == 0:
        return np.empty((0, 4, 4), dtype=np.int64)
    Jm = np.asarray(standard_form(2, exact=False), dtype=np.int64)
    ZJ = Z1 @ Jm
    om_zs = ZJ @ S1.T  # omega(r2, r3)
    om_zz = ZJ @ Z1.T  # omega(r2, r4)
    om_sz = (S1 @ Jm) @ Z1.T  # omega(r3, r4)
    i2, j3 = np.nonzero(om_zs == 0)
    i2b, k4 = np.nonzero(om_zz == 1)
    if len(i2) == 0 or len(i2b) == 0:
        return np.empty((0, 4, 4), dtype=np.int64)
    # join the two pair lists on the r2 index (both are sorted by it)
    n_z = len(Z1)
    cnt_b = np.bincount(i2b, minlength=n_z)
    start_b = np.concatenate([[0], np.cumsum(cnt_b)[:-1]])
    reps = cnt_b[i2]
    ii = np.repeat(i2, reps)
    jj = np.repeat(j3, reps)
    offs = np.arange(len(ii)) - np.repeat(np.cumsum(reps) - reps, reps)
    kk = k4[np.repeat(start_b[i2], reps) + offs]
    keep = om_sz[jj, kk] == 0
    ii, jj, kk = ii[keep], jj[keep], kk[keep]
    order = np.lexsort((kk, jj, ii))
    ii, jj, kk = ii[order], jj[order], kk[order]
    out = np.empty((len(ii), 4, 4), dtype=np.int64)
    out[:, 0] = r1
    out[:, 1] = Z1[ii]
    out[:, 2] = S1[jj]
    out[:, 3] = Z1[kk]
    return out


def _iter_g2(T: int, partition: tuple[int, int] | None):
    V = _box(T, 4)
    Jm = np.asarray(standard_form(2, exact=False), dtype=np.int64)
    VJ = V @ Jm
    idx, parts = partition or (0, 1)
    for n, r1 in enumerate(V):
        if n % parts != idx or not np.any(r1):
            continue
        block = _enumerate_g2_row(r1, V, VJ)
        if len(block):
            yield block


def enumerate_array(g: int, T: int, partition: tuple[int, int] | None = None,
                    budget: dict | None = None) -> np.ndarray:
    """All ``M`` in Sp(2g, Z) with ``max |m_ij| <= T`` as an ``(N, 2g, 2g)`` int64 array.

    ``partition = (i, n)`` keeps only matrices whose first row has index
    ``i mod n`` in the lexicographic list of first rows; partitions are
    disjoint and their union is the full set.
    """
    _check_query(g, T, budget)
    if g == 1:
        arr = _enumerate_g1(T)
        if partition:
            i, n = partition
            pos = (arr[:, 0, 0] + T) * (2 * T + 1) + (arr[:, 0, 1] + T)
            arr = arr[pos % n == i]
        return arr
    blocks = list(_iter_g2(T, partition))
    if not blocks:
        return np.empty((0, 4, 4), dtype=np.int64)
    return np.concatenate(blocks)


def enumerate_symplectic(g: int, T: int, partition: tuple[int, int] | None = None,
                         budget: dict | None = None):
    """Stream every ``M`` in Sp(2g, Z) with height ``<= T`` exactly once, in lexicographic order.

    Bad arguments and budget overruns raise here, before any work is done.
    """
    _check_query(g, T, budget)
    if g == 1:
        blocks = iter([enumerate_array(1, T, partition, budget)])
    else:
        blocks = _iter_g2(T, partition)
    return (SymplecticMatrix(m.astype(object), check=False) for block in blocks for m in block)


# ---------------------------------------------------------------------------
# predicates

def chart_samples(chart: CurveChart, n: int = 4096) -> np.ndarray:
    """Deterministic sample ``Z(t)`` for ``t`` on a shifted grid, keeping points of H_g.

    When ``Im t`` is bounded away from 0 the grid is uniform in ``(Re t, 1/Im t)``.
    """
    side = max(2, int(round(math.sqrt(n))))
    # irrational offsets keep the grid off lattice-symmetric positions
    fx = (np.arange(side) + 0.5 + 0.1 * (math.sqrt(2) - 1)) / side
    fy = (np.arange(side) + 0.5 + 0.1 * (math.sqrt(3) - 1)) / side
    dom = chart.domain
    x = dom.re[0] + fx * (dom.re[1] - dom.re[0])
    if dom.im[0] > 0:
        u_hi = 1.0 / dom.im[0]
        u_lo = 0.0 if math.isinf(dom.im[1]) else 1.0 / dom.im[1]
        u = u_lo + fy * (u_hi - u_lo)
        y = 1.0 / u
    else:
        y = dom.im[0] + fy * (dom.im[1] - dom.im[0])
    X, Y = np.meshgrid(x, y, indexing="ij")
    Zc = chart.evaluate((X + 1j * Y).ravel())
    ok = np.linalg.eigvalsh(Zc.imag)[:, 0] > 0
    return Zc[ok]


@dataclass(frozen=True)
class PredicateSpec:
    name: str = "all"
    chart: CurveChart | None = None
    samples: int = 4096

    def to_dict(self) -> dict:
        d = {"name": self.name, "samples": self.samples}
        if self.chart is not None:
            d["chart"] = self.chart.to_dict()
        return d


def _pred_all(mats: np.ndarray, spec: PredicateSpec) -> np.ndarray:
    return np.ones(len(mats), dtype=bool)


def _pred_translate_direct(mats: np.ndarray, spec: PredicateSpec) -> np.ndarray:
    """``M`` passes when some sampled chart point is sent into the fundamental domain."""
    g = mats.shape[1] // 2
    chart = spec.chart or identity_chart()
    if chart.g != g:
        raise MalformedInputError(f"chart genus {chart.g} does not match g = {g}")
    Zc = chart_samples(chart, spec.samples)
    out = np.zeros(len(mats), dtype=bool)
    for n, m in enumerate(mats):
        M = SymplecticMatrix(m.astype(float), check=False)
        W = act_batch(M, Zc)
        out[n] = bool(np.any(in_domain_batch(W)))
    return out


def reduce_g1_batch(z: np.ndarray, max_iter: int = 10_000) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised reduction in the upper half-plane.

    Returns integer matrices ``gamma`` of shape ``(N, 2, 2)`` (first nonzero
    entry positive) and the reduced points ``gamma . z``.
    """
    z = np.asarray(z, dtype=complex).copy()
    N = len(z)
    G = np.zeros((N, 2, 2), dtype=np.int64)
    G[:, 0, 0] = G[:, 1, 1] = 1
    active = np.ones(N, dtype=bool)
    for _ in range(max_iter):
        n = np.where(active, np.round(z.real), 0).astype(np.int64)
        n[np.abs(z.real) <= 0.5] = 0
        z = z - n
        G[:, 0, :] -= n[:, None] * G[:, 1, :]
        inv = active & (np.abs(z) < 1)
        if not np.any(inv):
            break
        z[inv] = -1 / z[inv]
        a = G[inv, 0, :].copy()
        G[inv, 0, :] = -G[inv, 1, :]
        G[inv, 1, :] = a
        active = inv
    else:
        raise BudgetExceededError("batch reduction did not settle", {"max_iter": max_iter})
    flat = G.reshape(N, 4)
    first = flat[np.arange(N), np.argmax(flat != 0, axis=1)]
    G[first < 0] *= -1
    return G, z


def translate_gammas_g1(spec: PredicateSpec) -> set[tuple[int, ...]]:
    """Canonical ``gamma`` (up to sign) sending some chart sample into S_1."""
    chart = spec.chart or identity_chart()
    z = chart_samples(chart, spec.samples)[:, 0, 0]
    G, _ = reduce_g1_batch(z)
    return {tuple(int(v) for v in row) for row in np.unique(G.reshape(-1, 4), axis=0)}


def _pred_translate(mats: np.ndarray, spec: PredicateSpec) -> np.ndarray:
    if mats.shape[1] != 2:
        return _pred_translate_direct(mats, spec)
    keys = translate_gammas_g1(spec)
    flat = mats.reshape(len(mats), 4)
    return np.array([tuple(int(v) for v in r) in keys or tuple(-int(v) for v in r) in keys
                     for r in flat], dtype=bool)


PREDICATES = {
    "all": _pred_all,
    "translate-meets-domain": _pred_translate,
    "translate-meets-domain-direct": _pred_translate_direct,
}


def get_predicate(name: str):
    try:
        return PREDICATES[name]
    except KeyError:
        raise UnknownPredicateError(f"unknown predicate {name!r}; registered: {sorted(PREDICATES)}") from None


# ---------------------------------------------------------------------------
# queries

@dataclass(frozen=True)
class CountQuery:
    g: int
    T: int
    predicate: PredicateSpec = field(default_factory=PredicateSpec)

    def __post_init__(self):
        if int(self.T) != self.T or self.T < 1:
            raise MalformedInputError(f"height bound must be an integer >= 1, got {self.T}")


@dataclass(frozen=True)
class CountSeries:
    rows: list
    fit: BoundFit | None = None
    predicate: str = "all"
    g: int = 1

    def to_dict(self) -> dict:
        return {
            "g": self.g,
            "predicate": self.predicate,
            "rows": [{"T": T, "count": c} for T, c in self.rows],
            "fit": self.fit.to_dict() if self.fit else None,
        }


def count_filtered(query: CountQuery, budget: dict | None = None) -> CountSeries:
    pred = get_predicate(query.predicate.name)
    _check_query(query.g, query.T, budget)
    if query.predicate.name == "translate-meets-domain" and query.g == 1:
        # matrices passing the sampled predicate are exactly +-gamma for the sample reductions
        keys = translate_gammas_g1(query.predicate)
        count = 2 * sum(1 for k in keys if max(abs(v) for v in k) <= query.T)
        return CountSeries([(query.T, count)], None, query.predicate.name, query.g)
    if query.g == 1:
        mats = enumerate_array(1, query.T, budget=budget)
        count = int(pred(mats, query.predicate).sum())
    else:
        count = 0
        for block in _iter_g2(query.T, None):
            count += int(pred(block, query.predicate).sum())
    return CountSeries([(query.T, count)], None, query.predicate.name, query.g)


def growth_fit(rows) -> BoundFit:
    """Log-log fit of count against ``T``; needs at least 3 rows with distinct ``T`` and positive counts."""
    rows = list(rows)
    if len(rows) < 3:
        raise DegenerateFitError("growth fit needs at least 3 rows")
    Ts = [r[0] for r in rows]
    if len(set(Ts)) != len(Ts):
        raise DegenerateFitError("growth fit needs distinct T values")
    return fit_loglog(Ts, [r[1] for r in rows], min_points=3)


def count_series(g: int, Ts, predicate: PredicateSpec | None = None, budget: dict | None = None) -> CountSeries:
    predicate = predicate or PredicateSpec()
    Ts = sorted(int(t) for t in Ts)
    rows = [count_filtered(CountQuery(g, T, predicate), budget).rows[0] for T in Ts]
    fit = growth_fit(rows) if len(rows) >= 3 and all(c > 0 for _, c in rows) else None
    return CountSeries(rows, fit, predicate.name, g)


__all__ = [
    "enumerate_symplectic", "enumerate_array", "count_filtered", "count_series", "growth_fit",
    "CountQuery", "CountSeries", "PredicateSpec", "PREDICATES", "chart_samples",
    "reduce_g1_batch", "translate_gammas_g1", "predicted_nodes", "DEFAULT_BUDGET",
]
