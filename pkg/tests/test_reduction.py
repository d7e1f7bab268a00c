import itertools

import numpy as np
import pytest

from siegelkit.errors import (
    BudgetExceededError,
    DegenerateFitError,
    UnsupportedGenusError,
)
from siegelkit.geometry import (
    act,
    in_fundamental_domain,
    point_from_complex,
    random_point,
)
from siegelkit.reduction import minkowski_reduce, reduction_height_survey, siegel_reduce
from siegelkit.symplectic import identity, is_symplectic


def lagrange_reduced_tau(tau: complex) -> complex:
    """Reduce the lattice basis (1, tau) by Lagrange's algorithm and return w2 / w1."""
    w1, w2 = 1 + 0j, complex(tau)
    while True:
        if abs(w2) < abs(w1):
            w1, w2 = w2, w1
        m = round((w2 / w1).real)
        w2 = w2 - m * w1
        if abs(w2) >= abs(w1):
            break
    t = w2 / w1
    # an orientation reversing basis change is undone by negating w2
    return t if t.imag > 0 else -t


def successive_minima(Y: np.ndarray, box: int = 10) -> list[float]:
    g = len(Y)
    vecs = [np.array(v) for v in itertools.product(range(-box, box + 1), repeat=g) if any(v)]
    vecs.sort(key=lambda v: v @ Y @ v)
    chosen, mins = [], []
    for v in vecs:
        if np.linalg.matrix_rank(np.array(chosen + [v])) > len(chosen):
            chosen.append(v)
            mins.append(v @ Y @ v)
            if len(chosen) == g:
                break
    return mins


def test_minkowski_example():
    U, Yr = minkowski_reduce([[5, 2], [2, 1]])
    assert np.allclose(Yr, np.eye(2))
    assert abs(round(np.linalg.det(U))) == 1
    assert np.allclose(U @ np.array([[5, 2], [2, 1]]) @ U.T, Yr)


def test_minkowski_identity_on_reduced():
    U, Yr = minkowski_reduce([[2.0, 0.5], [0.5, 3.0]])
    assert np.array_equal(U, np.eye(2, dtype=int))


def test_minkowski_diagonal_is_successive_minima(rng):
    # for g <= 3 a Minkowski reduced diagonal lists the successive minima
    for g in (2, 3):
        for _ in range(25):
            L = rng.normal(size=(g, g)) * rng.uniform(0.5, 2, size=g)
            Y = L @ L.T + 0.05 * np.eye(g)
            U, Yr = minkowski_reduce(Y)
            assert np.allclose(U @ Y @ U.T, Yr)
            assert np.allclose(np.diag(Yr), successive_minima(Y), rtol=1e-9)


def test_minkowski_unsupported_genus():
    with pytest.raises(UnsupportedGenusError):
        minkowski_reduce(np.eye(4))


def test_reduce_example():
    res = siegel_reduce(point_from_complex(0.6 + 0.2j))
    assert res.gamma.rows() == [[2, -1], [-1, 1]]
    assert np.allclose(res.reduced_point.Zc, 1j)
    assert res.height_gamma == 2 and res.height_in == pytest.approx(5)


def test_reduced_point_is_fixed():
    for z in (1j, 0.3 + 1.5j, np.diag([1j, 2j])):
        res = siegel_reduce(point_from_complex(z))
        assert res.gamma == identity(res.gamma.g) and res.steps == 0


@pytest.mark.parametrize("g,n", [(1, 100), (2, 40), (3, 6)])
def test_reduction_correctness(rng, g, n):
    for _ in range(n):
        Z = random_point(g, rng)
        res = siegel_reduce(Z)
        assert is_symplectic(res.gamma)
        assert in_fundamental_domain(res.reduced_point).in_domain
        assert np.max(np.abs(act(res.gamma, Z).Zc - res.reduced_point.Zc)) < 1e-8
        assert res.heuristic == (g == 3)


def test_idempotent(rng):
    for g in (1, 2):
        for _ in range(10):
            W = siegel_reduce(random_point(g, rng)).reduced_point
            again = siegel_reduce(W)
            assert again.steps == 0 and again.gamma == identity(g)


def test_matches_lagrange_oracle(rng):
    for _ in range(200):
        Z = random_point(1, rng, x_range=5, log10_scale=(-3, 1))
        got = complex(siegel_reduce(Z).reduced_point.Zc[0, 0])
        want = lagrange_reduced_tau(complex(Z.Zc[0, 0]))
        assert abs(got - want) < 1e-9


def test_step_budget():
    Z = point_from_complex(0.1234 + 1e-4j)
    with pytest.raises(BudgetExceededError) as exc:
        siegel_reduce(Z, step_budget=0)
    assert "steps" in exc.value.diagnostics


def test_unsupported_genus():
    with pytest.raises(UnsupportedGenusError):
        siegel_reduce(point_from_complex(1j * np.eye(4)))


def test_height_survey():
    pts = [point_from_complex(0.3 + 10.0 ** -k * 1j) for k in range(1, 5)]
    fit = reduction_height_survey(pts)
    assert np.isfinite(fit.slope) and fit.n == 4
    with pytest.raises(DegenerateFitError):
        reduction_height_survey(pts[:1])
