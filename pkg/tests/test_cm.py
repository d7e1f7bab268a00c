import math
from fractions import Fraction

import numpy as np
import pytest

from siegelkit.cm import (
    QuadraticForm,
    class_number,
    cm_point,
    cm_survey,
    reduce_form,
    reduced_forms,
)
from siegelkit.errors import MalformedInputError
from siegelkit.geometry import in_fundamental_domain, point_from_complex
from siegelkit.reduction import siegel_reduce


def brute_reduced(D):
    N = -D
    out = []
    for a in range(1, math.isqrt(N) + 1):
        for b in range(-a, a + 1):
            if (b * b + N) % (4 * a):
                continue
            c = (b * b + N) // (4 * a)
            f = QuadraticForm(a, b, c)
            if f.is_reduced and f.primitive:
                out.append(f)
    return sorted(out)


def boundary_rep(z):
    # reduced forms take the left edge and left arc of the closed domain
    if abs(abs(z.real) - 0.5) < 1e-9 or abs(abs(z) - 1) < 1e-9:
        return complex(-abs(z.real), z.imag)
    return z


def kronecker(D, n):
    # Kronecker symbol (D / n) for odd primes and 2
    if n == 2:
        if D % 2 == 0:
            return 0
        return 1 if D % 8 in (1, 7) else -1
    r = pow(D % n, (n - 1) // 2, n)
    return -1 if r == n - 1 else r


def primes(n):
    s = np.ones(n + 1, dtype=bool)
    s[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if s[p]:
            s[p * p::p] = False
    return np.nonzero(s)[0]


def is_fundamental(D):
    if D % 4 == 1:
        m = -D
        return all(m % (p * p) for p in range(2, math.isqrt(m) + 1))
    if D % 4 == 0:
        m = -D // 4
        return m % 4 in (1, 2) and all(m % (p * p) for p in range(2, math.isqrt(m) + 1))
    return False


def test_examples():
    assert reduced_forms(-4) == [QuadraticForm(1, 0, 1)]
    assert reduced_forms(-3) == [QuadraticForm(1, 1, 1)]
    assert reduced_forms(-23) == [QuadraticForm(1, 1, 6), QuadraticForm(2, -1, 3), QuadraticForm(2, 1, 3)]
    assert class_number(-23) == 3
    assert class_number(-12) == 1  # (2, 2, 2) is not primitive


def test_bad_discriminants():
    for D in (5, 0, -5, -2, 2.5):
        with pytest.raises(MalformedInputError):
            reduced_forms(D)


def test_bulk_against_loop_oracle():
    for N in range(3, 10_001):
        D = -N
        if D % 4 not in (0, 1):
            continue
        if N < 2000 or N % 17 == 0:
            assert reduced_forms(D) == brute_reduced(D), D


def test_class_number_formula_fundamental():
    # h(D) = w/(2 pi) sqrt|D| L(1, chi_D), evaluated with a partial Euler product
    ps = primes(200_000)
    for D in (-23, -47, -71, -104, -163, -199, -260, -419, -887, -1155):
        assert is_fundamental(D)
        L = 1.0
        for p in ps:
            L /= 1 - kronecker(D, int(p)) / p
        w = 6 if D == -3 else 4 if D == -4 else 2
        h = w / (2 * math.pi) * math.sqrt(-D) * L
        assert round(h) == class_number(D), (D, h)
        assert abs(h - class_number(D)) < 0.1


def test_cm_point_examples():
    Z = cm_point(QuadraticForm(1, 0, 1))
    assert Z.Zc[0, 0] == pytest.approx(1j)
    Z = cm_point(QuadraticForm(1, 1, 1))
    assert Z.Zc[0, 0] == pytest.approx(complex(-0.5, math.sqrt(3) / 2))
    assert in_fundamental_domain(Z).in_domain
    Z = cm_point(QuadraticForm(2, 1, 3), precision=256)
    assert Z.precision == 256
    assert Z.Zc[0, 0] == pytest.approx(complex(-0.25, math.sqrt(23) / 4))
    with pytest.raises(MalformedInputError):
        cm_point(QuadraticForm(2, 3, 4))


def test_reduce_form_and_reduction_agree():
    rng = np.random.default_rng(8)
    for _ in range(40):
        a, b, c = 1, 0, 1
        # build a random equivalent of a random reduced form
        D = -int(rng.integers(3, 3000))
        if D % 4 not in (0, 1):
            continue
        forms = reduced_forms(D)
        f = forms[int(rng.integers(len(forms)))]
        a, b, c = f.a, f.b, f.c
        for _ in range(4):
            k = int(rng.integers(-3, 4))
            a, b, c = a, b + 2 * a * k, a * k * k + b * k + c
            a, b, c = c, -b, a
        g = QuadraticForm(a, b, c)
        assert reduce_form(g) == f
        tau = complex(-g.b, math.sqrt(-g.D)) / (2 * g.a)
        res = siegel_reduce(point_from_complex(tau))
        assert boundary_rep(res.reduced_point.Zc[0, 0]) == pytest.approx(f.tau(), abs=1e-9)


def test_survey_small():
    s = cm_survey(4)
    assert s.total_points == 2 and s.all_in_domain
    with pytest.raises(MalformedInputError):
        cm_survey(2)


def test_survey_fits_and_heights():
    s = cm_survey(3000)
    for r in s.records:
        assert r.max_height <= 1 + math.sqrt(-r.D)
        assert all(f.D == r.D and f.is_reduced for f in r.forms)
    assert s.all_in_domain
    assert 0.3 <= s.class_number_fit.slope <= 0.7
    assert 0.3 <= s.height_fit.slope <= 0.7
    exact = {(Fraction(-f.b, 2 * f.a), Fraction(-f.D, 4 * f.a * f.a)) for r in s.records for f in r.forms}
    # distinct discriminants give distinct points
    assert s.total_points == len(exact) == s.class_number_sum
