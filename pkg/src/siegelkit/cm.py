"""CM points of the upper half-plane from reduced binary quadratic forms.

A positive definite form ``a x^2 + b xy + c y^2`` of discriminant
``D = b^2 - 4ac < 0`` is reduced when ``|b| <= a <= c`` and ``b >= 0``
whenever ``|b| = a`` or ``a = c``. Its root ``tau = (-b + i sqrt|D|) / (2a)``
then lies in the closed fundamental domain, and the reduced primitive forms
of discriminant ``D`` are in bijection with the CM points of that order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import gmpy2
import numpy as np
from gmpy2 import mpfr

from . import _mp
from .errors import MalformedInputError
from .fits import BoundFit, fit_loglog
from .geometry import DEFAULT_PRECISION, SiegelPoint, in_domain_batch, make_point


def _check_disc(D: int) -> int:
    if int(D) != D:
        raise MalformedInputError(f"discriminant must be an integer, got {D!r}")
    D = int(D)
    if D >= 0 or D % 4 not in (0, 1):
        raise MalformedInputError(f"need D < 0 with D = 0 or 1 mod 4, got {D}")
    return D


@dataclass(frozen=True, order=True)
class QuadraticForm:
    a: int
    b: int
    c: int

    @property
    def D(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    @property
    def primitive(self) -> bool:
        return math.gcd(self.a, self.b, self.c) == 1

    @property
    def is_reduced(self) -> bool:
        a, b, c = self.a, self.b, self.c
        if self.D >= 0 or a <= 0:
            return False
        if not (abs(b) <= a <= c):
            return False
        return not ((abs(b) == a or a == c) and b < 0)

    def tau(self) -> complex:
        return complex(-self.b, math.sqrt(-self.D)) / (2 * self.a)

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.a, self.b, self.c)


def reduce_form(f: QuadraticForm) -> QuadraticForm:
    """The reduced form properly equivalent to a positive definite ``f``."""
    a, b, c = f.a, f.b, f.c
    if b * b - 4 * a * c >= 0 or a <= 0:
        raise MalformedInputError("only positive definite forms can be reduced")
    while True:
        if c < a:
            a, b, c = c, -b, a
        # bring b into (-a, a]
        k = (a - b) // (2 * a)
        c = a * k * k + b * k + c
        b = b + 2 * a * k
        if c < a:
            continue
        if a == c and b < 0:
            b = -b
        return QuadraticForm(a, b, c)


def reduced_forms(D: int) -> list[QuadraticForm]:
    """All primitive reduced forms of discriminant ``D``, sorted by ``(a, b)``."""
    D = _check_disc(D)
    N = -D
    out = []
    a_max = math.isqrt(N // 3)
    for a in range(1, a_max + 1):
        b = np.arange(-a + 1, a + 1)
        b = b[(b - D) % 2 == 0]
        num = b * b + N
        ok = num % (4 * a) == 0
        b, c = b[ok], num[ok] // (4 * a)
        keep = (c > a) | ((c == a) & (b >= 0))
        for bb, cc in zip(b[keep].tolist(), c[keep].tolist()):
            if math.gcd(a, bb, cc) == 1:
                out.append(QuadraticForm(a, bb, cc))
    out.sort(key=lambda f: (f.a, f.b))
    return out


def class_number(D: int) -> int:
    return len(reduced_forms(D))


def cm_point(form: QuadraticForm, precision: int = DEFAULT_PRECISION) -> SiegelPoint:
    """``tau = (-b + i sqrt|D|) / (2a)`` as a g = 1 point."""
    if not form.is_reduced:
        raise MalformedInputError(f"form {form.as_tuple()} is not reduced; reduce it first")
    with _mp.working_precision(precision):
        two_a = mpfr(2 * form.a)
        x = mpfr(-form.b) / two_a
        y = gmpy2.sqrt(mpfr(-form.D)) / two_a
    return make_point([[x]], [[y]], precision=precision)


def _height(tau: np.ndarray) -> np.ndarray:
    return np.maximum(1.0, np.maximum(np.abs(tau), 1.0 / tau.imag))


@dataclass(frozen=True)
class CMRecord:
    D: int
    forms: tuple
    precision: int = DEFAULT_PRECISION

    @property
    def class_number(self) -> int:
        return len(self.forms)

    @cached_property
    def taus(self) -> np.ndarray:
        return np.array([f.tau() for f in self.forms])

    @property
    def points(self) -> list[SiegelPoint]:
        return [cm_point(f, self.precision) for f in self.forms]

    @property
    def max_height(self) -> float:
        return float(np.max(_height(self.taus)))

    def to_row(self) -> dict:
        return {"D": self.D, "class_number": self.class_number, "max_height": self.max_height}


@dataclass(frozen=True)
class CMSurvey:
    records: list
    class_number_fit: BoundFit
    height_fit: BoundFit
    total_points: int  # distinct CM points found
    all_in_domain: bool

    @property
    def class_number_sum(self) -> int:
        return sum(r.class_number for r in self.records)

    def to_dict(self) -> dict:
        return {
            "records": [r.to_row() for r in self.records],
            "class_number_fit": self.class_number_fit.to_dict(),
            "height_fit": self.height_fit.to_dict(),
            "total_points": self.total_points,
            "class_number_sum": self.class_number_sum,
            "all_in_domain": self.all_in_domain,
        }


def discriminants(bound: int) -> list[int]:
    """Negative discriminants ``D`` (fundamental or not) with ``|D| <= bound``, ordered by ``|D|``."""
    return [-n for n in range(3, bound + 1) if (-n) % 4 in (0, 1)]


def cm_survey(D_bound: int, precision: int = DEFAULT_PRECISION) -> CMSurvey:
    """Class numbers and CM point heights for every discriminant with ``|D| <= D_bound``."""
    if D_bound < 3:
        raise MalformedInputError("the survey needs D_bound >= 3")
    records = [CMRecord(D, tuple(reduced_forms(D)), precision) for D in discriminants(D_bound)]
    taus = np.concatenate([r.taus for r in records])
    # tau is pinned down exactly by (Re tau, (Im tau)^2) in Q^2
    exact = {(Fraction(-f.b, 2 * f.a), Fraction(-f.D, 4 * f.a * f.a)) for r in records for f in r.forms}
    in_dom = bool(np.all(in_domain_batch(taus.reshape(-1, 1, 1))))
    absD = [-r.D for r in records]
    if len(records) >= 2:
        fit_h = fit_loglog(absD, [r.class_number for r in records])
        fit_ht = fit_loglog(absD, [r.max_height for r in records])
    else:
        fit_h = fit_ht = BoundFit.degenerate_fit(len(records))
    return CMSurvey(records, fit_h, fit_ht, len(exact), in_dom)


__all__ = [
    "QuadraticForm", "reduce_form", "reduced_forms", "class_number", "cm_point",
    "CMRecord", "CMSurvey", "cm_survey", "discriminants",
]
