"""Filters, characters, and the weighted stability functionals.

Indicator-valued functionals are exact: their values are always 0 or of the
form exp(-m) for a rational m, captured by :class:`LogMagnitude`.  Complex
valued functionals use double precision with a fixed reduction order.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._bitset import bits, mask_of, popcount
from .core import Semilattice
from .weights import LogWeight, level_set


class LogMagnitude:
    """Exactly 0, or exp(-m) for an exact rational exponent m.

    Ordered by actual magnitude: 0 is smallest, and exp(-m) decreases as m
    grows.
    """

    __slots__ = ("m",)

    def __init__(self, m):
        self.m = None if m is None else Fraction(m)

    @classmethod
    def zero(cls):
        return cls(None)

    @classmethod
    def exp(cls, m):
        return cls(Fraction(m))

    @property
    def is_zero(self):
        return self.m is None

    def approx(self) -> float:
        import math

        return 0.0 if self.is_zero else math.exp(-float(self.m))

    def __eq__(self, other):
        return isinstance(other, LogMagnitude) and self.m == other.m

    def __hash__(self):
        return hash(self.m)

    def __lt__(self, other):
        if self.is_zero:
            return not other.is_zero
        if other.is_zero:
            return False
        return self.m > other.m

    def __le__(self, other):
        return self == other or self < other

    def __gt__(self, other):
        return other < self

    def __ge__(self, other):
        return other <= self

    def to_json(self):
        if self.is_zero:
            return {"kind": "zero"}
        return {"kind": "exp",
                "m": {"num": self.m.numerator, "den": self.m.denominator},
                "approx": self.approx()}

    def __repr__(self):
        return "LogMagnitude.zero()" if self.is_zero \
            else f"LogMagnitude.exp({self.m})"


ZERO = LogMagnitude.zero()


# -- filters ----------------------------------------------------------------

def is_filter(S: Semilattice, F: int) -> bool:
    """True iff the id-mask F is nonempty and xy in F <=> x in F and y in F."""
    if F == 0:
        return False
    for x in range(S.n):
        in_x = bool(F >> x & 1)
        for y in range(x, S.n):
            in_p = bool(F >> S.product(x, y) & 1)
            if in_p != (in_x and bool(F >> y & 1)):
                return False
    return True


def enumerate_filters(S: Semilattice):
    """All filters of a finite semilattice: the n principal up-sets."""
    out = []
    seen = set()
    for y in range(S.n):
        f = S.factors_mask(y)
        if f not in seen:
            seen.add(f)
            out.append(f)
    return out


def generate_filter(S: Semilattice, E: int) -> int:
    """Filter-or-empty-set generated by the id-mask E.

    Empty input gives the empty set; otherwise the principal up-set of the
    product of E.
    """
    if E == 0:
        return 0
    return S.factors_mask(S.product_of_mask(E))


# -- indicator functionals ---------------------------------------------------

def defect_set(S: Semilattice, lam: LogWeight, X: int) -> LogMagnitude:
    """Weighted multiplicativity defect of the indicator of X (exact)."""
    best = None
    for x in range(S.n):
        in_x = bool(X >> x & 1)
        lx = lam[x]
        for y in range(x, S.n):
            in_p = bool(X >> S.product(x, y) & 1)
            if in_p != (in_x and bool(X >> y & 1)):
                m = lx + lam[y]
                if best is None or m < best:
                    best = m
    return ZERO if best is None else LogMagnitude.exp(best)


def d_set(S: Semilattice, lam: LogWeight, X: int, Y: int) -> LogMagnitude:
    """Weighted sup distance between two indicator functions (exact)."""
    diff = X ^ Y
    if diff == 0:
        return ZERO
    return LogMagnitude.exp(min(lam[x] for x in bits(diff)))


def dist_set(S: Semilattice, lam: LogWeight, X: int):
    """Least weighted distance from X to a filter-or-empty-set.

    Returns ``(LogMagnitude, witness_mask)``; candidates are scanned in
    canonical generator order with the empty set last, first winner kept.
    """
    best = None
    witness = None
    for g in range(S.n):
        F = S.factors_mask(g)
        d = d_set(S, lam, X, F)
        if best is None or d < best:
            best, witness = d, F
            if best.is_zero:
                return best, witness
    d = d_set(S, lam, X, 0)
    if d < best:
        best, witness = d, 0
    return best, witness


def level_agreement(S: Semilattice, lam: LogWeight, X: int, Y: int):
    """Largest level threshold below which X and Y have equal level sets.

    Returns ``(threshold, strict)`` where agreement holds exactly for levels
    strictly below the rational threshold, or ``(None, False)`` when X = Y
    (agreement at every level).
    """
    diff = X ^ Y
    if diff == 0:
        return None, False
    return min(lam[x] for x in bits(diff)), True


def best_guess_check(S: Semilattice, lam: LogWeight, X: int, L) -> bool:
    """Whether X agrees at level L with the filter its level part generates."""
    W = level_set(S, lam, L)
    XW = X & W
    return XW == generate_filter(S, XW) & W


# -- complex-valued functionals ----------------------------------------------

def _as_psi(S, psi):
    a = np.asarray(psi, dtype=np.complex128)
    if a.shape != (S.n,):
        raise ValueError("function must assign one value per element")
    if not np.all(np.isfinite(a.real) & np.isfinite(a.imag)):
        raise ValueError("function values must be finite")
    return a


def defect_complex(S: Semilattice, lam: LogWeight, psi) -> float:
    """Weighted multiplicativity defect of a complex function (double)."""
    a = _as_psi(S, psi)
    P = S.product_table_np()
    lf = lam.as_floats()
    w = np.exp(-lf[:, None] - lf[None, :])
    return float(np.max(np.abs(a[P] - np.outer(a, a)) * w))


def dist_complex(S: Semilattice, lam: LogWeight, psi):
    """Least weighted distance from psi to a character-or-zero indicator.

    Returns ``(value, witness_mask)`` over the n principal-filter indicators
    plus the zero function, canonical order, first winner kept.
    """
    a = _as_psi(S, psi)
    wf = np.exp(-lam.as_floats())
    best = None
    witness = None
    for g in range(S.n):
        F = S.factors_mask(g)
        ind = np.array([(F >> x) & 1 for x in range(S.n)], dtype=np.float64)
        d = float(np.max(np.abs(a - ind) * wf))
        if best is None or d < best - 1e-12:
            best, witness = d, F
    d = float(np.max(np.abs(a) * wf))
    if d < best - 1e-12:
        best, witness = d, 0
    return best, witness


def omega_bound(S: Semilattice, lam: LogWeight, psi):
    """Weighted sup of |psi| next to its defect-based upper bound.

    Returns ``(sup_ratio, 1 + defect)``; on a semilattice the first never
    exceeds the second (up to double slack).
    """
    a = _as_psi(S, psi)
    sup_ratio = float(np.max(np.abs(a) * np.exp(-lam.as_floats())))
    return sup_ratio, 1.0 + defect_complex(S, lam, psi)


def discretize(S: Semilattice, psi) -> int:
    """Round a complex function to the id-mask of values within 1/2 of 1.

    Idempotence pushes low-defect functions toward {0,1}-valued ones, so the
    disc centered at 1 recovers the underlying set; ties round inward.
    """
    a = _as_psi(S, psi)
    return mask_of(x for x in range(S.n) if abs(a[x] - 1.0) <= 0.5)
