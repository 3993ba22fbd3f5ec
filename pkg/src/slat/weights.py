"""Log-weights on a semilattice: exact rational values, validation, built-ins.

A log-weight assigns each element a nonnegative rational lambda(x) with
lambda(xy) <= lambda(x) + lambda(y).  The multiplicative weight exp(lambda)
is never stored; all threshold comparisons stay exact.
"""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations_with_replacement

from ._bitset import mask_of, popcount
from .core import Semilattice, ValidationReport, Violation

#: exhaustive pair checking in validate_logweight is limited to this size
EXHAUSTIVE_PAIR_CAP = 4096


class KindMismatch(TypeError):
    """Built-in weight needs a representation the instance does not have."""


class PrototypeMissingTop(ValueError):
    """The cheap-top weight needs the full universe as an element."""


class LogWeight:
    """Per-element nonnegative rationals, either stored or computed lazily.

    ``lam[x]`` returns the exact value for element id ``x``.
    """

    def __init__(self, n, values=None, fn=None, name="explicit"):
        if (values is None) == (fn is None):
            raise ValueError("provide exactly one of values or fn")
        self.n = n
        self.name = name
        self._values = list(values) if values is not None else None
        self._fn = fn
        self._cache = {} if fn is not None else None

    @classmethod
    def from_values(cls, values, name="explicit"):
        vals = [Fraction(v) for v in values]
        return cls(len(vals), values=vals, name=name)

    @classmethod
    def lazy(cls, n, fn, name):
        return cls(n, fn=fn, name=name)

    def __getitem__(self, x: int) -> Fraction:
        if self._values is not None:
            return self._values[x]
        v = self._cache.get(x)
        if v is None:
            v = self._fn(x)
            self._cache[x] = v
        return v

    def values(self):
        return [self[x] for x in range(self.n)]

    def as_floats(self):
        import numpy as np

        return np.array([float(self[x]) for x in range(self.n)])

    def max_value(self) -> Fraction:
        return max(self[x] for x in range(self.n))

    def distinct_values(self):
        return sorted(set(self[x] for x in range(self.n)))

    def to_json(self):
        if self.name in ("cardinality", "prototype", "zero"):
            return {"kind": self.name}
        return {"kind": "explicit",
                "values": [{"num": v.numerator, "den": v.denominator}
                           for v in self.values()]}

    def __repr__(self):
        return f"LogWeight(n={self.n}, name={self.name!r})"


def validate_logweight(S: Semilattice, lam: LogWeight,
                       seed: int = 0, samples: int = 100_000):
    """Check nonnegativity and subadditivity.

    Exhaustive over all pairs up to ``EXHAUSTIVE_PAIR_CAP`` elements;
    beyond that, seeded random pairs with the report marked non-exhaustive.
    """
    rep = ValidationReport()
    n = S.n
    if lam.n != n:
        raise ValueError("log-weight length does not match the instance")
    if n <= EXHAUSTIVE_PAIR_CAP:
        for x in range(n):
            if lam[x] < 0:
                rep.violations.append(Violation("Negative", (x,)))
        pairs = combinations_with_replacement(range(n), 2)
    else:
        rng = random.Random(seed)
        rep.exhaustive = False
        rep.notes.append("pair check sampled")
        pairs = ((rng.randrange(n), rng.randrange(n)) for _ in range(samples))
        for _ in range(min(n, samples)):
            x = random.Random(seed + 1).randrange(n)
            if lam[x] < 0:
                rep.violations.append(Violation("Negative", (x,)))
    for x, y in pairs:
        if lam[S.product(x, y)] > lam[x] + lam[y]:
            rep.violations.append(Violation("NotSubadditive", (x, y)))
    return rep


def _top_element(S: Semilattice):
    """Id of the maximum element (union of all member sets), or None."""
    if S.top_id is not None:
        return S.top_id
    full = 0
    for x in range(S.n):
        full |= S.member_mask(x)
    return S.id_of_mask(full)


def builtin_logweight(S: Semilattice, name: str, params=None) -> LogWeight:
    """Named log-weights.

    - ``zero``: constant 0 on any instance.
    - ``cardinality``: member-set size; on an instance with a collapsed top
      the top's value is capped at c+1, the largest subadditive choice.
    - ``scaled``: cardinality times a rational ``q`` (params ``{"q": ...}``).
    - ``prototype``: member-set size except the full universe costs 0.
    """
    params = params or {}
    if name == "zero":
        return LogWeight.from_values([Fraction(0)] * S.n, name="zero")
    if S.kind != "set_system":
        raise KindMismatch(f"{name} weight needs a set-system instance")
    if name in ("cardinality", "scaled"):
        q = Fraction(params.get("q", 1)) if name == "scaled" else Fraction(1)
        if q < 0:
            raise ValueError("scale factor must be nonnegative")
        cap = None
        if S.top_id is not None and S._trunc is not None:
            cap = S._trunc[1] + 1
        elif S.top_id is not None:
            cap = min(popcount(S.member_mask(x) | S.member_mask(y))
                      for x in range(S.n) for y in range(S.n)
                      if S.product(x, y) == S.top_id)

        def card(x, q=q, cap=cap):
            c = popcount(S.member_mask(x))
            if x == S.top_id and cap is not None:
                c = min(c, cap)
            return q * c

        if S.n > 100_000:
            return LogWeight.lazy(S.n, card, name=name)
        return LogWeight(S.n, values=[card(x) for x in range(S.n)], name=name)
    if name == "prototype":
        top = _top_element(S)
        if top is None:
            raise PrototypeMissingTop(
                "prototype weight needs the full universe as an element")
        vals = [Fraction(0) if x == top else Fraction(popcount(S.member_mask(x)))
                for x in range(S.n)]
        return LogWeight(S.n, values=vals, name="prototype")
    raise ValueError(f"unknown builtin log-weight {name!r}")


def level_set(S: Semilattice, lam: LogWeight, L) -> int:
    """Bitmask of the level set {x : lambda(x) <= L}; comparison is exact."""
    L = Fraction(L)
    return mask_of(x for x in range(S.n) if lam[x] <= L)


def random_logweight(S: Semilattice, seed: int, max_num: int = 8,
                     max_den: int = 3) -> LogWeight:
    """Seeded random log-weight: random rationals repaired to subadditivity
    by repeatedly lowering lambda(xy) to lambda(x)+lambda(y) where needed."""
    rng = random.Random(seed)
    vals = [Fraction(rng.randrange(0, max_num + 1),
                     rng.randrange(1, max_den + 1)) for _ in range(S.n)]
    changed = True
    while changed:
        changed = False
        for x in range(S.n):
            for y in range(x, S.n):
                p = S.product(x, y)
                bound = vals[x] + vals[y]
                if vals[p] > bound:
                    vals[p] = bound
                    changed = True
    return LogWeight(S.n, values=vals, name="random")


def logweight_from_json(S: Semilattice, obj) -> LogWeight:
    """Parse the weight descriptor attached to an instance file."""
    kind = obj.get("kind")
    if kind == "explicit":
        vals = [Fraction(v["num"], v["den"]) for v in obj["values"]]
        if len(vals) != S.n:
            raise ValueError("explicit weight length mismatch")
        return LogWeight(S.n, values=vals, name="explicit")
    if kind == "scaled":
        q = obj.get("q", {"num": 1, "den": 1})
        return builtin_logweight(S, "scaled",
                                 {"q": Fraction(q["num"], q["den"])})
    if kind in ("zero", "cardinality", "prototype"):
        return builtin_logweight(S, kind)
    raise ValueError(f"unknown log-weight kind {kind!r}")
