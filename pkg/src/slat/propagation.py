"""Level-confined factor propagation: the one-step operator, its closure,
stability, reachability costs, and per-level profiles.

For a weight level C, the one-step operator collects every element of the
level set that divides a binary product of current members.  The least level
at which a target becomes reachable from a generating set is a step function
of C with jumps only at attained weight values, so every infimum here is an
exact finite search.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from ._bitset import bits, mask_of
from .breadth import breadth, is_compressible
from .core import Semilattice
from .metrics import ZERO, LogMagnitude, generate_filter
from .weights import LogWeight, level_set


class BudgetExceeded(RuntimeError):
    """Raised in strict mode when a search outgrows its node budget."""


class PropagationValue:
    """Either a finite rational reachability level or infinity."""

    __slots__ = ("c",)

    def __init__(self, c):
        self.c = None if c is None else Fraction(c)

    @classmethod
    def finite(cls, c):
        return cls(Fraction(c))

    @property
    def is_infinite(self):
        return self.c is None

    def __eq__(self, other):
        return isinstance(other, PropagationValue) and self.c == other.c

    def __hash__(self):
        return hash(self.c)

    def __lt__(self, other):
        if self.is_infinite:
            return False
        if other.is_infinite:
            return True
        return self.c < other.c

    def __le__(self, other):
        return self == other or self < other

    def __gt__(self, other):
        return other < self

    def __ge__(self, other):
        return other <= self

    def to_json(self):
        if self.is_infinite:
            return {"kind": "infinite"}
        return {"kind": "finite",
                "c": {"num": self.c.numerator, "den": self.c.denominator},
                "approx": float(self.c)}

    def __repr__(self):
        return "PropagationValue(inf)" if self.is_infinite \
            else f"PropagationValue({self.c})"


INFINITE = PropagationValue(None)


@dataclass
class PropagationProfile:
    L: Fraction
    value: PropagationValue
    witness_E: int                  # id-mask, 0 when no witness exists
    witness_z: int | None
    exhaustive: bool
    nodes: int = 0
    notes: list = field(default_factory=list)

    def to_json(self):
        return {"L": {"num": self.L.numerator, "den": self.L.denominator},
                "value": self.value.to_json(),
                "witness_E": list(bits(self.witness_E)),
                "witness_z": self.witness_z,
                "exhaustive": self.exhaustive,
                "nodes": self.nodes,
                "notes": list(self.notes)}


# -- one-step operator and closure ------------------------------------------

def fbp(S: Semilattice, lam: LogWeight, C, X: int) -> int:
    """One step: level-C elements dividing a binary product of two level-C
    members of X.  Always contains X restricted to the level set."""
    C = Fraction(C)
    inside = [x for x in bits(X) if lam[x] <= C]
    out = 0
    seen_products = set()
    for i, x in enumerate(inside):
        for y in inside[i:]:
            p = S.product(x, y)
            if p in seen_products:
                continue
            seen_products.add(p)
            for z in S.iter_factors(p):
                if lam[z] <= C:
                    out |= 1 << z
    return out


def fbp_closure(S: Semilattice, lam: LogWeight, C, E: int):
    """Least fixed point of the one-step operator above the seed.

    Returns ``(mask, rounds)``.  The result is sandwiched between the seed
    restricted to the level set and the generated filter restricted to the
    level set; both inclusions are asserted.
    """
    C = Fraction(C)
    seed = mask_of(x for x in bits(E) if lam[x] <= C)
    if seed == 0:
        return 0, 0
    cur = seed
    rounds = 0
    while True:
        nxt = fbp(S, lam, C, cur)
        rounds += 1
        if nxt == cur:
            break
        cur = nxt
    assert seed & ~cur == 0
    bound = generate_filter(S, E) & level_set(S, lam, C)
    assert cur & ~bound == 0
    return cur, rounds


def is_fbp_stable(S: Semilattice, lam: LogWeight, C, X: int) -> bool:
    """Whether one step at level C stays inside X."""
    return fbp(S, lam, C, X) & ~X == 0


def stability_threshold(S: Semilattice, lam: LogWeight, X: int):
    """Least C at which X stops being stable, or None when stable for all C.

    A violating triple (x, y in X, z dividing xy outside X) becomes active
    once C reaches the largest of the three weights, so X is C-stable
    exactly for C strictly below the returned value.
    """
    best = None
    xs = list(bits(X))
    for i, x in enumerate(xs):
        for y in xs[i:]:
            p = S.product(x, y)
            outside = S.factors_mask(p) & ~X
            if outside:
                base = max(lam[x], lam[y])
                t = min(max(base, lam[z]) for z in bits(outside))
                if best is None or t < best:
                    best = t
    return best


# -- reachability cost -------------------------------------------------------

def _closure_universe(S, lam, E_ids, cap=200_000):
    """Factors of the product of E: the closed world every level-confined
    closure from E lives in.  Returns (ids, local product cache helpers)."""
    m = S.product_ids(E_ids)
    U = list(S.iter_factors(m))
    if len(U) > cap:
        raise BudgetExceeded(f"closure universe has {len(U)} elements")
    return m, U


class _Sweep:
    """Incremental level-confined closure over ascending thresholds.

    The closed world is the set of factors of the product of the seed; each
    threshold re-runs the worklist seeded with everything reached so far
    plus newly admitted seed members.
    """

    def __init__(self, S, lam, E_ids):
        self.S = S
        self.lam = lam
        self.E_ids = list(E_ids)
        self.bottom, self.U = _closure_universe(S, lam, self.E_ids)
        self.pos = {g: i for i, g in enumerate(self.U)}
        self.lam_u = [lam[g] for g in self.U]
        self._factor_cache = {}
        self.reached = set()            # local indices
        self.first_level = {}           # local index -> Fraction
        self.thresholds = sorted(set(self.lam_u))

    def _local_factors(self, p):
        got = self._factor_cache.get(p)
        if got is None:
            got = [self.pos[z] for z in self.S.iter_factors(p)]
            self._factor_cache[p] = got
        return got

    def run_threshold(self, C):
        """Extend the closure to threshold C (must be called ascending)."""
        lam, S = self.lam, self.S
        admitted = [self.pos[x] for x in self.E_ids if lam[x] <= C]
        new = [i for i in admitted if i not in self.reached]
        work = list(self.reached) + new
        for i in new:
            self.reached.add(i)
            self.first_level.setdefault(i, C)
        members = list(self.reached)
        queue = list(work)
        while queue:
            a = queue.pop()
            ga = self.U[a]
            for b in list(members):
                p = S.product(ga, self.U[b])
                for j in self._local_factors(p):
                    if j not in self.reached and self.lam_u[j] <= C:
                        self.reached.add(j)
                        self.first_level[j] = C
                        members.append(j)
                        queue.append(j)

    def value_for(self, z):
        """First threshold at which element id z is reached, if any so far."""
        i = self.pos.get(z)
        if i is None:
            return None
        lvl = self.first_level.get(i)
        return lvl


def v_value(S: Semilattice, lam: LogWeight, E: int, z: int) -> PropagationValue:
    """Least level from which z is reachable from E by iterated one-step
    closure; infinite when z lies outside the filter generated by E."""
    if E == 0:
        return INFINITE
    E_ids = list(bits(E))
    m = S.product_ids(E_ids)
    if not S.leq(m, z):
        return INFINITE
    sweep = _Sweep(S, lam, E_ids)
    floor = max(lam[z], min(lam[x] for x in E_ids))
    for C in sweep.thresholds:
        if C < floor:
            continue
        sweep.run_threshold(C)
        got = sweep.value_for(z)
        if got is not None:
            return PropagationValue.finite(C)
    raise AssertionError("target inside the generated filter never reached")


# -- per-level profile -------------------------------------------------------

def _iter_incompressible(S, W_ids, budget, counter):
    """Depth-first enumeration of the incompressible subsets of W_ids in
    canonical order; incompressibility is hereditary, so compressible
    branches are cut."""
    cur = []

    def walk(start):
        for i in range(start, len(W_ids)):
            counter["nodes"] += 1
            if counter["nodes"] > budget:
                counter["capped"] = True
                return
            cur.append(W_ids[i])
            ok = True
            if len(cur) > 1:
                comp, _ = is_compressible(S, cur)
                ok = not comp
            if ok:
                yield list(cur)
                yield from walk(i + 1)
            cur.pop()
            if counter["capped"]:
                return

    yield from walk(0)


def propagation_profile(S: Semilattice, lam: LogWeight, L, budget: int = 500_000,
                        strict: bool = False, seed: int = 0,
                        samples: int = 2000) -> PropagationProfile:
    """Double supremum of reachability cost over generating sets inside the
    level-L set and targets in the generated filter at level L.

    Only incompressible generating sets matter: a minimal set certifying a
    target is incompressible, and shrinking a generating set never lowers
    the cost.  Exhaustive when the enumeration fits the budget; otherwise a
    seeded sampled lower bound (or BudgetExceeded in strict mode).
    """
    L = Fraction(L)
    W_mask = level_set(S, lam, L)
    W_ids = list(bits(W_mask))
    prof = PropagationProfile(L, PropagationValue.finite(0), 0, None, True)
    if not W_ids:
        prof.notes.append("empty level set")
        return prof
    counter = {"nodes": 0, "capped": False}

    def consider(E_ids):
        sweep = _Sweep(S, lam, E_ids)
        targets = [z for z in sweep.U if lam[z] <= L]
        remaining = set(targets)
        for C in sweep.thresholds:
            if not remaining:
                break
            sweep.run_threshold(C)
            for z in list(remaining):
                if sweep.value_for(z) is not None:
                    remaining.discard(z)
                    v = PropagationValue.finite(C)
                    if v > prof.value:
                        prof.value = v
                        prof.witness_E = mask_of(E_ids)
                        prof.witness_z = z

    for E_ids in _iter_incompressible(S, W_ids, budget, counter):
        consider(E_ids)
        if counter["capped"]:
            break
    prof.nodes = counter["nodes"]
    if counter["capped"]:
        if strict:
            raise BudgetExceeded("profile enumeration exceeded the budget")
        prof.exhaustive = False
        prof.notes.append("budget exceeded; sampled lower bound")
        rng = random.Random(seed)
        for _ in range(samples):
            size = rng.randrange(1, min(len(W_ids), 12) + 1)
            E_ids = sorted(rng.sample(W_ids, size))
            # random greedy reduction to an incompressible core
            while len(E_ids) > 1:
                comp, x = is_compressible(S, E_ids)
                if not comp:
                    break
                E_ids.remove(x)
            consider(E_ids)
    return prof


# -- cross-checks ------------------------------------------------------------

@dataclass
class EquivalenceReport:
    L: Fraction
    C: Fraction
    checked: int
    stable_count: int
    violations: list
    exhaustive: bool

    @property
    def ok(self):
        return not self.violations

    def to_json(self):
        return {"L": str(self.L), "C": str(self.C), "checked": self.checked,
                "stable_count": self.stable_count,
                "violations": [list(bits(g)) for g in self.violations[:16]],
                "violation_count": len(self.violations),
                "exhaustive": self.exhaustive}


def check_equivalence_iii(S: Semilattice, lam: LogWeight, L, C,
                          seed: int = 0, samples: int = 4000) -> EquivalenceReport:
    """Scan C-stable sets G for failures of the level-L agreement identity
    (G at level L versus the filter it generates at level L).

    Exhaustive over all subsets for n <= 20; sampled above (closures of
    random seeds reach representative stable sets).
    """
    L = Fraction(L)
    C = Fraction(C)
    W = level_set(S, lam, L)
    violations = []
    stable_count = 0
    checked = 0

    def check(G):
        nonlocal stable_count
        GW = G & W
        if GW != generate_filter(S, GW) & W:
            violations.append(G)

    if S.n <= 20:
        for G in range(1 << S.n):
            checked += 1
            t = stability_threshold(S, lam, G)
            if t is None or C < t:
                stable_count += 1
                check(G)
        return EquivalenceReport(L, C, checked, stable_count, violations, True)
    rng = random.Random(seed)
    for _ in range(samples):
        seed_mask = mask_of(rng.sample(range(S.n), rng.randrange(0, 8)))
        G, _ = fbp_closure(S, lam, C, seed_mask)
        checked += 1
        stable_count += 1
        check(G)
    return EquivalenceReport(L, C, checked, stable_count, violations, False)


@dataclass
class BreadthBoundReport:
    L: Fraction
    breadth: int
    profile: PropagationProfile
    bound: Fraction
    max_ratio: Fraction | None
    passed: bool

    def to_json(self):
        return {"L": str(self.L), "breadth": self.breadth,
                "bound": str(self.bound),
                "profile": self.profile.to_json(),
                "max_ratio": None if self.max_ratio is None else str(self.max_ratio),
                "passed": self.passed}


def finite_breadth_bound_check(S: Semilattice, lam: LogWeight, L,
                               budget: int = 500_000) -> BreadthBoundReport:
    """Verify the profile at level L against breadth * L."""
    L = Fraction(L)
    br = breadth(S).breadth
    prof = propagation_profile(S, lam, L, budget=budget)
    bound = Fraction(br) * L
    if prof.value.is_infinite:
        return BreadthBoundReport(L, br, prof, bound, None, False)
    ratio = None if bound == 0 else prof.value.c / bound
    passed = prof.value.c <= bound or (bound == 0 and prof.value.c == 0)
    return BreadthBoundReport(L, br, prof, bound, ratio, passed)
