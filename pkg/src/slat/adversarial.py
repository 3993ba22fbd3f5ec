"""Adversarial log-weight construction on union-closed set systems.

Builds, level by level, a chain of disjoint marker sets and incompressible
families whose derived log-weight (counting markers past the deepest fully
contained prefix) keeps every family at level 1 while pushing the
reachability cost of the family's join past n/2.  On a finite host the chain
stops where the instance runs out of breadth or can no longer represent the
next level faithfully.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ._bitset import bits, mask_of, popcount
from .breadth import find_incompressible, is_compressible
from .core import Semilattice, ValidationReport, Violation
from .propagation import PropagationValue, v_value
from .weights import LogWeight


class InsufficientBreadth(Exception):
    """The host has no incompressible set of the required size.

    A finding about the instance (too small a truncation), not a bug.
    """


@dataclass
class AdversarialChain:
    """Per-level markers and families plus their cumulative marker prefix.

    ``marker_sets[i]`` is the universe mask of the level-(i+1) markers,
    ``families[i]`` the element ids of the level-(i+1) family, and
    ``cumulative[j]`` the union of the first j marker sets (so
    ``cumulative[0]`` is empty).
    """

    depth: int
    marker_sets: list                 # universe masks E_1..E_depth
    families: list                    # lists of element ids F_1..F_depth
    cumulative: list                  # universe masks D_0..D_depth
    notes: list = field(default_factory=list)

    @property
    def d_final(self) -> int:
        return self.cumulative[self.depth]

    def to_json(self, S=None):
        return {"depth": self.depth,
                "marker_sets": [list(bits(E)) for E in self.marker_sets],
                "families": [list(F) for F in self.families],
                "cumulative": [list(bits(D)) for D in self.cumulative],
                "notes": list(self.notes)}


def find_markers(S: Semilattice, a_mask: int, m: int):
    """Elements b_1..b_m and distinct points g_1..g_m with g_j in b_j and in
    no other b_k, all avoiding the universe subset ``a_mask``.

    Searches for an incompressible family of size |a| + m; each member then
    owns a private point, the private points are distinct, and at most |a|
    of them can land in ``a_mask``, so at least m survive the filter.
    """
    if S.kind != "set_system":
        raise TypeError("marker search needs a set-system instance")
    if m < 1:
        raise ValueError("need at least one marker")
    size = popcount(a_mask) + m
    ids = find_incompressible(S, size)
    if ids is None:
        raise InsufficientBreadth(
            f"no incompressible family of size {size} found")
    masks = [S.member_mask(x) for x in ids]
    picked_b, picked_g = [], []
    for j, x in enumerate(ids):
        others = 0
        for k, mk in enumerate(masks):
            if k != j:
                others |= mk
        private = masks[j] & ~others
        assert private, "incompressible members must own a private point"
        g = next(bits(private & ~a_mask), None)
        if g is None:
            continue
        picked_b.append(x)
        picked_g.append(g)
        if len(picked_b) == m:
            return picked_b, picked_g
    raise AssertionError("marker filter lost too many private points")


def build_chain(S: Semilattice, n_max: int, strict: bool = False) -> AdversarialChain:
    """Construct the chain up to ``n_max`` levels.

    Base level: the first element with a nonempty member set, marked by its
    lowest point.  Level n: with ``a`` the union of all previous family
    joins, pick n markers avoiding ``a`` and set x_j = a union b_j.  A level
    is kept only when every x_j and the join of the new family are genuine
    elements; a collapsed join means the host can no longer represent the
    level, and construction stops with a note (or raises when strict).
    """
    if S.kind != "set_system":
        raise TypeError("chain construction needs a set-system instance")
    if n_max < 1:
        raise ValueError("chain depth must be at least 1")
    base = next((x for x in range(S.n) if S.member_mask(x)), None)
    if base is None:
        raise InsufficientBreadth("host has no nonempty member set")
    g0 = next(bits(S.member_mask(base)))
    chain = AdversarialChain(depth=1,
                             marker_sets=[1 << g0],
                             families=[[base]],
                             cumulative=[0, 1 << g0])
    a_mask = S.member_mask(base)
    for n in range(2, n_max + 1):
        try:
            b_ids, gammas = find_markers(S, a_mask, n)
        except InsufficientBreadth as exc:
            if strict:
                raise
            chain.notes.append(f"stopped at level {n}: {exc}")
            return chain
        x_ids = []
        join_mask = a_mask
        ok = True
        for b in b_ids:
            xm = a_mask | S.member_mask(b)
            xid = S.id_of_mask(xm)
            if xid is None or (S.top_id is not None and xid == S.top_id
                               and S.member_mask(S.top_id) != xm):
                ok = False
                break
            x_ids.append(xid)
            join_mask |= xm
        if ok:
            zid = S.id_of_mask(join_mask)
            if zid is None or (S.top_id is not None and zid == S.top_id
                               and S.member_mask(S.top_id) != join_mask):
                ok = False
        if not ok:
            msg = f"level {n} does not fit the host; stopping at {n - 1}"
            if strict:
                raise InsufficientBreadth(msg)
            chain.notes.append(msg)
            return chain
        E_n = mask_of(gammas)
        D_prev = chain.cumulative[-1]
        _assert_level(S, x_ids, gammas, E_n, D_prev, n)
        chain.marker_sets.append(E_n)
        chain.families.append(x_ids)
        chain.cumulative.append(D_prev | E_n)
        chain.depth = n
        a_mask = join_mask
    return chain


def _assert_level(S, x_ids, gammas, E_n, D_prev, n):
    assert len(x_ids) == len(gammas) == n
    assert E_n & D_prev == 0, "marker sets must stay pairwise disjoint"
    for x in x_ids:
        assert S.member_mask(x) & D_prev == D_prev, \
            "family members must contain every earlier marker"
    for g in gammas:
        holders = [x for x in x_ids if S.member_mask(x) >> g & 1]
        assert len(holders) == 1, "each marker belongs to exactly one member"
    comp, _ = is_compressible(S, x_ids)
    assert not comp, "each family must be incompressible"


# -- the derived log-weight --------------------------------------------------

def _eta_of_trace(trace: int, cumulative: list) -> int:
    """Marker count past the deepest fully contained prefix, from the
    intersection of a member set with the final prefix."""
    N = 0
    for n in range(len(cumulative) - 1, -1, -1):
        if trace & cumulative[n] == cumulative[n]:
            N = n
            break
    return popcount(trace & ~cumulative[N])


def eta_weight(chain: AdversarialChain, S: Semilattice) -> LogWeight:
    """The chain's derived log-weight as an exact lazy LogWeight."""
    d_final = chain.d_final
    cumulative = list(chain.cumulative)

    def eta(x):
        return Fraction(_eta_of_trace(S.member_mask(x) & d_final, cumulative))

    return LogWeight.lazy(S.n, eta, name="eta")


def check_eta_subadditive(chain: AdversarialChain, S: Semilattice) -> ValidationReport:
    """Exhaustive subadditivity check for the derived log-weight.

    The weight of an element depends only on its trace on the final marker
    prefix, and the trace of a union is the union of the traces (a collapsed
    product has weight 0, which never violates the bound), so checking every
    pair of prefix subsets covers every pair of elements.
    """
    rep = ValidationReport()
    d_final = chain.d_final
    pts = list(bits(d_final))
    cumulative = list(chain.cumulative)
    traces = []
    for sub in range(1 << len(pts)):
        t = mask_of(pts[i] for i in range(len(pts)) if sub >> i & 1)
        traces.append((t, _eta_of_trace(t, cumulative)))
    for t1, e1 in traces:
        for t2, e2 in traces:
            if _eta_of_trace(t1 | t2, cumulative) > e1 + e2:
                rep.violations.append(
                    Violation("NotSubadditive", (list(bits(t1)), list(bits(t2)))))
    rep.checked_triples = len(traces) ** 2
    rep.notes.append("trace-factored exhaustive pair check")
    return rep


# -- barrier verification ----------------------------------------------------

@dataclass
class BarrierResult:
    n: int
    z: int                            # element id of the family join
    value: PropagationValue
    bound: Fraction
    family_at_level_one: bool
    join_at_level_zero: bool
    passed: bool

    def to_json(self):
        return {"n": self.n, "z": self.z,
                "value": self.value.to_json(),
                "bound": str(self.bound),
                "family_at_level_one": self.family_at_level_one,
                "join_at_level_zero": self.join_at_level_zero,
                "passed": self.passed}


def verify_barrier(chain: AdversarialChain, S: Semilattice, n: int,
                   eta: LogWeight | None = None) -> BarrierResult:
    """Check that reaching the level-n family join from the family costs at
    least n/2 under the derived log-weight."""
    if not 2 <= n <= chain.depth:
        raise ValueError("level must satisfy 2 <= n <= chain depth")
    if eta is None:
        eta = eta_weight(chain, S)
    F = chain.families[n - 1]
    z = S.product_ids(F)
    fam_ok = all(eta[x] <= 1 for x in F)
    z_ok = eta[z] == 0
    V = v_value(S, eta, mask_of(F), z)
    bound = Fraction(n, 2)
    passed = fam_ok and z_ok and not V.is_infinite and V.c >= bound
    return BarrierResult(n, z, V, bound, fam_ok, z_ok, passed)
