"""Finite semilattice representations, validation, order, embeddings and generators.

A semilattice is stored either as an explicit product table or as a
union-closed set system over a finite universe.  Elements are dense integer
ids; subsets of elements are plain integer bitmasks over those ids.
"""

from __future__ import annotations

import json
import math
import random
import re
from dataclasses import dataclass, field
from itertools import combinations

from ._bitset import bits, mask_of, popcount, submasks

TABLE_HARD_CAP = 10**6
#: above this size a cardinality truncation keeps no per-element storage
IMPLICIT_THRESHOLD = 300_000
#: full O(n^3) associativity checking is restricted to this size
FULL_VALIDATE_CAP = 320


class NotClosedError(ValueError):
    """A set-system product refers to a union that is not a member."""


class SizeOverflowError(ValueError):
    """Requested instance exceeds the configured size cap."""


@dataclass(frozen=True)
class Violation:
    kind: str
    witness: tuple

    def to_json(self):
        return {"kind": self.kind, "witness": list(self.witness)}


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)
    checked_triples: int = 0
    exhaustive: bool = True
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self):
        return {
            "ok": self.ok,
            "violations": [v.to_json() for v in self.violations],
            "checked_triples": self.checked_triples,
            "exhaustive": self.exhaustive,
            "notes": list(self.notes),
        }


class Semilattice:
    """A finite commutative idempotent semigroup.

    Instances are immutable after construction and safe to share between
    workers.  Use the module-level generators or ``from_table`` /
    ``from_sets`` / ``from_json`` instead of calling the constructor.
    """

    def __init__(self, kind, n, *, table=None, ground=None, masks=None,
                 labels=None, trunc=None, top_id=None):
        self.kind = kind  # "table" | "set_system"
        self.n = n
        self.table = table
        self.ground = ground          # universe labels, set_system only
        self._masks = masks           # member masks in canonical order
        self.labels = labels
        self._trunc = trunc           # (k, c) for implicit storage
        self.top_id = top_id          # id of the collapsed top, or None
        self._index = None
        self._factors_cache = {}
        self._np_table = None
        if masks is not None:
            self._index = {m: i for i, m in enumerate(masks)}

    # -- constructors -------------------------------------------------

    @classmethod
    def from_table(cls, table, labels=None):
        n = len(table)
        if n > TABLE_HARD_CAP:
            raise SizeOverflowError(f"table instance too large: n={n}")
        tab = [list(row) for row in table]
        for row in tab:
            if len(row) != n:
                raise ValueError("product table must be square")
            for v in row:
                if not (0 <= v < n):
                    raise ValueError(f"table entry {v} out of range")
        return cls("table", n, table=tab, labels=labels)

    @classmethod
    def from_sets(cls, ground, member_sets, labels=None, close=False):
        """Build a union-closed set system.

        ``member_sets`` are iterables of indices into ``ground``.  By default
        a family that is not union-closed is rejected; with ``close=True``
        the union-closure is computed first (which changes ``n``).
        """
        ground = list(ground)
        masks = []
        seen = set()
        for s in member_sets:
            m = mask_of(s)
            if m in seen:
                raise ValueError("duplicate element set")
            seen.add(m)
            masks.append(m)
        if close:
            masks = _union_closure(masks)
        else:
            for a, b in combinations(masks, 2):
                if (a | b) not in seen:
                    raise NotClosedError(
                        f"union of element sets {sorted(bits(a))} and "
                        f"{sorted(bits(b))} is not a member (use close=True)")
        masks.sort(key=_canonical_key)
        if close:
            labels = None  # original labels no longer line up
        return cls("set_system", len(masks), ground=ground, masks=masks,
                   labels=labels)

    # -- element access -----------------------------------------------

    def member_mask(self, x: int) -> int:
        """Member set of element ``x`` as a bitmask over universe indices."""
        if self.kind != "set_system":
            raise TypeError("member_mask requires a set system")
        if self._masks is not None:
            return self._masks[x]
        return _trunc_unrank(x, *self._trunc, self.top_id)

    def id_of_mask(self, mask: int):
        """Element id whose member set equals ``mask``, or None."""
        if self._masks is not None:
            return self._index.get(mask)
        return _trunc_rank(mask, *self._trunc, self.top_id)

    def element_label(self, x: int) -> str:
        if self.labels:
            return self.labels[x]
        if self.kind == "set_system":
            if x == self.top_id and self._trunc is not None:
                return "{*}"
            pts = [str(self.ground[i]) for i in bits(self.member_mask(x))]
            return "{" + ",".join(pts) + "}"
        return str(x)

    # -- the semilattice operation ------------------------------------

    def product(self, x: int, y: int) -> int:
        if self.kind == "table":
            return self.table[x][y]
        u = self.member_mask(x) | self.member_mask(y)
        z = self.id_of_mask(u)
        if z is None:
            if self.top_id is not None:
                return self.top_id
            raise NotClosedError(
                f"union of elements {x} and {y} is not a member")
        return z

    def leq(self, x: int, y: int) -> bool:
        """Canonical order: ``x`` precedes ``y`` iff ``product(x, y) == x``."""
        return self.product(x, y) == x

    def product_ids(self, ids) -> int:
        it = iter(ids)
        try:
            acc = next(it)
        except StopIteration:
            raise ValueError("product over an empty collection") from None
        for x in it:
            acc = self.product(acc, x)
        return acc

    def product_of_mask(self, idmask: int) -> int:
        return self.product_ids(bits(idmask))

    # -- upward sets ---------------------------------------------------

    def iter_factors(self, p: int):
        """Yield all z with z >= p in the canonical order (factors of p)."""
        if self.kind == "set_system":
            if p == self.top_id:
                yield from range(self.n)
                return
            pm = self.member_mask(p)
            if (1 << popcount(pm)) <= 4 * self.n or self._masks is None:
                out = []
                for sub in submasks(pm):
                    z = self.id_of_mask(sub)
                    if z is not None and z != self.top_id:
                        out.append(z)
                yield from sorted(out)
                return
        for z in range(self.n):
            if self.leq(p, z):
                yield z

    def factors_mask(self, p: int) -> int:
        """Bitmask over ids of ``{z : z >= p}``; cached per element."""
        m = self._factors_cache.get(p)
        if m is None:
            m = mask_of(self.iter_factors(p))
            self._factors_cache[p] = m
        return m

    # -- validation -----------------------------------------------------

    def validate(self, seed: int = 0, triple_budget: int = 2_000_000):
        """Check commutativity, associativity, idempotence and (for set
        systems) union-closure.  Violations are data, not exceptions.

        Beyond ``FULL_VALIDATE_CAP`` elements the associativity check is
        randomized under ``seed`` and the report is marked non-exhaustive.
        """
        rep = ValidationReport()
        n = self.n
        if self.kind == "set_system":
            self._validate_sets(rep)
            if rep.violations:
                return rep
        full = n <= FULL_VALIDATE_CAP and n * n * n <= 8 * triple_budget
        rep.exhaustive = full
        prod = self.product
        for x in range(min(n, 100_000)):
            if prod(x, x) != x:
                rep.violations.append(Violation("NotIdempotent", (x,)))
        if self.kind == "table":
            for x in range(n):
                row = self.table[x]
                for y in range(x + 1, n):
                    if row[y] != self.table[y][x]:
                        rep.violations.append(
                            Violation("NotCommutative", (x, y)))
        # set-system products are symmetric by construction
        if full:
            for x in range(n):
                for y in range(x, n):
                    xy = prod(x, y)
                    for z in range(y, n):
                        if prod(xy, z) != prod(x, prod(y, z)):
                            rep.violations.append(
                                Violation("NotAssociative", (x, y, z)))
                        rep.checked_triples += 1
        else:
            rng = random.Random(seed)
            trials = min(triple_budget, 50_000)
            for _ in range(trials):
                x = rng.randrange(n)
                y = rng.randrange(n)
                z = rng.randrange(n)
                if prod(prod(x, y), z) != prod(x, prod(y, z)):
                    rep.violations.append(Violation("NotAssociative", (x, y, z)))
                rep.checked_triples += 1
            rep.notes.append("associativity sampled")
        return rep

    def _validate_sets(self, rep):
        if self._masks is None:
            return  # implicit truncations are closed by construction
        seen = set(self._masks)
        if len(seen) != self.n:
            rep.violations.append(Violation("DuplicateSets", ()))
        if self.n * self.n <= 4_000_000:
            pairs = combinations(range(self.n), 2)
        else:
            rng = random.Random(0)
            pairs = ((rng.randrange(self.n), rng.randrange(self.n))
                     for _ in range(100_000))
            rep.exhaustive = False
        for i, j in pairs:
            u = self._masks[i] | self._masks[j]
            if u not in seen:
                if self.top_id is not None:
                    continue  # sanctioned collapse to the top element
                rep.violations.append(Violation("NotUnionClosed", (i, j)))

    # -- tables for vectorized scans ------------------------------------

    def product_table_np(self):
        """Dense n-by-n product table as a numpy array (small n only)."""
        import numpy as np

        if self._np_table is None:
            if self.n > 4096:
                raise SizeOverflowError("dense product table too large")
            if self.kind == "table":
                self._np_table = np.array(self.table, dtype=np.int32)
            else:
                t = np.empty((self.n, self.n), dtype=np.int32)
                for x in range(self.n):
                    for y in range(x, self.n):
                        p = self.product(x, y)
                        t[x, y] = p
                        t[y, x] = p
                self._np_table = t
        return self._np_table

    # -- serialization ---------------------------------------------------

    def to_json(self):
        if self.kind == "table":
            obj = {"kind": "table", "n": self.n,
                   "product": [list(r) for r in self.table]}
        else:
            obj = {
                "kind": "set_system",
                "ground": [str(g) for g in self.ground],
                "elements": [sorted(bits(self.member_mask(i)))
                             for i in range(self.n)],
            }
            if self.top_id is not None:
                obj["collapsed_top"] = self.top_id
        if self.labels:
            obj["labels"] = list(self.labels)
        return obj

    @classmethod
    def from_json(cls, obj, close=False):
        kind = obj.get("kind")
        labels = obj.get("labels")
        if kind == "table":
            return cls.from_table(obj["product"], labels=labels)
        if kind == "set_system":
            if "collapsed_top" in obj:
                masks = [mask_of(e) for e in obj["elements"]]
                if len(set(masks)) != len(masks):
                    raise ValueError("duplicate element set")
                masks.sort(key=_canonical_key)
                return cls("set_system", len(masks),
                           ground=list(obj["ground"]), masks=masks,
                           labels=labels, top_id=int(obj["collapsed_top"]))
            return cls.from_sets(obj["ground"], obj["elements"],
                                 labels=labels, close=close)
        raise ValueError(f"unknown instance kind: {kind!r}")

    def __repr__(self):
        return f"Semilattice(kind={self.kind!r}, n={self.n})"


def _canonical_key(mask):
    return (popcount(mask), tuple(bits(mask)))


def _union_closure(masks):
    closed = set(masks)
    frontier = list(closed)
    while frontier:
        new = []
        for a in frontier:
            for b in list(closed):
                u = a | b
                if u not in closed:
                    closed.add(u)
                    new.append(u)
        frontier = new
        if len(closed) > 2**22:
            raise SizeOverflowError("union closure blew past the size cap")
    return sorted(closed, key=_canonical_key)


# -- implicit storage for cardinality truncations -----------------------

def _comb(k, m):
    return math.comb(k, m) if 0 <= m <= k else 0


def _trunc_offsets(k, c):
    offs = [0]
    for m in range(c + 1):
        offs.append(offs[-1] + _comb(k, m))
    return offs


def _trunc_rank(mask, k, c, top_id):
    m = popcount(mask)
    if m > c:
        if top_id is not None and mask == (1 << k) - 1:
            return top_id
        return None
    offs = _trunc_offsets(k, c)
    pts = list(bits(mask))
    r = 0
    prev = -1
    # lexicographic rank of the sorted point tuple among m-subsets of [k]
    for i, p in enumerate(pts):
        for q in range(prev + 1, p):
            r += _comb(k - q - 1, m - i - 1)
        prev = p
    return offs[m] + r


def _trunc_unrank(x, k, c, top_id):
    if top_id is not None and x == top_id:
        return (1 << k) - 1
    offs = _trunc_offsets(k, c)
    m = 0
    while offs[m + 1] <= x:
        m += 1
    r = x - offs[m]
    mask = 0
    q = 0
    for i in range(m):
        while True:
            block = _comb(k - q - 1, m - i - 1)
            if r < block:
                break
            r -= block
            q += 1
        mask |= 1 << q
        q += 1
    return mask


# -- instance generators -------------------------------------------------

def chain(m: int) -> Semilattice:
    """Totally ordered semilattice on m elements with product = min."""
    if m < 1:
        raise ValueError("chain needs at least one element")
    table = [[min(x, y) for y in range(m)] for x in range(m)]
    return Semilattice.from_table(table)


def _from_masks_unchecked(ground, masks, top_id=None):
    # construction-time closure scan skipped: callers build closed families
    masks = sorted(masks, key=_canonical_key)
    return Semilattice("set_system", len(masks), ground=list(ground),
                       masks=masks, top_id=top_id)


def powerset(k: int) -> Semilattice:
    """All subsets of a k-point universe under union."""
    if k < 0 or k > 20:
        raise SizeOverflowError("powerset universe out of supported range")
    ground = [f"p{i}" for i in range(k)]
    return _from_masks_unchecked(ground, range(1 << k))


def free_nonempty(k: int) -> Semilattice:
    """All nonempty subsets of a k-point universe under union (free on k)."""
    if k < 1 or k > 20:
        raise SizeOverflowError("free semilattice rank out of range")
    ground = [f"p{i}" for i in range(k)]
    return _from_masks_unchecked(ground, range(1, 1 << k))


def fin_truncation(k: int, c: int, exact: bool = False) -> Semilattice:
    """Subsets of a k-point universe of cardinality at most c.

    Unless the family is already union-closed (c >= k-1), the default mode
    adds the full universe as a top element and any union that escapes the
    cardinality bound collapses to it; ``exact=True`` refuses instead.
    """
    if k < 1 or c < 0:
        raise ValueError("bad truncation parameters")
    c = min(c, k)
    ground = [f"p{i}" for i in range(k)]
    if c >= k - 1:
        # the family plus the full set is literally union-closed
        if c == k:
            return powerset(k)
        return _from_masks_unchecked(
            ground, (m for m in range(1 << k)
                     if popcount(m) <= c or m == (1 << k) - 1))
    if exact:
        raise NotClosedError(
            f"cardinality-{c} truncation of a {k}-set is not union-closed")
    n = _trunc_offsets(k, c)[-1] + 1
    top_id = n - 1
    if n - 1 > IMPLICIT_THRESHOLD:
        return Semilattice("set_system", n, ground=ground,
                           trunc=(k, c), top_id=top_id)
    masks = [_trunc_unrank(x, k, c, top_id) for x in range(n)]
    return Semilattice("set_system", n, ground=ground, masks=masks,
                       trunc=(k, c), top_id=top_id)


def kary_tree(k: int, depth: int) -> Semilattice:
    """Complete k-ary rooted tree with product = youngest common ancestor."""
    if k < 1 or depth < 0:
        raise ValueError("bad tree parameters")
    n = (k ** (depth + 1) - 1) // (k - 1) if k > 1 else depth + 1
    if n > TABLE_HARD_CAP:
        raise SizeOverflowError("tree too large")
    parent = [None] * n
    level = [0] * n
    nxt = 1
    frontier = [0]
    for d in range(depth):
        new = []
        for v in frontier:
            for _ in range(k):
                parent[nxt] = v
                level[nxt] = d + 1
                new.append(nxt)
                nxt += 1
        frontier = new

    def lca(x, y):
        while level[x] > level[y]:
            x = parent[x]
        while level[y] > level[x]:
            y = parent[y]
        while x != y:
            x, y = parent[x], parent[y]
        return x

    table = [[lca(x, y) for y in range(n)] for x in range(n)]
    return Semilattice.from_table(table)


_SPEC_RE = re.compile(r"^\s*([a-z_]+)\s*\(\s*([0-9]+(?:\s*,\s*[0-9]+)*)\s*\)\s*$")

GENERATORS = {
    "chain": (chain, 1),
    "powerset": (powerset, 1),
    "pstar": (free_nonempty, 1),
    "fin": (fin_truncation, 2),
    "tree": (kary_tree, 2),
}


def generate_instance(spec: str) -> Semilattice:
    """Build a named instance from a spec string like ``chain(5)`` or
    ``fin(6,3)``.  Known families: chain, powerset, pstar, fin, tree."""
    m = _SPEC_RE.match(spec)
    if not m:
        raise ValueError(f"cannot parse instance spec {spec!r}")
    name = m.group(1)
    args = [int(a) for a in m.group(2).split(",")]
    if name not in GENERATORS:
        raise ValueError(f"unknown instance family {name!r}")
    fn, arity = GENERATORS[name]
    if len(args) != arity:
        raise ValueError(f"{name} takes {arity} argument(s)")
    return fn(*args)


# -- order-preserving set-system embedding -------------------------------

@dataclass
class EmbeddingResult:
    semilattice: Semilattice
    mapping: list
    note: str

    def to_json(self):
        return {"instance": self.semilattice.to_json(),
                "mapping": list(self.mapping), "note": self.note}


def sch_embed(S: Semilattice) -> EmbeddingResult:
    """Represent S faithfully as a union-closed set system over S itself.

    Each element maps to the complement of its down-set; intersections of
    down-sets turn into unions of their complements, so the image is
    union-closed.  The complement convention is recorded in the result note.
    """
    n = S.n
    full = (1 << n) - 1
    comp = []
    for x in range(n):
        down = mask_of(t for t in range(n) if S.leq(t, x))
        comp.append(full ^ down)
    ground = [S.element_label(t) for t in range(n)]
    T = Semilattice.from_sets(range(n), [list(bits(m)) for m in comp])
    T.ground = ground
    mapping = [T.id_of_mask(m) for m in comp]
    for x in range(n):
        for y in range(x, n):
            lhs = T.product(mapping[x], mapping[y])
            if lhs != mapping[S.product(x, y)]:
                raise AssertionError("embedding failed to be a homomorphism")
    return EmbeddingResult(
        T, mapping,
        "elements are complements of down-sets (union-closed convention)")


def load_instance(path: str, close: bool = False) -> Semilattice:
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    return Semilattice.from_json(obj, close=close)
