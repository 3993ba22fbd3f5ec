import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slat import core
from slat._bitset import bits, mask_of, popcount, submasks
from slat.core import (NotClosedError, Semilattice, chain, fin_truncation,
                       free_nonempty, generate_instance, kary_tree, powerset,
                       sch_embed)


def test_bitset_helpers():
    assert list(bits(0b1011)) == [0, 1, 3]
    assert mask_of([0, 1, 3]) == 0b1011
    assert popcount(0b1011) == 3
    assert sorted(submasks(0b101)) == [0b000, 0b001, 0b100, 0b101]


def test_chain_is_min_semilattice():
    S = chain(5)
    assert S.n == 5
    assert S.product(1, 3) == 1
    assert S.leq(0, 4) and not S.leq(4, 0)
    assert S.validate().ok


def test_powerset_and_free_sizes():
    assert powerset(3).n == 8
    assert free_nonempty(3).n == 7
    assert powerset(0).n == 1
    assert free_nonempty(3).validate().ok


def test_set_system_product_is_union():
    S = free_nonempty(3)
    for x in range(S.n):
        for y in range(S.n):
            p = S.product(x, y)
            assert S.member_mask(p) == S.member_mask(x) | S.member_mask(y)


def test_leq_is_reverse_inclusion():
    S = powerset(3)
    for x in range(S.n):
        for y in range(S.n):
            # smaller in the order means larger as a set
            assert S.leq(x, y) == (
                S.member_mask(y) & ~S.member_mask(x) == 0)


def test_factors_are_subsets():
    S = free_nonempty(3)
    p = S.id_of_mask(0b111)
    got = sorted(S.iter_factors(p))
    assert len(got) == 7  # every nonempty subset of a 3-set


def test_kary_tree_validates_and_has_meets():
    T = kary_tree(2, 3)
    assert T.n == 15
    assert T.validate().ok
    # meet of two siblings is their parent
    assert T.product(1, 2) == 0


def test_from_sets_rejects_non_closed():
    with pytest.raises(NotClosedError):
        Semilattice.from_sets(range(3), [[0], [1]])


def test_from_sets_close_flag_completes():
    S = Semilattice.from_sets(range(3), [[0], [1]], close=True)
    assert S.id_of_mask(0b011) is not None
    assert S.validate().ok


def test_from_sets_rejects_duplicates():
    with pytest.raises(ValueError):
        Semilattice.from_sets(range(2), [[0], [0]])


def test_json_roundtrip_set_system():
    S = free_nonempty(3)
    obj = S.to_json()
    T = Semilattice.from_json(json.loads(json.dumps(obj)))
    assert T.to_json() == obj


def test_json_roundtrip_table():
    S = kary_tree(2, 2)
    T = Semilattice.from_json(S.to_json())
    assert T.to_json() == S.to_json()


def test_json_roundtrip_collapsed_top():
    S = fin_truncation(4, 2)
    T = Semilattice.from_json(S.to_json())
    assert T.n == S.n and T.top_id == S.top_id
    for x in range(S.n):
        for y in range(S.n):
            assert S.product(x, y) == T.product(x, y)


def test_fin_truncation_quotient_collapses():
    S = fin_truncation(4, 2)
    assert S.n == 1 + 4 + 6 + 1
    a, b = S.id_of_mask(0b0011), S.id_of_mask(0b1100)
    assert S.product(a, b) == S.top_id
    assert S.validate().ok


def test_fin_truncation_exact_raises_when_not_closed():
    with pytest.raises(NotClosedError):
        fin_truncation(4, 2, exact=True)


def test_fin_truncation_rank_unrank_roundtrip():
    S = fin_truncation(24, 8)
    assert S.n == sum(__import__("math").comb(24, i) for i in range(9)) + 1
    import random
    rng = random.Random(0)
    for _ in range(200):
        x = rng.randrange(S.n)
        assert S.id_of_mask(S.member_mask(x)) == x
    # canonical order: ids ascend with (cardinality, lexicographic bits)
    prev = None
    for x in range(0, 200):
        key = (popcount(S.member_mask(x)), tuple(bits(S.member_mask(x))))
        if prev is not None:
            assert key > prev
        prev = key


def test_generate_instance_parsing():
    assert generate_instance("chain(4)").n == 4
    assert generate_instance("fin(4,2)").n == 12
    with pytest.raises(ValueError):
        generate_instance("nope(3)")
    with pytest.raises(ValueError):
        generate_instance("chain(1,2)")


def test_sch_embed_is_a_union_closed_isomorphic_copy():
    for S in (chain(4), kary_tree(2, 2)):
        res = sch_embed(S)
        T, f = res.semilattice, res.mapping
        assert T.kind == "set_system"
        assert len(set(f)) == S.n
        for x in range(S.n):
            for y in range(S.n):
                assert f[S.product(x, y)] == T.product(f[x], f[y])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 31), min_size=1, max_size=6, unique=True))
def test_union_closure_produces_valid_instances(seeds):
    S = Semilattice.from_sets(range(5), [list(bits(m)) for m in set(seeds)],
                              close=True)
    assert S.validate().ok


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 8))
def test_table_instances_satisfy_axioms(m):
    S = chain(m)
    for x in range(S.n):
        assert S.product(x, x) == x
        for y in range(S.n):
            assert S.product(x, y) == S.product(y, x)
