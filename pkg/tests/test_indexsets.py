import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cornerlab.indexsets import EMPTY, NATURALS, IndexSet, extended_union, sum_sets

from _oracles import check_extended_union, check_sum

F = Fraction


def iset(*terms):
    return IndexSet.of(*terms)


# ---------------------------------------------------------------- strategies

exponents = st.builds(
    F,
    st.integers(min_value=-8, max_value=8),
    st.sampled_from([1, 2, 3, 4]),
)
terms = st.tuples(exponents, st.integers(min_value=0, max_value=3))
index_sets = st.lists(terms, min_size=0, max_size=4).map(lambda ts: IndexSet.of(*ts))
nonempty_sets = st.lists(terms, min_size=1, max_size=4).map(lambda ts: IndexSet.of(*ts))


# ------------------------------------------------------------ normal form

def test_normalization_drops_dominated_terms():
    assert iset((0, 0), (1, 0)) == iset((0, 0))
    assert iset((0, 1), (2, 0)) == iset((0, 1))
    assert iset((0, 0), (0, 1)) == iset((0, 1))
    # a fractional offset is not dominated
    assert iset((0, 0), (F(1, 2), 0)) == IndexSet(
        frozenset({(F(0), 0), (F(1, 2), 0)})
    )


def test_negative_log_rejected():
    with pytest.raises(ValueError):
        IndexSet.of((0, -1))


def test_contains():
    e = iset((F(1, 2), 1))
    assert e.contains(F(1, 2), 1)
    assert e.contains(F(1, 2), 0)
    assert e.contains(F(5, 2), 1)
    assert not e.contains(F(1, 2), 2)
    assert not e.contains(0, 0)
    assert not e.contains(1, 0)


# ------------------------------------------------------------ worked cases

def test_shift_worked_example():
    assert iset((1, 1), (F(5, 2), 0)).shift(F(1, 2)) == iset((F(3, 2), 1), (3, 0))


def test_extended_union_same_point_bumps_log():
    assert NATURALS.extended_union(NATURALS) == iset((0, 1))


def test_extended_union_fractional_offset_plain_union():
    assert NATURALS.extended_union(iset((F(1, 2), 0))) == iset((0, 0), (F(1, 2), 0))


def test_inf_re():
    assert iset((-1, 0), (F(1, 4), 2)).inf_re() == F(-1)
    assert EMPTY.inf_re() == math.inf


def test_satisfies_bound():
    assert iset((2, 0)).satisfies_bound(2)
    assert not iset((2, 1)).satisfies_bound(2)
    assert iset((F(3, 2), 5)).satisfies_bound(1)
    assert iset((2, 1)).satisfies_bound(2, max_log=1)
    assert not iset((2, 0)).satisfies_bound(2, strict=True)
    assert iset((2, 0)).satisfies_bound(F(3, 2), strict=True)
    assert EMPTY.satisfies_bound(1000)
    assert EMPTY.satisfies_bound(1000, strict=True)


def test_refines():
    assert iset((1, 0)).refines(NATURALS)
    assert not iset((F(1, 2), 1)).refines(iset((F(1, 2), 0)))
    assert EMPTY.refines(iset((5, 0)))
    assert not iset((5, 0)).refines(EMPTY)


def test_sum_identity_and_absorption():
    e = iset((F(1, 2), 1), (-1, 0))
    assert e + NATURALS == e
    assert NATURALS + e == e
    assert e + EMPTY == EMPTY
    assert EMPTY + e == EMPTY
    assert sum_sets() == NATURALS
    assert sum_sets(e, EMPTY) == EMPTY


def test_string_round_trip():
    e = iset((-1, 0), (F(1, 2), 1))
    assert str(e) == "{(-1,0), (1/2,1)}"
    assert IndexSet.parse(str(e)) == e
    assert IndexSet.parse("{}") == EMPTY
    assert str(EMPTY) == "{}"


# ------------------------------------------------------------ brute force

@settings(max_examples=200)
@given(index_sets, index_sets)
def test_sum_matches_enumeration(a, b):
    assert check_sum(a, b)


@settings(max_examples=200)
@given(index_sets, index_sets)
def test_extended_union_matches_enumeration(a, b):
    assert check_extended_union(a, b)


# ------------------------------------------------------------ algebra laws

@given(index_sets, index_sets)
def test_extended_union_commutes(a, b):
    assert a.extended_union(b) == b.extended_union(a)


@given(index_sets, index_sets, index_sets)
def test_extended_union_associates(a, b, c):
    left = a.extended_union(b).extended_union(c)
    right = a.extended_union(b.extended_union(c))
    assert left.same_closure(right)


@given(index_sets, index_sets)
def test_sum_commutes(a, b):
    assert a + b == b + a


@given(index_sets, index_sets, index_sets)
def test_sum_associates(a, b, c):
    assert ((a + b) + c).same_closure(a + (b + c))


@given(index_sets, index_sets)
def test_operand_refines_extended_union(a, b):
    u = a.extended_union(b)
    assert a.refines(u)
    assert b.refines(u)


@given(nonempty_sets, nonempty_sets)
def test_inf_re_of_extended_union_is_min(a, b):
    assert a.extended_union(b).inf_re() == min(a.inf_re(), b.inf_re())


@given(nonempty_sets, nonempty_sets)
def test_inf_re_of_sum_adds(a, b):
    assert (a + b).inf_re() == a.inf_re() + b.inf_re()


@given(index_sets, exponents)
def test_shift_is_sum_with_singleton(a, q):
    assert a.shift(q) == (a + iset((q, 0)) if not a.is_empty else EMPTY)


@given(index_sets, index_sets, exponents)
def test_shift_distributes_over_extended_union(a, b, q):
    assert a.extended_union(b).shift(q) == a.shift(q).extended_union(b.shift(q))


@given(index_sets)
def test_refines_reflexive(a):
    assert a.refines(a)


@given(index_sets, index_sets)
def test_refines_antisymmetric_in_normal_form(a, b):
    if a.refines(b) and b.refines(a):
        assert a == b


@given(index_sets, index_sets, index_sets)
def test_refines_transitive_along_extended_unions(a, x, y):
    b = a.extended_union(x)
    c = b.extended_union(y)
    assert a.refines(b) and b.refines(c) and a.refines(c)


@given(index_sets, index_sets)
def test_refines_decides_membership(a, b):
    if a.refines(b):
        for z, k in a.generators:
            assert b.contains(z, k)


@given(index_sets)
def test_fold_matches_binary(a):
    assert extended_union(a) == a
    assert extended_union(EMPTY, a) == a
