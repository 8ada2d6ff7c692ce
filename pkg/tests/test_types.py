import pytest
from hypothesis import given, strategies as st

from ittlab.errors import ParseError
from ittlab.types import (
    TOP,
    Arrow,
    Const,
    Inter,
    canonicalize,
    constants_of,
    inter_parts,
    make_inter,
    map_consts,
    parse_ty,
    print_ty,
    subterms,
    ty_key,
    ty_size,
)

a, b, c = Const("a"), Const("b"), Const("c")

const_names = st.sampled_from(["a", "b", "c", "d"])
tys = st.recursive(
    st.one_of(st.builds(Const, const_names), st.just(TOP)),
    lambda sub: st.one_of(st.builds(Arrow, sub, sub), st.builds(Inter, sub, sub)),
    max_leaves=20,
)


def test_parse_atoms():
    assert parse_ty("a") == a
    assert parse_ty("U") == TOP
    assert parse_ty("(a)") == a


def test_parse_inter_binds_tighter_than_arrow():
    assert parse_ty("a & b -> c") == Arrow(Inter(a, b), c)
    assert parse_ty("a -> b & c") == Arrow(a, Inter(b, c))


def test_parse_arrow_right_associative():
    assert parse_ty("a -> b -> c") == Arrow(a, Arrow(b, c))
    assert parse_ty("(a -> b) -> c") == Arrow(Arrow(a, b), c)


def test_parse_rejects_reserved_names():
    with pytest.raises(ParseError):
        parse_ty("$1")
    assert parse_ty("$1", allow_reserved=True) == Const("$1")


def test_parse_rejects_garbage():
    for bad in ["", "a &", "-> a", "a -> ", "(a", "a)", "a b", "a | b"]:
        with pytest.raises(ParseError):
            parse_ty(bad)


def test_canonicalize_idempotent_intersection():
    assert canonicalize(parse_ty("a & a")) == a


def test_canonicalize_flattens_and_sorts():
    assert canonicalize(parse_ty("(a & b) & a")) == Inter(a, b)
    assert canonicalize(parse_ty("b & a")) == Inter(a, b)


def test_canonicalize_drops_top():
    assert canonicalize(parse_ty("a & U")) == a
    assert canonicalize(Inter(TOP, TOP)) == TOP


def test_canonicalize_recurses_under_arrow():
    assert canonicalize(parse_ty("(b & a & b) -> (U & c)")) == Arrow(Inter(a, b), c)


def test_canonicalize_orders_constants_before_arrows():
    got = canonicalize(parse_ty("(a -> b) & a"))
    assert got == Inter(a, Arrow(a, b))


@given(tys)
def test_canonicalize_is_idempotent(t):
    ct = canonicalize(t)
    assert canonicalize(ct) == ct


@given(tys)
def test_canonicalize_size_nonincreasing(t):
    assert ty_size(canonicalize(t)) <= ty_size(t)


@given(tys)
def test_canonical_print_parse_exact(t):
    ct = canonicalize(t)
    assert parse_ty(print_ty(ct)) == ct


@given(tys)
def test_raw_print_parse_round_trip_mod_canonical(t):
    assert canonicalize(parse_ty(print_ty(t))) == canonicalize(t)


@given(tys, tys)
def test_ty_key_is_a_total_order(s, t):
    ks, kt = ty_key(s), ty_key(t)
    assert (ks == kt) == (s == t)
    assert ks < kt or kt < ks or ks == kt


@given(tys)
def test_inter_parts_never_contain_inter_or_top(t):
    for p in inter_parts(canonicalize(t)):
        assert not isinstance(p, (Inter,)) and p != TOP


def test_make_inter_right_nested():
    assert make_inter([a, b, c]) == Inter(a, Inter(b, c))
    assert make_inter([]) == TOP
    assert make_inter([a]) == a


def test_subterms_and_constants():
    t = parse_ty("(a -> b) & c")
    assert set(constants_of(t)) == {"a", "b", "c"}
    assert Arrow(a, b) in set(subterms(t))


def test_map_consts():
    t = parse_ty("a -> a & b")
    out = map_consts(t, lambda n: TOP if n == "b" else Const(n.upper()))
    assert out == Arrow(Const("A"), Inter(Const("A"), TOP))
