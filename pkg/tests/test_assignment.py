"""Derivation checking, bounded inference, expansion, and filters."""

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from ittlab.assignment import (
    Basis,
    Derivation,
    Found,
    InvalidDerivation,
    Judgment,
    NotFoundWithinFuel,
    Preserved,
    basis_join,
    check_derivation,
    expand_derivation,
    infer_bounded,
    le_left,
    strengthen,
    subject_reduction_probe,
    weaken,
)
from ittlab.errors import InvalidInput
from ittlab.filters import (
    FilterRep,
    filter_apply,
    filter_contains,
    filter_members,
    filter_up,
    interpret_term_bounded,
)
from ittlab.subtyping import Proven, SubProof, Valid, build_universe, is_top_equiv
from ittlab.terms import Abs, App, Var, alpha_eq, parse_term, substitute
from ittlab.theory import parse_theory
from ittlab.types import TOP, Arrow, Inter, canonicalize, parse_ty
from ittlab.terms import free_vars

T0 = parse_theory("theory T0\nconstants c0 c1\naxiom c0 -> c0 <= c1 -> c0\n")
T1 = parse_theory("theory T1\nconstants a b\n")
PARK = parse_theory("theory Park\nnatural\nconstants c\naxiom c ~ c -> c\n")
TCDZ = parse_theory(
    "theory TCDZ\nnatural\nconstants c3 c4\n"
    "flags arrow arrow-U arrow-cap U-leq\n"
    "axiom c3 ~ c4 -> c3\naxiom c4 ~ c3 -> c4\n"
)
OMEGA = parse_term(r"(\x.x x) (\x.x x)")


class TestBasis:
    def test_sorted_and_canonical(self):
        g = Basis.of(y=parse_ty("b & a & a"), x=parse_ty("a"))
        assert g.bindings == (("x", parse_ty("a")), ("y", canonicalize(parse_ty("a & b"))))

    def test_double_binding_rejected(self):
        with pytest.raises(InvalidInput):
            Basis((("x", parse_ty("a")), ("x", parse_ty("b"))))

    def test_extend_shadow_rejected(self):
        with pytest.raises(InvalidInput):
            Basis.of(x=parse_ty("a")).extend("x", parse_ty("b"))

    def test_join_shared_variable_meets(self):
        g = basis_join(Basis.of(x=parse_ty("a")), Basis.of(x=parse_ty("b"), y=parse_ty("a")))
        assert g.get("x") == canonicalize(parse_ty("a & b"))
        assert g.get("y") == parse_ty("a")

    def test_join_empty_identity(self):
        g = Basis.of(x=parse_ty("a"))
        assert basis_join(Basis(), g) == g


class TestCheckDerivation:
    def test_axiom_node(self):
        g = Basis.of(x=parse_ty("a"))
        d = Derivation("Ax", Judgment(g, Var("x"), parse_ty("a")))
        assert check_derivation(T1, d) == Valid()

    def test_axiom_wrong_type(self):
        g = Basis.of(x=parse_ty("a"))
        d = Derivation("Ax", Judgment(g, Var("x"), parse_ty("b")))
        out = check_derivation(T1, d)
        assert isinstance(out, InvalidDerivation) and out.path == ()

    def test_topu_must_conclude_top(self):
        d = Derivation("TopU", Judgment(Basis(), Var("x"), parse_ty("a")))
        assert isinstance(check_derivation(T1, d), InvalidDerivation)

    def test_arri_basis_must_extend(self):
        body = Derivation("Ax", Judgment(Basis.of(x=parse_ty("b")), Var("x"), parse_ty("b")))
        lam = Derivation(
            "ArrI", Judgment(Basis(), parse_term(r"\x.x"), parse_ty("a -> a")), (body,)
        )
        out = check_derivation(T1, lam)
        assert isinstance(out, InvalidDerivation)

    def test_arre_domain_mismatch_path(self):
        g = Basis.of(f=parse_ty("a -> a"), y=parse_ty("b"))
        df = Derivation("Ax", Judgment(g, Var("f"), parse_ty("a -> a")))
        dy = Derivation("Ax", Judgment(g, Var("y"), parse_ty("b")))
        d = Derivation("ArrE", Judgment(g, App(Var("f"), Var("y")), parse_ty("a")), (df, dy))
        out = check_derivation(T1, d)
        assert isinstance(out, InvalidDerivation) and out.path == ()

    def test_capi_concludes_meet(self):
        g = Basis.of(x=parse_ty("a & b"))
        d1 = Derivation("Le", Judgment(g, Var("x"), parse_ty("a")),
                        (Derivation("Ax", Judgment(g, Var("x"), parse_ty("a & b"))),),
                        SubProof("IncL", (parse_ty("a & b"), parse_ty("a"))))
        d2 = Derivation("Le", Judgment(g, Var("x"), parse_ty("b")),
                        (Derivation("Ax", Judgment(g, Var("x"), parse_ty("a & b"))),),
                        SubProof("IncR", (parse_ty("a & b"), parse_ty("b"))))
        cap = Derivation("CapI", Judgment(g, Var("x"), parse_ty("a & b")), (d1, d2))
        assert check_derivation(T1, cap) == Valid()
        bad = Derivation("CapI", Judgment(g, Var("x"), parse_ty("a")), (d1, d2))
        assert isinstance(check_derivation(T1, bad), InvalidDerivation)

    def test_le_requires_valid_certificate(self):
        g = Basis.of(x=parse_ty("a"))
        ax = Derivation("Ax", Judgment(g, Var("x"), parse_ty("a")))
        bad = Derivation("Le", Judgment(g, Var("x"), parse_ty("b")), (ax,),
                         SubProof("Axiom", (parse_ty("a"), parse_ty("b"))))
        out = check_derivation(T1, bad)
        assert isinstance(out, InvalidDerivation) and "certificate" in out.reason

    def test_nested_error_path(self):
        g = Basis.of(x=parse_ty("a"))
        bad_leaf = Derivation("Ax", Judgment(g, Var("x"), parse_ty("b")))
        lam = Derivation(
            "ArrI",
            Judgment(g.without("x"), Abs("x", Var("x")), parse_ty("a -> b")),
            (bad_leaf,),
        )
        out = check_derivation(T1, lam)
        assert isinstance(out, InvalidDerivation) and out.path == (0,)


class TestInferBounded:
    def test_variable_lookup_single_fuel(self):
        g = Basis.of(x=parse_ty("a"))
        out = infer_bounded(T1, g, Var("x"), parse_ty("a"), fuel=1)
        assert isinstance(out, Found) and out.derivation.rule == "Ax"

    def test_park_types_omega(self):
        out = infer_bounded(PARK, Basis(), OMEGA, parse_ty("c"), fuel=5000)
        assert isinstance(out, Found)
        assert check_derivation(PARK, out.derivation) == Valid()

    def test_tcdz_does_not_type_omega(self):
        out = infer_bounded(TCDZ, Basis(), OMEGA, parse_ty("c3"), fuel=500)
        assert isinstance(out, NotFoundWithinFuel)

    def test_identity_at_weakened_arrow(self):
        out = infer_bounded(T0, Basis(), parse_term(r"\x.x"), parse_ty("c1 -> c0"), fuel=2000)
        assert isinstance(out, Found)
        assert check_derivation(T0, out.derivation) == Valid()

    def test_negative_fuel_rejected(self):
        with pytest.raises(InvalidInput):
            infer_bounded(T1, Basis(), Var("x"), parse_ty("a"), fuel=-1)

    def test_zero_fuel_gives_up(self):
        g = Basis.of(x=parse_ty("a"))
        out = infer_bounded(T1, g, Var("x"), parse_ty("a"), fuel=0)
        assert isinstance(out, NotFoundWithinFuel)

    def test_found_concludes_requested_judgment(self):
        g = Basis.of(y=parse_ty("c1"))
        out = infer_bounded(T0, g, parse_term(r"(\x.x) y"), parse_ty("c0"), fuel=2000)
        assert isinstance(out, Found)
        c = out.derivation.conclusion
        assert c.basis == g and c.ty == parse_ty("c0")


names = st.sampled_from(["x", "y", "z"])
terms = st.recursive(
    st.builds(Var, names),
    lambda sub: st.one_of(st.builds(Abs, names, sub), st.builds(App, sub, sub)),
    max_leaves=8,
)
t1_types = st.recursive(
    st.sampled_from([parse_ty("a"), parse_ty("b"), TOP]),
    lambda sub: st.one_of(st.builds(Arrow, sub, sub), st.builds(Inter, sub, sub)),
    max_leaves=4,
).map(canonicalize)


class TestSearchProperties:
    @given(terms)
    def test_topu_universality(self, m):
        g = Basis.of(**{x: parse_ty("a") for x in free_vars(m)})
        out = infer_bounded(T1, g, m, TOP, fuel=5)
        assert isinstance(out, Found)
        assert check_derivation(T1, out.derivation) == Valid()

    @given(terms, t1_types)
    @settings(max_examples=200)
    def test_found_derivations_validate(self, m, a):
        g = Basis.of(**{x: parse_ty("a & b") for x in free_vars(m)})
        out = infer_bounded(T1, g, m, a, fuel=300)
        if isinstance(out, Found):
            assert check_derivation(T1, out.derivation) == Valid()
            c = out.derivation.conclusion
            assert c.basis == g and c.term == m and c.ty == canonicalize(a)

    @given(terms, st.sampled_from([parse_ty("c"), parse_ty("c -> c"), TOP]))
    @settings(max_examples=60)
    def test_park_found_derivations_validate(self, m, a):
        g = Basis.of(**{x: parse_ty("c") for x in free_vars(m)})
        out = infer_bounded(PARK, g, m, a, fuel=400)
        if isinstance(out, Found):
            assert check_derivation(PARK, out.derivation) == Valid()


class TestSubjectReduction:
    def test_t0_probe_fails_honestly(self):
        g = Basis.of(y=parse_ty("c1"))
        out = infer_bounded(T0, g, parse_term(r"(\x.x) y"), parse_ty("c0"), fuel=2000)
        assert isinstance(out, Found)
        probe = subject_reduction_probe(T0, out.derivation, fuel=2000)
        assert isinstance(probe, NotFoundWithinFuel)

    def test_top_judgment_always_preserved(self):
        g = Basis.of(y=parse_ty("c1"))
        d = Derivation("TopU", Judgment(g, parse_term(r"(\x.x) y"), TOP))
        probe = subject_reduction_probe(T0, d, fuel=10)
        assert isinstance(probe, Preserved)
        assert probe.derivation.rule == "TopU"

    def test_park_omega_preserved(self):
        out = infer_bounded(PARK, Basis(), OMEGA, parse_ty("c"), fuel=5000)
        probe = subject_reduction_probe(PARK, out.derivation, fuel=5000)
        assert isinstance(probe, Preserved)
        assert check_derivation(PARK, probe.derivation) == Valid()

    def test_requires_head_redex(self):
        g = Basis.of(x=parse_ty("a"))
        d = Derivation("Ax", Judgment(g, Var("x"), parse_ty("a")))
        with pytest.raises(InvalidInput):
            subject_reduction_probe(T1, d)

    def test_rejects_invalid_derivation(self):
        d = Derivation("TopU", Judgment(Basis(), parse_term(r"(\x.x) y"), parse_ty("a")))
        with pytest.raises(InvalidInput):
            subject_reduction_probe(T1, d)


class TestExpansion:
    def test_vacuous_abstraction(self):
        g = Basis.of(y=parse_ty("a"))
        d = infer_bounded(T1, g, Var("y"), parse_ty("a"), fuel=10).derivation
        out = expand_derivation(T1, d, "x", Var("y"), parse_term(r"\w.w w"))
        assert check_derivation(T1, out) == Valid()
        assert out.conclusion.ty == parse_ty("a")
        assert out.children[1].rule == "TopU"

    def test_identity_body(self):
        g = Basis.of(y=parse_ty("a"))
        d = infer_bounded(T1, g, Var("y"), parse_ty("a"), fuel=10).derivation
        out = expand_derivation(T1, d, "x", Var("x"), Var("y"))
        assert check_derivation(T1, out) == Valid()
        assert alpha_eq(out.conclusion.term, parse_term(r"(\x.x) y"))

    def test_park_rebuilds_omega(self):
        omega2 = parse_term(r"\x.x x")
        d = infer_bounded(PARK, Basis(), substitute(parse_term("x x"), "x", omega2),
                          parse_ty("c"), fuel=5000).derivation
        out = expand_derivation(PARK, d, "x", parse_term("x x"), omega2)
        assert check_derivation(PARK, out) == Valid()
        assert alpha_eq(out.conclusion.term, OMEGA)
        assert out.conclusion.ty == parse_ty("c")

    def test_mismatched_subject_rejected(self):
        g = Basis.of(y=parse_ty("a"))
        d = infer_bounded(T1, g, Var("y"), parse_ty("a"), fuel=10).derivation
        with pytest.raises(InvalidInput):
            expand_derivation(T1, d, "x", Var("x"), Var("z"))

    @given(terms, st.sampled_from(["x", "y"]),
           st.sampled_from([r"\w.w", r"\w.w w", "y"]), t1_types)
    @settings(max_examples=200)
    def test_round_trip_property(self, m, x, n_src, a):
        n = parse_term(n_src)
        sub = substitute(m, x, n)
        g = Basis.of(**{v: parse_ty("a & b") for v in free_vars(sub) | (free_vars(m) - {x})})
        out = infer_bounded(T1, g, sub, a, fuel=200)
        if not isinstance(out, Found):
            return
        expanded = expand_derivation(T1, out.derivation, x, m, n)
        assert check_derivation(T1, expanded) == Valid()
        c = expanded.conclusion
        assert c.basis == g and c.ty == canonicalize(a)
        assert isinstance(c.term, App) and isinstance(c.term.fun, Abs)
        assert alpha_eq(c.term.arg, n)
        assert alpha_eq(substitute(c.term.fun.body, c.term.fun.binder, n), sub)


class TestAdmissible:
    def _some_derivation(self):
        g = Basis.of(y=parse_ty("c1"))
        return infer_bounded(T0, g, parse_term(r"(\x.x) y"), parse_ty("c0"), fuel=2000).derivation

    def test_weaken_revalidates(self):
        d = self._some_derivation()
        out = weaken(T0, d, "z", parse_ty("c0 -> c1"))
        assert check_derivation(T0, out) == Valid()
        assert out.conclusion.basis.get("z") == parse_ty("c0 -> c1")

    def test_weaken_rejects_bound_name(self):
        d = self._some_derivation()
        with pytest.raises(InvalidInput):
            weaken(T0, d, "y", parse_ty("c0"))

    def test_strengthen_inverts_weaken(self):
        d = self._some_derivation()
        out = strengthen(T0, weaken(T0, d, "z", parse_ty("c0")), "z")
        assert out == d

    def test_strengthen_rejects_used_variable(self):
        d = self._some_derivation()
        with pytest.raises(InvalidInput):
            strengthen(T0, d, "y")

    def test_le_left_revalidates(self):
        g = Basis.of(y=parse_ty("a"))
        d = infer_bounded(T1, g, Var("y"), parse_ty("a"), fuel=10).derivation
        out = le_left(T1, d, "y", parse_ty("a & b"))
        assert check_derivation(T1, out) == Valid()
        assert out.conclusion.basis.get("y") == canonicalize(parse_ty("a & b"))
        assert out.conclusion.ty == parse_ty("a")

    def test_le_left_requires_derivable_bound(self):
        g = Basis.of(y=parse_ty("a"))
        d = infer_bounded(T1, g, Var("y"), parse_ty("a"), fuel=10).derivation
        with pytest.raises(InvalidInput):
            le_left(T1, d, "y", parse_ty("b"))

    @given(terms, t1_types)
    @settings(max_examples=100)
    def test_weaken_then_le_left_on_random_derivations(self, m, a):
        g = Basis.of(**{x: parse_ty("a") for x in free_vars(m)})
        assume("w" not in free_vars(m))
        out = infer_bounded(T1, g, m, a, fuel=200)
        if not isinstance(out, Found):
            return
        try:
            widened = weaken(T1, out.derivation, "w", parse_ty("b"))
        except InvalidInput:  # binder named w inside the subject
            return
        assert check_derivation(T1, widened) == Valid()
        narrowed = le_left(T1, widened, "w", parse_ty("a & b"))
        assert check_derivation(T1, narrowed) == Valid()


class TestFilters:
    def test_up_single_generator(self):
        u = build_universe(T1, [parse_ty("a"), parse_ty("b")], 2)
        f = filter_up(T1, u, [parse_ty("a")])
        members = filter_members(T1, f)
        assert members == frozenset({TOP, parse_ty("a")})

    def test_up_empty_is_bottom(self):
        u = build_universe(T1, [parse_ty("a")], 2)
        f = filter_up(T1, u, [])
        assert filter_members(T1, f) == frozenset({TOP})

    def test_up_contains_meets(self):
        u = build_universe(T1, [parse_ty("a"), parse_ty("b")], 2)
        f = filter_up(T1, u, [parse_ty("a"), parse_ty("b")])
        assert filter_contains(T1, f, parse_ty("a & b"))

    def test_up_drops_redundant_generators(self):
        u = build_universe(T1, [parse_ty("a"), parse_ty("b")], 2)
        f = filter_up(T1, u, [parse_ty("a"), parse_ty("a & b")])
        assert f.generators == frozenset({canonicalize(parse_ty("a & b"))})

    def test_up_rejects_outside_generators(self):
        u = build_universe(T1, [parse_ty("a")], 1)
        with pytest.raises(InvalidInput):
            filter_up(T1, u, [parse_ty("b -> a & b")])

    def test_apply_instance(self):
        u = build_universe(T1, [parse_ty("b -> a"), parse_ty("b")], 2)
        f = filter_up(T1, u, [parse_ty("b -> a")])
        g = filter_up(T1, u, [parse_ty("b")])
        out = filter_apply(T1, f, g)
        assert filter_contains(T1, out, parse_ty("a"))

    def test_apply_requires_shared_universe(self):
        u1 = build_universe(T1, [parse_ty("a")], 1)
        u2 = build_universe(T1, [parse_ty("b")], 1)
        with pytest.raises(InvalidInput):
            filter_apply(T1, FilterRep(u1, frozenset()), FilterRep(u2, frozenset()))

    def test_apply_on_bottom_gives_bottom(self):
        u = build_universe(T1, [parse_ty("b -> a"), parse_ty("b")], 2)
        bottom = filter_up(T1, u, [])
        out = filter_apply(T1, bottom, filter_up(T1, u, [parse_ty("b")]))
        assert filter_members(T1, out) == frozenset({TOP})

    @given(st.lists(st.sampled_from(["a", "b", "b -> a", "a & b"]), max_size=3),
           st.lists(st.sampled_from(["a", "b", "b -> a", "a & b"]), max_size=3),
           st.lists(st.sampled_from(["a", "b"]), max_size=2),
           st.lists(st.sampled_from(["a", "b"]), max_size=2))
    @settings(max_examples=200)
    def test_apply_monotone(self, f1, f2, g1, g2):
        seeds = [parse_ty(s) for s in ["a", "b", "b -> a", "a & b"]]
        u = build_universe(T1, seeds, 2)
        small_f = filter_up(T1, u, [parse_ty(s) for s in f1])
        big_f = filter_up(T1, u, [parse_ty(s) for s in f1 + f2])
        small_g = filter_up(T1, u, [parse_ty(s) for s in g1])
        big_g = filter_up(T1, u, [parse_ty(s) for s in g1 + g2])
        lo = filter_members(T1, filter_apply(T1, small_f, small_g))
        hi = filter_members(T1, filter_apply(T1, big_f, big_g))
        assert lo <= hi

    def test_interpret_variable(self):
        u = build_universe(T1, [parse_ty("a"), parse_ty("b")], 2)
        env = {"x": filter_up(T1, u, [parse_ty("a")])}
        out = interpret_term_bounded(T1, Var("x"), env)
        assert filter_contains(T1, out, parse_ty("a"))

    def test_interpret_omega_in_park(self):
        out = interpret_term_bounded(PARK, OMEGA, {}, fuel=1500)
        assert filter_contains(PARK, out, parse_ty("c"))

    def test_interpret_omega_in_tcdz_is_bottom(self):
        out = interpret_term_bounded(TCDZ, OMEGA, {}, fuel=300)
        for member in filter_members(TCDZ, out):
            assert isinstance(is_top_equiv(TCDZ, member), Proven)

    def test_interpret_requires_covering_env(self):
        with pytest.raises(InvalidInput):
            interpret_term_bounded(T1, Var("x"), {})
