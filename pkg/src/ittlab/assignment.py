"""Type assignment: derivation certificates, checking, bounded search,
and the subject-expansion transformation.

Rules: Ax, TopU (every term gets U), ArrI, ArrE, CapI, Le (subsumption via a
subtyping certificate).  Terms inside judgments compare by alpha-equivalence,
types modulo canonical form; neither checker nor transformations ever search.
infer_bounded is the only searcher and is honest about its bounds: Found
carries a checkable derivation, NotFoundWithinFuel asserts nothing.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidInput
from .subtyping import (
    DEFAULT_CAP,
    DEFAULT_WIDTH,
    Proven,
    SubProof,
    Valid,
    build_universe,
    check_subproof,
    derive_le,
    saturated_ctx,
)
from .terms import (
    Abs,
    App,
    Term,
    Var,
    free_vars,
    fresh_name,
    freshen,
    head_step,
    substitute,
)
from .theory import TheorySpec
from .types import (
    TOP,
    Arrow,
    Inter,
    Ty,
    canonicalize,
    inter_parts,
    make_inter,
    print_ty,
    ty_key,
)


@dataclass(frozen=True)
class Basis:
    """Finite map from variables to canonical types, at most one binding each."""

    bindings: tuple[tuple[str, Ty], ...] = ()

    def __post_init__(self):
        seen = set()
        for x, _ in self.bindings:
            if x in seen:
                raise InvalidInput(f"variable {x!r} bound twice in basis")
            seen.add(x)
        norm = tuple(sorted((x, canonicalize(a)) for x, a in self.bindings))
        object.__setattr__(self, "bindings", norm)

    @staticmethod
    def of(mapping: dict[str, Ty] | None = None, **kw: Ty) -> "Basis":
        items = dict(mapping or {})
        items.update(kw)
        return Basis(tuple(items.items()))

    def get(self, x: str) -> Ty | None:
        for y, a in self.bindings:
            if y == x:
                return a
        return None

    def names(self) -> tuple[str, ...]:
        return tuple(x for x, _ in self.bindings)

    def extend(self, x: str, a: Ty) -> "Basis":
        if self.get(x) is not None:
            raise InvalidInput(f"variable {x!r} already bound")
        return Basis(self.bindings + ((x, a),))

    def without(self, x: str) -> "Basis":
        return Basis(tuple(b for b in self.bindings if b[0] != x))

    def types(self) -> tuple[Ty, ...]:
        return tuple(a for _, a in self.bindings)


def basis_join(g1: Basis, g2: Basis) -> Basis:
    """Shared variables get the & of their types; the rest carry over."""
    out = dict(g1.bindings)
    for x, a in g2.bindings:
        out[x] = canonicalize(Inter(out[x], a)) if x in out else a
    return Basis(tuple(out.items()))


@dataclass(frozen=True)
class Judgment:
    basis: Basis
    term: Term
    ty: Ty


@dataclass(frozen=True)
class Derivation:
    rule: str  # Ax | TopU | ArrI | ArrE | CapI | Le
    conclusion: Judgment
    children: tuple["Derivation", ...] = ()
    sub: SubProof | None = None


@dataclass(frozen=True)
class InvalidDerivation:
    path: tuple[int, ...]
    reason: str


def _node_reason(t: TheorySpec, d: Derivation) -> str | None:
    g, m, a = d.conclusion.basis, d.conclusion.term, canonicalize(d.conclusion.ty)
    r = d.rule
    kids = d.children
    if r != "Le" and d.sub is not None:
        return "only Le nodes carry a subtyping certificate"

    if r == "Ax":
        if kids or not isinstance(m, Var):
            return "Ax types a variable with no children"
        bound = g.get(m.name)
        if bound is None or canonicalize(bound) != a:
            return f"basis does not bind {m.name} at the concluded type"
    elif r == "TopU":
        if kids or a != TOP:
            return "TopU concludes type U with no children"
    elif r == "ArrI":
        if len(kids) != 1 or not isinstance(m, Abs):
            return "ArrI types an abstraction from one child"
        if not isinstance(a, Arrow):
            return "ArrI concludes an arrow type"
        ch = kids[0].conclusion
        try:
            want = g.extend(m.binder, a.dom)
        except InvalidInput:
            return f"binder {m.binder!r} shadows a basis variable"
        if ch.basis != want:
            return "ArrI child basis must extend the conclusion basis by the binder"
        if ch.term != m.body:
            return "ArrI child must type the abstraction body"
        if canonicalize(ch.ty) != a.cod:
            return "ArrI child type must be the arrow codomain"
    elif r == "ArrE":
        if len(kids) != 2 or not isinstance(m, App):
            return "ArrE types an application from two children"
        cf, cx = kids[0].conclusion, kids[1].conclusion
        if cf.basis != g or cx.basis != g:
            return "ArrE children share the conclusion basis"
        if cf.term != m.fun or cx.term != m.arg:
            return "ArrE children must type the function and the argument"
        fty = canonicalize(cf.ty)
        if not isinstance(fty, Arrow):
            return "ArrE function child needs an arrow type"
        if fty.dom != canonicalize(cx.ty) or fty.cod != a:
            return "ArrE argument/result types must match the function arrow"
    elif r == "CapI":
        if len(kids) != 2:
            return "CapI joins exactly two children"
        c1, c2 = kids[0].conclusion, kids[1].conclusion
        if c1.basis != g or c2.basis != g or c1.term != m or c2.term != m:
            return "CapI children type the same term under the same basis"
        if canonicalize(Inter(c1.ty, c2.ty)) != a:
            return "CapI concludes the & of its children's types"
    elif r == "Le":
        if len(kids) != 1 or d.sub is None:
            return "Le has one child and a subtyping certificate"
        ch = kids[0].conclusion
        if ch.basis != g or ch.term != m:
            return "Le keeps basis and term"
        lo, hi = d.sub.conclusion
        if canonicalize(lo) != canonicalize(ch.ty) or canonicalize(hi) != a:
            return "Le certificate must prove child type <= concluded type"
        sub_ok = check_subproof(t, d.sub)
        if sub_ok != Valid():
            return f"subtyping certificate invalid: {sub_ok.reason}"
    else:
        return f"unknown rule {r!r}"
    return None


def check_derivation(t: TheorySpec, d: Derivation) -> Valid | InvalidDerivation:
    """Validate every node against the six schemata; Le via check_subproof."""
    stack: list[tuple[Derivation, tuple[int, ...]]] = [(d, ())]
    while stack:
        node, path = stack.pop()
        reason = _node_reason(t, node)
        if reason is not None:
            return InvalidDerivation(path, reason)
        stack.extend((ch, path + (i,)) for i, ch in enumerate(node.children))
    return Valid()


# -- bounded goal-directed search ---------------------------------------------


@dataclass(frozen=True)
class Found:
    derivation: Derivation


@dataclass(frozen=True)
class NotFoundWithinFuel:
    fuel: int


class _FuelOut(Exception):
    pass


class _Search:
    def __init__(self, t: TheorySpec, ctx, fuel: int):
        self.t = t
        self.ctx = ctx
        self.fuel = fuel
        self.memo: dict = {}
        self.in_progress: set = set()
        self.cycle_events = 0
        self.arrows = sorted(
            (m for m in ctx.universe.members if isinstance(m, Arrow)), key=ty_key
        )

    def _le_wrap(self, d: Derivation, a: Ty) -> Derivation:
        """Subsume d's type up to a (both canonical) when they differ."""
        b = canonicalize(d.conclusion.ty)
        if b == a:
            return d
        sub = self.ctx.proof(b, a)
        concl = Judgment(d.conclusion.basis, d.conclusion.term, a)
        return Derivation("Le", concl, (d,), sub)

    def goal(self, g: Basis, m: Term, a: Ty) -> Derivation | None:
        a = canonicalize(a)
        key = (g, m, a)
        if key in self.memo:
            return self.memo[key]
        if key in self.in_progress:
            self.cycle_events += 1
            return None
        if self.fuel <= 0:
            raise _FuelOut
        self.fuel -= 1
        self.in_progress.add(key)
        before = self.cycle_events
        try:
            d = self._solve(g, m, a)
        finally:
            self.in_progress.discard(key)
        if d is not None or self.cycle_events == before:
            self.memo[key] = d
        return d

    def _solve(self, g: Basis, m: Term, a: Ty) -> Derivation | None:
        ctx = self.ctx
        if a == TOP:
            return Derivation("TopU", Judgment(g, m, TOP))
        if ctx.holds(TOP, a):
            top = Derivation("TopU", Judgment(g, m, TOP))
            return self._le_wrap(top, a)
        if isinstance(a, Inter) and isinstance(m, (Abs, App)):
            parts = inter_parts(a)
            acc = self.goal(g, m, parts[0])
            if acc is not None:
                for p in parts[1:]:
                    nxt = self.goal(g, m, p)
                    if nxt is None:
                        acc = None
                        break
                    joined = canonicalize(Inter(acc.conclusion.ty, p))
                    acc = Derivation("CapI", Judgment(g, m, joined), (acc, nxt))
                if acc is not None:
                    return acc
        if isinstance(m, Var):
            bound = g.get(m.name)
            if bound is None or not ctx.holds(bound, a):
                return None
            ax = Derivation("Ax", Judgment(g, m, canonicalize(bound)))
            return self._le_wrap(ax, a)
        if isinstance(m, App):
            return self._solve_app(g, m, a)
        if isinstance(m, Abs):
            return self._solve_abs(g, m, a)
        return None

    def _solve_app(self, g: Basis, m: App, a: Ty) -> Derivation | None:
        ctx = self.ctx
        singles = [f for f in self.arrows if ctx.holds(f.cod, a)]
        for f in singles:
            df = self.goal(g, m.fun, f)
            if df is None:
                continue
            dx = self.goal(g, m.arg, f.dom)
            if dx is None:
                continue
            app = Derivation("ArrE", Judgment(g, m, f.cod), (df, dx))
            return self._le_wrap(app, a)
        # pair fallback: a common-domain pair of arrows whose &-codomain fits,
        # usable when the &-arrow itself is a universe member (ArrowCap wraps it)
        for i, f1 in enumerate(self.arrows):
            for f2 in self.arrows[i + 1:]:
                if f1.dom != f2.dom:
                    continue
                joined_cod = canonicalize(Inter(f1.cod, f2.cod))
                joined = Arrow(f1.dom, joined_cod)
                if joined not in ctx.universe.members:
                    continue
                if not ctx.holds(joined_cod, a):
                    continue
                if not ctx.holds(canonicalize(Inter(f1, f2)), joined):
                    continue
                d1 = self.goal(g, m.fun, f1)
                if d1 is None:
                    continue
                d2 = self.goal(g, m.fun, f2)
                if d2 is None:
                    continue
                cap = Derivation(
                    "CapI",
                    Judgment(g, m.fun, canonicalize(Inter(f1, f2))),
                    (d1, d2),
                )
                fn = Derivation(
                    "Le",
                    Judgment(g, m.fun, joined),
                    (cap,),
                    ctx.proof(canonicalize(Inter(f1, f2)), joined),
                )
                dx = self.goal(g, m.arg, f1.dom)
                if dx is None:
                    continue
                app = Derivation("ArrE", Judgment(g, m, joined_cod), (fn, dx))
                return self._le_wrap(app, a)
        return None

    def _solve_abs(self, g: Basis, m: Abs, a: Ty) -> Derivation | None:
        ctx = self.ctx
        x, body = m.binder, m.body
        if g.get(x) is not None:
            nx = fresh_name(x, set(g.names()) | free_vars(body))
            body = substitute(body, x, Var(nx))
            x = nx
            m = Abs(x, body)
        candidates = [f for f in self.arrows if ctx.holds(f, a)]
        for f in candidates:
            db = self.goal(g.extend(x, f.dom), body, f.cod)
            if db is None:
                continue
            arr = Derivation("ArrI", Judgment(g, m, f), (db,))
            return self._le_wrap(arr, a)
        # pair fallback: an & of two arrows sitting below the target
        for i, f1 in enumerate(self.arrows):
            for f2 in self.arrows[i + 1:]:
                joined = canonicalize(Inter(f1, f2))
                if not ctx.holds(joined, a):
                    continue
                d1 = self.goal(g, m, f1)
                if d1 is None:
                    continue
                d2 = self.goal(g, m, f2)
                if d2 is None:
                    continue
                cap = Derivation("CapI", Judgment(g, m, joined), (d1, d2))
                return self._le_wrap(cap, a)
        return None


def infer_bounded(
    t: TheorySpec,
    g: Basis,
    m: Term,
    target: Ty,
    fuel: int = 10_000,
    inter_width: int = DEFAULT_WIDTH,
    cap: int = DEFAULT_CAP,
) -> Found | NotFoundWithinFuel:
    """Goal-directed, memoised, fuel-bounded search for g |- m : target.

    Arrow candidates come from the universe seeded by the target, the basis
    types and the axiom sides; Found derivations always re-check Valid.
    """
    if fuel < 0:
        raise InvalidInput("fuel must be nonnegative")
    universe = build_universe(t, [target, *g.types()], inter_width, cap)
    ctx = saturated_ctx(t, universe)
    search = _Search(t, ctx, fuel)
    try:
        d = search.goal(g, m, target)
    except _FuelOut:
        return NotFoundWithinFuel(fuel)
    if d is None:
        return NotFoundWithinFuel(fuel)
    return Found(d)


@dataclass(frozen=True)
class Preserved:
    derivation: Derivation


def subject_reduction_probe(
    t: TheorySpec,
    d: Derivation,
    fuel: int = 10_000,
    inter_width: int = DEFAULT_WIDTH,
    cap: int = DEFAULT_CAP,
) -> Preserved | NotFoundWithinFuel:
    """Contract the head redex of d's subject and re-search the same judgment."""
    ok = check_derivation(t, d)
    if ok != Valid():
        raise InvalidInput(f"derivation invalid: {ok.reason}")
    reduct = head_step(d.conclusion.term)
    if reduct is None:
        raise InvalidInput("subject has no head redex")
    out = infer_bounded(
        t, d.conclusion.basis, reduct, d.conclusion.ty, fuel, inter_width, cap
    )
    if isinstance(out, Found):
        return Preserved(out.derivation)
    return out


# -- admissible transformations -------------------------------------------------


def _all_binders(d: Derivation) -> set[str]:
    out: set[str] = set()
    stack = [d]
    while stack:
        node = stack.pop()
        if node.rule == "ArrI":
            out.add(node.conclusion.term.binder)
        stack.extend(node.children)
    return out


def _rebase(d: Derivation, basis: Basis) -> Derivation:
    """Rebuild d with a new root basis, re-extending at each ArrI."""
    concl = Judgment(basis, d.conclusion.term, d.conclusion.ty)
    if d.rule == "ArrI":
        arrow = canonicalize(d.conclusion.ty)
        child_basis = basis.extend(d.conclusion.term.binder, arrow.dom)
        kids = (_rebase(d.children[0], child_basis),)
    else:
        kids = tuple(_rebase(ch, basis) for ch in d.children)
    return Derivation(d.rule, concl, kids, d.sub)


def weaken(t: TheorySpec, d: Derivation, x: str, b: Ty) -> Derivation:
    """Admissible weakening: insert an unused binding x:b everywhere."""
    if d.conclusion.basis.get(x) is not None:
        raise InvalidInput(f"{x!r} already bound")
    if x in _all_binders(d):
        raise InvalidInput(f"{x!r} collides with a binder inside the derivation")
    out = _rebase(d, d.conclusion.basis.extend(x, b))
    ok = check_derivation(t, out)
    if ok != Valid():
        raise InvalidInput(f"weakening broke the derivation: {ok.reason}")
    return out


def strengthen(t: TheorySpec, d: Derivation, x: str) -> Derivation:
    """Drop an unused binding x from the whole derivation."""
    if d.conclusion.basis.get(x) is None:
        raise InvalidInput(f"{x!r} not bound at the root")
    if x in free_vars(d.conclusion.term):
        raise InvalidInput(f"{x!r} occurs free in the subject")
    out = _rebase(d, d.conclusion.basis.without(x))
    ok = check_derivation(t, out)
    if ok != Valid():
        raise InvalidInput(f"strengthening broke the derivation: {ok.reason}")
    return out


def le_left(
    t: TheorySpec,
    d: Derivation,
    x: str,
    b_new: Ty,
    inter_width: int = DEFAULT_WIDTH,
) -> Derivation:
    """Admissible (<=-L): replace x's binding by a smaller type b_new."""
    b_old = d.conclusion.basis.get(x)
    if b_old is None:
        raise InvalidInput(f"{x!r} not bound at the root")
    verdict = derive_le(t, b_new, b_old, inter_width)
    if not isinstance(verdict, Proven):
        raise InvalidInput(
            f"{print_ty(b_new)} <= {print_ty(b_old)} not derivable within bounds"
        )

    def go(node: Derivation, basis: Basis) -> Derivation:
        concl = Judgment(basis, node.conclusion.term, node.conclusion.ty)
        if node.rule == "Ax" and node.conclusion.term == Var(x):
            ax = Derivation("Ax", Judgment(basis, node.conclusion.term, canonicalize(b_new)))
            if canonicalize(b_new) == canonicalize(b_old):
                return ax
            return Derivation("Le", concl, (ax,), verdict.proof)
        if node.rule == "ArrI":
            arrow = canonicalize(node.conclusion.ty)
            binder = node.conclusion.term.binder
            if binder == x:  # shadowed below: keep subtree, only swap bases
                kids = (_rebase(node.children[0], basis.extend(binder, arrow.dom)),)
            else:
                kids = (go(node.children[0], basis.extend(binder, arrow.dom)),)
            return Derivation("ArrI", concl, kids, node.sub)
        kids = tuple(go(ch, basis) for ch in node.children)
        return Derivation(node.rule, concl, kids, node.sub)

    root_basis = d.conclusion.basis.without(x).extend(x, b_new)
    out = go(d, root_basis)
    ok = check_derivation(t, out)
    if ok != Valid():
        raise InvalidInput(f"(<=-L) broke the derivation: {ok.reason}")
    return out


# -- subject expansion ----------------------------------------------------------


def _retarget(d: Derivation, target: Term, ren: dict[str, str]) -> Derivation:
    """Rename d's subjects to the alpha-equal target, scoped binder by binder."""

    def basis_ren(b: Basis) -> Basis:
        return Basis(tuple((ren.get(x, x), a) for x, a in b.bindings))

    g = basis_ren(d.conclusion.basis)
    concl = Judgment(g, target, d.conclusion.ty)
    r = d.rule
    if r in ("Ax", "TopU") and not d.children:
        return Derivation(r, concl, (), d.sub)
    if r == "ArrI":
        old = d.conclusion.term
        if not (isinstance(old, Abs) and isinstance(target, Abs)):
            raise InvalidInput("ArrI node does not match an abstraction")
        inner = dict(ren)
        inner[old.binder] = target.binder
        return Derivation(r, concl, (_retarget(d.children[0], target.body, inner),), d.sub)
    if r == "ArrE":
        old = d.conclusion.term
        if not (isinstance(old, App) and isinstance(target, App)):
            raise InvalidInput("ArrE node does not match an application")
        return Derivation(
            r,
            concl,
            (
                _retarget(d.children[0], target.fun, ren),
                _retarget(d.children[1], target.arg, ren),
            ),
            d.sub,
        )
    # CapI and Le keep the subject
    return Derivation(
        r, concl, tuple(_retarget(ch, target, ren) for ch in d.children), d.sub
    )


def _collect_occurrences(m: Term, d: Derivation, x: str, acc: list[Derivation]) -> None:
    if m == Var(x):
        acc.append(d)
        return
    if d.rule in ("Le", "CapI"):
        for ch in d.children:
            _collect_occurrences(m, ch, x, acc)
        return
    if d.rule == "TopU" or d.rule == "Ax":
        return
    if d.rule == "ArrI":
        _collect_occurrences(m.body, d.children[0], x, acc)
        return
    if d.rule == "ArrE":
        _collect_occurrences(m.fun, d.children[0], x, acc)
        _collect_occurrences(m.arg, d.children[1], x, acc)
        return
    raise InvalidInput(f"unknown rule {d.rule!r}")


def _insert_binding(d: Derivation, x: str, ty: Ty) -> Derivation:
    g = d.conclusion.basis.extend(x, ty)
    concl = Judgment(g, d.conclusion.term, d.conclusion.ty)
    return Derivation(
        d.rule, concl, tuple(_insert_binding(ch, x, ty) for ch in d.children), d.sub
    )


def _rebuild_with_var(m: Term, d: Derivation, x: str, x_ty: Ty) -> Derivation:
    """Replace each occurrence's derivation of n by Ax(x) plus a projection."""
    if m == Var(x):
        g = d.conclusion.basis.extend(x, x_ty)
        want = canonicalize(d.conclusion.ty)
        if want == TOP and x_ty != TOP:
            return Derivation("TopU", Judgment(g, Var(x), TOP))
        ax = Derivation("Ax", Judgment(g, Var(x), x_ty))
        if want == x_ty:
            return ax
        parts = inter_parts(x_ty)
        rule = "IncL" if parts and want == parts[0] else "IncR"
        sub = SubProof(rule, (x_ty, want))
        return Derivation("Le", Judgment(g, Var(x), want), (ax,), sub)
    g = d.conclusion.basis.extend(x, x_ty)
    concl = Judgment(g, m, d.conclusion.ty)
    if d.rule == "ArrI":
        kids = (_rebuild_with_var(m.body, d.children[0], x, x_ty),)
    elif d.rule == "ArrE":
        kids = (
            _rebuild_with_var(m.fun, d.children[0], x, x_ty),
            _rebuild_with_var(m.arg, d.children[1], x, x_ty),
        )
    else:  # Ax, TopU, CapI, Le keep the subject shape
        kids = tuple(_rebuild_with_var(m, ch, x, x_ty) for ch in d.children)
    return Derivation(d.rule, concl, kids, d.sub)


def expand_derivation(
    t: TheorySpec, d: Derivation, x: str, m: Term, n: Term
) -> Derivation:
    """From a derivation of G |- m[x:=n] : A build one of G |- (\\x.m) n : A.

    The occurrences of n in the subject are retyped as the variable x at the
    & of their types (U when x never occurs), the abstraction is introduced,
    and n is typed once per distinct occurrence type, joined by CapI.
    """
    ok = check_derivation(t, d)
    if ok != Valid():
        raise InvalidInput(f"derivation invalid: {ok.reason}")
    g = d.conclusion.basis
    if x in g.names():
        # the new binder would shadow a basis variable; the rebuilt basis
        # g + x must stay well formed, so rename (result is alpha-equal)
        x2 = fresh_name(x, set(g.names()) | free_vars(m) | free_vars(n))
        m = substitute(m, x, Var(x2))
        x = x2
    m = freshen(m, avoid={x} | free_vars(n) | set(g.names()) | free_vars(m))
    expected = substitute(m, x, n)
    if d.conclusion.term != expected:
        raise InvalidInput("derivation subject is not m[x:=n]")
    d = _retarget(d, expected, {})

    occs: list[Derivation] = []
    _collect_occurrences(m, d, x, occs)

    by_ty: dict[Ty, Derivation] = {}
    for o in occs:
        by_ty.setdefault(canonicalize(o.conclusion.ty), o)
    if len(by_ty) > 1:
        by_ty.pop(TOP, None)  # a U-typed occurrence adds nothing to the &
    tys = sorted(by_ty, key=ty_key)
    x_ty = canonicalize(make_inter(tys)) if tys else TOP

    a = canonicalize(d.conclusion.ty)
    body = _rebuild_with_var(m, d, x, x_ty)
    lam = Derivation(
        "ArrI", Judgment(g, Abs(x, m), Arrow(x_ty, a)), (body,)
    )

    if not tys:
        arg: Derivation = Derivation("TopU", Judgment(g, n, TOP))
    else:
        ds = [_rebase(by_ty[ty], g) for ty in tys]
        arg = ds[0]
        for nxt in ds[1:]:
            joined = canonicalize(Inter(arg.conclusion.ty, nxt.conclusion.ty))
            arg = Derivation("CapI", Judgment(g, n, joined), (arg, nxt))

    out = Derivation("ArrE", Judgment(g, App(Abs(x, m), n), a), (lam, arg))
    final = check_derivation(t, out)
    if final != Valid():
        raise InvalidInput(f"expansion produced an invalid derivation: {final.reason}")
    return out
