"""Bounded subtyping with proof certificates.

derive_le saturates the pairs of a finite type universe under the base rules
(Refl, IncL, IncR, Utop, Glb, Trans, arrow congruence) plus whatever flagged
schemes the theory enables, then reads the queried pair off the fixed point.
Verdicts are three-valued by design: Proven carries a replayable certificate,
UnknownWithin only says the pair was not reached inside this universe.  Trans
can pass through types outside any finite universe, so refutation is never
asserted.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Union

from .errors import InvalidInput, UniverseTooLarge
from .theory import RuleFlag, TheorySpec
from .types import (
    TOP,
    Arrow,
    Inter,
    Ty,
    canonicalize,
    inter_parts,
    make_inter,
    subterms,
    ty_key,
)

DEFAULT_WIDTH = 2
DEFAULT_CAP = 20_000


@dataclass(frozen=True)
class Universe:
    members: frozenset[Ty]
    inter_width: int


def build_universe(
    t: TheorySpec,
    seeds: list[Ty] | tuple[Ty, ...],
    inter_width: int = DEFAULT_WIDTH,
    cap: int = DEFAULT_CAP,
) -> Universe:
    """Subterm closure of seeds plus axiom sides plus U, widened by all
    canonical intersections of 2..inter_width distinct closure members."""
    if inter_width < 1:
        raise InvalidInput("inter_width must be >= 1")
    base: set[Ty] = {TOP}
    for s in seeds:
        base.add(canonicalize(s))
    for lhs, rhs in t.le_axiom_pairs():
        base.add(canonicalize(lhs))
        base.add(canonicalize(rhs))
    closed: set[Ty] = set()
    for m in base:
        closed.update(subterms(m))  # subterms of canonical forms stay canonical
    members = set(closed)
    pool = sorted(closed, key=ty_key)
    for k in range(2, inter_width + 1):
        for combo in combinations(pool, k):
            members.add(canonicalize(make_inter(combo)))
            if len(members) > cap:
                raise UniverseTooLarge(f"universe exceeded {cap} members")
    if len(members) > cap:
        raise UniverseTooLarge(f"universe exceeded {cap} members")
    return Universe(frozenset(members), inter_width)


@dataclass(frozen=True)
class SubProof:
    rule: str
    conclusion: tuple[Ty, Ty]
    premises: tuple["SubProof", ...] = ()


@dataclass(frozen=True)
class Proven:
    proof: SubProof


@dataclass(frozen=True)
class UnknownWithin:
    universe_size: int
    inter_width: int


SubtypeVerdict = Union[Proven, UnknownWithin]

Pair = tuple[Ty, Ty]


class SubtypeCtx:
    """Worklist saturation over one universe; reusable across queries.

    Every fact records the rule and premise facts that first produced it.
    Premises always predate their consequence, so justifications form a DAG
    and proofs rebuild without search.
    """

    def __init__(self, theory: TheorySpec, universe: Universe):
        self.theory = theory
        self.universe = universe
        self.members = sorted(universe.members, key=ty_key)
        self.facts: set[Pair] = set()
        self.just: dict[Pair, tuple[str, tuple[Pair, ...]]] = {}
        self.queue: deque[Pair] = deque()
        self.succs: dict[Ty, set[Ty]] = defaultdict(set)
        self.preds: dict[Ty, set[Ty]] = defaultdict(set)
        self.arrows = [m for m in self.members if isinstance(m, Arrow)]
        self.arrows_by_dom: dict[Ty, list[Arrow]] = defaultdict(list)
        self.arrows_by_cod: dict[Ty, list[Arrow]] = defaultdict(list)
        for m in self.arrows:
            self.arrows_by_dom[m.dom].append(m)
            self.arrows_by_cod[m.cod].append(m)
        self.inters = [m for m in self.members if isinstance(m, Inter)]
        self.part_to_inters: dict[Ty, list[Ty]] = defaultdict(list)
        for z in self.inters:
            for p in inter_parts(z):
                self.part_to_inters[p].append(z)
        self._saturated = False
        self._seed()

    def _add(self, fact: Pair, rule: str, premises: tuple[Pair, ...]) -> None:
        if fact in self.facts:
            return
        a, b = fact
        if a not in self.universe.members or b not in self.universe.members:
            return
        self.facts.add(fact)
        self.just[fact] = (rule, premises)
        self.queue.append(fact)
        self.succs[a].add(b)
        self.preds[b].add(a)

    def _seed(self) -> None:
        flags = self.theory.flags
        for m in self.members:
            self._add((m, m), "Refl", ())
        for lhs, rhs in self.theory.le_axiom_pairs():
            self._add((canonicalize(lhs), canonicalize(rhs)), "Axiom", ())
        for z in self.inters:
            parts = inter_parts(z)
            self._add((z, parts[0]), "IncL", ())
            for p in parts[1:]:
                self._add((z, p), "IncR", ())
        for m in self.members:
            self._add((m, TOP), "Utop", ())
        if RuleFlag.ARROW_TOP in flags:
            for m in self.arrows:
                if m.cod == TOP:
                    self._add((TOP, m), "ArrowTop", ())
        if RuleFlag.ARROW_CAP in flags:
            for z in self.inters:
                parts = inter_parts(z)
                if all(isinstance(p, Arrow) for p in parts):
                    doms = {p.dom for p in parts}
                    if len(doms) == 1:
                        rhs = canonicalize(
                            Arrow(parts[0].dom, make_inter([p.cod for p in parts]))
                        )
                        self._add((z, rhs), "ArrowCap", ())
                        self._add((rhs, z), "ArrowCap", ())

    def saturate(self) -> None:
        if self._saturated:
            return
        arrow_rule = RuleFlag.ARROW in self.theory.flags
        top_le = RuleFlag.TOP_LE in self.theory.flags
        while self.queue:
            fact = self.queue.popleft()
            if arrow_rule:
                self._fire_arrow_rule(fact)
            if top_le:
                x, y = fact
                if x == TOP and isinstance(y, Arrow):
                    self._add((TOP, y.cod), "TopLe", (fact,))
            self._fire_arr_cong(fact)
            self._fire_glb(fact)
            self._fire_trans(fact)
        self._saturated = True

    def _fire_arrow_rule(self, fact: Pair) -> None:
        x, y = fact
        # fact as the domain premise B' <= B of (->), with B' = x, B = y
        for f in self.arrows_by_dom.get(y, ()):
            for g in self.arrows_by_dom.get(x, ()):
                cods = (f.cod, g.cod)
                if cods in self.facts:
                    self._add((f, g), "ArrowRule", (fact, cods))
        # fact as the codomain premise A <= A', with A = x, A' = y
        for f in self.arrows_by_cod.get(x, ()):
            for g in self.arrows_by_cod.get(y, ()):
                doms = (g.dom, f.dom)
                if doms in self.facts:
                    self._add((f, g), "ArrowRule", (doms, fact))

    def _fire_arr_cong(self, fact: Pair) -> None:
        x, y = fact
        if (y, x) not in self.facts:
            return
        # x ~ y as the domains of congruent arrows
        for f in self.arrows_by_dom.get(x, ()):
            for g in self.arrows_by_dom.get(y, ()):
                if (f.cod, g.cod) in self.facts and (g.cod, f.cod) in self.facts:
                    prems = ((y, x), (x, y), (f.cod, g.cod), (g.cod, f.cod))
                    self._add((f, g), "ArrCong", prems)
                    self._add((g, f), "ArrCong", tuple(reversed(prems)))
        # x ~ y as the codomains
        for f in self.arrows_by_cod.get(x, ()):
            for g in self.arrows_by_cod.get(y, ()):
                if (g.dom, f.dom) in self.facts and (f.dom, g.dom) in self.facts:
                    prems = ((g.dom, f.dom), (f.dom, g.dom), (x, y), (y, x))
                    self._add((f, g), "ArrCong", prems)
                    self._add((g, f), "ArrCong", tuple(reversed(prems)))

    def _fire_glb(self, fact: Pair) -> None:
        x, y = fact
        for z in self.part_to_inters.get(y, ()):
            parts = inter_parts(z)
            if all((x, p) in self.facts for p in parts):
                self._add((x, z), "Glb", tuple((x, p) for p in parts))

    def _fire_trans(self, fact: Pair) -> None:
        x, y = fact
        for z in list(self.succs[y]):
            self._add((x, z), "Trans", (fact, (y, z)))
        for w in list(self.preds[x]):
            self._add((w, y), "Trans", ((w, x), fact))

    def holds(self, a: Ty, b: Ty) -> bool:
        assert self._saturated
        return (canonicalize(a), canonicalize(b)) in self.facts

    def proof(self, a: Ty, b: Ty) -> SubProof:
        root = (canonicalize(a), canonicalize(b))
        if root not in self.facts:
            raise InvalidInput("no saturated fact for the requested pair")
        memo: dict[Pair, SubProof] = {}
        stack = [root]
        while stack:
            fact = stack[-1]
            if fact in memo:
                stack.pop()
                continue
            rule, prems = self.just[fact]
            missing = [p for p in prems if p not in memo]
            if missing:
                stack.extend(missing)
            else:
                memo[fact] = SubProof(rule, fact, tuple(memo[p] for p in prems))
                stack.pop()
        return memo[root]


@lru_cache(maxsize=256)
def saturated_ctx(theory: TheorySpec, universe: Universe) -> SubtypeCtx:
    ctx = SubtypeCtx(theory, universe)
    ctx.saturate()
    return ctx


def derive_le(
    t: TheorySpec,
    a: Ty,
    b: Ty,
    inter_width: int = DEFAULT_WIDTH,
    cap: int = DEFAULT_CAP,
) -> SubtypeVerdict:
    universe = build_universe(t, [a, b], inter_width, cap)
    ctx = saturated_ctx(t, universe)
    if ctx.holds(a, b):
        return Proven(ctx.proof(a, b))
    return UnknownWithin(len(universe.members), inter_width)


def derive_equiv(
    t: TheorySpec,
    a: Ty,
    b: Ty,
    inter_width: int = DEFAULT_WIDTH,
    cap: int = DEFAULT_CAP,
) -> tuple[SubtypeVerdict, SubtypeVerdict]:
    """Both directions over one shared universe."""
    universe = build_universe(t, [a, b], inter_width, cap)
    ctx = saturated_ctx(t, universe)
    out = []
    for lo, hi in ((a, b), (b, a)):
        if ctx.holds(lo, hi):
            out.append(Proven(ctx.proof(lo, hi)))
        else:
            out.append(UnknownWithin(len(universe.members), inter_width))
    return out[0], out[1]


def is_top_equiv(
    t: TheorySpec, a: Ty, inter_width: int = DEFAULT_WIDTH, cap: int = DEFAULT_CAP
) -> SubtypeVerdict:
    """A <= U always holds, so A ~ U reduces to U <= A."""
    return derive_le(t, TOP, a, inter_width, cap)


# -- certificate checking --------------------------------------------------


@dataclass(frozen=True)
class Valid:
    pass


@dataclass(frozen=True)
class Invalid:
    path: tuple[int, ...]
    reason: str


_FLAG_FOR_RULE = {
    "ArrowTop": RuleFlag.ARROW_TOP,
    "ArrowCap": RuleFlag.ARROW_CAP,
    "ArrowRule": RuleFlag.ARROW,
    "TopLe": RuleFlag.TOP_LE,
}


def _node_error(t: TheorySpec, node: SubProof) -> str | None:
    a, b = (canonicalize(node.conclusion[0]), canonicalize(node.conclusion[1]))
    prems = [
        (canonicalize(ch.conclusion[0]), canonicalize(ch.conclusion[1]))
        for ch in node.premises
    ]
    r = node.rule
    flag = _FLAG_FOR_RULE.get(r)
    if flag is not None and flag not in t.flags:
        return f"rule {r} needs flag {flag.value!r}"

    if r == "Refl":
        if prems or a != b:
            return "Refl concludes A <= A with no premises"
    elif r == "Axiom":
        if prems:
            return "Axiom takes no premises"
        for lhs, rhs in t.le_axiom_pairs():
            if canonicalize(lhs) == a and canonicalize(rhs) == b:
                return None
        return "conclusion is not an instance of a declared axiom"
    elif r in ("IncL", "IncR"):
        if prems or not isinstance(a, Inter) or b not in inter_parts(a):
            return "Inc concludes Z <= P for a part P of intersection Z"
    elif r == "Utop":
        if prems or b != TOP:
            return "Utop concludes A <= U with no premises"
    elif r == "ArrowTop":
        if prems or a != TOP or not (isinstance(b, Arrow) and b.cod == TOP):
            return "ArrowTop concludes U <= B -> U"
    elif r == "ArrowCap":
        if prems:
            return "ArrowCap takes no premises"
        z, w = (a, b) if isinstance(a, Inter) else (b, a)
        parts = inter_parts(z) if isinstance(z, Inter) else ()
        ok = (
            isinstance(z, Inter)
            and isinstance(w, Arrow)
            and all(isinstance(p, Arrow) for p in parts)
            and len({p.dom for p in parts}) == 1
            and parts[0].dom == w.dom
            and canonicalize(make_inter([p.cod for p in parts])) == w.cod
        )
        if not ok:
            return "ArrowCap relates (B->A1)&..&(B->Ak) and B -> A1&..&Ak"
    elif r == "ArrowRule":
        ok = (
            isinstance(a, Arrow)
            and isinstance(b, Arrow)
            and prems == [(b.dom, a.dom), (a.cod, b.cod)]
        )
        if not ok:
            return "ArrowRule needs premises B' <= B and A <= A'"
    elif r == "TopLe":
        ok = (
            a == TOP
            and len(prems) == 1
            and prems[0][0] == TOP
            and isinstance(prems[0][1], Arrow)
            and prems[0][1].cod == b
        )
        if not ok:
            return "TopLe needs premise U <= B -> A and concludes U <= A"
    elif r == "ArrCong":
        if not (isinstance(a, Arrow) and isinstance(b, Arrow)):
            return "ArrCong relates two arrows"
        needed = {
            (b.dom, a.dom),
            (a.dom, b.dom),
            (a.cod, b.cod),
            (b.cod, a.cod),
        }
        if not needed <= set(prems):
            return "ArrCong needs both directions of dom and cod equivalence"
    elif r == "Glb":
        ok = (
            len(prems) >= 2
            and all(p[0] == a for p in prems)
            and canonicalize(make_inter([p[1] for p in prems])) == b
        )
        if not ok:
            return "Glb joins B <= A_i into B <= A_1&..&A_k"
    elif r == "Trans":
        ok = (
            len(prems) == 2
            and prems[0][0] == a
            and prems[1][1] == b
            and prems[0][1] == prems[1][0]
        )
        if not ok:
            return "Trans chains B <= A and A <= A'"
    else:
        return f"unknown rule {r!r}"
    return None


def check_subproof(t: TheorySpec, p: SubProof) -> Valid | Invalid:
    """Re-validate every node against its rule schema; no search, no engine."""
    stack: list[tuple[SubProof, tuple[int, ...]]] = [(p, ())]
    while stack:
        node, path = stack.pop()
        reason = _node_error(t, node)
        if reason is not None:
            return Invalid(path, reason)
        stack.extend(
            (ch, path + (i,)) for i, ch in enumerate(node.premises)
        )
    return Valid()
