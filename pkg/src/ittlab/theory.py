"""Theory specifications (.itt syntax) and characteristic sets.

A TheorySpec is the machine form of an itt: declared constants, toggleable
rule schemes, axioms, and atomic order axioms between constants.  natural
theories restrict axioms to `c ~ A` with one defining axiom per constant;
validate_natural rewrites such a theory into the restricted characteristic
form where every right-hand side is a constant, an arrow of constants, or an
intersection of constants, minting $-named auxiliaries for nested subterms.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Union

from .errors import (
    InvalidInput,
    NaturalShapeViolation,
    ParseError,
    UndeclaredConstant,
)
from .types import (
    TOP,
    Arrow,
    Const,
    Inter,
    Top,
    Ty,
    canonicalize,
    constants_of,
    inter_parts,
    is_reserved,
    make_inter,
    map_consts,
    parse_ty,
)


class RuleFlag(Enum):
    ARROW = "arrow"          # (->): B' <= B and A <= A' give B -> A <= B' -> A'
    ARROW_TOP = "arrow-U"    # (->U): U ~ A -> U
    ARROW_CAP = "arrow-cap"  # (->&): (B -> A) & (B -> A') ~ B -> A & A'
    TOP_LE = "U-leq"         # (U<=): U <= B -> A gives U <= A


@dataclass(frozen=True)
class AxiomDecl:
    kind: str  # "le" or "eq"; eq abbreviates both le directions
    lhs: Ty
    rhs: Ty

    def __post_init__(self):
        if self.kind not in ("le", "eq"):
            raise InvalidInput(f"axiom kind must be 'le' or 'eq', got {self.kind!r}")


_CONST_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")


@dataclass(frozen=True)
class TheorySpec:
    name: str
    constants: frozenset[str]
    flags: frozenset[RuleFlag]
    axioms: tuple[AxiomDecl, ...]
    order: tuple[tuple[str, str], ...] = ()
    natural: bool = False

    def __post_init__(self):
        object.__setattr__(self, "constants", frozenset(self.constants))
        flags = frozenset(self.flags)
        if self.natural:
            flags |= {RuleFlag.ARROW_TOP}
        object.__setattr__(self, "flags", flags)
        object.__setattr__(self, "axioms", tuple(self.axioms))
        object.__setattr__(self, "order", tuple(tuple(p) for p in self.order))
        self._check()

    def _check(self) -> None:
        for c in self.constants:
            if c == "U" or is_reserved(c) or not _CONST_NAME.match(c):
                raise ParseError(f"bad constant name {c!r}")
        for ax in self.axioms:
            for c in constants_of(ax.lhs) | constants_of(ax.rhs):
                if c not in self.constants:
                    raise UndeclaredConstant(f"{c!r} in axiom of theory {self.name!r}")
        for lo, hi in self.order:
            for c in (lo, hi):
                if c not in self.constants:
                    raise UndeclaredConstant(f"{c!r} in order clause of {self.name!r}")
        if self.natural:
            seen = set()
            for ax in self.axioms:
                if ax.kind != "eq" or not isinstance(ax.lhs, Const):
                    raise NaturalShapeViolation(
                        f"natural theory {self.name!r} needs axioms of shape c ~ A"
                    )
                if ax.lhs.name in seen:
                    raise NaturalShapeViolation(
                        f"constant {ax.lhs.name!r} defined twice in {self.name!r}"
                    )
                seen.add(ax.lhs.name)

    def le_axiom_pairs(self) -> tuple[tuple[Ty, Ty], ...]:
        """All axioms as <= pairs: eq contributes both directions, order its pair."""
        out: list[tuple[Ty, Ty]] = []
        for ax in self.axioms:
            out.append((ax.lhs, ax.rhs))
            if ax.kind == "eq":
                out.append((ax.rhs, ax.lhs))
        for lo, hi in self.order:
            out.append((Const(lo), Const(hi)))
        return tuple(out)


def _statements(src: str):
    """Yield (text, absolute offset) for each ;- or newline-separated statement."""
    off = 0
    for line in src.splitlines(keepends=True):
        code = line.split("#", 1)[0]
        sub = 0
        for piece in code.split(";"):
            text = piece.strip()
            if text:
                yield text, off + sub + (len(piece) - len(piece.lstrip()))
            sub += len(piece) + 1
        off += len(line)


def parse_theory(src: str) -> TheorySpec:
    """Parse the .itt statement language.

    Statements (newline- or ;-separated, # comments):
      theory NAME | natural | constants id+ | flags name+ |
      axiom TY (<= | ~) TY | order id <= id
    """
    name = "unnamed"
    named = False
    natural = False
    constants: list[str] = []
    flags: set[RuleFlag] = set()
    axioms: list[AxiomDecl] = []
    order: list[tuple[str, str]] = []

    for text, at in _statements(src):
        head, _, rest = text.partition(" ")
        rest = rest.strip()
        if head == "theory":
            if named:
                raise ParseError("duplicate theory statement", at)
            if not _CONST_NAME.match(rest):
                raise ParseError(f"bad theory name {rest!r}", at)
            name, named = rest, True
        elif head == "natural":
            if rest:
                raise ParseError("natural takes no arguments", at)
            natural = True
        elif head == "constants":
            ids = rest.split()
            if not ids:
                raise ParseError("constants needs at least one name", at)
            constants.extend(ids)
        elif head == "flags":
            for w in rest.split():
                try:
                    flags.add(RuleFlag(w))
                except ValueError:
                    raise ParseError(f"unknown flag {w!r}", at) from None
        elif head == "axiom":
            n_eq, n_le = rest.count("~"), rest.count("<=")
            if n_eq + n_le != 1:
                raise ParseError("axiom needs exactly one '~' or '<='", at)
            op = "~" if n_eq else "<="
            lhs_s, rhs_s = rest.split(op)
            kind = "eq" if n_eq else "le"
            axioms.append(AxiomDecl(kind, parse_ty(lhs_s), parse_ty(rhs_s)))
        elif head == "order":
            sides = rest.split("<=")
            if len(sides) != 2:
                raise ParseError("order clause is `order id <= id`", at)
            lo, hi = sides[0].strip(), sides[1].strip()
            for c in (lo, hi):
                if not _CONST_NAME.match(c):
                    raise ParseError(f"bad constant name {c!r} in order clause", at)
            order.append((lo, hi))
        else:
            raise ParseError(f"unknown statement {head!r}", at)

    return TheorySpec(
        name=name,
        constants=frozenset(constants),
        flags=frozenset(flags),
        axioms=tuple(axioms),
        order=tuple(order),
        natural=natural,
    )


# -- characteristic sets -------------------------------------------------------


TOP_CONST = "$U"  # stands for U on a characteristic right-hand side


@dataclass(frozen=True)
class SelfC:
    """c ~ c."""


@dataclass(frozen=True)
class ArrowC:
    """c ~ dom -> cod with constant sides."""

    dom: str
    cod: str


@dataclass(frozen=True)
class InterC:
    """c ~ left & right with constant sides."""

    left: str
    right: str


Rhs = Union[SelfC, ArrowC, InterC]


def mentioned(rhs: Rhs) -> tuple[str, ...]:
    match rhs:
        case SelfC():
            return ()
        case ArrowC(dom, cod):
            return (dom, cod)
        case InterC(left, right):
            return (left, right)
    raise TypeError(f"not an rhs: {rhs!r}")


@dataclass
class CharacteristicSet:
    """Restricted-form characteristic set of a natural theory.

    axioms covers every surviving constant (originals that were not pure
    renamings, the minted $n auxiliaries, and $U when U occurs on some rhs).
    aliases maps each eliminated constant to its representative.
    """

    theory: TheorySpec
    axioms: dict[str, Rhs]
    fresh_defs: dict[str, Ty] = field(default_factory=dict)
    aliases: dict[str, str] = field(default_factory=dict)

    def constants(self) -> tuple[str, ...]:
        return tuple(sorted(self.axioms))


def validate_natural(t: TheorySpec) -> CharacteristicSet:
    """Rewrite a natural theory into restricted characteristic form.

    Pure renamings c ~ c' are eliminated by substituting a representative
    (least name on cycles); c ~ U aliases c to the reserved $U.  Nested
    right-hand sides are split out into fresh $1, $2, ... in depth-first
    discovery order, one per distinct canonical subterm.
    """
    if not t.natural:
        raise InvalidInput(f"theory {t.name!r} is not natural")

    defs: dict[str, Ty] = {}
    order: list[str] = []  # axiom order drives $-numbering
    for ax in t.axioms:
        assert isinstance(ax.lhs, Const)
        defs[ax.lhs.name] = canonicalize(ax.rhs)
        order.append(ax.lhs.name)
    for c in sorted(t.constants):
        if c not in defs:
            defs[c] = Const(c)
            order.append(c)

    # Eliminate renamings to a fixed point; substitution can expose new ones
    # (e.g. a ~ b & c collapses to a ~ r once b and c share representative r).
    aliases: dict[str, str] = {}
    while True:
        rename: dict[str, str] = {}
        for c, rhs in defs.items():
            if isinstance(rhs, Const) and rhs.name != c:
                rename[c] = rhs.name
            elif isinstance(rhs, Top):
                rename[c] = TOP_CONST
        if not rename:
            break
        round_aliases: dict[str, str] = {}
        for c in rename:
            if c in round_aliases:
                continue
            path = [c]
            cur = rename[c]
            while cur in rename and cur not in path and cur not in round_aliases:
                path.append(cur)
                cur = rename[cur]
            if cur in round_aliases:
                rep = round_aliases[cur]
            elif cur in path:
                rep = min(path[path.index(cur):])
            else:
                rep = cur
            for x in path:
                if x != rep:
                    round_aliases[x] = rep
        subst = {
            x: (TOP if rep == TOP_CONST else Const(rep))
            for x, rep in round_aliases.items()
        }
        for x in round_aliases:
            del defs[x]
        for c in list(defs):
            defs[c] = canonicalize(
                map_consts(defs[c], lambda n: subst.get(n, Const(n)))
            )
        aliases.update(round_aliases)
    # Compress chains created across rounds.
    for x in list(aliases):
        rep = aliases[x]
        while rep in aliases:
            rep = aliases[rep]
        aliases[x] = rep

    out: dict[str, Rhs] = {}
    fresh_defs: dict[str, Ty] = {}
    fresh_by_canon: dict[Ty, str] = {}
    counter = 0
    used_top = TOP_CONST in aliases.values()

    def name_of(sub: Ty) -> str:
        nonlocal counter, used_top
        match sub:
            case Const(n):
                return n
            case Top():
                used_top = True
                return TOP_CONST
            case _:
                if sub in fresh_by_canon:
                    return fresh_by_canon[sub]
                counter += 1
                nm = f"${counter}"
                fresh_by_canon[sub] = nm
                fresh_defs[nm] = sub
                define(nm, sub)
                return nm

    def define(c: str, rhs: Ty) -> None:
        match rhs:
            case Const(n):
                assert n == c, "renamings were eliminated above"
                out[c] = SelfC()
            case Arrow(dom, cod):
                out[c] = ArrowC(name_of(dom), name_of(cod))
            case Inter(_, _):
                parts = inter_parts(rhs)
                tail = parts[1] if len(parts) == 2 else make_inter(parts[1:])
                out[c] = InterC(name_of(parts[0]), name_of(tail))
            case _:
                raise AssertionError(f"unexpected rhs shape {rhs!r}")

    for c in order:
        if c in defs:
            define(c, defs[c])
    if used_top:
        out[TOP_CONST] = SelfC()

    return CharacteristicSet(theory=t, axioms=out, fresh_defs=fresh_defs, aliases=aliases)


def back_substitute(cs: CharacteristicSet, c: str) -> Ty:
    """The rhs of c as a type over the surviving original constants.

    Expanding a fresh constant returns the subterm it names; expanding an
    original constant rebuilds its full (canonical) right-hand side.
    """
    if c in cs.fresh_defs:
        return cs.fresh_defs[c]
    if c == TOP_CONST:
        return TOP

    def leaf(n: str) -> Ty:
        if n == TOP_CONST:
            return TOP
        if n in cs.fresh_defs:
            return cs.fresh_defs[n]
        return Const(n)

    match cs.axioms[c]:
        case SelfC():
            return Const(c)
        case ArrowC(dom, cod):
            return Arrow(leaf(dom), leaf(cod))
        case InterC(left, right):
            return canonicalize(Inter(leaf(left), leaf(right)))
    raise TypeError(f"no rhs for {c!r}")
