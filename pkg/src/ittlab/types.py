"""Intersection type syntax and canonical forms.

Structural equality on Ty is plain dataclass equality.  Engines compare types
via canonicalize, which quotients by associativity, commutativity and
idempotence of & plus neutrality of U; anything theory-specific is the
subtype engine's business, never equality's.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union

from .errors import ParseError

Ty = Union["Const", "Top", "Arrow", "Inter"]


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Arrow:
    dom: Ty
    cod: Ty


@dataclass(frozen=True)
class Inter:
    left: Ty
    right: Ty


TOP = Top()


def is_reserved(name: str) -> bool:
    """Names starting with $ are minted internally and rejected by the parser."""
    return name.startswith("$")


def ty_key(t: Ty) -> tuple:
    """Total order on types: constants, then U, then arrows, then intersections."""
    match t:
        case Const(name):
            return (0, name)
        case Top():
            return (1,)
        case Arrow(dom, cod):
            return (2, ty_key(dom), ty_key(cod))
        case Inter(left, right):
            return (3, ty_key(left), ty_key(right))
    raise TypeError(f"not a type: {t!r}")


def inter_parts(t: Ty) -> tuple[Ty, ...]:
    """Flatten nested & into a tuple; U flattens away; non-& types are singletons."""
    acc: list[Ty] = []

    def go(t: Ty) -> None:
        match t:
            case Inter(left, right):
                go(left)
                go(right)
            case Top():
                pass
            case _:
                acc.append(t)

    go(t)
    return tuple(acc)


def make_inter(parts: list[Ty] | tuple[Ty, ...]) -> Ty:
    """Right-nested & of parts; empty becomes U.  Does not canonicalize."""
    if not parts:
        return TOP
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Inter(p, out)
    return out


def canonicalize(a: Ty) -> Ty:
    """ACI-normal form: flatten &, drop U, dedupe, sort parts, recurse under ->."""
    match a:
        case Const(_) | Top():
            return a
        case Arrow(dom, cod):
            return Arrow(canonicalize(dom), canonicalize(cod))
        case Inter(_, _):
            parts = sorted(
                {canonicalize(p) for p in inter_parts(a)}, key=ty_key
            )
            return make_inter(parts)
    raise TypeError(f"not a type: {a!r}")


def ty_size(t: Ty) -> int:
    match t:
        case Const(_) | Top():
            return 1
        case Arrow(dom, cod):
            return 1 + ty_size(dom) + ty_size(cod)
        case Inter(left, right):
            return 1 + ty_size(left) + ty_size(right)
    raise TypeError(f"not a type: {t!r}")


def subterms(t: Ty) -> Iterator[Ty]:
    """All subterms including t itself, parents before children."""
    yield t
    match t:
        case Arrow(dom, cod):
            yield from subterms(dom)
            yield from subterms(cod)
        case Inter(left, right):
            yield from subterms(left)
            yield from subterms(right)


def constants_of(t: Ty) -> frozenset[str]:
    return frozenset(s.name for s in subterms(t) if isinstance(s, Const))


def map_consts(t: Ty, fn) -> Ty:
    """Replace each constant leaf by fn(name); fn returns a whole Ty."""
    match t:
        case Const(name):
            return fn(name)
        case Top():
            return t
        case Arrow(dom, cod):
            return Arrow(map_consts(dom, fn), map_consts(cod, fn))
        case Inter(left, right):
            return Inter(map_consts(left, fn), map_consts(right, fn))
    raise TypeError(f"not a type: {t!r}")


_TY_IDENT = re.compile(r"[A-Za-z_$][A-Za-z0-9_'$]*")


def _tokenize_ty(src: str) -> list[tuple[str, str, int]]:
    toks = []
    i = 0
    while i < len(src):
        ch = src[i]
        if ch.isspace():
            i += 1
            continue
        if src.startswith("->", i):
            toks.append(("->", "->", i))
            i += 2
            continue
        if ch in "&()":
            toks.append((ch, ch, i))
            i += 1
            continue
        m = _TY_IDENT.match(src, i)
        if not m:
            raise ParseError(f"unexpected character {ch!r} in type", i)
        toks.append(("ident", m.group(0), i))
        i = m.end()
    return toks


def parse_ty(src: str, allow_reserved: bool = False) -> Ty:
    """Parse `T ::= U | ident | T -> T | T & T | (T)`.

    & binds tighter than ->; -> associates right.  $-prefixed names are
    internal and rejected unless allow_reserved.
    """
    toks = _tokenize_ty(src)
    pos = 0

    def peek() -> tuple[str, str, int] | None:
        return toks[pos] if pos < len(toks) else None

    def parse_atom() -> Ty:
        nonlocal pos
        tok = peek()
        if tok is None:
            raise ParseError("unexpected end of type", len(src))
        kind, text, at = tok
        if kind == "ident":
            pos += 1
            if text == "U":
                return TOP
            if is_reserved(text) and not allow_reserved:
                raise ParseError(f"reserved name {text!r}", at)
            return Const(text)
        if kind == "(":
            pos += 1
            inner = parse_arrow()
            tok = peek()
            if tok is None or tok[0] != ")":
                raise ParseError("expected ')'", tok[2] if tok else len(src))
            pos += 1
            return inner
        raise ParseError(f"unexpected token {text!r}", at)

    def parse_inter() -> Ty:
        nonlocal pos
        parts = [parse_atom()]
        while (tok := peek()) is not None and tok[0] == "&":
            pos += 1
            parts.append(parse_atom())
        return make_inter(parts) if len(parts) > 1 else parts[0]

    def parse_arrow() -> Ty:
        nonlocal pos
        dom = parse_inter()
        tok = peek()
        if tok is not None and tok[0] == "->":
            pos += 1
            return Arrow(dom, parse_arrow())
        return dom

    out = parse_arrow()
    if pos != len(toks):
        raise ParseError("trailing input after type", toks[pos][2])
    return out


def print_ty(t: Ty) -> str:
    """Minimal parentheses under the parse_ty grammar; inverse on canonical forms."""
    match t:
        case Const(name):
            return name
        case Top():
            return "U"
        case Arrow(dom, cod):
            ds = print_ty(dom)
            if isinstance(dom, Arrow):
                ds = f"({ds})"
            return f"{ds} -> {print_ty(cod)}"
        case Inter(left, right):
            out = []
            for p in inter_parts(t):
                ps = print_ty(p)
                out.append(f"({ps})" if isinstance(p, Arrow) else ps)
            if not out:
                return "U"
            return " & ".join(out)
    raise TypeError(f"not a type: {t!r}")
