"""Lambda terms: parsing, substitution, head reduction, solvability probing.

Terms obey Barendregt's convention: every parse freshens binders so that no
binder shadows another binder or a free variable.  Equality (and hashing) is
alpha-equivalence, implemented by comparing canonical de Bruijn skeletons, so
the freshening is unobservable to clients.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Union

from .errors import ParseError

Term = Union["Var", "Abs", "App"]


class _TermBase:
    @cached_property
    def _canon(self) -> tuple:
        return _canon_term(self, {}, 0)

    @cached_property
    def _free(self) -> frozenset[str]:
        return _free_vars(self)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, _TermBase):
            return NotImplemented
        return self._canon == other._canon

    def __hash__(self) -> int:
        return hash(self._canon)

    def __str__(self) -> str:
        return print_term(self)


@dataclass(frozen=True, eq=False, repr=False)
class Var(_TermBase):
    name: str

    def __repr__(self) -> str:
        return f"Var({self.name!r})"


@dataclass(frozen=True, eq=False, repr=False)
class Abs(_TermBase):
    binder: str
    body: Term

    def __repr__(self) -> str:
        return f"Abs({self.binder!r}, {self.body!r})"


@dataclass(frozen=True, eq=False, repr=False)
class App(_TermBase):
    fun: Term
    arg: Term

    def __repr__(self) -> str:
        return f"App({self.fun!r}, {self.arg!r})"


def _canon_term(t: Term, env: dict[str, int], depth: int) -> tuple:
    match t:
        case Var(name):
            if name in env:
                return ("b", depth - env[name])
            return ("f", name)
        case Abs(binder, body):
            inner = dict(env)
            inner[binder] = depth + 1
            return ("l", _canon_term(body, inner, depth + 1))
        case App(fun, arg):
            return ("a", _canon_term(fun, env, depth), _canon_term(arg, env, depth))
    raise TypeError(f"not a term: {t!r}")


def _free_vars(t: Term) -> frozenset[str]:
    match t:
        case Var(name):
            return frozenset({name})
        case Abs(binder, body):
            return body._free - {binder}
        case App(fun, arg):
            return fun._free | arg._free
    raise TypeError(f"not a term: {t!r}")


def free_vars(t: Term) -> frozenset[str]:
    return t._free


def alpha_eq(a: Term, b: Term) -> bool:
    return a._canon == b._canon


def _all_names(t: Term) -> set[str]:
    match t:
        case Var(name):
            return {name}
        case Abs(binder, body):
            return {binder} | _all_names(body)
        case App(fun, arg):
            return _all_names(fun) | _all_names(arg)
    raise TypeError(f"not a term: {t!r}")


_SUFFIX = re.compile(r"_\d+$")


def fresh_name(base: str, avoid: set[str]) -> str:
    """Smallest variant of base (base, base_1, base_2, ...) not in avoid."""
    stem = _SUFFIX.sub("", base) or "x"
    if base not in avoid:
        return base
    n = 1
    while f"{stem}_{n}" in avoid:
        n += 1
    return f"{stem}_{n}"


def freshen(t: Term, avoid: set[str] | None = None) -> Term:
    """Rename binders so all are distinct from each other and from free names.

    Binder names that cause no collision are kept, so round-tripping through
    the printer stays readable.
    """
    used = set(avoid or ()) | free_vars(t)

    def go(t: Term, ren: dict[str, str]) -> Term:
        match t:
            case Var(name):
                return Var(ren.get(name, name))
            case Abs(binder, body):
                new = fresh_name(binder, used)
                used.add(new)
                inner = dict(ren)
                inner[binder] = new
                return Abs(new, go(body, inner))
            case App(fun, arg):
                return App(go(fun, ren), go(arg, ren))
        raise TypeError(f"not a term: {t!r}")

    return go(t, {})


_TERM_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")


def _tokenize_term(src: str) -> list[tuple[str, str, int]]:
    toks = []
    i = 0
    while i < len(src):
        ch = src[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "\\().":
            toks.append((ch, ch, i))
            i += 1
            continue
        m = _TERM_IDENT.match(src, i)
        if not m:
            raise ParseError(f"unexpected character {ch!r} in term", i)
        toks.append(("ident", m.group(0), i))
        i = m.end()
    return toks


def parse_term(src: str) -> Term:
    """Parse `t ::= ident | \\ ident+ . t | t t | (t)` with the usual conventions.

    Application associates left; an abstraction body extends as far right as
    possible.  Binders are freshened after parsing.
    """
    toks = _tokenize_term(src)
    pos = 0

    def peek() -> tuple[str, str, int] | None:
        return toks[pos] if pos < len(toks) else None

    def expect(kind: str) -> tuple[str, str, int]:
        nonlocal pos
        tok = peek()
        if tok is None or tok[0] != kind:
            at = tok[2] if tok else len(src)
            raise ParseError(f"expected {kind!r}", at)
        pos += 1
        return tok

    def parse_lambda() -> Term:
        nonlocal pos
        expect("\\")
        binders = []
        while True:
            tok = peek()
            if tok is not None and tok[0] == "ident":
                binders.append(tok[1])
                pos += 1
            else:
                break
        if not binders:
            at = peek()[2] if peek() else len(src)
            raise ParseError("lambda needs at least one binder", at)
        expect(".")
        body = parse_app()
        for b in reversed(binders):
            body = Abs(b, body)
        return body

    def parse_atom() -> Term:
        nonlocal pos
        tok = peek()
        if tok is None:
            raise ParseError("unexpected end of term", len(src))
        kind, text, at = tok
        if kind == "ident":
            pos += 1
            return Var(text)
        if kind == "(":
            pos += 1
            inner = parse_app()
            expect(")")
            return inner
        raise ParseError(f"unexpected token {text!r}", at)

    def parse_app() -> Term:
        parts = []
        while True:
            tok = peek()
            if tok is None or tok[0] in (")", "."):
                break
            if tok[0] == "\\":
                parts.append(parse_lambda())
                break
            parts.append(parse_atom())
        if not parts:
            at = peek()[2] if peek() else len(src)
            raise ParseError("empty term", at)
        out = parts[0]
        for p in parts[1:]:
            out = App(out, p)
        return out

    term = parse_app()
    if pos != len(toks):
        raise ParseError("trailing input after term", toks[pos][2])
    return freshen(term)


def print_term(t: Term) -> str:
    """Minimal-parenthesis printer; inverse of parse_term up to alpha."""
    match t:
        case Var(name):
            return name
        case Abs(_, _):
            binders = []
            body = t
            while isinstance(body, Abs):
                binders.append(body.binder)
                body = body.body
            return f"\\{' '.join(binders)}.{print_term(body)}"
        case App(fun, arg):
            fs = print_term(fun)
            if isinstance(fun, Abs):
                fs = f"({fs})"
            ars = print_term(arg)
            if isinstance(arg, (App, Abs)):
                ars = f"({ars})"
            return f"{fs} {ars}"
    raise TypeError(f"not a term: {t!r}")


def substitute(m: Term, x: str, n: Term) -> Term:
    """Capture-avoiding M[x:=N]."""
    if x not in free_vars(m):
        return m
    avoid = _all_names(m) | _all_names(n)

    def go(t: Term) -> Term:
        match t:
            case Var(name):
                return n if name == x else t
            case Abs(binder, body):
                if binder == x:
                    return t
                if x not in free_vars(body):
                    return t
                if binder in free_vars(n):
                    new = fresh_name(binder, avoid)
                    avoid.add(new)
                    body = _rename_free(body, binder, new)
                    return Abs(new, go(body))
                return Abs(binder, go(body))
            case App(fun, arg):
                return App(go(fun), go(arg))
        raise TypeError(f"not a term: {t!r}")

    return go(m)


def _rename_free(t: Term, old: str, new: str) -> Term:
    match t:
        case Var(name):
            return Var(new) if name == old else t
        case Abs(binder, body):
            if binder == old:
                return t
            return Abs(binder, _rename_free(body, old, new))
        case App(fun, arg):
            return App(_rename_free(fun, old, new), _rename_free(arg, old, new))
    raise TypeError(f"not a term: {t!r}")


@dataclass(frozen=True)
class HeadNormal:
    """lx1..xn. y M1 ... Mm with a variable y in head position."""

    binders: tuple[str, ...]
    head: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class HeadRedex:
    """lx1..xn. (lz.N) P M1 ... Mm; the redex (lz.N) P is the head redex."""

    binders: tuple[str, ...]
    redex_fun_binder: str
    redex_fun_body: Term
    redex_arg: Term
    args: tuple[Term, ...]


Shape = Union[HeadNormal, HeadRedex]


def classify_shape(m: Term) -> Shape:
    """Total decomposition: every term is a head normal form or has a head redex."""
    binders = []
    while isinstance(m, Abs):
        binders.append(m.binder)
        m = m.body
    args: list[Term] = []
    while isinstance(m, App):
        args.append(m.arg)
        m = m.fun
    args.reverse()
    if isinstance(m, Var):
        return HeadNormal(tuple(binders), m.name, tuple(args))
    assert isinstance(m, Abs)
    if not args:
        raise AssertionError("abstraction spine left no argument for the redex")
    return HeadRedex(tuple(binders), m.binder, m.body, args[0], tuple(args[1:]))


def head_step(m: Term) -> Term | None:
    """Contract the head redex, or None when m is already in head normal form."""
    shape = classify_shape(m)
    if isinstance(shape, HeadNormal):
        return None
    out = substitute(shape.redex_fun_body, shape.redex_fun_binder, shape.redex_arg)
    for a in shape.args:
        out = App(out, a)
    for b in reversed(shape.binders):
        out = Abs(b, out)
    return out


def head_steps(m: Term) -> Iterator[Term]:
    """All successive head reducts of m, starting with m itself."""
    yield m
    while True:
        nxt = head_step(m)
        if nxt is None:
            return
        m = nxt
        yield m


@dataclass(frozen=True)
class Reached:
    hnf: Term
    steps: int


@dataclass(frozen=True)
class FuelExhausted:
    last: Term
    steps: int


def head_reduce(m: Term, fuel: int) -> Reached | FuelExhausted:
    """Run at most fuel head steps; Reached means a head normal form was hit."""
    if fuel < 0:
        raise ValueError("fuel must be nonnegative")
    steps = 0
    while steps <= fuel:
        nxt = head_step(m)
        if nxt is None:
            return Reached(m, steps)
        if steps == fuel:
            break
        m = nxt
        steps += 1
    return FuelExhausted(m, fuel)


@dataclass(frozen=True)
class Solvable:
    hnf: Term


@dataclass(frozen=True)
class UnknownAtFuel:
    fuel: int


def solvable_probe(m: Term, fuel: int) -> Solvable | UnknownAtFuel:
    """Semi-decision: Solvable when head reduction terminates within fuel.

    UnknownAtFuel never asserts unsolvability; head reduction of a solvable
    term can simply be longer than the budget.
    """
    out = head_reduce(m, fuel)
    if isinstance(out, Reached):
        return Solvable(out.hnf)
    return UnknownAtFuel(fuel)
