"""Bounded falsification probes for two global properties of an itt.

Both properties quantify over all types, so these probes only ever refute
within an enumerated fragment; NoCounterexampleUpTo certifies nothing beyond
it.  The subset/witness checks inside use Proven as "holds" and UnknownWithin
as "fails within universe", which can only make the probe report spurious
counterexamples, never hide real ones; reports are therefore marked
bounded_only.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterator, Union

from .errors import InvalidInput
from .subtyping import DEFAULT_CAP, DEFAULT_WIDTH, build_universe, saturated_ctx
from .theory import TheorySpec
from .types import (
    inter_parts,
    TOP,
    Arrow,
    Const,
    Inter,
    Ty,
    canonicalize,
    make_inter,
    print_ty,
    ty_key,
    ty_size,
)


@dataclass(frozen=True)
class CounterexampleFound:
    lhs: Ty
    rhs: Ty
    detail: str
    bounded_only: bool = True


@dataclass(frozen=True)
class NoCounterexampleUpTo:
    depth: int


ProbeVerdict = Union[CounterexampleFound, NoCounterexampleUpTo]


def _types_up_to(constants: frozenset[str], depth: int) -> list[Ty]:
    """All canonical types of node size <= depth over the constants and U."""
    by_size: dict[int, set[Ty]] = {
        1: {TOP} | {Const(c) for c in sorted(constants)}
    }
    for n in range(2, depth + 1):
        cur: set[Ty] = set()
        for i in range(1, n - 1):
            j = n - 1 - i
            for d in by_size[i]:
                for c in by_size[j]:
                    cur.add(Arrow(d, c))
                    it = canonicalize(Inter(d, c))
                    if ty_size(it) == n:
                        cur.add(it)
        by_size[n] = cur
    out: set[Ty] = set()
    for bucket in by_size.values():
        out |= bucket
    return sorted(out, key=ty_key)


def _nonempty_subsets(items: tuple) -> Iterator[tuple]:
    for k in range(1, len(items) + 1):
        yield from combinations(items, k)


def beta_soundness_probe(
    t: TheorySpec,
    depth: int = 3,
    inter_width: int = DEFAULT_WIDTH,
    cap: int = DEFAULT_CAP,
) -> ProbeVerdict:
    """Search for Proven instances of (B1->A1)&..&(Bk->Ak) <= B -> A, with A
    not provably ~ U, that no subset J justifies via B <= meet(Bj) and
    meet(Aj) <= A.  Components range over types of size <= depth, k <= the
    width, and the whole left side is size-capped at 2*depth+1."""
    if depth < 1:
        raise InvalidInput("depth must be >= 1")
    pool = _types_up_to(t.constants, depth)
    arrows = [Arrow(b, a) for b in pool for a in pool]
    size_cap = 2 * depth + 1
    lhs_list: list[tuple[Ty, tuple[Arrow, ...]]] = [(ar, (ar,)) for ar in arrows]
    for k in range(2, inter_width + 1):
        for combo in combinations(arrows, k):
            ty = canonicalize(make_inter(combo))
            if isinstance(ty, Inter) and ty_size(ty) <= size_cap:
                lhs_list.append((ty, combo))
    lhs_list.sort(key=lambda pair: ty_key(pair[0]))

    seeds: set[Ty] = set(pool) | set(arrows)
    for ty, combo in lhs_list:
        seeds.add(ty)
        for js in _nonempty_subsets(combo):
            seeds.add(canonicalize(make_inter([x.dom for x in js])))
            seeds.add(canonicalize(make_inter([x.cod for x in js])))
    universe = build_universe(t, sorted(seeds, key=ty_key), inter_width=1, cap=cap)
    ctx = saturated_ctx(t, universe)

    for ty, combo in lhs_list:
        for rhs in arrows:
            if not ctx.holds(ty, rhs):
                continue
            if ctx.holds(TOP, rhs.cod):
                continue
            witnessed = False
            for js in _nonempty_subsets(combo):
                meet_b = canonicalize(make_inter([x.dom for x in js]))
                meet_a = canonicalize(make_inter([x.cod for x in js]))
                if ctx.holds(rhs.dom, meet_b) and ctx.holds(meet_a, rhs.cod):
                    witnessed = True
                    break
            if not witnessed:
                return CounterexampleFound(
                    ty,
                    rhs,
                    f"{print_ty(ty)} <= {print_ty(rhs)} is derivable but no "
                    f"arrow subset justifies it within the universe",
                )
    return NoCounterexampleUpTo(depth)


def _chain(bs: tuple[Ty, ...], end: Ty) -> Ty:
    out = end
    for b in reversed(bs):
        out = Arrow(b, out)
    return out


def set_condition_probe(
    t: TheorySpec,
    depth: int = 3,
    inter_width: int = DEFAULT_WIDTH,
    cap: int = DEFAULT_CAP,
) -> ProbeVerdict:
    """Search for Proven instances of A1&..&Ak <= B1->..->Bn->C, with C not
    provably ~ U, lacking a j and D with Aj ~ B1->..->Bn->D, D not ~ U and
    C&D ~ C.  Left sides range over types of size <= depth and their
    <= inter_width-fold intersections; each is decomposed into its canonical
    &-parts (the A_i), the Bi range over atoms, n <= depth, and D over the
    pool.  Coarser regroupings of the A_i are not probed: a grouped part
    A_j&A_k rarely stays equivalent to a single chain, so the literal
    any-grouping reading fails already for two incomparable constants."""
    if depth < 1:
        raise InvalidInput("depth must be >= 1")
    pool = _types_up_to(t.constants, depth)
    atoms: list[Ty] = [TOP] + [Const(c) for c in sorted(t.constants)]
    cs: list[Ty] = [Const(c) for c in sorted(t.constants)]

    lhs_set: set[Ty] = set(pool)
    for k in range(2, inter_width + 1):
        for combo in combinations(pool, k):
            lhs_set.add(canonicalize(make_inter(combo)))
    lhs_list: list[tuple[Ty, tuple[Ty, ...]]] = [
        (ty, inter_parts(ty) if isinstance(ty, Inter) else (ty,))
        for ty in sorted(lhs_set, key=ty_key)
    ]

    b_seqs: list[tuple[Ty, ...]] = [()]
    for n in range(1, depth + 1):
        b_seqs.extend(product(atoms, repeat=n))

    seeds: set[Ty] = set(pool)
    for ty, _ in lhs_list:
        seeds.add(ty)
    for bs in b_seqs:
        for end in set(cs) | set(pool):
            seeds.add(_chain(bs, end))
    for c in cs:
        for d in pool:
            seeds.add(canonicalize(Inter(c, d)))
    universe = build_universe(t, sorted(seeds, key=ty_key), inter_width=1, cap=cap)
    ctx = saturated_ctx(t, universe)

    for ty, parts in lhs_list:
        for bs in b_seqs:
            for c in cs:
                rhs = _chain(bs, c)
                if not ctx.holds(ty, rhs):
                    continue
                if ctx.holds(TOP, c):
                    continue
                if _set_witness(ctx, parts, bs, c, pool):
                    continue
                return CounterexampleFound(
                    ty,
                    rhs,
                    f"{print_ty(ty)} <= {print_ty(rhs)} is derivable but no "
                    f"part is equivalent to a chain ending in a suitable D",
                )
    return NoCounterexampleUpTo(depth)


def _set_witness(ctx, parts: tuple[Ty, ...], bs: tuple[Ty, ...], c: Ty, pool) -> bool:
    for a_j in parts:
        for d in pool:
            if ctx.holds(TOP, d):
                continue
            chain_d = _chain(bs, d)
            if not (ctx.holds(a_j, chain_d) and ctx.holds(chain_d, a_j)):
                continue
            cd = canonicalize(Inter(c, d))
            if ctx.holds(c, cd) and ctx.holds(cd, c):
                return True
    return False
