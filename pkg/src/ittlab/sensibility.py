"""Sensibility verdicts for theories, plus the built-in theory corpus.

A theory is sensible when every unsolvable term types only at types
equivalent to U.  The pipeline combines three one-sided criteria: the
syntactic polarity check (sufficient for sensibility of natural theories),
verified embeddings (sensibility transfers backward, non-sensibility
forward), and a bounded search for a typed unsolvable witness.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cache
from importlib import resources
from typing import Union

from .assignment import Basis, Derivation, Found, infer_bounded
from .embedding import (
    ConstantMap,
    TransferCertificate,
    Verified,
    extend_structurally,
    transfer_nonsensible,
    transfer_sensible,
    verify_embedding,
)
from .errors import InvalidInput
from .polarity import PolarityPass, check_positive_polarity, completion
from .subtyping import DEFAULT_CAP, Proven, is_top_equiv
from .terms import FuelExhausted, Term, head_reduce, parse_term
from .theory import TheorySpec, parse_theory, validate_natural
from .types import TOP, Const, Ty, canonicalize, print_ty, ty_key
from .sexpr import parse_constant_map

DEFAULT_PROBE_FUEL = 500
DEFAULT_PROBE_WIDTH = 2
DEFAULT_CHAIN_DEPTH = 3


# -- registry ----------------------------------------------------------------


@dataclass(frozen=True)
class KnownSensible:
    citation: str


@dataclass(frozen=True)
class KnownNonSensible:
    citation: str


@dataclass(frozen=True)
class Open:
    pass


KnownStatus = Union[KnownSensible, KnownNonSensible, Open]


@dataclass(frozen=True)
class RegistryEntry:
    spec: TheorySpec
    status: KnownStatus


@dataclass(frozen=True)
class TheoryRegistry:
    entries: tuple[tuple[str, RegistryEntry], ...]

    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.entries)

    def lookup(self, name: str) -> RegistryEntry:
        """Exact name first, then a unique case-insensitive substring."""
        for key, entry in self.entries:
            if key == name:
                return entry
        hits = [e for key, e in self.entries if name.lower() in key.lower()]
        if len(hits) == 1:
            return hits[0]
        detail = "ambiguous" if hits else "not found"
        raise InvalidInput(f"theory {name!r} {detail} in registry")


_BUILTIN_NAMES = (
    "T0",
    "T0le",
    "T1",
    "T2",
    "T2prime",
    "T2inv",
    "T3",
    "T4",
    "TCDZ",
    "Tsharp",
    "Asharp",
    "EP",
    "Park",
    "Tstar",
    "Tstarup",
    "Tflat",
    "Ainf1",
    "Ainf2",
    "Ainf3",
    "Ainf4",
    "Ainf5",
)

_KNOWN_STATUSES: dict[str, KnownStatus] = {
    "TCDZ": KnownSensible(
        "Coppo, Dezani-Ciancaglini and Zacchi (1987): the filter model over "
        "two ordered constants, each equivalent to an arrow on the other, "
        "equates all unsolvable terms with the top."
    ),
    "Park": KnownNonSensible(
        "Park (1976); as a filter model, Honsell and Ronchi Della Rocca "
        "(1992): the self-arrow constant types the unsolvable term "
        "(\\x. x x)(\\x. x x), so not all unsolvables collapse to top."
    ),
}


def _corpus_text(*relpath: str) -> str:
    node = resources.files("ittlab").joinpath("corpus")
    for part in relpath:
        node = node.joinpath(part)
    return node.read_text(encoding="utf-8")


@cache
def builtin_theories() -> TheoryRegistry:
    entries = []
    for name in _BUILTIN_NAMES:
        spec = parse_theory(_corpus_text(f"{name}.itt"))
        entries.append((name, RegistryEntry(spec, _KNOWN_STATUSES.get(name, Open()))))
    return TheoryRegistry(tuple(entries))


# registered source -> target constant maps shipped with the corpus
REGISTERED_EMBEDDINGS = (
    ("T3", "TCDZ", "t3_to_tcdz.map"),
    ("Tstar", "TCDZ", "tstar_to_tcdz.map"),
    ("Tstarup", "TCDZ", "tstarup_to_tcdz.map"),
    ("Tflat", "TCDZ", "tflat_to_tcdz.map"),
    ("T2", "T2prime", "t2_to_t2prime.map"),
    ("Park", "T2inv", "park_to_t2inv.map"),
)


@cache
def registered_maps() -> tuple[ConstantMap, ...]:
    reg = builtin_theories()
    out = []
    for src, tgt, fname in REGISTERED_EMBEDDINGS:
        mapping = parse_constant_map(_corpus_text("maps", fname))
        out.append(ConstantMap.of(reg.lookup(src).spec, reg.lookup(tgt).spec, mapping))
    return tuple(out)


# -- unsolvable-typing probe ---------------------------------------------------

_OMEGA2 = r"(\x. x x) (\x. x x)"
UNSOLVABLE_POOL: tuple[Term, ...] = (
    parse_term(_OMEGA2),
    parse_term(r"(\x. x x x) (\x. x x x)"),
    parse_term(rf"({_OMEGA2}) (\y. y)"),
    parse_term(r"(\x. x x) (\x. x x)"),
)


@dataclass(frozen=True)
class Witness:
    term: Term
    ty: Ty
    derivation: Derivation
    head_trace: FuelExhausted


@dataclass(frozen=True)
class NoneFound:
    fuel: int
    inter_width: int


def _probe_targets(
    t: TheorySpec, inter_width: int, cap: int
) -> tuple[Ty, ...]:
    """Constants and axiom sides not provably equivalent to U."""
    raw: list[Ty] = [Const(c) for c in sorted(t.constants)]
    for lhs, rhs in t.le_axiom_pairs():
        raw.extend((lhs, rhs))
    out: list[Ty] = []
    seen: set[Ty] = set()
    for ty in sorted((canonicalize(x) for x in raw), key=ty_key):
        if ty in seen or ty == TOP:
            continue
        seen.add(ty)
        if isinstance(is_top_equiv(t, ty, inter_width, cap), Proven):
            continue
        out.append(ty)
    return tuple(out)


def probe_unsolvable_typing(
    t: TheorySpec,
    fuel: int = DEFAULT_PROBE_FUEL,
    inter_width: int = DEFAULT_PROBE_WIDTH,
    cap: int = DEFAULT_CAP,
    extra_pool: tuple[Term, ...] = (),
) -> Witness | NoneFound:
    """Search the unsolvable pool for a typing at a non-U type.

    A Found derivation only counts with a fuel-exhausted head trace, so a
    solvable term slipped into extra_pool cannot fake a witness.
    """
    targets = _probe_targets(t, inter_width, cap)
    empty = Basis.of()
    for term in UNSOLVABLE_POOL + tuple(extra_pool):
        for ty in targets:
            r = infer_bounded(t, empty, term, ty, fuel, inter_width, cap)
            if isinstance(r, Found):
                trace = head_reduce(term, fuel)
                if isinstance(trace, FuelExhausted):
                    return Witness(term, ty, r.derivation, trace)
    return NoneFound(fuel, inter_width)


# -- verdict pipeline ----------------------------------------------------------


@dataclass(frozen=True)
class RegistryFact:
    citation: str


@dataclass(frozen=True)
class EmbeddingInto:
    target: str
    certificate: TransferCertificate


@dataclass(frozen=True)
class EmbeddingFrom:
    source: str
    certificate: TransferCertificate


@dataclass(frozen=True)
class UnsolvableTyped:
    term: Term
    ty: Ty
    derivation: Derivation
    head_trace: FuelExhausted


@dataclass(frozen=True)
class Sensible:
    evidence: object


@dataclass(frozen=True)
class NonSensible:
    evidence: object


@dataclass(frozen=True)
class Unknown:
    tried: tuple[str, ...]


SensibilityVerdict = Union[Sensible, NonSensible, Unknown]


def evidence_summary(v: SensibilityVerdict) -> dict | None:
    """Stable one-line JSON shape of a verdict's evidence, for goldens."""
    if isinstance(v, Unknown):
        return None
    e = v.evidence
    if isinstance(e, PolarityPass):
        return {"kind": "PolarityPass", "detail": "caveats" if e.caveats else ""}
    if isinstance(e, EmbeddingInto):
        return {"kind": "EmbeddingInto", "detail": e.target}
    if isinstance(e, EmbeddingFrom):
        return {"kind": "EmbeddingFrom", "detail": e.source}
    if isinstance(e, UnsolvableTyped):
        return {"kind": "UnsolvableTyped", "detail": print_ty(e.ty)}
    return {"kind": type(e).__name__, "detail": ""}

_ORDER_CAVEAT = (
    "order axioms present: the polarity criterion covers the characteristic "
    "axioms, the declared constant order is assumed compatible"
)


def _same_theory(a: TheorySpec, b: TheorySpec) -> bool:
    """Structural equality ignoring the declared name."""

    def pairs(t: TheorySpec) -> frozenset[tuple[Ty, Ty]]:
        return frozenset(
            (canonicalize(l), canonicalize(r)) for l, r in t.le_axiom_pairs()
        )

    return (
        a.constants == b.constants
        and a.flags == b.flags
        and a.natural == b.natural
        and pairs(a) == pairs(b)
    )


def _polarity_pass(t: TheorySpec) -> PolarityPass | None:
    if not t.natural:
        return None
    cs = validate_natural(t)
    pol = check_positive_polarity(completion(cs.axioms))
    if not isinstance(pol, PolarityPass):
        return None
    if t.order:
        return PolarityPass(pol.caveats + (_ORDER_CAVEAT,))
    return pol


def _sensible_status(spec: TheorySpec, reg: TheoryRegistry) -> object | None:
    """Evidence that spec is known sensible, if any."""
    for name, entry in reg.entries:
        if isinstance(entry.status, KnownSensible) and _same_theory(entry.spec, spec):
            return RegistryFact(entry.status.citation)
    return _polarity_pass(spec)


def _map_pool(
    reg: TheoryRegistry, extra_maps: tuple[ConstantMap, ...]
) -> tuple[ConstantMap, ...]:
    identities = tuple(
        ConstantMap.of(
            entry.spec, entry.spec, {c: Const(c) for c in entry.spec.constants}
        )
        for _, entry in reg.entries
        if not isinstance(entry.status, Open)
    )
    return registered_maps() + tuple(extra_maps) + identities


def _rebase(k: ConstantMap, source: TheorySpec) -> ConstantMap:
    return ConstantMap.of(source, k.target, k.as_dict())


def _chains_from(
    t: TheorySpec, pool: tuple[ConstantMap, ...], depth: int
) -> list[ConstantMap]:
    """Composites of up to depth pool maps whose source matches t."""
    frontier = [_rebase(k, t) for k in pool if _same_theory(k.source, t)]
    out: list[ConstantMap] = []
    for _ in range(max(depth, 1)):
        out.extend(frontier)
        nxt = []
        for chain in frontier:
            for k in pool:
                if not _same_theory(k.source, chain.target):
                    continue
                if _same_theory(k.target, t) or _same_theory(k.target, chain.target):
                    continue
                step = ConstantMap.of(chain.target, k.target, k.as_dict())
                composed = {
                    name: extend_structurally(step, image)
                    for name, image in chain.mapping
                }
                nxt.append(ConstantMap.of(t, k.target, composed))
        frontier = nxt
    seen: set[tuple[str, tuple[tuple[str, Ty], ...]]] = set()
    unique = []
    for k in out:
        key = (k.target.name, k.mapping)
        if key not in seen:
            seen.add(key)
            unique.append(k)
    return unique


def _maps_into(
    t: TheorySpec, pool: tuple[ConstantMap, ...], depth: int
) -> list[ConstantMap]:
    """Composites of up to depth pool maps whose target matches t."""
    frontier = [
        ConstantMap.of(k.source, t, k.as_dict())
        for k in pool
        if _same_theory(k.target, t)
    ]
    out: list[ConstantMap] = []
    for _ in range(max(depth, 1)):
        out.extend(frontier)
        nxt = []
        for chain in frontier:
            for k in pool:
                if not _same_theory(k.target, chain.source):
                    continue
                if _same_theory(k.source, t) or _same_theory(k.source, chain.source):
                    continue
                pre = ConstantMap.of(k.source, chain.source, k.as_dict())
                composed = {
                    name: extend_structurally(chain, image)
                    for name, image in pre.mapping
                }
                nxt.append(ConstantMap.of(k.source, t, composed))
        frontier = nxt
    seen: set[tuple[str, tuple[tuple[str, Ty], ...]]] = set()
    unique = []
    for k in out:
        key = (k.source.name, k.mapping)
        if key not in seen:
            seen.add(key)
            unique.append(k)
    return unique


def verdict(
    t: TheorySpec,
    fuel: int = DEFAULT_PROBE_FUEL,
    inter_width: int = DEFAULT_PROBE_WIDTH,
    depth: int = DEFAULT_CHAIN_DEPTH,
    registry: TheoryRegistry | None = None,
    extra_maps: tuple[ConstantMap, ...] = (),
    extra_pool: tuple[Term, ...] = (),
    cap: int = DEFAULT_CAP,
) -> SensibilityVerdict:
    """Polarity, then embeddings into known-sensible targets, then witness
    search plus embeddings from known-nonsensible sources, else Unknown."""
    reg = registry if registry is not None else builtin_theories()
    tried: list[str] = []

    pol = _polarity_pass(t)
    if pol is not None:
        return Sensible(pol)
    tried.append(
        "polarity: Fail (criterion is sufficient only)"
        if t.natural
        else "polarity: not applicable (theory not marked natural)"
    )

    pool = _map_pool(reg, extra_maps)
    for k in _chains_from(t, pool, depth):
        target_evidence = _sensible_status(k.target, reg)
        if target_evidence is None:
            tried.append(f"embedding into {k.target.name}: target not known sensible")
            continue
        v = verify_embedding(k, inter_width, cap)
        if isinstance(v, Verified):
            cert = transfer_sensible(k, target_evidence, inter_width, cap)
            return Sensible(EmbeddingInto(k.target.name, cert))
        tried.append(f"embedding into {k.target.name}: {type(v).__name__}")

    w = probe_unsolvable_typing(t, fuel, inter_width, cap, extra_pool)
    if isinstance(w, Witness):
        return NonSensible(UnsolvableTyped(w.term, w.ty, w.derivation, w.head_trace))
    tried.append(f"unsolvable-typing probe: NoneFound at fuel {fuel}")

    for k in _maps_into(t, pool, depth):
        source_evidence: object | None = None
        for name, entry in reg.entries:
            if isinstance(entry.status, KnownNonSensible) and _same_theory(
                entry.spec, k.source
            ):
                source_evidence = RegistryFact(entry.status.citation)
                break
        if source_evidence is None:
            sw = probe_unsolvable_typing(k.source, fuel, inter_width, cap)
            if isinstance(sw, Witness):
                source_evidence = UnsolvableTyped(
                    sw.term, sw.ty, sw.derivation, sw.head_trace
                )
        if source_evidence is None:
            tried.append(
                f"embedding from {k.source.name}: source not known non-sensible"
            )
            continue
        v = verify_embedding(k, inter_width, cap)
        if isinstance(v, Verified):
            cert = transfer_nonsensible(k, source_evidence, inter_width, cap)
            return NonSensible(EmbeddingFrom(k.source.name, cert))
        tried.append(f"embedding from {k.source.name}: {type(v).__name__}")

    return Unknown(tuple(tried))
