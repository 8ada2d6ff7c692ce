"""Constant maps between theories and checked embedding certificates.

An embedding sends every source constant to a target type so that axioms,
the top constant, and the rule schemata are preserved.  A verified embedding
transfers sensibility backward (target sensible implies source sensible) and
non-sensibility forward.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

from .errors import InvalidInput, PreconditionFailed
from .subtyping import (
    DEFAULT_CAP,
    DEFAULT_WIDTH,
    Proven,
    SubProof,
    build_universe,
    is_top_equiv,
    saturated_ctx,
)
from .theory import TheorySpec
from .types import TOP, Const, Ty, canonicalize, constants_of, map_consts, print_ty


@dataclass(frozen=True)
class ConstantMap:
    """Total map from source constants to target types."""

    source: TheorySpec
    target: TheorySpec
    mapping: tuple[tuple[str, Ty], ...]

    @staticmethod
    def of(
        source: TheorySpec, target: TheorySpec, mapping: Mapping[str, Ty]
    ) -> "ConstantMap":
        missing = source.constants - mapping.keys()
        if missing:
            names = ", ".join(sorted(missing))
            raise InvalidInput(f"map does not cover source constants: {names}")
        extra = mapping.keys() - source.constants
        if extra:
            names = ", ".join(sorted(extra))
            raise InvalidInput(f"map mentions non-source constants: {names}")
        entries = []
        for name in sorted(mapping):
            image = canonicalize(mapping[name])
            undeclared = constants_of(image) - target.constants
            if undeclared:
                names = ", ".join(sorted(undeclared))
                raise InvalidInput(
                    f"image of {name} uses constants not in target: {names}"
                )
            entries.append((name, image))
        return ConstantMap(source, target, tuple(entries))

    def lookup(self, name: str) -> Ty:
        for key, image in self.mapping:
            if key == name:
                return image
        raise InvalidInput(f"constant {name} not in map")

    def as_dict(self) -> dict[str, Ty]:
        return dict(self.mapping)


def extend_structurally(k: ConstantMap, a: Ty) -> Ty:
    """Homomorphic extension: constants via the map, U/->/& preserved."""
    undeclared = constants_of(a) - k.source.constants
    if undeclared:
        names = ", ".join(sorted(undeclared))
        raise InvalidInput(f"type uses constants not in source: {names}")
    return canonicalize(map_consts(a, lambda c: k.lookup(c)))


Check = tuple[str, Union[SubProof, None]]


@dataclass(frozen=True)
class Verified:
    checks: tuple[Check, ...]


@dataclass(frozen=True)
class Failed:
    obligation: str
    detail: str


@dataclass(frozen=True)
class UnknownWithin:
    obligation: str


EmbeddingVerdict = Union[Verified, Failed, UnknownWithin]


def _flag_gap(k: ConstantMap) -> frozenset:
    return k.source.flags - k.target.flags


def verify_embedding(
    k: ConstantMap,
    inter_width: int = DEFAULT_WIDTH,
    cap: int = DEFAULT_CAP,
) -> EmbeddingVerdict:
    """Discharge the embedding obligations inside one target universe.

    Checked pointwise: every source axiom direction maps to a provable
    target inequality, and each constant's image is provably top-equivalent
    exactly when the constant is in the source.  Preservation of arrows and
    meets holds by construction of extend_structurally; preservation of the
    full generated order then follows from the axiom checks together with
    the rule-flag inclusion, recorded as a meta-obligation.
    """
    gap = _flag_gap(k)
    if gap:
        names = ", ".join(sorted(f.value for f in gap))
        return Failed(
            "rule-flags",
            f"RuleFlagGap: source enables {names} not available in target",
        )

    checks: list[Check] = []
    checks.append(
        (
            "rule schemata: source flags covered by target (order preservation "
            "follows from axiom checks under shared schemata)",
            None,
        )
    )

    seeds: list[Ty] = [Const(c) for c in sorted(k.target.constants)]
    mapped_axioms: list[tuple[str, Ty, Ty]] = []
    for lhs, rhs in k.source.le_axiom_pairs():
        image_l = extend_structurally(k, lhs)
        image_r = extend_structurally(k, rhs)
        seeds.extend([image_l, image_r])
        desc = (
            f"axiom image: {print_ty(lhs)} <= {print_ty(rhs)}  |->  "
            f"{print_ty(image_l)} <= {print_ty(image_r)}"
        )
        mapped_axioms.append((desc, image_l, image_r))
    for name, image in k.mapping:
        seeds.append(image)

    universe = build_universe(k.target, seeds, inter_width, cap)
    ctx = saturated_ctx(k.target, universe)

    for desc, image_l, image_r in mapped_axioms:
        if ctx.holds(image_l, image_r):
            checks.append((desc, ctx.proof(image_l, image_r)))
        else:
            return UnknownWithin(desc)

    for name, image in k.mapping:
        src_top = is_top_equiv(k.source, Const(name), inter_width, cap)
        tgt_top = ctx.holds(TOP, image)
        desc = f"top preservation: {name} |-> {print_ty(image)}"
        if isinstance(src_top, Proven) and tgt_top:
            checks.append((desc + " (both ~ U)", ctx.proof(TOP, image)))
        elif not isinstance(src_top, Proven) and not tgt_top:
            checks.append((desc + " (neither provably ~ U)", None))
        else:
            # One side provably collapses to U and the other is not known
            # to; the negative half is undecidable within this universe.
            return UnknownWithin(desc)

    return Verified(tuple(checks))


def compose_maps(k1: ConstantMap, k2: ConstantMap) -> ConstantMap:
    """Pointwise composition: first k1, then k2 extended structurally."""
    if k1.target.name != k2.source.name or k1.target.constants != k2.source.constants:
        raise InvalidInput("maps do not compose: k1 target differs from k2 source")
    composed = {name: extend_structurally(k2, image) for name, image in k1.mapping}
    return ConstantMap.of(k1.source, k2.target, composed)


@dataclass(frozen=True)
class TransferCertificate:
    """Bundled embedding checks plus the evidence that crossed the map."""

    kind: str
    source_name: str
    target_name: str
    embedding: Verified
    evidence: object


def transfer_sensible(
    k: ConstantMap,
    target_evidence: object,
    inter_width: int = DEFAULT_WIDTH,
    cap: int = DEFAULT_CAP,
) -> TransferCertificate:
    """Target sensible plus verified embedding yields source sensible."""
    if target_evidence is None:
        raise PreconditionFailed("sensibility evidence for the target is required")
    verdict = verify_embedding(k, inter_width, cap)
    if not isinstance(verdict, Verified):
        raise PreconditionFailed(f"embedding not verified: {verdict}")
    return TransferCertificate(
        "sensible", k.source.name, k.target.name, verdict, target_evidence
    )


def transfer_nonsensible(
    k: ConstantMap,
    source_evidence: object,
    inter_width: int = DEFAULT_WIDTH,
    cap: int = DEFAULT_CAP,
) -> TransferCertificate:
    """Source non-sensible plus verified embedding yields target non-sensible."""
    if source_evidence is None:
        raise PreconditionFailed("non-sensibility evidence for the source is required")
    verdict = verify_embedding(k, inter_width, cap)
    if not isinstance(verdict, Verified):
        raise PreconditionFailed(f"embedding not verified: {verdict}")
    return TransferCertificate(
        "nonsensible", k.source.name, k.target.name, verdict, source_evidence
    )
