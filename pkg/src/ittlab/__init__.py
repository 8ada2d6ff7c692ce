"""Intersection type theories: subtyping, assignment, filter models, sensibility.

The submodules build on each other in this order: terms and types, theory
specifications, the bounded subtyping engine, type assignment and filters,
probes, polarity and staging, embeddings, and the sensibility pipeline.  The
names re-exported here cover the everyday workflow; anything finer-grained
stays importable from its submodule.
"""

from .assignment import (
    Basis,
    Derivation,
    Found,
    Judgment,
    NotFoundWithinFuel,
    check_derivation,
    infer_bounded,
    subject_reduction_probe,
)
from .embedding import (
    ConstantMap,
    TransferCertificate,
    Verified,
    compose_maps,
    extend_structurally,
    transfer_nonsensible,
    transfer_sensible,
    verify_embedding,
)
from .errors import IttError
from .polarity import (
    check_positive_polarity,
    completion,
    decorate_class,
    equivalence_classes,
    stage_plan,
)
from .sensibility import (
    NonSensible,
    Sensible,
    Unknown,
    builtin_theories,
    probe_unsolvable_typing,
    verdict,
)
from .subtyping import Proven, SubProof, UnknownWithin, check_subproof, derive_le
from .terms import head_reduce, parse_term, print_term
from .theory import TheorySpec, parse_theory, validate_natural
from .types import TOP, Ty, canonicalize, parse_ty, print_ty

__version__ = "0.1.0"

__all__ = [
    "Basis",
    "ConstantMap",
    "Derivation",
    "Found",
    "IttError",
    "Judgment",
    "NonSensible",
    "NotFoundWithinFuel",
    "Proven",
    "Sensible",
    "SubProof",
    "TOP",
    "TheorySpec",
    "TransferCertificate",
    "Ty",
    "Unknown",
    "UnknownWithin",
    "Verified",
    "builtin_theories",
    "canonicalize",
    "check_derivation",
    "check_positive_polarity",
    "check_subproof",
    "completion",
    "compose_maps",
    "decorate_class",
    "derive_le",
    "equivalence_classes",
    "extend_structurally",
    "head_reduce",
    "infer_bounded",
    "parse_term",
    "parse_theory",
    "parse_ty",
    "print_term",
    "print_ty",
    "probe_unsolvable_typing",
    "stage_plan",
    "subject_reduction_probe",
    "transfer_nonsensible",
    "transfer_sensible",
    "validate_natural",
    "verdict",
    "verify_embedding",
    "__version__",
]
