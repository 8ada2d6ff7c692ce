"""Command-line front end emitting versioned, deterministic JSON reports.

Exit codes: 0 affirmative (Proven, Valid, Found, Pass, Sensible, all goldens
match), 1 definitive negative, 2 inconclusive within budget, 3 usage or
input errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .assignment import Found, check_derivation, infer_bounded
from .embedding import ConstantMap, Failed, Verified, verify_embedding
from .errors import IttError
from .polarity import (
    PolarityPass,
    StagingFailure,
    check_positive_polarity,
    completion,
    equivalence_classes,
    stage_plan,
)
from .sensibility import (
    EmbeddingFrom,
    EmbeddingInto,
    NonSensible,
    PolarityPass as _SensPolarityPass,
    RegistryFact,
    Sensible,
    Unknown,
    UnsolvableTyped,
    builtin_theories,
    evidence_summary,
    verdict,
)
from .sexpr import (
    parse_basis,
    parse_constant_map,
    parse_derivation,
    unparse_derivation,
    unparse_subproof,
)
from .subtyping import Proven, Valid, check_subproof, derive_le
from .terms import Reached, head_reduce, head_step, parse_term, print_term
from .theory import TheorySpec, parse_theory, validate_natural
from .types import parse_ty, print_ty

DEFAULT_FUEL = 10_000
DEFAULT_WIDTH = 2
DEFAULT_DEPTH = 3
TRACE_CAP = 50


# -- inputs and reports --------------------------------------------------------


def _file_input(path: str) -> dict:
    data = Path(path).read_bytes()
    return {
        "kind": "file",
        "path": path,
        "sha256": hashlib.sha256(data).hexdigest(),
    }


def _inline_input(label: str, text: str) -> dict:
    return {"kind": "inline", "label": label, "text": text}


def _load_theory(arg: str) -> tuple[TheorySpec, dict]:
    """A path to an .itt file, or the name of a built-in theory."""
    p = Path(arg)
    if p.exists():
        spec = parse_theory(p.read_text(encoding="utf-8"))
        return spec, _file_input(arg)
    entry = builtin_theories().lookup(arg)
    return entry.spec, {"kind": "builtin", "name": entry.spec.name}


def _report(command: str, inputs: list[dict], verdict_payload: dict,
            certificates: list[dict]) -> dict:
    return {
        "schema": 1,
        "command": command,
        "inputs": inputs,
        "verdict": verdict_payload,
        "certificates": certificates,
    }


def _subproof_cert(t: TheorySpec, proof) -> dict:
    assert check_subproof(t, proof) == Valid()
    return {"kind": "subproof", "text": unparse_subproof(proof)}


def _derivation_cert(d) -> dict:
    return {"kind": "derivation", "text": unparse_derivation(d)}


# -- command handlers ------------------------------------------------------------


def _cmd_reduce(args) -> tuple[dict, int, list[str]]:
    p = Path(args.term)
    if p.exists():
        src = p.read_text(encoding="utf-8")
        inputs = [_file_input(args.term)]
    else:
        src = args.term
        inputs = [_inline_input("term", args.term)]
    m = parse_term(src)
    r = head_reduce(m, args.fuel)
    trace = [print_term(m)]
    cur = m
    while len(trace) <= min(args.fuel, TRACE_CAP):
        nxt = head_step(cur)
        if nxt is None:
            break
        cur = nxt
        trace.append(print_term(cur))
    if isinstance(r, Reached):
        payload = {
            "result": "Reached",
            "steps": r.steps,
            "final": print_term(r.hnf),
            "trace": trace,
            "trace_truncated": r.steps > len(trace) - 1,
        }
        lines = [f"Reached head normal form in {r.steps} step(s): {print_term(r.hnf)}"]
        code = 0
    else:
        payload = {
            "result": "FuelExhausted",
            "steps": r.steps,
            "last": print_term(r.last),
            "trace": trace,
            "trace_truncated": r.steps > len(trace) - 1,
        }
        lines = [f"FuelExhausted after {r.steps} step(s); last: {print_term(r.last)}"]
        code = 2
    for step in trace[1:]:
        lines.append(f"  -> {step}")
    return _report("reduce", inputs, payload, []), code, lines


def _cmd_subtype(args) -> tuple[dict, int, list[str]]:
    t, theory_input = _load_theory(args.theory)
    halves = args.query.split("<=", 1)
    if len(halves) != 2:
        raise IttError(f"expected 'A <= B', got {args.query!r}")
    a, b = parse_ty(halves[0]), parse_ty(halves[1])
    inputs = [theory_input, _inline_input("query", args.query)]
    v = derive_le(t, a, b, args.width)
    if isinstance(v, Proven):
        payload = {"result": "Proven", "lhs": print_ty(a), "rhs": print_ty(b)}
        certs = [_subproof_cert(t, v.proof)]
        return _report("subtype", inputs, payload, certs), 0, [
            f"Proven: {print_ty(a)} <= {print_ty(b)}",
            certs[0]["text"],
        ]
    payload = {
        "result": "UnknownWithin",
        "lhs": print_ty(a),
        "rhs": print_ty(b),
        "universe_size": v.universe_size,
        "inter_width": v.inter_width,
    }
    lines = [
        f"UnknownWithin: not derivable inside a universe of "
        f"{v.universe_size} types at width {v.inter_width}"
    ]
    return _report("subtype", inputs, payload, []), 2, lines


def _cmd_check(args) -> tuple[dict, int, list[str]]:
    t, theory_input = _load_theory(args.theory)
    d = parse_derivation(Path(args.derivation).read_text(encoding="utf-8"))
    inputs = [theory_input, _file_input(args.derivation)]
    r = check_derivation(t, d)
    if isinstance(r, Valid):
        c = d.conclusion
        payload = {
            "result": "Valid",
            "term": print_term(c.term),
            "ty": print_ty(c.ty),
        }
        lines = [f"Valid: |- {print_term(c.term)} : {print_ty(c.ty)}"]
        return _report("check", inputs, payload, []), 0, lines
    payload = {"result": "Invalid", "path": list(r.path), "reason": r.reason}
    lines = [f"Invalid at node {list(r.path)}: {r.reason}"]
    return _report("check", inputs, payload, []), 1, lines


def _cmd_infer(args) -> tuple[dict, int, list[str]]:
    t, theory_input = _load_theory(args.theory)
    g = parse_basis(args.basis)
    m = parse_term(args.term)
    a = parse_ty(args.type)
    inputs = [
        theory_input,
        _inline_input("basis", args.basis),
        _inline_input("term", args.term),
        _inline_input("type", args.type),
    ]
    r = infer_bounded(t, g, m, a, args.fuel, args.width)
    if isinstance(r, Found):
        payload = {"result": "Found"}
        certs = [_derivation_cert(r.derivation)]
        lines = [f"Found: {print_term(m)} : {print_ty(a)}", certs[0]["text"]]
        return _report("infer", inputs, payload, certs), 0, lines
    payload = {"result": "NotFoundWithinFuel", "fuel": r.fuel}
    lines = [f"NotFoundWithinFuel: no derivation within fuel {r.fuel}"]
    return _report("infer", inputs, payload, []), 2, lines


def _cmd_polarity(args) -> tuple[dict, int, list[str]]:
    t, theory_input = _load_theory(args.theory)
    inputs = [theory_input]
    if not t.natural:
        payload = {"applicable": False, "reason": "theory not marked natural"}
        lines = ["Not applicable: the polarity criterion needs a natural theory"]
        return _report("polarity", inputs, payload, []), 2, lines
    axs = completion(validate_natural(t).axioms)
    pol = check_positive_polarity(axs)
    poset = equivalence_classes(axs)
    classes = [sorted(cls) for cls in poset.classes]
    order = sorted([i, j] for i, j in poset.order)
    plan = stage_plan(axs)
    if isinstance(plan, StagingFailure):
        stages: object = {"result": "failure", "reason": plan.reason}
    else:
        stages = [
            {"solves": sorted(cls), "decorations": dict(sorted(dec.as_dict().items()))}
            for cls, dec in plan
        ]
    if isinstance(pol, PolarityPass):
        pol_payload = {"result": "Pass", "caveats": list(pol.caveats)}
        code = 0
        lines = ["Polarity: Pass"]
    else:
        pol_payload = {
            "result": "Fail",
            "witness": [[a, b, sign] for a, b, sign in pol.witness],
        }
        code = 1
        cycle = " ".join(f"{a}-[{s}]->{b}" for a, b, s in pol.witness)
        lines = [f"Polarity: Fail ({cycle})"]
    payload = {
        "applicable": True,
        "polarity": pol_payload,
        "classes": classes,
        "class_order": order,
        "stages": stages,
    }
    lines.append(f"Classes: {classes}")
    lines.append(f"Class order (by index): {order}")
    if isinstance(plan, StagingFailure):
        lines.append(f"Staging: failure ({plan.reason})")
    else:
        for n, stage in enumerate(stages, 1):
            lines.append(
                f"Stage {n}: solves {stage['solves']} with {stage['decorations']}"
            )
    return _report("polarity", inputs, payload, []), code, lines


def _cmd_embed(args) -> tuple[dict, int, list[str]]:
    src, src_input = _load_theory(args.source)
    tgt, tgt_input = _load_theory(args.target)
    mapping = parse_constant_map(Path(args.map).read_text(encoding="utf-8"))
    k = ConstantMap.of(src, tgt, mapping)
    inputs = [src_input, tgt_input, _file_input(args.map)]
    v = verify_embedding(k, args.width)
    if isinstance(v, Verified):
        payload = {
            "result": "Verified",
            "checks": [
                {"obligation": desc, "has_proof": proof is not None}
                for desc, proof in v.checks
            ],
        }
        certs = [_subproof_cert(tgt, p) for _, p in v.checks if p is not None]
        lines = [f"Verified: {src.name} embeds into {tgt.name}"]
        lines += [f"  {c['obligation']}" for c in payload["checks"]]
        return _report("embed", inputs, payload, certs), 0, lines
    if isinstance(v, Failed):
        payload = {"result": "Failed", "obligation": v.obligation, "detail": v.detail}
        lines = [f"Failed on {v.obligation}: {v.detail}"]
        return _report("embed", inputs, payload, []), 1, lines
    payload = {"result": "UnknownWithin", "obligation": v.obligation}
    lines = [f"UnknownWithin: could not discharge {v.obligation}"]
    return _report("embed", inputs, payload, []), 2, lines


def _evidence_json(e: object) -> dict:
    if isinstance(e, _SensPolarityPass):
        return {"kind": "PolarityPass", "caveats": list(e.caveats)}
    if isinstance(e, RegistryFact):
        return {"kind": "RegistryFact", "citation": e.citation}
    if isinstance(e, EmbeddingInto):
        return {
            "kind": "EmbeddingInto",
            "target": e.target,
            "target_evidence": _evidence_json(e.certificate.evidence),
        }
    if isinstance(e, EmbeddingFrom):
        return {
            "kind": "EmbeddingFrom",
            "source": e.source,
            "source_evidence": _evidence_json(e.certificate.evidence),
        }
    if isinstance(e, UnsolvableTyped):
        return {
            "kind": "UnsolvableTyped",
            "term": print_term(e.term),
            "ty": print_ty(e.ty),
            "head_trace": {
                "result": "FuelExhausted",
                "steps": e.head_trace.steps,
                "last": print_term(e.head_trace.last),
            },
        }
    return {"kind": type(e).__name__}


def _verdict_certs(v) -> list[dict]:
    certs: list[dict] = []
    e = getattr(v, "evidence", None)
    if isinstance(e, UnsolvableTyped):
        certs.append(_derivation_cert(e.derivation))
    if isinstance(e, (EmbeddingInto, EmbeddingFrom)):
        emb = e.certificate.embedding
        for _, proof in emb.checks:
            if proof is not None:
                certs.append({"kind": "subproof", "text": unparse_subproof(proof)})
        inner = e.certificate.evidence
        if isinstance(inner, UnsolvableTyped):
            certs.append(_derivation_cert(inner.derivation))
    return certs


def _read_pool(path: str):
    terms = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            terms.append(parse_term(line))
    return tuple(terms)


def _extra_maps(t: TheorySpec, pairs_into, pairs_from) -> tuple[ConstantMap, ...]:
    out = []
    for theory_arg, map_arg in pairs_into or []:
        other, _ = _load_theory(theory_arg)
        mapping = parse_constant_map(Path(map_arg).read_text(encoding="utf-8"))
        out.append(ConstantMap.of(t, other, mapping))
    for theory_arg, map_arg in pairs_from or []:
        other, _ = _load_theory(theory_arg)
        mapping = parse_constant_map(Path(map_arg).read_text(encoding="utf-8"))
        out.append(ConstantMap.of(other, t, mapping))
    return tuple(out)


def _cmd_sensibility(args) -> tuple[dict, int, list[str]]:
    t, theory_input = _load_theory(args.theory)
    inputs = [theory_input]
    extra_pool = ()
    if args.pool:
        extra_pool = _read_pool(args.pool)
        inputs.append(_file_input(args.pool))
    maps = _extra_maps(t, args.map_into, args.map_from)
    for theory_arg, map_arg in (args.map_into or []) + (args.map_from or []):
        inputs.append(_file_input(map_arg))
    v = verdict(
        t,
        fuel=args.fuel,
        inter_width=args.width,
        depth=args.depth,
        extra_maps=maps,
        extra_pool=extra_pool,
    )
    if isinstance(v, Sensible):
        payload = {"result": "Sensible", "evidence": _evidence_json(v.evidence)}
        code = 0
        lines = [f"Sensible ({payload['evidence']['kind']})"]
    elif isinstance(v, NonSensible):
        payload = {"result": "NonSensible", "evidence": _evidence_json(v.evidence)}
        code = 1
        lines = [f"NonSensible ({payload['evidence']['kind']})"]
        if isinstance(v.evidence, UnsolvableTyped):
            lines.append(
                f"  witness: {print_term(v.evidence.term)} : {print_ty(v.evidence.ty)}"
            )
    else:
        payload = {"result": "Unknown", "tried": list(v.tried)}
        code = 2
        lines = ["Unknown; attempts:"] + [f"  {x}" for x in v.tried]
    return _report("sensibility", inputs, payload, _verdict_certs(v)), code, lines


def _cmd_corpus(args) -> tuple[dict, int, list[str]]:
    reg = builtin_theories()
    if args.all or not args.names:
        names = list(reg.names())
    else:
        names = [reg.lookup(n).spec.name for n in args.names]
    golden = json.loads(
        (Path(__file__).parent / "corpus" / "verdicts.json").read_text(
            encoding="utf-8"
        )
    )

    def analyse(name: str) -> tuple[str, dict, bool]:
        v = verdict(
            reg.lookup(name).spec,
            fuel=args.fuel,
            inter_width=args.width,
            depth=args.depth,
        )
        got = {"verdict": type(v).__name__, "evidence": evidence_summary(v)}
        want = golden.get(name)
        return name, got, got == want

    results: dict[str, dict] = {}
    all_match = True
    with ThreadPoolExecutor(max_workers=4) as pool:
        for name, got, match in pool.map(analyse, names):
            results[name] = {
                "verdict": got["verdict"],
                "evidence": got["evidence"],
                "golden": golden.get(name),
                "match": match,
            }
            all_match = all_match and match
    payload = {"results": results, "all_match": all_match}
    lines = []
    for name in names:
        r = results[name]
        mark = "ok" if r["match"] else "MISMATCH"
        lines.append(f"{name:10s} {r['verdict']:12s} [{mark}]")
    lines.append("all golden verdicts match" if all_match else "golden mismatch")
    inputs = [{"kind": "builtin-corpus", "theories": names}]
    return _report("corpus", inputs, payload, []), (0 if all_match else 1), lines


# -- parser ----------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors must not collide with Unknown=2
        self.print_usage(sys.stderr)
        self.exit(3, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="ittlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--json", action="store_true", help="emit the JSON report")
        return p

    p = add("reduce", "head-reduce a term")
    p.add_argument("term", help="term text or path to a term file")
    p.add_argument("--fuel", type=int, default=DEFAULT_FUEL)

    p = add("subtype", "decide A <= B inside a bounded universe")
    p.add_argument("theory", help=".itt file or builtin name")
    p.add_argument("query", help="inequality such as 'c0 -> c0 <= c1 -> c0'")
    p.add_argument("--width", type=int, default=DEFAULT_WIDTH)

    p = add("check", "validate a typing derivation file")
    p.add_argument("theory")
    p.add_argument("derivation", help="path to a .drv file")

    p = add("infer", "search for a typing derivation")
    p.add_argument("theory")
    p.add_argument("term")
    p.add_argument("type")
    p.add_argument("--basis", default="", help="bindings such as 'x:c0, y:c1'")
    p.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    p.add_argument("--width", type=int, default=DEFAULT_WIDTH)

    p = add("polarity", "polarity check, classes and staging for a natural theory")
    p.add_argument("theory")

    p = add("embed", "verify a constant map as an embedding")
    p.add_argument("source")
    p.add_argument("target")
    p.add_argument("map", help="path to a 'c -> TY' map file")
    p.add_argument("--width", type=int, default=DEFAULT_WIDTH)

    p = add("sensibility", "run the sensibility pipeline on a theory")
    p.add_argument("theory")
    p.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    p.add_argument("--width", type=int, default=DEFAULT_WIDTH)
    p.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
    p.add_argument("--pool", help="file of extra candidate unsolvable terms")
    p.add_argument(
        "--map-into",
        nargs=2,
        metavar=("TARGET", "MAP"),
        action="append",
        help="extra embedding of this theory into TARGET",
    )
    p.add_argument(
        "--map-from",
        nargs=2,
        metavar=("SOURCE", "MAP"),
        action="append",
        help="extra embedding of SOURCE into this theory",
    )

    p = add("corpus", "run the pipeline over built-in theories and diff goldens")
    p.add_argument("names", nargs="*", help="theory names (default: all)")
    p.add_argument("--all", action="store_true")
    p.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    p.add_argument("--width", type=int, default=DEFAULT_WIDTH)
    p.add_argument("--depth", type=int, default=DEFAULT_DEPTH)

    return parser


_HANDLERS = {
    "reduce": _cmd_reduce,
    "subtype": _cmd_subtype,
    "check": _cmd_check,
    "infer": _cmd_infer,
    "polarity": _cmd_polarity,
    "embed": _cmd_embed,
    "sensibility": _cmd_sensibility,
    "corpus": _cmd_corpus,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        report, code, lines = _HANDLERS[args.command](args)
    except IttError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    if args.json:
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        print("\n".join(lines))
    return code


if __name__ == "__main__":
    sys.exit(main())
