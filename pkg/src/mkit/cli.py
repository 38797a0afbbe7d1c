"""Command-line front end.

Every command reads a JSON input document, runs one pipeline and emits a
JSON report (stdout or ``--out``).  Exit codes are a stable contract:
0 success, 1 a verified identity failed or a suite found a counterexample,
2 usage or input error.  Coordinates on the command line are 1-based
(``x1 .. xn``); rational values are written ``p/q``.
"""

from __future__ import annotations

import argparse
import csv
import sys
from fractions import Fraction

from .contact import b_coefficients, classify_contact_surface, contact_function
from .cubic import apolarity_residual, blaschke_data, cubic_tensor_appendix, cubic_tensor_closed
from .darboux import GridSpec, darboux_directions_surface, darboux_locus_scan, is_generalized_darboux
from .documents import (
    CONVENTION_NOTES,
    Report,
    document_digest,
    germ_to_document,
    graph_to_document,
    load_document,
    parse_germ_document,
    poly_to_coeff_list,
    scalar_to_json,
)
from .errors import InternalCheckError
from .germs import align_direction, normalize
from .jets import EXACT, FLOAT
from .moutard import (
    SectionSpec,
    moutard_beta,
    moutard_pencil,
    pencil_constructive,
    pencils_equal,
    restrict_quadric,
    section_germ,
)
from .verify import SUITES, run_suite


def _parse_values(text: str, backend: str) -> list:
    out = []
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        value = Fraction(piece)
        out.append(value if backend == EXACT else float(value))
    return out


def _parse_section(text: str, backend: str) -> SectionSpec:
    indices = []
    values = []
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        if "=" not in piece:
            raise ValueError(f"section entry {piece!r} is not of the form sigma=value")
        key, _, raw = piece.partition("=")
        sigma = int(key)
        if sigma < 2:
            raise ValueError("section indices start at coordinate 2")
        value = Fraction(raw)
        indices.append(sigma - 1)
        values.append(value if backend == EXACT else float(value))
    return SectionSpec(tuple(indices), tuple(values))


def _load_germ(args):
    doc = load_document(args.input)
    parsed = parse_germ_document(doc)
    if parsed.kind != "germ":
        raise ValueError("this command expects a normal-form germ document "
                         "(with a 'signature' field); run 'normalize' first")
    return parsed


def _load_graph(args):
    doc = load_document(args.input)
    parsed = parse_germ_document(doc)
    poly = parsed.graph if parsed.kind == "graph" else parsed.germ.f
    return parsed, poly


def _beta_for(args, germ):
    if getattr(args, "beta", None) is not None:
        value = Fraction(args.beta)
        return value if germ.backend == EXACT else float(value)
    return moutard_beta(germ)


def _quadric_payload(quadric) -> dict:
    return {"coefficients": poly_to_coeff_list(quadric.poly)}


def _one_based(pairs: dict) -> dict:
    out = {}
    for key, value in pairs.items():
        if isinstance(key, tuple):
            label = ",".join(str(k + 1) for k in key)
        else:
            label = str(key + 1)
        out[label] = value
    return out


def _emit(report: Report, args) -> int:
    if getattr(args, "typo_notes", True):
        report.warnings.extend(CONVENTION_NOTES)
    text = report.to_json()
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")
    else:
        print(text)
    return report.status


# -- command handlers ---------------------------------------------------------


def cmd_normalize(args) -> int:
    parsed, poly = _load_graph(args)
    point = _parse_values(args.point, poly.backend) if args.point else [0] * poly.n_vars
    backend = args.backend
    germ, frame = normalize(poly, point, args.order or max(4, poly.max_order), backend=backend)
    report = Report("normalize", document_digest(parsed.document), germ.backend, {
        "germ": germ_to_document(germ),
        "frame": {
            "translate": [scalar_to_json(v) for v in frame.translate],
            "shear": [scalar_to_json(v) for v in frame.shear],
            "linear": [[scalar_to_json(v) for v in row] for row in frame.linear],
            "height": scalar_to_json(frame.height),
        },
        "signature": list(germ.signature),
    })
    return _emit(report, args)


def cmd_pencil(args) -> int:
    parsed = _load_germ(args)
    germ = parsed.germ
    closed = moutard_pencil(germ)
    constructive = pencil_constructive(germ)
    matches = pencils_equal(closed, constructive)
    report = Report("pencil", document_digest(parsed.document), germ.backend, {
        "base": _quadric_payload(closed.base),
        "beta": scalar_to_json(closed.distinguished_beta),
        "constructive_beta": scalar_to_json(constructive.distinguished_beta),
        "constructive_matches": matches,
        "distinguished_member": _quadric_payload(closed.distinguished_member()),
    })
    if not matches:
        report.status = 1
    return _emit(report, args)


def cmd_beta(args) -> int:
    parsed = _load_germ(args)
    report = Report("beta", document_digest(parsed.document), parsed.germ.backend, {
        "beta": scalar_to_json(moutard_beta(parsed.germ)),
    })
    return _emit(report, args)


def cmd_contact(args) -> int:
    parsed = _load_germ(args)
    germ = parsed.germ
    beta = _beta_for(args, germ)
    member = moutard_pencil(germ).member(beta)
    jet = contact_function(germ, member, order=args.order or germ.order)
    bmap = b_coefficients(jet)
    results = {
        "beta": scalar_to_json(beta),
        "two_jet_zero": jet.two_jet_is_zero(),
        "b111": scalar_to_json(bmap["b111"]),
        "b11s": _one_based({k: scalar_to_json(v) for k, v in bmap["b11"].items()}),
        "b1ss": _one_based({k: scalar_to_json(v) for k, v in bmap["b1_diag"].items()}),
        "b1st": _one_based({k: scalar_to_json(v) for k, v in bmap["b1_cross"].items()}),
        "q": {"coefficients": poly_to_coeff_list(jet.q_form())},
        "transverse_cubic": {"coefficients": poly_to_coeff_list(jet.transverse_cubic())},
    }
    if "b1111" in bmap:
        results["b1111"] = scalar_to_json(bmap["b1111"])
    report = Report("contact", document_digest(parsed.document), germ.backend, results)
    return _emit(report, args)


def cmd_cubic(args) -> int:
    parsed = _load_germ(args)
    germ = parsed.germ
    by_construction = cubic_tensor_appendix(germ)
    by_formula = cubic_tensor_closed(germ)
    routes_equal = by_construction.same_entries(
        by_formula, tol=0.0 if germ.backend == EXACT else 1e-9)
    data = blaschke_data(germ)
    entries = [{"index": [i + 1 for i in key], "value": scalar_to_json(value)}
               for key, value in sorted(by_construction.entries.items())]
    report = Report("cubic", document_digest(parsed.document), germ.backend, {
        "entries": entries,
        "routes_equal": routes_equal,
        "apolarity_residual": [scalar_to_json(v) for v in
                               apolarity_residual(by_construction, germ.signature)],
        "scale_gradient": [scalar_to_json(v) for v in data.scale_gradient],
        "tangential": [scalar_to_json(v) for v in data.tangential],
    })
    if not routes_equal:
        report.status = 1
    return _emit(report, args)


def cmd_darboux(args) -> int:
    parsed = _load_germ(args)
    germ = parsed.germ
    results = {}
    if args.direction:
        direction = _parse_values(args.direction, germ.backend)
        germ, frame = align_direction(germ, direction)
        results["aligned_frame"] = {
            "linear": [[scalar_to_json(v) for v in row] for row in frame.linear],
            "signature": list(germ.signature),
        }
    report_data = is_generalized_darboux(germ, threshold=args.threshold)
    results.update({
        "direction": [scalar_to_json(v) for v in report_data.direction],
        "b1ss": _one_based({k: scalar_to_json(v) for k, v in report_data.b_diag.items()}),
        "b1st": _one_based({k: scalar_to_json(v) for k, v in report_data.b_cross.items()}),
        "c_slice": _one_based({k: scalar_to_json(v) for k, v in report_data.c_slice.items()}),
        "c111": scalar_to_json(report_data.c111),
        "verdict_b": report_data.verdict_b,
        "verdict_c": report_data.verdict_c,
        "agreement": report_data.agreement,
        "q_norm": report_data.q_norm,
        "is_generalized_darboux": report_data.verdict_b,
    })
    report = Report("darboux", document_digest(parsed.document), germ.backend, results)
    return _emit(report, args)


def cmd_classify(args) -> int:
    parsed = _load_germ(args)
    germ = parsed.germ
    beta = _beta_for(args, germ)
    outcome = classify_contact_surface(germ, beta)
    report = Report("classify", document_digest(parsed.document), germ.backend, {
        "beta": scalar_to_json(beta),
        "class": outcome.kind,
        "witnesses": {k: scalar_to_json(v) for k, v in outcome.witnesses.items()},
        "reason": outcome.reason,
        "residual_support": [list(idx) for idx in outcome.residual_support],
        "substitution": [scalar_to_json(v) for v in outcome.substitution],
    })
    return _emit(report, args)


def cmd_section(args) -> int:
    parsed = _load_germ(args)
    germ = parsed.germ
    spec = _parse_section(args.section, germ.backend)
    outer = moutard_pencil(germ).distinguished_member()
    restricted = restrict_quadric(outer, spec).normalized()
    inner = section_germ(germ, spec)
    intrinsic = moutard_pencil(inner).distinguished_member().normalized()
    if germ.backend == EXACT:
        equal = restricted.poly == intrinsic.poly
    else:
        equal = restricted.poly.coeff_distance(intrinsic.poly) <= 1e-9
    report = Report("section", document_digest(parsed.document), germ.backend, {
        "section": {"indices": [i + 1 for i in spec.indices],
                    "values": [scalar_to_json(v) for v in spec.values]},
        "restricted": _quadric_payload(restricted),
        "intrinsic": _quadric_payload(intrinsic),
        "section_germ": germ_to_document(inner),
        "equal": equal,
    })
    if not equal:
        report.status = 1
    return _emit(report, args)


def cmd_scan(args) -> int:
    parsed, poly = _load_graph(args)
    n = poly.n_vars
    bounds = [piece.strip() for piece in args.region.split(",") if piece.strip()]
    if len(bounds) != n:
        raise ValueError(f"--region needs {n} lo:hi pairs")
    mins, maxs = [], []
    for piece in bounds:
        lo, _, hi = piece.partition(":")
        mins.append(float(Fraction(lo)))
        maxs.append(float(Fraction(hi)))
    counts = [int(c) for c in str(args.resolution).split(",")]
    if len(counts) == 1:
        counts = counts * n
    grid = GridSpec(tuple(mins), tuple(maxs), tuple(counts))

    def progress(done, total):
        print(f"scan: {done}/{total} points", file=sys.stderr, flush=True)

    result = darboux_locus_scan(poly.to_float(), grid,
                                direction_count=args.directions,
                                threshold=args.threshold, seed=args.seed,
                                progress=progress)
    csv_path = args.csv or ((args.out.rsplit(".", 1)[0] if args.out else "mkit-scan") + ".csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        header = [f"x{i + 1}" for i in range(n)] + ["status"] \
            + [f"best_v{i + 1}" for i in range(n)] + ["q_norm", "verdict"]
        writer.writerow(header)
        for entry in result.entries:
            row = list(entry.point) + [entry.status]
            row += list(entry.best_direction) if entry.best_direction else [""] * n
            row += [entry.q_norm if entry.q_norm is not None else "", entry.verdict]
            writer.writerow(row)
    report = Report("scan", document_digest(parsed.document), FLOAT, {
        "summary": result.summary(),
        "csv": csv_path,
        "threshold": args.threshold,
        "seed": args.seed,
        "directions": args.directions,
        "cell_pass_fractions": {f"{t:.0e}": result.cell_pass_fraction(t)
                                for t in (1e-3, 1e-6, 1e-9)},
        "entries": [{
            "point": list(e.point),
            "status": e.status,
            "best_direction": list(e.best_direction) if e.best_direction else None,
            "q_norm": e.q_norm,
            "verdict": e.verdict,
        } for e in result.entries],
    })
    return _emit(report, args)


def cmd_verify(args) -> int:
    result = run_suite(args.suite, seed=args.seed, count=args.count)
    report = Report("verify", None, EXACT, {
        "suite": result.name,
        "passed": result.passed,
        "trials": result.trials,
        "failures": result.failures,
        "counterexample": result.counterexample,
        "details": result.details,
    })
    if not result.passed:
        report.status = 1
    return _emit(report, args)


# -- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mkit",
        description="Osculating hyperquadrics, contact functions, cubic forms "
                    "and Darboux directions of hypersurface germs.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, input_required=True):
        p.add_argument("--input", required=input_required, help="JSON input document")
        p.add_argument("--out", help="write the JSON report to this file")
        p.add_argument("--typo-notes", action=argparse.BooleanOptionalAction,
                       default=True, help="include convention notes in the report")

    p = sub.add_parser("normalize", help="bring a graph to normal form at a point")
    common(p)
    p.add_argument("--point", help="comma-separated coordinates (default: origin)")
    p.add_argument("--order", type=int, help="truncation order (default: input order, min 4)")
    p.add_argument("--backend", choices=[EXACT, FLOAT], default=None)
    p.set_defaults(handler=cmd_normalize)

    p = sub.add_parser("pencil", help="closed-form and constructive quadric pencils")
    common(p)
    p.set_defaults(handler=cmd_pencil)

    p = sub.add_parser("beta", help="distinguished pencil parameter")
    common(p)
    p.set_defaults(handler=cmd_beta)

    p = sub.add_parser("contact", help="contact function coefficients")
    common(p)
    p.add_argument("--beta", help="pencil parameter (default: distinguished)")
    p.add_argument("--order", type=int)
    p.set_defaults(handler=cmd_contact)

    p = sub.add_parser("cubic", help="cubic form by both routes")
    common(p)
    p.set_defaults(handler=cmd_cubic)

    p = sub.add_parser("darboux", help="generalized Darboux verdict for a direction")
    common(p)
    p.add_argument("--direction", help="tangent direction (default: first axis)")
    p.add_argument("--threshold", type=float, default=1e-9)
    p.set_defaults(handler=cmd_darboux)

    p = sub.add_parser("classify", help="higher-order surface contact class")
    common(p)
    p.add_argument("--beta", help="pencil parameter (default: distinguished)")
    p.set_defaults(handler=cmd_classify)

    p = sub.add_parser("section", help="sliced hyperquadric against the slice's own quadric")
    common(p)
    p.add_argument("--section", required=True,
                   help="slice spec, e.g. '2=1/2,3=-1' (1-based indices from 2)")
    p.set_defaults(handler=cmd_section)

    p = sub.add_parser("scan", help="grid scan for Darboux directions")
    common(p)
    p.add_argument("--region", required=True, help="per-axis bounds 'lo:hi,lo:hi,...'")
    p.add_argument("--resolution", required=True, help="points per axis (int or comma list)")
    p.add_argument("--directions", type=int, default=64)
    p.add_argument("--threshold", type=float, default=1e-9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", help="CSV output path (default: derived from --out)")
    p.set_defaults(handler=cmd_scan)

    p = sub.add_parser("verify", help="run a randomized identity suite")
    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--out", help="write the JSON report to this file")
    p.add_argument("--typo-notes", action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(handler=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except InternalCheckError as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
