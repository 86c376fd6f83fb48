"""Command line entry point: ``cenbm <command> ...``.

Exit status is 0 on success, 1 on input or validation errors and 2 when a
certification or verification fails. Errors are written to stderr as JSON.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import replace
from typing import List, Optional

from .certify import certify_g_max_on_Q, maximize_f_on_domain
from .errors import CertificationError, LemmaViolation, ProofViolation
from .estimate import EstimatorConfig, estimate
from .geometry import ConvexPolygon, random_convex_polygon
from .hexagon import check_centroid_lemma, inscribe_hexagon_report
from .render import render_pentagon_triangle, render_trace, write
from .witness import BOUND, ChainGapWarning, construct, tighten, verify_witness

EXIT_OK, EXIT_INPUT, EXIT_FAILED = 0, 1, 2


class VerificationFailed(Exception):
    def __init__(self, message: str, payload: Optional[dict] = None):
        super().__init__(message)
        self.payload = payload or {}


def _dump(obj) -> str:
    # repr floats are the shortest strings that parse back to the same double
    return json.dumps(obj, allow_nan=False)


def _load_json(path: str):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def load_polygon(path: str) -> ConvexPolygon:
    data = _load_json(path)
    if isinstance(data, list):
        data = {"vertices": data}
    return ConvexPolygon.from_json(data)


def _emit(obj) -> None:
    sys.stdout.write(_dump(obj) + "\n")


def cmd_inscribe(args) -> int:
    poly = load_polygon(args.polygon)
    rep = inscribe_hexagon_report(poly, args.tol)
    holds, margin = check_centroid_lemma(poly, rep.hexagon)
    out = rep.to_json()
    out["centroid_lemma"] = {"holds": holds, "margin": margin}
    _emit(out)
    return EXIT_OK


def cmd_witness(args) -> int:
    C, D = load_polygon(args.C), load_polygon(args.D)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ChainGapWarning)
        try:
            w, trace = construct(C, D, tol=args.tol)
        except ProofViolation as exc:
            if args.trace and exc.trace is not None:
                with open(args.trace, "w", encoding="utf-8") as fh:
                    fh.write(_dump(exc.trace.to_json()) + "\n")
            raise VerificationFailed(str(exc), {
                "failures": [[name, float(v)] for name, v in exc.failures],
                "certified_ratio": exc.certified_ratio,
            }) from exc
    if args.tighten:
        w = replace(w, tightened=tighten(C, D, w))
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            fh.write(_dump(trace.to_json()) + "\n")
    check = verify_witness(C, D, w, args.tol)
    out = w.to_json()
    out["verification"] = check
    if caught:
        out["chain_gaps"] = sorted(trace.diagnostics.get("broken_links", {}))
    _emit(out)
    if not check["ok"] or w.lam > BOUND + 1e-9:
        raise VerificationFailed("witness does not verify", check)
    return EXIT_OK


def cmd_certify(args) -> int:
    g = certify_g_max_on_Q(args.grid, strict=False)
    f = maximize_f_on_domain(args.samples, seed=args.seed, strict=False)
    out = {"g_on_Q": g.to_json(), "f_on_TxT+": f.to_json(), "bound": BOUND,
           "certified": g.certified and f.certified}
    _emit(out)
    if not out["certified"]:
        raise VerificationFailed("bound not certified", {"failures": g.failures + f.failures})
    return EXIT_OK


def cmd_estimate(args) -> int:
    C, D = load_polygon(args.C), load_polygon(args.D)
    cfg = EstimatorConfig.for_budget(args.budget, args.mode)
    res = estimate(C, D, cfg)
    _emit(res.to_json())
    if not res.verified:
        raise VerificationFailed("estimate did not verify", {"lambda_hat": res.lambda_hat})
    return EXIT_OK


def cmd_render(args) -> int:
    if args.pentagon_triangle:
        svg = render_pentagon_triangle()
    else:
        svg = render_trace(_load_json(args.trace))
    write(svg, args.out)
    return EXIT_OK


def cmd_gen(args) -> int:
    _emit(random_convex_polygon(args.n, args.seed).to_json())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cenbm", description="Centroid Banach-Mazur distance tools for convex polygons.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("inscribe", help="inscribed affine-regular hexagon of a polygon")
    p.add_argument("polygon")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_inscribe)

    p = sub.add_parser("witness", help="constructive witness for a pair of polygons")
    p.add_argument("C")
    p.add_argument("D")
    p.add_argument("--tighten", action="store_true", help="also report the smallest ratio the maps support")
    p.add_argument("--trace", metavar="OUT", help="write the construction trace as JSON")
    p.add_argument("--tol", type=float, default=1e-7)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("certify", help="numerical certification of the 69/17 bound")
    p.add_argument("--grid", type=int, default=512)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("estimate", help="numerical upper bound on the distance")
    p.add_argument("C")
    p.add_argument("D")
    p.add_argument("--mode", choices=("cen", "extended"), default="cen")
    p.add_argument("--budget", choices=("low", "default", "high"), default="default")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("render", help="SVG figure of a trace or of the pentagon-triangle pair")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--trace", metavar="TRACE_JSON")
    src.add_argument("--pentagon-triangle", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("gen", help="random convex polygon")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_gen)
    return ap


def _fail(code: int, exc: BaseException, extra: Optional[dict] = None) -> int:
    err = {"error": type(exc).__name__, "message": str(exc)}
    if extra:
        err.update(extra)
    sys.stderr.write(_dump(err) + "\n")
    return code


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.func(args)
    except VerificationFailed as exc:
        return _fail(EXIT_FAILED, exc, exc.payload)
    except (ProofViolation, LemmaViolation, CertificationError) as exc:
        return _fail(EXIT_FAILED, exc)
    except (OSError, ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        return _fail(EXIT_INPUT, exc)
    except RuntimeError as exc:
        return _fail(EXIT_INPUT, exc)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
