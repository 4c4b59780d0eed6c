"""Command line entry point: ``lstar <command> ...``.

Exit codes: 0 success, 1 an invariant failed its tolerance, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from lstar import io as lio
from lstar.errors import LStarError

EXIT_OK, EXIT_INVARIANT, EXIT_USAGE = 0, 1, 2


class InvariantFailure(Exception):
    def __init__(self, name: str, value: float, tol: float):
        super().__init__(f"invariant failure: {name} = {value:.3e} exceeds tolerance {tol:.1e}")


def _require(report: dict, tol: float, keys=None) -> None:
    for k, v in report.items():
        if keys is not None and k not in keys:
            continue
        if isinstance(v, float) and k != "tol" and not v <= tol:
            raise InvariantFailure(k, v, tol)


def _emit(args, payload: dict) -> None:
    lio.write_text(getattr(args, "report", None), lio.dumps(payload) + "\n")


def _load_pair(path: str):
    d = lio.read_json(path)
    if "s" not in d:
        L = lio.algebra_from_dict(d)
        return None, L, d
    pair = lio.pair_from_dict(d)
    return pair, pair.algebra, d


# -- commands ------------------------------------------------------------------

def cmd_make(args) -> int:
    from lstar.factory import FamilySpec, make_pair

    spec = FamilySpec(args.family, "compact" if args.compact else "noncompact",
                      p=args.p, q=args.q, n=args.n, scale=args.scale,
                      with_center=args.with_center)
    pair = make_pair(spec)
    lio.write_text(args.output, lio.dumps(lio.pair_to_dict(pair)) + "\n")
    return EXIT_OK


def cmd_check(args) -> int:
    from lstar.core import verify_lstar_axiom
    from lstar.pairs import pair_invariants

    pair, L, _ = _load_pair(args.path)
    rep = verify_lstar_axiom(L, args.tol).to_dict()
    out = dict(dim=L.dim, lstar=rep)
    if pair is not None:
        pin = pair_invariants(pair, args.tol).to_dict()
        out["pair"] = pin
        out["dims"] = list(pair.dims)
    _emit(args, out)
    _require(rep, args.tol)
    if pair is not None:
        _require(out["pair"], args.tol)
    return EXIT_OK


def cmd_curvature(args) -> int:
    from lstar.curvature import curvature_operator, riemann_tensor, symmetry_report

    pair, _, _ = _load_pair(args.path)
    if pair is None:
        raise LStarError("curvature needs a pair file (with 's')")
    data = riemann_tensor(pair)
    sym = symmetry_report(data)
    _, cert = curvature_operator(data, args.tol)
    _emit(args, dict(certificate=cert.to_dict(), symmetries=sym.to_dict()))
    if args.data_out:
        lio.write_text(args.data_out, lio.dumps(lio.curvature_to_dict(data)) + "\n")
    _require(sym.to_dict(), max(args.tol, 1e-12) * max(1.0, sym.kappa),
             keys=("antisym_12", "antisym_34", "pair_symmetry", "bianchi"))
    return EXIT_OK


def cmd_dual(args) -> int:
    from lstar.pairs import dualize, pair_invariants

    pair, _, _ = _load_pair(args.path)
    if pair is None:
        raise LStarError("dual needs a pair file (with 's')")
    dual = dualize(pair)
    lio.write_text(args.output, lio.dumps(lio.pair_to_dict(dual)) + "\n")
    _require(pair_invariants(dual, args.tol).to_dict(), args.tol)
    return EXIT_OK


def cmd_decompose(args) -> int:
    from lstar.core import decompose_ideals
    from lstar.pairs import classify_type, sign_decompose

    pair, L, _ = _load_pair(args.path)
    dec = decompose_ideals(L, args.tol, seeds=(args.seed, args.seed + 1))
    out = dict(ideals=dict(sizes=dec.sizes, types=list(dec.types),
                           cross_residual=dec.cross_residual))
    if pair is not None:
        out["type"] = classify_type(pair, args.tol).to_dict()
        split = sign_decompose(pair, args.tol)
        out["sign_split"] = dict(dims=list(split.dims), p_minus=split.p_minus.T,
                                 p_zero=split.p_zero.T, p_plus=split.p_plus.T)
    _emit(args, out)
    return EXIT_OK


def cmd_rank(args) -> int:
    from lstar.pairs import rank

    pair, _, _ = _load_pair(args.path)
    if pair is None:
        raise LStarError("rank needs a pair file (with 's')")
    res = rank(pair, search_budget=args.budget, seed=args.seed)
    _emit(args, res.to_dict())
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    from lstar.curvature import reconstruct_lstar

    data = lio.curvature_from_dict(lio.read_json(args.path))
    rec = reconstruct_lstar(data, args.sign.upper(), args.tol)
    lio.write_text(args.output, lio.dumps(lio.pair_to_dict(rec.pair)) + "\n")
    rep = rec.to_dict()
    _emit(args, rep)
    _require(rep, max(args.tol, 1e-10) * max(1.0, float(np.max(np.abs(data.R))) if data.p_dim else 1.0),
             keys=("lstar_residual", "roundtrip_residual", "closure_residual"))
    return EXIT_OK


def _floats(text: str) -> list:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma separated list of numbers, got {text!r}")


def cmd_cat0_sweep(args) -> int:
    from lstar.cat0 import CSV_COLUMNS, bounded_curvature_experiment

    rows = bounded_curvature_experiment(args.r, args.alpha, args.lambdas)
    table = [[r["lam"], r["d_xy"], r["d_yz"], r["comparison_angle_rad"],
              r["alexandrov_angle_rad"], r["ratio"]] for r in rows]
    lio.write_text(args.output, lio.sweep_csv(table, CSV_COLUMNS))
    return EXIT_OK


def cmd_exp_demo(args) -> int:
    from lstar.cat0 import exp_discontinuity_demo

    rows = exp_discontinuity_demo(args.r, args.lambdas)
    _emit(args, dict(r=args.r, rows=rows))
    return EXIT_OK


# -- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lstar", description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0, help="seed for randomised searches")
    ap.add_argument("--tol", type=float, default=1e-9, help="residual tolerance")
    sub = ap.add_subparsers(dest="command", required=True)

    def report_opt(p):
        p.add_argument("--report", default=None, help="write the JSON report here (default stdout)")

    p = sub.add_parser("make", help="build a classical pair")
    p.add_argument("--family", required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--compact", action="store_true")
    g.add_argument("--noncompact", action="store_true")
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--scale", type=float, default=1.0)
    c = p.add_mutually_exclusive_group()
    c.add_argument("--with-center", dest="with_center", action="store_true", default=None)
    c.add_argument("--no-center", dest="with_center", action="store_false")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_make)

    p = sub.add_parser("check", help="verify algebra and pair invariants")
    p.add_argument("path")
    report_opt(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("curvature", help="Riemann tensor and curvature-operator certificate")
    p.add_argument("path")
    p.add_argument("--data-out", default=None, help="also write the curvature data JSON")
    report_opt(p)
    p.set_defaults(func=cmd_curvature)

    p = sub.add_parser("dual", help="dual pair")
    p.add_argument("path")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_dual)

    p = sub.add_parser("decompose", help="ideals, type and sign split")
    p.add_argument("path")
    report_opt(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("rank", help="maximal abelian subspace of p")
    p.add_argument("path")
    p.add_argument("--budget", type=int, default=64)
    report_opt(p)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("reconstruct", help="pair from curvature data")
    p.add_argument("path")
    p.add_argument("--sign", required=True, choices=["npco", "nnco", "NPCO", "NNCO"])
    p.add_argument("-o", "--output", default="-")
    report_opt(p)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("cat0-sweep", help="bounded-curvature sweep as CSV")
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=0.3)
    p.add_argument("--lambdas", type=_floats, default=[1e-2, 1e-3, 1e-4])
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_cat0_sweep)

    p = sub.add_parser("exp-demo", help="discontinuity of exp on the tangent cone")
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--lambdas", type=_floats, default=[1e-2, 1e-4, 1e-6, 1e-8])
    report_opt(p)
    p.set_defaults(func=cmd_exp_demo)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except InvariantFailure as e:
        print(str(e), file=sys.stderr)
        return EXIT_INVARIANT
    except (LStarError, OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
