"""Command-line front end.

Subcommands: gen, thin, verify, surgery, tree, ball.  Exit codes: 0 success,
1 verification failure, 2 invalid input, 3 runtime/sampler error.  Any
stochastic command needs --seed (or the COXLAB_SEED environment variable)
and at least 10^3 samples.  Report commands write CSV/JSON plus a rendered
figure alongside (suppress with --no-plot).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import __version__, report
from .lorentz import DomainError, GeometryError
from .polygon import (
    ideal_regular_polygon,
    load_polygon,
    regular_coxeter_polygon,
    triangle_polygon,
    validate_coxeter,
)
from .refgroup import ball, ball_growth_rows, ball_to_json
from .surgery import (
    SurgeryConstants,
    remove_small_edges,
    surgery_thin_comparison,
)
from .thinpart import SamplerConfig, thin_fraction_lower_bound, thin_ratio_multi
from .triangulation import (
    balanced_triangulate,
    save_json,
    tree_stats_rows,
    tree_to_dot,
    triangulation_to_json,
)
from .verify import run_suite


def _env_seed():
    raw = os.environ.get("COXLAB_SEED")
    return int(raw) if raw else None


def _need_seed(args):
    seed = args.seed if args.seed is not None else _env_seed()
    if seed is None:
        raise DomainError("a seed is required: pass --seed or set COXLAB_SEED")
    return seed


def _need_samples(args):
    if args.samples < 10**3:
        raise DomainError("sample counts below 10^3 are not allowed")
    return args.samples


def _parse_R(text):
    try:
        return [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError as exc:
        raise DomainError(f"bad --R list {text!r}") from exc


def _resolved_config(args, **extra):
    cfg = {k: v for k, v in vars(args).items() if k not in ("func",) and v is not None}
    cfg.update(extra)
    return cfg


def cmd_gen(args):
    fam = args.family
    if fam[0] == "triangle":
        if len(fam) != 4:
            raise DomainError("usage: gen triangle p q r")
        P = triangle_polygon(int(fam[1]), int(fam[2]), int(fam[3]))
    elif fam[0] == "regular":
        if len(fam) != 3:
            raise DomainError("usage: gen regular n m")
        P = regular_coxeter_polygon(int(fam[1]), int(fam[2]))
    elif fam[0] == "ideal":
        if len(fam) != 2:
            raise DomainError("usage: gen ideal n")
        P = ideal_regular_polygon(int(fam[1]))
    else:
        raise DomainError(f"unknown family {fam[0]!r}")
    out = args.out or ("_".join(fam) + ".json")
    P.save_json(out)
    rep = validate_coxeter(P)
    if not args.no_plot:
        report.plot_polygon(P, report.figure_path(out), title=" ".join(fam))
    print(f"wrote {out} (n={P.n}, area={P.area():.6f}, coxeter={rep['passes']})")
    return 0


def cmd_thin(args):
    seed = _need_seed(args)
    n = _need_samples(args)
    P = load_polygon(args.polygon)
    R_values = _parse_R(args.R)
    cfg = SamplerConfig(seed=seed)
    ests = thin_ratio_multi(P, R_values, n, cfg, threads=args.threads)
    pid = os.path.splitext(os.path.basename(args.polygon))[0]
    bound = thin_fraction_lower_bound()
    rows = [
        {
            "polygon_id": pid,
            "n_vertices": P.n,
            "R": est.R,
            "ratio": est.ratio,
            "stderr": est.stderr,
            "n_samples": est.n_samples,
            "seed": est.seed,
            "thin_lower_bound_at_2": bound,
        }
        for est in ests
    ]
    fields = list(rows[0].keys())
    config = _resolved_config(args, resolved_seed=seed)
    if args.out:
        if args.format == "json":
            report.write_json(args.out, rows, config)
        else:
            report.write_csv(args.out, rows, fields, config)
        if not args.no_plot:
            report.plot_thin_rows(rows, report.figure_path(args.out), bound=bound)
        print(f"wrote {args.out}")
    else:
        for r in rows:
            print(json.dumps({k: r[k] for k in fields}))
    return 0


def cmd_verify(args):
    seed = args.seed if args.seed is not None else (_env_seed() or 0)
    reports = run_suite(args.suite, seed=seed, samples=args.samples,
                        threads=args.threads)
    ok = True
    for rep in reports:
        for c in rep["checks"]:
            status = "PASS" if c["passed"] else "FAIL"
            print(f"[{status}] {rep['suite']}: {c['name']} (slack {c['slack']:.3e})")
            ok = ok and c["passed"]
    if args.out:
        report.write_json(args.out, reports, _resolved_config(args, resolved_seed=seed))
        if not args.no_plot:
            report.plot_verify_rows(reports, report.figure_path(args.out))
    print("verdict:", "PASS" if ok else "FAIL")
    return 0 if ok else 1


def cmd_surgery(args):
    consts = SurgeryConstants(eta=args.eta, alpha=args.alpha)
    P = load_polygon(args.polygon)
    out_poly, rep = remove_small_edges(P, consts)
    payload = {
        "eta": consts.eta,
        "alpha": consts.alpha,
        "removed_vertices": rep.removed_vertices,
        "removed_triangle_areas": rep.removed_triangle_areas,
        "min_edge_after": rep.min_edge_after,
        "area_before": rep.area_before,
        "area_after": rep.area_after,
        "area_ratio": rep.area_ratio,
        "output_polygon": out_poly.to_schema(),
    }
    if args.R is not None:
        seed = _need_seed(args)
        n = _need_samples(args)
        cfg = SamplerConfig(seed=seed)
        for R in _parse_R(args.R):
            cmp_rep = surgery_thin_comparison(P, out_poly, R, n, cfg, consts)
            payload.setdefault("thin_comparison", []).append(cmp_rep)
    out = args.out or "surgery_report.json"
    with open(out, "w") as f:
        json.dump(report.run_meta(_resolved_config(args)) | {"report": payload}, f,
                  indent=1, default=report._json_default)
        f.write("\n")
    if not args.no_plot:
        report.plot_polygon(out_poly, report.figure_path(out), title="after surgery")
    print(f"wrote {out} (removed {len(rep.removed_vertices)} vertices)")
    return 0


def cmd_tree(args):
    n_values = [int(x) for x in args.n.split(",")]
    rows = tree_stats_rows(n_values)
    config = _resolved_config(args)
    if args.out:
        report.write_csv(args.out, rows, ["n", "radius", "min_leaf_depth"], config)
        if not args.no_plot:
            report.plot_tree_rows(rows, report.figure_path(args.out))
        print(f"wrote {args.out}")
    else:
        for r in rows:
            print(json.dumps(r))
    first = n_values[0]
    tri, tree = balanced_triangulate(first)
    if args.dot:
        with open(args.dot, "w") as f:
            f.write(tree_to_dot(tri, tree))
        print(f"wrote {args.dot}")
    if args.json:
        save_json(triangulation_to_json(tri, tree), args.json)
        print(f"wrote {args.json}")
    if args.draw:
        P = ideal_regular_polygon(first)
        report.plot_polygon(P, args.draw, tri=tri, title=f"ideal {first}-gon")
        print(f"wrote {args.draw}")
    return 0


def cmd_ball(args):
    P = load_polygon(args.polygon)
    b = ball(P, L=args.ball_length)
    if args.out:
        save_json(ball_to_json(b), args.out)
        print(f"wrote {args.out}")
    rows = ball_growth_rows(P, args.ball_length)
    if args.csv:
        report.write_csv(args.csv, rows,
                         ["L", "ball_size", "min_pairwise_distance"],
                         _resolved_config(args))
        if not args.no_plot:
            report.plot_ball_rows(rows, report.figure_path(args.csv))
        print(f"wrote {args.csv}")
    print(f"ball size {len(b)} at L={args.ball_length}, "
          f"min pairwise distance {b.meta.get('min_pairwise_distance'):.3e}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="coxlab", description=__doc__)
    p.add_argument("--version", action="version", version=f"coxlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True):
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--samples", type=int, default=10**5)
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--out", default=None)
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--no-plot", action="store_true")

    g = sub.add_parser("gen", help="generate a polygon JSON file")
    g.add_argument("family", nargs="+",
                   help="triangle p q r | regular n m | ideal n")
    g.add_argument("--out", default=None)
    g.add_argument("--no-plot", action="store_true")
    g.set_defaults(func=cmd_gen)

    t = sub.add_parser("thin", help="thin-part area fractions")
    t.add_argument("polygon")
    t.add_argument("--R", default="2")
    common(t)
    t.set_defaults(func=cmd_thin)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", choices=("kernel", "thm1", "tree", "lemma6",
                                     "surgery", "all"))
    v.add_argument("--samples", type=int, default=None)
    v.add_argument("--seed", type=int, default=None)
    v.add_argument("--threads", type=int, default=1)
    v.add_argument("--out", default=None)
    v.add_argument("--no-plot", action="store_true")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("surgery", help="remove short edges from a polygon")
    s.add_argument("polygon")
    s.add_argument("--eta", type=float, default=0.1)
    s.add_argument("--alpha", type=float, default=0.1)
    s.add_argument("--R", default=None)
    common(s)
    s.set_defaults(func=cmd_surgery)

    tr = sub.add_parser("tree", help="balanced triangulation statistics")
    tr.add_argument("--n", required=True, help="comma-separated polygon sizes")
    tr.add_argument("--out", default=None)
    tr.add_argument("--dot", default=None)
    tr.add_argument("--json", default=None)
    tr.add_argument("--draw", default=None)
    tr.add_argument("--no-plot", action="store_true")
    tr.set_defaults(func=cmd_tree)

    b = sub.add_parser("ball", help="reflection-group word ball")
    b.add_argument("polygon")
    b.add_argument("--ball-length", type=int, default=4)
    b.add_argument("--out", default=None)
    b.add_argument("--csv", default=None)
    b.add_argument("--no-plot", action="store_true")
    b.set_defaults(func=cmd_ball)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (DomainError, GeometryError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # sampler / runtime problems
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
