"""Command-line front end: ``porosity-lab <subcommand> ...``.

Exit codes: 0 on success, 1 on analysis errors (a JSON diagnostic goes to
stderr), 2 on usage errors. Every output is a pure function of the flags and
input files, so repeated runs are byte-identical.
"""

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from .corpus import KINDS, ALIASES, fractal_spec, generate, ambient_measure
from .covering import greedy_net, verify_packing_cover
from .envelope import EnvelopeParams, construct_envelope, verify_envelope
from .errors import PorosityLabError, VerificationFailed
from .manifest import Manifest
from .porosity import decay_profile, porosity_entries
from .regularity import ScaleGrid, estimate_doubling, fit_regularity
from .space import KAPPA, BallIndex, SubsetRef, stride_sample


def fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    if path in (None, "-"):
        sys.stdout.write(buf.getvalue())
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())


def dump_json(obj, path=None):
    text = json.dumps(obj, sort_keys=True, indent=2, default=_jsonable) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _jsonable(x):
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"cannot serialise {type(x).__name__}")


def spacing_arg(text):
    if text == "auto":
        return "auto"
    if text == "none":
        return None
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected 'auto', 'none' or a positive number")
    if not v > 0:
        raise argparse.ArgumentTypeError("spacing must be positive")
    return v


def radius_arg(text):
    if text == "auto":
        return "auto"
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected 'auto' or a number")


def _load(args):
    m = Manifest.read(args.input)
    space = m.space()
    return m, space, BallIndex(space)


def _grid(args, space):
    r_min = 2 * KAPPA * space.epsilon if args.rmin == "auto" else args.rmin
    return ScaleGrid(r_min, args.rmax, args.scales)


def _measure(m, space, name, A=None):
    if name == "lebesgue":
        return ambient_measure(space, exclude=A)
    return m.measure(name)


def cmd_generate(args):
    spec = fractal_spec(args.kind, args.depth, dim=args.dim, lam=args.lam,
                        contraction=args.contraction, seed=args.seed)
    space, A, mu, truth = generate(spec, ambient_spacing=args.spacing, metric=args.metric)
    meta = {
        "kind": "corpus",
        "spec": spec.to_dict(),
        "truth": truth.to_dict(),
        "spacing": "auto" if args.spacing == "auto" else args.spacing,
        "seed": args.seed,
    }
    Manifest.from_space(space, {"A": A}, {"mu": mu}, meta).write(args.out)
    dump_json({"points": space.n, "A": len(A), "epsilon": space.epsilon,
               "similarity_dimension": truth.similarity_dimension})


def cmd_net(args):
    m, space, index = _load(args)
    A = m.subset(args.subset)
    r = 2 * KAPPA * space.epsilon if args.radius == "auto" else args.radius
    net = greedy_net(space, index, A, r)
    rows = [(k, int(c)) + tuple(space.points[c]) for k, c in enumerate(net.centers)]
    write_csv(args.out, ["rank", "id"] + [f"c{i}" for i in range(space.dim)], rows)
    dump_json({"radius": net.radius, "centers": len(net.centers),
               "separation_ok": net.separation_ok, "coverage_ok": net.coverage_ok,
               "max_coverage_gap": net.max_coverage_gap})


def cmd_regularity(args):
    m, space, index = _load(args)
    A = m.subset(args.subset)
    mu = _measure(m, space, args.measure, A)
    grid = _grid(args, space)
    fit = fit_regularity(space, index, mu, A, grid, args.sample, args.seed, border=args.border)
    doubling = estimate_doubling(space, index, mu, stride_sample(A.ids, args.sample, args.seed),
                                 grid, args.chain_depth)
    write_csv(args.out, ["x_id", "r", "mass"], fit.table)
    dump_json({"s_hat": fit.s_hat, "a_hat": fit.a_hat, "b_hat": fit.b_hat,
               "rms_residual": fit.rms_residual, "c_hat": doubling.c_hat,
               "sample_size": fit.sample_size, "grid": grid.to_dict()})


def cmd_porosity(args):
    m, space, index = _load(args)
    A = m.subset(args.subset)
    grid = _grid(args, space).check(space)
    entries = porosity_entries(space, index, A, grid.radii, args.sample, args.seed)
    write_csv(args.out, ["x_id", "r", "rho_hat", "witness_id"], entries)
    dump_json({"rho_star": min(e[2] for e in entries), "rows": len(entries),
               "grid": grid.to_dict()})


def cmd_decay(args):
    m, space, index = _load(args)
    A = m.subset(args.subset)
    mu = _measure(m, space, args.measure, A)
    if args.rmax is None:
        args.rmax = args.r0
    grid = _grid(args, space)
    rep = decay_profile(space, index, mu, A, args.x0, args.r0, grid, rho=args.rho,
                        porosity_sample=args.porosity_sample,
                        regularity_sample=args.regularity_sample, seed=args.seed)
    out = rep.to_dict()
    out.update(x0=args.x0, r0=args.r0, grid=grid.to_dict(), measure=args.measure)
    dump_json(out, args.out)


def cmd_envelope(args):
    m, space, index = _load(args)
    A = m.subset(args.subset)
    params = EnvelopeParams(args.rho, args.t, args.J, args.plant_depth, args.s, args.delta)
    env = construct_envelope(space, index, A, params, sample_size=args.sample,
                             on_deficit=args.on_deficit)
    chk = verify_envelope(env, s=args.s, delta=args.delta or 0.0, seed=args.seed,
                          base_points=space.points[A.ids])
    patches = [{"j": p.j, "i": p.i, "center": [float(c) for c in space.points[p.center]],
                "radius": p.radius, "points": len(p.points)} for p in env.patches]
    meta = {
        "kind": "envelope",
        "params": {"rho": args.rho, "t": args.t, "J": args.J, "plant_depth": args.plant_depth,
                   "s": args.s, "delta": args.delta},
        "source": os.path.basename(args.input),
        "seed": args.seed,
        "patches": patches,
        "net_sizes": {str(j): n for j, n in sorted(env.net_sizes.items())},
        "skipped": [list(s) for s in env.skipped],
        "porosity_deficits": [[int(j), float(r), float(v), int(n)]
                              for j, r, v, n in env.porosity_deficits],
    }
    Manifest.from_space(env.space, {"A": env.A, "F": np.arange(env.space.n)},
                        {"nu": env.nu}, meta).write(args.out)
    if args.reports:
        os.makedirs(args.reports, exist_ok=True)
        write_csv(os.path.join(args.reports, "nu_bound.csv"), ["x_id", "r", "nu_mass", "ratio"],
                  chk.nu_bound.table)
        write_csv(os.path.join(args.reports, "counts.csv"), ["x_id", "k", "j", "count", "violation"],
                  chk.counts)
        write_csv(os.path.join(args.reports, "counting.csv"), ["x_id", "k", "slope", "bounded"],
                  chk.counting)
        write_csv(os.path.join(args.reports, "nu_fit.csv"), ["x_id", "r", "mass"],
                  chk.nu_fit.table)
    summary = chk.to_dict()
    summary.update(points=env.space.n, patches=len(env.patches), skipped=len(env.skipped),
                   porosity_deficits=len(env.porosity_deficits))
    dump_json(summary)


def cmd_verify(args):
    m = Manifest.read(args.input)
    space = m.space()
    index = BallIndex(space)
    checks = {}
    r = 2 * KAPPA * space.epsilon
    for name in sorted(m.subsets):
        ids = SubsetRef(m.subsets[name])
        if len(ids) == 0:
            continue
        rep = verify_packing_cover(space, greedy_net(space, index, ids, r), ids)
        checks[f"net:{name}"] = rep.ok
    for name in sorted(m.measures):
        w = m.measures[name]
        checks[f"measure_nonnegative:{name}"] = bool(np.all(w >= 0))
    meta = m.meta
    if meta.get("kind") == "corpus" and "A" in m.subsets:
        spec = meta["spec"]
        if spec["kind"] == "full_grid":
            n = round(1 / spec["contraction"] ** spec["depth"])
            expected = (n + 1) ** spec["dim"]
        else:
            expected = spec["pieces"] ** spec["depth"]
        checks["subset_size:A"] = len(m.subsets["A"]) == expected
        if "mu" in m.measures:
            mu = m.measures["mu"]
            checks["mu_supported_on_A"] = bool(np.all(np.delete(mu, m.subsets["A"]) == 0))
            checks["mu_total"] = abs(float(mu.sum()) - 1.0) <= 1e-9
    if meta.get("kind") == "envelope" and "nu" in m.measures:
        nu = m.measures["nu"]
        t = meta["params"]["t"]
        planted = sum(p["radius"] ** t for p in meta.get("patches", []))
        checks["nu_null_on_A"] = bool(np.all(nu[m.subsets.get("A", [])] == 0))
        checks["nu_total"] = abs(float(nu.sum()) - planted) <= 1e-9 * max(planted, 1.0)
    report = {"checks": checks, "ok": all(checks.values())}
    dump_json(report)
    if not report["ok"]:
        failed = sorted(k for k, v in checks.items() if not v)
        raise VerificationFailed(f"failed checks: {', '.join(failed)}", failed=failed)


def build_parser():
    ap = argparse.ArgumentParser(prog="porosity-lab",
                                 description="Porosity and regularity analysis of point samples.")
    sub = ap.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    def add_input(p, subset=True):
        p.add_argument("--in", dest="input", required=True, help="input manifest")
        if subset:
            p.add_argument("--subset", default="A", help="subset name (default A)")
        p.add_argument("--seed", type=int, default=0, help="sampling seed (PCG64)")

    def add_grid(p, rmax=True):
        p.add_argument("--rmin", type=radius_arg, default="auto",
                       help="smallest radius, 'auto' = 8*epsilon")
        if rmax:
            p.add_argument("--rmax", type=float, required=True)
        else:
            p.add_argument("--rmax", type=float, default=None)
        p.add_argument("--scales", type=int, default=12, help="number of radii")

    p = sub.add_parser("generate", help="generate a fractal corpus manifest")
    p.add_argument("--kind", required=True, choices=sorted(set(KINDS) | set(ALIASES)))
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--lam", type=float, default=None, help="removed middle fraction")
    p.add_argument("--contraction", type=float, default=None)
    p.add_argument("--spacing", type=spacing_arg, default="auto",
                   help="ambient grid step: 'auto' (cell size), 'none' or a number")
    p.add_argument("--metric", choices=["euclidean", "chebyshev"], default="euclidean")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("net", help="greedy r-net of a subset")
    add_input(p)
    p.add_argument("--radius", type=radius_arg, default="auto")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_net)

    p = sub.add_parser("regularity", help="power-law fit of ball masses")
    add_input(p)
    add_grid(p)
    p.add_argument("--measure", default="mu", help="measure name, or 'lebesgue'")
    p.add_argument("--sample", type=int, default=50)
    p.add_argument("--border", action="store_true",
                   help="only use centres whose rmax-ball lies inside the unit cube")
    p.add_argument("--chain-depth", type=int, default=0,
                   help="also scan doubling ratios at radii r/2^i, i <= depth")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_regularity)

    p = sub.add_parser("porosity", help="porosity profile of a subset")
    add_input(p)
    add_grid(p)
    p.add_argument("--sample", type=int, default=64)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_porosity)

    p = sub.add_parser("decay", help="neighbourhood-mass decay report")
    add_input(p)
    add_grid(p, rmax=False)
    p.add_argument("--x0", type=int, required=True, help="centre point id")
    p.add_argument("--r0", type=float, required=True)
    p.add_argument("--rho", type=float, default=None, help="porosity (estimated if omitted)")
    p.add_argument("--measure", default="lebesgue", help="measure name, or 'lebesgue'")
    p.add_argument("--porosity-sample", type=int, default=32)
    p.add_argument("--regularity-sample", type=int, default=20)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_decay)

    p = sub.add_parser("envelope", help="build a regular envelope of a porous subset")
    add_input(p)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--J", type=int, required=True)
    p.add_argument("--plant-depth", type=int, required=True)
    p.add_argument("--s", type=float, default=None, help="ambient exponent")
    p.add_argument("--delta", type=float, default=None, help="decay exponent")
    p.add_argument("--sample", type=int, default=64)
    p.add_argument("--on-deficit", choices=["raise", "record"], default="raise")
    p.add_argument("--out", required=True)
    p.add_argument("--reports", default=None, help="directory for verification CSVs")
    p.set_defaults(func=cmd_envelope)

    p = sub.add_parser("verify", help="re-run invariant checks on a manifest")
    p.add_argument("--in", dest="input", required=True)
    p.set_defaults(func=cmd_verify)
    return ap


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except PorosityLabError as exc:
        _diagnose(exc.code, str(exc), exc.details)
        return 1
    except (ValueError, OSError) as exc:
        _diagnose("io_error" if isinstance(exc, OSError) else "invalid_value", str(exc), {})
        return 1
    return 0


def _diagnose(code, message, details):
    sys.stderr.write(json.dumps({"error": code, "message": message, "details": details},
                                sort_keys=True, default=_jsonable) + "\n")


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
