"""Command-line front end.

Subcommands cover construction, analysis, bound tables, the sparsity
threshold solver, random-frame coherence curves, sign flipping, and the
block-sparse recovery experiment.  Every command that writes files also
writes a `<command>-manifest.json` recording arguments, seed, version, and
output hashes, so a run can be replayed and checked byte for byte.

Exit codes: 0 success, 2 validation failure, 3 numerical non-convergence.
"""

import argparse
import os
import sys

import numpy as np

from . import __version__
from .errors import ConvergenceError, FrameError
from .bounds import (
    etf_max_blocks,
    max_equi_isoclinic,
    max_orthobases_blocks,
    orthobases_coherence_lower,
    rankin_chordal_upper,
    rankin_chordal_upper_tight,
    solve_threshold,
    spectral_distance_upper,
    welch_coherence_lower,
)
from .constructions import FrameRecipe, build_frame
from .flipping import FlipConfig, flip
from .frame import coherence_report, gram_map, validate
from .io import (
    RunManifest,
    read_bfm,
    write_bfm,
    write_curve_csv,
    write_flip_table_csv,
    write_gram_csv,
    write_json,
    write_ndp_csv,
    write_threshold_csv,
)

_FAMILY_PARAM = {
    "steiner": ("v", "--v"),
    "harmonic": ("p", "--p"),
    "alltop": ("p", "--p"),
    "chirp": ("p", "--p"),
    "id-hadamard": ("k", "--k"),
    "kerdock": ("k", "--k"),
    "external": ("path", "--file"),
}


def _threads(args):
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("BLOCKFRAME_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise FrameError(f"BLOCKFRAME_THREADS={env!r} is not an integer")
    return 1


def _out_dir(args):
    os.makedirs(args.out_dir, exist_ok=True)
    return args.out_dir


def _parse_kron(text):
    if text == "none":
        return ("none",)
    kind, _, val = text.partition(":")
    if kind in ("hadamard", "dft"):
        try:
            return (kind, int(val))
        except ValueError:
            raise FrameError(f"--kron {kind} needs an integer, got {val!r}")
    if kind == "file":
        if not val:
            raise FrameError("--kron file needs a path, e.g. file:q.bfm")
        return ("file", val)
    raise FrameError(f"unknown --kron kind {text!r} (none|hadamard:K|dft:P|file:PATH)")


def _parse_int_list(text, flag):
    try:
        return [int(tok) for tok in text.split(",") if tok]
    except ValueError:
        raise FrameError(f"{flag} expects comma-separated integers, got {text!r}")


def _parse_float_list(text, flag):
    try:
        return [float(tok) for tok in text.split(",") if tok]
    except ValueError:
        raise FrameError(f"{flag} expects comma-separated numbers, got {text!r}")


def _report_payload(frame):
    rep = coherence_report(frame)
    val = validate(frame)
    payload = rep.to_jsonable()
    payload["validation"] = {
        "unit_columns": val.unit_columns,
        "block_orthonormal": val.block_orthonormal,
        "tight": val.tight,
        "union_of_orthobases": val.union_of_orthobases,
        "equi_isoclinic": val.equi_isoclinic,
    }
    return payload


def _print_summary(payload):
    print(
        f"n={payload['n']} r={payload['r']} m={payload['m']} field={payload['field']}"
    )
    print(f"worst-case coherence  {payload['worst_case_coherence']!r}")
    print(f"average coherence     {payload['average_coherence']!r}")
    print(f"welch lower bound     {payload['welch_lower_bound']!r}")


def cmd_construct(args):
    key, flag = _FAMILY_PARAM[args.family]
    value = getattr(args, key if key != "path" else "file")
    if value is None:
        raise FrameError(f"{flag} is required for family {args.family}")
    params = {key: value}
    if args.family == "kerdock" and args.kerdock_set_file:
        params["set_file"] = args.kerdock_set_file
    recipe = FrameRecipe(
        family=args.family, params=params, kron=_parse_kron(args.kron)
    )
    manifest = RunManifest(
        command="construct",
        params={"family": args.family, **params, "kron": args.kron},
        seed=args.seed,
    )
    frame = build_frame(recipe)
    out = _out_dir(args)
    frame_path = os.path.join(out, "frame.bfm")
    report_path = os.path.join(out, "report.json")
    write_bfm(frame_path, frame)
    payload = _report_payload(frame)
    write_json(report_path, payload)
    manifest.add_output(frame_path)
    manifest.add_output(report_path)
    manifest.write(os.path.join(out, "construct-manifest.json"))
    _print_summary(payload)
    return 0


def cmd_analyze(args):
    frame = read_bfm(args.frame)
    manifest = RunManifest(
        command="analyze", params={"frame": args.frame}, seed=args.seed
    )
    out = _out_dir(args)
    report_path = os.path.join(out, "report.json")
    gram_path = os.path.join(out, "gram.csv")
    payload = _report_payload(frame)
    write_json(report_path, payload)
    write_gram_csv(gram_path, gram_map(frame))
    manifest.add_output(report_path)
    manifest.add_output(gram_path)
    manifest.write(os.path.join(out, "analyze-manifest.json"))
    _print_summary(payload)
    return 0


def cmd_bounds(args):
    n, r, m, field = args.n, args.r, args.m, args.field
    payload = {
        "n": n,
        "r": r,
        "m": m,
        "field": field,
        "welch_block_lower": welch_coherence_lower(n, r, m),
        "rankin_chordal_upper": rankin_chordal_upper(n, r, m),
        "rankin_chordal_upper_tight": rankin_chordal_upper_tight(n, r),
        "spectral_distance_upper": spectral_distance_upper(n, r, m),
        "max_equiisoclinic": max_equi_isoclinic(n, r, field),
        "max_orthobases_blocks": max_orthobases_blocks(n, field),
    }
    if n % r == 0:
        payload["etf_max_blocks"] = etf_max_blocks(n, r)
        payload["orthobases_lower"] = orthobases_coherence_lower(n, r)
    if args.out_dir is not None:
        manifest = RunManifest(
            command="bounds",
            params={"n": n, "r": r, "m": m, "field": field},
            seed=args.seed,
        )
        out = _out_dir(args)
        path = os.path.join(out, "bounds.json")
        write_json(path, payload)
        manifest.add_output(path)
        manifest.write(os.path.join(out, "bounds-manifest.json"))
    import json

    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def cmd_threshold(args):
    if args.beta is None and args.grid is None:
        raise FrameError("give --beta B or --grid LO:HI:COUNT")
    if args.beta is not None:
        betas = [args.beta]
    else:
        try:
            lo_s, hi_s, count_s = args.grid.split(":")
            lo, hi, count = float(lo_s), float(hi_s), int(count_s)
        except ValueError:
            raise FrameError(f"--grid expects LO:HI:COUNT, got {args.grid!r}")
        if count < 2 or not lo < hi:
            raise FrameError("--grid needs LO < HI and COUNT >= 2")
        betas = list(np.linspace(lo, hi, count))
    sols = [solve_threshold(float(b)) for b in betas]
    if args.out_dir is not None:
        manifest = RunManifest(
            command="threshold",
            params={"betas": [float(b) for b in betas]},
            seed=args.seed,
        )
        out = _out_dir(args)
        if args.format == "json":
            path = os.path.join(out, "threshold.json")
            write_json(
                path,
                [
                    {
                        "beta": s.beta,
                        "multiplier": s.multiplier,
                        "residual": s.residual,
                    }
                    for s in sols
                ],
            )
        else:
            path = os.path.join(out, "threshold.csv")
            write_threshold_csv(path, sols)
        manifest.add_output(path)
        manifest.write(os.path.join(out, "threshold-manifest.json"))
    print("beta,multiplier,residual")
    for s in sols:
        print(f"{s.beta!r},{s.multiplier!r},{s.residual!r}")
    return 0


def cmd_random_mu(args):
    from .sampling import empirical_mu_curve

    r_grid = _parse_int_list(args.r_grid, "--r-grid")
    manifest = RunManifest(
        command="random-mu",
        params={
            "n": args.n,
            "r_grid": r_grid,
            "trials": args.trials,
            "m_cap": args.m_cap,
        },
        seed=args.seed,
    )
    points = empirical_mu_curve(
        args.n,
        r_grid,
        trials=args.trials,
        seed=args.seed,
        m_cap=args.m_cap,
        threads=_threads(args),
    )
    out = _out_dir(args)
    path = os.path.join(out, "curve.csv")
    write_curve_csv(path, points)
    manifest.add_output(path)
    manifest.write(os.path.join(out, "random-mu-manifest.json"))
    for pt in points:
        print(
            f"beta={pt.beta:.6f} mean_mu={pt.mean_mu:.6f} "
            f"max_mu={pt.max_mu:.6f} theory_mu={pt.theory_mu:.6f}"
        )
    return 0


def cmd_flip(args):
    frame = read_bfm(args.frame)
    manifest = RunManifest(
        command="flip",
        params={"frame": args.frame, "norm": args.norm},
        seed=args.seed,
    )
    result = flip(frame, FlipConfig(norm_variant=args.norm))
    out = _out_dir(args)
    frame_path = os.path.join(out, "flipped.bfm")
    json_path = os.path.join(out, "flip.json")
    write_bfm(frame_path, result.frame)
    write_json(
        json_path,
        {
            "signs": [int(s) for s in result.signs],
            "mu_before": result.mu_before,
            "mu_after": result.mu_after,
            "nu_before": result.nu_before,
            "nu_after": result.nu_after,
            "nu_bound": result.nu_bound,
            "partial_sum_norm": result.partial_sum_norm,
            "norm_variant": result.norm_variant,
        },
    )
    manifest.add_output(frame_path)
    manifest.add_output(json_path)
    manifest.write(os.path.join(out, "flip-manifest.json"))
    print(f"nu {result.nu_before!r} -> {result.nu_after!r} (bound {result.nu_bound!r})")
    print(f"mu {result.mu_before!r} -> {result.mu_after!r}")
    return 0


def cmd_flip_table(args):
    from .blockcs import run_flipping_table

    r_list = _parse_int_list(args.r_list, "--r-list")
    manifest = RunManifest(
        command="flip-table",
        params={
            "n": args.n,
            "m": args.m,
            "r_list": r_list,
            "realizations": args.realizations,
            "norm": args.norm,
        },
        seed=args.seed,
    )
    rows = run_flipping_table(
        args.n,
        args.m,
        r_list,
        realizations=args.realizations,
        seed=args.seed,
        norm_variant=args.norm,
        threads=_threads(args),
    )
    out = _out_dir(args)
    if args.format == "json":
        path = os.path.join(out, "flip_table.json")
        write_json(
            path,
            [
                {
                    "r": row.r,
                    "nu_before_mean": row.nu_before_mean,
                    "nu_after_mean": row.nu_after_mean,
                    "improvement_pct": row.improvement_pct,
                    "nu_bound": row.nu_bound,
                    "runs": [list(run) for run in row.runs],
                }
                for row in rows
            ],
        )
    else:
        path = os.path.join(out, "flip_table.csv")
        write_flip_table_csv(path, rows)
    manifest.add_output(path)
    manifest.write(os.path.join(out, "flip-table-manifest.json"))
    for row in rows:
        print(
            f"r={row.r} nu {row.nu_before_mean:.6f} -> {row.nu_after_mean:.6f} "
            f"({row.improvement_pct:.1f}% better, bound {row.nu_bound:.6f})"
        )
    return 0


def cmd_cs(args):
    from .blockcs import run_ndp_experiment
    from .sampling import RandomFrameSpec, sample_block_frame

    frames = []
    for item in args.frame or []:
        label, _, path = item.partition("=")
        if not path:
            raise FrameError(f"--frame expects LABEL=PATH, got {item!r}")
        frames.append((label, read_bfm(path)))
    for idx, item in enumerate(args.random or []):
        label, _, shape = item.partition("=")
        if not shape:
            raise FrameError(f"--random expects LABEL=N,R,M, got {item!r}")
        dims = _parse_int_list(shape, "--random")
        if len(dims) != 3:
            raise FrameError(f"--random expects LABEL=N,R,M, got {item!r}")
        n, r, m = dims
        spec = RandomFrameSpec(n=n, r=r, m=m, seed=args.seed, field_tag="real")

        def factory(t, _spec=spec, _idx=idx):
            return sample_block_frame(_spec, trial=_idx * 100_000 + t)

        frames.append((label, factory))
    if not frames:
        raise FrameError("give at least one --frame LABEL=PATH or --random LABEL=N,R,M")
    k_grid = _parse_int_list(args.k_grid, "--k-grid")
    dr_grid = _parse_float_list(args.dr_grid, "--dr-grid")
    manifest = RunManifest(
        command="cs",
        params={
            "frames": [label for label, _ in frames],
            "k_grid": k_grid,
            "dr_grid": dr_grid,
            "trials": args.trials,
            "snr_db": args.snr_db,
            "signal_field": args.signal_field,
        },
        seed=args.seed,
    )
    results = run_ndp_experiment(
        frames,
        k_grid,
        dr_grid,
        trials=args.trials,
        seed=args.seed,
        field_tag=args.signal_field,
        snr_db=args.snr_db,
        threads=_threads(args),
    )
    out = _out_dir(args)
    path = os.path.join(out, "ndp.csv")
    write_ndp_csv(path, results)
    manifest.add_output(path)
    manifest.write(os.path.join(out, "cs-manifest.json"))
    for res in results:
        print(
            f"{res.label} k={res.k} dr={res.dynamic_range:g} "
            f"ndp={res.mean_ndp:.4f} (se {res.stderr:.4f}, {res.trials} trials)"
        )
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    common.add_argument("--trials", type=int, default=100, help="trial count")
    common.add_argument("--threads", type=int, default=None, help="worker threads")
    common.add_argument(
        "--format", choices=("json", "csv"), default="csv", help="table file format"
    )

    parser = argparse.ArgumentParser(
        prog="blockframe",
        description="Build, measure, and improve block frames with low block coherence.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", parents=[common], help="build a frame from a recipe")
    p.add_argument(
        "--family",
        required=True,
        choices=("steiner", "harmonic", "alltop", "chirp", "id-hadamard", "kerdock", "external"),
    )
    p.add_argument("--v", type=int, help="points of the pair design (steiner)")
    p.add_argument("--p", type=int, help="prime parameter (harmonic, alltop, chirp)")
    p.add_argument("--k", type=int, help="log2 dimension (id-hadamard, kerdock)")
    p.add_argument("--file", help="column-matrix frame file (external)")
    p.add_argument("--kerdock-set-file", help="binary symmetric matrix set file")
    p.add_argument("--kron", default="none", help="none | hadamard:K | dft:P | file:PATH")
    p.add_argument("--out-dir", default=".", help="output directory")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("analyze", parents=[common], help="report on a frame file")
    p.add_argument("frame", help=".bfm frame file")
    p.add_argument("--out-dir", default=".", help="output directory")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("bounds", parents=[common], help="bound table for (n, r, m)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--field", choices=("real", "complex"), default="complex")
    p.add_argument("--out-dir", default=None, help="also write bounds.json here")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser(
        "threshold", parents=[common], help="sparsity threshold multiplier"
    )
    p.add_argument("--beta", type=float, help="single aspect ratio in (0, 1/2)")
    p.add_argument("--grid", help="LO:HI:COUNT inclusive grid")
    p.add_argument("--out-dir", default=None, help="also write threshold table here")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser(
        "random-mu", parents=[common], help="random-frame coherence curve"
    )
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r-grid", required=True, help="comma-separated block widths")
    p.add_argument("--m-cap", type=int, default=400, help="cap on block count")
    p.add_argument("--out-dir", default=".", help="output directory")
    p.set_defaults(func=cmd_random_mu)

    p = sub.add_parser("flip", parents=[common], help="greedy sign flip of a frame")
    p.add_argument("frame", help=".bfm frame file")
    p.add_argument("--norm", choices=("spectral", "frobenius"), default="spectral")
    p.add_argument("--out-dir", default=".", help="output directory")
    p.set_defaults(func=cmd_flip)

    p = sub.add_parser(
        "flip-table", parents=[common], help="flip improvement over random frames"
    )
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--r-list", required=True, help="comma-separated block widths")
    p.add_argument("--realizations", type=int, default=10)
    p.add_argument("--norm", choices=("spectral", "frobenius"), default="spectral")
    p.add_argument("--out-dir", default=".", help="output directory")
    p.set_defaults(func=cmd_flip_table)

    p = sub.add_parser("cs", parents=[common], help="block-sparse recovery experiment")
    p.add_argument("--frame", action="append", help="LABEL=PATH (repeatable)")
    p.add_argument(
        "--random", action="append", help="LABEL=N,R,M random frame, redrawn per trial"
    )
    p.add_argument("--k-grid", required=True, help="comma-separated block sparsities")
    p.add_argument("--dr-grid", default="10", help="comma-separated dynamic ranges")
    p.add_argument("--snr-db", type=float, default=None, help="add noise at this SNR")
    p.add_argument(
        "--signal-field", choices=("real", "complex"), default="real"
    )
    p.add_argument("--out-dir", default=".", help="output directory")
    p.set_defaults(func=cmd_cs)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FrameError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
