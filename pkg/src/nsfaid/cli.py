"""Command-line front end.

Exit codes: 0 success, 1 runtime failure, 2 bad command line, 3 invalid
configuration (code, kernel or LUT files and values).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace
from importlib import resources
from pathlib import Path

from . import density, montecarlo, schedule, search
from .code import (BUILTIN_CODES, CodeFormatError, DegreeDistribution, ScheduleError, builtin_code,
                   find_pipeline_row_order, group_layers, load_base_matrix)
from .decoder import KernelConfigError, KernelSpec, load_kernel
from .framing import count_framings, enumerate_framings, format_lut, identity, parse_lut

EXIT_RUNTIME = 1
EXIT_USAGE = 2
EXIT_CONFIG = 3


class ConfigError(Exception):
    pass


# argument helpers


def parse_snrs(text: str) -> list[float]:
    """``start:step:stop`` (inclusive) or a comma-separated list."""
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[1] <= 0:
            raise ConfigError(f"bad SNR range {text!r}; use start:step:stop")
        start, step, stop = parts
        n = int(round((stop - start) / step))
        return [round(start + k * step, 6) for k in range(n + 1)]
    return [float(s) for s in text.split(",") if s.strip()]


def parse_mu_grid(text: str) -> list[float]:
    if ":" in text:
        start, step, stop = (float(p) for p in text.split(":"))
        n = int(round((stop - start) / step))
        return [round(start + k * step, 6) for k in range(n + 1)]
    return [float(s) for s in text.split(",")]


def parse_cutoffs(text: str) -> dict[int, float]:
    out = {}
    for item in text.split(","):
        w, v = item.split(":")
        out[int(w)] = float(v)
    return out


def parse_luts(text: str) -> dict[int, object]:
    """``2=[0,1,...];3=[...]`` -> degree -> FramingFunction."""
    out = {}
    for item in text.split(";"):
        if not item.strip():
            continue
        d, lit = item.split("=", 1)
        out[int(d)] = parse_lut(lit)
    return out


def resolve_code(name: str):
    path = Path(name)
    if path.exists():
        return load_base_matrix(path)
    stem = path.name
    for suffix in (".bm", ".txt"):
        if stem.endswith(suffix):
            stem = stem[: -len(suffix)]
    for key in BUILTIN_CODES:
        if stem == key or BUILTIN_CODES[key].startswith(stem):
            return builtin_code(key)
    raise ConfigError(f"code file {name!r} not found (built-in codes: {', '.join(BUILTIN_CODES)})")


def resolve_kernel(name: str) -> KernelSpec:
    path = Path(name)
    if not path.exists():
        fname = path.name if path.suffix else path.name + ".toml"
        bundled = resources.files("nsfaid.data") / "kernels" / fname
        if not bundled.is_file():
            raise ConfigError(f"kernel file {name!r} not found")
        with resources.as_file(bundled) as p:
            return load_kernel(p)
    return load_kernel(path)


def resolve_dist(args) -> DegreeDistribution:
    if getattr(args, "dist", None):
        if args.dist in ("wimax", "wimax_r12"):
            return builtin_code("wimax_r12").degree_distributions()
        return DegreeDistribution.parse(args.dist)
    if getattr(args, "code", None):
        return resolve_code(args.code).degree_distributions()
    raise ConfigError("give --dist or --code")


def resolve_framings(args, dist: DegreeDistribution, q: int):
    if getattr(args, "kernel", None):
        return resolve_kernel(args.kernel).framings
    if args.luts:
        return parse_luts(args.luts)
    if args.lut:
        return parse_lut(args.lut)
    return identity(2 ** (q - 1) - 1)


def out_dir(args) -> Path:
    p = Path(args.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


# commands


def cmd_de_threshold(args) -> int:
    dist = resolve_dist(args)
    framings = resolve_framings(args, dist, args.q)
    label = args.label or (args.lut or args.luts or args.kernel or "ms")
    if args.mu is not None:
        res = density.eta_threshold(dist, framings, args.mu, args.eta, max_iter=args.max_iter)
    else:
        grid = parse_mu_grid(args.mu_grid) if args.mu_grid else density.MU_GRID
        res = density.optimize_mu(dist, framings, args.eta, grid, max_iter=args.max_iter)
    print(f"threshold {res.snr_db:.3f} dB  mu={res.mu_opt:.1f}  eta={args.eta:g}  "
          f"iterations={res.iterations_to_converge}")
    density.write_thresholds_csv(out_dir(args) / "thresholds.csv", [(label, res)])
    return 0


def cmd_search_regular(args) -> int:
    dist = resolve_dist(args)
    Q = 2 ** (args.q - 1) - 1
    W = args.weight if args.weight else search.w_to_weight(args.w)
    grid = parse_mu_grid(args.mu_grid) if args.mu_grid else density.MU_GRID
    total = count_framings(Q, W)
    t0 = time.time()

    def progress(i, f):
        if args.verbose:
            print(f"  [{i + 1}/{total}] {format_lut(f)}  ({time.time() - t0:.0f} s)", file=sys.stderr)

    ranked = search.search_regular(dist, args.q, W, args.eta, grid, progress=progress)
    path = out_dir(args) / f"regular_W{W}.csv"
    with open(path, "w") as fh:
        fh.write("rank,lut,lambda,threshold_db,mu\n")
        for i, e in enumerate(ranked):
            th = "" if e.threshold is None else f"{e.threshold.snr_db:.3f}"
            mu = "" if e.threshold is None else f"{e.threshold.mu_opt:.1f}"
            fh.write(f"{i + 1},\"{format_lut(e.framing)}\",{e.framing.lam},{th},{mu}\n")
    print(f"{len(ranked)} framings of weight {W}; best per |F(0)|:")
    for lam, e in search.best_per_lambda(ranked).items():
        print(f"  |F(0)|={lam}  {format_lut(e.framing):<28} {e.threshold.snr_db:.3f} dB (mu={e.threshold.mu_opt:.1f})")
    print(f"ranking written to {path}")
    return 0


def cmd_search_irregular(args) -> int:
    dist = resolve_dist(args)
    degrees = tuple(sorted(dist.lam))
    cutoffs = parse_cutoffs(args.cutoffs)
    Q = 2 ** (args.q - 1) - 1
    grid = parse_mu_grid(args.mu_grid) if args.mu_grid else density.MU_GRID
    bit_lengths = sorted(set(cutoffs) | {args.q})
    print(f"framings available per degree: {search.total_uniform_candidates(Q, bit_lengths)}")
    t0 = time.time()

    def progress(i, f):
        if args.verbose and i % 50 == 0:
            print(f"  screened {i} ({time.time() - t0:.0f} s)", file=sys.stderr)

    usets = search.build_best_uniform_sets(dist, args.q, cutoffs, args.eta, grid, progress=progress)
    odir = out_dir(args)
    with open(odir / "uniform_sets.json", "w") as fh:
        json.dump({str(w): {"cutoff_db": s.cutoff_db, "screened": s.screened,
                            "members": [format_lut(f) for f in s.members],
                            "witness_mu": s.witness_mu} for w, s in usets.items()}, fh, indent=2)
    for w, s in sorted(usets.items()):
        print(f"  U_best(w={w}): {len(s.members)} of {s.screened}")
    count = search.count_irregular(usets, degrees)
    print(f"constrained irregular candidates: {count}")
    if args.count_only:
        return 0
    if not args.long_run and args.budget is None:
        print("DE over all candidates needs --long-run (or a --budget)")
        return 0
    ms = density.optimize_mu(dist, identity(Q), args.eta, grid)
    table = search.evaluate_ensemble(search.enumerate_irregular(usets, degrees), dist, args.eta,
                                     args.budget, grid, args.q)
    records = [search.candidate_record(c, ms.snr_db) for _, c in sorted(table.best.items())]
    search.write_records_json(odir / "irregular_best.json", records)
    search.write_records_csv(odir / "irregular_best.csv", records)
    flag = " (partial: budget exhausted)" if table.partial else ""
    print(f"evaluated {table.evaluated} candidates{flag}")
    for r in records:
        print(f"  NS-FAID-{r['w_profile']}  {r['threshold_db']:.3f} dB (mu={r['mu']:.1f})  "
              f"gain {r['gain_vs_ms_db']:+.3f}  mem {r['mem_vn']:.2f}/{r['mem_cn_u']:.2f}/{r['mem_cn_c']:.2f}")
    return 0


def cmd_simulate(args) -> int:
    code = resolve_code(args.code)
    spec = resolve_kernel(args.kernel) if args.kernel else KernelSpec.min_sum()
    overrides = {}
    if args.mu is not None:
        overrides["mu"] = args.mu
    if args.max_iter is not None:
        overrides["max_iter"] = args.max_iter
    if overrides:
        spec = replace(spec, **overrides)
    plan = montecarlo.SimPlan(code, spec, tuple(parse_snrs(args.snr)), args.min_frame_errors,
                              args.max_frames, args.seed, args.threads or montecarlo.default_threads())

    def progress(p):
        print(f"  {p.snr_db:6.3f} dB  frames={p.frames:<8d} BER={p.ber:.3e}  FER={p.fer:.3e}  "
              f"iters={p.avg_iters:.2f}")

    print(f"code {code.name or 'custom'}: N={code.N}, M={code.M}; schedule={spec.schedule}, mu={spec.mu}")
    if args.random_codewords:
        points = montecarlo.random_codeword_mode(plan, progress=progress)
    else:
        points = montecarlo.run(plan, progress=progress)
    path = out_dir(args) / "ber.csv"
    montecarlo.write_csv(path, points)
    bad = montecarlo.monotonicity_violations(points)
    if bad:
        print(f"BER increases beyond 5 sigma between {bad}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"results written to {path}")
    return 0


def cmd_analyze_schedule(args) -> int:
    code = resolve_code(args.code)
    order = None
    if args.row_order:
        order = [int(r) for r in args.row_order.split(",")]
    elif args.find_order:
        order = find_pipeline_row_order(code)
    sched = group_layers(code, args.rpl, order)
    odir = out_dir(args)
    (odir / "schedule.json").write_text(sched.to_json())
    print(f"code {code.name or 'custom'}: R={code.R}, C={code.C}, z={code.z}, N={code.N}")
    print(f"rpl={args.rpl}: L={sched.L} layers, full={all(sched.full_flags)}, "
          f"pipeline_ok={sched.pipeline_ok}, order={sched.row_order}")
    for (a, b), cols in sched.boundary_overlaps.items():
        print(f"  layers {a}->{b} share columns {list(cols)}")
    if args.rpl == 1:
        framings = resolve_kernel(args.kernel).framings if args.kernel else None
        m = schedule.optimize_vnu_mapping(code, sched.row_order, framings)
        naive = schedule.naive_mapping(code, sched.row_order, framings)
        print(m.report(code.column_degrees))
        hist = m.multiplicity_histogram()
        print("slots by number of framing functions: "
              + ", ".join(f"{n} slot(s) with {k}" for k, n in hist.items())
              + f"  (naive order cost {naive.cost}, optimized {m.cost})")
    if args.f_mhz:
        rows = [{"label": code.name or "code", "N": code.N, "f_mhz": f, "L": sched.L,
                 "n_iter": args.n_iter, "variant": args.variant} for f in args.f_mhz]
        schedule.write_throughput_csv(odir / "throughput.csv", rows)
        for r in rows:
            mbps = schedule.throughput_mbps(r["N"], r["f_mhz"], r["L"], r["n_iter"], r["variant"])
            print(f"throughput at {r['f_mhz']:g} MHz ({args.variant}, {args.n_iter} it): {mbps} Mbps")
    return 0


def cmd_enumerate_framings(args) -> int:
    Q = 2 ** (args.q - 1) - 1
    W = args.weight if args.weight else search.w_to_weight(args.w)
    n = count_framings(Q, W)
    if args.count_only:
        print(n)
        return 0
    for f in enumerate_framings(Q, W):
        print(format_lut(f))
    return 0


# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nsfaid", description="NS-FAID analysis, search and simulation")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--code", help="base-matrix file or built-in code name")
        sp.add_argument("--kernel", help="kernel TOML/JSON file or bundled preset name")
        sp.add_argument("--out", default="results", help="output directory")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int, default=0, help="worker threads (default: available cores)")

    def de_args(sp):
        sp.add_argument("--dist", help="'dv,dc', 'wimax' or 'd:f,../d:f,..'")
        sp.add_argument("--q", type=int, default=4)
        sp.add_argument("--eta", type=float, default=0.0)
        sp.add_argument("--mu-grid", help="start:step:stop or list (default 1.0:0.1:12.0)")

    sp = sub.add_parser("de-threshold", help="DE threshold of one kernel")
    common(sp)
    de_args(sp)
    sp.add_argument("--lut", help="LUT literal for all degrees, e.g. [0,1,1,3,3,3,7,7]")
    sp.add_argument("--luts", help="per-degree LUTs, e.g. '2=[...];3=[...];6=[...]'")
    sp.add_argument("--mu", type=float, help="fixed gain factor (otherwise optimized over the grid)")
    sp.add_argument("--max-iter", type=int, default=density.DEFAULT_MAX_ITER)
    sp.add_argument("--label")
    sp.set_defaults(func=cmd_de_threshold)

    sp = sub.add_parser("search-regular", help="rank all framings of one weight")
    common(sp)
    de_args(sp)
    sp.add_argument("--w", type=int, default=3, help="framing bit-length")
    sp.add_argument("--weight", type=int, help="framing weight W (overrides --w)")
    sp.add_argument("-v", "--verbose", action="store_true")
    sp.set_defaults(func=cmd_search_regular)

    sp = sub.add_parser("search-irregular", help="best-set screening, candidate count and DE")
    common(sp)
    de_args(sp)
    sp.set_defaults(eta=1e-6)
    sp.add_argument("--cutoffs", default="2:5.0,3:3.0", help="w:dB pairs")
    sp.add_argument("--count-only", action="store_true")
    sp.add_argument("--long-run", action="store_true", help="DE-evaluate every candidate")
    sp.add_argument("--budget", type=int, help="stop after this many DE evaluations")
    sp.add_argument("-v", "--verbose", action="store_true")
    sp.set_defaults(func=cmd_search_irregular)

    sp = sub.add_parser("simulate", help="Monte-Carlo BER/FER")
    common(sp)
    sp.add_argument("--snr", required=True, help="start:step:stop or comma list (dB)")
    sp.add_argument("--mu", type=float)
    sp.add_argument("--max-iter", type=int)
    sp.add_argument("--min-frame-errors", type=int, default=100)
    sp.add_argument("--max-frames", type=int, default=10_000_000)
    sp.add_argument("--random-codewords", action="store_true")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("analyze-schedule", help="layers, pipelining, VNU mapping, throughput")
    common(sp)
    sp.add_argument("--rpl", type=int, default=1)
    sp.add_argument("--row-order", help="comma-separated base-row order")
    sp.add_argument("--find-order", action="store_true", help="search a pipeline-compatible row order")
    sp.add_argument("--f-mhz", type=float, nargs="*", help="clock frequencies for the throughput table")
    sp.add_argument("--n-iter", type=int, default=20)
    sp.add_argument("--variant", choices=[schedule.PIPELINED, schedule.FULL_LAYER], default=schedule.PIPELINED)
    sp.set_defaults(func=cmd_analyze_schedule)

    sp = sub.add_parser("enumerate-framings", help="list or count framing functions")
    sp.add_argument("--q", type=int, default=4)
    sp.add_argument("--w", type=int, default=3, help="framing bit-length")
    sp.add_argument("--weight", type=int, help="framing weight W (overrides --w)")
    sp.add_argument("--count-only", action="store_true")
    sp.set_defaults(func=cmd_enumerate_framings)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with 2 on bad flags, 0 on --help
    if getattr(args, "command", None) == "simulate" and not args.code:
        parser.error("simulate needs --code")
    if getattr(args, "command", None) == "analyze-schedule" and not args.code:
        parser.error("analyze-schedule needs --code")
    try:
        return args.func(args)
    except density.DegenerateKernelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ConfigError, KernelConfigError, CodeFormatError, ScheduleError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
