"""Command-line entry point.

Subcommands: gen, solve, stats, verify-topology, train, eval, fit,
table1.  Every subcommand is deterministic given its flags and --seed.
Exit codes: 0 success, 2 usage, 3 parse error, 4 capacity error, 5
internal error.  Report paths write figures next to their CSV output
unless --no-figures is given; worker count comes from --workers or the
PURITY_TSP_WORKERS environment variable.
"""

import argparse
import json
import os
import sys
from pathlib import Path

from . import figures
from .errors import CapacityError, DegenerateFitError, TsplibParseError
from .generators import (DISTRIBUTIONS, GenSpec, generate, generate_suite,
                         parse_spec_string, read_manifest, write_manifest)
from .geometry import Instance, all_pairs_purity
from .pipeline import run_purity_pipeline
from .policy import PolicyParams, rollout
from .purity import purity_profile
from .solvers import held_karp, local_search_solve, nearest_neighbor
from .stats import fit_purity_law, proportions, read_histogram, write_histogram
from .topology import run_topology_suite
from .training import (TrainConfig, evaluate, greedy_wall_time, load_config,
                       train)
from .tsplib import load_tsplib, rounded_tour_length

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_CAPACITY = 4
EXIT_INTERNAL = 5


def _workers(args) -> int:
    if args.workers is not None:
        return max(1, args.workers)
    return max(1, int(os.environ.get("PURITY_TSP_WORKERS", "1")))


def _parse_scales(text: str) -> list[int]:
    return [int(s) for s in text.split(",") if s]


def _parse_dists(text: str) -> list[str]:
    if text == "all":
        return list(DISTRIBUTIONS)
    dists = [d for d in text.split(",") if d]
    for d in dists:
        if d not in DISTRIBUTIONS:
            raise ValueError(f"unknown distribution {d!r}")
    return dists


def _cmd_gen(args) -> int:
    params = dict(kv.split("=", 1) for kv in args.param or [])
    suite = generate_suite(_parse_scales(args.scales), _parse_dists(args.dists),
                           args.count, args.seed, paper_protocol=args.paper_protocol,
                           params={k: float(v) for k, v in params.items()})
    write_manifest(args.out, suite, base_seed=args.seed)
    total = sum(len(v) for v in suite.values())
    print(f"wrote {total} instance specs across {len(suite)} cells to {args.out}")
    return EXIT_OK


def _cmd_solve(args) -> int:
    if args.instance:
        inst = Instance.from_json(Path(args.instance).read_text())
    else:
        inst = generate(parse_spec_string(args.spec))
    method = "exact" if args.exact else args.method
    if method == "exact":
        tour = held_karp(inst)
    elif method == "nn":
        tour = nearest_neighbor(inst, args.start)
    else:
        tour = local_search_solve(inst, restarts=args.restarts, seed=args.seed)
    payload = tour.to_json()
    if args.out:
        Path(args.out).write_text(payload + "\n")
    else:
        print(payload)
    return EXIT_OK


def _cmd_stats(args) -> int:
    suite = generate_suite(_parse_scales(args.scales), _parse_dists(args.dists),
                           args.count, args.seed, paper_protocol=args.paper_protocol)
    pools, report = run_purity_pipeline(suite, restarts=args.restarts, seed=args.seed,
                                        workers=_workers(args))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.csv").write_text(report.to_csv())
    (out / "report.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    hist_dir = out / "histograms"
    hist_dir.mkdir(exist_ok=True)
    for (scale, dist), pool in pools.items():
        write_histogram(hist_dir / f"{dist}_{scale}.json", pool)
    if args.figures:
        figures.purity_law_figure(pools, report, out / "purity_law.png")
    print(report.to_csv(), end="")
    return EXIT_OK


def _cmd_verify_topology(args) -> int:
    res = run_topology_suite(args.instances, args.n_min, args.n_max, args.seed)
    payload = json.dumps(res.to_dict(), indent=2)
    if args.out:
        Path(args.out).write_text(payload + "\n")
    print(payload)
    return EXIT_OK


def _cmd_train(args) -> int:
    overrides = {k: getattr(args, k) for k in
                 ("mode", "epochs", "steps_per_epoch", "batch_size", "scale",
                  "learning_rate", "discount", "seed")
                 if getattr(args, k) is not None}
    if args.config:
        config = load_config(args.config, overrides)
    else:
        config = TrainConfig(**overrides)
    params, report = train(config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "params.json").write_text(params.to_json() + "\n")
    (out / "report.csv").write_text(report.to_csv())
    (out / "summary.json").write_text(json.dumps(report.summary(), indent=2) + "\n")
    if args.figures:
        figures.train_report_figure(report, out / "training.png")
    print(json.dumps(report.summary(), indent=2))
    return EXIT_OK


def _cmd_eval(args) -> int:
    params = PolicyParams.from_json(Path(args.params).read_text())
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.tsplib:
        tsp = load_tsplib(args.tsplib)
        r = rollout(tsp.instance, params, "greedy")
        model_rounded = rounded_tour_length(tsp.raw_coords, r.tour.order)
        ls = local_search_solve(tsp.instance, restarts=args.restarts, seed=args.seed)
        ls_rounded = rounded_tour_length(tsp.raw_coords, ls.order)
        prof = purity_profile(tsp.instance, r.tour)
        optimum = args.optimum if args.optimum is not None else tsp.optimum
        payload = {"name": tsp.name, "n": tsp.n,
                   "model_rounded_length": model_rounded,
                   "local_search_rounded_length": ls_rounded,
                   "optimum": optimum,
                   "model_gap_vs_optimum_pct":
                       None if optimum is None else 100.0 * (model_rounded - optimum) / optimum,
                   "local_search_gap_vs_optimum_pct":
                       None if optimum is None else 100.0 * (ls_rounded - optimum) / optimum,
                   "prop0": prof.prop0, "apo_all": prof.apo_all, "apo_non0": prof.apo_non0}
        (out / "tsplib_eval.json").write_text(json.dumps(payload, indent=2) + "\n")
        print(json.dumps(payload, indent=2))
        return EXIT_OK
    suite = read_manifest(args.suite)
    all_rows = {}
    for (scale, dist), specs in sorted(suite.items()):
        instances = [generate(s) for s in specs]
        result = evaluate(params, instances, reference=args.ref,
                          restarts=args.restarts, seed=args.seed)
        all_rows[(scale, dist)] = result
        (out / f"eval_{dist}_{scale}.csv").write_text(result.to_csv())
        if args.figures:
            figures.eval_figure(result, out / f"eval_{dist}_{scale}.png")
        if args.timing:
            cache = [all_pairs_purity(inst) for inst in instances]
            wall = greedy_wall_time(params, instances, cache, repeats=3)
            print(f"{dist}-{scale}: wall time {wall:.3f}s for {len(instances)} instances")
    summary = {f"{dist}-{scale}": {"mean_gap_pct": res.mean_gap,
                                   "mean_prop0": res.mean_prop0,
                                   "mean_length": res.mean_length}
               for (scale, dist), res in sorted(all_rows.items())}
    (out / "eval_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def _cmd_table1(args) -> int:
    with open(args.report) as fh:
        payload = json.load(fh)
    print(json.dumps(payload["summary"], indent=2))
    return EXIT_OK


def _cmd_fit(args) -> int:
    pool = read_histogram(args.histogram)
    fit = fit_purity_law(proportions(pool))
    payload = json.dumps({"alpha": fit.alpha, "beta": fit.beta,
                          "fit_error": fit.fit_error, "k_used": fit.k_used}, indent=2)
    if args.out:
        Path(args.out).write_text(payload + "\n")
    print(payload)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="purity-tsp",
                                description="Purity-order analysis and training toolkit for Euclidean TSP")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write an instance-suite manifest")
    g.add_argument("--scales", required=True, help="comma-separated scales, e.g. 20,50")
    g.add_argument("--dists", default="all", help="comma-separated distributions or 'all'")
    g.add_argument("--count", type=int, default=32, help="instances per (scale, distribution) cell")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--paper-protocol", action="store_true",
                   help="256 instances below scale 500, 128 at or above")
    g.add_argument("--param", action="append", metavar="K=V",
                   help="distribution parameter override (repeatable)")
    g.add_argument("--out", required=True)
    g.set_defaults(func=_cmd_gen)

    s = sub.add_parser("solve", help="solve one instance and emit tour JSON")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--spec", help="generator spec dist:scale:seed[:k=v,...]")
    src.add_argument("--instance", help="path to an instance JSON file")
    s.add_argument("--method", choices=("local-search", "exact", "nn"), default="local-search")
    s.add_argument("--exact", action="store_true", help="shorthand for --method exact")
    s.add_argument("--restarts", type=int, default=10)
    s.add_argument("--start", type=int, default=0, help="start vertex for --method nn")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=_cmd_solve)

    st = sub.add_parser("stats", help="run the purity-law pipeline end to end")
    st.add_argument("--scales", required=True)
    st.add_argument("--dists", default="all")
    st.add_argument("--count", type=int, default=128)
    st.add_argument("--seed", type=int, default=0)
    st.add_argument("--restarts", type=int, default=10)
    st.add_argument("--paper-protocol", action="store_true")
    st.add_argument("--workers", type=int, default=None)
    st.add_argument("--figures", action=argparse.BooleanOptionalAction, default=True)
    st.add_argument("--out", required=True, help="output directory")
    st.set_defaults(func=_cmd_stats)

    vt = sub.add_parser("verify-topology", help="fuzz the 0-order edge structure checks")
    vt.add_argument("--instances", type=int, default=1000)
    vt.add_argument("--n-min", type=int, default=2)
    vt.add_argument("--n-max", type=int, default=50)
    vt.add_argument("--seed", type=int, default=0)
    vt.add_argument("--out")
    vt.set_defaults(func=_cmd_verify_topology)

    t = sub.add_parser("train", help="train the feature policy")
    t.add_argument("--config", help="JSON or TOML config file")
    t.add_argument("--mode", choices=("vanilla", "pupo"))
    t.add_argument("--epochs", type=int)
    t.add_argument("--steps-per-epoch", dest="steps_per_epoch", type=int)
    t.add_argument("--batch-size", dest="batch_size", type=int)
    t.add_argument("--scale", type=int)
    t.add_argument("--learning-rate", dest="learning_rate", type=float)
    t.add_argument("--discount", type=float)
    t.add_argument("--seed", type=int)
    t.add_argument("--figures", action=argparse.BooleanOptionalAction, default=True)
    t.add_argument("--out", required=True, help="output directory")
    t.set_defaults(func=_cmd_train)

    e = sub.add_parser("eval", help="evaluate saved params on a suite or TSPLIB file")
    e.add_argument("--params", required=True)
    src = e.add_mutually_exclusive_group(required=True)
    src.add_argument("--suite", help="suite manifest JSON from 'gen'")
    src.add_argument("--tsplib", help="TSPLIB .tsp file (EUC_2D)")
    e.add_argument("--ref", choices=("local_search", "held_karp"), default="local_search")
    e.add_argument("--restarts", type=int, default=10)
    e.add_argument("--optimum", type=int, help="published optimum for --tsplib gap")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--timing", action="store_true", help="report greedy wall time per cell")
    e.add_argument("--figures", action=argparse.BooleanOptionalAction, default=True)
    e.add_argument("--out", required=True, help="output directory")
    e.set_defaults(func=_cmd_eval)

    f = sub.add_parser("fit", help="fit the decay law to a saved histogram")
    f.add_argument("--histogram", required=True)
    f.add_argument("--out")
    f.set_defaults(func=_cmd_fit)

    t1 = sub.add_parser("table1", help="print the mean/variance fit summary of a stats report")
    t1.add_argument("--report", required=True, help="report.json produced by 'stats'")
    t1.set_defaults(func=_cmd_table1)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TsplibParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except json.JSONDecodeError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ValueError, DegenerateFitError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # pragma: no cover - safety net
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
