"""Command line interface.

Subcommands: thresholds, gen, peel, depth, couple, binproc, sweep, fit, plot.
Exit codes: 0 success, 2 domain/schema error, 3 saturated rejection budget.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from . import binprocess, coupling, depth, experiments, peeling, plots, thresholds
from .apmodel import load_configuration, sample_ap, sample_simple, save_configuration
from .errors import DomainError, SaturationError, SchemaError


def _emit_json(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _cmd_thresholds(args) -> int:
    consts = thresholds.core_constants(args.r, args.k)
    out = dataclasses.asdict(consts)
    if args.c is not None:
        profile = thresholds.supercritical_profile(args.c, args.r, args.k)
        out.update(dataclasses.asdict(profile))
    _emit_json(out)
    return 0


def _cmd_gen(args) -> int:
    sampler = sample_simple if args.simple else sample_ap
    cfg = sampler(args.n, args.m, args.r, args.seed)
    save_configuration(cfg, args.out)
    _emit_json({"n": cfg.n, "m": cfg.m, "r": cfg.r, "simple": bool(args.simple),
                "rejections": cfg.rejections, "out": args.out})
    return 0


def _cmd_peel(args) -> int:
    cfg = load_configuration(getattr(args, "in"))
    summary = {"engine": args.engine, "n": cfg.n, "r": cfg.r, "k": args.k}
    if args.engine == "slow":
        result, trace = peeling.slow_strip(cfg, args.k)
        summary["slow_steps"] = trace.total_steps
        if args.trace:
            peeling.write_trace_csv(trace, args.trace)
            summary["trace"] = args.trace
    else:
        if args.trace:
            raise SchemaError("--trace needs --engine slow")
        result = peeling.parallel_strip(cfg, args.k)
    if args.layers:
        peeling.write_layers_csv(result, args.layers)
        summary["layers"] = args.layers
    summary.update({"s": result.s, "i_max": result.i_max,
                    "core_vertices": result.core.vertex_count,
                    "core_tuples": result.core.live_tuple_count,
                    "layer_sizes": [int(x) for x in result.layer_sizes]})
    _emit_json(summary)
    return 0


def _cmd_depth(args) -> int:
    cfg = load_configuration(getattr(args, "in"))
    slow = peeling.slow_strip(cfg, args.k)
    dg = depth.build_strip_digraph(cfg, args.k, slow=slow)
    if args.max:
        vertex, size = depth.max_reach(cfg, args.k, dg=dg)
        out = {"vertex": vertex, "reach_size": size,
               "round": int(dg.layer_of[vertex]) if vertex is not None else None}
    else:
        v = args.vertex
        out = {"vertex": v, "round": int(dg.layer_of[v]) if dg.layer_of[v] >= 0 else None,
               "reach_size": int(depth.reach_set(dg, v).shape[0])}
    if args.exact and out["vertex"] is not None:
        out["exact_depth"] = depth.exact_depth(cfg, args.k, out["vertex"])
    if args.layers and out["vertex"] is not None:
        layered = depth.layered_reach(cfg, args.k, out["vertex"], peel=slow[0])
        out["layers"] = [{"j": int(j), "size": int(m.shape[0]), "dminus": int(d)}
                         for j, m, d in zip(layered.layer_ids, layered.members,
                                            layered.dminus)]
    _emit_json(out)
    return 0


def _cmd_couple(args) -> int:
    h_prime, h = coupling.couple_pair(args.n, args.c, args.cprime, args.r, args.seed)
    report = coupling.slowed_strip(h_prime, h, args.k, args.B)
    out = report.summary()
    out["seed"] = args.seed
    with open(args.out, "w") as fh:
        json.dump(out, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _emit_json(out)
    return 0


def _cmd_binproc(args) -> int:
    trace = binprocess.run_bin_process(args.N, args.D, args.k, args.r, args.sigma,
                                       args.nref, args.seed)
    binprocess.write_bin_trace_csv(trace, args.trace)
    _emit_json({"steps": int(trace.N_hat.shape[0] - 1), "tau_1_sigma": trace.tau_1_sigma,
                "trace": args.trace})
    return 0


def _cmd_sweep(args) -> int:
    spec = experiments.ExperimentSpec.from_json(args.spec)
    rows = experiments.run_sweep(spec, out_path=args.out, jobs=args.jobs,
                                 timings=args.timings)
    errors = sum(1 for row in rows if row["error"])
    _emit_json({"rows": len(rows), "errors": errors, "out": args.out})
    return 0


def _cmd_fit(args) -> int:
    report = experiments.fit_scaling(getattr(args, "in"), args.model, y_field=args.y)
    _emit_json(dataclasses.asdict(report))
    return 0


def _cmd_plot(args) -> int:
    plots.emit_plots(getattr(args, "in"), args.kind, args.out)
    _emit_json({"kind": args.kind, "out": args.out})
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="corestrip",
                                     description="k-core stripping lab")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("thresholds", help="print analytic constants as JSON")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--c", type=float, default=None,
                   help="also report the supercritical profile at this density")
    p.set_defaults(func=_cmd_thresholds)

    p = sub.add_parser("gen", help="sample a configuration to a text file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--simple", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("peel", help="strip a configuration to its k-core")
    p.add_argument("--in", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--engine", choices=("parallel", "slow"), default="parallel")
    p.add_argument("--trace", default=None, help="step-trace CSV (slow engine)")
    p.add_argument("--layers", default=None, help="per-round layer-size CSV")
    p.set_defaults(func=_cmd_peel)

    p = sub.add_parser("depth", help="reachability and depth of non-core vertices")
    p.add_argument("--in", required=True)
    p.add_argument("--k", type=int, required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--vertex", type=int)
    group.add_argument("--max", action="store_true")
    p.add_argument("--exact", action="store_true")
    p.add_argument("--layers", action="store_true")
    p.set_defaults(func=_cmd_depth)

    p = sub.add_parser("couple", help="coupled pair and slowed-down stripping report")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--cprime", type=float, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--B", type=int, default=10)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_couple)

    p = sub.add_parser("binproc", help="bins-only point removal process")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--D", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--nref", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--trace", required=True)
    p.set_defaults(func=_cmd_binproc)

    p = sub.add_parser("sweep", help="run a declarative experiment sweep")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--timings", action="store_true",
                   help="fill runtime_ms (makes output nondeterministic)")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("fit", help="fit a scaling model to sweep results")
    p.add_argument("--in", required=True)
    p.add_argument("--model", required=True,
                   choices=("power_in_xi", "log_over_sqrt_xi", "power_in_n"))
    p.add_argument("--y", default="s_rounds")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("plot", help="emit a standalone SVG plot")
    p.add_argument("--in", required=True)
    p.add_argument("--kind", required=True, choices=plots.PLOT_KINDS)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DomainError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SaturationError as exc:
        print(f"saturated: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
