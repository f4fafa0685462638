"""Command line interface.

Subcommands: gen, reduce, sat, cola, predict, census, window, simprob,
sweep.  Exit codes: 0 success, 1 usage error, 2 runtime failure.  Reports
are deterministic for a fixed seed; pass --timing to include wall-clock
runtime in sweep output (off by default so identical configs give
byte-identical reports).
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import theory
from .cola import core_via_cola
from .confmodel import estimate_sim_prob
from .experiments import ExperimentConfig, classical_p, run_experiment
from .formula import MultiFormula, census, dimacs_str, is_simple, read_dimacs
from .gen import sample_classical, sample_poisson_cloning, stream_rng
from .reduce import kernel, pla_core, reduction_stats
from .sat import decide_2sat


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common(p, need_n=True):
    p.add_argument("--seed", type=int, default=0)
    if need_n:
        p.add_argument("--n", type=int, required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--lambda", dest="lam", type=float)
    group.add_argument("--sigma", type=float)
    p.add_argument("--k", type=int, default=2)


def _emit(text, path):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _read_formula(path) -> MultiFormula:
    if path:
        with open(path) as fh:
            return read_dimacs(fh)
    return read_dimacs(sys.stdin)


def _census_json(formula: MultiFormula) -> dict:
    return {f"{i},{j}": c for (i, j), c in sorted(census(formula).items())}


def _cmd_gen(args) -> int:
    rng = stream_rng(args.seed, 0)
    if args.lam is None:
        raise ValueError("gen requires --lambda")
    if args.model == "classical":
        formula = sample_classical(args.n, classical_p(args.n, args.lam, args.k), args.k, rng)
    else:
        formula = sample_poisson_cloning(args.n, args.lam, args.k, rng)
    _emit(dimacs_str(formula), args.out)
    return 0


def _cmd_reduce(args) -> int:
    formula = _read_formula(args.infile)
    stats = reduction_stats(formula)
    core = pla_core(formula).core
    kres = kernel(core)
    if args.core_out:
        _emit(dimacs_str(core), args.core_out)
    if args.kernel_out:
        _emit(dimacs_str(kres.kernel), args.kernel_out)
    payload = {
        "core_clauses": stats.core_clauses,
        "kernel_clauses": stats.kernel_clauses,
        "core_census": {f"{i},{j}": c for (i, j), c in sorted(stats.core_census.items())},
        "kernel_census": {f"{i},{j}": c for (i, j), c in sorted(stats.kernel_census.items())},
        "resolved_vars": kres.resolved_vars,
        "dropped_degenerate": kres.dropped_degenerate,
        "purged_pure_clauses": kres.purged_pure_clauses,
        "kernel_slot_identity": stats.kernel_slot_identity,
    }
    _emit(json.dumps(payload, sort_keys=True, indent=2) + "\n", args.out)
    return 0


def _cmd_sat(args) -> int:
    formula = _read_formula(args.infile)
    verdict = decide_2sat(formula)
    payload = {"satisfiable": verdict.satisfiable}
    if verdict.satisfiable and args.witness:
        payload["assignment"] = {str(v): verdict.assignment[v]
                                 for v in sorted(verdict.assignment)}
    _emit(json.dumps(payload, sort_keys=True, indent=2) + "\n", args.out)
    return 0


def _cmd_cola(args) -> int:
    if args.lam is None:
        raise ValueError("cola requires --lambda")
    rng = stream_rng(args.seed, 0)
    out = core_via_cola(args.n, args.lam, rng, record_trace=args.record_trajectory)
    payload = {
        "lambda_c": out.trace.lambda_c,
        "lambda_c_at_start": out.trace.lambda_c_at_start,
        "total_clones": out.trace.total_clones,
        "core_clones": int(out.core_support.shape[0]),
        "core_clauses": out.core_formula.num_clauses,
        "formula_clauses": out.formula.num_clauses,
    }
    _emit(json.dumps(payload, sort_keys=True, indent=2) + "\n", args.out)
    if args.record_trajectory:
        tr = out.trace
        lines = ["step,matched,cutoff,light,heavy"]
        for i in range(len(tr.matched)):
            lines.append(f"{i},{tr.matched[i]},{tr.cutoff[i]!r},{tr.light[i]},{tr.heavy[i]}")
        _emit("\n".join(lines) + "\n", args.trace_out)
    return 0


def _cmd_predict(args) -> int:
    if args.lam is None and args.sigma is None:
        raise ValueError("predict requires --lambda or --sigma")
    lam = args.lam if args.lam is not None else 1.0 + args.sigma
    fp = theory.theta_fixed_point(lam, args.k)
    payload = {"lambda": lam, "k": args.k, "theta": fp.theta}
    if args.k == 2 and lam > 1.0:
        payload["core"] = {k: {"value": p.value, "scale": p.scale}
                           for k, p in theory.predict_core(args.n, lam).items()}
        payload["kernel"] = {k: {"value": p.value, "scale": p.scale}
                             for k, p in theory.predict_kernel(args.n, lam).items()}
        cpred = theory.predict_census(args.n, lam, args.i, args.j)
        payload[f"census_{args.i}{args.j}"] = {k: {"value": p.value, "scale": p.scale}
                                               for k, p in cpred.items()}
    if args.k >= 3:
        thr = theory.pla_threshold(args.k)
        payload["pla_threshold"] = thr
    _emit(json.dumps(payload, sort_keys=True, indent=2) + "\n", args.out)
    return 0


def _cmd_census(args) -> int:
    formula = _read_formula(args.infile)
    payload = {
        "n": formula.n,
        "clauses": formula.num_clauses,
        "census": _census_json(formula),
        "simple": is_simple(formula),
    }
    _emit(json.dumps(payload, sort_keys=True, indent=2) + "\n", args.out)
    return 0


def _cmd_window(args) -> int:
    if args.sigma is None:
        raise ValueError("window requires --sigma")
    probs = theory.window_sub_probs(args.n, args.sigma)
    payload = {
        "n": args.n,
        "sigma": args.sigma,
        "lambda_sub": 1.0 - args.sigma,
        "p_kernel_nonempty": probs["p_kernel_nonempty"].value,
        "p_unsat": probs["p_unsat"].value,
        "supercritical_note": "Pr[SAT] = exp(-Theta(sigma^3 n)); constant unspecified, "
                              "estimate the slope empirically via sweep --experiment window-super",
    }
    _emit(json.dumps(payload, sort_keys=True, indent=2) + "\n", args.out)
    return 0


def _cmd_simprob(args) -> int:
    cns = {}
    for key, cnt in json.loads(args.census).items():
        i, j = key.split(",")
        cns[(int(i), int(j))] = int(cnt)
    rng = stream_rng(args.seed, 0)
    est = estimate_sim_prob(cns, args.trials, rng)
    payload = {
        "probability": est.probability,
        "ci95": list(est.ci95),
        "trials": est.trials,
        "simple_count": est.simple_count,
    }
    _emit(json.dumps(payload, sort_keys=True, indent=2) + "\n", args.out)
    return 0


def _cmd_sweep(args) -> int:
    sim_census = None
    if args.census:
        items = []
        for key, cnt in json.loads(args.census).items():
            i, j = key.split(",")
            items.append((int(i), int(j), int(cnt)))
        sim_census = tuple(sorted(items))
    config = ExperimentConfig(
        experiment=args.experiment,
        n=args.n if args.n is not None else 0,
        trials=args.trials,
        seed=args.seed,
        lam=args.lam,
        sigma=args.sigma,
        k=args.k,
        model=args.model or "",
        sim_census=sim_census,
        record_trajectory=args.record_trajectory,
    )
    start = time.monotonic()
    report = run_experiment(config)
    if args.timing:
        report.runtime_seconds = time.monotonic() - start
    text = report.to_csv() if args.format == "csv" else report.to_json()
    _emit(text, args.out)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="satlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="sample a random formula, write DIMACS")
    _add_common(p)
    p.add_argument("--model", choices=["classical", "cloning"], default="classical")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("reduce", help="DIMACS in; core/kernel DIMACS and census JSON out")
    p.add_argument("--in", dest="infile")
    p.add_argument("--core-out", dest="core_out")
    p.add_argument("--kernel-out", dest="kernel_out")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_reduce)

    p = sub.add_parser("sat", help="DIMACS in; 2-SAT verdict JSON out")
    p.add_argument("--in", dest="infile")
    p.add_argument("--witness", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_sat)

    p = sub.add_parser("cola", help="run the cut-off line algorithm once")
    _add_common(p)
    p.add_argument("--record-trajectory", action="store_true")
    p.add_argument("--trace-out")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_cola)

    p = sub.add_parser("predict", help="closed-form theta/core/kernel/census predictions")
    _add_common(p)
    p.add_argument("--i", type=int, default=1)
    p.add_argument("--j", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("census", help="DIMACS in; type census JSON out")
    p.add_argument("--in", dest="infile")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_census)

    p = sub.add_parser("window", help="scaling-window probability predictions")
    _add_common(p)
    p.set_defaults(func=_cmd_window)
    p.add_argument("--out")

    p = sub.add_parser("simprob", help="estimate Pr[SIMPLE] for a census")
    p.add_argument("--census", required=True, help='JSON map "i,j" -> count')
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_simprob)

    p = sub.add_parser("sweep", help="run a Monte Carlo experiment")
    p.add_argument("--experiment", required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--lambda", dest="lam", type=float)
    group.add_argument("--sigma", type=float)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--model", choices=["classical", "cloning"])
    p.add_argument("--census", help='JSON census for sim-prob')
    p.add_argument("--record-trajectory", action="store_true")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--timing", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"satlab: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
