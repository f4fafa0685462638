"""Experiment driver: per-trial pipelines, deterministic parallel trial
execution, aggregation into reports.

Every trial owns a generator derived from (master seed, trial index) via
:func:`satlab.gen.stream_rng`, so reports are byte-identical for identical
configs regardless of worker count (trials are aggregated in index order).
Worker count comes from the SATLAB_WORKERS environment variable (default 1)
and never affects results.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

from . import theory
from .cola import core_via_cola, trajectory
from .confmodel import _census_labels, _pairs_simple
from .formula import MultiFormula, census, census_D, is_simple
from .gen import sample_classical, sample_poisson_cloning, stream_rng
from .reduce import kernel, pla_core
from .sat import brute_force, decide_2sat, satisfiable_2sat
from .stats import SummaryStats, summarize, wilson_ci

__all__ = [
    "EXPERIMENTS",
    "ExperimentConfig",
    "ExperimentReport",
    "run_experiment",
    "window_super_slope",
    "model_equiv_check",
    "classical_p",
]

EXPERIMENTS = (
    "core-size",
    "core-census",
    "kernel-size",
    "window-sub",
    "window-super",
    "cutoff-traj",
    "model-equiv",
    "sim-prob",
    "pla-threshold-k",
    "sat-oracle",
)

_TRAJ_THETAS = (0.95, 0.9, 0.8)


def classical_p(n: int, lam: float, k: int = 2) -> float:
    """Clause probability giving mean literal degree lam: p = lam / C(2n-1, k-1)."""
    return lam / math.comb(2 * n - 1, k - 1)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    n: int
    trials: int
    seed: int
    lam: Optional[float] = None
    sigma: Optional[float] = None
    k: int = 2
    model: str = ""  # classical | cloning; defaulted per experiment
    sim_census: Optional[tuple] = None  # ((i, j, count), ...) for sim-prob
    record_trajectory: bool = False

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.experiment == "sim-prob":
            if self.sim_census is None:
                raise ValueError("sim-prob needs a census")
        elif self.experiment == "sat-oracle":
            pass
        else:
            if (self.lam is None) == (self.sigma is None):
                raise ValueError("exactly one of lam / sigma must be set")
            if self.n < 1:
                raise ValueError("n must be >= 1")
        if self.sigma is not None and not 0.0 < self.sigma < 1.0:
            raise ValueError("sigma must be in (0, 1)")
        if self.model and self.model not in ("classical", "cloning"):
            raise ValueError(f"unknown model {self.model!r}")

    def resolved_lam(self) -> Optional[float]:
        """sigma parametrization: window-sub uses lam = 1 - sigma, every
        other (supercritical) experiment lam = 1 + sigma."""
        if self.lam is not None:
            return self.lam
        if self.sigma is None:
            return None
        if self.experiment == "window-sub":
            return 1.0 - self.sigma
        return 1.0 + self.sigma

    def resolved_model(self) -> str:
        if self.model:
            return self.model
        if self.experiment in ("window-sub", "window-super", "pla-threshold-k", "model-equiv"):
            return "classical"
        return "cloning"


@dataclass
class ExperimentReport:
    experiment: str
    params: dict
    trials: int
    metrics: dict  # name -> SummaryStats
    runtime_seconds: Optional[float] = None

    def as_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "params": self.params,
            "trials": self.trials,
            "metrics": {k: v.as_dict() for k, v in sorted(self.metrics.items())},
            "runtime_seconds": self.runtime_seconds,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        lines = ["metric,count,mean,var,ci_lo,ci_hi,predicted,scale,z"]
        for name in sorted(self.metrics):
            s = self.metrics[name]
            row = [name, s.count, s.mean, s.variance, s.ci95[0], s.ci95[1],
                   s.predicted, s.scale, s.z]
            lines.append(",".join("" if x is None else repr(x) if isinstance(x, float) else str(x)
                                  for x in row))
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# per-trial pipelines (module level: picklable for process pools)

def _cloning_reduction_trial(n: int, lam: float, rng, record_trace: bool) -> dict:
    out = core_via_cola(n, lam, rng, record_trace=record_trace)
    core = out.core_formula
    ccen = census(core)
    kres = kernel(core)
    kcen = census(kres.kernel)
    m = {
        "core_vars": float(census_D(ccen, 1, 1)) if ccen else 0.0,
        "core_clauses": float(core.num_clauses),
        "kernel_vars": float(census_D(kcen, 1, 1)) if kcen else 0.0,
        "kernel_clauses": float(kres.kernel.num_clauses),
        "lambda_c": out.trace.lambda_c,
        "C_11": float(ccen.get((1, 1), 0)),
        "C_21_plus_12": float(ccen.get((2, 1), 0) + ccen.get((1, 2), 0)),
    }
    if record_trace:
        rows = trajectory(out.trace, _TRAJ_THETAS)
        sup = 0.0
        for theta, n_theta, _ in rows:
            dev = abs(n_theta - 2.0 * (1.0 - theta * theta) * lam * n)
            m[f"N_dev_{theta}"] = dev
            sup = max(sup, dev)
        m["N_dev_sup"] = sup
        m["traj_within_bound"] = 1.0 if sup <= 10.0 * math.sqrt(n) else 0.0
    return m


def _window_sub_trial(n: int, lam: float, k: int, rng) -> dict:
    formula = sample_classical(n, classical_p(n, lam, k), k, rng)
    core = pla_core(formula).core
    if core.num_clauses == 0:
        return {"kernel_nonempty": 0.0, "unsat": 0.0}
    kres = kernel(core)
    nonempty = 1.0 if kres.kernel.num_clauses else 0.0
    if kres.kernel.num_clauses:
        unsat = 0.0 if satisfiable_2sat(kres.kernel) else 1.0
    else:
        unsat = 0.0
    return {"kernel_nonempty": nonempty, "unsat": unsat}


def _window_super_trial(n: int, lam: float, k: int, rng) -> dict:
    formula = sample_classical(n, classical_p(n, lam, k), k, rng)
    return {"sat": 1.0 if satisfiable_2sat(formula) else 0.0}


def _model_equiv_trial(n: int, lam: float, k: int, rng) -> dict:
    def events(formula) -> tuple:
        core = pla_core(formula).core
        if core.num_clauses == 0:
            return 0.0, 0.0
        kres = kernel(core)
        nonempty = 1.0 if kres.kernel.num_clauses else 0.0
        unsat = 0.0
        if nonempty and not satisfiable_2sat(kres.kernel):
            unsat = 1.0
        return unsat, nonempty

    f_cl = sample_classical(n, classical_p(n, lam, k), k, rng)
    u_cl, k_cl = events(f_cl)
    f_pc = sample_poisson_cloning(n, lam, k, rng)
    standard = all(len(c) == k for c in f_pc.clauses)
    simple = standard and is_simple(f_pc)
    u_pc, k_pc = events(f_pc)
    return {
        "unsat_classical": u_cl,
        "kernel_classical": k_cl,
        "unsat_pc": u_pc,
        "kernel_pc": k_pc,
        "pc_simple": 1.0 if simple else 0.0,
        "unsat_pc_simple": u_pc if simple else 0.0,
        "kernel_pc_simple": k_pc if simple else 0.0,
    }


_SIM_LABEL_CACHE: dict = {}


def _sim_prob_trial(sim_census: tuple, rng) -> dict:
    cached = _SIM_LABEL_CACHE.get(sim_census)
    if cached is None:
        cns = {(i, j): cnt for (i, j, cnt) in sim_census}
        cached = _census_labels(cns)
        _SIM_LABEL_CACHE[sim_census] = cached
    labels, n_vars = cached
    total = labels.shape[0]
    if total & 1:
        return {"simple": 0.0}
    perm = rng.permutation(total)
    shuffled = labels[perm]
    ok = _pairs_simple(shuffled[0::2], shuffled[1::2], n_vars)
    return {"simple": 1.0 if ok else 0.0}


def _pla_threshold_trial(n: int, lam: float, k: int, rng) -> dict:
    formula = sample_classical(n, classical_p(n, lam, k), k, rng)
    res = pla_core(formula)
    core_vars = len(res.core.variables())
    return {
        "pla_success": 1.0 if res.core.num_clauses == 0 else 0.0,
        "core_vars": float(core_vars),
    }


def _random_small_formula(rng) -> MultiFormula:
    """Small instance with loops, duplicates, tautologies and units mixed in."""
    n = int(rng.integers(2, 11))
    m = int(rng.integers(0, 3 * n + 1))
    clauses = []
    for _ in range(m):
        if rng.random() < 0.12:
            v = int(rng.integers(1, n + 1))
            clauses.append((v if rng.random() < 0.5 else -v,))
            continue
        v1 = int(rng.integers(1, n + 1))
        v2 = int(rng.integers(1, n + 1))  # may repeat: loops and tautologies
        l1 = v1 if rng.random() < 0.5 else -v1
        l2 = v2 if rng.random() < 0.5 else -v2
        clauses.append((l1, l2))
        if rng.random() < 0.08:
            clauses.append((l1, l2))  # explicit duplicate
    return MultiFormula(n=n, clauses=tuple(clauses), k=2)


def _sat_oracle_trial(rng) -> dict:
    formula = _random_small_formula(rng)
    fast = decide_2sat(formula)
    slow = brute_force(formula)
    return {"agree": 1.0 if fast.satisfiable == slow.satisfiable else 0.0}


def _run_one_trial(packed) -> dict:
    (experiment, n, lam, k, seed, idx, sim_census, record_trace) = packed
    rng = stream_rng(seed, idx)
    if experiment in ("core-size", "core-census", "kernel-size", "cutoff-traj"):
        return _cloning_reduction_trial(n, lam, rng, record_trace)
    if experiment == "window-sub":
        return _window_sub_trial(n, lam, k, rng)
    if experiment == "window-super":
        return _window_super_trial(n, lam, k, rng)
    if experiment == "model-equiv":
        return _model_equiv_trial(n, lam, k, rng)
    if experiment == "sim-prob":
        return _sim_prob_trial(sim_census, rng)
    if experiment == "pla-threshold-k":
        return _pla_threshold_trial(n, lam, k, rng)
    if experiment == "sat-oracle":
        return _sat_oracle_trial(rng)
    raise ValueError(f"unknown experiment {experiment!r}")


# ---------------------------------------------------------------------------

_PROPORTION_METRICS = {
    "kernel_nonempty", "unsat", "sat", "simple", "pla_success", "agree",
    "traj_within_bound", "pc_simple", "unsat_classical", "kernel_classical",
    "unsat_pc", "kernel_pc", "unsat_pc_simple", "kernel_pc_simple",
}


def _predictions(config: ExperimentConfig) -> dict:
    """Metric -> (predicted, scale) from the theory module; every value here
    is reproducible by calling theory directly with the same parameters."""
    out = {}
    lam = config.resolved_lam()
    n = config.n
    exp = config.experiment
    if exp in ("core-size", "core-census", "kernel-size", "cutoff-traj") and lam > 1.0:
        fp = theory.theta_fixed_point(lam)
        t = fp.theta
        core = theory.predict_core(n, lam)
        kern = theory.predict_kernel(n, lam)
        c11 = theory.predict_census(n, lam, 1, 1)["C_ij"]
        c21 = theory.predict_census(n, lam, 2, 1)["C_ij"]
        out["core_vars"] = (core["core_vars"].value, core["core_vars"].scale)
        out["core_clauses"] = (core["core_clauses"].value, core["core_clauses"].scale)
        out["kernel_vars"] = (kern["kernel_vars"].value, kern["kernel_vars"].scale)
        out["kernel_clauses"] = (kern["kernel_clauses"].value, kern["kernel_clauses"].scale)
        out["C_11"] = (c11.value, c11.scale)
        out["C_21_plus_12"] = (2.0 * c21.value, c21.scale)
        out["lambda_c"] = (t * lam, lam / math.sqrt(t * n))
    if exp == "window-sub":
        probs = theory.window_sub_probs(n, config.sigma if config.sigma is not None else 1.0 - lam)
        out["kernel_nonempty"] = (probs["p_kernel_nonempty"].value, probs["p_kernel_nonempty"].scale)
        out["unsat"] = (probs["p_unsat"].value, probs["p_unsat"].scale)
    if exp == "sim-prob":
        cns = {(i, j): c for (i, j, c) in config.sim_census}
        if set(cns) == {(1, 1)} and cns[(1, 1)] >= 100:
            out["simple"] = (math.exp(-0.5), None)
    if exp == "model-equiv":
        consts = theory.equiv_constants(n, classical_p(n, lam, config.k), config.k)
        out["_c1"] = (consts["c1"], None)
        out["_c2"] = (consts["c2"], None)
    return out


def _workers_from_env() -> int:
    val = os.environ.get("SATLAB_WORKERS", "1")
    try:
        return max(1, int(val))
    except ValueError:
        return 1


def run_experiment(config: ExperimentConfig, workers: Optional[int] = None) -> ExperimentReport:
    """Run config.trials independent trials and aggregate.

    Trials are seeded (seed, trial index) and aggregated in index order, so
    the report is identical for any worker count.
    """
    lam = config.resolved_lam()
    record = config.record_trajectory or config.experiment == "cutoff-traj"
    packed = [
        (config.experiment, config.n, lam, config.k, config.seed, i,
         config.sim_census, record)
        for i in range(config.trials)
    ]
    nworkers = _workers_from_env() if workers is None else max(1, workers)
    if nworkers > 1 and config.trials > 1:
        chunk = max(1, config.trials // (nworkers * 8))
        with ProcessPoolExecutor(max_workers=nworkers) as pool:
            results = list(pool.map(_run_one_trial, packed, chunksize=chunk))
    else:
        results = [_run_one_trial(p) for p in packed]

    preds = _predictions(config)
    names = sorted({k for r in results for k in r})
    metrics = {}
    for name in names:
        vals = [r[name] for r in results if name in r]
        predicted, scale = preds.get(name, (None, None))
        metrics[name] = summarize(name, vals, predicted=predicted, scale=scale,
                                  proportion=name in _PROPORTION_METRICS)
    for name, (value, scale) in preds.items():
        if name.startswith("_"):  # constants carried along for reporting
            metrics[name] = SummaryStats(name=name, count=0, mean=value,
                                         variance=0.0, ci95=(value, value),
                                         predicted=value, scale=scale, z=None)

    if config.experiment == "window-sub":
        metrics["unsat_given_kernel"] = _conditional_metric(results)

    params = {
        "n": config.n,
        "lambda": lam,
        "sigma": config.sigma,
        "k": config.k,
        "model": config.resolved_model(),
        "seed": config.seed,
    }
    if config.sim_census is not None:
        params["census"] = {f"{i},{j}": c for (i, j, c) in config.sim_census}
    return ExperimentReport(
        experiment=config.experiment,
        params=params,
        trials=config.trials,
        metrics=metrics,
    )


def _conditional_metric(results) -> SummaryStats:
    kern = sum(int(r["kernel_nonempty"]) for r in results)
    unsat = sum(int(r["unsat"]) for r in results)
    if kern == 0:
        return SummaryStats(name="unsat_given_kernel", count=0, mean=float("nan"),
                            variance=0.0, ci95=(0.0, 1.0), predicted=1.0 / 15.0)
    ci = wilson_ci(unsat, kern)
    return SummaryStats(name="unsat_given_kernel", count=kern, mean=unsat / kern,
                        variance=0.0, ci95=ci, predicted=1.0 / 15.0, scale=None, z=None)


def window_super_slope(estimates) -> dict:
    """Least-squares slope of ln Pr[SAT] against sigma^3*n.

    ``estimates``: iterable of dicts {sigma3n, sat, trials}; each point needs
    >= 1000 trials and >= 5 SAT observations, else the fit is refused.
    """
    pts = list(estimates)
    if len(pts) < 3:
        raise ValueError("need at least 3 points to fit a slope")
    xs, ys = [], []
    for p in pts:
        if p["trials"] < 1000:
            raise ValueError("each point needs >= 1000 trials")
        if p["sat"] < 5:
            raise ValueError("insufficient SAT observations to fit")
        xs.append(float(p["sigma3n"]))
        ys.append(math.log(p["sat"] / p["trials"]))
    xbar = sum(xs) / len(xs)
    ybar = sum(ys) / len(ys)
    sxx = sum((x - xbar) ** 2 for x in xs)
    sxy = sum((x - xbar) * (y - ybar) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = ybar - slope * xbar
    resid = sum((y - (intercept + slope * x)) ** 2 for x, y in zip(xs, ys))
    dof = len(xs) - 2
    stderr = math.sqrt(resid / dof / sxx) if dof > 0 else float("nan")
    return {"slope": slope, "intercept": intercept, "stderr": stderr, "points": len(xs)}


def model_equiv_check(n: int, lam: float, trials: int, seed: int, k: int = 2,
                      workers: Optional[int] = None) -> dict:
    """Estimate UNSAT / kernel-nonempty probabilities under both models and
    check the sandwich c1 * Pr[PC in F] <= Pr[classical in F] <=
    c2 (Pr[PC in F]^(1/k) + e^-n) on simple-restricted events, with CI slack."""
    config = ExperimentConfig(experiment="model-equiv", n=n, trials=trials,
                              seed=seed, lam=lam, k=k)
    report = run_experiment(config, workers=workers)
    m = report.metrics
    c1 = m["_c1"].mean
    c2 = m["_c2"].mean
    simple_count = int(round(m["pc_simple"].mean * trials))
    out = {"report": report, "c1": c1, "c2": c2, "events": {}}
    for event in ("unsat", "kernel"):
        p_cl = m[f"{event}_classical"]
        p_pc = m[f"{event}_pc_simple"]
        lower_ok = c1 * p_pc.ci95[0] <= p_cl.ci95[1]
        upper_ok = p_cl.ci95[0] <= c2 * (p_pc.ci95[1] ** (1.0 / k) + math.exp(-n))
        # conditioned on SIMPLE the cloning model matches the classical one,
        # so the conditional probability is the like-for-like comparison
        event_count = int(round(m[f"{event}_pc_simple"].mean * trials))
        if simple_count:
            cond = event_count / simple_count
            cond_ci = wilson_ci(event_count, simple_count)
        else:
            cond, cond_ci = float("nan"), (0.0, 1.0)
        out["events"][event] = {
            "p_classical": p_cl.mean,
            "p_classical_ci": p_cl.ci95,
            "p_pc_simple": p_pc.mean,
            "p_pc_simple_ci": p_pc.ci95,
            "p_pc_raw": m[f"{event}_pc"].mean,
            "p_pc_given_simple": cond,
            "p_pc_given_simple_ci": cond_ci,
            "sandwich_lower_ok": bool(lower_ok),
            "sandwich_upper_ok": bool(upper_ok),
        }
    return out
