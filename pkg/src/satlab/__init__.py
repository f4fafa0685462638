"""satlab: a simulation laboratory for random 2-SAT phase transitions.

Generates formulas under the classical and Poisson cloning models, runs the
cut-off line algorithm and pure-literal reductions to extract cores and
kernels, decides satisfiability, and statistically verifies closed-form
predictions for core/kernel sizes, the type census and the scaling window.
"""

from .formula import (
    MultiFormula,
    canonical_clause,
    census,
    census_D,
    census_M,
    degrees,
    is_simple,
    read_dimacs,
    write_dimacs,
)
from .gen import (
    LambdaCell,
    build_lambda_cell,
    sample_classical,
    sample_poisson_cloning,
    stream_rng,
)
from .cola import ColaOutcome, ColaTrace, core_via_cola, run_cola_core, trajectory
from .reduce import kernel, kernel_order_invariance_check, pla_core, pla_succeeds, reduction_stats
from .sat import SatVerdict, brute_force, decide_2sat, verify_assignment
from .confmodel import estimate_sim_prob, sample_configuration, sample_simple
from .experiments import (
    ExperimentConfig,
    ExperimentReport,
    model_equiv_check,
    run_experiment,
    window_super_slope,
)
from . import theory

__version__ = "0.1.0"
