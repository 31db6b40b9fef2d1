"""Fixed-confidence near-optimal arm identification in infinitely-armed
bandit models: KL-LUCB over a sampled reservoir pool, sample-complexity
bound calculators, and a reproducible Monte Carlo harness."""

from .algorithm import AlgoConfig, LucbState, RunRecord, init_phase, run, run_with_state, select_pair, step
from .bounds import (
    BoundsReport,
    c0_constant,
    compare_report,
    complexity_term,
    embed_finite_instance,
    finite_lower_bound,
    lower_bound,
    lower_bound_relaxed,
    t_star,
)
from .errors import DegeneratePoolError, DomainError, PartialFormulaError, UnsupportedPartitionError
from .families import (
    ArmFamily,
    Bernoulli,
    ChernoffInfo,
    Exponential,
    GaussianKnownVariance,
    Poisson,
    binary_relative_entropy,
    parse_family,
)
from .harness import (
    ExperimentConfig,
    SummaryRow,
    TableRow,
    TABLE_ROWS,
    replicate_seed,
    reproduce_table,
    run_experiment,
    select_table_rows,
    verify_events,
)
from .reservoirs import (
    BetaReservoir,
    BucketPartition,
    DiracMixtureReservoir,
    DiscreteReservoir,
    PiecewiseLinearReservoir,
    Reservoir,
    UniformReservoir,
    parse_reservoir,
    simple_regret_bound,
)

__version__ = "0.1.0"

__all__ = [
    "AlgoConfig",
    "ArmFamily",
    "Bernoulli",
    "BetaReservoir",
    "BoundsReport",
    "BucketPartition",
    "ChernoffInfo",
    "DegeneratePoolError",
    "DiracMixtureReservoir",
    "DiscreteReservoir",
    "DomainError",
    "ExperimentConfig",
    "Exponential",
    "GaussianKnownVariance",
    "LucbState",
    "PartialFormulaError",
    "PiecewiseLinearReservoir",
    "Poisson",
    "Reservoir",
    "RunRecord",
    "SummaryRow",
    "TABLE_ROWS",
    "TableRow",
    "UniformReservoir",
    "UnsupportedPartitionError",
    "binary_relative_entropy",
    "c0_constant",
    "compare_report",
    "complexity_term",
    "embed_finite_instance",
    "finite_lower_bound",
    "init_phase",
    "lower_bound",
    "lower_bound_relaxed",
    "parse_family",
    "parse_reservoir",
    "replicate_seed",
    "reproduce_table",
    "run",
    "run_experiment",
    "run_with_state",
    "select_pair",
    "select_table_rows",
    "simple_regret_bound",
    "step",
    "t_star",
    "verify_events",
]
