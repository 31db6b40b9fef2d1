"""Seeded Monte Carlo experiment runner.

Replicate ``i`` of an experiment draws its stream seed from the master seed
through the fixed 64-bit mixer (``_core.child_seed``), so results do not
depend on scheduling: serial and parallel execution produce byte-identical
output.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import _core
from .algorithm import AlgoConfig, RunRecord, run
from .errors import DomainError
from .families import parse_family
from .reservoirs import parse_reservoir

CSV_HEADER = "seed,tau,recommended_mean,simple_regret,success,event_A,event_B,budget_exhausted"


@dataclass(frozen=True)
class ExperimentConfig:
    reservoir: str
    family: str
    alpha: float
    epsilon: float
    delta: float
    gamma: float = 1.2
    k1: float = 12.5
    runs: int = 100
    master_seed: int = 0
    max_samples: int = 10_000_000
    output_format: str = "csv"
    jobs: int = 1

    def __post_init__(self):
        if self.runs < 1:
            raise DomainError(f"runs={self.runs} must be at least 1")
        if self.jobs < 1:
            raise DomainError(f"jobs={self.jobs} must be at least 1")
        if self.output_format not in ("csv", "json"):
            raise DomainError(f"output format must be csv or json, got {self.output_format!r}")
        parse_reservoir(self.reservoir)
        parse_family(self.family)
        self.algo_config()  # validates the probability fields

    def algo_config(self) -> AlgoConfig:
        return AlgoConfig(
            alpha=self.alpha,
            epsilon=self.epsilon,
            delta=self.delta,
            gamma=self.gamma,
            k1=self.k1,
            max_samples=self.max_samples,
        )


@dataclass(frozen=True)
class SummaryRow:
    """Aggregate of one experiment, mirroring the empirical table columns."""

    reservoir: str
    family: str
    alpha: float
    epsilon: float
    delta: float
    runs: int
    master_seed: int
    effective_alpha: float
    error_rate: float
    mean_regret: float
    mean_budget: float
    budget_exhausted_runs: int

    def to_dict(self) -> dict:
        return asdict(self)


def replicate_seed(master_seed: int, index: int) -> int:
    """Stream seed of replicate ``index`` (fixed splitmix64 mixer)."""
    return int(_core.child_seed(master_seed, index))


def _run_one(args) -> RunRecord:
    reservoir, family, acfg_fields, seed = args
    res = parse_reservoir(reservoir)
    fam = parse_family(family)
    return run(AlgoConfig(**acfg_fields), res, fam, seed)


def run_experiment(cfg: ExperimentConfig) -> tuple[SummaryRow, list[RunRecord]]:
    """Execute ``cfg.runs`` independent replicates and aggregate them.

    Aggregation uses only sums and counts, so it is independent of
    replicate ordering.
    """
    acfg_fields = asdict(cfg.algo_config())
    tasks = [
        (cfg.reservoir, cfg.family, acfg_fields, replicate_seed(cfg.master_seed, i))
        for i in range(cfg.runs)
    ]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            records = list(pool.map(_run_one, tasks, chunksize=max(1, cfg.runs // (4 * cfg.jobs))))
    else:
        records = [_run_one(t) for t in tasks]
    return summarize(cfg, records), records


def summarize(cfg: ExperimentConfig, records: list[RunRecord]) -> SummaryRow:
    res = parse_reservoir(cfg.reservoir)
    exhausted = sum(r.budget_exhausted for r in records)
    # a run that hit the budget cap counts as an error even if its final
    # recommendation happened to be good
    errors = sum((not r.success) or r.budget_exhausted for r in records)
    return SummaryRow(
        reservoir=cfg.reservoir,
        family=cfg.family,
        alpha=cfg.alpha,
        epsilon=cfg.epsilon,
        delta=cfg.delta,
        runs=cfg.runs,
        master_seed=cfg.master_seed,
        effective_alpha=res.effective_alpha(cfg.alpha, cfg.epsilon),
        error_rate=errors / len(records),
        mean_regret=float(np.mean([r.simple_regret for r in records])),
        mean_budget=float(np.mean([r.tau for r in records])),
        budget_exhausted_runs=int(exhausted),
    )


# --- published empirical table -------------------------------------------

TABLE_CAP = 0.95  # Beta reservoirs are conditioned on (0, 0.95]


@dataclass(frozen=True)
class TableRow:
    """One published configuration with its reported statistics."""

    beta_a: int
    beta_b: int
    alpha: float
    epsilon: float
    delta: float
    effective_alpha: float
    errors: float
    simple_regret: float
    mean_budget: float

    @property
    def label(self) -> str:
        return f"Beta({self.beta_a},{self.beta_b})"

    @property
    def reservoir_spec(self) -> str:
        return f"beta:{self.beta_a},{self.beta_b},{TABLE_CAP}"


TABLE_ROWS: tuple[TableRow, ...] = (
    TableRow(1, 1, 0.025, 0.024, 0.05, 0.049, 0.00, 0.008, 51_000),
    TableRow(1, 1, 0.025, 0.024, 0.10, 0.049, 0.01, 0.011, 46_000),
    TableRow(1, 1, 0.050, 0.010, 0.05, 0.060, 0.02, 0.015, 113_000),
    TableRow(1, 1, 0.050, 0.010, 0.10, 0.060, 0.06, 0.020, 90_000),
    TableRow(1, 1, 0.050, 0.048, 0.05, 0.098, 0.00, 0.014, 12_000),
    TableRow(1, 1, 0.050, 0.048, 0.10, 0.098, 0.00, 0.017, 10_000),
    TableRow(1, 1, 0.050, 0.050, 0.05, 0.100, 0.01, 0.014, 11_000),
    TableRow(1, 1, 0.050, 0.050, 0.10, 0.100, 0.00, 0.022, 10_000),
    TableRow(1, 1, 0.100, 0.010, 0.05, 0.110, 0.02, 0.030, 71_000),
    TableRow(1, 1, 0.100, 0.010, 0.10, 0.110, 0.06, 0.044, 69_000),
    TableRow(1, 1, 0.100, 0.050, 0.05, 0.150, 0.00, 0.037, 10_000),
    TableRow(1, 1, 0.100, 0.050, 0.10, 0.150, 0.00, 0.033, 7_000),
    TableRow(1, 2, 0.025, 0.063, 0.05, 0.221, 0.00, 0.044, 10_000),
    TableRow(1, 2, 0.025, 0.063, 0.10, 0.221, 0.01, 0.061, 10_000),
    TableRow(1, 2, 0.050, 0.010, 0.05, 0.234, 0.03, 0.075, 79_000),
    TableRow(1, 2, 0.050, 0.010, 0.10, 0.234, 0.10, 0.093, 65_000),
    TableRow(1, 2, 0.050, 0.050, 0.05, 0.274, 0.01, 0.069, 10_000),
    TableRow(1, 2, 0.050, 0.050, 0.10, 0.274, 0.03, 0.094, 11_000),
    TableRow(1, 2, 0.050, 0.091, 0.05, 0.314, 0.01, 0.077, 5_000),
    TableRow(1, 2, 0.050, 0.091, 0.10, 0.314, 0.00, 0.091, 5_000),
    TableRow(1, 2, 0.100, 0.010, 0.05, 0.326, 0.04, 0.123, 63_000),
    TableRow(1, 2, 0.100, 0.010, 0.10, 0.326, 0.06, 0.136, 60_000),
    TableRow(1, 2, 0.100, 0.050, 0.05, 0.366, 0.00, 0.113, 10_000),
    TableRow(1, 2, 0.100, 0.050, 0.10, 0.366, 0.05, 0.139, 10_000),
    TableRow(1, 3, 0.025, 0.076, 0.05, 0.368, 0.00, 0.132, 12_000),
    TableRow(1, 3, 0.025, 0.076, 0.10, 0.368, 0.00, 0.142, 10_000),
    TableRow(1, 3, 0.050, 0.010, 0.05, 0.378, 0.01, 0.176, 87_000),
    TableRow(1, 3, 0.050, 0.010, 0.10, 0.378, 0.10, 0.195, 82_000),
    TableRow(1, 3, 0.050, 0.050, 0.05, 0.418, 0.00, 0.166, 13_000),
    TableRow(1, 3, 0.050, 0.050, 0.10, 0.418, 0.06, 0.216, 14_000),
    TableRow(1, 3, 0.050, 0.096, 0.05, 0.464, 0.00, 0.183, 7_000),
    TableRow(1, 3, 0.050, 0.096, 0.10, 0.464, 0.00, 0.196, 6_000),
    TableRow(1, 3, 0.100, 0.010, 0.05, 0.474, 0.06, 0.233, 69_000),
    TableRow(1, 3, 0.100, 0.010, 0.10, 0.474, 0.06, 0.251, 53_000),
    TableRow(1, 3, 0.100, 0.050, 0.05, 0.514, 0.01, 0.220, 10_000),
    TableRow(1, 3, 0.100, 0.050, 0.10, 0.514, 0.03, 0.241, 10_000),
)


def select_table_rows(row_filter: str | None = None) -> list[TableRow]:
    if row_filter is None:
        return list(TABLE_ROWS)
    needle = row_filter.strip().lower()
    return [r for r in TABLE_ROWS if needle in r.label.lower()]


def reproduce_table(
    row_filter: str | None = None,
    runs: int = 100,
    master_seed: int = 0,
    jobs: int = 1,
    max_samples: int = 10_000_000,
) -> list[SummaryRow]:
    """Re-run the published configurations (optionally filtered by reservoir
    label, e.g. ``"Beta(1,1)"``) and return one summary per row, in table
    order."""
    out = []
    for row in select_table_rows(row_filter):
        cfg = ExperimentConfig(
            reservoir=row.reservoir_spec,
            family="bernoulli",
            alpha=row.alpha,
            epsilon=row.epsilon,
            delta=row.delta,
            runs=runs,
            master_seed=master_seed,
            max_samples=max_samples,
            jobs=jobs,
        )
        summary, _ = run_experiment(cfg)
        out.append(summary)
    return out


# --- event-probability checks ---------------------------------------------


def verify_events(cfg: ExperimentConfig, trials: int, run_trials: int = 0) -> dict:
    """Monte Carlo checks of the correctness events.

    * event A (some queried arm is in the top-alpha fraction): failure
      probability is compared against delta/2 and the closed-form oracle
      (1-alpha)^n;
    * event C (every bucket holds at most 6*log(1/delta) queried arms):
      failure probability compared against delta, under the hypothesis
      delta <= alpha <= 1/3 (skipped with a notice otherwise);
    * event B (the pool leader is identified to within epsilon): checked
      over ``run_trials`` full runs when requested.
    """
    res = parse_reservoir(cfg.reservoir)
    acfg = cfg.algo_config()
    n = acfg.init_pool_size()
    rng = np.random.default_rng(replicate_seed(cfg.master_seed, 0))
    means = np.asarray(res.draw_mean(rng, trials * n)).reshape(trials, n)
    top_quantile = float(res.quantile(1.0 - cfg.alpha))
    a_fail = np.mean(~np.any(means > top_quantile, axis=1))
    sigma_a = math.sqrt(max(a_fail * (1 - a_fail), 1e-12) / trials)
    report = {
        "trials": int(trials),
        "n": int(n),
        "alpha": cfg.alpha,
        "delta": cfg.delta,
        "event_a": {
            "p_fail": float(a_fail),
            "oracle": (1.0 - cfg.alpha) ** n if not res.atomic else None,
            "bound": cfg.delta / 2.0,
            "sigma": sigma_a,
            "ok": bool(a_fail <= cfg.delta / 2.0 + 3.0 * sigma_a),
        },
    }

    if not (cfg.delta <= cfg.alpha <= 1.0 / 3.0):
        report["event_c"] = {
            "skipped": f"requires delta <= alpha <= 1/3, got alpha={cfg.alpha}, delta={cfg.delta}"
        }
    elif res.atomic:
        report["event_c"] = {"skipped": "bucket occupancy undefined for atomic reservoirs"}
    else:
        part = res.buckets(cfg.alpha)
        ascending = np.asarray(part.boundaries[::-1])
        cap = 6.0 * math.log(1.0 / cfg.delta)
        # bucket of x is (b_i, b_{i-1}]; searchsorted on the ascending
        # boundaries with side='left' buckets half-open intervals the same way
        idx = np.searchsorted(ascending, means, side="left")
        c_fails = 0
        for row_idx in idx:
            counts = np.bincount(row_idx, minlength=len(ascending) + 1)
            if np.max(counts) > cap:
                c_fails += 1
        c_fail = c_fails / trials
        sigma_c = math.sqrt(max(c_fail * (1 - c_fail), 1e-12) / trials)
        report["event_c"] = {
            "p_fail": float(c_fail),
            "occupancy_cap": cap,
            "bound": cfg.delta,
            "sigma": sigma_c,
            "ok": bool(c_fail <= cfg.delta + 3.0 * sigma_c),
        }

    if run_trials > 0:
        sub = replace(cfg, runs=run_trials)
        _, records = run_experiment(sub)
        b_fail = np.mean([not r.event_b for r in records])
        sigma_b = math.sqrt(max(b_fail * (1 - b_fail), 1e-12) / run_trials)
        report["event_b"] = {
            "trials": int(run_trials),
            "p_fail": float(b_fail),
            "bound": cfg.delta / 2.0,
            "sigma": sigma_b,
            "ok": bool(b_fail <= cfg.delta / 2.0 + 3.0 * sigma_b),
        }
    return report


# --- serialization ----------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".6g")
    text = str(value)
    if "," in text:
        return '"' + text.replace('"', '""') + '"'
    return text


def records_to_csv(records: list[RunRecord]) -> str:
    """Run records as CSV text (LF line endings, 6 significant digits)."""
    lines = [CSV_HEADER]
    for r in records:
        lines.append(
            ",".join(
                _fmt(v)
                for v in (
                    r.seed,
                    r.tau,
                    r.recommended_mean,
                    r.simple_regret,
                    r.success,
                    r.event_a,
                    r.event_b,
                    r.budget_exhausted,
                )
            )
        )
    return "\n".join(lines) + "\n"


def summaries_to_csv(rows: list[SummaryRow]) -> str:
    header = (
        "reservoir,alpha,epsilon,delta,effective_alpha,error_rate,"
        "mean_regret,mean_budget,budget_exhausted_runs"
    )
    lines = [header]
    for s in rows:
        lines.append(
            ",".join(
                _fmt(v)
                for v in (
                    s.reservoir,
                    s.alpha,
                    s.epsilon,
                    s.delta,
                    s.effective_alpha,
                    s.error_rate,
                    s.mean_regret,
                    s.mean_budget,
                    s.budget_exhausted_runs,
                )
            )
        )
    return "\n".join(lines) + "\n"


def experiment_to_json(cfg: ExperimentConfig, summary: SummaryRow, records: list[RunRecord]) -> str:
    payload = {
        "config": asdict(cfg),
        "summary": summary.to_dict(),
        "records": [asdict(r) for r in records],
    }
    return json.dumps(payload, indent=2) + "\n"
