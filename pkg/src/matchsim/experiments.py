"""Seeded sweeps, CSV/JSON emission, exponent fits, and comparisons.

A sweep runs one matcher over a grid of sizes with per-trial seeds
derived deterministically from a base seed, so identical configs yield
byte-identical outputs.  Fits are ordinary least squares on log-log
points, optionally dividing costs by ceil(log2 n) first to separate a
pure power law from a power law with a log factor.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .grover import DEFAULT_STATEVECTOR_CAP, NoisyOracleSpec, ResourceLimitError
from .matchers import (
    NestedConfig,
    classical_sort_scan,
    classical_two_sort_merge,
    exhaustive_pairs,
    naive_grover_pairs,
    nested_grover_match,
)
from .model import CostLedger, generate_instance

ALGORITHMS = ("exhaustive", "sort_scan", "two_sort", "naive_grover", "nested")
NOISE_PRESETS = ("none", "inv_n", "inv_sqrt_n")
SWEEP_ENGINES = ("statevector", "analytic", "auto")
STATEVECTOR_CAP_ENV = "MATCH_SIM_STATEVECTOR_CAP"

CSV_COLUMNS = (
    "algorithm",
    "n",
    "trial",
    "seed",
    "success",
    "total_cost",
    "l1_queries",
    "l2_queries",
    "mem_reads",
    "mem_writes",
    "peak_workspace",
    "predicted_success",
)


def statevector_cap_from_env() -> int:
    """Amplitude cap, overridable through MATCH_SIM_STATEVECTOR_CAP."""
    raw = os.environ.get(STATEVECTOR_CAP_ENV)
    if raw is None:
        return DEFAULT_STATEVECTOR_CAP
    try:
        cap = int(raw)
    except ValueError as err:
        raise ValueError(f"{STATEVECTOR_CAP_ENV} must be an integer, got {raw!r}") from err
    if cap < 1:
        raise ValueError(f"{STATEVECTOR_CAP_ENV} must be positive")
    return cap


def derive_seed(base_seed: int, n: int, trial: int, stream: str) -> int:
    """Stable 64-bit sub-seed for one trial's instance or run stream."""
    digest = hashlib.blake2b(
        f"{base_seed}:{n}:{trial}:{stream}".encode(), digest_size=8
    ).digest()
    return int.from_bytes(digest, "big")


def noise_spec(preset: str, n: int) -> Optional[NoisyOracleSpec]:
    """Map a preset name to a dropout spec for size n."""
    if preset == "none":
        return None
    if preset == "inv_n":
        return NoisyOracleSpec(1.0 / n)
    if preset == "inv_sqrt_n":
        return NoisyOracleSpec(1.0 / math.sqrt(n))
    raise ValueError(f"unknown noise preset {preset!r}")


@dataclass(frozen=True)
class TrialRow:
    """One CSV row of a sweep."""

    algorithm: str
    n: int
    trial: int
    seed: int
    success: int
    total_cost: int
    l1_queries: int
    l2_queries: int
    mem_reads: int
    mem_writes: int
    peak_workspace: int
    predicted_success: float

    def as_csv_row(self) -> list[str]:
        return [str(getattr(self, col)) for col in CSV_COLUMNS]


@dataclass(frozen=True)
class SweepConfig:
    """Declarative description of one sweep."""

    algorithm: str
    n_values: tuple[int, ...]
    trials_per_n: int = 1
    base_seed: int = 0
    engine: str = "auto"
    noise_preset: str = "none"
    uncompute_factor: int = 2
    output: Optional[str] = None

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        values = tuple(self.n_values)
        object.__setattr__(self, "n_values", values)
        if not values:
            raise ValueError("n_values must not be empty")
        if any(n < 2 for n in values):
            raise ValueError("all n_values must be at least 2")
        if list(values) != sorted(set(values)):
            raise ValueError("n_values must be strictly ascending")
        if self.trials_per_n < 1:
            raise ValueError("trials_per_n must be at least 1")
        if self.base_seed < 0:
            raise ValueError("base_seed must be non-negative")
        if self.engine not in SWEEP_ENGINES:
            raise ValueError(f"unknown engine {self.engine!r}")
        if self.noise_preset not in NOISE_PRESETS:
            raise ValueError(f"unknown noise preset {self.noise_preset!r}")
        if self.uncompute_factor < 1:
            raise ValueError("uncompute_factor must be at least 1")

    @classmethod
    def from_dict(cls, doc: dict) -> "SweepConfig":
        known = {
            "algorithm",
            "n_values",
            "trials_per_n",
            "base_seed",
            "engine",
            "noise_preset",
            "uncompute_factor",
            "output",
        }
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "algorithm" not in doc or "n_values" not in doc:
            raise ValueError("config requires 'algorithm' and 'n_values'")
        kwargs = dict(doc)
        kwargs["n_values"] = tuple(int(n) for n in doc["n_values"])
        return cls(**kwargs)

    @classmethod
    def from_json(cls, text: str) -> "SweepConfig":
        return cls.from_dict(json.loads(text))

    def as_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "n_values": list(self.n_values),
            "trials_per_n": self.trials_per_n,
            "base_seed": self.base_seed,
            "engine": self.engine,
            "noise_preset": self.noise_preset,
            "uncompute_factor": self.uncompute_factor,
            "output": self.output,
        }


def geometric_mean(values: Sequence[float]) -> float:
    if not values:
        raise ValueError("geometric mean of no values")
    return math.exp(sum(math.log(v) for v in values) / len(values))


@dataclass(frozen=True)
class FitResult:
    """OLS slope of log cost against log n."""

    slope: float
    stderr: float
    intercept: float
    n_points: int
    log_normalized: bool

    def as_dict(self) -> dict:
        return {
            "slope": self.slope,
            "stderr": self.stderr,
            "intercept": self.intercept,
            "n_points": self.n_points,
            "log_normalized": self.log_normalized,
        }


def fit_exponent(
    points: Sequence[tuple[int, float]], log_normalize: bool = False
) -> FitResult:
    """Fit cost ~ n^slope (optionally cost / ceil(log2 n) ~ n^slope).

    Needs at least 3 distinct sizes.  stderr is the usual OLS standard
    error of the slope; an exact power law fits with stderr ~ 0.
    """
    if len({n for n, _ in points}) < 3:
        raise ValueError("exponent fit needs at least 3 distinct sizes")
    xs, ys = [], []
    for n, cost in points:
        if n < 2 or cost <= 0:
            raise ValueError("fit points need n >= 2 and positive cost")
        norm = math.ceil(math.log2(n)) if log_normalize else 1
        xs.append(math.log(n))
        ys.append(math.log(cost / norm))
    m = len(xs)
    mean_x = sum(xs) / m
    mean_y = sum(ys) / m
    sxx = sum((x - mean_x) ** 2 for x in xs)
    sxy = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = mean_y - slope * mean_x
    ssr = sum((y - (intercept + slope * x)) ** 2 for x, y in zip(xs, ys))
    stderr = math.sqrt(max(ssr, 0.0) / (m - 2) / sxx) if m > 2 else 0.0
    return FitResult(
        slope=slope,
        stderr=stderr,
        intercept=intercept,
        n_points=m,
        log_normalized=log_normalize,
    )


def _run_trial(config: SweepConfig, n: int, trial: int, cap: int) -> TrialRow:
    instance_seed = derive_seed(config.base_seed, n, trial, "instance")
    run_seed = derive_seed(config.base_seed, n, trial, "run")
    instance = generate_instance(n, instance_seed)
    ledger = CostLedger()
    if config.algorithm == "exhaustive":
        report = exhaustive_pairs(instance, ledger)
    elif config.algorithm == "sort_scan":
        report = classical_sort_scan(instance, ledger)
    elif config.algorithm == "two_sort":
        report = classical_two_sort_merge(instance, ledger)
    else:
        run_config = NestedConfig(
            engine=config.engine,
            uncompute_factor=config.uncompute_factor,
            noise=noise_spec(config.noise_preset, n),
            rng_seed=run_seed,
        )
        if config.algorithm == "naive_grover":
            report = naive_grover_pairs(instance, run_config, ledger, statevector_cap=cap)
        else:
            report = nested_grover_match(instance, run_config, ledger, statevector_cap=cap)
    return TrialRow(
        algorithm=config.algorithm,
        n=n,
        trial=trial,
        seed=instance_seed,
        success=int(report.correct),
        total_cost=ledger.total_cost(),
        l1_queries=ledger.l1_queries,
        l2_queries=ledger.l2_queries,
        mem_reads=ledger.mem_reads,
        mem_writes=ledger.mem_writes,
        peak_workspace=ledger.peak_workspace,
        predicted_success=report.predicted_success,
    )


@dataclass
class SweepResult:
    """All rows of a finished sweep plus derived aggregates."""

    config: SweepConfig
    rows: list[TrialRow]

    def rows_for(self, n: int) -> list[TrialRow]:
        return [r for r in self.rows if r.n == n]

    def geomean_cost(self, n: int) -> float:
        return geometric_mean([r.total_cost for r in self.rows_for(n)])

    def aggregate(self) -> dict:
        per_n = []
        for n in self.config.n_values:
            rows = self.rows_for(n)
            per_n.append(
                {
                    "n": n,
                    "trials": len(rows),
                    "geomean_cost": geometric_mean([r.total_cost for r in rows]),
                    "success_rate": sum(r.success for r in rows) / len(rows),
                    "mean_predicted_success": sum(r.predicted_success for r in rows)
                    / len(rows),
                    "max_peak_workspace": max(r.peak_workspace for r in rows),
                }
            )
        doc: dict = {"algorithm": self.config.algorithm, "per_n": per_n}
        if len(self.config.n_values) >= 3:
            points = [(entry["n"], entry["geomean_cost"]) for entry in per_n]
            doc["fit"] = fit_exponent(points, log_normalize=False).as_dict()
            doc["fit_log_normalized"] = fit_exponent(points, log_normalize=True).as_dict()
        else:
            doc["fit"] = None
            doc["fit_log_normalized"] = None
        return doc

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows:
            writer.writerow(row.as_csv_row())
        return buf.getvalue()

    def to_json_text(self) -> str:
        doc = {"config": self.config.as_dict(), "aggregate": self.aggregate()}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def write_outputs(self, csv_path: str | Path) -> tuple[Path, Path]:
        """Write rows as CSV and aggregates as JSON next to it."""
        csv_path = Path(csv_path)
        json_path = csv_path.with_suffix(".json")
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        csv_path.write_text(self.to_csv_text(), encoding="utf-8")
        json_path.write_text(self.to_json_text(), encoding="utf-8")
        return csv_path, json_path


def run_sweep(config: SweepConfig, *, statevector_cap: Optional[int] = None) -> SweepResult:
    """Run every (n, trial) cell of the sweep deterministically."""
    cap = statevector_cap if statevector_cap is not None else statevector_cap_from_env()
    rows: list[TrialRow] = []
    for n in config.n_values:
        for trial in range(config.trials_per_n):
            try:
                rows.append(_run_trial(config, n, trial, cap))
            except ResourceLimitError as err:
                raise ResourceLimitError(f"n={n}, trial={trial}: {err}") from err
    result = SweepResult(config=config, rows=rows)
    if config.output is not None:
        result.write_outputs(config.output)
    return result


def load_rows(csv_path: str | Path) -> list[TrialRow]:
    """Read sweep rows back from a CSV file."""
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != CSV_COLUMNS:
            raise ValueError(f"{csv_path}: unexpected CSV header")
        rows = []
        for rec in reader:
            rows.append(
                TrialRow(
                    algorithm=rec["algorithm"],
                    n=int(rec["n"]),
                    trial=int(rec["trial"]),
                    seed=int(rec["seed"]),
                    success=int(rec["success"]),
                    total_cost=int(rec["total_cost"]),
                    l1_queries=int(rec["l1_queries"]),
                    l2_queries=int(rec["l2_queries"]),
                    mem_reads=int(rec["mem_reads"]),
                    mem_writes=int(rec["mem_writes"]),
                    peak_workspace=int(rec["peak_workspace"]),
                    predicted_success=float(rec["predicted_success"]),
                )
            )
    return rows


def result_from_rows(rows: Sequence[TrialRow]) -> SweepResult:
    """Rebuild a minimal SweepResult from loaded rows (one algorithm)."""
    if not rows:
        raise ValueError("no rows to rebuild a sweep from")
    algorithms = {r.algorithm for r in rows}
    if len(algorithms) != 1:
        raise ValueError(f"rows mix algorithms: {sorted(algorithms)}")
    n_values = tuple(sorted({r.n for r in rows}))
    trials = max(r.trial for r in rows) + 1
    config = SweepConfig(
        algorithm=rows[0].algorithm, n_values=n_values, trials_per_n=trials
    )
    return SweepResult(config=config, rows=list(rows))


@dataclass(frozen=True)
class CompareTable:
    """Side-by-side geometric-mean costs for several sweeps."""

    n_values: tuple[int, ...]
    labels: tuple[str, ...]
    costs: dict[str, dict[int, float]]
    crossover_n: Optional[int]

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", *self.labels])
        for n in self.n_values:
            writer.writerow([n, *(repr(self.costs[label][n]) for label in self.labels)])
        return buf.getvalue()

    def to_text(self) -> str:
        lines = []
        header = ["n"] + [f"{label:>16}" for label in self.labels]
        lines.append("  ".join([f"{'n':>8}"] + header[1:]))
        for n in self.n_values:
            cells = [f"{n:>8}"]
            for label in self.labels:
                cells.append(f"{self.costs[label][n]:>16.1f}")
            lines.append("  ".join(cells))
        if self.crossover_n is not None:
            lines.append(f"nested beats sort_scan from n={self.crossover_n}")
        elif "nested" in self.labels and "sort_scan" in self.labels:
            lines.append("nested never beats sort_scan in this range")
        return "\n".join(lines) + "\n"


def compare_report(results: Sequence[SweepResult]) -> CompareTable:
    """Align several sweeps over identical n grids for comparison.

    Raises ValueError unless at least two results share the exact same
    n_values.  When both a sort_scan and a nested sweep are present,
    reports the smallest n where nested is cheaper.
    """
    if len(results) < 2:
        raise ValueError("comparison needs at least two sweeps")
    n_values = results[0].config.n_values
    for res in results[1:]:
        if res.config.n_values != n_values:
            raise ValueError(
                f"sweeps cover different sizes: {res.config.n_values} vs {n_values}"
            )
    labels: list[str] = []
    costs: dict[str, dict[int, float]] = {}
    for res in results:
        label = res.config.algorithm
        if label in costs:
            suffix = 2
            while f"{label}#{suffix}" in costs:
                suffix += 1
            label = f"{label}#{suffix}"
        labels.append(label)
        costs[label] = {n: res.geomean_cost(n) for n in n_values}
    crossover = None
    if "nested" in costs and "sort_scan" in costs:
        for n in n_values:
            if costs["nested"][n] < costs["sort_scan"][n]:
                crossover = n
                break
    return CompareTable(
        n_values=n_values,
        labels=tuple(labels),
        costs=costs,
        crossover_n=crossover,
    )
