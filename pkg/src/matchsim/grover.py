"""Amplitude-amplification engines over an abstract index space.

Three interchangeable engines run the same iteration: a real-valued
statevector simulation (phase flip on marked indices, then inversion
about the mean), a closed-form engine that samples the known outcome
distribution without touching amplitudes, and a noisy variant of the
statevector engine in which each round's oracle independently fails to
mark anything.  Oracle evaluations are charged to a cost ledger through
a caller-supplied charge function, multiplied by an uncompute factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .model import CostLedger

DEFAULT_STATEVECTOR_CAP = 1 << 20

ENGINES = ("statevector", "analytic", "auto")


class ResourceLimitError(RuntimeError):
    """Raised when a statevector run would exceed the amplitude cap."""


class ScheduleUndefinedError(ValueError):
    """Raised when asked for an iteration count with zero marked elements."""


@dataclass(frozen=True)
class NoisyOracleSpec:
    """Per-round oracle dropout: with this probability a round marks nothing."""

    failure_prob: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.failure_prob <= 1.0:
            raise ValueError("failure_prob must lie in [0, 1]")


@dataclass(frozen=True)
class Oracle:
    """Membership test over the index space plus its query-cost charge.

    ``predicate`` answers whether an index is marked and is free to call;
    ``charge_fn(ledger, times)`` records the ledger cost of ``times``
    oracle evaluations.  ``marked_indices``, when supplied, lets engines
    avoid sweeping the predicate over the whole space.
    """

    predicate: Callable[[int], bool]
    charge_fn: Optional[Callable[[CostLedger, int], None]] = None
    marked_indices: Optional[tuple[int, ...]] = None

    def charge(self, ledger: Optional[CostLedger], times: int) -> None:
        if ledger is not None and self.charge_fn is not None and times > 0:
            self.charge_fn(ledger, times)


@dataclass(frozen=True)
class GroverProblem:
    """A search space of ``space_size`` indices with ``marked_count`` marked."""

    space_size: int
    marked_count: int
    oracle: Oracle
    uncompute_factor: int = 1

    def __post_init__(self) -> None:
        if self.space_size < 1:
            raise ValueError("space_size must be at least 1")
        if not 0 <= self.marked_count <= self.space_size:
            raise ValueError("marked_count must lie in [0, space_size]")
        if self.uncompute_factor < 1:
            raise ValueError("uncompute_factor must be at least 1")


@dataclass(frozen=True)
class GroverOutcome:
    """Measured index, its post-measurement check, and the marked mass."""

    measured_index: int
    verified: bool
    iterations_used: int
    predicted_success: float


def _angle(space_size: int, marked_count: int) -> float:
    return math.asin(math.sqrt(marked_count / space_size))


def success_probability(space_size: int, marked_count: int, iterations: int) -> float:
    """Probability of measuring a marked index after ``iterations`` rounds.

    Equals sin^2((2r + 1) * asin(sqrt(k / M))); with r = 0 this is the
    bare sampling probability k / M.
    """
    if space_size < 1:
        raise ValueError("space_size must be at least 1")
    if not 0 <= marked_count <= space_size:
        raise ValueError("marked_count must lie in [0, space_size]")
    if iterations < 0:
        raise ValueError("iterations must be non-negative")
    if marked_count == 0:
        return 0.0
    theta = _angle(space_size, marked_count)
    return math.sin((2 * iterations + 1) * theta) ** 2


def iteration_schedule(space_size: int, marked_count: int) -> int:
    """Iteration count minimizing the distance of (2r+1)*theta from pi/2.

    Ties break toward the smaller count.  At the returned count the
    failure probability is at most marked_count / space_size.
    """
    if space_size < 1:
        raise ValueError("space_size must be at least 1")
    if marked_count == 0:
        raise ScheduleUndefinedError("iteration schedule undefined with no marked elements")
    if not 0 < marked_count <= space_size:
        raise ValueError("marked_count must lie in [0, space_size]")
    theta = _angle(space_size, marked_count)
    # exact for k = M (theta = pi/2): any r works, r = 0 is minimal
    target = (math.pi / (2.0 * theta) - 1.0) / 2.0
    lo = max(0, math.floor(target))
    best = lo
    best_err = abs((2 * lo + 1) * theta - math.pi / 2.0)
    for r in (lo + 1,):
        err = abs((2 * r + 1) * theta - math.pi / 2.0)
        if err < best_err - 1e-15:
            best, best_err = r, err
    return best


def textbook_iteration_count(space_size: int, marked_count: int) -> int:
    """The usual floor((pi / 4) * sqrt(M / k)) round count."""
    if space_size < 1:
        raise ValueError("space_size must be at least 1")
    if marked_count == 0:
        raise ScheduleUndefinedError("iteration count undefined with no marked elements")
    if not 0 < marked_count <= space_size:
        raise ValueError("marked_count must lie in [0, space_size]")
    return math.floor((math.pi / 4.0) * math.sqrt(space_size / marked_count))


def choose_engine(engine: str, space_size: int, cap: int = DEFAULT_STATEVECTOR_CAP) -> str:
    """Resolve an engine name, mapping ``auto`` by the amplitude cap."""
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}")
    if engine == "auto":
        return "statevector" if space_size <= cap else "analytic"
    return engine


def _marked_mask(problem: GroverProblem) -> np.ndarray:
    mask = np.zeros(problem.space_size, dtype=bool)
    if problem.oracle.marked_indices is not None:
        for idx in problem.oracle.marked_indices:
            if not 0 <= idx < problem.space_size:
                raise ValueError("marked index out of range")
            mask[idx] = True
    else:
        pred = problem.oracle.predicate
        for i in range(problem.space_size):
            if pred(i):
                mask[i] = True
    if int(mask.sum()) != problem.marked_count:
        raise ValueError("oracle marks a different number of indices than marked_count")
    return mask


def statevector_amplitudes(
    problem: GroverProblem,
    iterations: int,
    fire_pattern: Optional[tuple[bool, ...]] = None,
) -> np.ndarray:
    """Amplitudes after the given rounds, with no sampling or charging.

    ``fire_pattern`` selects which rounds apply the phase flip; rounds
    beyond its length (or all rounds when it is None) always fire.  The
    inversion about the mean runs every round regardless.
    """
    m = problem.space_size
    amps = np.full(m, 1.0 / math.sqrt(m))
    mask = _marked_mask(problem)
    for t in range(iterations):
        fires = fire_pattern[t] if fire_pattern is not None and t < len(fire_pattern) else True
        if fires:
            amps[mask] = -amps[mask]
        amps = 2.0 * amps.mean() - amps
    return amps


def _sample_index(amps: np.ndarray, rng: np.random.Generator) -> int:
    probs = amps * amps
    cum = np.cumsum(probs)
    draw = rng.random() * cum[-1]
    idx = int(np.searchsorted(cum, draw, side="right"))
    return min(idx, len(amps) - 1)


def _statevector_run(
    problem: GroverProblem,
    iterations: int,
    rng: np.random.Generator,
    ledger: Optional[CostLedger],
    failure_prob: float,
    cap: int,
    charge_verification: bool,
) -> GroverOutcome:
    m = problem.space_size
    if m > cap:
        raise ResourceLimitError(
            f"statevector space of {m} amplitudes exceeds the cap of {cap}"
        )
    if iterations < 0:
        raise ValueError("iterations must be non-negative")
    amps = np.full(m, 1.0 / math.sqrt(m))
    mask = _marked_mask(problem)
    for _ in range(iterations):
        problem.oracle.charge(ledger, problem.uncompute_factor)
        fires = True
        if failure_prob > 0.0 and rng.random() < failure_prob:
            fires = False
        if fires:
            amps[mask] = -amps[mask]
        amps = 2.0 * amps.mean() - amps
    marked_mass = float(np.sum(amps[mask] * amps[mask]))
    measured = _sample_index(amps, rng)
    verified = bool(problem.oracle.predicate(measured))
    if charge_verification:
        problem.oracle.charge(ledger, 1)
    return GroverOutcome(
        measured_index=measured,
        verified=verified,
        iterations_used=iterations,
        predicted_success=marked_mass,
    )


def run_statevector(
    problem: GroverProblem,
    iterations: int,
    rng: np.random.Generator,
    ledger: Optional[CostLedger] = None,
    *,
    cap: int = DEFAULT_STATEVECTOR_CAP,
    charge_verification: bool = False,
) -> GroverOutcome:
    """Run the exact statevector engine and sample one measurement."""
    return _statevector_run(
        problem, iterations, rng, ledger, 0.0, cap, charge_verification
    )


def run_noisy_outer(
    problem: GroverProblem,
    iterations: int,
    noise: NoisyOracleSpec,
    rng: np.random.Generator,
    ledger: Optional[CostLedger] = None,
    *,
    cap: int = DEFAULT_STATEVECTOR_CAP,
    charge_verification: bool = False,
) -> GroverOutcome:
    """Statevector run where each round's phase flip may independently drop.

    A dropped round still charges the oracle (the work happens, the
    marking fails) and still applies the inversion about the mean.  The
    reported predicted_success is the marked mass realized under the
    sampled dropout pattern.
    """
    return _statevector_run(
        problem, iterations, rng, ledger, noise.failure_prob, cap, charge_verification
    )


def run_analytic(
    problem: GroverProblem,
    iterations: int,
    rng: np.random.Generator,
    ledger: Optional[CostLedger] = None,
    *,
    charge_verification: bool = False,
) -> GroverOutcome:
    """Sample the closed-form outcome distribution without amplitudes.

    Charges the same oracle evaluations as the statevector engine and
    draws marked with probability sin^2((2r + 1) * theta), so the two
    engines are exchangeable wherever the noiseless model applies.
    """
    if iterations < 0:
        raise ValueError("iterations must be non-negative")
    m, k = problem.space_size, problem.marked_count
    p = success_probability(m, k, iterations)
    problem.oracle.charge(ledger, iterations * problem.uncompute_factor)
    marked = problem.oracle.marked_indices
    hit = k > 0 and (k == m or rng.random() < p)
    if hit:
        if marked is not None:
            measured = marked[int(rng.integers(len(marked)))] if len(marked) > 1 else marked[0]
        else:
            measured = _draw_by_predicate(problem, rng, want_marked=True)
    else:
        if marked is not None and k > 0:
            marked_set = set(marked)
            while True:
                measured = int(rng.integers(m))
                if measured not in marked_set:
                    break
        elif k == 0:
            measured = int(rng.integers(m))
        else:
            measured = _draw_by_predicate(problem, rng, want_marked=False)
    verified = bool(problem.oracle.predicate(measured))
    if charge_verification:
        problem.oracle.charge(ledger, 1)
    return GroverOutcome(
        measured_index=measured,
        verified=verified,
        iterations_used=iterations,
        predicted_success=p,
    )


def _draw_by_predicate(
    problem: GroverProblem, rng: np.random.Generator, want_marked: bool
) -> int:
    # rejection sampling against the predicate; fine for the sparse cases
    # (k << M when marked, k > 0 rare misses when unmarked) this serves
    pred = problem.oracle.predicate
    while True:
        idx = int(rng.integers(problem.space_size))
        if bool(pred(idx)) == want_marked:
            return idx
