"""Matching strategies over a two-list instance, classical and amplified.

All strategies answer the same question (where is the one shared value?)
against the same cost model, so their ledgers are directly comparable:

- exhaustive_pairs: probe every pair.
- classical_sort_scan: sort list1, probe every list2 value against it.
- classical_two_sort_merge: sort both lists, walk them in step.
- naive_grover_pairs: single amplified search over the N^2 pair space.
- nested_grover_match: amplified search over sqrt(N) blocks of list1
  whose oracle internally runs an amplified membership search over
  list2, then a final sort-and-verify pass on the measured block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .grover import (
    DEFAULT_STATEVECTOR_CAP,
    ENGINES,
    GroverProblem,
    NoisyOracleSpec,
    Oracle,
    ResourceLimitError,
    choose_engine,
    iteration_schedule,
    run_analytic,
    run_noisy_outer,
    run_statevector,
    success_probability,
)
from .model import CostLedger, MatchInstance, RunReport
from .sortsearch import (
    block_count,
    block_view,
    binary_membership,
    membership_probe_depth,
    sort_charges,
    sort_instrumented,
)


@dataclass(frozen=True)
class NestedConfig:
    """Knobs for the amplified matchers.

    ``block_size`` defaults to ceil(sqrt(n)); ``engine`` picks the
    search engine (auto switches to analytic past the amplitude cap);
    ``uncompute_factor`` multiplies every in-iteration oracle charge to
    model running the oracle circuit forward and back; ``noise`` applies
    per-round dropout to the nested matcher's outer stage.
    """

    block_size: Optional[int] = None
    engine: str = "auto"
    uncompute_factor: int = 2
    noise: Optional[NoisyOracleSpec] = None
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.block_size is not None and self.block_size < 1:
            raise ValueError("block_size must be at least 1")
        if self.engine not in ENGINES:
            raise ValueError(f"unknown engine {self.engine!r}")
        if self.uncompute_factor < 1:
            raise ValueError("uncompute_factor must be at least 1")


def _resolve_block_size(n: int, config: NestedConfig) -> int:
    if config.block_size is not None:
        return config.block_size
    return math.isqrt(n - 1) + 1


def _classical_report(instance: MatchInstance, found, ledger, stats) -> RunReport:
    correct = (
        found is not None
        and instance.list1[found[0]] == instance.planted_value
        and instance.list2[found[1]] == instance.planted_value
    )
    return RunReport(
        found=found,
        correct=correct,
        ledger=ledger,
        engine_stats=stats,
        rng_seed=None,
        predicted_success=1.0,
    )


def exhaustive_pairs(instance: MatchInstance, ledger: Optional[CostLedger] = None) -> RunReport:
    """Probe all n^2 pairs; the ground-truth baseline.

    Charges the full pair scan (2 accesses per pair) up front; the match
    itself is located with a hash join since the outcome is identical.
    """
    ledger = ledger if ledger is not None else CostLedger()
    n = instance.n
    ledger.charge_batch("outer_search", l1_queries=n * n, l2_queries=n * n)
    index2 = {v: j for j, v in enumerate(instance.list2)}
    found = None
    for i, v in enumerate(instance.list1):
        j = index2.get(v)
        if j is not None:
            found = (i, j)
            break
    return _classical_report(instance, found, ledger, {"algorithm": "exhaustive"})


def classical_sort_scan(instance: MatchInstance, ledger: Optional[CostLedger] = None) -> RunReport:
    """Sort list1, then probe every list2 value against the sorted copy."""
    ledger = ledger if ledger is not None else CostLedger()
    n = instance.n
    ledger.charge_batch("sort", l1_queries=n, mem_writes=n)
    ledger.workspace_acquire(n)
    sorted1 = sort_instrumented(
        [(v, i) for i, v in enumerate(instance.list1)], ledger, "sort"
    )
    found = None
    for j in range(n):
        ledger.charge("l2_queries", 1, "final_verify")
        i = binary_membership(sorted1, instance.list2[j], ledger, "final_verify")
        if i is not None:
            found = (i, j)
    ledger.workspace_release(n)
    return _classical_report(instance, found, ledger, {"algorithm": "sort_scan"})


def classical_two_sort_merge(instance: MatchInstance, ledger: Optional[CostLedger] = None) -> RunReport:
    """Sort both lists and walk them in step until the values collide."""
    ledger = ledger if ledger is not None else CostLedger()
    n = instance.n
    ledger.charge_batch("sort", l1_queries=n, mem_writes=n)
    ledger.charge_batch("sort", l2_queries=n, mem_writes=n)
    ledger.workspace_acquire(2 * n)
    sorted1 = sort_instrumented(
        [(v, i) for i, v in enumerate(instance.list1)], ledger, "sort"
    )
    sorted2 = sort_instrumented(
        [(v, j) for j, v in enumerate(instance.list2)], ledger, "sort"
    )
    found = None
    p1 = p2 = 0
    while p1 < n and p2 < n:
        ledger.charge("mem_reads", 2, "final_verify")
        v1, i1 = sorted1.entries[p1]
        v2, j2 = sorted2.entries[p2]
        if v1 == v2:
            found = (i1, j2)
            break
        if v1 < v2:
            p1 += 1
        else:
            p2 += 1
    ledger.workspace_release(2 * n)
    return _classical_report(instance, found, ledger, {"algorithm": "two_sort"})


def naive_grover_pairs(
    instance: MatchInstance,
    config: Optional[NestedConfig] = None,
    ledger: Optional[CostLedger] = None,
    *,
    statevector_cap: int = DEFAULT_STATEVECTOR_CAP,
) -> RunReport:
    """One flat amplified search over the n^2 pair space.

    Each oracle evaluation probes one pair (1 list1 query + 1 list2
    query), charged uncompute_factor times per iteration.
    """
    config = config if config is not None else NestedConfig()
    ledger = ledger if ledger is not None else CostLedger()
    n = instance.n
    m = n * n
    pair_star = instance.planted_pos1 * n + instance.planted_pos2
    oracle = Oracle(
        predicate=lambda p: instance.list1[p // n] == instance.list2[p % n],
        charge_fn=lambda led, times: led.charge_batch(
            "outer_search", l1_queries=times, l2_queries=times
        ),
        marked_indices=(pair_star,),
    )
    problem = GroverProblem(
        space_size=m, marked_count=1, oracle=oracle,
        uncompute_factor=config.uncompute_factor,
    )
    iterations = iteration_schedule(m, 1)
    rng = np.random.default_rng(config.rng_seed)
    engine = choose_engine(config.engine, m, statevector_cap)
    if engine == "statevector":
        outcome = run_statevector(problem, iterations, rng, ledger, cap=statevector_cap)
    else:
        outcome = run_analytic(problem, iterations, rng, ledger)
    found = None
    if outcome.verified:
        found = (outcome.measured_index // n, outcome.measured_index % n)
    correct = found == (instance.planted_pos1, instance.planted_pos2)
    return RunReport(
        found=found,
        correct=correct,
        ledger=ledger,
        engine_stats={
            "algorithm": "naive_grover",
            "engine": engine,
            "iterations": iterations,
            "pair_space": m,
        },
        rng_seed=config.rng_seed,
        predicted_success=outcome.predicted_success
        if engine == "analytic"
        else success_probability(m, 1, iterations),
    )


def _peak_block_cells(block_size: int) -> int:
    # block copy plus the sort's auxiliary buffer
    return block_size + (block_size if block_size >= 2 else 0)


def _outer_oracle_charge(ledger: CostLedger, times: int, block_size: int, r_inner: int) -> None:
    """Ledger cost of ``times`` evaluations of the block oracle.

    One evaluation copies and sorts a block, runs r_inner amplified
    membership probes against it plus one verification probe, and
    releases the block again.
    """
    reads_sort, writes_sort = sort_charges(block_size)
    probe_reads = 2 * membership_probe_depth(block_size)
    ledger.charge_batch(
        "outer_search",
        l1_queries=block_size * times,
        l2_queries=(r_inner + 1) * times,
        mem_reads=(reads_sort + (r_inner + 1) * probe_reads) * times,
        mem_writes=(block_size + writes_sort) * times,
    )
    cells = _peak_block_cells(block_size)
    ledger.workspace_acquire(cells)
    ledger.workspace_release(cells)


def nested_grover_match(
    instance: MatchInstance,
    config: Optional[NestedConfig] = None,
    ledger: Optional[CostLedger] = None,
    *,
    statevector_cap: int = DEFAULT_STATEVECTOR_CAP,
) -> RunReport:
    """Amplified search over blocks of list1, then a final verify pass.

    The outer search runs over ceil(n / b) blocks; each oracle
    evaluation stands for copy + sort of the block and an amplified
    membership search of list2 against it.  The measured block is then
    re-sorted classically, the membership search is run once more for
    real, and the resulting pair is confirmed with direct queries.  A
    run whose final membership probe fails verification reports no
    match rather than guessing.
    """
    config = config if config is not None else NestedConfig()
    ledger = ledger if ledger is not None else CostLedger()
    n = instance.n
    b = _resolve_block_size(n, config)
    blocks = block_count(n, b)
    r_outer = iteration_schedule(blocks, 1)
    r_inner = iteration_schedule(n, 1)
    rng = np.random.default_rng(config.rng_seed)
    marked_block = instance.planted_pos1 // b

    outer_oracle = Oracle(
        predicate=lambda beta: beta == marked_block,
        charge_fn=lambda led, times: _outer_oracle_charge(led, times, b, r_inner),
        marked_indices=(marked_block,),
    )
    outer_problem = GroverProblem(
        space_size=blocks, marked_count=1, oracle=outer_oracle,
        uncompute_factor=config.uncompute_factor,
    )
    noisy = config.noise is not None and config.noise.failure_prob > 0.0
    if noisy:
        engine_outer = "statevector"
        outer_outcome = run_noisy_outer(
            outer_problem, r_outer, config.noise, rng, ledger, cap=statevector_cap
        )
    else:
        engine_outer = choose_engine(config.engine, blocks, statevector_cap)
        if engine_outer == "statevector":
            outer_outcome = run_statevector(
                outer_problem, r_outer, rng, ledger, cap=statevector_cap
            )
        else:
            outer_outcome = run_analytic(outer_problem, r_outer, rng, ledger)
    beta = outer_outcome.measured_index

    # final pass: the measured block is rebuilt for real
    block = block_view(instance, beta, b, ledger, phase="sort")
    depth = membership_probe_depth(block.length)
    inner_marked = (instance.planted_pos2,) if beta == marked_block else ()
    inner_oracle = Oracle(
        predicate=lambda j: binary_membership(block.workspace, instance.list2[j]) is not None,
        charge_fn=lambda led, times: led.charge_batch(
            "inner_search", l2_queries=times, mem_reads=2 * depth * times
        ),
        marked_indices=inner_marked,
    )
    inner_problem = GroverProblem(
        space_size=n, marked_count=len(inner_marked), oracle=inner_oracle,
        uncompute_factor=config.uncompute_factor,
    )
    engine_inner = choose_engine(config.engine, n, statevector_cap)
    if engine_inner == "statevector":
        inner_outcome = run_statevector(
            inner_problem, r_inner, rng, ledger,
            cap=statevector_cap, charge_verification=True,
        )
    else:
        inner_outcome = run_analytic(
            inner_problem, r_inner, rng, ledger, charge_verification=True
        )

    found = None
    if inner_outcome.verified:
        j_hat = inner_outcome.measured_index
        # the matching cell was just probed; its source index rides along
        i_hat = binary_membership(block.workspace, instance.list2[j_hat])
        ledger.charge_batch("final_verify", l1_queries=1, l2_queries=1)
        if i_hat is not None and instance.list1[i_hat] == instance.list2[j_hat]:
            found = (i_hat, j_hat)
    block.release(ledger)

    correct = (
        found is not None
        and instance.list1[found[0]] == instance.planted_value
        and instance.list2[found[1]] == instance.planted_value
    )
    return RunReport(
        found=found,
        correct=correct,
        ledger=ledger,
        engine_stats={
            "algorithm": "nested",
            "block_size": b,
            "block_count": blocks,
            "outer_iterations": r_outer,
            "inner_iterations": r_inner,
            "outer_measured_block": beta,
            "outer_marked_block": marked_block,
            "outer_marked_mass": outer_outcome.predicted_success,
            "inner_verified": inner_outcome.verified,
            "engine_outer": engine_outer,
            "engine_inner": engine_inner,
        },
        rng_seed=config.rng_seed,
        predicted_success=composed_success_probability(n, config),
    )


def noisy_success_probability(space_size: int, iterations: int, failure_prob: float) -> float:
    """Exact hit probability of a 1-marked search with per-round dropout.

    The state stays in the span of the marked index and the uniform
    unmarked rest, so it is an angle: a firing round advances it by
    2*theta, a dropped round reflects it about theta.  Averaging over
    the 2^r dropout patterns collapses to a small distribution over
    integer multiples of theta.
    """
    if not 0.0 <= failure_prob <= 1.0:
        raise ValueError("failure_prob must lie in [0, 1]")
    theta = math.asin(math.sqrt(1.0 / space_size))
    dist: dict[int, float] = {1: 1.0}
    for _ in range(iterations):
        nxt: dict[int, float] = {}
        for c, p in dist.items():
            nxt[c + 2] = nxt.get(c + 2, 0.0) + p * (1.0 - failure_prob)
            if failure_prob > 0.0:
                nxt[2 - c] = nxt.get(2 - c, 0.0) + p * failure_prob
        dist = nxt
    return sum(p * math.sin(c * theta) ** 2 for c, p in dist.items())


def composed_success_probability(n: int, config: Optional[NestedConfig] = None) -> float:
    """Predicted success of the nested matcher: outer hit times final verify."""
    config = config if config is not None else NestedConfig()
    if n < 2:
        raise ValueError("instance size must be at least 2")
    b = _resolve_block_size(n, config)
    blocks = block_count(n, b)
    r_outer = iteration_schedule(blocks, 1)
    r_inner = iteration_schedule(n, 1)
    p_inner = success_probability(n, 1, r_inner)
    if config.noise is not None and config.noise.failure_prob > 0.0:
        p_outer = noisy_success_probability(blocks, r_outer, config.noise.failure_prob)
    else:
        p_outer = success_probability(blocks, 1, r_outer)
    return p_outer * p_inner


def predicted_total_cost(n: int, config: Optional[NestedConfig] = None) -> CostLedger:
    """Ledger-shaped cost prediction for a nested run on equal blocks.

    Mirrors the instrumented charges exactly when block_size divides n
    and the run's final verification succeeds; otherwise the prediction
    is for the full (verified) path on full-size blocks.
    """
    config = config if config is not None else NestedConfig()
    if n < 2:
        raise ValueError("instance size must be at least 2")
    b = _resolve_block_size(n, config)
    blocks = block_count(n, b)
    r_outer = iteration_schedule(blocks, 1)
    r_inner = iteration_schedule(n, 1)
    u = config.uncompute_factor
    ledger = CostLedger()
    _outer_oracle_charge(ledger, r_outer * u, b, r_inner)
    # final pass: copy + sort the measured block
    ledger.charge_batch("sort", l1_queries=b, mem_writes=b)
    ledger.workspace_acquire(b)
    if b >= 2:
        reads_sort, writes_sort = sort_charges(b)
        ledger.workspace_acquire(b)
        ledger.charge_batch("sort", mem_reads=reads_sort, mem_writes=writes_sort)
        ledger.workspace_release(b)
    # amplified membership probes plus the one verification probe
    probe_reads = 2 * membership_probe_depth(b)
    ledger.charge_batch(
        "inner_search",
        l2_queries=r_inner * u + 1,
        mem_reads=probe_reads * (r_inner * u + 1),
    )
    ledger.charge_batch("final_verify", l1_queries=1, l2_queries=1)
    ledger.workspace_release(b)
    return ledger


def two_level_outcome_distribution(
    instance: MatchInstance,
    config: Optional[NestedConfig] = None,
    *,
    max_joint_cells: int = 1 << 16,
) -> dict[tuple[int, bool], float]:
    """Exact outcome distribution of a joint two-level statevector run.

    Simulates the nested iteration on one real-valued state over
    (block, list2 index) pairs: each outer oracle application runs the
    inner rotation in superposition, phase-flips branches whose inner
    register verifies, and unwinds the inner rotation, so imperfect
    uncomputation shows up as leaked amplitude.  Returns probabilities
    for (measured block, final pass verified) outcomes; the final pass
    itself is scored with the closed-form membership success.
    """
    config = config if config is not None else NestedConfig()
    n = instance.n
    b = _resolve_block_size(n, config)
    blocks = block_count(n, b)
    if blocks * n > max_joint_cells:
        raise ResourceLimitError(
            f"joint space of {blocks * n} cells exceeds the cap of {max_joint_cells}"
        )
    r_outer = iteration_schedule(blocks, 1)
    r_inner = iteration_schedule(n, 1)
    marked_block = instance.planted_pos1 // b

    block_values = [
        set(instance.list1[i * b : min((i + 1) * b, n)]) for i in range(blocks)
    ]
    marked_js = [
        [j for j in range(n) if instance.list2[j] in block_values[i]]
        for i in range(blocks)
    ]

    # inner prep A: reflection mapping basis state 0 to the uniform state
    e0 = np.zeros(n)
    e0[0] = 1.0
    uniform = np.full(n, 1.0 / math.sqrt(n))
    w = e0 - uniform
    norm = np.linalg.norm(w)
    if norm < 1e-12:
        prep = np.eye(n)
    else:
        w /= norm
        prep = np.eye(n) - 2.0 * np.outer(w, w)
    diffusion = np.full((n, n), 2.0 / n) - np.eye(n)

    rotations = []
    flips = []
    for i in range(blocks):
        oracle_sign = np.ones(n)
        oracle_sign[marked_js[i]] = -1.0
        step = diffusion * oracle_sign[np.newaxis, :]
        rotation = np.linalg.matrix_power(step, r_inner) @ prep
        rotations.append(rotation)
        flips.append(oracle_sign)

    psi = np.zeros((blocks, n))
    psi[:, 0] = 1.0 / math.sqrt(blocks)
    for _ in range(r_outer):
        for i in range(blocks):
            inner = rotations[i] @ psi[i]
            inner *= flips[i]
            psi[i] = rotations[i].T @ inner
        psi = 2.0 * psi.mean(axis=0)[np.newaxis, :] - psi

    block_probs = (psi * psi).sum(axis=1)
    p_inner = success_probability(n, 1, r_inner)
    out: dict[tuple[int, bool], float] = {}
    for i in range(blocks):
        p = float(block_probs[i])
        if i == marked_block:
            out[(i, True)] = p * p_inner
            if p_inner < 1.0:
                out[(i, False)] = p * (1.0 - p_inner)
        else:
            out[(i, False)] = p
    return out
