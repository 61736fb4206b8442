"""Instrumented classical kernels: merge sort, block extraction, membership.

Charges follow a fixed, data-oblivious schedule: a merge of t cells
always costs t - 1 compares and t moves, and a membership probe always
walks the full bisection depth.  This makes every kernel's cost a
function of sizes alone, so predicted ledgers can match instrumented
ones exactly.  A compare costs 2 reads; a move costs 1 read + 1 write.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .model import CostLedger, MatchInstance


@dataclass(frozen=True)
class SortedList:
    """Value-ascending workspace copy; each entry is (value, source index)."""

    entries: tuple[tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.entries)

    def values(self) -> tuple[int, ...]:
        return tuple(v for v, _ in self.entries)


def sort_charges(n: int) -> tuple[int, int]:
    """(reads, writes) charged by sort_instrumented on n cells."""
    if n < 0:
        raise ValueError("size must be non-negative")
    reads = writes = 0
    width = 1
    while width < n:
        lo = 0
        while lo < n:
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            t = hi - lo
            # t moves always; t - 1 compares only when two runs meet
            compares = t - 1 if mid < hi else 0
            reads += 2 * compares + t
            writes += t
            lo = hi
        width *= 2
    return reads, writes


def sort_instrumented(
    pairs: Sequence[tuple[int, int]],
    ledger: Optional[CostLedger] = None,
    phase: str = "sort",
) -> SortedList:
    """Bottom-up merge sort over (value, index) pairs with fixed charges.

    Uses one auxiliary buffer of n cells, acquired for the duration of
    the sort, on top of the n cells the caller already holds.
    """
    n = len(pairs)
    src = list(pairs)
    if n <= 1:
        return SortedList(entries=tuple(src))
    if ledger is not None:
        ledger.workspace_acquire(n)
    dst = [src[0]] * n
    width = 1
    while width < n:
        lo = 0
        while lo < n:
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            t = hi - lo
            if ledger is not None:
                compares = t - 1 if mid < hi else 0
                ledger.charge_batch(phase, mem_reads=2 * compares + t, mem_writes=t)
            i, j = lo, mid
            for k in range(lo, hi):
                if i < mid and (j >= hi or src[i][0] <= src[j][0]):
                    dst[k] = src[i]
                    i += 1
                else:
                    dst[k] = src[j]
                    j += 1
            lo = hi
        src, dst = dst, src
        width *= 2
    if ledger is not None:
        ledger.workspace_release(n)
    return SortedList(entries=tuple(src))


@dataclass(frozen=True)
class BlockView:
    """A sorted workspace copy of one contiguous block of list1."""

    block_index: int
    offset: int
    length: int
    workspace: SortedList

    def release(self, ledger: Optional[CostLedger]) -> None:
        """Give back the block's workspace cells."""
        if ledger is not None:
            ledger.workspace_release(self.length)


def block_count(n: int, block_size: int) -> int:
    if block_size < 1:
        raise ValueError("block size must be at least 1")
    return -(-n // block_size)


def block_view(
    instance: MatchInstance,
    block_index: int,
    block_size: int,
    ledger: Optional[CostLedger] = None,
    phase: str = "sort",
) -> BlockView:
    """Copy one block of list1 into workspace and sort it.

    Charges one list1 query plus one write per copied cell, then the
    sort.  The caller owns the returned workspace until release().
    """
    if block_size < 1:
        raise ValueError("block size must be at least 1")
    offset = block_index * block_size
    if block_index < 0 or offset >= instance.n:
        raise ValueError(f"block index {block_index} out of range")
    length = min(block_size, instance.n - offset)
    if ledger is not None:
        ledger.charge_batch(phase, l1_queries=length, mem_writes=length)
        ledger.workspace_acquire(length)
    pairs = [(instance.list1[offset + i], offset + i) for i in range(length)]
    workspace = sort_instrumented(pairs, ledger, phase)
    return BlockView(
        block_index=block_index, offset=offset, length=length, workspace=workspace
    )


def membership_probe_depth(n: int) -> int:
    """Fixed probe count for a membership test over n sorted cells."""
    if n < 0:
        raise ValueError("size must be non-negative")
    return n.bit_length()


def binary_membership(
    sorted_list: SortedList,
    query_value: int,
    ledger: Optional[CostLedger] = None,
    phase: str = "final_verify",
) -> Optional[int]:
    """Source index of query_value in sorted workspace, or None.

    Always charges the full probe depth (2 reads per probe) so the cost
    is independent of where, or whether, the value occurs.
    """
    entries = sorted_list.entries
    n = len(entries)
    if ledger is not None:
        ledger.charge_batch(phase, mem_reads=2 * membership_probe_depth(n))
    lo, hi = 0, n
    while lo < hi:
        mid = (lo + hi) // 2
        if entries[mid][0] < query_value:
            lo = mid + 1
        else:
            hi = mid
    if lo < n and entries[lo][0] == query_value:
        return entries[lo][1]
    return None
