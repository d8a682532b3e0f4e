"""Reduced-cost bookkeeping and the transportation-shaped pricing step.

The constraint rows of exactly two measures are delegated to pricing. With
those two measures permuted to the front of the instance, every distinct
pair-row pattern ("unique column") owns one contiguous range of duplicate
flat indices, so compressing the full reduced-cost vector to the per-range
minimum is a single reshape. The compressed vector, arranged as a matrix
over the two measures' points, is a balanced transportation problem.

The full reduced-cost vector is the only exponentially sized state besides
the cost vector itself; dual changes touch it through strided views of the
ranges covered by each changed row, so the constraint matrix itself is never
stored.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .accounting import AllocationLedger
from .model import CapacityError, Instance, SparseMass, Strides, cost_vector
from .transport import TransportationProblem, TransportPlan, solve_transportation


@dataclass(frozen=True)
class Partition:
    """Assignment of two measures to pricing, as a permutation of the input."""

    pair: tuple[int, int]  # original positions of the pricing measures
    perm: tuple[int, ...]  # permuted order: pair first, the rest in input order
    n_unique: int  # product of the pair's sizes
    n_duplicates: int  # product of all other sizes


def choose_partition(inst: Instance, variant: str = "large") -> Partition:
    """Pick the pricing pair: first two, two largest, or two smallest."""
    sizes = inst.sizes
    n = inst.n
    if n < 2:
        raise ValueError("a pricing pair needs at least two measures")
    if variant == "any":
        pair = (0, 1)
    elif variant == "large":
        order = sorted(range(n), key=lambda i: (-sizes[i], i))
        pair = tuple(sorted(order[:2]))
    elif variant == "small":
        order = sorted(range(n), key=lambda i: (sizes[i], i))
        pair = tuple(sorted(order[:2]))
    else:
        raise ValueError(f"unknown pair variant {variant!r}")
    rest = tuple(i for i in range(n) if i not in pair)
    perm = pair + rest
    n_unique = sizes[pair[0]] * sizes[pair[1]]
    total = 1
    for s in sizes:
        total *= s
    return Partition(pair, perm, n_unique, total // n_unique)


@dataclass
class PricingState:
    """Dense pricing data over the permuted combination space."""

    costs: np.ndarray  # (N,) transport cost of every combination
    reduced: np.ndarray  # (N,) costs minus accumulated master duals
    best: np.ndarray  # (n_unique,) minimum reduced cost per unique column
    best_index: np.ndarray  # (n_unique,) flat index attaining each minimum
    sigma: float  # additive pricing offset from the convexity row


def init_reduced_costs(
    inst_perm: Instance,
    partition: Partition,
    strides_perm: Strides,
    *,
    memory_cap: int | None = None,
    ledger: AllocationLedger | None = None,
) -> PricingState:
    """Allocate the cost and reduced-cost vectors (duals start at zero)."""
    total = strides_perm.total
    if memory_cap is not None and 2 * 8 * total > memory_cap:
        raise CapacityError(
            f"{total} combinations need {2 * 8 * total} bytes of pricing state, "
            f"over the cap of {memory_cap}"
        )
    costs = cost_vector(inst_perm, strides_perm)
    reduced = costs.copy()
    if ledger is not None:
        ledger.register("pricing.costs", costs.nbytes)
        ledger.register("pricing.reduced", reduced.nbytes)
        ledger.register("pricing.best", 8 * partition.n_unique)
        ledger.register("pricing.best_index", 8 * partition.n_unique)
    state = PricingState(
        costs=costs,
        reduced=reduced,
        best=np.empty(partition.n_unique),
        best_index=np.empty(partition.n_unique, dtype=np.int64),
        sigma=0.0,
    )
    best_costs(state, partition)
    return state


def _master_blocks(partition: Partition, strides_perm: Strides):
    """(row offset, size, inner stride, outer count) per master measure."""
    blocks = []
    offset = 0
    total = strides_perm.total
    for t in range(2, len(strides_perm.sizes)):
        size = strides_perm.sizes[t]
        inner = strides_perm.suffix_products[t]
        blocks.append((offset, size, inner, total // (size * inner)))
        offset += size
    return blocks


def update_reduced_costs(
    state: PricingState,
    y_old: np.ndarray,
    y_new: np.ndarray,
    partition: Partition,
    strides_perm: Strides,
):
    """Subtract dual deltas from exactly the combinations containing each row."""
    for offset, size, inner, outer in _master_blocks(partition, strides_perm):
        block_old = y_old[offset : offset + size]
        block_new = y_new[offset : offset + size]
        view = state.reduced.reshape(outer, size, inner)
        for j in range(size):
            delta = block_new[j] - block_old[j]
            if delta != 0.0:
                view[:, j, :] -= delta


def recompute_reduced_costs(
    state: PricingState,
    y: np.ndarray,
    partition: Partition,
    strides_perm: Strides,
):
    """Rebuild the reduced costs from scratch to cap incremental drift."""
    np.copyto(state.reduced, state.costs)
    for offset, size, inner, outer in _master_blocks(partition, strides_perm):
        view = state.reduced.reshape(outer, size, inner)
        view -= y[offset : offset + size][None, :, None]


def best_costs(state: PricingState, partition: Partition):
    """Per unique column, the minimum reduced cost among its duplicates.

    With the pair leading the permutation, unique column j owns the
    contiguous index range [j * n_duplicates, (j+1) * n_duplicates).
    """
    n_u, n_d = partition.n_unique, partition.n_duplicates
    grid = state.reduced.reshape(n_u, n_d)
    if n_d == 1:
        np.copyto(state.best, state.reduced)
        state.best_index[:] = np.arange(n_u, dtype=np.int64)
        return
    local = np.argmin(grid, axis=1)  # first minimum, so lowest flat index
    rows = np.arange(n_u, dtype=np.int64)
    np.copyto(state.best, grid[rows, local])
    np.copyto(state.best_index, rows * n_d + local)


def solve_pricing(
    state: PricingState,
    partition: Partition,
    supplies: np.ndarray,
    demands: np.ndarray,
) -> tuple[float, TransportPlan]:
    """Minimize the compressed reduced costs over the pair's transport polytope.

    A negative objective means expanding the plan yields an improving column.
    """
    size_a = len(supplies)
    size_b = len(demands)
    costs = state.best.reshape(size_a, size_b)
    plan = solve_transportation(TransportationProblem(supplies, demands, costs))
    return plan.objective + state.sigma, plan


def expand_column(
    plan: TransportPlan, state: PricingState, partition: Partition, size_b: int
) -> SparseMass:
    """Lift a transport plan back to full-space combination indices."""
    p = SparseMass()
    for i, j, q in plan.flows:
        h = int(state.best_index[i * size_b + j])
        p.add(h, q)
    return p
