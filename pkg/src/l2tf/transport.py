"""Exact discrete optimal transport between finitely supported measures.

The Monge-Kantorovich (1-Wasserstein) distance between two finitely
supported probabilities is the value of the transportation linear program

    min <plan, cost>   s.t.  plan >= 0, row sums = source, column sums = target,

which is solved exactly by the HiGHS simplex through scipy.  The ground
costs are arbitrary nonnegative reals, so the same engine serves measures on
the symbolic space and measures on the space of measures (where the ground
cost is itself a transport distance).  Problem sizes here are at most a few
hundred atoms per side; no entropic regularisation is used anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

INGEST_TOLERANCE = 1e-6  # reject weight vectors whose sum strays further from 1


def _as_probability(weights, name: str) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError(f"{name} weights must be a nonempty vector")
    if np.any(w < 0):
        raise ValueError(f"{name} weights must be nonnegative")
    total = float(w.sum())
    if abs(total - 1.0) > INGEST_TOLERANCE:
        raise ValueError(f"{name} weights sum to {total!r}, not 1")
    if total != 1.0:
        w = w / total
    return w


@dataclass(frozen=True)
class DiscreteTransportProblem:
    """Source/target probability vectors plus the ground cost matrix."""

    source: np.ndarray
    target: np.ndarray
    cost: np.ndarray

    def __post_init__(self):
        src = _as_probability(self.source, "source")
        tgt = _as_probability(self.target, "target")
        cost = np.asarray(self.cost, dtype=float)
        if cost.shape != (src.size, tgt.size):
            raise ValueError(
                f"cost matrix shape {cost.shape} does not match "
                f"({src.size}, {tgt.size})"
            )
        if np.any(cost < 0):
            raise ValueError("ground costs must be nonnegative")
        object.__setattr__(self, "source", src)
        object.__setattr__(self, "target", tgt)
        object.__setattr__(self, "cost", cost)


@dataclass(frozen=True)
class TransportPlan:
    """An optimal coupling and its transport cost."""

    plan: np.ndarray
    value: float

    def marginal_residual(self, problem: DiscreteTransportProblem) -> float:
        """Max violation of the row/column sum constraints (diagnostic)."""
        row = np.abs(self.plan.sum(axis=1) - problem.source).max()
        col = np.abs(self.plan.sum(axis=0) - problem.target).max()
        return float(max(row, col))


def solve(problem: DiscreteTransportProblem) -> TransportPlan:
    """Solve the transportation LP exactly; deterministic for fixed input."""
    p, q = problem.cost.shape
    # row-sum constraints followed by column-sum constraints, one of which is
    # redundant; HiGHS handles the rank deficiency.
    data, rows, cols = [], [], []
    for i in range(p):
        for j in range(q):
            k = i * q + j
            rows.append(i)
            cols.append(k)
            data.append(1.0)
            rows.append(p + j)
            cols.append(k)
            data.append(1.0)
    a_eq = sp.csr_matrix((data, (rows, cols)), shape=(p + q, p * q))
    b_eq = np.concatenate([problem.source, problem.target])
    res = linprog(
        c=problem.cost.ravel(),
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=(0, None),
        method="highs",
    )
    if res.status != 0:
        raise RuntimeError(f"transport LP failed: {res.message}")
    plan = res.x.reshape(p, q)
    return TransportPlan(plan=plan, value=float(res.fun))


def mk_distance(atoms_a, weights_a, atoms_b, weights_b, ground) -> float:
    """Monge-Kantorovich distance for an arbitrary ground metric.

    ``ground`` is called on atom pairs to assemble the cost matrix; atoms are
    expected to be deduplicated under the ground metric's equality.
    """
    atoms_a = list(atoms_a)
    atoms_b = list(atoms_b)
    cost = np.empty((len(atoms_a), len(atoms_b)))
    for i, x in enumerate(atoms_a):
        for j, y in enumerate(atoms_b):
            cost[i, j] = ground(x, y)
    problem = DiscreteTransportProblem(
        source=np.asarray(weights_a, dtype=float),
        target=np.asarray(weights_b, dtype=float),
        cost=cost,
    )
    return solve(problem).value
