"""Shared generators for randomized property tests (seeded, reproducible)."""

from __future__ import annotations

import numpy as np

from l2tf import AtomicMeasure, CylinderFunction, EventuallyPeriodic


def pt(text: str, m: int = 2) -> EventuallyPeriodic:
    return EventuallyPeriodic.from_text(text, m)


def random_point(rng: np.random.Generator, m: int, max_prefix: int = 3,
                 max_period: int = 3) -> EventuallyPeriodic:
    prefix = tuple(int(s) for s in rng.integers(1, m + 1, size=int(rng.integers(0, max_prefix + 1))))
    period = tuple(int(s) for s in rng.integers(1, m + 1, size=int(rng.integers(1, max_period + 1))))
    return EventuallyPeriodic(prefix, period, m)


def random_measure(rng: np.random.Generator, m: int, max_atoms: int = 5) -> AtomicMeasure:
    count = int(rng.integers(1, max_atoms + 1))
    atoms = {random_point(rng, m) for _ in range(count)}
    weights = rng.dirichlet(np.ones(len(atoms)))
    return AtomicMeasure(tuple(atoms), tuple(float(w) for w in weights))


def random_cylinder_function(rng: np.random.Generator, m: int, depth: int,
                             scale: float = 1.0) -> CylinderFunction:
    return CylinderFunction(m, depth, rng.uniform(-scale, scale, m**depth))


def measures_close(a: AtomicMeasure, b: AtomicMeasure, tol: float = 1e-14) -> bool:
    """Same support exactly, weights within tol (for float-mixing operations)."""
    return a.atoms == b.atoms and all(
        abs(float(u) - float(v)) <= tol for u, v in zip(a.weights, b.weights)
    )
