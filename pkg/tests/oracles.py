"""Independent oracles: brute-force routes that never touch the library's solvers.

* transport values by exhaustive enumeration of the basic solutions of the
  transportation polytope (every vertex is a basic solution on at most
  p + q - 1 cells, so the minimum over feasible basic solutions is the LP
  optimum);
* the transfer operator by direct per-point summation over preimages;
* the dual eigenmeasure cylinder table by a dense eigensolve of the dual
  action on depth-K tables.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from l2tf.symbolic import word_from_index, word_index


def transport_value_by_enumeration(source, target, cost) -> float:
    """Minimum cost over all feasible basic solutions of the transport polytope."""
    source = np.asarray(source, dtype=float)
    target = np.asarray(target, dtype=float)
    cost = np.asarray(cost, dtype=float)
    p, q = cost.shape
    cells = [(i, j) for i in range(p) for j in range(q)]
    a_full = np.zeros((p + q, p * q))
    for k, (i, j) in enumerate(cells):
        a_full[i, k] = 1.0
        a_full[p + j, k] = 1.0
    b = np.concatenate([source, target])
    best = math.inf
    for basis in itertools.combinations(range(p * q), p + q - 1):
        a_b = a_full[:, basis]
        x_b, residual, rank, _ = np.linalg.lstsq(a_b, b, rcond=None)
        if rank < p + q - 1:
            continue
        if np.linalg.norm(a_b @ x_b - b) > 1e-9:
            continue
        if np.any(x_b < -1e-10):
            continue
        value = float(cost.ravel()[list(basis)] @ x_b)
        best = min(best, value)
    if not math.isfinite(best):
        raise RuntimeError("no feasible basic solution found")
    return best


def naive_transfer_value(pot_values, p_values, f_values, m: int,
                         pot_depth: int, f_depth: int, word) -> float:
    """(L f)(word) by direct summation, padding the word cyclically as needed."""
    need = max(pot_depth, f_depth) - 1
    padded = tuple(word)
    while len(padded) < need:
        padded = padded + tuple(word)
    total = 0.0
    for a in range(1, m + 1):
        extended = (a,) + padded
        pot_val = pot_values[word_index(extended[:pot_depth], m)]
        f_val = f_values[word_index(extended[:f_depth], m)]
        total += p_values[a - 1] * math.exp(pot_val) * f_val
    return total


def dual_table_by_dense_eig(pot_values, p_values, m: int, pot_depth: int,
                            table_depth: int):
    """Leading eigenpair of the dual action on depth-K cylinder tables.

    (L* nu)[w] = p_{w_1} exp(A(w_1..w_k)) * sum_c nu[(w_2..w_K, c)]; the
    leading eigenvector, normalized to total mass one, is the cylinder table
    of the dual eigenprobability.
    """
    if table_depth < pot_depth:
        raise ValueError("table depth must cover the potential depth")
    size = m**table_depth
    mat = np.zeros((size, size))
    for idx in range(size):
        word = word_from_index(idx, table_depth, m)
        factor = p_values[word[0] - 1] * math.exp(
            pot_values[word_index(word[:pot_depth], m)]
        )
        tail = word[1:]
        for c in range(1, m + 1):
            mat[idx, word_index(tail + (c,), m)] += factor
    eigvals, eigvecs = np.linalg.eig(mat)
    lead = int(np.argmax(eigvals.real))
    lam = float(eigvals[lead].real)
    vec = eigvecs[:, lead].real
    vec = vec / vec.sum()
    return lam, vec
