"""Holonomic measures, variational entropy, and the pressure identity.

A measure on pairs (state, parameter) is holonomic when the average of
f(phi_nu(mu)) - f(mu) vanishes for every continuous f; on finite supports
that average is an exact sum, so the holonomy defect of a candidate measure
can be measured directly against a basis of test functionals.

The variational entropy of a holonomic measure with first marginal pi is

    h_v = inf_{g > 0} int log( B_Q(g)(mu) / g(mu) ) dpi(mu),
    B_Q(g)(mu) = int g(phi_nu(mu)) dQ(nu),

where Q is the a priori measure and the operator carries no potential
weight.  The infimum is taken over the family g(mu) = exp(int u dmu) with u
a cylinder function of chosen depth: it contains g = 1 (u = 0), is positive
by construction, turns the objective into a smooth convex function of the
table of u, and for a depth-k normalized potential it attains the exact
value (Kolmogorov entropy minus log m) already at family depth k.  The
objective and its analytic gradient are exact finite sums; minimization is
quasi-Newton from u = 0, so the returned value is always a certified upper
bound that never exceeds the g = 1 objective.

The pressure identity log rho(B) = h_v + int A dpi is checked by computing
the spectral radius from operator powers, the entropy at the equilibrium
candidate built from the normalized potential, and the exact integral of the
original potential against the marginal.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .level2 import (
    GibbsConstruction,
    IfsmSystem,
    Level2Measure,
    MeasureFunction,
    gibbs_from_level1,
    phi,
    spectral_radius,
)
from .measures import AtomicMeasure, CylinderFunction, normalize_weights
from .symbolic import all_words

logger = logging.getLogger(__name__)

NORMALIZATION_TOLERANCE = 1e-8


class HolonomicMeasure:
    """A finitely supported probability on pairs (state measure, parameter measure)."""

    __slots__ = ("m", "pairs", "weights")

    def __init__(self, pairs, weights):
        pairs = tuple((mu, nu) for mu, nu in pairs)
        weights = tuple(weights)
        if not pairs:
            raise ValueError("a measure needs at least one atom")
        if len(pairs) != len(weights):
            raise ValueError("pairs and weights must have matching lengths")
        m = pairs[0][0].m
        for mu, nu in pairs:
            if mu.m != m or nu.m != m:
                raise ValueError("all component measures must share one alphabet")
        acc: dict[tuple, list] = {}
        for (mu, nu), w in zip(pairs, weights):
            if w <= 0:
                raise ValueError(f"weights must be positive, got {w!r}")
            key = (mu.cache_key(), nu.cache_key())
            if key in acc:
                acc[key][1] += w
            else:
                acc[key] = [(mu, nu), w]
        items = sorted(acc.items(), key=lambda kv: kv[0])
        pairs = tuple(p for _, (p, _) in items)
        weights = normalize_weights(tuple(w for _, (_, w) in items))
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "weights", weights)

    def __setattr__(self, name, value):
        raise AttributeError("HolonomicMeasure is immutable")

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(zip(self.pairs, self.weights))

    def marginal_first(self) -> Level2Measure:
        """The first-coordinate marginal (disintegration base) as a level-2 measure."""
        return Level2Measure(
            tuple(mu for mu, _ in self.pairs), self.weights
        )


def cylinder_test_basis(m: int, max_depth: int) -> list[MeasureFunction]:
    """Affine functionals from all cylinder indicators up to the given depth."""
    basis = []
    for depth in range(1, max_depth + 1):
        for word in all_words(m, depth):
            basis.append(MeasureFunction.affine(CylinderFunction.indicator(word, m)))
    return basis


def holonomy_residual(
    hol: HolonomicMeasure, sys: IfsmSystem, tests=None
) -> float:
    """Max over test functionals of |sum_i w_i (f(phi_{nu_i}(mu_i)) - f(mu_i))|."""
    tests = tests if tests is not None else cylinder_test_basis(hol.m, 3)
    if not tests:
        raise ValueError("need at least one test functional")
    worst = 0.0
    for func in tests:
        acc = math.fsum(
            float(w) * (func(phi(nu, mu, sys.n)) - func(mu))
            for (mu, nu), w in hol
        )
        worst = max(worst, abs(acc))
    return worst


def build_holonomic(sys: IfsmSystem, depth: int = 5) -> HolonomicMeasure:
    """The holonomic lift of the eigenprobability of a normalized system.

    The first marginal is the level-2 Gibbs construction at the given depth;
    each of its atoms mu_i is paired with every a priori atom nu_j, weighted
    by exp(A(phi_{nu_j}(mu_i))).  For a normalized potential those weights
    are a probability in j, which is validated row by row.
    """
    construction = gibbs_from_level1(sys, depth)
    pi_hat = construction.level2_measure
    pairs, weights = [], []
    for mu, w_mu in pi_hat:
        row = []
        for nu, w_nu in sys.apriori:
            row.append(float(w_nu) * math.exp(sys.potential(phi(nu, mu, sys.n))))
        row_sum = math.fsum(row)
        if abs(row_sum - 1.0) > NORMALIZATION_TOLERANCE:
            raise ValueError(
                f"potential is not normalized for this a priori measure: "
                f"B(1) = {row_sum!r} at an atom of the marginal"
            )
        for (nu, _), q in zip(sys.apriori, row):
            pairs.append((mu, nu))
            weights.append(float(w_mu) * q)
    return HolonomicMeasure(pairs, weights)


@dataclass(frozen=True)
class EntropyEstimate:
    """A certified upper bound for the variational entropy.

    ``value`` is the objective at the returned table u; it never exceeds
    ``objective_at_unit`` (the g = 1 objective, zero for a probability Q).
    """

    value: float
    optimizer: CylinderFunction
    objective_at_unit: float
    gradient_norm: float
    converged: bool
    trajectory: list[tuple[int, float, float]]


def variational_entropy(
    hol: HolonomicMeasure,
    sys: IfsmSystem,
    g_depth: int,
    q: Level2Measure | None = None,
    gradient_tolerance: float = 1e-6,
    max_iterations: int = 500,
) -> EntropyEstimate:
    """Minimize the entropy objective over g(mu) = exp(int u dmu).

    ``q`` defaults to the system's a priori measure; it is exposed for
    exploration only.  The objective is convex in the table of u, so the
    quasi-Newton descent from u = 0 finds the family infimum.
    """
    q = q if q is not None else sys.apriori
    pi = hol.marginal_first()
    m = hol.m
    size = m**g_depth
    pi_w = np.array([float(w) for w in pi.weights])
    q_w = np.array([float(w) for w in q.weights])
    # cylinder-weight vectors: int u dmu = c . u
    c_state = np.stack([mu.cylinder_weights(g_depth) for mu in pi.atoms])
    c_image = np.stack(
        [
            np.stack(
                [phi(nu, mu, sys.n).cylinder_weights(g_depth) for nu in q.atoms]
            )
            for mu in pi.atoms
        ]
    )  # (n_pi, n_q, size)

    def objective_and_grad(u: np.ndarray) -> tuple[float, np.ndarray]:
        z = c_image @ u  # (n_pi, n_q)
        zmax = z.max(axis=1, keepdims=True)
        expz = q_w[None, :] * np.exp(z - zmax)
        denom = expz.sum(axis=1)
        log_b = np.log(denom) + zmax[:, 0]
        value = float(pi_w @ (log_b - c_state @ u))
        soft = expz / denom[:, None]
        grad = pi_w @ (np.einsum("ij,ijk->ik", soft, c_image) - c_state)
        return value, grad

    trajectory: list[tuple[int, float, float]] = []

    def record(u: np.ndarray) -> None:
        val, grad = objective_and_grad(u)
        trajectory.append((len(trajectory) + 1, val, float(np.abs(grad).max())))

    start = np.zeros(size)
    at_unit, grad0 = objective_and_grad(start)
    trajectory.append((0, at_unit, float(np.abs(grad0).max())))
    res = minimize(
        objective_and_grad,
        start,
        jac=True,
        method="L-BFGS-B",
        callback=record,
        options={"gtol": gradient_tolerance * 1e-2, "maxiter": max_iterations},
    )
    value, grad = objective_and_grad(res.x)
    gnorm = float(np.abs(grad).max())
    converged = gnorm <= gradient_tolerance
    if not converged:
        logger.warning(
            "entropy optimizer stopped with gradient norm %.3e > %.1e",
            gnorm,
            gradient_tolerance,
        )
    return EntropyEstimate(
        value=value,
        optimizer=CylinderFunction(m, g_depth, res.x),
        objective_at_unit=at_unit,
        gradient_norm=gnorm,
        converged=converged,
        trajectory=trajectory,
    )


def normalized_potential(construction: GibbsConstruction) -> CylinderFunction:
    """The affine potential whose operator fixes 1 on Dirac states.

    For the uniform constant-Dirac a priori measure this is
    log J - log(1/m): the averaged transfer operator of the result is the
    normalized chain of the input potential.
    """
    data = construction.perron
    return data.log_jac + math.log(data.m)


@dataclass(frozen=True)
class PressureReport:
    """Components of the identity log rho(B) = h_v + int A dpi."""

    ln_rho: float
    h_v: float
    int_a: float
    defect: float
    entropy: EntropyEstimate
    radius_sequence: list[tuple[int, float]]

    def to_dict(self) -> dict:
        return {
            "ln_rho": self.ln_rho,
            "h_v": self.h_v,
            "int_A": self.int_a,
            "defect": self.defect,
        }


def pressure_check(
    sys: IfsmSystem,
    depth: int = 5,
    g_depth: int | None = None,
    radius_steps: int = 30,
    mu0: AtomicMeasure | None = None,
) -> PressureReport:
    """Assemble both sides of the pressure identity for an affine system.

    The spectral radius comes from operator powers at mu0; the entropy from
    the equilibrium candidate of the normalized potential; the potential
    integral from the exact sum against the marginal.
    """
    construction = gibbs_from_level1(sys, depth)
    if g_depth is None:
        g_depth = sys.potential.cf.depth
    norm_sys = sys.with_potential(
        MeasureFunction.affine(normalized_potential(construction))
    )
    hol = build_holonomic(norm_sys, depth)
    estimate = variational_entropy(hol, norm_sys, g_depth)
    pi = hol.marginal_first()
    int_a = math.fsum(float(w) * sys.potential(mu) for mu, w in pi)
    if mu0 is None:
        mu0 = sys.apriori.atoms[0]
    radius = spectral_radius(sys, mu0, radius_steps)
    defect = abs(radius.value - (estimate.value + int_a))
    return PressureReport(
        ln_rho=radius.value,
        h_v=estimate.value,
        int_a=int_a,
        defect=defect,
        entropy=estimate,
        radius_sequence=radius.sequence,
    )
