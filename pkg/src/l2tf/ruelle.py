"""Classical transfer-operator formalism for locally constant potentials.

For a potential depending on the first k symbols, the weighted sum over
shift preimages

    (L f)(x) = sum_a p_a exp(A(a x)) f(a x)

preserves the space of functions depending on the first k-1 symbols, where
it is the matrix M[u -> (a, u_1..u_{k-2})] = p_a exp(A(a u)) on (k-1)-words.
Power iteration on M and its transpose yields the leading eigenvalue, the
positive eigenfunction h, and the left eigenvector, from which two cylinder
weight tables are assembled:

* the eigenmeasure of the dual operator, L* nu = lambda nu, extended from
  the left eigenvector by nu[a w] = p_a exp(A(a w)) nu[w] / lambda;
* the invariant Gibbs measure h * nu, the stationary law of the chain that
  prepends symbol a with probability J(a x), where log J = A + log h(a .)
  - log h - log lambda + log p is the normalized potential.

The two tables coincide exactly when the potential is already normalized.

The weight vector p covers both operator conventions: all ones (the plain
sum over preimages) and a probability vector (the averaged convention used
by the measure-level constructions).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .measures import (
    AtomicMeasure,
    CylinderFunction,
    ResourceLimitError,
    SUPPORT_CAP_ATOMS,
    mk_distance,
    periodic_approx,
    pushforward,
)
from .symbolic import EventuallyPeriodic

POWER_TOLERANCE = 1e-12
POWER_MAX_ITER = 100_000


@dataclass(frozen=True)
class AprioriWeights:
    """Per-symbol weights p_1..p_m of the transfer operator.

    mode "classical": all weights equal 1 (plain sum over preimages);
    mode "apriori": the weights form a probability vector.
    """

    values: np.ndarray
    mode: str

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 2:
            raise ValueError("need one positive weight per symbol, m >= 2")
        if np.any(vals <= 0):
            raise ValueError("weights must be positive")
        if self.mode == "apriori":
            total = vals.sum()
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"apriori weights sum to {total!r}, not 1")
            if total != 1.0:
                vals = vals / total
        elif self.mode != "classical":
            raise ValueError(f"unknown mode {self.mode!r}")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def m(self) -> int:
        return self.values.size

    @classmethod
    def classical(cls, m: int) -> "AprioriWeights":
        return cls(np.ones(m), "classical")

    @classmethod
    def uniform(cls, m: int) -> "AprioriWeights":
        return cls(np.full(m, 1.0 / m), "apriori")

    @classmethod
    def probabilities(cls, ps) -> "AprioriWeights":
        return cls(np.asarray(ps, dtype=float), "apriori")


def transfer_apply(
    pot: CylinderFunction, p: AprioriWeights, f: CylinderFunction
) -> CylinderFunction:
    """Apply y -> sum_a p_a exp(pot(a y)) f(a y); output depth max(depths)-1, at least 1."""
    if pot.m != f.m or pot.m != p.m:
        raise ValueError("alphabet mismatch")
    m = pot.m
    out_depth = max(1, max(pot.depth, f.depth) - 1)
    a_vals = pot.lift(out_depth + 1).values.reshape(m, m**out_depth)
    f_vals = f.lift(out_depth + 1).values.reshape(m, m**out_depth)
    out = (p.values[:, None] * np.exp(a_vals) * f_vals).sum(axis=0)
    return CylinderFunction(m, out_depth, out)


def dual_apply(
    pot: CylinderFunction, p: AprioriWeights, mu: AtomicMeasure
) -> tuple[AtomicMeasure, float]:
    """Dual action on measures: atom x spawns (a, x) with mass w * p_a * exp(pot(a x)).

    Returns the normalized measure together with the total mass, which equals
    the integral of L(1) against mu (hence 1 for a normalized potential).
    """
    if pot.m != mu.m or pot.m != p.m:
        raise ValueError("alphabet mismatch")
    atoms, raw = [], []
    for x, w in mu:
        for a in range(1, mu.m + 1):
            y = x.prepend(a)
            atoms.append(y)
            raw.append(float(w) * p.values[a - 1] * math.exp(pot.value_at(y)))
    mass = math.fsum(raw)
    measure = AtomicMeasure(atoms, [r / mass for r in raw])
    return measure, mass


def _power_iteration(mat: np.ndarray) -> tuple[float, np.ndarray]:
    """Leading eigenpair of a nonnegative primitive matrix, all-ones start."""
    n = mat.shape[0]
    v = np.full(n, 1.0 / n)
    lam = 1.0
    for _ in range(POWER_MAX_ITER):
        w = mat @ v
        lam = w.sum()
        if lam <= 0:
            raise ArithmeticError("power iteration left the positive cone")
        w /= lam
        if np.abs(mat @ w - lam * w).max() <= POWER_TOLERANCE * lam:
            return lam, w
        v = w
    raise ArithmeticError(
        f"power iteration did not reach residual {POWER_TOLERANCE} "
        f"in {POWER_MAX_ITER} iterations"
    )


def _extend_table(
    base: np.ndarray,
    base_depth: int,
    log_factor: CylinderFunction,
    depth: int,
    m: int,
) -> np.ndarray:
    """Grow a cylinder table by prepend factors, or marginalize it down.

    table[(a, w)] = exp(log_factor(a w)) * table[w] going deeper; summing out
    trailing symbols going shallower.
    """
    if depth < base_depth:
        return base.reshape(m**depth, -1).sum(axis=1)
    table = base
    for d in range(base_depth, depth):
        factor = np.exp(log_factor.lift(d + 1).values).reshape(m, m**d)
        table = (factor * table[None, :]).ravel()
    return table


@dataclass(frozen=True)
class PerronData:
    """Leading eigendata of a transfer operator with locally constant potential.

    ``gibbs_weights`` tabulates the invariant Gibbs measure (fixed point of
    the normalized dual) at the requested depth; ``eigenmeasure_weights``
    tabulates the eigenprobability of the unnormalized dual.  The two tables
    coincide when the potential is normalized.  ``log_jac`` is the normalized
    potential, satisfying sum_a J(a x) = 1 in the classical convention.
    """

    potential: CylinderFunction
    apriori: AprioriWeights
    lam: float
    eigenfunction: CylinderFunction
    log_jac: CylinderFunction
    depth: int
    gibbs_weights: np.ndarray
    eigenmeasure_weights: np.ndarray
    _gibbs_base: np.ndarray = field(repr=False)
    _eigen_base: np.ndarray = field(repr=False)

    @property
    def m(self) -> int:
        return self.potential.m

    def gibbs_table(self, depth: int) -> np.ndarray:
        """Cylinder weights of the invariant Gibbs measure at the given depth."""
        return _extend_table(
            self._gibbs_base, self.potential.depth - 1, self.log_jac, depth, self.m
        )

    def eigenmeasure_table(self, depth: int) -> np.ndarray:
        """Cylinder weights of the dual eigenprobability at the given depth."""
        return _extend_table(
            self._eigen_base,
            self.potential.depth - 1,
            _eigen_factor(self.potential, self.apriori, self.lam),
            depth,
            self.m,
        )

    def gibbs_measure(self, depth: int | None = None) -> AtomicMeasure:
        """Shift-periodic representative of the Gibbs measure at the given depth."""
        depth = self.depth if depth is None else depth
        return periodic_approx(self.gibbs_table(depth), depth, self.m)

    def eigen_measure(self, depth: int | None = None) -> AtomicMeasure:
        """Shift-periodic representative of the dual eigenprobability."""
        depth = self.depth if depth is None else depth
        return periodic_approx(self.eigenmeasure_table(depth), depth, self.m)


def _eigen_factor(
    pot: CylinderFunction, p: AprioriWeights, lam: float
) -> CylinderFunction:
    """log of the prepend factor p_a exp(A(a w)) / lam of the dual eigenmeasure."""
    m, k = pot.m, pot.depth
    log_p = np.repeat(np.log(p.values), m ** (k - 1))
    return CylinderFunction(m, k, pot.values + log_p - math.log(lam))


def perron(pot: CylinderFunction, p: AprioriWeights, depth: int) -> PerronData:
    """Perron eigendata of the transfer operator for a depth-k potential.

    Builds the m^{k-1} x m^{k-1} word matrix, runs power iteration to the
    leading eigenvalue and both eigenvectors, and assembles the Gibbs and
    eigenmeasure cylinder tables at the requested output depth.  A depth-1
    potential degenerates to a 1 x 1 matrix on the empty word.
    """
    if pot.m != p.m:
        raise ValueError("alphabet mismatch")
    m, k = pot.m, pot.depth
    nstates = m ** (k - 1)
    if k == 1:
        lam = float(np.dot(p.values, np.exp(pot.values)))
        h = np.array([1.0])
        ell = np.array([1.0])
    else:
        mat = np.zeros((nstates, nstates))
        trunc = m ** (k - 2)
        for u in range(nstates):
            for a in range(m):
                v = a * trunc + u // m
                mat[u, v] += p.values[a] * math.exp(pot.values[a * nstates + u])
        lam, h = _power_iteration(mat)
        _, ell = _power_iteration(mat.T)
    ell = ell / ell.sum()
    h = h / float(ell @ h)

    # log J(a u) = A(a u) + log p_a + log h(a, u-trunc) - log h(u) - log lam
    log_h = np.log(h)
    jac_vals = np.empty(m**k)
    for a in range(m):
        for u in range(nstates):
            v = (a * (m ** (k - 2)) + u // m) if k >= 2 else 0
            jac_vals[a * nstates + u] = (
                pot.values[a * nstates + u]
                + math.log(p.values[a])
                + log_h[v]
                - log_h[u if k >= 2 else 0]
                - math.log(lam)
            )
    # close the row sums sum_a J(a u) to 1 exactly, not just to the power
    # iteration residual; repeated dual applications compound any slack
    row_log = np.log(np.exp(jac_vals).reshape(m, nstates).sum(axis=0))
    jac_vals -= np.tile(row_log, m)
    log_jac = CylinderFunction(m, k, jac_vals)
    h_cf = CylinderFunction(m, max(k - 1, 1), np.repeat(h, m if k == 1 else 1))

    gibbs_base = ell * h
    return PerronData(
        potential=pot,
        apriori=p,
        lam=lam,
        eigenfunction=h_cf,
        log_jac=log_jac,
        depth=depth,
        gibbs_weights=_extend_table(gibbs_base, k - 1, log_jac, depth, m),
        eigenmeasure_weights=_extend_table(
            ell, k - 1, _eigen_factor(pot, p, lam), depth, m
        ),
        _gibbs_base=gibbs_base,
        _eigen_base=ell,
    )


@dataclass(frozen=True)
class DualConvergence:
    """Distances of the dual iterates of a Dirac mass to the Gibbs measure."""

    distances: list[float]
    fitted_ratio: float


def geometric_rate(values) -> float:
    """exp(slope) of the least-squares line through log of the positive values."""
    pts = [(i, math.log(v)) for i, v in enumerate(values) if v > 0]
    if len(pts) < 2:
        return 0.0
    xs = np.array([i for i, _ in pts], dtype=float)
    ys = np.array([y for _, y in pts])
    slope = np.polyfit(xs, ys, 1)[0]
    return float(math.exp(slope))


def dual_converge(
    log_jac: CylinderFunction, x0: EventuallyPeriodic, steps: int
) -> DualConvergence:
    """Iterate the normalized dual from delta_{x0}, measuring distance to the Gibbs measure.

    The reference at step i is the periodic representative of the Gibbs
    cylinder weights at depth max(i, 1); both the iterate and the reference
    then carry identical cylinder masses down to the matched depth, so the
    reported distance differs from the true one by at most 2^{-i}.
    """
    p = AprioriWeights.classical(log_jac.m)
    data = perron(log_jac, p, max(log_jac.depth, 1))
    if abs(data.lam - 1.0) > 1e-8:
        raise ValueError(
            f"potential is not normalized: L(1) has eigenvalue {data.lam!r}"
        )
    current = AtomicMeasure.dirac(x0)
    distances = []
    for i in range(steps + 1):
        ref = data.gibbs_measure(max(i, 1))
        distances.append(mk_distance(current, ref))
        if i < steps:
            current, _ = dual_apply(log_jac, p, current)
    return DualConvergence(distances=distances, fitted_ratio=geometric_rate(distances))


@dataclass(frozen=True)
class ConnectResult:
    """A measure pushed exactly onto the target after ``steps`` shifts."""

    rho: AtomicMeasure
    steps: int
    gibbs_distance_bound: float


def connect(
    pot: CylinderFunction,
    mu2: AtomicMeasure,
    eps: float,
    p: AprioriWeights | None = None,
    gibbs_depth: int = 12,
    max_steps: int = 60,
) -> ConnectResult:
    """Find rho with T^N(rho) = mu2 exactly and rho within eps of the Gibbs measure.

    rho is the N-fold normalized dual image of mu2; each dual application is
    undone exactly by one push-forward, and the iterates converge to the
    Gibbs measure of the potential, so N is chosen as the first step whose
    certified distance bound (measured distance to the depth-``gibbs_depth``
    representative plus the 2^{-depth} representation error) drops below eps.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    p = p or AprioriWeights.classical(pot.m)
    data = perron(pot, p, gibbs_depth)
    ref = data.gibbs_measure(gibbs_depth)
    current = mu2
    for step in range(max_steps + 1):
        bound = mk_distance(current, ref) + 2.0**-gibbs_depth
        if bound < eps:
            return ConnectResult(rho=current, steps=step, gibbs_distance_bound=bound)
        if len(current) * pot.m > SUPPORT_CAP_ATOMS:
            raise ResourceLimitError(
                f"support cap reached at step {step}; achieved distance bound {bound!r}"
            )
        current, _ = dual_apply(data.log_jac, AprioriWeights.classical(pot.m), current)
    raise ResourceLimitError(
        f"no step within {max_steps} reached eps={eps!r}; last bound {bound!r}"
    )


def pushforward_reproduces(rho: AtomicMeasure, steps: int, target: AtomicMeasure,
                           tol: float = 1e-12) -> bool:
    """Check T^steps(rho) == target atom-for-atom (weights within tol)."""
    image = rho
    for _ in range(steps):
        image = pushforward(image)
    if image.atoms != target.atoms:
        return False
    return all(
        abs(float(a) - float(b)) <= tol
        for a, b in zip(image.weights, target.weights)
    )
