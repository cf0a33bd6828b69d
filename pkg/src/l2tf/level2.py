"""The transfer operator lifted to measures on the space of measures.

States are finitely supported probabilities mu on the shift; the parameter
set is another copy of the same space, carrying a finitely supported
a priori probability.  The maps are

    phi_nu(mu) = pushforward(nu) *_n mu,

splicing the first n post-shift symbols of nu onto mu, and the operator is

    B(F)(mu) = sum_i w_i exp(A(phi_{nu_i}(mu))) F(phi_{nu_i}(mu))

over the atoms nu_i of the a priori measure.  Powers of B applied to the
constant 1 give the spectral radius through (1/N) log B^N(1); the recursion
is memoized on quantized intermediate measures, which is lossless for affine
potentials because a depth-k potential sees an argument measure only through
its depth-(k-n) cylinder weights.

When the a priori measure is uniform on the m Dirac masses at constant
sequences and the potential is affine, the operator restricted to Dirac
states reduces to the averaged one-level transfer operator, and its
eigenprobability is the Dirac lift of the one-level dual eigenmeasure; that
construction, the push-forward action on level-2 measures, barycenters,
nested transport distances, and the uniform measures on periodic Dirac
orbits are all provided here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from . import transport
from .measures import (
    AtomicMeasure,
    CylinderFunction,
    ResourceLimitError,
    convolve,
    dirac_lift,
    integrate,
    mk_distance,
    normalize_weights,
    pushforward,
    quantize,
)
from .ruelle import AprioriWeights, PerronData, perron
from .symbolic import EventuallyPeriodic, all_words


class Level2Measure:
    """A finitely supported probability whose atoms are atomic measures."""

    __slots__ = ("m", "atoms", "weights")

    def __init__(self, atoms, weights):
        atoms = tuple(atoms)
        weights = tuple(weights)
        if not atoms:
            raise ValueError("a measure needs at least one atom")
        if len(atoms) != len(weights):
            raise ValueError("atoms and weights must have matching lengths")
        m = atoms[0].m
        for mu in atoms:
            if mu.m != m:
                raise ValueError("all atoms must share one alphabet")
        acc: dict[tuple, list] = {}
        for mu, w in zip(atoms, weights):
            if w <= 0:
                raise ValueError(f"weights must be positive, got {w!r}")
            key = mu.cache_key()
            if key in acc:
                acc[key][1] = acc[key][1] + w
            else:
                acc[key] = [mu, w]
        items = sorted(acc.items(), key=lambda kv: kv[0])
        atoms = tuple(mu for _, (mu, _) in items)
        weights = normalize_weights(tuple(w for _, (_, w) in items))
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)

    def __setattr__(self, name, value):
        raise AttributeError("Level2Measure is immutable")

    def __len__(self) -> int:
        return len(self.atoms)

    def __iter__(self):
        return iter(zip(self.atoms, self.weights))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Level2Measure):
            return NotImplemented
        return (
            self.m == other.m
            and self.atoms == other.atoms
            and self.weights == other.weights
        )

    def __hash__(self) -> int:
        return hash(tuple((mu.cache_key(), float(w)) for mu, w in self))

    def __repr__(self) -> str:
        parts = ", ".join(f"{float(w):.6g}*d[{mu!r}]" for mu, w in self)
        return f"Level2Measure[{parts}]"

    def to_json(self) -> list[dict]:
        return [
            {"measure": mu.to_json(), "weight": float(w)}
            for mu, w in zip(self.atoms, self.weights)
        ]

    @classmethod
    def from_json(cls, data, m: int) -> "Level2Measure":
        atoms = [AtomicMeasure.from_json(rec["measure"], m) for rec in data]
        weights = [rec["weight"] for rec in data]
        return cls(atoms, weights)


class MeasureFunction:
    """A real function of measures: either affine F(rho) = integral of f, or a callable.

    Affine instances are exact on atomic measures; general instances must be
    deterministic and bounded on the measures they are evaluated at.
    """

    __slots__ = ("kind", "cf", "fn")

    def __init__(self, kind: str, cf: CylinderFunction | None, fn):
        self.kind = kind
        self.cf = cf
        self.fn = fn

    @classmethod
    def affine(cls, cf: CylinderFunction) -> "MeasureFunction":
        return cls("affine", cf, None)

    @classmethod
    def from_callable(cls, fn: Callable[[AtomicMeasure], float]) -> "MeasureFunction":
        return cls("general", None, fn)

    @classmethod
    def one(cls, m: int) -> "MeasureFunction":
        return cls.affine(CylinderFunction.constant(m, 1.0))

    def __call__(self, rho: AtomicMeasure) -> float:
        if self.kind == "affine":
            return integrate(self.cf, rho)
        return float(self.fn(rho))


Level2Potential = MeasureFunction
Level2Functional = MeasureFunction


def uniform_constant_dirac_apriori(m: int) -> Level2Measure:
    """(1/m) sum_j delta at the Dirac mass of the constant sequence (j, j, ...)."""
    atoms = [
        AtomicMeasure.dirac(EventuallyPeriodic.constant(j, m)) for j in range(1, m + 1)
    ]
    return Level2Measure(atoms, [1.0 / m] * m)


@dataclass(frozen=True)
class IfsmSystem:
    """Alphabet size, convolution order, a priori measure, and potential."""

    m: int
    n: int
    apriori: Level2Measure
    potential: MeasureFunction

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("convolution order must be >= 1")
        if self.apriori.m != self.m:
            raise ValueError("a priori measure alphabet mismatch")
        if self.potential.kind == "affine" and self.potential.cf.m != self.m:
            raise ValueError("potential alphabet mismatch")

    @classmethod
    def constant_apriori(
        cls, potential: CylinderFunction, n: int = 1
    ) -> "IfsmSystem":
        """System with a priori uniform on the Dirac masses at constant sequences."""
        return cls(
            m=potential.m,
            n=n,
            apriori=uniform_constant_dirac_apriori(potential.m),
            potential=MeasureFunction.affine(potential),
        )

    def with_apriori(self, apriori: Level2Measure) -> "IfsmSystem":
        return IfsmSystem(self.m, self.n, apriori, self.potential)

    def with_potential(self, potential: MeasureFunction) -> "IfsmSystem":
        return IfsmSystem(self.m, self.n, self.apriori, potential)


def phi(nu: AtomicMeasure, mu: AtomicMeasure, n: int) -> AtomicMeasure:
    """The parameterised map: push nu forward, then splice its first n symbols onto mu."""
    return convolve(pushforward(nu), mu, n)


def b_apply(sys: IfsmSystem, func: MeasureFunction, mu: AtomicMeasure) -> float:
    """One application of the operator at mu; exact finite sum over the a priori atoms."""
    total = []
    for nu, w in sys.apriori:
        image = phi(nu, mu, sys.n)
        total.append(float(w) * math.exp(sys.potential(image)) * func(image))
    return math.fsum(total)


class BPowerEngine:
    """Memoized evaluation of B^N(1) over the branch tree of a priori atoms.

    Intermediate measures are quantized before recursing; for an affine
    depth-k potential the default quantization depth max(k - n, 1) is
    lossless, because every potential evaluation along the tree reads at most
    the first k - n symbols of the argument's atoms.  For general potentials
    the default depth grows with the horizon and the evaluation is subject to
    the configured state budget.
    """

    def __init__(
        self,
        sys: IfsmSystem,
        quant_depth: int | None = None,
        max_states: int = 500_000,
    ):
        self.sys = sys
        self.max_states = max_states
        self.quant_depth = quant_depth
        self._memo: dict[tuple, float] = {}

    def _default_depth(self, mu: AtomicMeasure, steps: int) -> int:
        if self.sys.potential.kind == "affine":
            return max(self.sys.potential.cf.depth - self.sys.n, 1)
        described = max(len(x.prefix) + len(x.period) for x in mu.atoms)
        return described + self.sys.n * steps

    def value(self, steps: int, mu: AtomicMeasure) -> float:
        if steps < 0:
            raise ValueError("steps must be >= 0")
        depth = (
            self.quant_depth
            if self.quant_depth is not None
            else self._default_depth(mu, steps)
        )
        return self._value(steps, quantize(mu, depth), depth)

    def _value(self, steps: int, mu: AtomicMeasure, depth: int) -> float:
        if steps == 0:
            return 1.0
        key = (steps, mu.cache_key())
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        if len(self._memo) >= self.max_states:
            raise ResourceLimitError(
                f"memo budget {self.max_states} exhausted at {steps} remaining steps"
            )
        parts = []
        for nu, w in self.sys.apriori:
            image = phi(nu, mu, self.sys.n)
            weight = float(w) * math.exp(self.sys.potential(image))
            parts.append(weight * self._value(steps - 1, quantize(image, depth), depth))
        out = math.fsum(parts)
        self._memo[key] = out
        return out


def b_power(
    sys: IfsmSystem,
    steps: int,
    mu: AtomicMeasure,
    quant_depth: int | None = None,
    max_states: int = 500_000,
) -> float:
    """B^N(1)(mu) by memoized recursion over the branch tree."""
    return BPowerEngine(sys, quant_depth, max_states).value(steps, mu)


@dataclass(frozen=True)
class SpectralRadiusEstimate:
    """The sequence (1/N') log B^{N'}(1)(mu0) for N' <= N and its final value."""

    sequence: list[tuple[int, float]]
    value: float


def spectral_radius(
    sys: IfsmSystem,
    mu0: AtomicMeasure,
    steps: int,
    quant_depth: int | None = None,
    max_states: int = 500_000,
) -> SpectralRadiusEstimate:
    """log of the spectral radius via (1/N) log B^N(1)(mu0), with the whole run reported."""
    if steps < 1:
        raise ValueError("need at least one step")
    engine = BPowerEngine(sys, quant_depth, max_states)
    seq = []
    for n in range(1, steps + 1):
        seq.append((n, math.log(engine.value(n, mu0)) / n))
    return SpectralRadiusEstimate(sequence=seq, value=seq[-1][1])


@dataclass(frozen=True)
class EigenfunctionEstimate:
    """Values of lambda^{-N} B^N(1) at the queried measures, with eigen-residuals."""

    values: list[float]
    residuals: list[float]


def eigenfunction_estimate(
    sys: IfsmSystem,
    lam: float,
    steps: int,
    queries,
    quant_depth: int | None = None,
) -> EigenfunctionEstimate:
    """Approximate the positive eigenfunction pointwise by normalized powers.

    The residual at each query is |B(h_N)(mu) - lam h_N(mu)|, computed with
    one extra application of the operator.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    engine = BPowerEngine(sys, quant_depth)
    values, residuals = [], []
    for mu in queries:
        h_n = engine.value(steps, mu) / lam**steps
        b_h = engine.value(steps + 1, mu) / lam**steps
        values.append(h_n)
        residuals.append(abs(b_h - lam * h_n))
    return EigenfunctionEstimate(values=values, residuals=residuals)


def _require_constant_dirac_apriori(sys: IfsmSystem) -> None:
    if sys.n != 1:
        raise ValueError("the one-level reduction needs convolution order 1")
    if sys.potential.kind != "affine":
        raise ValueError("the one-level reduction needs an affine potential")
    expected = uniform_constant_dirac_apriori(sys.m)
    if len(sys.apriori) != sys.m:
        raise ValueError("a priori must be uniform on the m constant Diracs")
    for (mu, w), (ref, w_ref) in zip(sys.apriori, expected):
        if mu.atoms != ref.atoms or abs(float(w) - float(w_ref)) > 1e-12:
            raise ValueError("a priori must be uniform on the m constant Diracs")


@dataclass(frozen=True)
class GibbsConstruction:
    """Eigenprobability of the dual level-2 operator, via the one-level reduction.

    ``level1_measure`` is the periodic representative of the one-level dual
    eigenmeasure at the construction depth; ``level2_measure`` is its Dirac
    lift, which satisfies the eigen-identity
    lam * int F dPi = int B(F) dPi for affine test functionals.
    """

    level2_measure: Level2Measure
    eigenvalue: float
    level1_measure: AtomicMeasure
    perron: PerronData
    depth: int


def gibbs_from_level1(sys: IfsmSystem, depth: int) -> GibbsConstruction:
    """Construct the level-2 eigenprobability from one-level Perron data."""
    _require_constant_dirac_apriori(sys)
    data = perron(sys.potential.cf, AprioriWeights.uniform(sys.m), depth)
    mu_b = data.eigen_measure(depth)
    return GibbsConstruction(
        level2_measure=dirac_lift(mu_b),
        eigenvalue=data.lam,
        level1_measure=mu_b,
        perron=data,
        depth=depth,
    )


def t_star(pi: Level2Measure) -> Level2Measure:
    """Push every atom forward by the shift; weights follow, equal images merge."""
    return Level2Measure(tuple(pushforward(mu) for mu in pi.atoms), pi.weights)


def barycenter(pi: Level2Measure) -> AtomicMeasure:
    """The level-1 measure averaging the atoms of a level-2 measure."""
    return AtomicMeasure.mix(list(zip(pi.weights, pi.atoms)))


def mk2_distance(pi1: Level2Measure, pi2: Level2Measure) -> float:
    """Transport distance between level-2 measures over the level-1 transport metric."""
    if pi1.m != pi2.m:
        raise ValueError("alphabet mismatch")
    return transport.mk_distance(
        pi1.atoms, pi1.weights, pi2.atoms, pi2.weights, mk_distance
    )


def periodic_preference(n: int, m: int, max_atoms: int = 10_000) -> Level2Measure:
    """Uniform measure on the Dirac lifts of all m^n points of shift-period n."""
    count = m**n
    if count > max_atoms:
        raise ResourceLimitError(f"{count} atoms exceed the cap {max_atoms}")
    atoms = [
        AtomicMeasure.dirac(EventuallyPeriodic.periodic(word, m))
        for word in all_words(m, n)
    ]
    return Level2Measure(atoms, [1.0 / count] * count)


@dataclass(frozen=True)
class DualityReport:
    """Both sides of the a-priori/eigenprobability interchange, with no verdict.

    ``eigenvalue_forward`` integrates B(1) against the eigenprobability;
    ``eigenvalue_interchanged`` evaluates the same pairing with the two
    measures' roles swapped (outer integral over the a priori measure), which
    is the identity behind the interchange argument.  The spectral radius of
    the operator whose a priori measure is the eigenprobability, estimated by
    powers, is reported separately: it is a different quantity and need not
    match.  Barycenters of both measures and their distance are reported but
    not asserted equal.
    """

    eigenvalue: float
    eigenvalue_forward: float
    eigenvalue_interchanged: float
    swapped_radius_log: float
    barycenter_apriori: AtomicMeasure
    barycenter_eigen: AtomicMeasure
    barycenter_distance: float

    def to_dict(self) -> dict:
        return {
            "eigenvalue": self.eigenvalue,
            "eigenvalue_forward": self.eigenvalue_forward,
            "eigenvalue_interchanged": self.eigenvalue_interchanged,
            "swapped_radius_log": self.swapped_radius_log,
            "barycenter_apriori": self.barycenter_apriori.to_json(),
            "barycenter_eigen": self.barycenter_eigen.to_json(),
            "barycenter_distance": self.barycenter_distance,
        }


def duality_diagnostic(
    sys: IfsmSystem, depth: int = 5, power_steps: int = 20
) -> DualityReport:
    """Compute both barycenters and both interchange eigenvalues; assert nothing."""
    construction = gibbs_from_level1(sys, depth)
    pi_hat = construction.level2_measure
    one = MeasureFunction.one(sys.m)

    forward = math.fsum(
        float(w) * b_apply(sys, one, mu) for mu, w in pi_hat
    )
    interchanged = math.fsum(
        float(w0)
        * math.fsum(
            float(w_hat) * math.exp(sys.potential(phi(nu, mu_hat, sys.n)))
            for mu_hat, w_hat in pi_hat
        )
        for nu, w0 in sys.apriori
    )
    swapped = spectral_radius(
        sys.with_apriori(pi_hat),
        sys.apriori.atoms[0],
        power_steps,
    )
    m_apriori = barycenter(sys.apriori)
    m_eigen = barycenter(pi_hat)
    return DualityReport(
        eigenvalue=construction.eigenvalue,
        eigenvalue_forward=forward,
        eigenvalue_interchanged=interchanged,
        swapped_radius_log=swapped.value,
        barycenter_apriori=m_apriori,
        barycenter_eigen=m_eigen,
        barycenter_distance=mk_distance(m_apriori, m_eigen),
    )
