"""Finitely supported probabilities on the full shift and their dynamics.

The measures here are finite convex combinations of Dirac masses at
eventually periodic points.  That class is closed under every operation in
this module: the push-forward by the shift, the prefix-splicing convolution,
cylinder quantization, and the periodic approximation built from a table of
cylinder weights.  Atoms are merged under exact symbolic equality only;
weights are doubles by default, with ``fractions.Fraction`` weights passing
through every operation unchanged for bit-exact small instances.

Monge-Kantorovich distances between measures on the shift are computed by an
exact scale decomposition rather than a linear program.  The metric
d(x, y) = 2^{-k} is an ultrametric realised by the cylinder tree with the
edge below the depth-j word w carrying weight 2^{-(j+2)} and mass
|mu[w] - nu[w]|, so

    d_MK(mu, nu) = sum_{j>=1} 2^{-(j+2)} * sum_{|w|=j} |mu[w] - nu[w]|.

For atomic measures the inner sums are eventually constant (once every two
distinct atoms are separated by their prefixes), which closes the series in
finitely many terms.  The value agrees with the transportation LP of
:mod:`l2tf.transport`; the test suite cross-checks the two engines.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .symbolic import (
    CylinderWord,
    EventuallyPeriodic,
    all_words,
    cylinder_of,
    representative,
    word_from_index,
    word_index,
)

logger = logging.getLogger(__name__)

INGEST_TOLERANCE = 1e-6
# below this slack the weights are kept bit-identical, so permutation-like
# operations (push-forward of a periodic orbit, relabelling) are exact
RENORMALIZE_THRESHOLD = 1e-12


def normalize_weights(weights, tolerance: float = INGEST_TOLERANCE):
    """Shared ingestion pass: reject far-off sums, renormalize mild drift.

    Sub-ulp float drift is left untouched; exact (Fraction) weights are
    divided whenever the sum differs from 1, which is lossless.
    """
    total = sum(weights)
    if abs(float(total) - 1.0) > tolerance:
        raise ValueError(f"weights sum to {float(total)!r}, not 1")
    if total != 1:
        exact = not isinstance(total, float)
        if exact or abs(float(total) - 1.0) > RENORMALIZE_THRESHOLD:
            return tuple(w / total for w in weights)
    return tuple(weights)

# Convolutions multiply support sizes; results larger than the cap are
# quantized at the configured depth (error at most 2^-depth) with a warning.
SUPPORT_CAP_ATOMS = 10_000
SUPPORT_CAP_DEPTH = 16


def configure_support_cap(max_atoms: int, quantize_depth: int) -> None:
    global SUPPORT_CAP_ATOMS, SUPPORT_CAP_DEPTH
    SUPPORT_CAP_ATOMS = int(max_atoms)
    SUPPORT_CAP_DEPTH = int(quantize_depth)


class ResourceLimitError(RuntimeError):
    """A computation exceeded its configured support or branch budget."""


def _weight_sort_key(w):
    return float(w)


class AtomicMeasure:
    """A probability sum_i w_i * delta_{x_i} with distinct symbolic atoms.

    Atoms are deduplicated by exact sequence equality (never by numeric
    closeness) and stored sorted, so equal measures compare equal
    structurally.  Weights may be floats or Fractions; do not mix the two
    within one computation.
    """

    __slots__ = ("m", "atoms", "weights")

    def __init__(self, atoms, weights, *, _merged: bool = False):
        atoms = tuple(atoms)
        weights = tuple(weights)
        if not atoms:
            raise ValueError("a measure needs at least one atom")
        if len(atoms) != len(weights):
            raise ValueError("atoms and weights must have matching lengths")
        m = atoms[0].m
        for x in atoms:
            if x.m != m:
                raise ValueError("all atoms must share one alphabet")
        if not _merged:
            acc: dict[EventuallyPeriodic, object] = {}
            for x, w in zip(atoms, weights):
                if w <= 0:
                    raise ValueError(f"weights must be positive, got {w!r}")
                if x in acc:
                    acc[x] = acc[x] + w
                else:
                    acc[x] = w
            items = sorted(acc.items(), key=lambda kv: kv[0].sort_key())
            atoms = tuple(x for x, _ in items)
            weights = tuple(w for _, w in items)
        weights = normalize_weights(weights)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)

    def __setattr__(self, name, value):
        raise AttributeError("AtomicMeasure is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def dirac(cls, x: EventuallyPeriodic) -> "AtomicMeasure":
        return cls((x,), (1.0,))

    @classmethod
    def mix(cls, pairs) -> "AtomicMeasure":
        """Convex combination sum_i t_i * mu_i given (t_i, mu_i) pairs."""
        atoms, weights = [], []
        for t, mu in pairs:
            for x, w in zip(mu.atoms, mu.weights):
                atoms.append(x)
                weights.append(t * w)
        return cls(atoms, weights)

    # -- access ------------------------------------------------------------

    def __len__(self) -> int:
        return len(self.atoms)

    def __iter__(self):
        return iter(zip(self.atoms, self.weights))

    def weight_of(self, x: EventuallyPeriodic):
        for atom, w in zip(self.atoms, self.weights):
            if atom == x:
                return w
        return 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, AtomicMeasure):
            return NotImplemented
        return (
            self.m == other.m
            and self.atoms == other.atoms
            and self.weights == other.weights
        )

    def __hash__(self) -> int:
        return hash(self.cache_key())

    def cache_key(self) -> tuple:
        """Hashable, byte-stable identity of the measure."""
        return tuple(
            (x.prefix, x.period, w.hex() if isinstance(w, float) else str(w))
            for x, w in zip(self.atoms, self.weights)
        )

    def __repr__(self) -> str:
        parts = ", ".join(f"{float(w):.6g}*d({x.to_text()})" for x, w in self)
        return f"AtomicMeasure[{parts}]"

    @property
    def exact(self) -> bool:
        return all(isinstance(w, Fraction) for w in self.weights)

    def cylinder_weights(self, depth: int) -> np.ndarray:
        """The vector of cylinder masses mu[w] over depth-``depth`` words."""
        out = np.zeros(self.m**depth)
        for x, w in self:
            out[word_index(x.first(depth), self.m)] += float(w)
        return out

    # -- JSON --------------------------------------------------------------

    def to_json(self) -> list[dict]:
        return [
            {"point": x.to_text(), "weight": float(w)}
            for x, w in zip(self.atoms, self.weights)
        ]

    @classmethod
    def from_json(cls, data, m: int) -> "AtomicMeasure":
        atoms = [EventuallyPeriodic.from_text(rec["point"], m) for rec in data]
        weights = [rec["weight"] for rec in data]
        return cls(atoms, weights)


@dataclass(frozen=True)
class CylinderFunction:
    """A function on the shift depending on the first ``depth`` symbols only.

    Values are tabulated over the m^depth words in lexicographic order.
    Potentials, Jacobian logarithms and test functions are all stored this
    way; integration against an atomic measure is then an exact finite sum.
    """

    m: int
    depth: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if self.depth < 1:
            raise ValueError("cylinder functions have depth >= 1")
        if vals.shape != (self.m**self.depth,):
            raise ValueError(
                f"expected {self.m ** self.depth} values for depth "
                f"{self.depth}, got shape {vals.shape}"
            )
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, m: int, value: float, depth: int = 1) -> "CylinderFunction":
        return cls(m, depth, np.full(m**depth, float(value)))

    @classmethod
    def indicator(cls, word: tuple[int, ...], m: int) -> "CylinderFunction":
        vals = np.zeros(m ** len(word))
        vals[word_index(word, m)] = 1.0
        return cls(m, len(word), vals)

    def value_at(self, x: EventuallyPeriodic) -> float:
        return float(self.values[word_index(x.first(self.depth), self.m)])

    def value_at_word(self, word) -> float:
        """Value on the cylinder of ``word`` (length >= depth)."""
        if len(word) < self.depth:
            raise ValueError("word shorter than the function's depth")
        return float(self.values[word_index(word[: self.depth], self.m)])

    def lift(self, depth: int) -> "CylinderFunction":
        """The same function tabulated at a greater depth."""
        if depth < self.depth:
            raise ValueError("can only lift to a greater or equal depth")
        if depth == self.depth:
            return self
        reps = self.m ** (depth - self.depth)
        return CylinderFunction(self.m, depth, np.repeat(self.values, reps))

    def __add__(self, other):
        if isinstance(other, CylinderFunction):
            d = max(self.depth, other.depth)
            return CylinderFunction(
                self.m, d, self.lift(d).values + other.lift(d).values
            )
        return CylinderFunction(self.m, self.depth, self.values + float(other))

    def __sub__(self, other):
        if isinstance(other, CylinderFunction):
            d = max(self.depth, other.depth)
            return CylinderFunction(
                self.m, d, self.lift(d).values - other.lift(d).values
            )
        return CylinderFunction(self.m, self.depth, self.values - float(other))

    def __mul__(self, scalar):
        return CylinderFunction(self.m, self.depth, self.values * float(scalar))

    __rmul__ = __mul__

    def to_json(self) -> dict:
        return {"depth": self.depth, "values": [float(v) for v in self.values]}

    @classmethod
    def from_json(cls, data, m: int) -> "CylinderFunction":
        return cls(m, int(data["depth"]), np.asarray(data["values"], dtype=float))


# -- operations -------------------------------------------------------------


def pushforward(mu: AtomicMeasure) -> AtomicMeasure:
    """The image of mu under the shift: atoms move, weights follow, equal images merge."""
    return AtomicMeasure((x.shift() for x in mu.atoms), mu.weights)


def pushforward_iter(mu: AtomicMeasure, steps: int) -> AtomicMeasure:
    for _ in range(steps):
        mu = pushforward(mu)
    return mu


def integrate(f: CylinderFunction, mu: AtomicMeasure) -> float:
    """The exact integral of a locally constant function against an atomic measure."""
    if f.m != mu.m:
        raise ValueError("alphabet mismatch between function and measure")
    return math.fsum(float(w) * f.value_at(x) for x, w in mu)


def convolve(eta: AtomicMeasure, mu: AtomicMeasure, n: int) -> AtomicMeasure:
    """Splice the first n symbols of eta-atoms onto mu-atoms, with product weights."""
    if n < 1:
        raise ValueError("convolution order must be >= 1")
    if eta.m != mu.m:
        raise ValueError("alphabet mismatch between measures")
    atoms, weights = [], []
    for x, wx in eta:
        head = x.first(n)
        for y, wy in mu:
            atoms.append(y.prepend_word(head))
            weights.append(wx * wy)
    out = AtomicMeasure(atoms, weights)
    if len(out) > SUPPORT_CAP_ATOMS:
        logger.warning(
            "convolution support %d exceeds cap %d; quantizing at depth %d "
            "(distance error <= %g)",
            len(out),
            SUPPORT_CAP_ATOMS,
            SUPPORT_CAP_DEPTH,
            2.0**-SUPPORT_CAP_DEPTH,
        )
        out = quantize(out, SUPPORT_CAP_DEPTH)
    return out


def quantize(mu: AtomicMeasure, k: int) -> AtomicMeasure:
    """Replace each atom by the periodic representative of its depth-k cylinder."""
    if k < 1:
        raise ValueError("quantization depth must be >= 1")
    return AtomicMeasure(
        (representative(cylinder_of(x, k)) for x in mu.atoms), mu.weights
    )


def periodic_approx(weights, k: int, m: int) -> AtomicMeasure:
    """The shift-periodic measure carrying a given table of depth-k cylinder weights.

    The single long word z = alpha_1 alpha_2 ... alpha_{m^k} concatenates all
    depth-k words in lexicographic order; atom j is the periodic point
    obtained by starting z at block j, and it carries the weight of the j-th
    cylinder.  The result is periodic for the push-forward map with period
    k * m^k, and its depth-k cylinder weights reproduce the input table.
    """
    if k < 1:
        raise ValueError("depth must be >= 1")
    table = list(weights)
    if len(table) != m**k:
        raise ValueError(f"expected {m ** k} weights, got {len(table)}")
    if any(w < 0 for w in table):
        raise ValueError("cylinder weights must be nonnegative")
    total = sum(table)
    if abs(float(total) - 1.0) > INGEST_TOLERANCE:
        raise ValueError(f"cylinder weights sum to {float(total)!r}, not 1")
    z: list[int] = []
    for word in all_words(m, k):
        z.extend(word)
    atoms, ws = [], []
    for j in range(m**k):
        if table[j] == 0:
            continue
        rot = tuple(z[j * k :] + z[: j * k])
        atoms.append(EventuallyPeriodic.periodic(rot, m))
        ws.append(table[j])
    return AtomicMeasure(atoms, ws)


def dirac_lift(mu: AtomicMeasure):
    """The measure on measures placing weight w_i on the Dirac at atom x_i."""
    from .level2 import Level2Measure

    return Level2Measure(
        tuple(AtomicMeasure.dirac(x) for x in mu.atoms), mu.weights
    )


def mk_distance(mu: AtomicMeasure, nu: AtomicMeasure) -> float:
    """Exact Monge-Kantorovich distance on the shift via scale decomposition.

    Equal to the transportation-LP value for the ground metric d(x, y) =
    2^{-k}; see the module docstring for the tree identity this computes.
    """
    if mu.m != nu.m:
        raise ValueError("alphabet mismatch between measures")
    net: dict[EventuallyPeriodic, float] = {}
    for x, w in mu:
        net[x] = net.get(x, 0.0) + float(w)
    for y, w in nu:
        net[y] = net.get(y, 0.0) - float(w)
    entries = [(x, d) for x, d in net.items() if d != 0.0]
    if not entries:
        return 0.0
    total = 0.0
    resolved_abs = 0.0  # points already separated keep contributing |net|
    groups = [entries]
    depth = 0
    while groups:
        depth += 1
        split: dict[tuple[int, int], list] = {}
        for gi, group in enumerate(groups):
            for x, d in group:
                split.setdefault((gi, x.symbol_at(depth)), []).append((x, d))
        level = resolved_abs
        groups = []
        for group in split.values():
            level += abs(sum(d for _, d in group))
            if len(group) == 1:
                resolved_abs += abs(group[0][1])
            else:
                groups.append(group)
        total += 2.0 ** -(depth + 2) * level
    # beyond full separation every deeper scale contributes resolved_abs
    total += 2.0 ** -(depth + 2) * resolved_abs
    return total
