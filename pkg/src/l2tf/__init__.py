"""Thermodynamic formalism for the push-forward map on the full shift.

Exact symbolic points and atomic measures, discrete optimal transport,
the classical transfer operator with Perron eigendata, and the lift of the
formalism to measures on the space of measures: the spliced-prefix
convolution, the measure-level transfer operator with its spectral radius,
eigenfunction and eigenprobability, holonomic measures, variational entropy,
and the pressure identity.
"""

from .symbolic import (
    Alphabet,
    CylinderWord,
    EventuallyPeriodic,
    all_words,
    cylinder_of,
    distance,
    equals,
    representative,
    shift,
    word_from_index,
    word_index,
)
from .transport import DiscreteTransportProblem, TransportPlan, solve
from .measures import (
    AtomicMeasure,
    CylinderFunction,
    ResourceLimitError,
    configure_support_cap,
    convolve,
    dirac_lift,
    integrate,
    mk_distance,
    periodic_approx,
    pushforward,
    pushforward_iter,
    quantize,
)
from .ruelle import (
    AprioriWeights,
    ConnectResult,
    DualConvergence,
    PerronData,
    connect,
    dual_apply,
    dual_converge,
    geometric_rate,
    perron,
    pushforward_reproduces,
    transfer_apply,
)
from .level2 import (
    BPowerEngine,
    DualityReport,
    GibbsConstruction,
    IfsmSystem,
    Level2Functional,
    Level2Measure,
    Level2Potential,
    MeasureFunction,
    b_apply,
    b_power,
    barycenter,
    duality_diagnostic,
    eigenfunction_estimate,
    gibbs_from_level1,
    mk2_distance,
    periodic_preference,
    phi,
    spectral_radius,
    t_star,
    uniform_constant_dirac_apriori,
)
from .holonomic import (
    EntropyEstimate,
    HolonomicMeasure,
    PressureReport,
    build_holonomic,
    cylinder_test_basis,
    holonomy_residual,
    normalized_potential,
    pressure_check,
    variational_entropy,
)

__version__ = "0.1.0"
