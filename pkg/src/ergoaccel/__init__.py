"""Accelerated ergodic averaging.

Weighted Birkhoff averages with a smooth bump weight converge to the ergodic
mean superpolynomially fast on quasi-periodic systems, and at an explicit
exponential rate exp(-xi sqrt(N)) on exponentially decaying waves. This
package computes those averages at controlled arbitrary precision, predicts
the rates, fits observed error decay against the predictions, and probes the
small divisors that govern the quasi-periodic case.
"""

from .errors import (
    ContourError,
    DegenerateRateError,
    DegenerateWeightError,
    DivergenceError,
    DomainError,
    ErgoaccelError,
    InsufficientDataError,
    QuadratureConvergenceError,
    SeriesAbortedError,
    SpecificationError,
)
from .averaging import (
    AverageResult,
    ComposedWave,
    ContinuousWave,
    ErrorSeries,
    LeadingCoefficient,
    OrbitProblem,
    TorusObservable,
    continuous_leading_coefficient,
    continuous_unweighted_average,
    continuous_unweighted_closed_form,
    continuous_weighted_average,
    dw_average_closed_form,
    dw_leading_coefficient,
    error_series,
    unweighted_average,
    weighted_average,
    weighted_birkhoff,
)
from .generators import (
    DecayingWaveSpec,
    LinearSystemSpec,
    MapSpec,
    ObservableSpec,
    SuperpositionSpec,
    TorusRotationSpec,
    composed_term,
    decaying_wave_term,
    evaluate_observable,
    exact_mean,
    map_orbit,
    superposition_term,
    torus_orbit_point,
)
from .precision import Precision, QuadratureConfig, integrate, precision_floor, sum_ordered
from .rates import (
    RateFit,
    RatePrediction,
    fit_log_slope,
    fit_rate,
    mixed_regularity_exponent,
    quasi_periodic_exponent,
    xi,
    xi_con,
    xi_kappa,
    xi_linear_system,
    xi_poly,
    xi_trig,
    xi_width,
)
from .smalldiv import (
    ContinuedFraction,
    NonresonanceScan,
    continued_fraction,
    nonresonance_scan,
    preset_rotation,
    small_divisor,
    torus_norm,
)
from .weights import (
    WeightSpec,
    cauchy_schlomilch_phi,
    derivative_norm_growth,
    eval_kernel,
    kernel_derivative,
    l1_decay_norm,
    normalizer,
    psi_identity,
    weight_sum,
)

__version__ = "0.1.0"
