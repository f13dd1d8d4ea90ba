"""Exact and Monte Carlo spectral statistics for products of random matrices."""

from .specfun import (
    ContourError,
    ConvergenceError,
    DomainError,
    MeijerParams,
    PrecisionError,
    RangeError,
    UnsupportedParamsError,
    meijer_g,
    meijer_g_many,
    pfq,
)
from .structured import SizeError, logdet_scaled, permanent, pfaffian
from .ensembles import (
    FactorSpec,
    ProductSpec,
    SpectrumSample,
    ginibre_spec,
    inverse_mixed_spec,
    make_rng,
    realize_product,
    sample_batch,
    truncated_spec,
)
from .exact_ev import (
    density,
    eigen_model,
    hole_probability,
    prob_all_real,
    radial_cdf,
    radial_density,
    radial_pdf,
)
from .exact_sv import (
    check_multiple_orthogonality,
    check_recurrence,
    gram_matrix,
    kernel_contour,
    kernel_sum,
    sv_density,
    sv_system,
)
from .asymptotics import (
    KERNEL_KINDS,
    LimitKernel,
    bessel_kernel,
    converge_hard_edge,
    converge_origin,
    eval_limit_kernel,
    hard_edge_kernel_for,
    origin_kernel_for,
    weak_kernel_density,
)
from .exponents import (
    ExponentStatistics,
    exact_exponents,
    mc_lyapunov,
    mc_stability,
    newman_partial_sum,
    permanental_jpdf,
)
from .harness import ExperimentConfig, load_config, run

__version__ = "0.1.0"
