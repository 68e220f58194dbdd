"""Exact and asymptotic spectral data for Harper's equation at rational flux P/Q.

The discriminant Sigma(x) is a degree-Q polynomial whose preimage of [-4, 4]
is the spectrum; everything here is built on evaluating it in extended
precision.
"""

from .asymptotics import (
    AsymptoticReport,
    MuNu,
    approx_A_even,
    approx_A_odd,
    central_band_width_asym,
    dos,
    mu_nu,
    sigma_prime_zero_asym,
    sigma_prime_zero_asym_p1,
    sigma_prime_zero_report,
    thouless_w,
    uniform_away,
    uniform_center,
    w_d_asym,
)
from .bands import (
    Band,
    SpectrumSummary,
    band_density_check,
    centermost_lower_bound_report,
    cluster_stats,
    compute_bands,
    hausdorff_wd,
)
from .errors import (
    ClusteringAmbiguous,
    DecompositionError,
    DomainError,
    EdgeNotFound,
    HarperError,
    NoBracket,
    NonConvergence,
    NotCoprime,
    ParityError,
    PrecisionTooLow,
    SingularityError,
)
from .exactdisc import (
    DiscriminantModel,
    DiscriminantValue,
    FluxRatio,
    Route,
    a_factor,
    build_model,
    flux_ratio,
    last_wilkinson_sum,
    s_direct,
    s_regrouped,
    sigma_det,
    sigma_prime_zero_exact,
    sigma_transfer,
    sturm_count,
    zeros_of_sigma,
)
from .numerics import BigFloat, EndpointRule, QuadratureSpec, bracket_root, find_root, integrate, precision
from .specfun import (
    EtaConstant,
    arg_gamma_half_plus_iy,
    catalan,
    elliptic_k,
    elliptic_k_complement,
    eta_const,
    euler_gamma,
    gamma_ratio_sq,
    log_gamma,
)

__version__ = "0.1.0"
