"""Numerical laboratory for small-time heat content expansions of
fractional Schrodinger operators (-Delta)^{alpha/2} + V with Gaussian
mixture potentials: deterministic coefficient routes, stable-process
Monte Carlo cross-checks, and bound validators.
"""

from ._version import __version__
from .coefficients import (
    CoefficientEntry,
    CoefficientTable,
    RouteUnavailable,
    c0k,
    c3_closed,
    c4_closed,
    c4_sos,
    c5_closed,
    c5_sos,
    c_ell,
    cnk_closed,
    cnk_fourier,
    coefficient_table,
    partial_sum,
    t2_exact,
    t2_kernel,
)
from .montecarlo import (
    McConfig,
    McEstimate,
    default_proposal,
    estimate_heat_content,
    exponent_integral,
    first_order_residual,
)
from .potentials import GaussianMixturePotential, gaussian, mixture
from .sampling import (
    RngStream,
    StablePath,
    closed_form_density,
    empirical_cf,
    levy_cdf,
    moment_estimate,
    sample_increment,
    sample_path,
    sample_subordinator,
    sampler_selftest,
)
from .simplex import (
    SimplexWeight,
    composition_count,
    enumerate_compositions,
    simplex_integral,
    weight_A,
    weight_table,
)
from .spectral import (
    GridField,
    SpectralGrid,
    apply_fractional_laplacian,
    dirichlet_form,
    forward_transform,
    grid_integral,
    inverse_transform,
    sample_on_grid,
    weighted_freq_sum,
)
from .validator import (
    BoundCheck,
    ExpansionReport,
    OrderFit,
    PositivityRecord,
    check_theorem1,
    check_theorem2,
    expansion_report,
    fit_remainder_order,
    positivity_audit,
    report_to_csv,
    report_to_json,
    se_factor,
    t2_consistency_check,
)

__all__ = [name for name in dir() if not name.startswith("_")]
