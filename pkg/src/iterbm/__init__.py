"""Exact lazy sampling of iterated Brownian motions and their occupation measures."""
from ._backend import backend_name, set_backend
from .analysis import (
    DriftEstimate,
    SignedExponential,
    TestReport,
    drift_estimate,
    is_M_sparse,
    ks_one_sample,
    ks_two_sample,
    lyapunov_V,
    signed_exp_cdf,
)
from .brownian import LazyBrownianPath
from .iterate import (
    IteratedPath,
    PointVector,
    chain_step,
    eval_iterated,
    sample_limit_marginal,
    sample_limit_oscillation,
    sample_nu_p,
    verify_fixed_point,
)
from .occupation import (
    OccupationEstimate,
    fourier_second_moment,
    local_time_estimate,
    occupation_samples,
    oscillation_on_grid,
    p_variation,
)
from .rng import RngStream, new_stream

__version__ = "0.1.0"
