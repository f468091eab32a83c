"""Largest-eigenvalue distribution of 2x2 correlated non-central Wishart matrices
and the outage probability of 2x2 MIMO-MRC links over correlated Rician fading."""

from .cmatrix2 import Herm2, herm_eigen, max_eig_gram, rank1_factor
from .errors import (
    BudgetExceeded,
    DomainError,
    NonConvergence,
    ParseError,
    RankError,
    SelfCheckFailed,
    ValidationError,
    WishartOutageError,
)
from .maxeig_cdf import (
    CdfResult,
    SeriesConfig,
    WishartParams,
    calI,
    calJ,
    cdf_max_eig,
    cdf_max_eig_curve,
    cdf_max_eig_direct,
    params_from_gaussian,
    series_Qk,
)
from .mimo_outage import (
    ChannelSpec,
    CurvePoint,
    OutageQuery,
    alignment_bounds,
    large_k_outage,
    outage_probability,
    outage_sweep,
    wishart_params_from_channel,
)
from .oracles import EmpiricalCdf, McConfig, QuadConfig, quad_Qk, sample_max_eig
from .specfun import hyp1f1_int, hyp1f1_scaled

__version__ = "0.1.0"
