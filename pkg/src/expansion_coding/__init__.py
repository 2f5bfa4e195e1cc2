"""Expansion coding for lossy compression of exponential and Laplacian sources."""

from .expansion import (
    BitPlanes,
    LevelProfile,
    LevelRange,
    bit_marginal_series,
    expand,
    expand_many,
    level_params,
    mgf_partial_product,
    reconstruct,
    sample_bit_planes,
    sample_by_levels,
)
from .mc_sim import SimReport, ks_critical, ks_statistic, simulate
from .numerics import SourceKind, SourceModel, binary_entropy, logistic_level, shannon_rd
from .schemes_exp import (
    GAP_CONSTANT,
    Allocation,
    GapRow,
    RDPoint,
    Scheme,
    bsc,
    bsc_rate,
    exp_sweep,
    gap_report,
    heuristic_allocation,
    scheme_point,
    successive_q,
    z_channel,
    z_channel_rate,
)
from .schemes_laplace import (
    LaplaceDistortionTrace,
    TimeShareParams,
    distortion_oracle,
    distortion_trace,
    laplace_gap_report,
    laplace_point,
    laplace_sweep,
    time_share,
)

__version__ = "0.1.0"
