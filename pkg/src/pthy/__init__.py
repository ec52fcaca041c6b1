"""Pre-averaged truncated Hayashi-Yoshida estimation of integrated covariance
and jump covariation from noisy, nonsynchronous tick data."""

from .avar import AvarReport, integrated_avar, spot_quadcov
from .estimators import (
    CovEstimate,
    InsufficientDataError,
    PairDesign,
    bipower_covariation,
    hy_estimate,
    jump_covariation,
    pair_design,
    phy,
    pthy,
    rv_minus_bpv,
    subsampled_bpv,
)
from .harness import McTableRow, ReplicationError, emit_table, format_cell, run_coverage, run_mc
from .preavg import PreAveraged, preaverage, select_kn
from .sampling import RefreshGrid, TickSeries, read_ticks_csv, refresh_grid, write_ticks_csv
from .simulate import SimOutput, SimScenario, replication_rng, simulate
from .threshold import ThresholdProfile, plut, plut_rule, plut_thresholds
from .weights import QuadratureError, WeightProfile, constants_dict, make_min_weight

__version__ = "0.1.0"
