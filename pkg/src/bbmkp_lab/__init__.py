"""Spectral BBM / BBM-KP solvers and a transverse-limit verification harness."""

from .bbm import BBMConfig, Trajectory1D, bbm_invariants, bbm_rhs, integrate_bbm, solitary_wave
from .bbmkp import BBMKPConfig, Trajectory2D, bbmkp_rhs, energy_2d, integrate_bbmkp
from .limit import (
    ComparisonState,
    GronwallConstants,
    LimitReport,
    TransverseProfile,
    analyze_limit,
    build_w,
    decay_profile,
    gronwall_bound,
    gronwall_constants,
    verify_theorem,
    w_initial,
    w_residual,
)
from .scenario import Scenario, load_scenario
from .spectral import (
    Field1D,
    Field2D,
    Grid1D,
    Grid2D,
    antideriv_x,
    dealias,
    deriv_x,
    deriv_y,
    hk_x_slice_norm,
    hs_minus1_norm,
    hs_norm_2d,
    make_grid_1d,
    make_grid_2d,
    w1_norm,
)

__version__ = "0.1.0"
