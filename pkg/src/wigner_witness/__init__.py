"""Two-mode entanglement detection from sliced Wigner functions.

Evaluates three separability criteria built on integrals of the Wigner
function along linear phase-space transforms of mode B, optimizes the
transform for maximal violation, and cross-checks against covariance-matrix
and Fock-basis reference criteria on Gaussian, Werner and cat states.
"""

from .core import (
    FULL_PLANE,
    IDENTITY,
    NEG_IDENTITY,
    P_REFLECT,
    PRESETS,
    Region,
    RegionError,
    SymplecticParam,
    Transform2,
    TransformError,
    compose_transforms,
    disk_union,
    invert_transform,
    make_transform,
    params_from_symplectic,
    rectangle,
    symplectic_from_params,
)
from .criteria import (
    CriterionReport,
    bell_chsh,
    criterion1,
    criterion2,
    criterion3,
    duan_check,
    ppt_check,
    pseudospin_epr,
    purity_s1,
    simon_check,
)
from .optimize import (
    NotViolatedError,
    OptimizationResult,
    maximize_bell,
    optimize_criterion,
    optimize_purity,
    shrink_region,
)
from .oracle import CutoffTooSmallError, FockDensityMatrix
from .quadrature import Box, IntegralResult, NonConvergenceError, QuadratureSpec, integrate, integrate_abs
from .states import (
    CatParams,
    GaussianTwoMode,
    TmstParams,
    WernerParams,
    cat_wigner,
    default_cutoff,
    standard_form,
    state_to_fock,
    state_to_wigner,
    tmst_covariance,
    tmsv_covariance,
    vacuum,
    werner_wigner,
)
from .wigner import (
    Envelope,
    WignerField,
    diagonal_slice,
    fock_wigner,
    gaussian_wigner,
    integrate_slice,
    make_slice,
    mixture_wigner,
    reduced_mode_wigner,
)

__version__ = "0.1.0"
