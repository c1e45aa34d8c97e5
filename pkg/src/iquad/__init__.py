"""Operator calculus for quadrant-mask Fourier wavefront sensors.

Fast spectral forward models built on the 2d finite Hilbert transform, slow
principal-value quadrature oracles that validate them, linearizations with
lattice-exact adjoints, and model-based reconstruction on top.
"""

from ._kernels import BACKEND as kernel_backend
from .grid import (
    ComplexField,
    Grid,
    PupilMask,
    ScalarField,
    circular_pupil,
    full_detector,
    make_grid,
)
from .linops import (
    LinearOperator,
    frechet,
    frechet_adjoint,
    ilin,
    ilin_modulated,
    interaction_matrix,
    operator_norm,
)
from .quadrature import (
    EXCLUSION,
    OFFSET,
    QuadratureScheme,
    pv_adjoint,
    pv_adjoint_l2,
    pv_frechet,
    pv_hilbert2d,
    pv_i1,
    pv_i2,
    pv_ilin,
    pv_pwfs_slopes,
)
from .reconstruct import (
    ReconstructionConfig,
    ReconstructionReport,
    cg_normal,
    landweber_linear,
    landweber_nonlinear,
    modal_solve,
)
from .screens import ScreenParams, kolmogorov_screen
from .sensors import (
    Measurement,
    SensorSpec,
    double_iquad,
    fourier_filter_intensity,
    fqpm_otf,
    fqpm_propagate,
    i1_apply,
    i2_apply,
    iquad_spec,
    meta_intensity,
    modulated_meta_intensity,
    path_intensities,
    pwfs_slopes,
    sensitivity_scan,
)
from .spectral import (
    ModulationWeight,
    Multiplier,
    delta_weight,
    fft2,
    hilbert1d_along_x,
    hilbert1d_along_y,
    hilbert2d,
    ifft2,
    modulated_hilbert2d,
    off_axis_projector,
    sobolev_adjoint,
    tent_weight,
)
from .zernike import ZernikeIndex, noll_index, noll_range, zernike_mode

__version__ = "0.1.0"
