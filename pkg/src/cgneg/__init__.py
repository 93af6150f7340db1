"""Negativity of coarse-grained Wigner functions for oscillator and square-well states."""
from cgneg._kernels import BACKEND
from cgneg.errors import (
    CgnegError,
    DegreeTooLarge,
    KernelUnderresolved,
    NoInteriorMaximum,
    ResolutionTooCoarse,
)
from cgneg.negativity import (
    NegativityResult,
    QuadratureSpec,
    Status,
    neg_part,
    negativity_adaptive,
    negativity_grid,
    negativity_radial,
)
from cgneg.smoothing import (
    ClosedFormCG,
    CoarseGrainSpec,
    GridGeometry,
    KernelMass,
    WignerGrid,
    analytic_cg_ho,
    grid_convolve,
    grid_sample,
    smooth_grid,
)
from cgneg.states import (
    HODiagonal,
    HOOffDiagonal,
    PhasePoint,
    SquareWell,
    ho_offdiag_wigner,
    ho_wigner,
    square_well_wigner,
    wigner,
)

__version__ = "0.1.0"
