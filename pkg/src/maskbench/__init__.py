"""Simulation of quantum information masking: maskers, fusion-gate optics and secret sharing."""

from .errors import (
    DimensionError,
    MaskingError,
    NonPhysicalStateError,
    NotInRangeError,
    PostSelectionEmpty,
    ShareFormatError,
    TamperDetected,
)
from .maskers import (
    Disk,
    HighDimFamily,
    Masker,
    disk_contains,
    disk_through,
    highdim_maskable_state,
    highdim_masker,
    marginals,
    mask,
    qubit_masker,
    unmask,
    vandermonde_masker,
)
from .qcore import (
    BlochVector,
    DensityMatrix,
    GellMannBasis,
    PureState,
    bloch_to_density,
    density_to_bloch,
    fidelity,
    gellmann,
    partial_trace,
    qudit_coords,
    tensor,
    trace_distance,
)

__version__ = "0.1.0"
