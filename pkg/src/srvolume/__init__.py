"""Unit-ball volumes, geodesics and Hausdorff densities of corank-1 sub-Riemannian structures."""

__version__ = "0.1.0"

from .algebra import (  # noqa: E402
    FrequencySpectrum,
    GrowthVector,
    SkewMatrix,
    StructureConstants,
    StructureField,
    classify_normal_form,
    frequencies_of,
    growth_vector,
    hausdorff_dimension,
    normal_form_constants,
)
from .density import DensitySample, GridSpec, SmoothVolumeSpec, density_at, density_map  # noqa: E402
from .exceptions import (  # noqa: E402
    CheckFailure,
    ParseError,
    SrVolumeError,
    ValidationError,
)
from .geodesics import CovectorParam, cut_time, exp_map, hamiltonian_flow, shoot, sr_distance  # noqa: E402
from .group import GroupPoint, dilate, inverse, product  # noqa: E402
from .volume import jacobian_det, unit_ball_volume, volume_45  # noqa: E402

__all__ = [
    "CheckFailure",
    "CovectorParam",
    "DensitySample",
    "FrequencySpectrum",
    "GridSpec",
    "GroupPoint",
    "GrowthVector",
    "ParseError",
    "SkewMatrix",
    "SmoothVolumeSpec",
    "SrVolumeError",
    "StructureConstants",
    "StructureField",
    "ValidationError",
    "classify_normal_form",
    "cut_time",
    "density_at",
    "density_map",
    "dilate",
    "exp_map",
    "frequencies_of",
    "growth_vector",
    "hamiltonian_flow",
    "hausdorff_dimension",
    "inverse",
    "jacobian_det",
    "normal_form_constants",
    "product",
    "shoot",
    "sr_distance",
    "unit_ball_volume",
    "volume_45",
]
