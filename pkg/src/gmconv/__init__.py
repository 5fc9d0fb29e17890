"""
gmconv - Group-matrix convolutions, displacement structure and approximate equivariance.

Example usage:
    from gmconv import parse_group, gm_from_coeffs, densify, displacement_of

    G = parse_group("C4xC4")
    M = densify(gm_from_coeffs(G, coeffs))
    displacement_of(M, G).rank        # 0 for every group matrix

    from gmconv.layers import GMConvLayer, gmconv_forward

    layer = GMConvLayer.create(G, in_channels=1, out_channels=4, k=1)
    y = gmconv_forward(layer, x)      # x: (batch, 1, 16)
"""

from importlib.metadata import PackageNotFoundError, version

from gmconv.config import Settings, get_settings
from gmconv.displacement import (
    LDRKernel,
    displacement_d,
    displacement_dimension,
    displacement_of,
    distance_to_gm,
    ldr_build,
    numerical_rank,
)
from gmconv.exceptions import ConfigError, GMConvError, ShapeError, SpecParseError
from gmconv.group_spec import parse_group
from gmconv.groups import (
    FiniteGroup,
    Subgroup,
    direct_product,
    homogeneous_space,
    make_cyclic,
    make_dihedral,
    make_symmetric,
    right_cosets,
    semidirect_product,
    subgroup_from_generators,
    word_ball,
)
from gmconv.matrices import (
    GroupMatrix,
    densify,
    f_of,
    gm_from_coeffs,
    group_diagonal,
    is_group_matrix,
    m_of,
)
from gmconv.telemetry import LogLevel, Recorder, get_recorder

try:
    __version__ = version("gmconv")
except PackageNotFoundError:
    __version__ = "0.0.0"

__all__ = [
    "FiniteGroup",
    "Subgroup",
    "make_cyclic",
    "make_dihedral",
    "make_symmetric",
    "direct_product",
    "semidirect_product",
    "subgroup_from_generators",
    "right_cosets",
    "homogeneous_space",
    "word_ball",
    "parse_group",
    "GroupMatrix",
    "group_diagonal",
    "gm_from_coeffs",
    "densify",
    "f_of",
    "m_of",
    "is_group_matrix",
    "LDRKernel",
    "ldr_build",
    "displacement_d",
    "displacement_of",
    "displacement_dimension",
    "distance_to_gm",
    "numerical_rank",
    "Settings",
    "get_settings",
    "LogLevel",
    "Recorder",
    "get_recorder",
    "GMConvError",
    "ConfigError",
    "ShapeError",
    "SpecParseError",
]
