"""Layers built from group matrices: convolution, stride, pooling, padding, homogeneous spaces."""

from gmconv.layers.conv import (
    ErrorMode,
    ErrorTerm,
    GMConvGrads,
    GMConvLayer,
    StrideLayer,
    channel_pair_form,
    channel_pair_matrix,
    gmconv_backward,
    gmconv_forward,
    stride_backward,
    stride_forward,
)
from gmconv.layers.equivariance import (
    equivariance_error,
    identity_action,
    translation_action,
    translation_actions,
    window_shift_action,
)
from gmconv.layers.homogeneous import (
    HomSpaceConvLayer,
    homspace_conv_backward,
    homspace_conv_forward,
)
from gmconv.layers.padding import (
    Lattice,
    PaddedWindow,
    PaddingBound,
    padded_conv_backward,
    padded_conv_displacement_bound,
    padded_conv_forward,
    padded_conv_matrix,
    padded_diagonal_form,
)
from gmconv.layers.pooling import GMPoolLayer, PoolMode, pool_backward, pool_forward

__all__ = [
    "ErrorMode",
    "ErrorTerm",
    "GMConvGrads",
    "GMConvLayer",
    "GMPoolLayer",
    "HomSpaceConvLayer",
    "Lattice",
    "PaddedWindow",
    "PaddingBound",
    "PoolMode",
    "StrideLayer",
    "channel_pair_form",
    "channel_pair_matrix",
    "equivariance_error",
    "gmconv_backward",
    "gmconv_forward",
    "homspace_conv_backward",
    "homspace_conv_forward",
    "identity_action",
    "padded_conv_backward",
    "padded_conv_displacement_bound",
    "padded_conv_forward",
    "padded_conv_matrix",
    "padded_diagonal_form",
    "pool_backward",
    "pool_forward",
    "stride_backward",
    "stride_forward",
    "translation_action",
    "translation_actions",
    "window_shift_action",
]
