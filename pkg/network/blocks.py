"""Encoder, bottleneck and decoder stages of the spectral U-Net."""
import math

import numpy as np

from core import ops
from core.autodiff import Parameter, Tensor
from core.errors import ShapeError
from core.grid import real_dtype
from core.rng import RngState
from network.models import BottleneckBlock, ConvParams, DecoderBlock, EncoderBlock, NormParams, SpectralWeights
from network.spectral import spectral_layer


def init_conv(name: str, kernel_size: int, c_in: int, c_out: int, rng: RngState) -> ConvParams:
    """Fan-in uniform kernel and bias in [-1/sqrt(fan_in), 1/sqrt(fan_in)]."""
    bound = 1.0 / math.sqrt(kernel_size * kernel_size * c_in)
    gen = rng.child(name).generator
    kernel = gen.uniform(-bound, bound, size=(kernel_size, kernel_size, c_in, c_out))
    bias = gen.uniform(-bound, bound, size=(c_out,))
    return ConvParams(
        kernel=Parameter(kernel.astype(real_dtype()), name=f"{name}.kernel"),
        bias=Parameter(bias.astype(real_dtype()), name=f"{name}.bias"),
    )


def init_norm(name: str, channels: int, max_groups: int) -> NormParams:
    return NormParams(
        gain=Parameter(np.ones(channels, dtype=real_dtype()), name=f"{name}.gain"),
        shift=Parameter(np.zeros(channels, dtype=real_dtype()), name=f"{name}.shift"),
        groups=ops.default_groups(channels, max_groups),
    )


def conv(x, params: ConvParams) -> Tensor:
    return ops.conv2d(x, params.kernel, params.bias, padding="same")


def norm(x, params: NormParams) -> Tensor:
    return ops.group_norm(x, params.groups, params.gain, params.shift)


def spectral(x, weights: SpectralWeights | None) -> Tensor:
    return x if weights is None else spectral_layer(x, weights)


def encoder_block_forward(x, block: EncoderBlock, rng: RngState, training: bool) -> tuple[Tensor, Tensor]:
    """Returns (pooled spectral output, pre-pool skip)."""
    hidden = norm(ops.tanh(conv(x, block.conv1)), block.norm1)
    hidden = ops.dropout(hidden, block.dropout_rate, rng.child("dropout"), training)
    skip = norm(ops.tanh(conv(hidden, block.conv2)), block.norm2)
    return spectral(ops.maxpool2(skip), block.spectral), skip


def bottleneck_features(x, block: BottleneckBlock, rng: RngState, training: bool) -> Tensor:
    hidden = ops.tanh(conv(x, block.conv1))
    hidden = ops.dropout(hidden, block.dropout_rate, rng.child("dropout"), training)
    return norm(ops.tanh(conv(hidden, block.conv2)), block.norm)


def bottleneck_forward(x, block: BottleneckBlock, rng: RngState, training: bool) -> Tensor:
    return spectral(bottleneck_features(x, block, rng, training), block.spectral)


def decoder_features(x, skip, block: DecoderBlock, rng: RngState, training: bool) -> Tensor:
    """Upsample, concatenate the skip and run the two ReLU convolutions (pre-spectral)."""
    x_shape, skip_shape = np.shape(getattr(x, "data", x)), np.shape(getattr(skip, "data", skip))
    if skip_shape[-3:-1] != (2 * x_shape[-3], 2 * x_shape[-2]):
        raise ShapeError(f"decoder: skip {skip_shape} must be twice the spatial size of input {x_shape}")
    upsampled = ops.conv2d_transpose(x, block.upconv.kernel, block.upconv.bias)
    hidden = ops.relu(conv(ops.concat_channels(upsampled, skip), block.conv1))
    hidden = ops.dropout(hidden, block.dropout_rate, rng.child("dropout"), training)
    return norm(ops.relu(conv(hidden, block.conv2)), block.norm)


def decoder_block_forward(x, skip, block: DecoderBlock, rng: RngState, training: bool) -> Tensor:
    return spectral(decoder_features(x, skip, block, rng, training), block.spectral)
