"""Spectral U-Net: construction, forward pass and parameter accounting."""
import logging

import numpy as np
from pydantic import BaseModel, Field

from core import ops
from core.autodiff import Tensor, as_tensor, no_grad
from core.errors import ShapeError
from core.fourier import retained_modes
from core.rng import RngState
from network.blocks import (
    bottleneck_features,
    decoder_features,
    encoder_block_forward,
    init_conv,
    init_norm,
    spectral,
)
from network.models import BottleneckBlock, DecoderBlock, EncoderBlock, ModelState, NetworkConfig
from network.spectral import init_spectral_weights

logger = logging.getLogger(__name__)

# Total printed under the architecture table for the 128x128 configuration.
PUBLISHED_PARAMETER_TOTAL = 1_940_817


def init_params(cfg: NetworkConfig, rng: RngState) -> ModelState:
    k = cfg.kernel_size
    max_groups = cfg.group_norm_max_groups

    def spectral_weights(name: str, level: int, channels: int):
        if not cfg.spectral:
            return None
        return init_spectral_weights(name, cfg.resolution(level), channels, channels, cfg.mode_fraction, rng.child(name))

    encoders = []
    c_in = cfg.input_channels
    for stage in range(cfg.depth):
        filters = cfg.stage_filters(stage)
        prefix = f"enc{stage}"
        encoders.append(
            EncoderBlock(
                conv1=init_conv(f"{prefix}.conv1", k, c_in, filters, rng),
                norm1=init_norm(f"{prefix}.norm1", filters, max_groups),
                conv2=init_conv(f"{prefix}.conv2", k, filters, filters, rng),
                norm2=init_norm(f"{prefix}.norm2", filters, max_groups),
                dropout_rate=cfg.dropout_rate,
                spectral=spectral_weights(f"{prefix}.spectral", stage + 1, filters),
            )
        )
        c_in = filters

    width = cfg.bottleneck_channels
    bottleneck = BottleneckBlock(
        conv1=init_conv("bottleneck.conv1", k, c_in, width, rng),
        conv2=init_conv("bottleneck.conv2", k, width, width, rng),
        norm=init_norm("bottleneck.norm", width, max_groups),
        dropout_rate=cfg.dropout_rate,
        spectral=spectral_weights("bottleneck.spectral", cfg.depth, width),
    )

    decoders: list[DecoderBlock] = [None] * cfg.depth
    c_in = width
    for stage in reversed(range(cfg.depth)):
        filters = cfg.stage_filters(stage)
        prefix = f"dec{stage}"
        decoders[stage] = DecoderBlock(
            upconv=init_conv(f"{prefix}.upconv", cfg.upconv_kernel, c_in, filters, rng),
            conv1=init_conv(f"{prefix}.conv1", k, filters + cfg.skip_channels(stage), filters, rng),
            conv2=init_conv(f"{prefix}.conv2", k, filters, filters, rng),
            norm=init_norm(f"{prefix}.norm", filters, max_groups),
            dropout_rate=cfg.dropout_rate,
            spectral=spectral_weights(f"{prefix}.spectral", stage, filters),
        )
        c_in = filters

    head = init_conv("head", 1, cfg.base_filters, cfg.output_channels, rng)
    return ModelState(config=cfg, encoders=encoders, bottleneck=bottleneck, decoders=decoders, head=head)


def _prepare_input(model: ModelState, x) -> Tensor:
    cfg = model.config
    x = as_tensor(x) if isinstance(x, Tensor) else Tensor(np.asarray(x, dtype=model.head.kernel.dtype))
    if x.ndim not in (3, 4) or x.shape[-3:] != (*cfg.input_size, cfg.input_channels):
        raise ShapeError(
            f"Network expects input shaped (H, W, C) = {(*cfg.input_size, cfg.input_channels)} "
            f"(optionally batched), got {x.shape}"
        )
    return x


def _encode(model: ModelState, x: Tensor, rng: RngState, training: bool) -> tuple[Tensor, list[Tensor], list[Tensor]]:
    skips, pre_pool = [], []
    hidden = x
    for stage, block in enumerate(model.encoders):
        out, skip = encoder_block_forward(hidden, block, rng.child("enc", stage), training)
        pre_pool.append(skip)
        skips.append(skip if model.config.skip_source == "pre_pool" else hidden)
        hidden = out
    return hidden, skips, pre_pool


def forward(model: ModelState, x, rng: RngState, training: bool) -> Tensor:
    """Map (H, W, 1) or (N, H, W, 1) inputs to outputs of the same shape."""
    x = _prepare_input(model, x)
    hidden, skips, _ = _encode(model, x, rng, training)
    block = model.bottleneck
    hidden = spectral(bottleneck_features(hidden, block, rng.child("bottleneck"), training), block.spectral)
    for stage in reversed(range(model.config.depth)):
        block = model.decoders[stage]
        features = decoder_features(hidden, skips[stage], block, rng.child("dec", stage), training)
        hidden = spectral(features, block.spectral)
    out = ops.conv2d(hidden, model.head.kernel, model.head.bias, padding="same")
    return ops.softmax_channels(out) if model.config.output_softmax else out


def stage_statistics(model: ModelState, x, rng: RngState | None = None) -> dict[str, float]:
    """Standard deviation of each stage's normalized feature map for one inference pass."""
    rng = rng or RngState(0)
    stats: dict[str, float] = {}
    with no_grad():
        x = _prepare_input(model, x)
        hidden, skips, pre_pool = _encode(model, x, rng, training=False)
        for stage, feature in enumerate(pre_pool):
            stats[f"enc{stage}"] = float(np.std(feature.data))
        block = model.bottleneck
        features = bottleneck_features(hidden, block, rng.child("bottleneck"), False)
        stats["bottleneck"] = float(np.std(features.data))
        hidden = spectral(features, block.spectral)
        for stage in reversed(range(model.config.depth)):
            block = model.decoders[stage]
            features = decoder_features(hidden, skips[stage], block, rng.child("dec", stage), False)
            stats[f"dec{stage}"] = float(np.std(features.data))
            hidden = spectral(features, block.spectral)
    return stats


def _conv_count(kernel: int, c_in: int, c_out: int) -> int:
    return kernel * kernel * c_in * c_out + c_out


def _spectral_count(cfg: NetworkConfig, level: int, channels: int) -> int:
    if not cfg.spectral:
        return 0
    height, width = cfg.resolution(level)
    modes_h = len(retained_modes(height, cfg.mode_fraction))
    modes_w = len(retained_modes(width, cfg.mode_fraction))
    return 2 * modes_h * modes_w * channels * channels


def param_count(cfg: NetworkConfig) -> int:
    """Closed-form count of real-valued trainable numbers (complex entries count twice)."""
    k = cfg.kernel_size
    total = 0
    c_in = cfg.input_channels
    for stage in range(cfg.depth):
        filters = cfg.stage_filters(stage)
        total += _conv_count(k, c_in, filters) + _conv_count(k, filters, filters) + 4 * filters
        total += _spectral_count(cfg, stage + 1, filters)
        c_in = filters
    width = cfg.bottleneck_channels
    total += _conv_count(k, c_in, width) + _conv_count(k, width, width) + 2 * width
    total += _spectral_count(cfg, cfg.depth, width)
    c_in = width
    for stage in reversed(range(cfg.depth)):
        filters = cfg.stage_filters(stage)
        total += _conv_count(cfg.upconv_kernel, c_in, filters)
        total += _conv_count(k, filters + cfg.skip_channels(stage), filters) + _conv_count(k, filters, filters)
        total += 2 * filters + _spectral_count(cfg, stage, filters)
        c_in = filters
    return total + _conv_count(1, cfg.base_filters, cfg.output_channels)


def enumerate_parameters(model: ModelState) -> list[tuple[str, tuple[int, ...], int]]:
    """(name, shape, real-valued count) for every instantiated Parameter."""
    rows = []
    for name, param in model.named_parameters():
        count = param.data.size * (2 if param.is_complex else 1)
        rows.append((name, param.shape, count))
    return rows


class ParamReport(BaseModel):
    ours: int = Field(description="Closed-form parameter count of this configuration")
    reference: int = Field(default=PUBLISHED_PARAMETER_TOTAL, description="Published total for the 128x128 network")
    delta: int = Field(description="ours - reference")
    per_block: dict[str, int] = Field(default_factory=dict, description="Enumerated count per block prefix")


def published_param_report(model: ModelState) -> ParamReport:
    ours = param_count(model.config)
    per_block: dict[str, int] = {}
    for name, _, count in enumerate_parameters(model):
        block = name.split(".", 1)[0]
        per_block[block] = per_block.get(block, 0) + count
    report = ParamReport(ours=ours, delta=ours - PUBLISHED_PARAMETER_TOTAL, per_block=per_block)
    logger.info(f"[Params] {report.ours:,} parameters vs published {report.reference:,} (delta {report.delta:+,})")
    return report
