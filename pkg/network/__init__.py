"""The spectral U-Net: configuration, layers, forward pass and checkpoints."""
from .blocks import decoder_block_forward, encoder_block_forward
from .checkpoint import load_checkpoint, save_checkpoint
from .models import ModelState, NetworkConfig, SpectralWeights
from .orthoseisnet import enumerate_parameters, forward, init_params, published_param_report, param_count, stage_statistics
from .spectral import spectral_layer

__all__ = [
    "decoder_block_forward",
    "encoder_block_forward",
    "load_checkpoint",
    "save_checkpoint",
    "ModelState",
    "NetworkConfig",
    "SpectralWeights",
    "enumerate_parameters",
    "forward",
    "init_params",
    "published_param_report",
    "param_count",
    "stage_statistics",
    "spectral_layer",
]
