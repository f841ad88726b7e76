"""OrthoSeis command-line entry point.

Subcommands (see ``--help`` for every config key and its default):
- generate: synthetic train/val/test sections with SNR variants
- train: fit the network (``--ablation plain-unet`` for the spectral-free variant)
- infer: predict a whole section from a checkpoint
- baseline: basis-pursuit sparse inversion
- evaluate: MAE/MSE/SSIM/R2 table over prediction/target pairs
- experiment: all of the above end to end with a comparison report

The logic lives in pipeline/; this file only forwards to pipeline.runner.main.
"""
import sys

from pipeline.runner import main

if __name__ == "__main__":
    sys.exit(main())
