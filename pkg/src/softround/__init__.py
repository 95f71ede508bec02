"""Non-blind deblurring for images made of a few known intensities."""

__version__ = "0.1.0"

from .imgcore import ValueSet, load_pgm, save_pgm, value_set_from_bytes
from .prox import ProxParam, gamma, gamma_total, nearest_round, soft_round, soft_round_image
from .solver import RunReport, SolverConfig, restore, restore_post_round
from .estimate import EstimatorConfig, estimate_values, global_kmeans_baseline, kmedian_1d
from .metrics import psnr, ssim

__all__ = [
    "EstimatorConfig",
    "ProxParam",
    "RunReport",
    "SolverConfig",
    "ValueSet",
    "estimate_values",
    "gamma",
    "gamma_total",
    "global_kmeans_baseline",
    "kmedian_1d",
    "load_pgm",
    "nearest_round",
    "psnr",
    "restore",
    "restore_post_round",
    "save_pgm",
    "soft_round",
    "soft_round_image",
    "ssim",
    "value_set_from_bytes",
]
