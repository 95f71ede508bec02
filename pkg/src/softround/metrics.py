"""PSNR and SSIM on the unit intensity scale."""

from __future__ import annotations

import math

import numpy as np
from scipy.signal import fftconvolve

from .imgcore import check_image

SSIM_WIN = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _pair(a, b):
    a = check_image(a, "a")
    b = check_image(b, "b")
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return a, b


def psnr(a, b) -> float:
    """``10 log10(1 / MSE)``; ``math.inf`` for identical images."""
    a, b = _pair(a, b)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def _gaussian_window() -> np.ndarray:
    ax = np.arange(SSIM_WIN) - SSIM_WIN // 2
    g = np.exp(-(ax**2) / (2 * SSIM_SIGMA**2))
    w = np.outer(g, g)
    return w / w.sum()


def ssim(a, b) -> float:
    """Mean SSIM over all fully-covered 11x11 Gaussian windows (dynamic range 1)."""
    a, b = _pair(a, b)
    if min(a.shape) < SSIM_WIN:
        raise ValueError(f"SSIM needs both dimensions >= {SSIM_WIN}, got {a.shape}")
    if np.array_equal(a, b):
        return 1.0
    w = _gaussian_window()

    def filt(img):
        return fftconvolve(img, w, mode="valid")

    mu_a, mu_b = filt(a), filt(b)
    var_a = filt(a * a) - mu_a**2
    var_b = filt(b * b) - mu_b**2
    cov = filt(a * b) - mu_a * mu_b
    c1 = SSIM_K1**2
    c2 = SSIM_K2**2
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
    return float(np.clip(np.mean(num / den), -1.0, 1.0))
