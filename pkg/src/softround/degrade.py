"""Synthetic degradation: periodic blur followed by seeded Gaussian noise."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imgcore import check_image, normalize_kernel

KERNEL_KINDS = ("identity", "box", "gaussian", "motion_line")


@dataclass(frozen=True)
class DegradationSpec:
    kernel: np.ndarray
    noise_sigma: float
    seed: int

    def __post_init__(self):
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")


def psf2otf(kernel, shape: tuple[int, int]) -> np.ndarray:
    """Transfer function of ``kernel`` under periodic boundaries on ``shape``."""
    k = np.asarray(kernel, dtype=np.float64)
    kh, kw = k.shape
    if kh > shape[0] or kw > shape[1]:
        raise ValueError(f"kernel {k.shape} larger than image {shape}")
    pad = np.zeros(shape)
    pad[:kh, :kw] = k
    pad = np.roll(pad, (-(kh // 2), -(kw // 2)), axis=(0, 1))
    return np.fft.fft2(pad)


def convolve_periodic(image, kernel) -> np.ndarray:
    x = check_image(image)
    k = np.asarray(kernel, dtype=np.float64)
    otf = psf2otf(k, x.shape)
    return np.real(np.fft.ifft2(np.fft.fft2(x) * otf))


def convolve_periodic_direct(image, kernel) -> np.ndarray:
    """Spatial-domain circular convolution; slow reference for tests."""
    x = check_image(image)
    k = np.asarray(kernel, dtype=np.float64)
    kh, kw = k.shape
    if kh > x.shape[0] or kw > x.shape[1]:
        raise ValueError(f"kernel {k.shape} larger than image {x.shape}")
    out = np.zeros_like(x)
    for a in range(kh):
        for b in range(kw):
            out += k[a, b] * np.roll(x, (a - kh // 2, b - kw // 2), axis=(0, 1))
    return out


def add_gaussian_noise(image, sigma: float, seed: int) -> np.ndarray:
    """Add unclamped i.i.d. N(0, sigma^2) noise drawn from ``numpy.random.default_rng(seed)``."""
    x = check_image(image)
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0:
        return x.copy()
    rng = np.random.default_rng(seed)
    return x + sigma * rng.standard_normal(x.shape)


def degrade(image, spec: DegradationSpec) -> np.ndarray:
    return add_gaussian_noise(convolve_periodic(image, spec.kernel), spec.noise_sigma, spec.seed)


def _motion_line(size: int, angle_deg: float) -> np.ndarray:
    r = (size - 1) / 2.0
    theta = np.deg2rad(angle_deg)
    k = np.zeros((size, size))
    if size == 1:
        k[0, 0] = 1.0
        return k
    ts = np.linspace(-r, r, 8 * size + 1)
    cols = r + ts * np.cos(theta)
    rows = r - ts * np.sin(theta)
    r0 = np.floor(rows).astype(int)
    c0 = np.floor(cols).astype(int)
    fr = rows - r0
    fc = cols - c0
    for dr, dc, w in (
        (0, 0, (1 - fr) * (1 - fc)),
        (0, 1, (1 - fr) * fc),
        (1, 0, fr * (1 - fc)),
        (1, 1, fr * fc),
    ):
        rr = np.clip(r0 + dr, 0, size - 1)
        cc = np.clip(c0 + dc, 0, size - 1)
        np.add.at(k, (rr, cc), w)
    return k


def make_kernel(kind: str, size: int, param: float = 0.0) -> np.ndarray:
    """Build a normalized ``size x size`` kernel.

    ``param`` is the standard deviation in pixels for ``gaussian`` and the
    line angle in degrees (counter-clockwise from horizontal) for
    ``motion_line``; it is ignored otherwise.
    """
    if size < 1 or size % 2 == 0:
        raise ValueError(f"kernel size must be a positive odd integer, got {size}")
    if kind == "identity":
        k = np.zeros((size, size))
        k[size // 2, size // 2] = 1.0
    elif kind == "box":
        k = np.ones((size, size))
    elif kind == "gaussian":
        if param <= 0:
            raise ValueError("gaussian kernel needs sigma > 0")
        ax = np.arange(size) - size // 2
        g = np.exp(-(ax**2) / (2.0 * param**2))
        k = np.outer(g, g)
    elif kind == "motion_line":
        k = _motion_line(size, param)
    else:
        raise ValueError(f"unknown kernel kind {kind!r}; expected one of {KERNEL_KINDS}")
    return normalize_kernel(k)
