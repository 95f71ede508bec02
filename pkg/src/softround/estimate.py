"""Estimate the distinct intensities of an image from local and global clustering.

Step one looks at small patches: flat patches contribute their mean, edge
patches contribute two cluster centers pushed apart toward the patch
extremes (undoing some of the contrast loss caused by blur).  Step two
pools all local centers and takes an exact 1-D K-median of them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .imgcore import ValueSet, check_image


@dataclass(frozen=True)
class EstimatorConfig:
    patch_size: int = 5
    stride: int = 2
    var_threshold: float = 1e-4
    stretch: float = 0.15

    def __post_init__(self):
        if self.patch_size < 3 or self.patch_size % 2 == 0:
            raise ValueError("patch_size must be odd and >= 3")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")
        if not 0.0 <= self.stretch < 1.0:
            raise ValueError("stretch must lie in [0, 1)")


def normalized_two_means(patch, stretch: float, max_iter: int = 100) -> tuple[float, float]:
    """Two-class Lloyd clustering started at (min, max), then stretched.

    Each converged center moves ``stretch`` of the way toward the extreme
    sample on its own side.  Returns ``(low, high)``.
    """
    x = np.asarray(patch, dtype=np.float64).ravel()
    if x.size < 2:
        raise ValueError("need at least two samples")
    x_min, x_max = float(x.min()), float(x.max())
    if x_min == x_max:
        return x_min, x_max
    lo, hi = x_min, x_max
    for _ in range(max_iter):
        low_side = x <= 0.5 * (lo + hi)
        new_lo = float(x[low_side].mean())
        new_hi = float(x[~low_side].mean())
        if new_lo == lo and new_hi == hi:
            break
        lo, hi = new_lo, new_hi
    lo += stretch * (x_min - lo)
    hi += stretch * (x_max - hi)
    return lo, hi


def local_centers(image, config: EstimatorConfig = EstimatorConfig()) -> np.ndarray:
    """One center per flat patch, two per edge patch, over the stride grid."""
    img = check_image(image)
    p = config.patch_size
    if img.shape[0] < p or img.shape[1] < p:
        raise ValueError(f"image {img.shape} smaller than patch size {p}")
    windows = sliding_window_view(img, (p, p))[:: config.stride, :: config.stride]
    patches = windows.reshape(-1, p * p)
    var = patches.var(axis=1)
    flat = var <= config.var_threshold
    centers = [patches[flat].mean(axis=1)]
    for patch in patches[~flat]:
        centers.append(np.asarray(normalized_two_means(patch, config.stretch)))
    return np.concatenate(centers)


def _weighted_median_cost(u, W, S, i, j):
    # Cost and median index of unique values u[i:j] with prefix weight sums W
    # and prefix weighted sums S; i and j broadcast.
    half = W[i] + 0.5 * (W[j] - W[i])
    m = np.clip(np.searchsorted(W, half, side="left") - 1, i, j - 1)
    left_w = W[m + 1] - W[i]
    right_w = W[j] - W[m + 1]
    cost = u[m] * left_w - (S[m + 1] - S[i]) + (S[j] - S[m + 1]) - u[m] * right_w
    return cost, m


def _dc_layer(u, W, S, prev, k, m):
    # One DP layer: cur[j] = min_i prev[i] + cost(i, j) for j in [k, m].
    # Split points are monotone in j, so every level of the divide and
    # conquer recursion is evaluated as one flat batch of candidates.
    cur = np.full(m + 1, np.inf)
    arg = np.zeros(m + 1, dtype=int)
    jlo, jhi = np.array([k]), np.array([m])
    olo, ohi = np.array([k - 1]), np.array([m - 1])
    while jlo.size:
        j = (jlo + jhi) // 2
        top = np.minimum(ohi, j - 1)
        lengths = top - olo + 1
        starts = np.concatenate([[0], np.cumsum(lengths)[:-1]])
        seg = np.repeat(np.arange(j.size), lengths)
        cand = olo[seg] + np.arange(seg.size) - starts[seg]
        vals = prev[cand] + _weighted_median_cost(u, W, S, cand, j[seg])[0]
        mins = np.minimum.reduceat(vals, starts)
        hit = np.flatnonzero(vals == mins[seg])
        _, first = np.unique(seg[hit], return_index=True)
        best = cand[hit[first]]
        cur[j] = mins
        arg[j] = best
        left = jlo <= j - 1
        right = j + 1 <= jhi
        jlo, jhi, olo, ohi = (
            np.concatenate([jlo[left], (j + 1)[right]]),
            np.concatenate([(j - 1)[left], jhi[right]]),
            np.concatenate([olo[left], best[right]]),
            np.concatenate([best[left], ohi[right]]),
        )
    return cur, arg


def kmedian_1d(samples, n: int) -> ValueSet:
    """Globally optimal 1-D K-median, returned as the sorted cluster medians.

    Samples are compressed to weighted unique values so that equal samples
    never straddle a cluster boundary; the layered DP uses divide and conquer
    over the monotone split points.  Even-weight clusters take the lower
    median.
    """
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size == 0:
        raise ValueError("no samples")
    if n < 1:
        raise ValueError("n must be >= 1")
    u, counts = np.unique(x, return_counts=True)
    m = len(u)
    if n > m:
        raise ValueError(f"n={n} exceeds the {m} distinct sample values")
    W = np.concatenate([[0.0], np.cumsum(counts, dtype=np.float64)])
    S = np.concatenate([[0.0], np.cumsum(counts * u)])

    # prev[j]: best cost of covering u[:j] with the clusters placed so far.
    idx = np.arange(m + 1)
    prev = np.full(m + 1, np.inf)
    prev[1:] = _weighted_median_cost(u, W, S, np.zeros(m, dtype=int), idx[1:])[0]
    splits = []
    for k in range(2, n + 1):
        cur, arg = _dc_layer(u, W, S, prev, k, m)
        splits.append(arg)
        prev = cur

    bounds = [m]
    for arg in reversed(splits):
        bounds.append(int(arg[bounds[-1]]))
    bounds.append(0)
    bounds.reverse()
    medians = []
    for a, b in zip(bounds, bounds[1:]):
        _, med = _weighted_median_cost(u, W, S, np.array(a), np.array(b))
        medians.append(float(u[int(med)]))
    return ValueSet(tuple(medians))


def kmedian_cost(samples, values) -> float:
    """Sum of absolute deviations to the nearest of ``values``."""
    x = np.asarray(samples, dtype=np.float64).ravel()
    v = np.asarray(values.values if isinstance(values, ValueSet) else values, dtype=np.float64)
    return float(np.abs(x[:, None] - v[None, :]).min(axis=1).sum())


def estimate_values(image, n: int, config: EstimatorConfig = EstimatorConfig()) -> ValueSet:
    img = np.clip(check_image(image), 0.0, 1.0)
    return kmedian_1d(local_centers(img, config), n)


def global_kmeans_baseline(image, n: int, max_iter: int = 300) -> ValueSet:
    """Plain Lloyd K-means over every pixel, started at evenly spaced quantiles."""
    x = np.clip(check_image(image), 0.0, 1.0).ravel()
    uniq = np.unique(x)
    if n < 1 or n > len(uniq):
        raise ValueError(f"n={n} must be between 1 and the {len(uniq)} distinct pixel values")
    q = (np.arange(n) + 0.5) / n
    centers = np.quantile(x, q, method="inverted_cdf")
    if np.any(np.diff(centers) <= 0):
        centers = np.quantile(uniq, q, method="inverted_cdf")
    for _ in range(max_iter):
        label = np.argmin(np.abs(x[:, None] - centers[None, :]), axis=1)
        new = centers.copy()
        for c in range(n):
            members = x[label == c]
            if members.size:
                new[c] = members.mean()
        if np.array_equal(new, centers):
            break
        centers = new
    return ValueSet.from_unsorted(centers)
