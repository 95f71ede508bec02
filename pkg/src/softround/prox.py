"""Distinct-value penalty, its proximal map (soft-rounding) and thresholding.

All functions broadcast over numpy arrays, so the same call handles a
scalar, a pixel vector or a whole image.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imgcore import ValueSet, check_image

ORACLE_STEP = 1e-4
ORACLE_PAD = 1.0


@dataclass(frozen=True)
class ProxParam:
    """A value set together with the prox weight ``lam`` (> 0)."""

    values: ValueSet
    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lam must be > 0, got {self.lam}")


def _as_values(values) -> np.ndarray:
    if isinstance(values, ValueSet):
        return values.as_array()
    return ValueSet(tuple(values)).as_array()


def _bracket(t: np.ndarray, c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Lower/upper value of the interval [t_j, t_{j+1}] holding c; requires n >= 2.
    j = np.clip(np.searchsorted(t, c, side="right") - 1, 0, len(t) - 2)
    return t[j], t[j + 1]


def _round_inside(lo, hi, c):
    # Shared by hard-rounding and nearest_round so both agree bit for bit;
    # the exact midpoint goes to the lower value.
    return np.where(c <= lo + 0.5 * (hi - lo), lo, hi)


def _scalar_or_array(out, c):
    return float(out) if np.ndim(c) == 0 else out


def gamma(values, x):
    """Per-pixel penalty: zero on the value set, concave quadratic between
    neighbouring values and linear with slope 1/2 outside ``[t_1, t_n]``."""
    t = _as_values(values)
    x = np.asarray(x, dtype=np.float64)
    out = np.where(x < t[0], 0.5 * (t[0] - x), 0.0)
    out = np.where(x > t[-1], 0.5 * (x - t[-1]), out)
    if len(t) > 1:
        lo, hi = _bracket(t, x)
        inside = (x >= t[0]) & (x <= t[-1])
        out = np.where(inside, 0.5 * (x - lo) * (hi - x), out)
    return _scalar_or_array(out, x)


def gamma_total(values, image) -> float:
    return float(np.sum(gamma(values, check_image(image))))


def soft_round(param: ProxParam, c):
    """Proximal map of ``gamma`` with weight ``param.lam``, in closed form.

    Outside ``[t_1, t_n]`` the input moves toward the range by ``lam / 2``
    without overshooting.  Inside, ``lam >= 1`` rounds to the nearest value
    and ``lam < 1`` snaps within ``lam/2`` of a gap's width of either end and
    applies a linear ramp of slope ``1 / (1 - lam)`` in between.
    """
    t = _as_values(param.values)
    lam = float(param.lam)
    c = np.asarray(c, dtype=np.float64)
    out = np.where(c < t[0], np.minimum(t[0], c + lam / 2.0), c)
    out = np.where(c > t[-1], np.maximum(t[-1], c - lam / 2.0), out)
    if len(t) > 1:
        lo, hi = _bracket(t, c)
        inside = (c >= t[0]) & (c <= t[-1])
        if lam >= 1.0:
            mid = _round_inside(lo, hi, c)
        else:
            d = 0.5 * lam * (hi - lo)
            ramp = c / (1.0 - lam) - lam * (lo + hi) / (2.0 * (1.0 - lam))
            mid = np.where(c <= lo + d, lo, np.where(c >= hi - d, hi, np.clip(ramp, lo, hi)))
        out = np.where(inside, mid, out)
    return _scalar_or_array(out, c)


def soft_round_image(param: ProxParam, image) -> np.ndarray:
    return soft_round(param, check_image(image))


def nearest_round(values, c):
    """Nearest value in the set, ties to the lower value."""
    t = _as_values(values)
    c = np.asarray(c, dtype=np.float64)
    out = np.where(c < t[0], t[0], np.where(c > t[-1], t[-1], c))
    if len(t) > 1:
        lo, hi = _bracket(t, c)
        inside = (c >= t[0]) & (c <= t[-1])
        out = np.where(inside, _round_inside(lo, hi, c), out)
    else:
        out = np.full_like(c, t[0])
    return _scalar_or_array(out, c)


def prox_objective(param: ProxParam, x, c):
    x = np.asarray(x, dtype=np.float64)
    return (x - c) ** 2 / (2.0 * param.lam) + gamma(param.values, x)


def prox_oracle(
    param: ProxParam,
    c: float,
    lo: float | None = None,
    hi: float | None = None,
    step: float = ORACLE_STEP,
) -> float:
    """Brute-force minimizer of ``(x - c)^2 / (2 lam) + gamma(x)``.

    Candidates are a uniform grid on ``[lo, hi]`` plus the set values lying
    in that range; the smallest minimizing candidate wins.
    """
    t = _as_values(param.values)
    c = float(c)
    if lo is None:
        lo = min(c, t[0]) - ORACLE_PAD
    if hi is None:
        hi = max(c, t[-1]) + ORACLE_PAD
    if not (lo < hi) or not step > 0 or not np.isfinite([lo, hi, step]).all():
        raise ValueError(f"degenerate oracle grid lo={lo} hi={hi} step={step}")
    count = int(np.floor((hi - lo) / step)) + 1
    grid = lo + step * np.arange(count)
    knots = t[(t >= lo) & (t <= hi)]
    cand = np.unique(np.concatenate([grid, knots]))
    f = prox_objective(param, cand, c)
    return float(cand[int(np.argmin(f))])


def soft_threshold(v, tau):
    """``sign(v) * max(|v| - tau, 0)``, the prox of ``tau * |.|``."""
    if np.any(np.asarray(tau) < 0):
        raise ValueError("tau must be >= 0")
    v = np.asarray(v, dtype=np.float64)
    out = np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)
    return _scalar_or_array(out, v)


def hard_threshold(v, tau2):
    """Keep ``v`` where ``v**2 > tau2``, zero elsewhere (prox of the l0 count)."""
    if np.any(np.asarray(tau2) < 0):
        raise ValueError("tau2 must be >= 0")
    v = np.asarray(v, dtype=np.float64)
    out = np.where(v * v > tau2, v, 0.0)
    return _scalar_or_array(out, v)
