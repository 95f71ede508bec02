"""Deterministic synthetic test images with known distinct values.

Three families stand in for real document/pattern scans:

* ``text``: 2-value grid of blocky stroke glyphs, dark ink on a light ground
* ``barcode``: 2-value vertical stripes of random widths
* ``pattern``: 4- or 5-value mosaic of overlapping rectangles and disks
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imgcore import ValueSet, value_set_from_bytes

TEXT_LEVELS = (26, 217)
BARCODE_LEVELS = (0, 255)
PATTERN_LEVELS = (
    (0, 100, 150, 255),
    (24, 53, 158, 224, 255),
    (32, 76, 142, 230),
    (32, 70, 135, 158, 231),
    (0, 100, 150, 255),
)


@dataclass(frozen=True)
class Fixture:
    name: str
    image: np.ndarray
    values: ValueSet


def _glyph(rng: np.random.Generator) -> np.ndarray:
    g = np.zeros((7, 5), dtype=bool)
    for _ in range(rng.integers(2, 5)):
        if rng.random() < 0.5:
            r = rng.choice([0, 3, 6])
            a, b = sorted(rng.choice(5, size=2, replace=False))
            g[r, a : b + 1] = True
        else:
            c = rng.choice([0, 2, 4])
            a, b = sorted(rng.choice(7, size=2, replace=False))
            g[a : b + 1, c] = True
    return g


def text_image(seed: int, size: int = 64, levels=TEXT_LEVELS, scale: int = 2) -> Fixture:
    rng = np.random.default_rng(seed)
    ink, ground = levels[0] / 255.0, levels[1] / 255.0
    img = np.full((size, size), ground)
    pitch_x, pitch_y, margin = 6 * scale, 8 * scale + 1, 3
    for top in range(margin, size - 7 * scale, pitch_y):
        for left in range(margin, size - 5 * scale, pitch_x):
            if rng.random() < 0.15:
                continue  # word gap
            g = np.kron(_glyph(rng), np.ones((scale, scale), dtype=bool))
            img[top : top + g.shape[0], left : left + g.shape[1]][g] = ink
    return Fixture(f"text{seed}" if scale == 2 else f"text{seed}s{scale}", img, value_set_from_bytes(levels))


def barcode_image(seed: int, size: int = 64, levels=BARCODE_LEVELS) -> Fixture:
    rng = np.random.default_rng(seed)
    row = np.full(size, levels[1] / 255.0)
    col, dark = 4, True
    while col < size - 4:
        w = int(rng.integers(1, 5))
        if dark:
            row[col : min(col + w, size - 4)] = levels[0] / 255.0
        col += w
        dark = not dark
    return Fixture(f"barcode{seed}", np.tile(row, (size, 1)), value_set_from_bytes(levels))


def pattern_image(seed: int, size: int = 64, levels=None) -> Fixture:
    if levels is None:
        levels = PATTERN_LEVELS[seed % len(PATTERN_LEVELS)]
    rng = np.random.default_rng(seed)
    vals = np.asarray(sorted(levels)) / 255.0
    img = np.full((size, size), vals[rng.integers(len(vals))])
    yy, xx = np.mgrid[0:size, 0:size]
    n_random = 14 - len(vals)
    # Random shapes first, then one per level so every level survives.
    colors = [vals[rng.integers(len(vals))] for _ in range(n_random)] + list(rng.permutation(vals))
    for v in colors:
        if rng.random() < 0.5:
            h, w = rng.integers(8, size // 2, size=2)
            r0, c0 = rng.integers(0, size - h), rng.integers(0, size - w)
            img[r0 : r0 + h, c0 : c0 + w] = v
        else:
            rad = rng.integers(5, size // 4)
            cy, cx = rng.integers(rad, size - rad, size=2)
            img[(yy - cy) ** 2 + (xx - cx) ** 2 <= rad * rad] = v
    present = sorted(set(np.round(img.ravel() * 255).astype(int)))
    return Fixture(f"pattern{seed}", img, value_set_from_bytes(present))


def estimation_fixtures() -> list[Fixture]:
    """Value-estimation fixtures: a 4-value pattern, a two-value text page and
    a 5-value pattern."""
    return [
        pattern_image(0, levels=(0, 100, 150, 255)),
        text_image(0),
        pattern_image(1, levels=(24, 53, 158, 224, 255)),
    ]


def standard_binary_fixture() -> Fixture:
    """The 64x64 two-value text image used as the reference problem."""
    return text_image(0)


def fixture_set(set_id: str) -> list[Fixture]:
    if set_id == "binary":
        return [text_image(s) for s in range(3)] + [barcode_image(s) for s in range(2)]
    if set_id == "multi":
        return [pattern_image(s) for s in range(5)]
    if set_id == "all":
        return fixture_set("binary") + fixture_set("multi")
    if set_id == "standard":
        return [standard_binary_fixture()]
    raise ValueError(f"unknown fixture set {set_id!r}")
