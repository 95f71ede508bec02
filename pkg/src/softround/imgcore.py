"""Image, kernel and value-set containers plus PGM / kernel-text I/O.

Images are plain 2-D ``float64`` numpy arrays (rows x columns, top-left
origin) holding intensities on the unit scale.  Kernels are 2-D arrays with
odd dimensions and non-negative weights that sum to one.  8-bit values are
divided by 255 at the file boundary and nowhere else.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class FormatError(ValueError):
    """Raised when a PGM or kernel file cannot be parsed."""

    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)


def check_image(image, name: str = "image") -> np.ndarray:
    """Return ``image`` as a validated float64 2-D array."""
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must have at least one pixel")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


def normalize_kernel(weights) -> np.ndarray:
    """Validate kernel dimensions and rescale the weights to unit sum."""
    k = np.asarray(weights, dtype=np.float64)
    if k.ndim == 1:
        k = k[np.newaxis, :]
    if k.ndim != 2:
        raise ValueError("kernel must be 2-D")
    if k.shape[0] % 2 == 0 or k.shape[1] % 2 == 0:
        raise ValueError(f"kernel dimensions must be odd, got {k.shape}")
    if not np.all(np.isfinite(k)) or np.any(k < 0):
        raise ValueError("kernel weights must be finite and non-negative")
    total = k.sum()
    if total <= 0:
        raise ValueError("kernel weights sum to zero")
    return k / total


@dataclass(frozen=True)
class ValueSet:
    """Strictly increasing distinct intensities ``t_1 < ... < t_n`` in [0, 1]."""

    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ValueError("ValueSet needs at least one value")
        for v in vals:
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"value {v} outside [0, 1]")
        for a, b in zip(vals, vals[1:]):
            if not a < b:
                raise ValueError("ValueSet must be strictly increasing")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_unsorted(cls, values: Iterable[float]) -> "ValueSet":
        return cls(tuple(sorted(set(float(v) for v in values))))

    def __len__(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)

    def to_bytes(self) -> list[int]:
        """8-bit levels, rounded half-up."""
        return [int(np.floor(v * 255.0 + 0.5)) for v in self.values]


def value_set_from_bytes(levels: Sequence[int]) -> ValueSet:
    """Build a ValueSet from 8-bit levels (any order, duplicates allowed)."""
    levels = list(levels)
    if not levels:
        raise ValueError("value list is empty")
    for lv in levels:
        if int(lv) != lv or not 0 <= lv <= 255:
            raise ValueError(f"level {lv!r} is not an integer in 0..255")
    return ValueSet(tuple(v / 255.0 for v in sorted(set(int(lv) for lv in levels))))


def quantize(image) -> np.ndarray:
    """Clamp to [0, 1] and round to 8-bit with ties going up."""
    arr = np.clip(check_image(image), 0.0, 1.0)
    return np.floor(arr * 255.0 + 0.5).astype(np.uint8)


def _read_token(data: bytes, pos: int) -> tuple[bytes, int, int]:
    # PGM allows arbitrary whitespace and '#' comments between header tokens.
    n = len(data)
    while pos < n:
        ch = data[pos : pos + 1]
        if ch == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif ch.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise FormatError("unexpected end of header", start)
    return data[start:pos], start, pos


def parse_pgm(data: bytes) -> np.ndarray:
    """Decode a binary P5 PGM byte string into a unit-scale image."""
    magic, off, pos = _read_token(data, 0)
    if magic != b"P5":
        raise FormatError(f"not a binary PGM (magic {magic!r})", off)
    fields = []
    for label in ("width", "height", "maxval"):
        tok, off, pos = _read_token(data, pos)
        if not tok.isdigit():
            raise FormatError(f"malformed {label} {tok!r}", off)
        fields.append(int(tok))
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise FormatError("image dimensions must be positive", off)
    if maxval != 255:
        raise FormatError(f"unsupported maxval {maxval}, only 255 is accepted", off)
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise FormatError("missing whitespace after maxval", pos)
    pos += 1
    need = width * height
    payload = data[pos : pos + need]
    if len(payload) < need:
        raise FormatError(
            f"truncated payload: expected {need} bytes, found {len(payload)}", pos + len(payload)
        )
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(height, width)
    return pixels.astype(np.float64) / 255.0


def encode_pgm(image) -> bytes:
    q = quantize(image)
    h, w = q.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + q.tobytes()


def load_pgm(path: str | os.PathLike) -> np.ndarray:
    with open(path, "rb") as fh:
        return parse_pgm(fh.read())


def save_pgm(image, path: str | os.PathLike) -> None:
    data = encode_pgm(image)
    with open(path, "wb") as fh:
        fh.write(data)


def parse_kernel_text(text: str) -> np.ndarray:
    lines = text.strip().splitlines()
    if not lines:
        raise FormatError("empty kernel file", 0)
    head = lines[0].split()
    if len(head) != 2 or not all(t.isdigit() for t in head):
        raise FormatError(f"malformed kernel header {lines[0]!r}", 0)
    width, height = int(head[0]), int(head[1])
    try:
        weights = [float(t) for t in " ".join(lines[1:]).split()]
    except ValueError as exc:
        raise FormatError(f"non-numeric kernel weight: {exc}") from None
    if len(weights) != width * height:
        raise FormatError(f"kernel header says {width * height} weights, found {len(weights)}")
    return normalize_kernel(np.asarray(weights).reshape(height, width))


def load_kernel(path: str | os.PathLike) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        return parse_kernel_text(fh.read())


def format_kernel_text(kernel) -> str:
    k = np.asarray(kernel, dtype=np.float64)
    rows = [" ".join(repr(float(v)) for v in row) for row in k]
    return f"{k.shape[1]} {k.shape[0]}\n" + "\n".join(rows) + "\n"


def save_kernel(kernel, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_kernel_text(kernel))
