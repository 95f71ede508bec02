"""Method x degradation benchmark over the synthetic fixtures."""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .degrade import DegradationSpec, degrade, make_kernel
from .fixtures import Fixture, fixture_set
from .imgcore import quantize
from .metrics import psnr, ssim
from .solver import DEFAULT_LAMBDA_I, SolverConfig, lambda_N_for, restore, restore_post_round

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
# Exact recoveries have infinite PSNR; they enter averages at this ceiling.
PSNR_CAP = 100.0

REG_LABEL = {"tv_l1": "TV", "l0_grad": "L0"}
VARIANTS = ("base", "R", "S")
CSV_FIELDS = ("fixture", "method", "reg", "variant", "kernel", "noise", "seed", "psnr", "ssim", "iterations", "error")


@dataclass(frozen=True)
class Setting:
    kernel_kind: str
    kernel_size: int
    kernel_param: float
    noise: float
    seed: int

    @property
    def label(self) -> str:
        return f"{self.kernel_kind}{self.kernel_size}@{self.kernel_param:g}"

    def kernel(self) -> np.ndarray:
        return make_kernel(self.kernel_kind, self.kernel_size, self.kernel_param)


# Three blur/noise settings sized for 64x64 fixtures: longer blur, less noise.
DEFAULT_SETTINGS = (
    Setting("motion_line", 9, 30.0, 0.03, 1000),
    Setting("motion_line", 13, 75.0, 0.02, 1001),
    Setting("motion_line", 17, 120.0, 0.01, 1002),
)


@dataclass(frozen=True)
class BenchSpec:
    fixtures: str = "all"
    settings: tuple[Setting, ...] = DEFAULT_SETTINGS
    regs: tuple[str, ...] = ("tv_l1", "l0_grad")
    variants: tuple[str, ...] = VARIANTS
    overrides: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict) -> "BenchSpec":
        d = dict(d)
        if "settings" in d:
            d["settings"] = tuple(Setting(**s) for s in d["settings"])
        for key in ("regs", "variants"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["settings"] = [asdict(s) for s in self.settings]
        d["regs"] = list(self.regs)
        d["variants"] = list(self.variants)
        return d


def method_config(reg: str, variant: str, fixture: Fixture, sigma: float, overrides: dict | None = None) -> SolverConfig:
    """Tuned solver settings for one method on one fixture."""
    cfg = SolverConfig(
        reg=reg,
        lambda_N=lambda_N_for(reg, sigma),
        lambda_I=DEFAULT_LAMBDA_I if variant == "S" else 0.0,
        values=fixture.values,
    )
    if overrides:
        over = dict(overrides)
        if variant != "S":
            over.pop("lambda_I", None)
        cfg = replace(cfg, **over)
    return cfg


def _finite(v: float):
    return v if math.isfinite(v) else "inf"


def run_one(fixture: Fixture, setting: Setting, reg: str, variant: str, overrides: dict | None = None) -> dict:
    kernel = setting.kernel()
    y = degrade(fixture.image, DegradationSpec(kernel, setting.noise, setting.seed))
    row = {
        "fixture": fixture.name,
        "method": REG_LABEL[reg] + ("" if variant == "base" else "+" + variant),
        "reg": reg,
        "variant": variant,
        "kernel": setting.label,
        "noise": setting.noise,
        "seed": setting.seed,
        "error": "",
    }
    try:
        cfg = method_config(reg, variant, fixture, setting.noise, overrides)
        report = restore_post_round(y, kernel, cfg) if variant == "R" else restore(y, kernel, cfg)
    except Exception as exc:  # recorded per run, the harness keeps going
        log.warning("%s %s %s failed: %s", fixture.name, setting.label, row["method"], exc)
        row.update(psnr=float("nan"), ssim=float("nan"), iterations=0, error=str(exc))
        return {"row": row, "report": None}
    x = report.final_image
    row.update(psnr=psnr(fixture.image, x), ssim=ssim(fixture.image, x), iterations=report.iterations)
    q = quantize(x) / 255.0
    detail = report.to_dict()
    detail.update(
        schema_version=SCHEMA_VERSION,
        tool_version=__version__,
        fixture=fixture.name,
        setting=asdict(setting),
        method=row["method"],
        psnr=_finite(row["psnr"]),
        ssim=row["ssim"],
        psnr_quantized=_finite(psnr(fixture.image, q)),
        ssim_quantized=ssim(fixture.image, q),
    )
    return {"row": row, "report": detail}


def _job(args):
    return run_one(*args)


def run_bench(spec: BenchSpec, out_dir: str | os.PathLike | None = None, jobs: int = 1) -> list[dict]:
    """Run every fixture x setting x method combination; optionally write
    per-run JSON, ``results.csv`` and ``timings.csv`` into ``out_dir``."""
    fixtures = fixture_set(spec.fixtures)
    tasks = [
        (f, s, reg, variant, spec.overrides)
        for f in fixtures
        for s in spec.settings
        for reg in spec.regs
        for variant in spec.variants
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_job, tasks))
    else:
        results = [_job(t) for t in tasks]
    rows = [r["row"] for r in results]
    if out_dir is not None:
        write_outputs(spec, results, Path(out_dir))
    return rows


def write_outputs(spec: BenchSpec, results: list[dict], out: Path) -> None:
    runs = out / "runs"
    runs.mkdir(parents=True, exist_ok=True)
    with open(out / "results.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\n")
        writer.writeheader()
        for r in results:
            row = dict(r["row"])
            row["psnr"] = _fmt(row["psnr"])
            row["ssim"] = _fmt(row["ssim"])
            writer.writerow(row)
    # Timings vary run to run, so they live apart from the deterministic table.
    with open(out / "timings.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["fixture", "method", "kernel", "noise", "wall_time_s"])
        for r in results:
            row, rep = r["row"], r["report"]
            wall = rep["wall_time_s"] if rep else ""
            writer.writerow([row["fixture"], row["method"], row["kernel"], row["noise"], wall])
    for r in results:
        if r["report"] is None:
            continue
        row = r["row"]
        name = f"{row['fixture']}_{row['kernel']}_{row['noise']:g}_{row['method']}.json".replace("+", "p")
        with open(runs / name, "w", encoding="utf-8") as fh:
            json.dump(r["report"], fh, indent=1)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "spec": spec.to_dict(),
        "lambda_I": DEFAULT_LAMBDA_I,
        "defaults": SolverConfig().to_dict(),
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1)


def _fmt(v: float) -> str:
    if math.isinf(v):
        return "inf"
    return f"{v:.6f}"


def capped_psnr(v: float) -> float:
    return min(v, PSNR_CAP)


def summarize(rows: list[dict], by=("method",)) -> dict:
    """Mean PSNR (capped at ``PSNR_CAP``) and mean SSIM per group."""
    groups: dict = {}
    for row in rows:
        if row.get("error"):
            continue
        key = tuple(row[k] for k in by)
        groups.setdefault(key, []).append((capped_psnr(row["psnr"]), row["ssim"]))
    return {
        (k[0] if len(k) == 1 else k): {
            "psnr": float(np.mean([p for p, _ in v])),
            "ssim": float(np.mean([s for _, s in v])),
            "count": len(v),
        }
        for k, v in groups.items()
    }
