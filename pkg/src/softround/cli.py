"""``softround`` command line: degrade, restore, estimate, metrics, prox, bench."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .bench import VARIANTS, BenchSpec, run_bench, summarize
from .degrade import DegradationSpec, degrade, make_kernel
from .estimate import EstimatorConfig, estimate_values, global_kmeans_baseline
from .imgcore import FormatError, ValueSet, load_kernel, load_pgm, quantize, save_pgm, value_set_from_bytes
from .metrics import psnr, ssim
from .prox import ProxParam, soft_round
from .solver import (
    DEFAULT_LAMBDA_I,
    ConfigError,
    NumericalError,
    SolverConfig,
    lambda_N_for,
    restore,
    restore_post_round,
)

log = logging.getLogger("softround")

SCHEMA_VERSION = 1
EXIT_OK, EXIT_ARGS, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

REG_ALIASES = {"tv": "tv_l1", "tv_l1": "tv_l1", "l0": "l0_grad", "l0_grad": "l0_grad", "none": "none"}
VARIANT_ALIASES = {"none": "none", "base": "none", "post": "post", "R": "post", "soft": "soft", "S": "soft"}


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _json_number(v: float):
    return v if math.isfinite(v) else ("inf" if v > 0 else "-inf")


def _sidecar(path: Path) -> Path:
    return path.with_suffix(".json")


def _write_json(path: Path, payload: dict) -> None:
    body = {"schema_version": SCHEMA_VERSION, "tool_version": __version__, **payload}
    path.write_text(json.dumps(body, indent=1) + "\n", encoding="utf-8")


def _add_kernel_args(p: argparse.ArgumentParser, with_file: bool) -> None:
    if with_file:
        p.add_argument("--kernel", type=Path, help="kernel text file (overrides --kernel-kind)")
    p.add_argument("--kernel-kind", default="identity", choices=["identity", "box", "gaussian", "motion_line"])
    p.add_argument("--kernel-size", type=int, default=1)
    p.add_argument("--kernel-param", type=float, default=0.0)


def _kernel_from_args(args) -> tuple[np.ndarray, dict]:
    if getattr(args, "kernel", None) is not None:
        return load_kernel(args.kernel), {"file": str(args.kernel)}
    k = make_kernel(args.kernel_kind, args.kernel_size, args.kernel_param)
    return k, {"kind": args.kernel_kind, "size": args.kernel_size, "param": args.kernel_param}


def cmd_degrade(args) -> int:
    image = load_pgm(args.input)
    kernel, kdesc = _kernel_from_args(args)
    y = degrade(image, DegradationSpec(kernel, args.noise, args.seed))
    out = Path(args.out)
    save_pgm(y, out)
    _write_json(
        _sidecar(out),
        {"command": "degrade", "input": str(args.input), "kernel": kdesc, "noise_sigma": args.noise, "seed": args.seed},
    )
    return EXIT_OK


def build_restore_config(args) -> SolverConfig:
    reg = REG_ALIASES[args.reg]
    variant = VARIANT_ALIASES[args.variant]
    values = value_set_from_bytes(args.values) if args.values else None
    if variant in ("soft", "post") and values is None:
        raise ConfigError(f"--variant {args.variant} needs --values")
    lam_I = args.lambda_i
    if variant == "soft":
        lam_I = DEFAULT_LAMBDA_I if lam_I is None else lam_I
        if not lam_I > 0:
            raise ConfigError("--variant soft needs --lambda-i > 0")
    else:
        if lam_I:
            raise ConfigError(f"--lambda-i > 0 only applies to --variant soft, not {args.variant}")
        lam_I = 0.0
    lam_N = args.lambda_n if args.lambda_n is not None else lambda_N_for(reg, args.noise)
    fields = dict(
        reg=reg, lambda_N=lam_N, lambda_I=lam_I, values=values,
        mu_growth=args.mu_growth, max_iters=args.max_iters, tol=args.tol,
    )
    for name in ("mu_I", "mu_N", "mu_max"):
        v = getattr(args, name.lower())
        if v is not None:
            fields[name] = v
    return SolverConfig(**fields)


def cmd_restore(args) -> int:
    config = build_restore_config(args)
    y = load_pgm(args.input)
    kernel, kdesc = _kernel_from_args(args)
    variant = VARIANT_ALIASES[args.variant]
    report = restore_post_round(y, kernel, config) if variant == "post" else restore(y, kernel, config)
    out = Path(args.out)
    save_pgm(report.final_image, out)
    payload = {"command": "restore", "input": str(args.input), "kernel": kdesc, "variant": variant}
    payload.update(report.to_dict())
    if args.ref is not None:
        ref = load_pgm(args.ref)
        x = report.final_image
        q = quantize(x) / 255.0
        payload["metrics"] = {
            "psnr_db": _json_number(psnr(ref, x)),
            "ssim": ssim(ref, x),
            "psnr_db_quantized": _json_number(psnr(ref, q)),
            "ssim_quantized": ssim(ref, q),
        }
    _write_json(_sidecar(out), payload)
    log.info("restore: %d iterations, converged=%s", report.iterations, report.converged)
    return EXIT_OK


def cmd_estimate(args) -> int:
    image = load_pgm(args.input)
    if args.baseline == "kmeans":
        values = global_kmeans_baseline(image, args.n)
        config = None
    else:
        config = EstimatorConfig(args.patch, args.stride, args.var_th, args.stretch)
        values = estimate_values(image, args.n, config)
    levels = values.to_bytes()
    print(",".join(str(v) for v in levels))
    out = Path(args.out) if args.out else Path(args.input).with_suffix(".values.json")
    _write_json(
        out,
        {
            "command": "estimate",
            "input": str(args.input),
            "n": args.n,
            "method": args.baseline or "kmedian",
            "config": None if config is None else asdict(config),
            "values": list(values.values),
            "values_8bit": levels,
        },
    )
    return EXIT_OK


def cmd_metrics(args) -> int:
    ref, test = load_pgm(args.ref), load_pgm(args.test)
    result = {"psnr_db": _json_number(psnr(ref, test)), "ssim": ssim(ref, test)}
    print(json.dumps(result))
    if args.out:
        _write_json(Path(args.out), {"command": "metrics", "ref": str(args.ref), "test": str(args.test), **result})
    return EXIT_OK


def cmd_prox(args) -> int:
    if args.steps < 2:
        raise ConfigError("--steps must be >= 2")
    param = ProxParam(ValueSet.from_unsorted(args.values), args.lam)
    c = np.linspace(args.start, args.stop, args.steps)
    phi = soft_round(param, c)
    lines = ["c,phi"] + [f"{a:.10g},{b:.10g}" for a, b in zip(c, phi)]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.spec is not None:
        spec = BenchSpec.from_dict(json.loads(Path(args.spec).read_text(encoding="utf-8")))
    else:
        overrides = {}
        if args.max_iters is not None:
            overrides["max_iters"] = args.max_iters
        if args.lambda_i is not None:
            overrides["lambda_I"] = args.lambda_i
        spec = BenchSpec(
            fixtures=args.fixtures,
            regs=tuple(REG_ALIASES[r] for r in args.regs),
            variants=tuple(args.variants),
            overrides=overrides,
        )
    for reg in spec.regs:
        if reg not in ("tv_l1", "l0_grad"):
            raise ConfigError(f"bench regularizer must be tv_l1 or l0_grad, got {reg!r}")
    rows = run_bench(spec, args.out, jobs=args.jobs)
    failed = sum(1 for r in rows if r["error"])
    for method, s in summarize(rows).items():
        print(f"{method:8s} psnr={s['psnr']:.3f} ssim={s['ssim']:.4f} n={s['count']}")
    if failed:
        log.warning("%d of %d runs failed", failed, len(rows))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="softround", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("degrade", help="blur and add noise to a PGM image")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    _add_kernel_args(p, with_file=False)
    p.add_argument("--noise", type=float, default=0.0, help="noise sigma on the unit scale")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_degrade)

    p = sub.add_parser("restore", help="non-blind restoration")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    _add_kernel_args(p, with_file=True)
    p.add_argument("--reg", default="tv", choices=sorted(REG_ALIASES))
    p.add_argument("--values", type=_int_list, help="distinct values as 8-bit integers, e.g. 26,217")
    p.add_argument("--variant", default="none", choices=sorted(VARIANT_ALIASES))
    p.add_argument("--lambda-n", type=float, help="gradient weight (default scales with --noise)")
    p.add_argument("--lambda-i", type=float, help=f"value-prior weight (soft default {DEFAULT_LAMBDA_I})")
    p.add_argument("--noise", type=float, default=0.01, help="noise sigma used for the default --lambda-n")
    p.add_argument("--mu-i", type=float)
    p.add_argument("--mu-n", type=float)
    p.add_argument("--mu-growth", type=float, default=1.05)
    p.add_argument("--mu-max", type=float)
    p.add_argument("--max-iters", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--ref", type=Path, help="ground truth PGM; adds metrics to the sidecar")
    p.set_defaults(func=cmd_restore)

    p = sub.add_parser("estimate", help="estimate the distinct values of an image")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--patch", type=int, default=5)
    p.add_argument("--stride", type=int, default=2)
    p.add_argument("--var-th", type=float, default=1e-4)
    p.add_argument("--stretch", type=float, default=0.15)
    p.add_argument("--baseline", choices=["kmeans"], help="use global K-means instead")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("metrics", help="PSNR and SSIM between two PGM images")
    p.add_argument("--ref", type=Path, required=True)
    p.add_argument("--test", type=Path, required=True)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("prox", help="tabulate the soft-rounding map as CSV")
    p.add_argument("--values", type=_float_list, required=True, help="unit-scale values, e.g. 0,1")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--steps", type=int, default=201)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_prox)

    p = sub.add_parser("bench", help="run the fixture x method benchmark")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--fixtures", default="all", choices=["binary", "multi", "all", "standard"])
    p.add_argument("--regs", nargs="+", default=["tv", "l0"], choices=sorted(REG_ALIASES))
    p.add_argument("--variants", nargs="+", default=list(VARIANTS), choices=list(VARIANTS))
    p.add_argument("--max-iters", type=int)
    p.add_argument("--lambda-i", type=float)
    p.add_argument("--spec", type=Path, help="BenchSpec as JSON (overrides the other selection flags)")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"softround: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"softround: error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except (NumericalError, FloatingPointError) as exc:
        print(f"softround: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"softround: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
