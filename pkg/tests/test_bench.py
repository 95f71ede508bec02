import csv
import json
import math

import pytest

from softround import bench
from softround.bench import PSNR_CAP, BenchSpec, Setting, run_bench, summarize

QUICK = {"max_iters": 15}


@pytest.fixture(scope="module")
def binary_rows():
    return run_bench(BenchSpec(fixtures="binary"))


def test_two_method_sweep_has_30_rows(tmp_path):
    spec = BenchSpec(fixtures="binary", regs=("tv_l1",), variants=("base", "S"), overrides=QUICK)
    rows = run_bench(spec, tmp_path)
    assert len(rows) == 30
    with open(tmp_path / "results.csv", newline="", encoding="utf-8") as fh:
        table = list(csv.DictReader(fh))
    assert len(table) == 30
    assert {r["method"] for r in table} == {"TV", "TV+S"}
    assert len(list((tmp_path / "runs").glob("*.json"))) == 30


def test_every_pair_gets_one_report(tmp_path):
    spec = BenchSpec(fixtures="standard", overrides=QUICK)
    rows = run_bench(spec, tmp_path)
    keys = {(r["fixture"], r["kernel"], r["noise"], r["method"]) for r in rows}
    assert len(keys) == len(rows) == 3 * 2 * 3


def test_rerun_gives_identical_csv(tmp_path):
    spec = BenchSpec(fixtures="standard", overrides=QUICK)
    run_bench(spec, tmp_path / "a")
    run_bench(spec, tmp_path / "b", jobs=2)
    a = (tmp_path / "a" / "results.csv").read_bytes()
    assert a == (tmp_path / "b" / "results.csv").read_bytes()
    assert b"\r\n" not in a
    assert a.splitlines()[0].decode() == ",".join(bench.CSV_FIELDS)


def test_run_json_is_self_describing(tmp_path):
    spec = BenchSpec(fixtures="standard", settings=(Setting("motion_line", 9, 30.0, 0.03, 1000),), overrides=QUICK)
    run_bench(spec, tmp_path)
    files = sorted((tmp_path / "runs").glob("*.json"))
    assert len(files) == 6
    d = json.loads(files[0].read_text())
    for key in ("schema_version", "tool_version", "setting", "config", "psnr", "ssim", "psnr_quantized"):
        assert key in d
    assert d["setting"]["seed"] == 1000
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert BenchSpec.from_dict(manifest["spec"]) == spec


def test_failures_are_recorded(monkeypatch):
    real = bench.restore

    def flaky(y, kernel, config):
        if config.lambda_I > 0:
            raise RuntimeError("boom")
        return real(y, kernel, config)

    monkeypatch.setattr(bench, "restore", flaky)
    rows = run_bench(BenchSpec(fixtures="standard", regs=("tv_l1",), overrides=QUICK))
    bad = [r for r in rows if r["error"]]
    assert len(bad) == 3 and all(r["variant"] == "S" for r in bad)
    assert all(not r["error"] for r in rows if r["variant"] != "S")


def test_bad_override_recorded_not_raised():
    rows = run_bench(BenchSpec(fixtures="standard", variants=("base",), overrides={"max_iters": 0}))
    assert rows and all("max_iters" in r["error"] for r in rows)


def test_summarize_caps_infinite_psnr():
    rows = [
        {"method": "A", "psnr": math.inf, "ssim": 1.0, "error": ""},
        {"method": "A", "psnr": 20.0, "ssim": 0.5, "error": ""},
        {"method": "B", "psnr": float("nan"), "ssim": float("nan"), "error": "x"},
    ]
    s = summarize(rows)
    assert s["A"]["psnr"] == (PSNR_CAP + 20.0) / 2
    assert s["A"]["count"] == 2 and "B" not in s


def test_soft_beats_base_on_binary(binary_rows):
    s = summarize(binary_rows)
    for reg in ("TV", "L0"):
        assert s[reg + "+S"]["psnr"] > s[reg]["psnr"]
        assert s[reg + "+S"]["psnr"] > s[reg + "+R"]["psnr"]


@pytest.mark.xfail(strict=True, reason="post-rounding improves PSNR on the desk-scale binary fixtures")
def test_base_at_least_post_round_on_binary(binary_rows):
    s = summarize(binary_rows)
    assert s["TV"]["psnr"] >= s["TV+R"]["psnr"] and s["L0"]["psnr"] >= s["L0+R"]["psnr"]
