import json

import numpy as np
import pytest

from softround.cli import main
from softround.degrade import make_kernel
from softround.fixtures import pattern_image, standard_binary_fixture
from softround.imgcore import load_pgm, save_kernel, save_pgm


@pytest.fixture
def work(tmp_path):
    f = standard_binary_fixture()
    save_pgm(f.image, tmp_path / "x.pgm")
    save_kernel(make_kernel("motion_line", 9, 30.0), tmp_path / "k.txt")
    rc = main(
        [
            "degrade", "--input", str(tmp_path / "x.pgm"), "--kernel-kind", "motion_line",
            "--kernel-size", "9", "--kernel-param", "30", "--noise", "0.01", "--seed", "7",
            "--out", str(tmp_path / "y.pgm"),
        ]
    )
    assert rc == 0
    return tmp_path


def _restore(work, name, *extra):
    args = ["restore", "--input", str(work / "y.pgm"), "--kernel", str(work / "k.txt"), "--out", str(work / name)]
    return main(args + list(extra))


def test_degrade_writes_image_and_sidecar(work):
    meta = json.loads((work / "y.json").read_text())
    assert meta["seed"] == 7 and meta["noise_sigma"] == 0.01
    assert meta["kernel"] == {"kind": "motion_line", "size": 9, "param": 30.0}
    assert meta["schema_version"] == 1 and "tool_version" in meta
    assert load_pgm(work / "y.pgm").shape == (64, 64)


def test_degrade_same_seed_identical(work):
    args = ["degrade", "--input", str(work / "x.pgm"), "--kernel-kind", "motion_line", "--kernel-size", "9",
            "--kernel-param", "30", "--noise", "0.01", "--seed", "7", "--out", str(work / "y2.pgm")]
    assert main(args) == 0
    assert (work / "y.pgm").read_bytes() == (work / "y2.pgm").read_bytes()


def test_degrade_identity_no_noise_is_pixel_identical(work):
    assert main(["degrade", "--input", str(work / "x.pgm"), "--out", str(work / "same.pgm")]) == 0
    assert (work / "same.pgm").read_bytes() == (work / "x.pgm").read_bytes()


def test_restore_soft_and_post(work):
    assert _restore(work, "s.pgm", "--reg", "l0", "--values", "26,217", "--variant", "soft",
                    "--ref", str(work / "x.pgm")) == 0
    meta = json.loads((work / "s.json").read_text())
    assert meta["config"]["reg"] == "l0_grad" and meta["config"]["lambda_I"] > 0
    assert meta["residual_trace"][-1] < 1e-3
    assert "psnr_db_quantized" in meta["metrics"]
    assert _restore(work, "p.pgm", "--reg", "l0", "--values", "26,217", "--variant", "post") == 0
    levels = set(np.unique(np.round(load_pgm(work / "p.pgm") * 255)).astype(int))
    assert levels <= {26, 217}


def test_restore_baseline_reduction(work):
    assert _restore(work, "a.pgm", "--reg", "tv") == 0
    assert _restore(work, "b.pgm", "--reg", "tv", "--values", "26,217", "--variant", "none", "--lambda-i", "0") == 0
    assert (work / "a.pgm").read_bytes() == (work / "b.pgm").read_bytes()


@pytest.mark.parametrize(
    "extra",
    [
        ["--variant", "soft"],
        ["--variant", "post"],
        ["--variant", "none", "--lambda-i", "0.1", "--values", "26,217"],
        ["--variant", "soft", "--values", "26,217", "--lambda-i", "0"],
        ["--values", "26,300", "--variant", "soft"],
        ["--max-iters", "0"],
    ],
)
def test_restore_config_errors(work, extra, capsys):
    assert _restore(work, "bad.pgm", *extra) == 2
    assert "error" in capsys.readouterr().err


def test_bad_arguments_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["restore", "--reg", "tv3"])
    assert info.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_io_errors_exit_4(tmp_path):
    assert main(["metrics", "--ref", str(tmp_path / "missing.pgm"), "--test", str(tmp_path / "m.pgm")]) == 4
    (tmp_path / "bad.pgm").write_bytes(b"P5\n4 4\n255\n\x00")
    assert main(["estimate", "--input", str(tmp_path / "bad.pgm"), "--n", "2"]) == 4


def test_numerical_failure_exit_3(tmp_path, monkeypatch):
    from softround import cli
    from softround.solver import NumericalError

    def broken(*args, **kwargs):
        raise NumericalError(4, "x")

    monkeypatch.setattr(cli, "restore", broken)
    save_pgm(np.zeros((16, 16)), tmp_path / "y.pgm")
    assert main(["restore", "--input", str(tmp_path / "y.pgm"), "--out", str(tmp_path / "r.pgm")]) == 3


def test_metrics_json(work, capsys):
    assert main(["metrics", "--ref", str(work / "x.pgm"), "--test", str(work / "x.pgm")]) == 0
    assert json.loads(capsys.readouterr().out) == {"psnr_db": "inf", "ssim": 1.0}
    assert main(["metrics", "--ref", str(work / "x.pgm"), "--test", str(work / "y.pgm"),
                 "--out", str(work / "m.json")]) == 0
    out = json.loads(capsys.readouterr().out)
    assert 0 < out["psnr_db"] < 40 and out["ssim"] < 1
    assert json.loads((work / "m.json").read_text())["schema_version"] == 1


def test_estimate_prints_levels(tmp_path, capsys):
    save_pgm(pattern_image(0, levels=(0, 100, 150, 255)).image, tmp_path / "p.pgm")
    assert main(["estimate", "--input", str(tmp_path / "p.pgm"), "--n", "4"]) == 0
    assert capsys.readouterr().out.strip() == "0,100,150,255"
    meta = json.loads((tmp_path / "p.values.json").read_text())
    assert meta["values_8bit"] == [0, 100, 150, 255] and meta["config"]["patch_size"] == 5
    assert main(["estimate", "--input", str(tmp_path / "p.pgm"), "--n", "4", "--baseline", "kmeans",
                 "--out", str(tmp_path / "km.json")]) == 0
    assert capsys.readouterr().out.strip() == "0,100,150,255"
    assert json.loads((tmp_path / "km.json").read_text())["method"] == "kmeans"


def test_prox_csv(capsys):
    assert main(["prox", "--values", "0,1", "--lambda", "0.5", "--from", "-0.5", "--to", "1.5", "--steps", "5"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "c,phi"
    assert lines[1:] == ["-0.5,-0.25", "0,0", "0.5,0.5", "1,1", "1.5,1.25"]


def test_prox_errors():
    assert main(["prox", "--values", "0,1", "--lambda", "0", "--from", "0", "--to", "1"]) == 2
    assert main(["prox", "--values", "0,1", "--lambda", "1", "--from", "0", "--to", "1", "--steps", "1"]) == 2


def test_bench_command(tmp_path, capsys):
    out = tmp_path / "bench"
    assert main(["bench", "--fixtures", "standard", "--regs", "tv", "--variants", "base", "S",
                 "--max-iters", "10", "--out", str(out)]) == 0
    assert len((out / "results.csv").read_text().splitlines()) == 1 + 6
    printed = capsys.readouterr().out
    assert "TV+S" in printed
    spec = json.loads((out / "manifest.json").read_text())["spec"]
    (tmp_path / "spec.json").write_text(json.dumps(spec))
    assert main(["bench", "--spec", str(tmp_path / "spec.json"), "--out", str(tmp_path / "again")]) == 0
    assert (out / "results.csv").read_bytes() == (tmp_path / "again" / "results.csv").read_bytes()
