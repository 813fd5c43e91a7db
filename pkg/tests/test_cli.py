"""CLI pipeline: simulate -> build-goof -> train -> test -> fuse, sweeps."""

import pytest

from goofloc.cli import main
from goofloc.experiments import config_to_text
from goofloc import ExperimentConfig


@pytest.fixture
def config_file(tmp_path):
    cfg = ExperimentConfig(
        seed=321,
        grid_count=4,
        num_elements=4,
        snapshot_count=64,
        group_count=4,
        train_count=2,
        test_count=2,
        tree_count=3,
        depth_limit=4,
        noise_kinds=("gaussian",),
        snr_grid_db=(18.0,),
        windows=(2,),
        repetitions=1,
    )
    path = tmp_path / "config.txt"
    path.write_text(config_to_text(cfg), encoding="utf-8")
    return path


def test_stagewise_pipeline(tmp_path, config_file, capsys):
    data_dir = tmp_path / "data"
    assert main(["simulate", "--config", str(config_file), "--out-dir", str(data_dir)]) == 0
    dataset = data_dir / "snapshots_gaussian_18dB.goofsnap"
    assert dataset.exists()

    goof_dir = tmp_path / "goof"
    assert main([
        "build-goof", "--dataset", str(dataset), "--group-count", "4", "--out", str(goof_dir),
    ]) == 0

    bank_dir = tmp_path / "bank"
    assert main([
        "train", "--goof", str(goof_dir), "--train-count", "2", "--tree-count", "3",
        "--depth-limit", "4", "--seed", "5", "--out", str(bank_dir),
    ]) == 0
    assert (bank_dir / "forest_cmf.txt").exists()

    bmat = tmp_path / "b.txt"
    assert main([
        "test", "--goof", str(goof_dir), "--skip-count", "2", "--bank", str(bank_dir),
        "--out", str(bmat),
    ]) == 0

    fusion = tmp_path / "fusion.txt"
    assert main(["fuse", "--bmatrices", str(bmat), "--window", "2", "--out", str(fusion)]) == 0
    text = fusion.read_text()
    assert text.startswith("GOOF-FUSION 1")
    assert "grid=1" in text and "rho=" in text and "selected=" in text
    capsys.readouterr()


def test_sweep_snr_and_report(tmp_path, config_file, capsys):
    out = tmp_path / "out"
    assert main([
        "sweep-snr", "--config", str(config_file), "--out-dir", str(out),
        "--format", "structured-text", "--quiet",
    ]) == 0
    report_file = out / "report.txt"
    assert report_file.exists()

    csv_dir = tmp_path / "csv"
    assert main([
        "report", "--report", str(report_file), "--format", "csv", "--out-dir", str(csv_dir),
    ]) == 0
    assert (csv_dir / "curve_gaussian.csv").exists()
    assert (csv_dir / "timing.csv").exists()
    capsys.readouterr()


def test_sweep_forest(tmp_path, config_file, capsys):
    out = tmp_path / "forest"
    assert main([
        "sweep-forest", "--config", str(config_file), "--vary", "tree_number",
        "--out-dir", str(out), "--quiet",
    ]) == 0
    assert (out / "curve_gaussian.csv").exists()
    capsys.readouterr()


def test_flag_overrides_config(tmp_path, config_file, capsys):
    out = tmp_path / "out"
    assert main([
        "sweep-snr", "--config", str(config_file), "--snr-grid-db", "6",
        "--out-dir", str(out), "--quiet",
    ]) == 0
    curve = (out / "curve_gaussian.csv").read_text()
    assert "\n6.0," in curve and "18.0," not in curve
    capsys.readouterr()


def test_config_error_exit_code(tmp_path, capsys):
    # group_count does not divide snapshot_count
    code = main([
        "sweep-snr", "--seed", "1", "--snapshot-count", "10", "--group-count", "3",
        "--out-dir", str(tmp_path / "x"),
    ])
    assert code == 2
    assert "config error" in capsys.readouterr().err


def test_missing_config_exit_code(tmp_path, capsys):
    assert main(["sweep-snr", "--out-dir", str(tmp_path / "x")]) == 2
    capsys.readouterr()


def test_format_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.goofsnap"
    bad.write_bytes(b"WRONG 1\nend-header\n")
    code = main([
        "build-goof", "--dataset", str(bad), "--group-count", "2",
        "--out", str(tmp_path / "g"),
    ])
    assert code == 3
    assert "format error" in capsys.readouterr().err
