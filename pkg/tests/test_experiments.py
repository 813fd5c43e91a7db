"""Experiment harness: configs, sweeps, reports, dataset ingestion."""

import math

import numpy as np
import pytest

from goofloc import (
    ConfigError,
    ExperimentConfig,
    FingerprintKind,
    Report,
    build_goof,
    emit_report,
    ingest_recorded_dataset,
    load_report,
    merge_reports,
    run_forest_sweep,
    run_snr_sweep,
    save_snapshot_dataset,
    simulate_cell,
)
from goofloc.experiments import (
    config_from_text,
    config_hash,
    config_to_text,
    load_bmatrices,
    save_bmatrices,
)
from goofloc.fingerprints import KIND_ORDER
from goofloc.forest import PredictionMatrix


def micro_config(**over):
    base = dict(
        seed=123,
        grid_count=4,
        num_elements=4,
        snapshot_count=96,
        group_count=6,
        train_count=4,
        test_count=2,
        tree_count=4,
        depth_limit=4,
        noise_kinds=("gaussian",),
        snr_grid_db=(20.0,),
        windows=(2,),
        repetitions=1,
    )
    base.update(over)
    return ExperimentConfig(**base)


class TestConfig:
    def test_validation_names_offending_field(self):
        with pytest.raises(ConfigError) as err:
            micro_config(group_count=7).validate()
        assert "group_count" in str(err.value)
        with pytest.raises(ConfigError) as err:
            micro_config(train_count=5).validate()
        assert "train_count" in str(err.value)
        with pytest.raises(ConfigError) as err:
            micro_config(snr_grid_db=()).validate()
        assert "snr_grid_db" in str(err.value)
        with pytest.raises(ConfigError) as err:
            micro_config(windows=(9,)).validate()
        assert "windows" in str(err.value)

    def test_text_round_trip_and_hash(self):
        cfg = micro_config()
        text = config_to_text(cfg)
        back = config_from_text(text)
        assert back == cfg
        assert config_hash(back) == config_hash(cfg)
        assert config_hash(micro_config(seed=124)) != config_hash(cfg)

    def test_unknown_field_rejected(self):
        with pytest.raises(ConfigError):
            config_from_text("GOOF-CONFIG 1\nseed=1\nbogus=3\n")


class TestSnrSweep:
    def test_shape_contract_nine_method_rows(self):
        # 3 noise kinds x 3 SNRs, two windows -> 6 SIOF + mode + 2 SWIM = 9 methods
        cfg = micro_config(
            noise_kinds=("gaussian", "color", "impulse"),
            snr_grid_db=(-10.0, 6.0, 30.0),
            windows=(2, 1),
            repetitions=2,
        )
        report = run_snr_sweep(cfg)
        methods = {key[2] for key in report.rows}
        assert methods == {k.value for k in KIND_ORDER} | {"mode", "swim_w2", "swim_w1"}
        assert len(report.rows) == 3 * 3 * 9
        per_cell = cfg.grid_count * cfg.repetitions
        assert all(len(v) == per_cell for v in report.rows.values())

    def test_rhos_lie_in_unit_interval(self):
        report = run_snr_sweep(micro_config())
        for values in report.rows.values():
            assert all(0.0 <= v <= 1.0 for v in values)

    def test_noiseless_sentinel_control(self):
        # with the noise disabled every sample of a grid is identical, so the
        # five informative families memorize perfectly and both fusions follow;
        # normalized PSDs of a noiseless rank-1 block are grid-independent
        # (per-element gains cancel row-wise), leaving PSDF at chance level.
        # trees need >= Q leaves (depth > log2(Q)) to memorize Q classes
        cfg = micro_config(
            snr_grid_db=(math.inf,), grid_count=9, num_elements=3,
            tree_count=6, depth_limit=6,
        )
        report = run_snr_sweep(cfg)
        for method in ("cmf", "rssf", "ssf", "focf", "flomf", "mode", "swim_w2"):
            assert report.mean_rho("gaussian", math.inf, method) == 1.0
        assert report.mean_rho("gaussian", math.inf, "psdf") <= 0.5

    def test_deterministic_given_config_and_seed(self):
        a = run_snr_sweep(micro_config())
        b = run_snr_sweep(micro_config())
        assert a.rows == b.rows
        assert a.errors_m == b.errors_m

    def test_swim_prediction_counts(self):
        cfg = micro_config()
        report = run_snr_sweep(cfg)
        u = cfg.test_count - cfg.windows[0] + 1
        grids = cfg.grid_count * cfg.repetitions
        assert report.timings["swim_w2"]["predictions"] == u * grids
        assert report.timings["mode"]["predictions"] == grids


class TestForestSweep:
    def test_depth_trend(self):
        cfg = micro_config(snr_grid_db=(8.0,), repetitions=2)
        report = run_forest_sweep(cfg, "tree_depth", values=(2, 6))
        acc2 = np.mean(report.rows[("gaussian", 8.0, "rssf_d2")])
        acc6 = np.mean(report.rows[("gaussian", 8.0, "rssf_d6")])
        assert acc6 >= acc2

    def test_tree_number_timing(self):
        cfg = micro_config(snr_grid_db=(8.0,), repetitions=2)
        report = run_forest_sweep(cfg, "tree_number", values=(5, 50))
        assert (
            report.timings["rssf_t50"]["test_s"] > report.timings["rssf_t5"]["test_s"]
        )

    def test_ensemble_beats_single_tree_at_low_snr(self):
        cfg = micro_config(snr_grid_db=(0.0,), repetitions=3)
        report = run_forest_sweep(cfg, "tree_number", values=(1, 40))
        acc1 = np.mean(report.rows[("gaussian", 0.0, "rssf_t1")])
        acc40 = np.mean(report.rows[("gaussian", 0.0, "rssf_t40")])
        assert acc40 >= acc1

    def test_unknown_axis_rejected(self):
        with pytest.raises(ConfigError):
            run_forest_sweep(micro_config(), "learning_rate")


class TestIngest:
    def test_round_trip_into_goof(self, tmp_path):
        cfg = micro_config()
        blocks = simulate_cell(cfg, "gaussian", 20.0)
        path = tmp_path / "cell.goofsnap"
        save_snapshot_dataset(path, blocks)
        loaded = ingest_recorded_dataset(path)
        assert len(loaded) == cfg.grid_count
        for a, b in zip(blocks, loaded):
            assert np.array_equal(a.data, b.data)
        goof = build_goof(loaded, cfg.group_count)
        assert goof.grids() == list(range(1, cfg.grid_count + 1))

    def test_truncation_never_yields_partial_blocks(self, tmp_path):
        from goofloc import FormatError

        cfg = micro_config()
        path = tmp_path / "cell.goofsnap"
        save_snapshot_dataset(path, simulate_cell(cfg, "gaussian", 20.0))
        path.write_bytes(path.read_bytes()[:-1])
        with pytest.raises(FormatError):
            ingest_recorded_dataset(path)


class TestReports:
    def test_csv_shape_and_determinism(self, tmp_path):
        cfg = micro_config(
            noise_kinds=("gaussian", "color"), snr_grid_db=(0.0, 20.0), repetitions=1
        )
        report = run_snr_sweep(cfg)
        paths = emit_report(report, "csv", tmp_path / "one")
        names = {p.name for p in paths}
        assert names == {"curve_gaussian.csv", "curve_color.csv", "timing.csv", "config_echo.txt"}
        curve = (tmp_path / "one" / "curve_gaussian.csv").read_text()
        lines = curve.strip().splitlines()
        assert lines[0].startswith("# config_hash=")
        assert lines[1] == "snr_db,method,mean_rho,std_rho,n,mean_centroid_error_m"
        assert len(lines) == 2 + 2 * 8  # 2 SNRs x (6 SIOF + mode + swim)

        rerun = run_snr_sweep(micro_config(
            noise_kinds=("gaussian", "color"), snr_grid_db=(0.0, 20.0), repetitions=1
        ))
        emit_report(rerun, "csv", tmp_path / "two")
        for name in ("curve_gaussian.csv", "curve_color.csv", "config_echo.txt"):
            assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "two" / name).read_bytes()

    def test_structured_text_round_trip(self, tmp_path):
        report = run_snr_sweep(micro_config())
        (path,) = emit_report(report, "structured-text", tmp_path)
        back = load_report(path)
        assert back.config_hash == report.config_hash
        assert back.rows == report.rows
        assert back.errors_m == report.errors_m
        assert back.timings.keys() == report.timings.keys()

    def test_empty_report_refused(self, tmp_path):
        with pytest.raises(ValueError):
            emit_report(Report(config_hash="x", seed=1), "csv", tmp_path)

    def test_merge_refuses_mixed_hashes(self):
        a = run_snr_sweep(micro_config())
        b = run_snr_sweep(micro_config(seed=999))
        with pytest.raises(ValueError):
            merge_reports(a, b)
        doubled = merge_reports(a, run_snr_sweep(micro_config()))
        key = next(iter(a.rows))
        assert len(doubled.rows[key]) == 2 * len(a.rows[key])

    def test_bmatrices_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        matrices = {
            g: PredictionMatrix(matrix=rng.integers(1, 5, size=(6, 6)), true_label=g)
            for g in (1, 2, 3)
        }
        path = tmp_path / "b.txt"
        save_bmatrices(path, matrices)
        back = load_bmatrices(path)
        assert back.keys() == matrices.keys()
        for g in matrices:
            assert np.array_equal(back[g].matrix, matrices[g].matrix)
            assert back[g].true_label == g
