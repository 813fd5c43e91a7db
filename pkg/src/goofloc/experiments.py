"""Experiment orchestration: declarative configs, SNR and forest-parameter
sweeps, timing, and report emission.

Every sweep is a deterministic function of (config, seed): all random
streams are derived from the seed and the cell key (repetition, noise
kind, SNR, grid), so cells could run in any order or in parallel without
changing the results.
"""

from __future__ import annotations

import hashlib
import math
import time
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import channel
from .channel import ArrayGeometry, NoiseSpec, Scenario, make_grid_scenario
from .dataset import load_snapshot_dataset
from .errors import ConfigError, FormatError
from .fingerprints import KIND_ORDER, FingerprintKind, build_goof
from .forest import ClassifierBank, PredictionMatrix, WeakLearnerSpec, train_forest
from .fusion import full_matrix_mode, prediction_probability, swim
from .textio import check_magic, fmt_value, parse_kv

CONFIG_MAGIC = "GOOF-CONFIG"
CONFIG_VERSION = 1

REPORT_MAGIC = "GOOF-REPORT"
REPORT_VERSION = 1

BMAT_MAGIC = "GOOF-BMAT"
BMAT_VERSION = 1


@dataclass
class ExperimentConfig:
    """Declarative description of one sweep. ``seed`` is mandatory;
    nothing is ever seeded from the wall clock."""

    seed: int
    room_width: float = 8.0
    room_height: float = 8.0
    grid_count: int = 16
    num_elements: int = 7
    spacing_over_wavelength: float = 0.5
    carrier_frequency: float = 950e6
    path_count: int = 20
    angular_spread_deg: float = 25.0
    delay_spread_ratio: float = 0.1
    source_freq: float = 0.25
    noise_kinds: tuple = ("gaussian", "color", "impulse")
    snr_grid_db: tuple = (-10.0, -2.0, 6.0, 14.0, 22.0, 30.0)
    impulse_alpha: float = 1.4
    impulse_beta: float = 0.0
    impulse_delta: float = 0.0
    color_fir_length: int = 5
    snapshot_count: int = 640
    group_count: int = 20
    train_count: int = 12
    test_count: int = 8
    tree_count: int = 40
    depth_limit: int = 8
    primitive: str = "axis_aligned_stump"
    feature_subspace: int | None = None
    threshold_candidates: int = 10
    flom_exponent: float = 1.2
    psd_points: int | None = None
    windows: tuple = (5,)
    repetitions: int = 3

    def validate(self) -> None:
        if not isinstance(self.seed, int):
            raise ConfigError("seed", "a fixed integer seed is mandatory")
        if self.grid_count < 1:
            raise ConfigError("grid_count", "must be >= 1")
        if self.num_elements < 2:
            raise ConfigError("num_elements", "must be >= 2")
        if not self.noise_kinds:
            raise ConfigError("noise_kinds", "must be nonempty")
        for kind in self.noise_kinds:
            if kind not in channel.NOISE_KINDS:
                raise ConfigError("noise_kinds", f"unsupported kind {kind!r}")
        if not self.snr_grid_db:
            raise ConfigError("snr_grid_db", "must be nonempty")
        if self.snapshot_count % self.group_count != 0:
            raise ConfigError(
                "group_count",
                f"snapshot_count {self.snapshot_count} not divisible by {self.group_count}",
            )
        if self.train_count + self.test_count > self.group_count:
            raise ConfigError(
                "train_count", "train_count + test_count must not exceed group_count"
            )
        if self.train_count < 1 or self.test_count < 1:
            raise ConfigError("train_count", "train and test counts must be >= 1")
        if self.tree_count < 1:
            raise ConfigError("tree_count", "must be >= 1")
        if self.depth_limit < 1:
            raise ConfigError("depth_limit", "must be >= 1")
        if not 1.0 < self.flom_exponent <= 2.0:
            raise ConfigError("flom_exponent", "must be in (1, 2]")
        snapshots_per_group = self.snapshot_count // self.group_count
        if self.psd_points is not None and not 1 <= self.psd_points <= snapshots_per_group:
            raise ConfigError("psd_points", f"must be in 1..{snapshots_per_group}")
        if not self.windows:
            raise ConfigError("windows", "must be nonempty")
        for w in self.windows:
            if not 1 <= w <= self.test_count:
                raise ConfigError("windows", f"window {w} outside 1..{self.test_count}")
        if self.repetitions < 1:
            raise ConfigError("repetitions", "must be >= 1")
        try:
            self.scenario()
        except ValueError as exc:
            raise ConfigError("grid_count", str(exc)) from exc

    def scenario(self) -> Scenario:
        return make_grid_scenario(self.room_width, self.room_height, self.grid_count)

    def geometry(self) -> ArrayGeometry:
        return ArrayGeometry(
            num_elements=self.num_elements,
            spacing_over_wavelength=self.spacing_over_wavelength,
            carrier_frequency=self.carrier_frequency,
        )

    def learner_spec(self) -> WeakLearnerSpec:
        return WeakLearnerSpec(
            primitive=self.primitive,
            feature_subspace_size=self.feature_subspace,
            threshold_candidates=self.threshold_candidates,
        )

    @property
    def snapshots_per_group(self) -> int:
        return self.snapshot_count // self.group_count


_TUPLE_FIELDS = {"noise_kinds": str, "snr_grid_db": float, "windows": int}
_OPTIONAL_INT_FIELDS = ("feature_subspace", "psd_points")


def config_to_text(config: ExperimentConfig) -> str:
    """Canonical structured-text form (also the hash input)."""
    lines = [f"{CONFIG_MAGIC} {CONFIG_VERSION}"]
    for f in fields(ExperimentConfig):
        value = getattr(config, f.name)
        lines.append(f"{f.name}={'none' if value is None else fmt_value(value)}")
    return "\n".join(lines) + "\n"


def config_from_text(text: str) -> ExperimentConfig:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FormatError("empty config", 0)
    check_magic(lines[0], CONFIG_MAGIC, CONFIG_VERSION)
    raw = dict(parse_kv(line) for line in lines[1:])
    return config_from_mapping(raw)


def config_from_mapping(raw: dict) -> ExperimentConfig:
    """Build a config from string values (config files, CLI flags)."""
    kwargs = {}
    known = {f.name: f for f in fields(ExperimentConfig)}
    for key, value in raw.items():
        if key not in known:
            raise ConfigError(key, "unknown configuration field")
        if value is None or value == "none":
            kwargs[key] = None
            continue
        if key in _TUPLE_FIELDS:
            elem = _TUPLE_FIELDS[key]
            kwargs[key] = tuple(elem(tok.strip()) for tok in str(value).split(",") if tok.strip())
        elif key in _OPTIONAL_INT_FIELDS:
            kwargs[key] = int(value)
        elif known[key].type in ("int", int):
            kwargs[key] = int(value)
        elif known[key].type in ("float", float):
            kwargs[key] = float(value)
        else:
            kwargs[key] = str(value)
    if "seed" not in kwargs:
        raise ConfigError("seed", "a fixed integer seed is mandatory")
    return ExperimentConfig(**kwargs)


def config_hash(config: ExperimentConfig) -> str:
    return hashlib.sha256(config_to_text(config).encode("utf-8")).hexdigest()


@dataclass
class Report:
    """Per (noise kind, SNR, method) prediction probabilities plus timing.

    ``rows`` hold the raw per-(grid, repetition) values; aggregation to
    mean/std happens at emission time so merges stay lossless.
    """

    config_hash: str
    seed: int
    rows: dict = field(default_factory=dict)  # (kind, snr, method) -> [rho...]
    errors_m: dict = field(default_factory=dict)  # same key -> [meters...]
    timings: dict = field(default_factory=dict)  # method -> {train_s, test_s, predictions}

    def add(self, kind: str, snr: float, method: str, rho: float, error_m: float) -> None:
        key = (kind, float(snr), method)
        self.rows.setdefault(key, []).append(float(rho))
        self.errors_m.setdefault(key, []).append(float(error_m))

    def add_timing(self, method: str, train_s: float = 0.0, test_s: float = 0.0, predictions: int = 0):
        entry = self.timings.setdefault(method, {"train_s": 0.0, "test_s": 0.0, "predictions": 0})
        entry["train_s"] += train_s
        entry["test_s"] += test_s
        entry["predictions"] += predictions

    def mean_rho(self, kind: str, snr: float, method: str) -> float:
        return float(np.mean(self.rows[(kind, float(snr), method)]))


def merge_reports(first: Report, second: Report) -> Report:
    """Concatenate two reports of the same configuration."""
    if first.config_hash != second.config_hash:
        raise ValueError("refusing to merge reports with different config hashes")
    merged = Report(config_hash=first.config_hash, seed=first.seed)
    for src in (first, second):
        for key, values in src.rows.items():
            merged.rows.setdefault(key, []).extend(values)
        for key, values in src.errors_m.items():
            merged.errors_m.setdefault(key, []).extend(values)
        for method, entry in src.timings.items():
            merged.add_timing(method, entry["train_s"], entry["test_s"], entry["predictions"])
    return merged


def _snr_key(snr_db: float) -> int:
    """Non-negative cell-key component for an SNR value (inf allowed)."""
    return (int(round(snr_db * 1000)) + 2**31) if math.isfinite(snr_db) else 2**62


def _cell_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, *key)))


def _cell_seed(seed: int, *key: int) -> int:
    return int(np.random.SeedSequence((seed, *key)).generate_state(1)[0])


def simulate_cell(
    config: ExperimentConfig,
    noise_kind: str,
    snr_db: float,
    repetition: int = 0,
) -> list:
    """Snapshot blocks for every grid of one (noise kind, SNR, rep) cell."""
    scenario = config.scenario()
    geometry = config.geometry()
    kind_idx = channel.NOISE_KINDS.index(noise_kind)
    snr_key = _snr_key(snr_db)
    spread_rad = math.radians(config.angular_spread_deg)
    blocks = []
    for gi, pos in enumerate(scenario.grid_positions):
        theta0, tau0 = channel.geometry_to_channel(pos, scenario)
        base = (repetition, kind_idx, snr_key, gi)
        paths = channel.generate_paths(
            theta0,
            tau0,
            spread_rad,
            tau0 * config.delay_spread_ratio,
            config.path_count,
            _cell_rng(config.seed, *base, 0),
        )
        block = channel.synthesize_snapshots(
            paths,
            geometry,
            config.snapshot_count,
            _cell_rng(config.seed, *base, 1),
            grid_label=gi + 1,
            source_freq=config.source_freq,
        )
        spec = NoiseSpec(
            kind=noise_kind,
            snr_db=snr_db,
            fir_window_length=config.color_fir_length,
            alpha=config.impulse_alpha,
            beta=config.impulse_beta,
            delta=config.impulse_delta,
        )
        blocks.append(channel.add_noise(block, spec, _cell_rng(config.seed, *base, 2)))
    return blocks


def _distance_matrix(scenario: Scenario) -> np.ndarray:
    pos = scenario.grid_positions
    return np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1)


def _train_bank_timed(config, goof_train, rep, kind_idx, snr_key, report):
    """Train all six forests, recording per-kind training seconds."""
    spec = config.learner_spec()
    forests = {}
    total = 0.0
    for ki, kind in enumerate(KIND_ORDER):
        x, y = goof_train.stack(kind)
        seed = _cell_seed(config.seed, rep, kind_idx, snr_key, 100 + ki)
        t0 = time.perf_counter()
        forests[kind] = train_forest(
            x,
            y,
            config.tree_count,
            config.depth_limit,
            spec,
            seed,
            class_count=config.grid_count,
            kind=kind,
        )
        dt = time.perf_counter() - t0
        total += dt
        report.add_timing(kind.value, train_s=dt)
    return ClassifierBank(forests=forests), total


def _predict_cells_timed(config, bank, goof_test, report):
    """Per-grid prediction matrices; returns ({grid: PredictionMatrix}, test seconds)."""
    grids = goof_test.grids()
    z = goof_test.group_count
    columns = {}
    total = 0.0
    for kind in KIND_ORDER:
        x = np.vstack([np.array(goof_test.features(kind, g)) for g in grids])
        t0 = time.perf_counter()
        labels = bank.forests[kind].predict_batch(x)
        dt = time.perf_counter() - t0
        total += dt
        report.add_timing(kind.value, test_s=dt, predictions=x.shape[0])
        columns[kind] = labels.reshape(len(grids), z)
    matrices = {}
    for i, grid in enumerate(grids):
        mat = np.stack([columns[kind][i] for kind in KIND_ORDER], axis=1)
        matrices[grid] = PredictionMatrix(matrix=mat, true_label=grid)
    return matrices, total


def run_snr_sweep(config: ExperimentConfig, verbose: bool = False) -> Report:
    """The accuracy-versus-SNR study.

    For every (noise kind, SNR, repetition) cell: simulate all grids,
    build and split the fingerprint store, train the bank, and score the
    six single-fingerprint classifiers, the full-matrix mode baseline,
    and the sliding-window fusion at each configured window length.
    """
    config.validate()
    report = Report(config_hash=config_hash(config), seed=config.seed)
    scenario = config.scenario()
    dist = _distance_matrix(scenario)
    for rep in range(config.repetitions):
        for kind_idx, noise_kind in enumerate(config.noise_kinds):
            for snr in config.snr_grid_db:
                _run_snr_cell(config, report, scenario, dist, rep, kind_idx, noise_kind, snr)
                if verbose:
                    print(f"[sweep-snr] rep={rep} noise={noise_kind} snr={snr:g} dB done")
    return report


def _run_snr_cell(config, report, scenario, dist, rep, kind_idx, noise_kind, snr):
    snr_key = _snr_key(snr)
    blocks = simulate_cell(config, noise_kind, snr, rep)
    goof = build_goof(blocks, config.group_count, config.flom_exponent, config.psd_points)
    goof_train, goof_test = goof.split(config.train_count, config.test_count)
    bank, train_total = _train_bank_timed(config, goof_train, rep, kind_idx, snr_key, report)
    matrices, test_total = _predict_cells_timed(config, bank, goof_test, report)

    fusion_methods = ["mode"] + [f"swim_w{w}" for w in config.windows]
    for method in fusion_methods:
        report.add_timing(method, train_s=train_total, test_s=test_total)

    for grid, pm in matrices.items():
        b = pm.matrix
        for ki, kind in enumerate(KIND_ORDER):
            rho = float((b[:, ki] == grid).mean())
            err = float(dist[b[:, ki] - 1, grid - 1].mean())
            report.add(noise_kind, snr, kind.value, rho, err)

        t0 = time.perf_counter()
        mode_label = full_matrix_mode(b, class_count=config.grid_count)
        report.add_timing("mode", test_s=time.perf_counter() - t0, predictions=1)
        report.add(
            noise_kind, snr, "mode",
            1.0 if mode_label == grid else 0.0,
            float(dist[mode_label - 1, grid - 1]),
        )

        for w in config.windows:
            t0 = time.perf_counter()
            result = swim(b, w, class_count=config.grid_count)
            dt = time.perf_counter() - t0
            report.add_timing(f"swim_w{w}", test_s=dt, predictions=result.prediction_count)
            report.add(
                noise_kind, snr, f"swim_w{w}",
                prediction_probability(result.labels, grid),
                float(dist[result.labels - 1, grid - 1].mean()),
            )


DEPTH_SWEEP_VALUES = (2, 3, 4, 5, 6, 7, 8)
TREE_SWEEP_VALUES = (10, 40, 70, 100)


def run_forest_sweep(
    config: ExperimentConfig,
    vary: str,
    values: tuple | None = None,
    verbose: bool = False,
) -> Report:
    """Forest hyperparameter study on the RSS fingerprints alone.

    ``vary`` is ``tree_depth`` or ``tree_number``. The store is split
    half/half into train and test; every swept value reuses the same
    simulated cells, so differences come from the forest alone.
    """
    config.validate()
    if vary == "tree_depth":
        values = DEPTH_SWEEP_VALUES if values is None else tuple(values)
    elif vary == "tree_number":
        values = TREE_SWEEP_VALUES if values is None else tuple(values)
    else:
        raise ConfigError("vary", "must be tree_depth or tree_number")
    report = Report(config_hash=config_hash(config), seed=config.seed)
    noise_kind = config.noise_kinds[0]
    kind_idx = 0
    train_count = config.group_count // 2
    test_count = config.group_count - train_count
    spec = config.learner_spec()
    rssf = FingerprintKind.RSSF

    for rep in range(config.repetitions):
        for snr in config.snr_grid_db:
            snr_key = _snr_key(snr)
            blocks = simulate_cell(config, noise_kind, snr, rep)
            goof = build_goof(blocks, config.group_count, config.flom_exponent, config.psd_points)
            goof_train, goof_test = goof.split(train_count, test_count)
            x_train, y_train = goof_train.stack(rssf)
            grids = goof_test.grids()
            x_test = np.vstack([np.array(goof_test.features(rssf, g)) for g in grids])
            for value in values:
                depth = value if vary == "tree_depth" else config.depth_limit
                trees = value if vary == "tree_number" else config.tree_count
                method = f"rssf_d{value}" if vary == "tree_depth" else f"rssf_t{value}"
                seed = _cell_seed(config.seed, rep, kind_idx, snr_key, 200 + value)
                t0 = time.perf_counter()
                forest = train_forest(
                    x_train, y_train, trees, depth, spec, seed, class_count=config.grid_count,
                    kind=rssf,
                )
                train_dt = time.perf_counter() - t0
                t0 = time.perf_counter()
                labels = forest.predict_batch(x_test)
                test_dt = time.perf_counter() - t0
                report.add_timing(
                    method, train_s=train_dt, test_s=test_dt, predictions=x_test.shape[0]
                )
                labels = labels.reshape(len(grids), test_count)
                for i, grid in enumerate(grids):
                    rho = float((labels[i] == grid).mean())
                    report.add(noise_kind, snr, method, rho, 0.0)
            if verbose:
                print(f"[sweep-forest] rep={rep} snr={snr:g} dB done")
    return report


def ingest_recorded_dataset(path) -> list:
    """Load an externally recorded snapshot dataset file, validated and
    ready for :func:`goofloc.fingerprints.build_goof`."""
    return load_snapshot_dataset(path)


_METHOD_PREFIX_ORDER = {kind.value: i for i, kind in enumerate(KIND_ORDER)}
_METHOD_PREFIX_ORDER["mode"] = len(KIND_ORDER)


def _method_sort_key(method: str):
    if method in _METHOD_PREFIX_ORDER:
        return (0, _METHOD_PREFIX_ORDER[method], 0)
    if method.startswith("swim_w"):
        return (1, int(method[6:]), 0)
    prefix, _, suffix = method.rpartition("_")
    digits = "".join(ch for ch in suffix if ch.isdigit())
    return (2, prefix, int(digits) if digits else 0)


def emit_report(report: Report, fmt: str, out_dir) -> list:
    """Write report artifacts and return their paths.

    ``csv``: one curve file per noise kind (rows: snr_db, method,
    mean_rho, std_rho, n, mean_centroid_error_m), a timing table, and the
    config-hash echo. ``structured-text``: one lossless document that can
    be reloaded with :func:`load_report`. Curve files are byte-identical
    across re-runs of the same (config, seed); the timing table is
    wall-clock and is not.
    """
    if not report.rows:
        raise ValueError("refusing to emit an empty report")
    if fmt not in ("csv", "structured-text"):
        raise ValueError(f"unknown report format {fmt!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    if fmt == "structured-text":
        path = out_dir / "report.txt"
        path.write_text(report_to_text(report), encoding="utf-8")
        return [path]

    kinds = sorted({key[0] for key in report.rows})
    for noise_kind in kinds:
        lines = [
            f"# config_hash={report.config_hash} seed={report.seed}",
            "snr_db,method,mean_rho,std_rho,n,mean_centroid_error_m",
        ]
        keys = [k for k in report.rows if k[0] == noise_kind]
        keys.sort(key=lambda k: (k[1], _method_sort_key(k[2])))
        for key in keys:
            values = np.array(report.rows[key])
            errs = np.array(report.errors_m[key])
            lines.append(
                ",".join(
                    [
                        fmt_value(key[1]),
                        key[2],
                        fmt_value(float(values.mean())),
                        fmt_value(float(values.std())),
                        str(values.size),
                        fmt_value(float(errs.mean())),
                    ]
                )
            )
        path = out_dir / f"curve_{noise_kind}.csv"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        paths.append(path)

    lines = [
        f"# config_hash={report.config_hash} seed={report.seed}",
        "method,train_seconds,test_seconds,predictions",
    ]
    for method in sorted(report.timings, key=_method_sort_key):
        entry = report.timings[method]
        lines.append(
            f"{method},{fmt_value(entry['train_s'])},{fmt_value(entry['test_s'])},{entry['predictions']}"
        )
    timing_path = out_dir / "timing.csv"
    timing_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    paths.append(timing_path)

    echo_path = out_dir / "config_echo.txt"
    echo_path.write_text(
        f"config_hash={report.config_hash}\nseed={report.seed}\n", encoding="utf-8"
    )
    paths.append(echo_path)
    return paths


def report_to_text(report: Report) -> str:
    lines = [
        f"{REPORT_MAGIC} {REPORT_VERSION}",
        f"config_hash={report.config_hash}",
        f"seed={report.seed}",
    ]
    for key in sorted(report.rows, key=lambda k: (k[0], k[1], _method_sort_key(k[2]))):
        noise_kind, snr, method = key
        values = ",".join(fmt_value(v) for v in report.rows[key])
        errs = ",".join(fmt_value(v) for v in report.errors_m[key])
        lines.append(f"curve kind={noise_kind} snr={fmt_value(snr)} method={method} values={values}")
        lines.append(f"error kind={noise_kind} snr={fmt_value(snr)} method={method} values={errs}")
    for method in sorted(report.timings, key=_method_sort_key):
        entry = report.timings[method]
        lines.append(
            f"timing method={method} train={fmt_value(entry['train_s'])} "
            f"test={fmt_value(entry['test_s'])} predictions={entry['predictions']}"
        )
    return "\n".join(lines) + "\n"


def load_report(path) -> Report:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    lines = [ln for ln in lines if ln.strip()]
    if not lines:
        raise FormatError("empty report file", 0)
    check_magic(lines[0], REPORT_MAGIC, REPORT_VERSION)
    meta = dict(parse_kv(ln) for ln in lines[1:3])
    report = Report(config_hash=meta["config_hash"], seed=int(meta["seed"]))
    for line in lines[3:]:
        tag, _, rest = line.partition(" ")
        parts = dict(parse_kv(tok) for tok in rest.split())
        if tag == "curve":
            key = (parts["kind"], float(parts["snr"]), parts["method"])
            report.rows[key] = [float(v) for v in parts["values"].split(",")]
        elif tag == "error":
            key = (parts["kind"], float(parts["snr"]), parts["method"])
            report.errors_m[key] = [float(v) for v in parts["values"].split(",")]
        elif tag == "timing":
            report.timings[parts["method"]] = {
                "train_s": float(parts["train"]),
                "test_s": float(parts["test"]),
                "predictions": int(parts["predictions"]),
            }
        else:
            raise FormatError(f"unknown report row tag {tag!r}")
    return report


def save_bmatrices(path, matrices: dict) -> None:
    """Persist per-grid prediction matrices as structured text."""
    grids = sorted(matrices)
    if not grids:
        raise ValueError("no prediction matrices to save")
    z = matrices[grids[0]].matrix.shape[0]
    lines = [
        f"{BMAT_MAGIC} {BMAT_VERSION}",
        f"kinds={','.join(kind.value for kind in KIND_ORDER)}",
        f"grid_count={len(grids)}",
        f"sample_count={z}",
    ]
    for grid in grids:
        pm = matrices[grid]
        true = pm.true_label if pm.true_label is not None else 0
        lines.append(f"grid {grid} true={true}")
        for row in pm.matrix:
            lines.append(" ".join(str(int(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_bmatrices(path) -> dict:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    lines = [ln for ln in lines if ln.strip()]
    if not lines:
        raise FormatError("empty prediction matrix file", 0)
    check_magic(lines[0], BMAT_MAGIC, BMAT_VERSION)
    matrices = {}
    pos = 1
    while pos < len(lines) and "=" in lines[pos] and not lines[pos].startswith("grid "):
        pos += 1
    while pos < len(lines):
        parts = lines[pos].split()
        if parts[0] != "grid":
            raise FormatError(f"expected grid record, got {lines[pos]!r}", pos)
        grid = int(parts[1])
        true = int(dict(parse_kv(tok) for tok in parts[2:])["true"])
        pos += 1
        rows = []
        while pos < len(lines) and not lines[pos].startswith("grid "):
            rows.append([int(tok) for tok in lines[pos].split()])
            pos += 1
        matrices[grid] = PredictionMatrix(
            matrix=np.array(rows, dtype=int), true_label=true if true > 0 else None
        )
    return matrices
