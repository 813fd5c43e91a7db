"""The six fingerprint families (the GOOF) and their extraction.

From one M x L snapshot block, six statistics are estimated and flattened
into real feature vectors:

  CMF    sample covariance matrix              abs(reshape)   M^2
  RSSF   per-element received signal strength  none           M
  PSDF   normalized per-element power spectrum reshape        M*K
  SSF    principal covariance eigenvector      abs            M
  FoCF   fourth-order cross cumulants          abs(reshape)   M^2
  FLOMF  fractional low-order moments          abs(reshape)   M^2

Reshape order is column-major throughout; it only has to match between
training and testing. Phases are dropped (absolute values) because they
are fragile under noise; RSSF and PSDF are already real.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .channel import SnapshotBlock
from .errors import DegenerateInputError, FormatError, NumericalFailure
from .textio import check_magic, fmt_value, parse_kv


class FingerprintKind(Enum):
    """The six families, in the fixed column order used everywhere."""

    CMF = "cmf"
    RSSF = "rssf"
    PSDF = "psdf"
    SSF = "ssf"
    FOCF = "focf"
    FLOMF = "flomf"


KIND_ORDER = tuple(FingerprintKind)
NUM_KINDS = len(KIND_ORDER)


def feature_dim(kind: FingerprintKind, num_elements: int, psd_points: int) -> int:
    if kind in (FingerprintKind.CMF, FingerprintKind.FOCF, FingerprintKind.FLOMF):
        return num_elements * num_elements
    if kind is FingerprintKind.PSDF:
        return num_elements * psd_points
    return num_elements


@dataclass
class FingerprintSample:
    """One labeled feature vector of a given family."""

    kind: FingerprintKind
    features: np.ndarray
    grid_label: int

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        if self.features.ndim != 1:
            raise ValueError("features must be a 1-D real vector")
        if not np.isfinite(self.features).all():
            raise ValueError("features contain non-finite entries")


def _block_data(block) -> np.ndarray:
    data = block.data if isinstance(block, SnapshotBlock) else np.asarray(block)
    data = np.asarray(data, dtype=complex)
    if data.ndim != 2:
        raise ValueError("block must be a 2-D M x L matrix")
    if data.shape[1] < 1 or data.shape[0] < 1:
        raise ValueError("block is empty")
    return data


def est_covariance(block) -> np.ndarray:
    """Sample covariance (1/L) * sum_t y(t) y(t)^H; Hermitian PSD."""
    y = _block_data(block)
    return (y @ y.conj().T) / y.shape[1]


def extract_rss(covariance: np.ndarray) -> np.ndarray:
    """Per-element signal strength: the real diagonal of the covariance."""
    r = np.asarray(covariance)
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise ValueError("covariance must be square")
    return np.real(np.diag(r)).copy()


def est_psd(block, psd_points: int | None = None) -> np.ndarray:
    """Normalized per-element power spectral density, M x K.

    Row m is |Y_m(k)|^2 over the first K bins of the length-L DFT of
    element m, normalized to sum to 1. K defaults to L.
    """
    y = _block_data(block)
    m, length = y.shape
    k = length if psd_points is None else int(psd_points)
    if not 1 <= k <= length:
        raise ValueError("psd_points must be in 1..L")
    spectrum = np.abs(np.fft.fft(y, axis=1) / length) ** 2
    spectrum = spectrum[:, :k]
    totals = spectrum.sum(axis=1)
    if (totals == 0).any():
        raise DegenerateInputError("all-zero element row: PSD normalization undefined")
    return spectrum / totals[:, None]


def est_signal_subspace(covariance: np.ndarray) -> np.ndarray:
    """Entrywise magnitude of the unit-norm principal eigenvector."""
    r = np.asarray(covariance, dtype=complex)
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise ValueError("covariance must be square")
    if not np.allclose(r, r.conj().T, atol=1e-8 * max(1.0, np.abs(r).max())):
        raise ValueError("covariance must be Hermitian")
    try:
        _, vectors = np.linalg.eigh(r)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigendecomposition failed: {exc}") from exc
    principal = vectors[:, -1]  # eigh sorts eigenvalues ascending
    return np.abs(principal / np.linalg.norm(principal))


def est_foc(block) -> np.ndarray:
    """Fourth-order cumulant matrix, entry (i,k) = cum{y_i, y_k, y_i*, y_k*}.

    All expectations are sample means over the snapshots:
    E{y_i y_k y_i* y_k*} - E{y_i y_i*} E{y_k y_k*}
    - E{y_i y_k*} E{y_k y_i*} - E{y_i y_k} E{y_i* y_k*}.
    """
    y = _block_data(block)
    length = y.shape[1]
    yc = y.conj()
    mom4 = np.einsum("it,kt,it,kt->ik", y, y, yc, yc) / length
    r = (y @ yc.T) / length  # E{y_i y_k*}
    c = (y @ y.T) / length  # E{y_i y_k}
    d = np.diag(r)
    return mom4 - np.outer(d, d) - r * r.T - c * c.conj()


def est_flom(block, p: float = 1.2) -> np.ndarray:
    """Fractional low-order moment matrix for exponent 1 < p <= 2.

    Entry (i,k) = (1/L) sum_t y_i(t) |y_k(t)|^(p-2) y_k*(t); snapshots
    with y_k(t) = 0 contribute 0 when p < 2. p = 2 recovers the sample
    covariance exactly.
    """
    y = _block_data(block)
    if not 1.0 < p <= 2.0:
        raise ValueError("p must satisfy 1 < p <= 2")
    length = y.shape[1]
    if p == 2.0:
        return (y @ y.conj().T) / length
    mags = np.abs(y)
    with np.errstate(divide="ignore"):
        weights = np.where(mags > 0, mags ** (p - 2.0), 0.0)
    weighted = weights * y.conj()  # |y_k|^(p-2) y_k*, zeros dropped
    return (y @ weighted.T) / length


def vectorize(values: np.ndarray, kind: FingerprintKind) -> np.ndarray:
    """Flatten an estimate into the real feature layout of its family."""
    arr = np.asarray(values)
    if kind in (FingerprintKind.CMF, FingerprintKind.FOCF, FingerprintKind.FLOMF):
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"{kind.value} expects a square matrix")
        return np.abs(arr.flatten(order="F"))
    if kind is FingerprintKind.PSDF:
        if arr.ndim != 2:
            raise ValueError("psdf expects an M x K matrix")
        return np.real(arr).flatten(order="F")
    if kind is FingerprintKind.SSF:
        if arr.ndim != 1:
            raise ValueError("ssf expects a vector")
        return np.abs(arr)
    if arr.ndim != 1:
        raise ValueError("rssf expects a vector")
    return np.real(arr).copy()


def extract_group(block, flom_p: float = 1.2, psd_points: int | None = None):
    """All six feature vectors of one snapshot group, keyed by kind."""
    y = _block_data(block)
    covariance = est_covariance(y)
    return {
        FingerprintKind.CMF: vectorize(covariance, FingerprintKind.CMF),
        FingerprintKind.RSSF: vectorize(extract_rss(covariance), FingerprintKind.RSSF),
        FingerprintKind.PSDF: vectorize(est_psd(y, psd_points), FingerprintKind.PSDF),
        FingerprintKind.SSF: vectorize(est_signal_subspace(covariance), FingerprintKind.SSF),
        FingerprintKind.FOCF: vectorize(est_foc(y), FingerprintKind.FOCF),
        FingerprintKind.FLOMF: vectorize(est_flom(y, flom_p), FingerprintKind.FLOMF),
    }


@dataclass
class Goof:
    """Labeled fingerprint store: per kind, per grid, a list of samples.

    Every (kind, grid) pair holds exactly ``group_count`` samples, one per
    snapshot group, in group order.
    """

    group_count: int
    snapshots_per_group: int
    noise_kind: str = "none"
    snr_db: float = float("inf")
    samples: dict = field(default_factory=dict)  # kind -> {grid -> [FingerprintSample]}

    def grids(self) -> list[int]:
        per_kind = self.samples.get(FingerprintKind.CMF, {})
        return sorted(per_kind)

    def features(self, kind: FingerprintKind, grid: int) -> list[np.ndarray]:
        return [s.features for s in self.samples[kind][grid]]

    def stack(self, kind: FingerprintKind) -> tuple[np.ndarray, np.ndarray]:
        """All samples of one kind as (X, labels), grids in label order."""
        xs, ys = [], []
        for grid in self.grids():
            for sample in self.samples[kind][grid]:
                xs.append(sample.features)
                ys.append(sample.grid_label)
        return np.array(xs), np.array(ys, dtype=int)

    def split(self, train_count: int, test_count: int) -> tuple["Goof", "Goof"]:
        """First ``train_count`` groups per grid for training, the next
        ``test_count`` for testing (groups are i.i.d. given the block)."""
        if train_count + test_count > self.group_count:
            raise ValueError("train_count + test_count exceeds group_count")
        train = Goof(train_count, self.snapshots_per_group, self.noise_kind, self.snr_db)
        test = Goof(test_count, self.snapshots_per_group, self.noise_kind, self.snr_db)
        for kind, per_grid in self.samples.items():
            train.samples[kind] = {g: s[:train_count] for g, s in per_grid.items()}
            test.samples[kind] = {
                g: s[train_count : train_count + test_count] for g, s in per_grid.items()
            }
        return train, test

    def validate(self) -> None:
        for kind in KIND_ORDER:
            per_grid = self.samples.get(kind)
            if per_grid is None:
                raise ValueError(f"missing fingerprint kind {kind.value}")
            for grid, samples in per_grid.items():
                if len(samples) != self.group_count:
                    raise ValueError(
                        f"{kind.value} grid {grid}: {len(samples)} samples, "
                        f"expected {self.group_count}"
                    )
                for sample in samples:
                    if sample.grid_label != grid:
                        raise ValueError("sample label disagrees with its grid")


def build_goof(
    blocks: list[SnapshotBlock],
    group_count: int,
    flom_p: float = 1.2,
    psd_points: int | None = None,
) -> Goof:
    """Partition each grid's L snapshots into ``group_count`` groups and
    extract all six fingerprints from every group.

    Deterministic: no internal randomness. L must be divisible by the
    group count.
    """
    if not blocks:
        raise ValueError("no snapshot blocks supplied")
    length = blocks[0].num_snapshots
    if length % group_count != 0:
        raise ValueError(
            f"snapshot count {length} not divisible into {group_count} groups"
        )
    per_group = length // group_count
    goof = Goof(
        group_count=group_count,
        snapshots_per_group=per_group,
        noise_kind=blocks[0].noise_kind,
        snr_db=blocks[0].snr_db,
    )
    for kind in KIND_ORDER:
        goof.samples[kind] = {}
    for block in blocks:
        if block.num_snapshots != length:
            raise ValueError("all blocks must have the same snapshot count")
        grid = block.grid_label
        for kind in KIND_ORDER:
            goof.samples[kind][grid] = []
        for gi in range(group_count):
            chunk = block.data[:, gi * per_group : (gi + 1) * per_group]
            for kind, features in extract_group(chunk, flom_p, psd_points).items():
                goof.samples[kind][grid].append(
                    FingerprintSample(kind=kind, features=features, grid_label=grid)
                )
    goof.validate()
    return goof


GOOF_MAGIC = "GOOF-FPSTORE"
GOOF_VERSION = 1


def save_goof(goof: Goof, directory) -> None:
    """Persist a fingerprint store: a text index plus one little-endian
    float64 matrix per kind (row = sample, last column = grid label)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lines = [
        f"{GOOF_MAGIC} {GOOF_VERSION}",
        f"group_count={goof.group_count}",
        f"snapshots_per_group={goof.snapshots_per_group}",
        f"noise_kind={goof.noise_kind}",
        f"snr_db={fmt_value(goof.snr_db)}",
        f"grids={','.join(str(g) for g in goof.grids())}",
    ]
    for kind in KIND_ORDER:
        rows = []
        for grid in goof.grids():
            for sample in goof.samples[kind][grid]:
                rows.append(np.append(sample.features, float(grid)))
        matrix = np.array(rows)
        fname = f"{kind.value}.f64"
        lines.append(
            f"kind={kind.value} dim={matrix.shape[1] - 1} rows={matrix.shape[0]} file={fname}"
        )
        (directory / fname).write_bytes(matrix.astype("<f8").tobytes())
    (directory / "index.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_goof(directory) -> Goof:
    directory = Path(directory)
    index = directory / "index.txt"
    if not index.exists():
        raise FormatError(f"no fingerprint index in {directory}")
    lines = index.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise FormatError("empty fingerprint index", 0)
    check_magic(lines[0], GOOF_MAGIC, GOOF_VERSION)
    meta: dict[str, str] = {}
    kind_rows = []
    for line in lines[1:]:
        if not line.strip():
            continue
        if line.startswith("kind="):
            parts = dict(parse_kv(tok) for tok in line.split())
            kind_rows.append(parts)
        else:
            key, value = parse_kv(line)
            meta[key] = value
    goof = Goof(
        group_count=int(meta["group_count"]),
        snapshots_per_group=int(meta["snapshots_per_group"]),
        noise_kind=meta.get("noise_kind", "none"),
        snr_db=float(meta.get("snr_db", "inf")),
    )
    for row in kind_rows:
        kind = FingerprintKind(row["kind"])
        dim = int(row["dim"])
        count = int(row["rows"])
        blob = (directory / row["file"]).read_bytes()
        expected = count * (dim + 1) * 8
        if len(blob) != expected:
            raise FormatError(
                f"{row['file']}: expected {expected} bytes, found {len(blob)}",
                min(len(blob), expected),
            )
        matrix = np.frombuffer(blob, dtype="<f8").reshape(count, dim + 1)
        per_grid: dict[int, list[FingerprintSample]] = {}
        for feature_row in matrix:
            grid = int(feature_row[-1])
            per_grid.setdefault(grid, []).append(
                FingerprintSample(kind=kind, features=feature_row[:-1].copy(), grid_label=grid)
            )
        goof.samples[kind] = per_grid
    goof.validate()
    return goof
