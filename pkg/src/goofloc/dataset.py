"""Snapshot dataset files.

One file holds the blocks of every grid for a single (SNR, noise kind)
cell: a UTF-8 text header (magic ``GOOF-SNAP``), then the grid matrices in
label order as little-endian float64 interleaved (re, im) pairs, row-major
M x L per grid. The same format ingests externally recorded data.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .channel import SnapshotBlock
from .errors import FormatError
from .textio import fmt_value, read_header_lines

MAGIC = "GOOF-SNAP"
VERSION = 1


def save_snapshot_dataset(path, blocks: list[SnapshotBlock]) -> None:
    """Write one file for a list of per-grid blocks (labels 1..Q, in order)."""
    if not blocks:
        raise ValueError("no blocks to save")
    m, length = blocks[0].data.shape
    for i, block in enumerate(blocks):
        if block.data.shape != (m, length):
            raise ValueError("all blocks must share the same M x L shape")
        if block.grid_label != i + 1:
            raise ValueError("blocks must be ordered by grid label 1..Q")
    first = blocks[0]
    header = [
        f"{MAGIC} {VERSION}",
        f"m={m}",
        f"l={length}",
        f"q={len(blocks)}",
        f"noise_kind={first.noise_kind}",
        f"snr_db={fmt_value(first.snr_db)}",
        "end-header",
    ]
    payload = bytearray()
    for block in blocks:
        flat = np.ascontiguousarray(block.data, dtype=np.complex128)
        payload += flat.astype("<c16").tobytes()
    Path(path).write_bytes("\n".join(header).encode("utf-8") + b"\n" + bytes(payload))


def load_snapshot_dataset(path) -> list[SnapshotBlock]:
    """Read a snapshot dataset file back into per-grid blocks.

    Raises FormatError (with the offending byte offset) on a bad magic,
    version, header field, or truncated payload; never returns a partial
    list.
    """
    raw = Path(path).read_bytes()
    fields, offset = read_header_lines(raw, MAGIC, VERSION)
    try:
        m = int(fields["m"])
        length = int(fields["l"])
        q = int(fields["q"])
        noise_kind = fields.get("noise_kind", "none")
        snr_db = float(fields.get("snr_db", "inf"))
    except (KeyError, ValueError) as exc:
        raise FormatError(f"bad header field: {exc}", 0) from exc
    if m < 1 or length < 1 or q < 1:
        raise FormatError("header dimensions must be positive", 0)
    per_grid = m * length * 16  # complex128
    expected = offset + q * per_grid
    if len(raw) < expected:
        raise FormatError(
            f"truncated payload: expected {expected} bytes, file has {len(raw)}",
            len(raw),
        )
    if len(raw) > expected:
        raise FormatError("trailing bytes after final grid matrix", expected)
    blocks = []
    for gi in range(q):
        start = offset + gi * per_grid
        data = np.frombuffer(raw, dtype="<c16", count=m * length, offset=start)
        data = data.reshape(m, length).astype(np.complex128)
        if not np.isfinite(data).all():
            raise FormatError(f"non-finite sample in grid {gi + 1}", start)
        blocks.append(
            SnapshotBlock(
                data=data,
                grid_label=gi + 1,
                snr_db=snr_db if not math.isnan(snr_db) else math.inf,
                noise_kind=noise_kind,
            )
        )
    return blocks
