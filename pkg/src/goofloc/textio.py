"""Helpers for the self-describing structured-text headers used by all
persisted artifacts (snapshot datasets, fingerprint stores, forests,
reports).

Every artifact starts with a magic line ``<magic> <version>`` followed by
``key=value`` lines. Floats are written with ``repr`` so that round-trips
are lossless and byte-identical across runs.
"""

from __future__ import annotations

from .errors import FormatError


def fmt_float(x: float) -> str:
    return repr(float(x))


def fmt_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return fmt_float(v)
    if isinstance(v, (list, tuple)):
        return ",".join(fmt_value(x) for x in v)
    return str(v)


def check_magic(line: str, magic: str, version: int, offset: int = 0) -> None:
    parts = line.strip().split()
    if len(parts) != 2 or parts[0] != magic:
        raise FormatError(f"expected magic '{magic}', got {line.strip()!r}", offset)
    if parts[1] != str(version):
        raise FormatError(
            f"unsupported {magic} version {parts[1]!r} (expected {version})", offset
        )


def parse_kv(line: str, offset: int = 0) -> tuple[str, str]:
    if "=" not in line:
        raise FormatError(f"expected key=value line, got {line.strip()!r}", offset)
    key, _, value = line.partition("=")
    return key.strip(), value.strip()


def read_header_lines(raw: bytes, magic: str, version: int):
    """Parse the text header of a mixed text/binary artifact.

    Returns (fields dict, byte offset of the first payload byte). The
    header is UTF-8 lines up to and including an ``end-header`` line.
    """
    offset = 0
    fields: dict[str, str] = {}
    first = True
    while True:
        nl = raw.find(b"\n", offset)
        if nl < 0:
            raise FormatError("truncated header (no end-header line)", len(raw))
        try:
            line = raw[offset:nl].decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FormatError("header is not valid UTF-8", offset) from exc
        if first:
            check_magic(line, magic, version, offset)
            first = False
        elif line.strip() == "end-header":
            return fields, nl + 1
        else:
            key, value = parse_kv(line, offset)
            fields[key] = value
        offset = nl + 1
