"""File formats: binary scenes plus CSV tables for everything else.

Scene files are a single ASCII header line

    TDRS1 <width> <height> <bands> little\\n

followed by width*height*bands little-endian IEEE-754 float64 values in
band-interleaved-by-pixel order. CSV files carry a header row and format
floats with 17 significant digits (%.17g), which round-trips every double
bit-exactly. All writers are deterministic.
"""

import numpy as np

from .errors import (BadMagic, DimensionOverflow, ParseError,
                     TruncatedPayload)
from .evaluate import DetectionMap, GroundTruthMask
from .stats import Scene

__all__ = [
    "read_detection_map",
    "read_mask",
    "read_scene",
    "read_spectrum",
    "write_detection_map",
    "write_mask",
    "write_roc",
    "write_scene",
    "write_spectrum",
    "write_table",
]

_MAGIC = "TDRS1"
_MAX_CELLS = 2 ** 31  # 16 GiB of float64; anything above is a header bug


def _fmt(x):
    return "%.17g" % float(x)


def write_scene(scene, path):
    with open(path, "wb") as f:
        f.write(f"{_MAGIC} {scene.width} {scene.height} {scene.bands} little\n"
                .encode("ascii"))
        f.write(np.ascontiguousarray(scene.values, dtype="<f8").tobytes())


def read_scene(path):
    with open(path, "rb") as f:
        data = f.read()
    nl = data.find(b"\n")
    if nl < 0:
        raise BadMagic("no header line")
    try:
        fields = data[:nl].decode("ascii").split()
    except UnicodeDecodeError as exc:
        raise BadMagic("header is not ASCII") from exc
    if len(fields) != 5 or fields[0] != _MAGIC or fields[4] != "little":
        raise BadMagic(f"malformed header {data[:nl]!r}")
    try:
        width, height, bands = (int(t) for t in fields[1:4])
    except ValueError as exc:
        raise BadMagic(f"non-integer dimensions in header {data[:nl]!r}") from exc
    if width <= 0 or height <= 0 or bands <= 0:
        raise DimensionOverflow("header dimensions must be positive")
    cells = width * height * bands
    if cells > _MAX_CELLS:
        raise DimensionOverflow(f"header declares {cells} values")
    payload = data[nl + 1:]
    if len(payload) != 8 * cells:
        raise TruncatedPayload(
            f"expected {8 * cells} payload bytes, found {len(payload)}")
    values = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    return Scene(width=width, height=height,
                 values=values.reshape(width * height, bands))


def write_table(path, header, rows):
    """CSV writer shared by every tabular format; floats via %.17g."""
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(
                str(c) if isinstance(c, (int, np.integer, str)) else _fmt(c)
                for c in row) + "\n")


def _read_rows(path, n_columns):
    with open(path, "r", encoding="ascii") as f:
        lines = f.read().splitlines()
    if not lines:
        raise ParseError("empty file", line=1)
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        cells = line.split(",")
        if len(cells) != n_columns:
            raise ParseError(f"expected {n_columns} columns, got {len(cells)}",
                             line=lineno)
        yield lineno, cells


def _parse_float(text, lineno):
    try:
        return float(text)
    except ValueError as exc:
        raise ParseError(f"bad float {text!r}", line=lineno) from exc


def _parse_int(text, lineno):
    try:
        return int(text)
    except ValueError as exc:
        raise ParseError(f"bad integer {text!r}", line=lineno) from exc


def write_spectrum(values, path):
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    write_table(path, ("band", "value"),
                ((i, v) for i, v in enumerate(values)))


def read_spectrum(path):
    values = []
    for lineno, (band, value) in _read_rows(path, 2):
        if _parse_int(band, lineno) != len(values):
            raise ParseError(f"bands out of order at {band!r}", line=lineno)
        values.append(_parse_float(value, lineno))
    if not values:
        raise ParseError("spectrum has no rows", line=1)
    return np.asarray(values)


def _grid_rows(width, n):
    return ((i % width, i // width) for i in range(n))


def write_mask(mask, path):
    rows = _grid_rows(mask.width, mask.values.shape[0])
    write_table(path, ("x", "y", "label"),
                ((x, y, int(mask.values[y * mask.width + x])) for x, y in rows))


def read_mask(path):
    entries = []
    for lineno, (x, y, label) in _read_rows(path, 3):
        lab = _parse_int(label, lineno)
        if lab not in (0, 1):
            raise ParseError(f"label must be 0 or 1, got {label!r}", line=lineno)
        entries.append((_parse_int(x, lineno), _parse_int(y, lineno), lab))
    return GroundTruthMask(values=_assemble_grid(entries, bool, "mask"),
                           width=max(e[0] for e in entries) + 1,
                           height=max(e[1] for e in entries) + 1)


def write_detection_map(dmap, path):
    rows = _grid_rows(dmap.width, dmap.scores.shape[0])
    write_table(path, ("x", "y", "score"),
                ((x, y, dmap.scores[y * dmap.width + x]) for x, y in rows))


def read_detection_map(path, method="loaded"):
    entries = [(_parse_int(x, n), _parse_int(y, n), _parse_float(s, n))
               for n, (x, y, s) in _read_rows(path, 3)]
    width = max(e[0] for e in entries) + 1
    height = max(e[1] for e in entries) + 1
    return DetectionMap(scores=_assemble_grid(entries, np.float64, "map"),
                        width=width, height=height, method=method)


def _assemble_grid(entries, dtype, what):
    if not entries:
        raise ParseError(f"{what} has no rows", line=1)
    width = max(e[0] for e in entries) + 1
    height = max(e[1] for e in entries) + 1
    seen = np.zeros(width * height, dtype=bool)
    out = np.zeros(width * height, dtype=dtype)
    if any(e[0] < 0 or e[1] < 0 for e in entries):
        raise ParseError(f"{what} has negative coordinates", line=1)
    if len(entries) != width * height:
        raise ParseError(f"{what} grid is incomplete: {len(entries)} rows "
                         f"for {width}x{height}", line=1)
    for x, y, v in entries:
        i = y * width + x
        if seen[i]:
            raise ParseError(f"duplicate cell ({x},{y}) in {what}", line=1)
        seen[i] = True
        out[i] = v
    return out


def write_roc(curve, path):
    write_table(path, ("threshold", "fpr", "tpr"),
                zip(curve.thresholds, curve.fpr, curve.tpr))
