"""Report writers: JSON summary, CSV tables and 16-bit PGM heatmaps.

Everything except the ``header`` object of the JSON report is a pure
function of the configuration, so repeated runs are byte-identical apart
from that field.
"""
from __future__ import annotations

import csv
import json
import math
import os
import time

import numpy as np


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_plain(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [_plain(float(x.real)), _plain(float(x.imag))]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    return x


def fmt(x) -> str:
    """Shortest round-trip text for CSV cells."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (complex, np.complexfloating)):
        return repr(complex(x))
    return str(x)


def write_json(path: str, command: str, config_hash: str, seed: int, results: dict,
               invariants: list, timing_ms: float) -> None:
    doc = {
        "header": {"timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"), "timing_ms": round(timing_ms, 3)},
        "command": command,
        "config_hash": config_hash,
        "seed": seed,
        "results": _plain(results),
        "invariants": [_plain(i) for i in invariants],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_csv(path: str, header: list[str], rows, seed: int, config_hash: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(list(header) + ["seed", "config_hash"])
        for r in rows:
            w.writerow([fmt(v) for v in r] + [str(seed), config_hash])


def write_pgm(path: str, values: np.ndarray, fill: float | None = None) -> dict:
    """Write ``values`` as a binary 16-bit PGM; returns the colour-scale record.

    Non-finite cells take ``fill`` (default: the finite minimum).  The
    record is also written next to the image as ``<path>.json``.
    """
    v = np.asarray(values, dtype=float)
    finite = np.isfinite(v)
    vmin = float(v[finite].min()) if finite.any() else 0.0
    vmax = float(v[finite].max()) if finite.any() else 1.0
    fill = vmin if fill is None else fill
    v = np.where(finite, v, fill)
    span = vmax - vmin if vmax > vmin else 1.0
    q = np.clip(np.rint((v - vmin) / span * 65535), 0, 65535).astype(">u2")
    rows, cols = q.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{cols} {rows}\n65535\n".encode("ascii"))
        fh.write(q.tobytes())
    scale = {"vmin": vmin, "vmax": vmax, "nonfinite_fill": fill, "nonfinite_count": int((~finite).sum()),
             "width": cols, "height": rows, "maxval": 65535}
    with open(path + ".json", "w") as fh:
        json.dump(_plain(scale), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return scale


def read_pgm(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM")
    cols, rows = (int(x) for x in parts[1].split())
    return np.frombuffer(parts[3], dtype=">u2").reshape(rows, cols)


def ensure_dir(path: str) -> None:
    os.makedirs(path, exist_ok=True)
