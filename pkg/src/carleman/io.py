"""Deterministic CSV/JSON writers and the output manifest."""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

FLOAT_FMT = "%.17g"


def _plain(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (tuple, set)):
        return list(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def write_json(path, obj):
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_plain) + "\n")
    return path


def write_table(path, header, columns):
    data = np.column_stack(columns)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        np.savetxt(fh, data, fmt=FLOAT_FMT, delimiter=",")
    return Path(path)


def write_kernel_csv(path, kernel):
    """Columns s, t, Re K, Im K, then Re/Im of every derivative field (i,j)."""
    pts = kernel.grid.points
    s = np.repeat(pts, pts.size)
    t = np.tile(pts, pts.size)
    header, cols = ["s", "t", "Re K", "Im K"], [s, t]
    cols += [kernel.values.real.ravel(), kernel.values.imag.ravel()]
    for i, j in kernel.orders:
        if (i, j) == (0, 0):
            continue
        F = kernel.fields[(i, j)]
        header += [f"Re K_{i}{j}", f"Im K_{i}{j}"]
        cols += [F.real.ravel(), F.imag.ravel()]
    return write_table(path, header, cols)


def read_kernel_csv(path):
    """Inverse of :func:`write_kernel_csv`: (header, data array)."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    return header, np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def write_profile_csv(path, s, profiles: dict, prefix: str):
    header = ["s"] + [f"{prefix}{k}" for k in sorted(profiles)]
    return write_table(path, header, [s] + [profiles[k] for k in sorted(profiles)])


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def write_manifest(out_dir, entries, extra=None):
    """``entries``: list of (path, metadata dict). Hashes are added here."""
    out_dir = Path(out_dir)
    files = []
    for path, meta in entries:
        path = Path(path)
        files.append({"file": path.name, "sha256": sha256(path), "bytes": path.stat().st_size,
                      **(meta or {})})
    body = {"files": sorted(files, key=lambda f: f["file"])}
    body.update(extra or {})
    return write_json(out_dir / "manifest.json", body)


def read_manifest(out_dir):
    return json.loads((Path(out_dir) / "manifest.json").read_text())
