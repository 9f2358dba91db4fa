"""CSV and manifest writers.

Floats are written with ``repr`` so every value round-trips exactly, and no
timing information enters a CSV, so identical inputs give identical bytes.
"""
from __future__ import annotations

import csv
import hashlib
import json
import platform
from pathlib import Path

import numpy as np

from . import __version__

SCHEMA_VERSION = 1

SLOT_COLUMNS = ["trial", "frame", "slot", "scheme", "weighted_delay", "csi_coefficients",
                "assignment", "ratios", "rates", "pair_delays"]
SUMMARY_COLUMNS = ["scheme", "trial", "seed", "mean_delay", "csi_coefficients_per_frame",
                   "csi_bits_per_frame", "total_csi_bits", "varpi"]
SWEEP_COLUMNS = ["axis", "value", "scheme", "trial", "mean_delay", "csi_bits_per_frame"]
SWEEP_SUMMARY_COLUMNS = ["axis", "value", "scheme", "n", "mean", "std", "ci95"]
OVERHEAD_COLUMNS = ["scheme", "I", "J", "M", "T_s", "bits_per_coefficient", "coefficients",
                    "bits"]


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (tuple, list, np.ndarray)):
        return ";".join(fmt(v) for v in x)
    return str(x)


def write_csv(path, columns, rows) -> Path:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for row in rows:
                if isinstance(row, dict):
                    w.writerow([fmt(row[c]) for c in columns])
                else:
                    w.writerow([fmt(getattr(row, c)) for c in columns])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc
    return path


def write_slots(path, slots) -> Path:
    return write_csv(path, SLOT_COLUMNS, slots)


def write_summaries(path, summaries) -> Path:
    return write_csv(path, SUMMARY_COLUMNS, summaries)


def write_convergence(path, curves: dict) -> Path:
    schemes = list(curves)
    n = len(next(iter(curves.values()))) if curves else 0
    rows = [{"frame": t, **{s: float(curves[s][t]) for s in schemes}} for t in range(n)]
    return write_csv(path, ["frame", *schemes], rows)


def read_slots(path) -> list:
    """Parse a slot CSV back into dicts of typed values."""
    def floats(s):
        return tuple(float(v) for v in s.split(";")) if s else ()

    out = []
    with Path(path).open(newline="") as fh:
        for r in csv.DictReader(fh):
            out.append({"trial": int(r["trial"]), "frame": int(r["frame"]),
                        "slot": int(r["slot"]), "scheme": r["scheme"],
                        "weighted_delay": float(r["weighted_delay"]),
                        "csi_coefficients": int(r["csi_coefficients"]),
                        "assignment": tuple(int(v) for v in r["assignment"].split(";")),
                        "ratios": floats(r["ratios"]), "rates": floats(r["rates"]),
                        "pair_delays": floats(r["pair_delays"])})
    return out


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(outdir, command: str, config, seed: int, files, extra=None) -> Path:
    outdir = Path(outdir)
    manifest = {
        "command": command,
        "code_version": __version__,
        "csv_schema_version": SCHEMA_VERSION,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "seed": seed,
        "config_sha256": None if config is None else config.digest(),
        "config": None if config is None else config.to_dict(),
        "files": {Path(f).name: sha256_file(f) for f in files},
    }
    if extra:
        manifest.update(extra)
    path = outdir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return path
