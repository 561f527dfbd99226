"""CSV and JSON emission, config loading and run manifests."""

from __future__ import annotations

import csv
import datetime as _dt
import json
import os
import platform
import sys

import numpy as np

from . import __version__
from .errors import UsageError
from .scattering import ScanTable

SCAN_HEADER = ("E", "absR2", "absT2", "ReR", "ImR", "ReT", "ImT")


def fmt(v):
    return f"{float(v):.16e}"


def write_scan_csv(path, table: ScanTable):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SCAN_HEADER)
        for row in table.rows():
            w.writerow([fmt(v) for v in row])


def read_scan_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return ScanTable(data[:, 0], data[:, 3] + 1j * data[:, 4], data[:, 5] + 1j * data[:, 6])


def _default(o):
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, default=_default)
        fh.write("\n")


def load_json(path, what="file"):
    if not os.path.exists(path):
        raise UsageError(f"{what} not found: {path}")
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as e:
        raise UsageError(f"malformed JSON in {path}: {e}") from None


class Manifest:
    """Record of one command run: inputs, outputs and the fitted constants used."""

    def __init__(self, command, argv, config=None):
        self.data = {
            "command": command,
            "argv": list(argv),
            "config": config,
            "version": __version__,
            "python": sys.version.split()[0],
            "platform": platform.platform(),
            "started": _dt.datetime.now(_dt.timezone.utc).isoformat(),
            "outputs": [],
            "fitted": {},
        }

    def output(self, path, kind):
        self.data["outputs"].append({"path": os.path.abspath(path), "kind": kind})

    def fitted(self, **kw):
        self.data["fitted"].update(kw)

    def set(self, key, value):
        self.data[key] = value

    def write(self, path):
        self.data["finished"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
        write_json(path, self.data)
