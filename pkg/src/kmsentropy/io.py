"""Deterministic CSV and JSON writers with all-or-nothing output."""
from __future__ import annotations

import csv
import json
import os
import tempfile

import numpy as np

from . import __version__, _backend


def fmt(x):
    """Round-trip text for numbers (``%.17g``), plain text otherwise."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, float) and not np.isfinite(x):
        return str(x)
    return x


class OutputSet:
    """Stage files in a temporary directory and move them into place on commit.

    If the block raises, nothing is written to the output directory.
    """

    def __init__(self, out_dir):
        self.out_dir = out_dir
        self._staged = {}

    def __enter__(self):
        os.makedirs(self.out_dir, exist_ok=True)
        self._tmp = tempfile.mkdtemp(prefix=".partial-", dir=self.out_dir)
        return self

    def _path(self, name):
        p = os.path.join(self._tmp, name)
        self._staged[name] = p
        return p

    def csv(self, name, header, rows):
        with open(self._path(name), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\r\n")
            w.writerow(header)
            for row in rows:
                w.writerow([fmt(x) for x in row])

    def json(self, name, payload):
        with open(self._path(name), "w", encoding="utf-8") as fh:
            json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def __exit__(self, exc_type, exc, tb):
        try:
            if exc_type is None:
                for name, p in self._staged.items():
                    os.replace(p, os.path.join(self.out_dir, name))
        finally:
            for p in self._staged.values():
                if os.path.exists(p):
                    os.remove(p)
            os.rmdir(self._tmp)
        return False

    @property
    def written(self):
        return [os.path.join(self.out_dir, n) for n in self._staged]


def metadata(cfg, command, extra=None):
    """Report header: package version, kernel backend, command and the resolved config."""
    meta = {"version": __version__, "backend": _backend.ACTIVE, "command": command,
            "config": cfg.summary()}
    if extra:
        meta.update(extra)
    return meta
