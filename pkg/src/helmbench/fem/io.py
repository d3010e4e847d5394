"""Solution CSV export and JSON error records."""

from __future__ import annotations

import csv
import json

import numpy as np


def write_solution_csv(path, space, u) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "re_u", "im_u"])
        for (x, y), val in zip(space.dof_coords, np.asarray(u)):
            w.writerow([repr(float(x)), repr(float(y)), repr(float(val.real)), repr(float(val.imag))])


def error_record(k: float, p: int, h: float, norm: str, value: float) -> dict:
    return {"k": float(k), "p": int(p), "h": float(h), "norm": norm, "value": float(value)}


def write_error_records(path, records) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
