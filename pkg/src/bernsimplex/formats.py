"""Readers and writers for the on-disk formats.

* dataset CSV: one observation per row, ``d`` numeric columns, optional header;
* mixture JSON: ``{"components": [{"weight": w, "alpha": [...], "beta": b}]}``;
* model JSON: density ``{m, n, d, bins: [{k: [...], p: ...}]}``, c.d.f.
  ``{m, n, d, data: [[...], ...]}`` (the c.d.f. estimator keeps its sample);
* grid CSV: columns ``x_1..x_d, value``.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .estimators import CdfModel, DensityModel
from .simplex import GEOM_EPS, MixtureSpec, validate_points


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def parse_dataset_csv(text: str, d: int | None = None) -> np.ndarray:
    """Parse dataset CSV text; the first row is a header if none of its cells are numeric."""
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if rows and not any(_is_number(c) for c in rows[0]):
        rows = rows[1:]
    if not rows:
        raise ValueError("dataset has no observations")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError(f"ragged dataset: row widths {sorted(widths)}")
    try:
        arr = np.array([[float(c) for c in r] for r in rows])
    except ValueError as exc:
        raise ValueError(f"non-numeric dataset entry: {exc}") from None
    return validate_points(arr, d, eps=GEOM_EPS)


def read_dataset_csv(path, d: int | None = None) -> np.ndarray:
    return parse_dataset_csv(Path(path).read_text(), d)


def dataset_to_csv(data: np.ndarray, header: bool = True) -> str:
    data = np.atleast_2d(data)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow([f"x_{i + 1}" for i in range(data.shape[1])])
    for row in data:
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def write_dataset_csv(path, data: np.ndarray, header: bool = True):
    Path(path).write_text(dataset_to_csv(data, header))


def read_mixture_json(path) -> MixtureSpec:
    return MixtureSpec.from_dict(json.loads(Path(path).read_text()))


def model_to_json_obj(model: DensityModel | CdfModel) -> dict:
    if isinstance(model, DensityModel):
        return model.to_json_obj()
    return {"m": model.m, "n": model.n, "d": model.d, "data": model.data.tolist()}


def model_from_json_obj(obj: dict) -> DensityModel | CdfModel:
    if "bins" in obj:
        return DensityModel.from_json_obj(obj)
    if "data" in obj:
        return CdfModel(np.asarray(obj["data"], dtype=float).reshape(-1, int(obj["d"])), int(obj["m"]))
    raise ValueError("model JSON has neither 'bins' (density) nor 'data' (c.d.f.)")


def grid_to_csv(points: np.ndarray, values: np.ndarray) -> str:
    points = np.atleast_2d(points)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"x_{i + 1}" for i in range(points.shape[1])] + ["value"])
    for p, v in zip(points, values):
        w.writerow([repr(float(c)) for c in p] + [repr(float(v))])
    return buf.getvalue()
