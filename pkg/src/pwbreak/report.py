"""
CSV input and JSON fit-report files.

Report schema (``schema_version`` 1), one JSON object:

- ``schema``: always ``"pwbreak.fit-report"``
- ``schema_version``, ``tool_version``, ``command`` (``"fit"`` or ``"select"``)
- ``degree``: polynomial degree d
- ``breakpoints``: all k+1 breakpoints including both data ends
- ``coefficients``: k lists of d+1 coefficients in x, ascending powers
- ``segment_scalings``: k objects ``{"center", "half_width"}``; piece j is a
  polynomial in ``u = (x - center) / half_width`` of its own entry
- ``internal_coefficients``: the pieces as polynomials in their u;
  predictions are evaluated from these
- ``metrics``: mse, rmse, mae, rae, r_squared, bps
- ``selection``: pruning rounds, or null
- ``trace``: greedy search summary, or null
- ``input_digest``: ``"sha256:<hex>"`` of the input file bytes
- ``seed``: integer or null; ``init``: how breakpoints were initialised

Non-finite floats are written as the strings ``"inf"``, ``"-inf"``, ``"nan"``.
"""

import csv
import hashlib
import io
import json
import math

import numpy as np

from .core import BreakpointVector, PiecewiseModel, Scaling
from .errors import InvalidInput

SCHEMA = "pwbreak.fit-report"
SCHEMA_VERSION = 1


class ReportError(InvalidInput):
    """A report file is unreadable or does not match the schema."""


class CSVFormatError(InvalidInput):
    pass


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def read_xy_csv(path):
    """Read two numeric columns; a non-numeric first row is taken as header.

    Returns
    -------
    xs, ys : list of float
    digest : str
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    digest = "sha256:" + hashlib.sha256(raw).hexdigest()
    try:
        text = raw.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise CSVFormatError(f"{path}: not valid UTF-8 ({exc})") from None
    xs, ys = [], []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise CSVFormatError(f"{path}: row {lineno}: expected 2 columns, got {len(row)}")
        a, b = row[0].strip(), row[1].strip()
        if not (_is_number(a) and _is_number(b)):
            if lineno == 1:
                continue
            raise CSVFormatError(f"{path}: row {lineno}: non-numeric value {row!r}")
        xs.append(float(a))
        ys.append(float(b))
    return xs, ys, digest


def write_xy_csv(path, xs, ys, header=("x", "y")):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for a, b in zip(xs, ys):
            w.writerow((repr(float(a)), repr(float(b))))


def jsonable(obj):
    """Convert numpy values and non-finite floats for strict JSON."""
    if isinstance(obj, dict):
        return {k: jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isfinite(v):
            return v
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return obj


def _num(v):
    if isinstance(v, str) and v in ("inf", "-inf", "nan"):
        return float(v)
    return v


def build_report(command, model, metrics, *, input_digest, seed=None, init=None,
                 selection=None, trace=None, tool_version=None):
    from . import __version__

    doc = {
        "schema": SCHEMA,
        "schema_version": SCHEMA_VERSION,
        "tool_version": tool_version or __version__,
        "command": command,
        "degree": model.degree,
        "breakpoints": model.breakpoints.full,
        "coefficients": model.coefficients,
        "segment_scalings": [{"center": sc.center, "half_width": sc.half_width}
                             for sc in model.scalings],
        "internal_coefficients": model.internal_coefficients,
        "metrics": metrics.to_dict(),
        "selection": selection,
        "trace": trace,
        "input_digest": input_digest,
        "seed": seed,
        "init": init,
    }
    return jsonable(doc)


def dump_report(doc, path):
    text = json.dumps(doc, indent=2, allow_nan=False) + "\n"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def load_report(path):
    """Read a report and rebuild its model.

    Returns
    -------
    doc : dict
    model : PiecewiseModel
    """
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ReportError(f"{path}: cannot read report ({exc})") from None
    if not isinstance(doc, dict) or doc.get("schema") != SCHEMA:
        raise ReportError(f"{path}: not a {SCHEMA} document")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ReportError(f"{path}: unsupported schema version {doc.get('schema_version')!r}")
    try:
        degree = int(doc["degree"])
        full = np.asarray(doc["breakpoints"], dtype=float)
        coef = np.asarray(doc["internal_coefficients"], dtype=float)
        scalings = [Scaling(float(sc["center"]), float(sc["half_width"]))
                    for sc in doc["segment_scalings"]]
        bp = BreakpointVector(full[1:-1], full[0], full[-1])
        model = PiecewiseModel(degree, coef, bp, scalings)
        doc["metrics"] = {k: _num(v) for k, v in doc["metrics"].items()}
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ReportError(f"{path}: malformed report ({exc})") from None
    return doc, model
