"""Matrix bundle and report files.

Bundles are JSON. Floats are written with Python's shortest round-trip
repr, so a write/read cycle reproduces every matrix bit for bit.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .report import CheckReport, _jsonable
from .tuples import FAMILY_NAMES, OperatorTuple

FORMAT_VERSION = "gamma-bundle/1 (decimal repr floats, row-major [re, im])"
REPORT_VERSION = "gamma-report/1"

# bundle families beyond the operator tuples; extra names are allowed everywhere
REQUIRED = dict(FAMILY_NAMES)
REQUIRED.update({
    "single": ("M",),
    "fset333": ("F1", "F2", "F3", "F4", "F5", "F6"),
    "fset312": ("G1", "G2", "Gt1", "Gt2"),
    "collection": (),
})


class BundleError(InputError):
    """Malformed bundle; ``where`` locates the problem (line:col or a key path)."""

    def __init__(self, msg, where=None):
        super().__init__(f"{where}: {msg}" if where else msg)
        self.where = where


@dataclass
class MatrixBundle:
    family: str
    matrices: dict
    meta: dict = field(default_factory=dict)
    format_version: str = FORMAT_VERSION

    @property
    def space_dim(self):
        for M in self.matrices.values():
            if M.shape[0] == M.shape[1]:
                return int(M.shape[0])
        return 0

    def to_tuple(self) -> OperatorTuple:
        if self.family not in FAMILY_NAMES:
            raise InputError(f"bundle family {self.family!r} is not an operator tuple")
        tup = OperatorTuple.from_dict(self.family, self.matrices)
        tup.meta = dict(self.meta)
        return tup

    def ordered(self, prefix):
        """Matrices named prefix0, prefix1, ... in index order (e.g. Theta0, Theta1)."""
        out = []
        while f"{prefix}{len(out)}" in self.matrices:
            out.append(self.matrices[f"{prefix}{len(out)}"])
        return out


def encode_matrix(M):
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise InputError("only 2-D matrices can be stored")
    if not np.all(np.isfinite(M)):
        raise InputError("matrix contains NaN or Inf")
    return {"rows": int(M.shape[0]), "cols": int(M.shape[1]),
            "data": [[float(v.real), float(v.imag)] for v in M.ravel()]}


def decode_matrix(obj, where="matrix"):
    if not isinstance(obj, dict):
        raise BundleError("expected an object with rows, cols, data", where)
    try:
        rows, cols, data = obj["rows"], obj["cols"], obj["data"]
    except KeyError as exc:
        raise BundleError(f"missing key {exc.args[0]!r}", where) from None
    if not (isinstance(rows, int) and isinstance(cols, int)) or rows < 0 or cols < 0:
        raise BundleError("rows and cols must be nonnegative integers", where)
    if not isinstance(data, list) or len(data) != rows * cols:
        n = len(data) if isinstance(data, list) else "non-list"
        raise BundleError(f"data must hold rows*cols = {rows * cols} entries, got {n}",
                          f"{where}.data")
    vals = np.empty(rows * cols, dtype=complex)
    for k, pair in enumerate(data):
        ok = (isinstance(pair, list) and len(pair) == 2
              and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair))
        if not ok or not all(math.isfinite(x) for x in pair):
            raise BundleError("entry must be a finite [re, im] pair", f"{where}.data[{k}]")
        vals[k] = complex(pair[0], pair[1])
    return vals.reshape(rows, cols)


def bundle_to_dict(bundle: MatrixBundle):
    return {
        "format_version": bundle.format_version,
        "space_dim": bundle.space_dim,
        "family": bundle.family,
        "matrices": {k: encode_matrix(M) for k, M in bundle.matrices.items()},
        "meta": _jsonable(bundle.meta),
    }


def bundle_from_dict(obj) -> MatrixBundle:
    if not isinstance(obj, dict):
        raise BundleError("top level must be an object", "$")
    for key in ("format_version", "family", "matrices"):
        if key not in obj:
            raise BundleError(f"missing key {key!r}", "$")
    if not str(obj["format_version"]).startswith("gamma-bundle/1"):
        raise BundleError(f"unsupported format_version {obj['format_version']!r}",
                          "$.format_version")
    fam = obj["family"]
    if fam not in REQUIRED:
        raise BundleError(f"unknown family {fam!r}; expected one of {sorted(REQUIRED)}",
                          "$.family")
    raw = obj["matrices"]
    if not isinstance(raw, dict):
        raise BundleError("matrices must be an object", "$.matrices")
    mats = {name: decode_matrix(m, f"$.matrices.{name}") for name, m in raw.items()}
    missing = [n for n in REQUIRED[fam] if n not in mats]
    if missing:
        raise BundleError(f"family {fam} requires {missing}", "$.matrices")
    b = MatrixBundle(fam, mats, dict(obj.get("meta") or {}), obj["format_version"])
    sd = obj.get("space_dim")
    if sd is not None and REQUIRED[fam] and sd != b.space_dim:
        raise BundleError(f"space_dim {sd} disagrees with matrix size {b.space_dim}",
                          "$.space_dim")
    return b


def loads_bundle(text) -> MatrixBundle:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BundleError(exc.msg, f"line {exc.lineno} col {exc.colno}") from None
    return bundle_from_dict(obj)


def read_bundle(path) -> MatrixBundle:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise BundleError(f"cannot read file: {exc.strerror}", str(path)) from None
    try:
        return loads_bundle(text)
    except BundleError as exc:
        raise BundleError(str(exc), str(path)) from None


def dumps_json(obj):
    return json.dumps(obj, indent=1, allow_nan=False) + "\n"


def write_atomic(path, text):
    """Write via a temporary file in the target directory and rename over ``path``."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=d)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_bundle(path, bundle: MatrixBundle):
    write_atomic(path, dumps_json(bundle_to_dict(bundle)))


def tuple_bundle(tup: OperatorTuple, meta=None) -> MatrixBundle:
    m = dict(tup.meta)
    if tup.tag:
        m.setdefault("tag", tup.tag)
    m.update(meta or {})
    return MatrixBundle(tup.family, tup.as_dict(), m)


def make_report(command, options, reports, seed=None, residuals=None, artifacts=None):
    """ReportFile dict: verdict, options, check reports, residual tables, optional matrices."""
    reports = [r for r in reports if r is not None]
    verdict = "pass" if all(r.passed for r in reports) else "fail"
    out = {
        "report_version": REPORT_VERSION,
        "command": command,
        "options": _jsonable(options),
        "seed": seed,
        "verdict": verdict,
        "reports": [r.to_dict() for r in reports],
        "residuals": _jsonable(residuals or {}),
    }
    if artifacts:
        out["artifacts"] = {k: encode_matrix(M) for k, M in artifacts.items()}
    return out


def parse_report(obj):
    """Inverse of make_report: (command, options, [CheckReport], verdict recomputed)."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    reports = [CheckReport.from_dict(d) for d in obj["reports"]]
    verdict = "pass" if all(r.passed for r in reports) else "fail"
    return obj["command"], obj["options"], reports, verdict
