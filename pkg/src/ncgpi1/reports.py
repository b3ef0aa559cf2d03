"""Deterministic reports.

Reports are plain dicts serialized in insertion order with Python's
shortest round-trip float repr, so identical inputs give byte-identical
JSON.  Wall-clock time is only included on request.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction

import numpy as np

from . import __version__
from .algebra import AlgebraElement
from .algebra_io import coords_to_terms
from .checks import CheckReport, CheckResult
from .matrices import AlgMatrix
from .scalars import ExactScalar, PhaseExponent, fraction_text


def jsonable(x):
    """Convert library values to JSON-ready data (complex -> [re, im], exact -> text)."""
    if x is None or isinstance(x, (bool, str)):
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        v = float(x)
        if math.isnan(v) or math.isinf(v):
            return str(v)
        return v
    if isinstance(x, (complex, np.complexfloating)):
        return [jsonable(x.real), jsonable(x.imag)]
    if isinstance(x, Fraction):
        return fraction_text(x)
    if isinstance(x, ExactScalar):
        return repr(x)
    if isinstance(x, PhaseExponent):
        return repr(x)
    if isinstance(x, AlgebraElement):
        return coords_to_terms(x.algebra, x.coords, x.algebra.metadata.get("irrational_generators", ()))
    if isinstance(x, AlgMatrix):
        return [[jsonable(e) for e in row] for row in x.to_elements()]
    if isinstance(x, (CheckResult, CheckReport)):
        return jsonable(x.to_dict())
    if isinstance(x, np.ndarray):
        return [jsonable(v) for v in x.tolist()] if x.dtype != object else [jsonable(v) for v in x]
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    raise TypeError(f"cannot serialize {type(x).__name__}")


def check_records(report) -> list[dict]:
    if isinstance(report, CheckReport):
        return [jsonable(r) for r in report.results]
    if isinstance(report, CheckResult):
        return [jsonable(report)]
    return [jsonable(r) for r in report]


def make_report(command: str, inputs, checks: list, result=None, *, seed=None, tol=None,
                wall_clock: float | None = None) -> dict:
    checks = [c for c in checks]
    out = {
        "command": command,
        "version": __version__,
        "inputs": list(inputs),
        "seed": seed,
        "tol": tol,
        "pass": all(c.get("pass", False) for c in checks),
        "checks": checks,
        "result": jsonable(result),
    }
    if wall_clock is not None:
        out["wall_clock_seconds"] = wall_clock
    return out


def dumps(report: dict) -> str:
    return json.dumps(report, ensure_ascii=False, indent=1, allow_nan=False) + "\n"


def dumps_line(record: dict) -> str:
    return json.dumps(record, ensure_ascii=False, separators=(",", ":"), allow_nan=False)


def text_summary(report: dict) -> str:
    lines = [f"{report['command']}: {'PASS' if report['pass'] else 'FAIL'}"]
    for c in report["checks"]:
        margin = c.get("margins", {}).get("max_residual")
        extra = "" if margin is None else f" (max residual {margin:.3g})"
        lines.append(f"  {c['name']}: {'pass' if c['pass'] else 'FAIL'}{extra}")
        for w in c.get("witnesses", []):
            lines.append(f"    witness: {json.dumps(w, ensure_ascii=False)}")
    res = report.get("result")
    if isinstance(res, dict):
        for k, v in res.items():
            if isinstance(v, (str, int, float, bool)) or v is None:
                lines.append(f"  {k}: {v}")
            elif isinstance(v, list) and len(json.dumps(v)) <= 80:
                lines.append(f"  {k}: {json.dumps(v, ensure_ascii=False)}")
    return "\n".join(lines) + "\n"
