"""JSON description files for graded-basis algebras.

Layout::

    {"format_version": "1.0", "name": ..., "scalar_mode": "exact" | "numeric",
     "max_degree": D, "complete": bool, "truncation": "strict" | "drop",
     "basis": [{"name", "degree"}], "unit": [term],
     "products": [{"left", "right", "result": [term]} | {"left", "right", "out_of_window": true}],
     "differential": [{"basis", "result": [term]} | {"basis", "out_of_window": true}],
     "star": null | [{"basis", "result": [term]}],
     "star_convention": "plain" | "koszul"}     (optional, default plain)

A term is ``{"basis", "re", "im"}`` with an optional ``"phase"``
``{"rational": "p/q", "irrational": {"theta1": "a/b"}}``.  Exact coefficients
are written as rational strings, numeric ones as JSON numbers.  Zero products
are omitted unless the pair lies above the top degree of a truncated algebra,
where omission would mean out-of-window.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .algebra import OUT_OF_WINDOW, GradedBasisAlgebra
from .errors import InvalidInput
from .scalars import ExactScalar, PhaseExponent, field_for, fraction_text

FORMAT_VERSION = "1.0"
_TOP_KEYS = {"format_version", "name", "scalar_mode", "tolerance", "max_degree", "complete", "truncation",
             "irrational_generators", "theta_values", "basis", "unit", "products", "differential", "star",
             "star_convention"}


def check_version(doc: dict, path: str = "format_version") -> None:
    v = doc.get("format_version", FORMAT_VERSION)
    try:
        major = int(str(v).split(".")[0])
    except ValueError:
        raise InvalidInput(f"unreadable version {v!r}", path) from None
    if major > int(FORMAT_VERSION.split(".")[0]):
        raise InvalidInput(f"format version {v} is newer than supported {FORMAT_VERSION}", path)


def reject_unknown(doc: dict, allowed: set, path: str) -> None:
    if not isinstance(doc, dict):
        raise InvalidInput("expected an object", path)
    extra = sorted(set(doc) - allowed)
    if extra:
        raise InvalidInput(f"unknown field(s) {extra}", path)


# --- scalars ------------------------------------------------------------------

def scalar_to_terms(value, field, generators=()) -> list[dict]:
    """List of ``{re, im[, phase]}`` dicts whose sum is ``value``."""
    if field.exact:
        out = []
        for (a, irr), (re, im) in ExactScalar.coerce(value).sorted_terms():
            t = {"re": fraction_text(re), "im": fraction_text(im)}
            if a or irr:
                ph = {"rational": fraction_text(a)}
                if irr:
                    names = list(generators) + [f"theta{j + 1}" for j in range(len(generators), len(irr))]
                    ph["irrational"] = {names[j]: fraction_text(c) for j, c in enumerate(irr) if c}
                t["phase"] = ph
            out.append(t)
        return out
    v = complex(value)
    return [{"re": v.real, "im": v.imag}] if v else []


def _parse_fraction(x, path):
    if isinstance(x, bool) or not isinstance(x, (int, str)):
        raise InvalidInput("exact coefficients must be integers or 'p/q' strings", path)
    try:
        return Fraction(x) if isinstance(x, int) else Fraction(x.strip())
    except (ValueError, ZeroDivisionError):
        raise InvalidInput(f"bad rational {x!r}", path) from None


def parse_phase(doc, generators, path) -> PhaseExponent:
    reject_unknown(doc, {"rational", "irrational"}, path)
    rational = _parse_fraction(doc.get("rational", 0), path + ".rational")
    irr = doc.get("irrational", {}) or {}
    if not isinstance(irr, dict):
        raise InvalidInput("expected a map generator -> coefficient", path + ".irrational")
    coeffs = [Fraction(0)] * len(generators)
    for name, c in irr.items():
        if name not in generators:
            raise InvalidInput(f"unknown irrational generator {name!r}", path + ".irrational")
        coeffs[generators.index(name)] = _parse_fraction(c, f"{path}.irrational.{name}")
    return PhaseExponent(rational, coeffs)


def term_scalar(term: dict, field, generators, path):
    re, im = term.get("re", 0), term.get("im", 0)
    if field.exact:
        val = ExactScalar.gaussian(_parse_fraction(re, path + ".re"), _parse_fraction(im, path + ".im"))
        if "phase" in term:
            val = val * ExactScalar.from_phase(parse_phase(term["phase"], generators, path + ".phase"))
        return val
    for key, x in (("re", re), ("im", im)):
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise InvalidInput("numeric coefficients must be numbers", f"{path}.{key}")
    val = complex(float(re), float(im))
    if "phase" in term:
        val *= parse_phase(term["phase"], generators, path + ".phase").value(field.theta_values)
    return val


def terms_to_coords(terms, names_index, field, generators, path) -> dict:
    if not isinstance(terms, list):
        raise InvalidInput("expected a list of terms", path)
    out = {}
    for k, t in enumerate(terms):
        p = f"{path}[{k}]"
        reject_unknown(t, {"basis", "re", "im", "phase"}, p)
        if "basis" not in t:
            raise InvalidInput("missing basis", p)
        if t["basis"] not in names_index:
            raise InvalidInput(f"unknown basis element {t['basis']!r}", p + ".basis")
        i = names_index[t["basis"]]
        v = term_scalar(t, field, generators, p)
        out[i] = out[i] + v if i in out else v
    return out


def coords_to_terms(A: GradedBasisAlgebra, coords: dict, generators=()) -> list[dict]:
    out = []
    for i in sorted(coords):
        for t in scalar_to_terms(coords[i], A.field, generators):
            out.append({"basis": A.names[i], **t})
    return out


# --- algebras -----------------------------------------------------------------

def algebra_to_dict(A: GradedBasisAlgebra) -> dict:
    gens = list(A.metadata.get("irrational_generators", ()))
    doc = {"format_version": FORMAT_VERSION, "name": A.name, "scalar_mode": A.field.name}
    if not A.field.exact:
        doc["tolerance"] = A.field.tol
        if A.field.theta_values:
            doc["theta_values"] = list(A.field.theta_values)
    doc.update({"max_degree": A.max_degree, "complete": A.complete, "truncation": A.truncation})
    if gens:
        doc["irrational_generators"] = gens
    doc["basis"] = [{"name": b.name, "degree": b.degree} for b in A.basis]
    doc["unit"] = coords_to_terms(A, A._unit, gens)
    products = []
    for i in range(A.dim):
        for j in range(A.dim):
            val = A.product_coords(i, j)
            above = not A.complete and A.degrees[i] + A.degrees[j] > A.max_degree
            if val is OUT_OF_WINDOW:
                if not above:
                    products.append({"left": A.names[i], "right": A.names[j], "out_of_window": True})
            elif val or above:
                products.append({"left": A.names[i], "right": A.names[j], "result": coords_to_terms(A, val, gens)})
    doc["products"] = products
    diff = []
    for i in range(A.dim):
        val = A.d_coords(i)
        above = not A.complete and A.degrees[i] + 1 > A.max_degree
        if val is OUT_OF_WINDOW:
            if not above:
                diff.append({"basis": A.names[i], "out_of_window": True})
        elif val or above:
            diff.append({"basis": A.names[i], "result": coords_to_terms(A, val, gens)})
    doc["differential"] = diff
    doc["star"] = ([{"basis": A.names[i], "result": coords_to_terms(A, A.star_coords(i), gens)}
                    for i in range(A.dim)] if A.has_star else None)
    if A.has_star and A.star_convention != "plain":
        doc["star_convention"] = A.star_convention
    return doc


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=1, ensure_ascii=False) + "\n"


def save_algebra(A: GradedBasisAlgebra, path=None) -> str:
    text = dumps(algebra_to_dict(A))
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def algebra_from_dict(doc: dict, path: str = "algebra") -> GradedBasisAlgebra:
    reject_unknown(doc, _TOP_KEYS, path)
    check_version(doc, path + ".format_version")
    mode = doc.get("scalar_mode", "exact")
    if mode not in ("exact", "numeric"):
        raise InvalidInput(f"unknown scalar_mode {mode!r}", path + ".scalar_mode")
    gens = doc.get("irrational_generators", []) or []
    if not isinstance(gens, list) or not all(isinstance(g, str) for g in gens):
        raise InvalidInput("expected a list of names", path + ".irrational_generators")
    thetas = doc.get("theta_values", []) or []
    field = field_for(mode, float(doc.get("tolerance", 1e-12)), thetas)
    basis = doc.get("basis")
    if not isinstance(basis, list) or not basis:
        raise InvalidInput("basis must be a nonempty list", path + ".basis")
    names, degrees = [], []
    for k, b in enumerate(basis):
        p = f"{path}.basis[{k}]"
        reject_unknown(b, {"name", "degree"}, p)
        if not isinstance(b.get("name"), str) or not isinstance(b.get("degree"), int) or b["degree"] < 0:
            raise InvalidInput("needs a string name and nonnegative integer degree", p)
        names.append(b["name"])
        degrees.append(b["degree"])
    if len(set(names)) != len(names):
        raise InvalidInput("duplicate basis names", path + ".basis")
    index = {n: i for i, n in enumerate(names)}
    max_degree = doc.get("max_degree", max(degrees))
    if not isinstance(max_degree, int) or max_degree < max(degrees):
        raise InvalidInput("max_degree must be an integer at least the largest basis degree", path + ".max_degree")
    complete = doc.get("complete", False)
    if not isinstance(complete, bool):
        raise InvalidInput("expected a boolean", path + ".complete")

    products = {}
    for k, e in enumerate(doc.get("products", [])):
        p = f"{path}.products[{k}]"
        reject_unknown(e, {"left", "right", "result", "out_of_window"}, p)
        try:
            key = (index[e["left"]], index[e["right"]])
        except KeyError:
            raise InvalidInput("left/right must name basis elements", p) from None
        if key in products:
            raise InvalidInput("duplicate product entry", p)
        if e.get("out_of_window"):
            products[key] = OUT_OF_WINDOW
        else:
            products[key] = terms_to_coords(e.get("result", []), index, field, gens, p + ".result")
    differential = {}
    for k, e in enumerate(doc.get("differential", [])):
        p = f"{path}.differential[{k}]"
        reject_unknown(e, {"basis", "result", "out_of_window"}, p)
        if e.get("basis") not in index:
            raise InvalidInput("basis must name a basis element", p)
        key = index[e["basis"]]
        if e.get("out_of_window"):
            differential[key] = OUT_OF_WINDOW
        else:
            differential[key] = terms_to_coords(e.get("result", []), index, field, gens, p + ".result")
    star = None
    if doc.get("star") is not None:
        star = {}
        for k, e in enumerate(doc["star"]):
            p = f"{path}.star[{k}]"
            reject_unknown(e, {"basis", "result"}, p)
            if e.get("basis") not in index:
                raise InvalidInput("basis must name a basis element", p)
            star[index[e["basis"]]] = terms_to_coords(e.get("result", []), index, field, gens, p + ".result")
        missing = set(range(len(names))) - set(star)
        if missing:
            raise InvalidInput(f"star missing for {sorted(names[i] for i in missing)}", path + ".star")
    unit = terms_to_coords(doc.get("unit", [{"basis": names[0], "re": 1, "im": 0}]), index, field, gens, path + ".unit")
    try:
        return GradedBasisAlgebra(list(zip(names, degrees)), products, differential, unit=unit, star=star,
                                  max_degree=max_degree, field=field, truncation=doc.get("truncation", "strict"),
                                  complete=complete, name=doc.get("name", "algebra"),
                                  star_convention=doc.get("star_convention", "plain"),
                                  metadata={"irrational_generators": tuple(gens)} if gens else {})
    except (ValueError, KeyError) as exc:
        raise InvalidInput(str(exc), path) from None


def load_json(source) -> dict:
    """Parse JSON from a path, ``-`` (stdin), or an already-parsed dict."""
    import sys

    if isinstance(source, dict):
        return source
    try:
        if source == "-":
            text = sys.stdin.read()
        else:
            text = Path(source).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidInput(f"cannot read input: {exc}", str(source)) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}", str(source)) from None


def load_algebra(source) -> GradedBasisAlgebra:
    return algebra_from_dict(load_json(source))
