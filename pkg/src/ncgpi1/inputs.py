"""Job description files for the command-line tool.

Besides full algebra files, an algebra may be named by a builder::

    {"builder": "two_point", "max_degree": 7, "scalar_mode": "exact"}
    {"builder": "torus", "torus": {...torus file...}, "D_max": 2}

or on the command line as ``builder:two_point:max_degree=7``.

A connection file holds an algebra (inline, builder, or path), an optional
projection and the matrix kappa.  Matrix entries are term lists
``[{"basis", "re", "im"}]`` or plain numbers (multiples of the unit).
"""

from __future__ import annotations

import numpy as np

from . import builders
from .algebra import GradedBasisAlgebra
from .algebra_io import (_parse_fraction, algebra_from_dict, check_version, load_json, reject_unknown,
                         terms_to_coords)
from .connections import FgpConnection, FgpModule, NotAProjection, ShapeMismatch, connection_from_kappa
from .errors import InvalidInput
from .matrices import AlgMatrix
from .scalars import field_for
from .torus import TorusPresentation, torus_forms
from .transport import MatrixPath

_BUILDER_PARAMS = {
    "exterior": {"n"},
    "two_point": {"max_degree", "star"},
    "identified_points": {"max_degree", "star"},
    "jet": {"order"},
    "torus": {"torus", "D_max", "truncation"},
}


def _int(doc, key, default, path):
    v = doc.get(key, default)
    if isinstance(v, bool) or not isinstance(v, int):
        raise InvalidInput("must be an integer", f"{path}.{key}" if path else key)
    return v


def build_algebra(doc: dict, path: str = "") -> GradedBasisAlgebra:
    name = doc.get("builder")
    if name not in _BUILDER_PARAMS:
        raise InvalidInput(f"unknown builder {name!r}; expected one of {sorted(_BUILDER_PARAMS)}",
                           f"{path}.builder" if path else "builder")
    reject_unknown(doc, _BUILDER_PARAMS[name] | {"builder", "scalar_mode", "tolerance", "format_version"}, path)
    check_version(doc)
    mode = doc.get("scalar_mode", "exact")
    if mode not in ("exact", "numeric"):
        raise InvalidInput("scalar_mode must be 'exact' or 'numeric'", f"{path}.scalar_mode")
    tol = doc.get("tolerance", 1e-12)
    if name == "torus":
        T = load_torus(doc.get("torus"), f"{path}.torus")
        field = field_for(mode, tol, T.theta_values)
        return torus_forms(T, _int(doc, "D_max", T.n, path), field=field,
                           truncation=doc.get("truncation", "strict"))
    field = field_for(mode, tol)
    if name == "exterior":
        return builders.exterior(_int(doc, "n", 1, path), field)
    if name == "jet":
        return builders.jet(_int(doc, "order", 4, path), field)
    fn = builders.two_point if name == "two_point" else builders.identified_points
    return fn(_int(doc, "max_degree", 7, path), bool(doc.get("star", False)), field)


def parse_builder_shorthand(text: str) -> dict:
    """``builder:name:key=value:...`` -> builder document (integers parsed)."""
    parts = text.split(":")
    doc: dict = {"builder": parts[1] if len(parts) > 1 else ""}
    for item in parts[2:]:
        if "=" not in item:
            raise InvalidInput(f"expected key=value, got {item!r}", text)
        k, v = item.split("=", 1)
        if v.lstrip("-").isdigit():
            doc[k] = int(v)
        elif v in ("true", "false"):
            doc[k] = v == "true"
        else:
            doc[k] = v
    return doc


def load_doc(source) -> dict:
    if isinstance(source, str) and source.startswith("builder:"):
        return parse_builder_shorthand(source)
    return load_json(source)


def algebra_from_any(doc, path: str = "") -> GradedBasisAlgebra:
    if isinstance(doc, str):
        doc = load_doc(doc)
    if not isinstance(doc, dict):
        raise InvalidInput("expected an algebra object", path)
    if "builder" in doc:
        return build_algebra(doc, path)
    return algebra_from_dict(doc, path or "algebra")


def is_torus_doc(doc: dict) -> bool:
    return isinstance(doc, dict) and "theta" in doc and "builder" not in doc


def load_torus(doc, path: str = "torus") -> TorusPresentation:
    if isinstance(doc, str):
        doc = load_doc(doc)
    try:
        return TorusPresentation.from_dict(doc)
    except InvalidInput as exc:
        if path and exc.path and not exc.path.startswith(path):
            raise InvalidInput(str(exc).split(": ", 1)[-1], f"{path}.{exc.path}") from None
        raise


# --- matrices ---------------------------------------------------------------------

def alg_matrix(A: GradedBasisAlgebra, rows, path: str) -> AlgMatrix:
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise InvalidInput("expected a nonempty list of rows", path)
    width = len(rows[0])
    index = {n: i for i, n in enumerate(A.names)}
    gens = list(A.metadata.get("irrational_generators", ()))
    out = []
    for i, row in enumerate(rows):
        if len(row) != width:
            raise InvalidInput("ragged matrix", f"{path}[{i}]")
        line = []
        for j, e in enumerate(row):
            p = f"{path}[{i}][{j}]"
            if isinstance(e, list):
                line.append(A.element(terms_to_coords(e, index, A.field, gens, p)))
            elif isinstance(e, (int, float, str)) and not isinstance(e, bool):
                val = _parse_fraction(e, p) if A.field.exact else float(e)
                line.append(A.scalar(val))
            else:
                raise InvalidInput("entry must be a term list or a number", p)
        out.append(line)
    return AlgMatrix.from_elements(A, out)


def load_connection(source, path: str = "connection") -> FgpConnection:
    doc = load_doc(source) if not isinstance(source, dict) else source
    reject_unknown(doc, {"format_version", "algebra", "projection", "kappa", "compress", "tolerance"}, path)
    check_version(doc)
    if "algebra" not in doc:
        raise InvalidInput("missing field", f"{path}.algebra")
    A = algebra_from_any(doc["algebra"], f"{path}.algebra")
    if "kappa" not in doc:
        raise InvalidInput("missing field", f"{path}.kappa")
    kappa = alg_matrix(A, doc["kappa"], f"{path}.kappa")
    N = kappa.shape[0]
    p = alg_matrix(A, doc["projection"], f"{path}.projection") if "projection" in doc else AlgMatrix.identity(A, N)
    try:
        module = FgpModule(A, p, doc.get("tolerance"))
        return connection_from_kappa(module, kappa, compress=bool(doc.get("compress", False)))
    except (NotAProjection, ShapeMismatch) as exc:
        raise InvalidInput(str(exc), path) from None


# --- plain complex / rational matrices --------------------------------------------------

def scalar_matrix(rows, path: str, exact: bool = False) -> np.ndarray:
    """Entries: numbers, ``[re, im]`` pairs, or (exact mode) ``"p/q"`` strings / ``{"re", "im"}``."""
    from .scalars import ExactScalar

    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise InvalidInput("expected a nonempty list of rows", path)
    width = len(rows[0])
    out = []
    for i, row in enumerate(rows):
        if len(row) != width:
            raise InvalidInput("ragged matrix", f"{path}[{i}]")
        line = []
        for j, e in enumerate(row):
            p = f"{path}[{i}][{j}]"
            if exact:
                if isinstance(e, dict):
                    reject_unknown(e, {"re", "im"}, p)
                    line.append(ExactScalar.gaussian(_parse_fraction(e.get("re", 0), p + ".re"),
                                                     _parse_fraction(e.get("im", 0), p + ".im")))
                else:
                    line.append(ExactScalar.gaussian(_parse_fraction(e, p)))
                continue
            if isinstance(e, list) and len(e) == 2 and all(isinstance(x, (int, float)) and not isinstance(x, bool)
                                                            for x in e):
                line.append(complex(float(e[0]), float(e[1])))
            elif isinstance(e, (int, float)) and not isinstance(e, bool):
                line.append(complex(float(e)))
            else:
                raise InvalidInput("entry must be a number or [re, im]", p)
        out.append(line)
    return np.array(out, dtype=object if exact else complex)


def load_matrix_job(source, path: str = "matrix_job") -> dict:
    doc = load_doc(source)
    reject_unknown(doc, {"format_version", "matrix", "scalar_mode", "eps_rank"}, path)
    check_version(doc)
    if "matrix" not in doc:
        raise InvalidInput("missing field", f"{path}.matrix")
    exact = doc.get("scalar_mode", "numeric") == "exact"
    M = scalar_matrix(doc["matrix"], f"{path}.matrix", exact)
    eps = doc.get("eps_rank", 1e-10)
    if isinstance(eps, bool) or not isinstance(eps, (int, float)) or eps <= 0:
        raise InvalidInput("must be a positive number", f"{path}.eps_rank")
    return {"matrix": M, "exact": exact, "eps_rank": float(eps)}


def matrix_path(doc, path: str) -> MatrixPath:
    if not isinstance(doc, dict):
        raise InvalidInput("expected an object", path)
    kind = doc.get("kind")
    if kind == "constant":
        reject_unknown(doc, {"kind", "matrix"}, path)
        return MatrixPath.constant(scalar_matrix(doc.get("matrix"), f"{path}.matrix"))
    if kind == "scalar":
        reject_unknown(doc, {"kind", "c", "dimension"}, path)
        c = doc.get("c")
        if isinstance(c, list) and len(c) == 2:
            c = complex(float(c[0]), float(c[1]))
        elif isinstance(c, (int, float)) and not isinstance(c, bool):
            c = complex(float(c))
        else:
            raise InvalidInput("c must be a number or [re, im]", f"{path}.c")
        return MatrixPath.constant(c * np.eye(_int(doc, "dimension", 1, path)))
    if kind == "polynomial":
        reject_unknown(doc, {"kind", "coefficients"}, path)
        cs = doc.get("coefficients")
        if not isinstance(cs, list) or not cs:
            raise InvalidInput("expected a nonempty list of matrices", f"{path}.coefficients")
        mats = [scalar_matrix(c, f"{path}.coefficients[{k}]") for k, c in enumerate(cs)]
        if len({m.shape for m in mats}) != 1:
            raise InvalidInput("coefficient shapes differ", f"{path}.coefficients")
        return MatrixPath.polynomial(mats)
    if kind == "grid":
        reject_unknown(doc, {"kind", "knots", "values"}, path)
        vals = [scalar_matrix(v, f"{path}.values[{k}]") for k, v in enumerate(doc.get("values") or [])]
        try:
            return MatrixPath.grid(doc.get("knots"), vals)
        except (ValueError, TypeError) as exc:
            raise InvalidInput(str(exc), path) from None
    raise InvalidInput("kind must be constant, scalar, polynomial or grid", f"{path}.kind")


def load_transport_job(source, path: str = "transport_job") -> dict:
    doc = load_doc(source)
    reject_unknown(doc, {"format_version", "omega", "method", "steps", "terms", "direction"}, path)
    check_version(doc)
    if "omega" not in doc:
        raise InvalidInput("missing field", f"{path}.omega")
    method = doc.get("method", "picard")
    if method not in ("picard", "rk4", "both"):
        raise InvalidInput("method must be picard, rk4 or both", f"{path}.method")
    direction = doc.get("direction", "forward")
    if direction not in ("forward", "inverse"):
        raise InvalidInput("direction must be forward or inverse", f"{path}.direction")
    steps = _int(doc, "steps", 1024, path)
    if steps < 2:
        raise InvalidInput("need at least 2 steps", f"{path}.steps")
    return {"omega": matrix_path(doc["omega"], f"{path}.omega"), "method": method, "direction": direction,
            "steps": steps, "terms": _int(doc, "terms", 200, path), "raw_omega": doc["omega"]}

