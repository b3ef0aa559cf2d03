"""``ncgpi1`` command-line tool.

Every command writes one report (JSON or text) and exits with

    0  all checks pass
    1  some check failed
    2  invalid input (including usage errors)
    3  numerical divergence
"""

from __future__ import annotations

import sys
import time

import click
import numpy as np

from . import __version__
from .abelian import cayley_hamilton_residual, penrose_residuals, pseudoinverse
from .algebra import check_dga_axioms
from .center import CenterNotClosed, center_algebra, graded_center
from .checks import CheckResult
from .connections import (NotCommutative, ShapeMismatch, check_connection, curvature, dual_connection,
                          dual_curvature_antisymmetry, tensor_connection, tensor_curvature_additivity)
from .errors import DivergenceDetected, InvalidInput, OutsideConvergenceRadius
from .fuzz import SUITES, run_suite
from .inputs import (algebra_from_any, is_torus_doc, load_connection, load_doc, load_matrix_job, load_torus,
                     load_transport_job)
from .reports import check_records, dumps, dumps_line, jsonable, make_report, text_summary
from .torus import Inconclusive, brute_force_lattice, center_crosscheck, pi1_descriptor

EXIT_PASS, EXIT_FAIL, EXIT_INVALID, EXIT_DIVERGENCE = 0, 1, 2, 3


def _common(f):
    f = click.option("--timing", is_flag=True, help="Include wall-clock seconds in the report.")(f)
    f = click.option("--out", "out", type=click.Path(dir_okay=False), help="Write the report here.")(f)
    f = click.option("--format", "fmt", type=click.Choice(["json", "text"]), default="json", show_default=True)(f)
    f = click.option("--tol", type=float, default=None, help="Override the comparison tolerance.")(f)
    f = click.option("--seed", type=int, default=None)(f)
    f = click.option("--input", "inputs", multiple=True,
                     help="Input file, '-' for stdin, or builder:NAME:key=value.")(f)
    return f


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _error_report(command, inputs, kind, exc) -> dict:
    err = {"type": kind, "message": str(exc)}
    if isinstance(exc, InvalidInput) and exc.path:
        err["path"] = exc.path
    return {"command": command, "version": __version__, "inputs": list(inputs), "pass": False, "error": err}


def _run(command: str, body, inputs, seed, tol, fmt, out, timing, need: int | tuple = 1) -> None:
    lo, hi = (need, need) if isinstance(need, int) else need
    if not lo <= len(inputs) <= hi:
        want = str(lo) if lo == hi else f"{lo} to {hi}"
        exc = InvalidInput(f"expected {want} --input value(s), got {len(inputs)}", "--input")
        _finish(command, inputs, fmt, out, _error_report(command, inputs, "InvalidInput", exc), EXIT_INVALID)
    start = time.perf_counter()
    try:
        checks, result = body(list(inputs), tol, seed)
    except InvalidInput as exc:
        _finish(command, inputs, fmt, out, _error_report(command, inputs, "InvalidInput", exc), EXIT_INVALID)
    except (NotCommutative, ShapeMismatch, Inconclusive) as exc:
        _finish(command, inputs, fmt, out, _error_report(command, inputs, "InvalidInput", exc), EXIT_INVALID)
    except (DivergenceDetected, OutsideConvergenceRadius) as exc:
        _finish(command, inputs, fmt, out, _error_report(command, inputs, type(exc).__name__, exc),
                EXIT_DIVERGENCE)
    wall = time.perf_counter() - start if timing else None
    report = make_report(command, inputs, checks, result, seed=seed, tol=tol, wall_clock=wall)
    _finish(command, inputs, fmt, out, report, EXIT_PASS if report["pass"] else EXIT_FAIL)


def _finish(command, inputs, fmt, out, report, code) -> None:
    if fmt == "json":
        text = dumps(report)
    elif "error" in report:
        e = report["error"]
        text = f"{command}: {e['type']}: {e['message']}\n"
    else:
        text = text_summary(report)
    _emit(text, out)
    sys.exit(code)


@click.group()
@click.version_option(__version__, prog_name="ncgpi1")
def main():
    """Finite differential graded algebras, connections, transport and torus invariants."""


# --- algebra commands ---------------------------------------------------------------

def _body_check(inputs, tol, seed):
    A = algebra_from_any(inputs[0], "algebra")
    rep = check_dga_axioms(A)
    return check_records(rep), {"algebra": A.name, "dimension": A.dim, "degree_dims": A.degree_dims(),
                                "max_degree": A.max_degree, "complete": A.complete}


@main.command()
@_common
def check(inputs, seed, tol, fmt, out, timing):
    """Verify the dga axioms of an algebra."""
    _run("check", _body_check, inputs, seed, tol, fmt, out, timing)


def _center_algebra_report(A):
    Z = graded_center(A)
    degrees = {}
    for k in range(A.max_degree + 1):
        entry = {"computed": Z.computed(k), "complete": bool(Z.complete.get(k, not A.basis_of_degree(k)))}
        if Z.computed(k):
            entry["dimension"] = Z.dim(k)
            entry["basis"] = [jsonable(z) for z in Z.elements.get(k, [])]
        degrees[str(k)] = entry
    if len(Z.computed_degrees) == A.max_degree + 1:
        try:
            center_algebra(Z)
            chk = CheckResult("center_closed", True, checked=len(Z.computed_degrees))
        except CenterNotClosed as exc:
            chk = CheckResult("center_closed", False, {"reason": str(exc)})
    else:
        chk = CheckResult("center_closed", True, checked=0, note="some degrees have no interior candidates")
    return [chk.to_dict()], {"algebra": A.name, "dims": Z.dims(), "degrees": degrees}


def _body_center(inputs, tol, seed):
    doc = load_doc(inputs[0])
    if is_torus_doc(doc):
        T = load_torus(doc)
        cc = center_crosscheck(T)
        d = cc.to_dict()
        checks = [CheckResult(f"lattice_prediction_degree_{k}", v["pass"],
                              None if v["pass"] else {"predicted_dim": v["predicted_dim"],
                                                      "computed_dim": v["computed_dim"]},
                              checked=1).to_dict() for k, v in d["degrees"].items()]
        dims = [d["degrees"][k]["computed_dim"] for k in sorted(d["degrees"], key=int)]
        return checks, {"torus": True, "dims": dims, **d}
    return _center_algebra_report(algebra_from_any(doc, "algebra"))


@main.command()
@_common
def center(inputs, seed, tol, fmt, out, timing):
    """Graded center per degree (torus files are checked against the lattice prediction)."""
    _run("center", _body_center, inputs, seed, tol, fmt, out, timing)


# --- connections ----------------------------------------------------------------------

def _connection_checks(C, tol) -> list:
    return check_records(check_connection(C, tol))


def _body_curvature(inputs, tol, seed, require_flat=False):
    C = load_connection(inputs[0])
    cur = curvature(C, tol)
    t = tol if tol is not None else (0.0 if C.algebra.field.exact else C.algebra.field.tol)
    first = cur.matrix.first_nonzero(t)
    flat = first is None
    checks = _connection_checks(C, tol) + check_records([cur.bilinearity, cur.closed_form])
    if require_flat:
        checks.append(CheckResult("flat", flat, None if flat else {"entry": list(first)},
                                  margin=cur.matrix.max_abs(), checked=1).to_dict())
    return checks, {"flat": flat, "curvature": cur.matrix}


@main.command("curvature")
@_common
def curvature_cmd(inputs, seed, tol, fmt, out, timing):
    """Curvature matrix of a connection, with bilinearity and closed-form witnesses."""
    _run("curvature", _body_curvature, inputs, seed, tol, fmt, out, timing)


@main.command()
@_common
def flat(inputs, seed, tol, fmt, out, timing):
    """Pass iff the connection has zero curvature."""
    _run("flat", lambda i, t, s: _body_curvature(i, t, s, require_flat=True), inputs, seed, tol, fmt, out, timing)


def _body_tensor(inputs, tol, seed):
    C1, C2 = load_connection(inputs[0], "connection[0]"), load_connection(inputs[1], "connection[1]")
    G = tensor_connection(C1, C2)
    chk = tensor_curvature_additivity(C1, C2, tol)
    return check_records([chk]), {"projection": G.p, "kappa": G.kappa}


@main.command()
@_common
def tensor(inputs, seed, tol, fmt, out, timing):
    """Tensor product of two connections and curvature additivity."""
    _run("tensor", _body_tensor, inputs, seed, tol, fmt, out, timing, need=2)


def _body_dual(inputs, tol, seed):
    C = load_connection(inputs[0])
    D = dual_connection(C, tol)
    anti = dual_curvature_antisymmetry(C, tol)
    return check_records([D.pairing_check, anti]), {"projection": D.connection.p, "kappa": D.connection.kappa}


@main.command()
@_common
def dual(inputs, seed, tol, fmt, out, timing):
    """Dual connection, pairing compatibility and curvature antisymmetry."""
    _run("dual", _body_dual, inputs, seed, tol, fmt, out, timing)


# --- pseudoinverse and transport ----------------------------------------------------------

def _norm2(X) -> float:
    X = np.asarray(X, dtype=complex)
    return float(np.linalg.norm(X, 2)) if X.size else 0.0


def _body_pseudoinverse(inputs, tol, seed):
    job = load_matrix_job(inputs[0])
    phi = job["matrix"]
    pi = pseudoinverse(phi, job["eps_rank"])
    checks = []
    res = penrose_residuals(phi, pi.phi_plus)
    if job["exact"]:
        r = phi @ pi.phi_plus @ phi - phi
        ok = all(v == 0 for v in r.flat)
        checks.append(CheckResult("penrose_exact", ok, None if ok else {"residuals": res}, checked=1).to_dict())
    else:
        t = 1e-8 if tol is None else tol
        nrm = _norm2(phi)
        resid = _norm2(phi @ pi.phi_plus @ phi - phi)
        checks.append(CheckResult("phi_phiplus_phi", resid <= t * max(1.0, nrm),
                                  None if resid <= t * max(1.0, nrm) else {"residual": resid},
                                  margin=resid, checked=1).to_dict())
        ch = cayley_hamilton_residual(phi.conj().T @ phi)
        checks.append(CheckResult("cayley_hamilton", ch <= 1e-9, None if ch <= 1e-9 else {"residual": ch},
                                  margin=ch, checked=1).to_dict())
    result = {"rank": pi.rank, "m": pi.m, "phi_plus": pi.phi_plus, "coefficients": pi.coefficients,
              "penrose_residuals": res}
    if not job["exact"]:
        result["margin_above"] = pi.margin_above
        result["margin_below"] = pi.margin_below
        result["well_margined"] = pi.well_margined()
    return checks, result


@main.command("pseudoinverse")
@_common
def pseudoinverse_cmd(inputs, seed, tol, fmt, out, timing):
    """Polynomial pseudoinverse of a matrix with Penrose and Cayley-Hamilton residuals."""
    _run("pseudoinverse", _body_pseudoinverse, inputs, seed, tol, fmt, out, timing)


def _body_transport(inputs, tol, seed):
    from scipy.linalg import expm

    from .transport import inverse_transport, path_ordered_exp

    job = load_transport_job(inputs[0])
    omega = job["omega"]
    solve = path_ordered_exp if job["direction"] == "forward" else inverse_transport
    res = solve(omega, job["method"], job["steps"], job["terms"])
    alpha = res.alpha_at_1
    checks = []
    if res.bound_report is not None:
        b = res.bound_report
        checks.append(CheckResult("factorial_bound", b["discrete_ok"], None if b["discrete_ok"] else
                                  {"terms": [t["n"] for t in b["terms"] if not t["discrete_ok"]]},
                                  margin=b["max_slack"], checked=len(b["terms"])).to_dict())
    if res.agreement is not None:
        t = 1e-6 if tol is None else tol
        checks.append(CheckResult("method_agreement", res.agreement <= t,
                                  None if res.agreement <= t else {"agreement": res.agreement},
                                  margin=res.agreement, checked=1).to_dict())
    if job["raw_omega"].get("kind") in ("constant", "scalar"):
        M = omega(0.0)
        ref = expm(M if job["direction"] == "forward" else -M)
        err = _norm2(alpha - ref)
        t = 1e-6 if tol is None else tol
        ok = err <= t * max(1.0, _norm2(ref))
        checks.append(CheckResult("constant_closed_form", ok, None if ok else {"error": err},
                                  margin=err, checked=1).to_dict())
    checks.append(CheckResult("det_continuous", res.det_continuous, checked=1).to_dict())
    result = {"method": res.method, "direction": job["direction"], "steps": job["steps"],
              "alpha_at_1": alpha, "residual": res.residual, "terms_used": res.terms_used,
              "agreement": res.agreement, "invertibility_margin": res.invertibility_margin,
              "max_condition_number": float(np.max(res.condition_numbers)),
              "bound_report": res.bound_report, **res.extra}
    return checks, result


@main.command()
@_common
def transport(inputs, seed, tol, fmt, out, timing):
    """Path-ordered exponential of a matrix-valued path on [0, 1]."""
    _run("transport", _body_transport, inputs, seed, tol, fmt, out, timing)


# --- torus --------------------------------------------------------------------------------

def _body_pi1(inputs, tol, seed):
    T = load_torus(inputs[0])
    D = pi1_descriptor(T)
    L = D.lattice
    rows_ok = all(all(e.is_integer() for e in T.theta_times(b)) for b in L.basis)
    checks = [CheckResult("lattice_integrality", rows_ok, checked=len(L.basis)).to_dict()]
    bound = T.radius
    brute = set(brute_force_lattice(T, bound))
    solved = {r for r in T.window(bound) if L.contains(r)}
    diff = sorted(brute ^ solved)
    checks.append(CheckResult("brute_force_window", not diff, {"mismatch": list(diff[0])} if diff else None,
                              checked=len(T.window(bound))).to_dict())
    return checks, D.to_dict()


@main.command()
@_common
def pi1(inputs, seed, tol, fmt, out, timing):
    """Lattice Lambda, subgroup Gamma and the fundamental-group descriptor of a torus."""
    _run("pi1", _body_pi1, inputs, seed, tol, fmt, out, timing)


# --- fuzz ---------------------------------------------------------------------------------

@main.command()
@click.option("--suite", type=click.Choice(SUITES), required=True)
@click.option("--trials", type=click.IntRange(min=1), default=100, show_default=True)
@click.option("--jobs", type=click.IntRange(min=1), default=1, show_default=True)
@_common
def fuzz(suite, trials, jobs, inputs, seed, tol, fmt, out, timing):
    """Randomized property suite: one JSON line per trial, then a summary line."""
    if seed is None:
        raise click.UsageError("--seed is required for fuzz")
    if inputs:
        raise click.UsageError("fuzz takes no --input")
    start = time.perf_counter()
    records, summary = run_suite(suite, seed, trials, jobs)
    summary = {"command": "fuzz", "version": __version__, **summary}
    if timing:
        summary["wall_clock_seconds"] = time.perf_counter() - start
    if fmt == "json":
        text = "".join(dumps_line(jsonable(r)) + "\n" for r in records) + dumps_line(jsonable(summary)) + "\n"
    else:
        lines = [f"trial {r['trial']}: {'pass' if r['pass'] else 'FAIL'}" for r in records]
        lines.append(f"{suite}: {summary['passed']}/{trials} passed")
        text = "\n".join(lines) + "\n"
    _emit(text, out)
    sys.exit(EXIT_PASS if summary["pass"] else EXIT_FAIL)


if __name__ == "__main__":
    main()
