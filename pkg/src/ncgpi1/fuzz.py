"""Randomized property suites.

Each trial draws its randomness from ``numpy.random.default_rng([seed, index])``
only, so a trial can be rerun in isolation and the suite can be split across
workers without changing any record.  Records are sorted by trial index.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import numpy as np

from .abelian import cayley_hamilton_residual, dm_derivative_check, penrose_residuals, pseudoinverse
from .algebra import check_dga_axioms, tensor_dga
from .builders import exterior, identified_points, jet, two_point
from .connections import (FgpConnection, FgpModule, connection_from_kappa, dual_curvature_antisymmetry,
                          tensor_curvature_additivity)
from .matrices import AlgMatrix
from .scalars import NumericField, PhaseExponent
from .torus import TorusPresentation, lattice_Lambda, torus_forms, weyl, weyl_mul

SUITES = ("axioms", "curvature-laws", "pseudoinverse", "dm-inequality", "torus-phases")


def trial_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(index)])


def _cnormal(rng, *shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _spec_norm(X) -> float:
    return float(np.linalg.norm(X, 2)) if X.size else 0.0


# --- axioms ---------------------------------------------------------------------

def _trial_axioms(rng) -> dict:
    kind = ["exterior", "two_point", "identified_points", "jet", "torus", "tensor"][rng.integers(6)]
    params: dict = {"builder": kind}
    if kind == "exterior":
        params["n"] = int(rng.integers(1, 4))
        A = exterior(params["n"])
    elif kind in ("two_point", "identified_points"):
        params["max_degree"] = int(rng.integers(1, 5))
        A = (two_point if kind == "two_point" else identified_points)(params["max_degree"])
    elif kind == "jet":
        params["order"] = int(rng.integers(1, 5))
        A = jet(params["order"])
    elif kind == "torus":
        q = int(rng.integers(1, 7))
        theta = Fraction(int(rng.integers(0, q)), q)
        params["theta"] = str(theta)
        A = torus_forms(TorusPresentation.rational_2d(theta, 1), 2)
    else:
        params["n"] = int(rng.integers(1, 3))
        params["max_degree"] = int(rng.integers(1, 4))
        A = tensor_dga(exterior(params["n"]), two_point(params["max_degree"]))
    rep = check_dga_axioms(A)
    return {"pass": rep.passed, "params": params,
            "checked": {r.name: r.checked for r in rep.results},
            "failures": [r.to_dict() for r in rep.results if not r.passed]}


# --- curvature laws -----------------------------------------------------------------

def random_projection(rng, N: int, k: int) -> np.ndarray:
    Q, _ = np.linalg.qr(_cnormal(rng, N, N))
    V = Q[:, :k]
    return V @ V.conj().T


def random_connection(A, rng, N: int, full_rank: bool = False) -> FgpConnection:
    """Random connection on a random projective module over an exterior algebra.

    The projection is a constant orthogonal projection; kappa has random
    degree-one entries and is compressed to ``p kappa p``.
    """
    k = N if full_rank else int(rng.integers(1, N + 1))
    p = random_projection(rng, N, k) if k < N else np.eye(N, dtype=complex)
    P = AlgMatrix.from_scalars(A, p)
    kappa = AlgMatrix.zeros(A, N, N)
    for idx in A.basis_of_degree(1):
        kappa.data[:, :, idx] = _cnormal(rng, N, N)
    return connection_from_kappa(FgpModule(A, P, 1e-10), kappa, compress=True)


def _trial_curvature(rng, tol: float = 1e-10) -> dict:
    n = int(rng.integers(1, 4))
    A = exterior(n, NumericField(1e-12))
    N1, N2 = int(rng.integers(1, 4)), int(rng.integers(1, 4))
    C1 = random_connection(A, rng, N1)
    C2 = random_connection(A, rng, N2)
    tens = tensor_curvature_additivity(C1, C2, tol)
    dual = dual_curvature_antisymmetry(C1, tol)
    return {"pass": tens.passed and dual.passed, "params": {"n": n, "ranks": [N1, N2]},
            "tensor_residual": tens.margin, "dual_residual": dual.margin}


# --- pseudoinverse ----------------------------------------------------------------------

def random_matrix(rng) -> tuple[np.ndarray, dict]:
    r, c = int(rng.integers(1, 7)), int(rng.integers(1, 7))
    kind = ["generic", "rank_deficient", "zero_row", "scaled"][rng.integers(4)]
    if kind == "rank_deficient" and min(r, c) > 1:
        k = int(rng.integers(1, min(r, c)))
        phi = _cnormal(rng, r, k) @ _cnormal(rng, k, c)
    elif kind == "zero_row":
        phi = _cnormal(rng, r, c)
        phi[int(rng.integers(r))] = 0
    elif kind == "scaled":
        phi = _cnormal(rng, r, c) * 10.0 ** float(rng.uniform(-3, 3))
    else:
        phi = _cnormal(rng, r, c)
    return phi, {"shape": [r, c], "kind": kind}


def _trial_pseudoinverse(rng) -> dict:
    phi, params = random_matrix(rng)
    pi = pseudoinverse(phi)
    nrm = _spec_norm(phi)
    res = penrose_residuals(phi, pi.phi_plus)
    resid = float(np.linalg.norm(phi @ pi.phi_plus @ phi - phi, 2))
    ok_resid = resid <= 1e-8 * max(1.0, nrm)
    ch = cayley_hamilton_residual(phi.conj().T @ phi)
    ok_ch = ch <= 1e-9
    oracle = np.linalg.pinv(phi)
    agree = float(np.linalg.norm(pi.phi_plus - oracle, 2))
    margined = pi.well_margined()
    ok_svd = (not margined) or agree <= 1e-6 * max(1.0, _spec_norm(oracle))
    rank_np = int(np.linalg.matrix_rank(phi))
    return {"pass": bool(ok_resid and ok_ch and ok_svd), "params": params, "rank": pi.rank,
            "numpy_rank": rank_np, "well_margined": margined, "residual": resid, "ch_residual": ch,
            "svd_agreement": agree, "penrose": res}


# --- D_m inequality -----------------------------------------------------------------------

def _trial_dm(rng) -> dict:
    n = int(rng.integers(2, 6))
    M, K = _cnormal(rng, n, n), _cnormal(rng, n, n)
    checks = [dm_derivative_check(M, K, m) for m in range(n + 1)]
    return {"pass": all(c.passed for c in checks), "params": {"n": n},
            "per_m": [{"m": c.m, "lhs": c.lhs, "rhs": c.rhs, "pass": c.passed} for c in checks]}


# --- torus phases -----------------------------------------------------------------------

def random_theta(rng, n: int, irrational: bool = True) -> TorusPresentation:
    entries = [[(0, []) for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            q = int(rng.integers(1, 7))
            rat = Fraction(int(rng.integers(-q, q + 1)), q)
            irr = [int(rng.integers(-1, 3))] if irrational and rng.random() < 0.5 else []
            entries[i][j] = (rat, irr)
            entries[j][i] = (-rat, [-c for c in irr])
    gens = ("theta1",) if irrational else ()
    return TorusPresentation.from_matrix(entries, 20, gens, (2 ** 0.5 - 1,) if irrational else ())


def random_unimodular(rng, n: int, steps: int = 6) -> list[list[int]]:
    U = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(steps):
        i, j = (int(v) for v in rng.choice(n, 2, replace=False))
        c = int(rng.integers(-2, 3))
        for row in U:
            row[j] += c * row[i]
        if rng.random() < 0.3:
            for row in U:
                row[i], row[j] = row[j], row[i]
    return U


def _trial_torus(rng) -> dict:
    n = int(rng.integers(2, 4))
    T = random_theta(rng, n)
    r, s, t = (tuple(int(v) for v in rng.integers(-3, 4, n)) for _ in range(3))
    cocycle = (T.cocycle(r, s) + T.cocycle(tuple(a + b for a, b in zip(r, s)), t)
               == T.cocycle(s, t) + T.cocycle(r, tuple(a + b for a, b in zip(s, t))))
    ur, us, ut = weyl(r), weyl(s), weyl(t)
    left = weyl_mul(weyl_mul(ur, us, T), ut, T)
    right = weyl_mul(ur, weyl_mul(us, ut, T), T)
    assoc = left.exponent == right.exponent and left.phase == right.phase
    neg = lambda v: tuple(-a for a in v)  # noqa: E731
    comm = weyl_mul(weyl_mul(weyl_mul(ur, us, T), weyl(neg(r)), T), weyl(neg(s)), T)
    e = T.bilinear(r, s).scale(2)
    commutator = not any(comm.exponent) and comm.phase == PhaseExponent(e.rational, e.irrational)
    U = random_unimodular(rng, n)
    m1 = lattice_Lambda(T).m
    m2 = lattice_Lambda(T.conjugated(U)).m
    return {"pass": bool(cocycle and assoc and commutator and m1 == m2),
            "params": {"n": n, "r": list(r), "s": list(s), "t": list(t), "unimodular": U},
            "cocycle": cocycle, "associative": assoc, "commutator": commutator, "m": [m1, m2]}


_TRIALS = {
    "axioms": _trial_axioms,
    "curvature-laws": _trial_curvature,
    "pseudoinverse": _trial_pseudoinverse,
    "dm-inequality": _trial_dm,
    "torus-phases": _trial_torus,
}


def run_trial(suite: str, seed: int, index: int) -> dict:
    rec = _TRIALS[suite](trial_rng(seed, index))
    return {"suite": suite, "trial": index, **rec}


def _run_chunk(args):
    suite, seed, indices = args
    return [run_trial(suite, seed, i) for i in indices]


def run_suite(suite: str, seed: int, trials: int, jobs: int = 1) -> tuple[list[dict], dict]:
    if suite not in _TRIALS:
        raise ValueError(f"unknown suite {suite!r}")
    idx = list(range(trials))
    if jobs > 1 and trials > 1:
        chunks = [(suite, seed, idx[k::jobs]) for k in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = [r for part in pool.map(_run_chunk, chunks) for r in part]
    else:
        records = _run_chunk((suite, seed, idx))
    records.sort(key=lambda r: r["trial"])
    failed = [r["trial"] for r in records if not r["pass"]]
    summary = {"suite": suite, "seed": seed, "trials": trials, "passed": trials - len(failed),
               "failed": len(failed), "failed_trials": failed, "pass": not failed}
    return records, summary
