"""One test per acceptance criterion; tolerances and time limits are pinned here."""

import json
import time
from fractions import Fraction as F

import numpy as np
import pytest
from click.testing import CliRunner
from scipy.linalg import expm

from ncgpi1.builders import jet, truncated_exponential
from ncgpi1.cli import main
from ncgpi1.connections import FgpModule, check_morphism, connection_from_kappa
from ncgpi1.fuzz import SUITES, random_matrix, run_suite, trial_rng
from ncgpi1.matrices import AlgMatrix
from ncgpi1.torus import (TorusPresentation, brute_force_lattice, center_crosscheck, gamma_subgroup,
                          lattice_Lambda, pi1_descriptor, torus_forms, weyl_form)
from ncgpi1.transport import MatrixPath, half_step_consistency, log_representation, path_ordered_exp

SEED = 20260


@pytest.fixture
def criterion(record_property):
    def note(n, detail):
        record_property("criterion", n)
        record_property("detail", detail)
        print(f"criterion {n}: {detail}")
    return note


def _cli(*args):
    res = CliRunner().invoke(main, list(args))
    return res.exit_code, res.output


def _center_dims(builder, criterion, n):
    t0 = time.perf_counter()
    code, out = _cli("center", "--input", builder)
    elapsed = time.perf_counter() - t0
    dims = json.loads(out)["result"]["dims"]
    criterion(n, f"dims {dims[:7]} in {elapsed:.3f}s (limit 1s)")
    assert code == 0
    assert dims[:7] == [1, 0, 1, 0, 1, 0, 1]
    assert elapsed < 1.0


def test_c01_two_point_center(criterion):
    # top degree 7 so that degrees 0..6 are interior in the truncated window
    _center_dims("builder:two_point:max_degree=7", criterion, 1)


def test_c02_identified_points_center(criterion):
    _center_dims("builder:identified_points:max_degree=7", criterion, 2)


def test_c03_rational_torus(criterion):
    t0 = time.perf_counter()
    got = {}
    for theta, q in ((F(1, 2), 2), (F(1, 3), 3), (F(2, 5), 5)):
        T = TorusPresentation.rational_2d(theta)
        L = lattice_Lambda(T)
        D = pi1_descriptor(T)
        got[str(theta)] = (L.basis, D.m, D.hull_text(), gamma_subgroup(L).invariant_factors)
        assert L.basis == ((q, 0), (0, q))
        assert D.m == 2 and D.hull_text() == "algebraic hull of Z²"
        assert gamma_subgroup(L).invariant_factors == (q, q)
    elapsed = time.perf_counter() - t0
    criterion(3, f"Lambda = qZ^2, m = 2, Gamma (q,q) for 1/2, 1/3, 2/5 in {elapsed:.3f}s (limit 1s)")
    assert elapsed < 1.0


def test_c04_irrational_and_mixed(criterion):
    D = pi1_descriptor(TorusPresentation.irrational_2d())
    z = (0, [])
    T = TorusPresentation.from_matrix([[z, (0, [1]), z], [(0, [-1]), z, z], [z, z, z]], 20, ("theta1",),
                                      (2 ** 0.5 - 1,))
    M = pi1_descriptor(T)
    brute = set(brute_force_lattice(T, 20))
    solved = {r for r in T.window(20) if M.lattice.contains(r)}
    criterion(4, f"irrational m={D.m} '{D.hull_text()}'; mixed m={M.m} '{M.hull_text()}', "
                 f"{len(brute)} lattice points in |r|<=20, mismatches {len(brute ^ solved)}")
    assert D.m == 0 and D.hull_text() == "algebraic hull of R²"
    assert M.m == 1 and M.hull_text() == "algebraic hull of Z¹ × R²"
    assert brute == solved


def test_c05_center_crosscheck(criterion):
    t0 = time.perf_counter()
    cases = [(TorusPresentation.rational_2d(F(1, 2)), 3), (TorusPresentation.rational_2d(F(1, 3)), 4),
             (TorusPresentation.irrational_2d(), 3)]
    results = [center_crosscheck(T, R, degrees=(0, 1)) for T, R in cases]
    elapsed = time.perf_counter() - t0
    dims = [(r.computed_dims[0], r.computed_dims[1]) for r in results]
    criterion(5, f"degree (0,1) dims {dims}, all equal to lattice prediction: "
                 f"{all(r.passed for r in results)} in {elapsed:.2f}s (limit 30s)")
    assert all(r.passed for r in results)
    assert elapsed < 30


def _suite(criterion, n, suite, trials, limit, extra=""):
    t0 = time.perf_counter()
    records, summary = run_suite(suite, SEED, trials)
    elapsed = time.perf_counter() - t0
    criterion(n, f"{suite}: {summary['passed']}/{trials} passed {extra}in {elapsed:.2f}s (limit {limit}s)")
    assert summary["pass"], summary["failed_trials"]
    assert elapsed < limit
    return records


def test_c06_curvature_laws(criterion):
    records = _suite(criterion, 6, "curvature-laws", 500, 60, "(tol 1e-10) ")
    worst = max(max(r["tensor_residual"], r["dual_residual"]) for r in records)
    assert worst <= 1e-10


def test_c07_pseudoinverse(criterion):
    records = _suite(criterion, 7, "pseudoinverse", 1000, 30)
    assert sum(r["params"]["kind"] == "rank_deficient" for r in records) > 100
    for r in records:
        phi, _ = random_matrix(trial_rng(SEED, r["trial"]))
        assert r["residual"] <= 1e-8 * max(1.0, float(np.linalg.norm(phi, 2)))
        assert r["ch_residual"] <= 1e-9


def test_c08_dm_inequality(criterion):
    records = _suite(criterion, 8, "dm-inequality", 1000, 60)
    assert {r["params"]["n"] for r in records} == {2, 3, 4, 5}


def _normalized_path(rng):
    k = int(rng.integers(2, 5))
    while True:
        A, B = [rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k)) for _ in range(2)]
        if np.linalg.norm(A @ B - B @ A) > 1e-3:
            break
    path = MatrixPath.polynomial([A, B])
    s = max(np.linalg.norm(X, 2) for X in path.sample(np.linspace(0, 1, 101)))
    return MatrixPath.polynomial([A / s, B / s])


def test_c09_transport(criterion):
    t0 = time.perf_counter()
    errs = []
    for c in (1.0, 0.7 - 0.4j, -1.5 + 2j):
        res = path_ordered_exp(MatrixPath.constant(c * np.eye(3)), "picard", steps=10_000)
        errs.append(float(np.abs(res.alpha_at_1 - np.exp(c) * np.eye(3)).max()))
    slack = res.bound_report["max_slack"]
    rng = np.random.default_rng(SEED)
    agree = [path_ordered_exp(_normalized_path(rng), "both", steps=5000).agreement for _ in range(100)]
    elapsed = time.perf_counter() - t0
    criterion(9, f"|alpha(1)-e^c| max {max(errs):.2e} (<=1e-8); bound slack {slack:.3f} (<=0.05); "
                 f"100 paths agreement max {max(agree):.2e} (<=1e-7) in {elapsed:.1f}s (limit 60s)")
    assert max(errs) <= 1e-8
    assert slack <= 0.05 and res.bound_report["discrete_ok"]
    assert max(agree) <= 1e-7
    assert elapsed < 60


def test_c10_representation_recovery(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    worst_rt, worst_half = 0.0, 0.0
    for _ in range(200):
        k = int(rng.integers(1, 5))
        a = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        a *= rng.uniform(0.01, 0.499) / np.linalg.norm(a, 2)
        t0_ = float(rng.uniform(0.2, 1.0))
        sample = expm(t0_ * a)
        worst_rt = max(worst_rt, float(np.abs(log_representation(sample, t0_) - a).max()))
        worst_half = max(worst_half, half_step_consistency(sample, expm(t0_ / 2 * a), t0_))
    elapsed = time.perf_counter() - t0
    criterion(10, f"round trip {worst_rt:.2e} (<=1e-10), half step {worst_half:.2e} (<=1e-9) "
                  f"in {elapsed:.2f}s (limit 10s)")
    assert worst_rt <= 1e-10 and worst_half <= 1e-9 and elapsed < 10


def test_c11_morphism_gate(criterion):
    # torus: a = u^{e1}, omega = eta1, d u = u eta1
    A = torus_forms(TorusPresentation.rational_2d(F(1, 3), radius=2), 2)
    a, w = weyl_form(A, (1, 0)), weyl_form(A, (0, 0), (1,))
    assert (a.d() - a * w).is_zero()
    one = lambda x: AlgMatrix.from_elements(A, [[x]])  # noqa: E731
    C_w = connection_from_kappa(FgpModule.free(A, 1), one(w))
    C_d = connection_from_kappa(FgpModule.free(A, 1), one(A.zero()))
    torus_ok = check_morphism(one(a), C_w, C_d)
    # jet: a = exp(2x), omega = 2 dx
    J = jet(6)
    b, v = truncated_exponential(J, 2), J("dx") * 2
    assert (b.d() - b * v).is_zero()
    jm = lambda x: AlgMatrix.from_elements(J, [[x]])  # noqa: E731
    jet_ok = check_morphism(jm(b), connection_from_kappa(FgpModule.free(J, 1), jm(v)),
                            connection_from_kappa(FgpModule.free(J, 1), jm(J.zero())))
    criterion(11, f"torus u^e1: {torus_ok.passed}, jet exp(2x): {jet_ok.passed} (exact)")
    assert torus_ok.passed and jet_ok.passed


def test_c12_fuzz_determinism(criterion):
    trials = {"axioms": 10, "curvature-laws": 30, "pseudoinverse": 100, "dm-inequality": 100, "torus-phases": 50}
    same = {}
    for suite in SUITES:
        args = ["fuzz", "--suite", suite, "--seed", str(SEED), "--trials", str(trials[suite])]
        first, second = _cli(*args), _cli(*args)
        pooled = _cli(*args, "--jobs", "2")
        same[suite] = first == second == pooled and first[0] == 0
    criterion(12, "byte-identical reruns (and 2-worker runs): " + ", ".join(f"{k}={v}" for k, v in same.items()))
    assert all(same.values())
