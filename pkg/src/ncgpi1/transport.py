"""Parallel transport over the interval [0, 1].

Solutions of ``alpha' = alpha omega`` with ``alpha(0) = I`` are computed either
by Picard iteration ``alpha_{n+1}(t) = int_0^t alpha_n omega`` (cumulative
trapezoid on a uniform grid, summed until the terms are negligible) or by
classical RK4.  Every result reports the residual of the differential
equation, the per-term factorial bound for Picard, and how invertible the
solution stays along the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import DivergenceDetected, OutsideConvergenceRadius

DEFAULT_STEPS = 1024


def _opnorm(X: np.ndarray) -> np.ndarray:
    """Spectral norm of a matrix or of each matrix in a stack."""
    G = np.conj(np.swapaxes(X, -1, -2)) @ X
    return np.sqrt(np.maximum(np.linalg.eigvalsh(G)[..., -1], 0.0))


def _rownorm(X: np.ndarray) -> np.ndarray:
    """Norm induced by the max norm on vectors (largest absolute row sum).

    Submultiplicative with ``|I| = 1``, so the factorial bound holds for it,
    and it is much cheaper than the spectral norm on long stacks.
    """
    return np.abs(X).sum(axis=-1).max(axis=-1)


@dataclass(frozen=True)
class MatrixPath:
    """A ``k x k`` matrix-valued function on [0, 1].

    ``kind`` is ``"constant"`` (data: matrix), ``"polynomial"`` (data: list of
    coefficient matrices, lowest degree first), ``"grid"`` (data: knots and
    values, interpolated linearly) or ``"function"`` (data: callable).
    """

    dimension: int
    kind: str
    data: object

    @classmethod
    def constant(cls, M) -> "MatrixPath":
        M = np.asarray(M, dtype=complex)
        return cls(M.shape[0], "constant", M)

    @classmethod
    def polynomial(cls, coeffs: Sequence) -> "MatrixPath":
        cs = np.asarray([np.asarray(c, dtype=complex) for c in coeffs])
        return cls(cs.shape[1], "polynomial", cs)

    @classmethod
    def grid(cls, knots, values) -> "MatrixPath":
        knots = np.asarray(knots, dtype=float)
        values = np.asarray(values, dtype=complex)
        if knots.ndim != 1 or len(knots) < 2 or np.any(np.diff(knots) <= 0):
            raise ValueError("grid knots must be strictly increasing")
        if knots[0] > 0 or knots[-1] < 1:
            raise ValueError("grid knots must cover [0, 1]")
        if values.shape[0] != len(knots):
            raise ValueError("one value per knot required")
        return cls(values.shape[1], "grid", (knots, values))

    @classmethod
    def from_function(cls, fn: Callable[[float], np.ndarray], dimension: int) -> "MatrixPath":
        return cls(dimension, "function", fn)

    def sample(self, ts) -> np.ndarray:
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        k = self.dimension
        if self.kind == "constant":
            return np.broadcast_to(self.data, (len(ts), k, k)).copy()
        if self.kind == "polynomial":
            out = np.zeros((len(ts), k, k), dtype=complex)
            for c in self.data[::-1]:
                out = out * ts[:, None, None] + c
            return out
        if self.kind == "grid":
            knots, values = self.data
            j = np.clip(np.searchsorted(knots, ts, side="right") - 1, 0, len(knots) - 2)
            w = ((ts - knots[j]) / (knots[j + 1] - knots[j]))[:, None, None]
            return (1 - w) * values[j] + w * values[j + 1]
        return np.array([np.asarray(self.data(float(t)), dtype=complex) for t in ts])

    def __call__(self, t: float) -> np.ndarray:
        return self.sample([t])[0]


@dataclass
class TransportResult:
    times: np.ndarray
    values: np.ndarray
    method: str
    residual: float
    bound_report: dict | None
    condition_numbers: np.ndarray
    invertibility_margin: float
    det_continuous: bool
    terms_used: int | None = None
    agreement: float | None = None
    extra: dict = field(default_factory=dict)

    @property
    def alpha_at_1(self) -> np.ndarray:
        return self.values[-1]

    def as_path(self) -> MatrixPath:
        return MatrixPath.grid(self.times, self.values)


def _picard(W: np.ndarray, ts: np.ndarray, left: bool, sign: float, terms: int):
    """Sum of Picard terms; returns (solution, term stack norms, terms used)."""
    N1, k, _ = W.shape
    term = np.broadcast_to(np.eye(k, dtype=complex), (N1, k, k)).copy()
    total = term.copy()
    norms = [np.ones(N1)]
    for n in range(1, terms + 1):
        integrand = (W @ term) if left else (term @ W)
        term = sign * cumulative_trapezoid(integrand, ts, axis=0, initial=0)
        total += term
        tn = _rownorm(term)
        norms.append(tn)
        if tn.max() < 1e-16 * _rownorm(total).max():
            return total, norms, n
    raise DivergenceDetected(f"Picard series not converged after {terms} terms")


def _rk4(path: MatrixPath, ts: np.ndarray, left: bool, sign: float):
    h = ts[1] - ts[0]
    W0 = sign * path.sample(ts)
    Wm = sign * path.sample(ts[:-1] + h / 2)
    k = path.dimension
    out = np.empty((len(ts), k, k), dtype=complex)
    a = np.eye(k, dtype=complex)
    out[0] = a
    if left:
        f = lambda w, x: w @ x  # noqa: E731
    else:
        f = lambda w, x: x @ w  # noqa: E731
    for j in range(len(ts) - 1):
        k1 = f(W0[j], a)
        k2 = f(Wm[j], a + (h / 2) * k1)
        k3 = f(Wm[j], a + (h / 2) * k2)
        k4 = f(W0[j + 1], a + h * k3)
        a = a + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        out[j + 1] = a
    return out


def _bound_report(norms: list, ts: np.ndarray, sup: float) -> dict:
    """Observed Picard term norms against ``t^n sup^n / n!`` (row-sum norm throughout).

    ``discrete_ok`` checks every grid point against the trapezoid image of the
    scalar majorant (a rigorous bound for the computed terms); ``slack`` is
    ``max_t |alpha_n(t)| / (sup^n / n!) - 1`` per term, the quadrature slack
    relative to the continuous factorial bound.
    """
    per_term = []
    beta = np.ones_like(ts)
    discrete_ok = True
    worst = -1.0
    for n in range(1, len(norms)):
        beta = cumulative_trapezoid(sup * beta, ts, initial=0)
        bound = sup ** n / math.factorial(n)
        observed = float(norms[n].max())
        slack = observed / bound - 1 if bound > 0 else (0.0 if observed == 0 else math.inf)
        ok_n = bool(np.all(norms[n] <= beta * (1 + 1e-9) + 1e-300))
        discrete_ok &= ok_n
        worst = max(worst, slack)
        per_term.append({"n": n, "observed": observed, "bound": bound, "slack": slack, "discrete_ok": ok_n})
    return {"sup_norm": sup, "terms": per_term, "max_slack": worst, "discrete_ok": discrete_ok}


def _diagnostics(values: np.ndarray):
    sv = np.linalg.svd(values, compute_uv=False)
    cond = sv[:, 0] / np.maximum(sv[:, -1], np.finfo(float).tiny)
    margin = float(sv[:, -1].min())
    dets = np.linalg.det(values)
    steps = np.angle(dets[1:] / dets[:-1]) if np.all(dets != 0) else np.array([np.pi])
    continuous = bool(np.all(np.abs(dets) > 0) and np.all(np.abs(steps) < np.pi / 2))
    return cond, margin, continuous


def _derivative4(F: np.ndarray, ts: np.ndarray) -> np.ndarray:
    """Fourth-order finite differences along axis 0 on a uniform grid."""
    if len(ts) < 5:
        return np.gradient(F, ts, axis=0, edge_order=2)
    h = ts[1] - ts[0]
    D = np.empty_like(F)
    D[2:-2] = (F[:-4] - 8 * F[1:-3] + 8 * F[3:-1] - F[4:]) / (12 * h)
    D[0] = (-25 * F[0] + 48 * F[1] - 36 * F[2] + 16 * F[3] - 3 * F[4]) / (12 * h)
    D[1] = (-3 * F[0] - 10 * F[1] + 18 * F[2] - 6 * F[3] + F[4]) / (12 * h)
    D[-1] = (25 * F[-1] - 48 * F[-2] + 36 * F[-3] - 16 * F[-4] + 3 * F[-5]) / (12 * h)
    D[-2] = (3 * F[-1] + 10 * F[-2] - 18 * F[-3] + 6 * F[-4] - F[-5]) / (12 * h)
    return D


def _residual(values: np.ndarray, W: np.ndarray, ts: np.ndarray, left: bool, sign: float) -> float:
    deriv = np.gradient(values, ts, axis=0, edge_order=2)
    rhs = sign * ((W @ values) if left else (values @ W))
    return float(_opnorm(deriv - rhs).max())


def _solve(path: MatrixPath, method: str, steps: int, terms: int, left: bool, sign: float,
           residual_tol: float | None) -> TransportResult:
    if steps < 2:
        raise ValueError("steps must be at least 2")
    if method not in ("picard", "rk4", "both"):
        raise ValueError(f"unknown method {method!r}")
    ts = np.linspace(0.0, 1.0, steps + 1)
    W = path.sample(ts)
    sup = float(_rownorm(W).max())
    results = {}
    if method in ("picard", "both"):
        if terms < 1:
            raise ValueError("terms must be at least 1")
        vals, norms, used = _picard(W, ts, left, sign, terms)
        results["picard"] = (vals, _bound_report(norms, ts, sup), used)
    if method in ("rk4", "both"):
        results["rk4"] = (_rk4(path, ts, left, sign), None, None)
    main = "picard" if "picard" in results else "rk4"
    vals, report, used = results[main]
    if not np.all(np.isfinite(vals)):
        raise DivergenceDetected("non-finite values in transport")
    res = _residual(vals, W, ts, left, sign)
    # finite-difference truncation scales like h^2 |omega|^3 |alpha|
    scale = max(1.0, float(_opnorm(vals).max())) * (1 + float(_opnorm(W).max())) ** 3
    tol = 1e-2 * scale / steps if residual_tol is None else residual_tol
    if res > tol:
        raise DivergenceDetected(f"residual {res:.3e} above threshold {tol:.3e}")
    cond, margin, cont = _diagnostics(vals)
    agreement = None
    if method == "both":
        agreement = float(_opnorm(results["picard"][0] - results["rk4"][0]).max())
    return TransportResult(ts, vals, method, res, report, cond, margin, cont, used, agreement)


def path_ordered_exp(omega: MatrixPath, method: str = "picard", steps: int = DEFAULT_STEPS,
                     terms: int = 200, residual_tol: float | None = None) -> TransportResult:
    """Solve ``alpha' = alpha omega``, ``alpha(0) = I`` on a uniform grid of ``steps`` intervals."""
    return _solve(omega, method, steps, terms, left=False, sign=1.0, residual_tol=residual_tol)


def inverse_transport(omega: MatrixPath, method: str = "picard", steps: int = DEFAULT_STEPS,
                      terms: int = 200, residual_tol: float | None = None, check_product: bool = True,
                      product_tol: float = 1e-7) -> TransportResult:
    """Solve ``alpha' = -omega alpha``, ``alpha(0) = I``: the pointwise inverse of the forward transport.

    With ``check_product`` the forward solution is computed by the same method
    and ``max_t |alpha(t) alpha'(t) - I|`` is stored in ``extra["product_error"]``.
    """
    inv = _solve(omega, method, steps, terms, left=True, sign=-1.0, residual_tol=residual_tol)
    if check_product:
        fwd = _solve(omega, "rk4" if method == "rk4" else "picard", steps, terms, left=False, sign=1.0,
                     residual_tol=residual_tol)
        err = float(_opnorm(fwd.values @ inv.values - np.eye(omega.dimension)).max())
        inv.extra["product_error"] = err
        if err > product_tol * max(1.0, float(_opnorm(fwd.values).max()) * float(_opnorm(inv.values).max())):
            raise DivergenceDetected(f"alpha * alpha' deviates from I by {err:.3e}")
    return inv


def _test_sections(k: int, ts: np.ndarray, degree: int = 2):
    """Polynomial sections ``t^p e_i`` and their derivatives, stacked as columns."""
    cols, dcols = [], []
    for p in range(degree + 1):
        s = ts ** p
        ds = p * ts ** (p - 1) if p else np.zeros_like(ts)
        for i in range(k):
            v = np.zeros((len(ts), k), dtype=complex)
            dv = np.zeros((len(ts), k), dtype=complex)
            v[:, i] = s
            dv[:, i] = ds
            cols.append(v)
            dcols.append(dv)
    return np.stack(cols, axis=2), np.stack(dcols, axis=2)


def trivialize_flat(kappa: MatrixPath, method: str = "rk4", steps: int = DEFAULT_STEPS,
                    terms: int = 200, residual_tol: float | None = None) -> TransportResult:
    """``alpha`` with ``d alpha = alpha kappa``, so that ``alpha (d + kappa) = d alpha``.

    The certificate ``extra["conjugation_residual"]`` is the largest value of
    ``|alpha (s' + kappa s) - (alpha s)'|`` over polynomial test sections, the
    derivative of ``alpha s`` taken by fourth-order finite differences.
    """
    res = path_ordered_exp(kappa, method, steps, terms, residual_tol)
    ts = res.times
    S, dS = _test_sections(kappa.dimension, ts)
    K = kappa.sample(ts)
    left = res.values @ (dS + K @ S)
    right = _derivative4(res.values @ S, ts)
    res.extra["conjugation_residual"] = float(np.abs(left - right).max())
    return res


@dataclass
class HorizontalFrame:
    times: np.ndarray
    frame: np.ndarray            # columns of alpha^{-1}(t)
    at_zero: np.ndarray
    min_abs_det: float
    horizontality_residual: float
    transport: TransportResult


def kernel_of_interval_part(kappa: MatrixPath, method: str = "rk4", steps: int = DEFAULT_STEPS,
                            terms: int = 200) -> HorizontalFrame:
    """Horizontal sections of ``d + kappa``: ``s' = -kappa s``, frame given by ``alpha^{-1}``."""
    inv = inverse_transport(kappa, method, steps, terms)
    ts, F = inv.times, inv.values
    K = kappa.sample(ts)
    resid = _derivative4(F, ts) + K @ F
    dets = np.abs(np.linalg.det(F))
    return HorizontalFrame(ts, F, F[0].copy(), float(dets.min()), float(_opnorm(resid).max()), inv)


def log_series(X: np.ndarray, max_terms: int = 1_000_000) -> np.ndarray:
    """``log(I + X) = sum_{k>=1} (-1)^(k+1) X^k / k`` for ``|X| < 1``."""
    X = np.asarray(X, dtype=complex)
    r = float(_opnorm(X)) if X.size else 0.0
    if r >= 1:
        raise OutsideConvergenceRadius(f"|sample - I| = {r:.6g} is not below 1")
    total = np.zeros_like(X)
    power = np.eye(X.shape[0], dtype=complex)
    for k in range(1, max_terms + 1):
        power = power @ X
        term = power / k
        total = total + term if k % 2 else total - term
        tn = float(np.abs(term).max())
        if tn == 0.0 or tn <= 1e-18 * max(1.0, float(np.abs(total).max())):
            return total
    raise DivergenceDetected("log series did not converge")


def log_representation(sample, t0: float) -> np.ndarray:
    """Generator ``alpha`` of a one-parameter group from one sample ``exp(t0 alpha)``."""
    if t0 <= 0:
        raise ValueError("t0 must be positive")
    sample = np.asarray(sample, dtype=complex)
    return log_series(sample - np.eye(sample.shape[0])) / t0


def half_step_consistency(sample, half_sample, t0: float) -> float:
    """Distance between generators recovered from ``exp(t0 a)`` and ``exp(t0 a / 2)``."""
    return float(np.abs(log_representation(sample, t0) - log_representation(half_sample, t0 / 2)).max())
