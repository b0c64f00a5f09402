"""Independent numerical verification of the closed-form optima.

Each ``verify_*`` routine re-derives a closed-form value by derivative-free
optimization over an explicitly feasible parameter space (positivity is
built into the parametrization, never penalized), then compares against the
closed form.  Results are one-sided by construction: a minimizer may fail to
reach a proven minimum, but beating it beyond round-off means a bug.

The optimizers are deliberately unsophisticated: Nelder-Mead with seeded
random restarts as the workhorse, plus a deterministic coordinate search
used to cross-check optimizer independence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import optimize as sp_optimize

from . import linalg, mur
from .entropy import Units, convert, mc_rel_entropy, rel_entropy
from .errors import DomainError, GmurError, InputError
from .mur import (REGIME_ABOVE, Thresholds, c_inc_scalar, c_inc_vector,
                  error_function_scalar, error_function_vector,
                  state_dependent_bound_scalar, _divergence_scalar_nats,
                  _divergence_vector_nats, _scalar_error_nats)
from .observables import ScalarCovariantObservable, from_generating_state
from .sampling import random_gaussian_dist, random_state_in_band
from .states import (GaussianState, PhysContext, make_state_from_blocks,
                     make_state_with_scalar_variances, scalar_moments, _check_unit)

ONE_SIDED_TOL = 1e-9
VALUE_TOL = 1e-4
DIVERGENCE_TOL = 1e-6
ARGMIN_REL_TOL = 1e-3

_NM_XATOL = 1e-8
_NM_FATOL = 1e-13


@dataclass(frozen=True)
class OptProblem:
    """A bounded-budget minimization over an always-feasible parametrization."""

    objective: Callable[[np.ndarray], float]
    dim: int
    parametrization: str
    budget: int
    seed: int


@dataclass(frozen=True)
class VerifyResult:
    """Outcome of one closed-form-versus-numerics comparison (values in bits)."""

    name: str
    analytic: float
    numeric: float
    gap: float
    argmin_params: tuple[float, ...]
    evaluations: int
    ok: bool
    detail: str = ""

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "analytic": float(self.analytic),
            "numeric": float(self.numeric),
            "gap": float(self.gap),
            "argmin_params": [float(x) for x in self.argmin_params],
            "evaluations": int(self.evaluations),
            "ok": bool(self.ok),
            "detail": self.detail,
        }


def nelder_mead_restarts(problem: OptProblem, restarts: int = 10,
                         init_scale: float = 1.5) -> tuple[np.ndarray, float, int]:
    """Minimize with seeded random restarts; returns (argmin, value, evaluations)."""
    rng = np.random.default_rng(problem.seed)
    evals = 0
    best_x: Optional[np.ndarray] = None
    best_f = math.inf

    def counted(x):
        nonlocal evals
        evals += 1
        return problem.objective(x)

    for run in range(restarts):
        if evals >= problem.budget:
            break
        x_init = rng.normal(scale=init_scale, size=problem.dim)
        maxfev = max(1, (problem.budget - evals) // (restarts - run))
        res = sp_optimize.minimize(
            counted, x_init, method="Nelder-Mead",
            options={"maxfev": maxfev, "xatol": _NM_XATOL, "fatol": _NM_FATOL,
                     "adaptive": problem.dim >= 6})
        if res.fun < best_f:
            best_f = float(res.fun)
            best_x = np.asarray(res.x, dtype=float)
    if best_x is None:
        raise GmurError("optimizer budget too small for a single evaluation")
    return best_x, best_f, evals


def coordinate_search(objective: Callable[[np.ndarray], float], x0, budget: int,
                      step: float = 0.5, shrink: float = 0.5,
                      min_step: float = 1e-9) -> tuple[np.ndarray, float, int]:
    """Deterministic compass/pattern search; cross-check for Nelder-Mead."""
    x = np.array(x0, dtype=float)
    f = objective(x)
    evals = 1
    while step > min_step and evals < budget:
        improved = False
        for i in range(x.size):
            for sign in (+1.0, -1.0):
                if evals >= budget:
                    break
                trial = x.copy()
                trial[i] += sign * step
                f_trial = objective(trial)
                evals += 1
                if f_trial < f:
                    x, f = trial, f_trial
                    improved = True
        if not improved:
            step *= shrink
    return x, f, evals


def finite_diff_stationarity(objective: Callable[[np.ndarray], float], point,
                             h: float = 1e-5) -> float:
    """Largest central-difference directional derivative over coordinate axes.

    The step is relative: h * max(1, |x_i|) per coordinate.  Vanishes (up to
    discretization error) exactly at interior stationary points.
    """
    x = np.asarray(point, dtype=float)
    worst = 0.0
    for i in range(x.size):
        hi = h * max(1.0, abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += hi
        xm[i] -= hi
        try:
            deriv = (objective(xp) - objective(xm)) / (2.0 * hi)
        except Exception as exc:
            raise GmurError(f"stencil evaluation failed along coordinate {i}: {exc}") from exc
        if not np.isfinite(deriv):
            raise GmurError(f"non-finite derivative along coordinate {i}")
        worst = max(worst, abs(deriv))
    return worst


def _scalar_measurement_map(params: np.ndarray, var_q: float, var_p: float,
                            floor: float) -> tuple[float, float, float, float, float]:
    """Map R^5 onto valid scalar-measurement parameters.

    (w1, w2, t, ra, rb) -> V11 = var_q * e^w1, V22 projected onto the
    positivity region V11*V22 >= floor, V12 a tanh-bounded fraction of the
    remaining room, and bias in natural units.  Every image is feasible.
    """
    w1, w2, t_raw, ra, rb = params
    v11 = var_q * math.exp(min(max(w1, -60.0), 60.0))
    v22 = max(var_p * math.exp(min(max(w2, -60.0), 60.0)), floor / v11)
    room = max(0.0, v11 * v22 - floor)
    v12 = math.tanh(t_raw) * math.sqrt(room)
    a_m = ra * math.sqrt(var_q)
    b_m = rb * math.sqrt(var_p)
    return v11, v22, v12, a_m, b_m


def verify_scalar_state_bound(rho: GaussianState, u, v, budget: int = 20000,
                              seed: int = 0, restarts: int = 10) -> VerifyResult:
    """Reproduce the state-dependent scalar bound by direct minimization.

    Minimizes the error function over all valid scalar measurements along
    (u, v) and compares with the closed-form bound and its unique optimizer.
    """
    u = _check_unit(u, rho.n, "u")
    v = _check_unit(v, rho.n, "v")
    mom = scalar_moments(rho, u, v)
    hbar = rho.ctx.hbar
    floor = (hbar * mom.cos_alpha / 2.0) ** 2
    analytic_bits, _, m_star = state_dependent_bound_scalar(rho, u, v, Units.BITS)

    def objective(params):
        v11, v22, _, a_m, b_m = _scalar_measurement_map(params, mom.var_q, mom.var_p, floor)
        return _scalar_error_nats(mom.var_q, mom.var_p, v11, v22, a_m, b_m)

    problem = OptProblem(objective=objective, dim=5,
                         parametrization="log-variances + projected floor + bias",
                         budget=budget, seed=seed)
    x_best, f_best, evals = nelder_mead_restarts(problem, restarts=restarts)
    numeric_bits = convert(f_best, Units.BITS)
    gap = numeric_bits - analytic_bits

    v11, v22, v12, a_m, b_m = _scalar_measurement_map(x_best, mom.var_q, mom.var_p, floor)
    found = ScalarCovariantObservable(ctx=rho.ctx, u=u, v=v, a_M=a_m, b_M=b_m,
                                      V11=v11, V22=v22, V12=v12)
    check = error_function_scalar(rho, found, Units.BITS)
    if abs(check - numeric_bits) > 1e-10 * max(1.0, abs(check)):
        raise GmurError("objective disagrees with error_function_scalar at the argmin")

    ok = (gap >= -ONE_SIDED_TOL) and (gap <= VALUE_TOL)
    detail = ""
    if abs(mom.cos_alpha) > mur.COS_SHORTCIRCUIT_TOL:
        scale = math.sqrt(m_star.V11 * m_star.V22)
        argmin_err = max(abs(v11 - m_star.V11) / m_star.V11,
                         abs(v22 - m_star.V22) / m_star.V22,
                         abs(v12) / scale,
                         abs(a_m) / math.sqrt(mom.var_q),
                         abs(b_m) / math.sqrt(mom.var_p))
        ok = ok and argmin_err <= ARGMIN_REL_TOL
        detail = f"argmin_rel_err={argmin_err:.3e}"
    return VerifyResult(name="scalar_state_bound", analytic=analytic_bits,
                        numeric=numeric_bits, gap=gap,
                        argmin_params=(v11, v22, v12, a_m, b_m),
                        evaluations=evals, ok=bool(ok), detail=detail)


def verify_scalar_divergence(M: ScalarCovariantObservable, eps: Thresholds,
                             budget: int = 20000, seed: int = 0,
                             restarts: int = 10) -> VerifyResult:
    """Maximize the error function over the threshold class of states.

    Only meaningful above the quantum threshold, where the closed form is an
    attained supremum; states are parametrized by their projected variances
    offset from the thresholds, with the boundary itself evaluated directly.
    """
    hbar = M.ctx.hbar
    floor = (hbar * M.cos_alpha / 2.0) ** 2
    if eps.product() < floor * (1.0 - mur.REGIME_REL_TOL):
        raise DomainError("verify_scalar_divergence requires the above-threshold regime")
    report = mur.divergence_scalar(M, eps, Units.BITS)
    analytic_bits = report.value

    def error_at(var_q, var_p):
        state = make_state_with_scalar_variances(var_q, var_p, M.u, M.v, M.ctx)
        return error_function_scalar(state, M, Units.NATS)

    def objective(params):
        t1, t2 = params
        var_q = eps.eps1 * (1.0 + math.exp(min(t1, 60.0)))
        var_p = eps.eps2 * (1.0 + math.exp(min(t2, 60.0)))
        return -error_at(var_q, var_p)

    problem = OptProblem(objective=objective, dim=2,
                         parametrization="log-offsets from variance thresholds",
                         budget=budget, seed=seed)
    x_best, f_best, evals = nelder_mead_restarts(problem, restarts=restarts)
    interior_best = convert(-f_best, Units.BITS)
    boundary = convert(error_at(eps.eps1, eps.eps2), Units.BITS)
    evals += 1
    numeric_bits = max(interior_best, boundary)
    gap = numeric_bits - analytic_bits

    ok = (gap <= ONE_SIDED_TOL) and (abs(gap) <= DIVERGENCE_TOL) \
        and boundary >= interior_best - ONE_SIDED_TOL
    return VerifyResult(name="scalar_divergence", analytic=analytic_bits,
                        numeric=numeric_bits, gap=gap,
                        argmin_params=(eps.eps1, eps.eps2),
                        evaluations=evals, ok=bool(ok),
                        detail=f"interior_best={interior_best:.12f}")


def verify_scalar_minimax(u, v, eps: Thresholds, ctx: Optional[PhysContext] = None,
                          budget: int = 20000, seed: int = 0,
                          restarts: int = 10) -> VerifyResult:
    """Nested minimax check for the scalar incompatibility degree.

    The inner supremum over states is the exact divergence formula; the outer
    minimization runs over the same feasible measurement parametrization as
    :func:`verify_scalar_state_bound`.
    """
    u = np.asarray(u, dtype=float)
    if ctx is None:
        ctx = PhysContext(hbar=1.0, n=u.size)
    u = _check_unit(u, ctx.n, "u")
    v = _check_unit(v, ctx.n, "v")
    cos_alpha = float(u @ v)
    hbar = ctx.hbar
    floor = (hbar * cos_alpha / 2.0) ** 2
    if eps.product() < floor * (1.0 - mur.REGIME_REL_TOL):
        raise DomainError("verify_scalar_minimax requires the above-threshold regime")
    report = c_inc_scalar(u, v, eps, ctx, Units.BITS)
    analytic_bits = report.value

    def objective(params):
        v11, v22, _, a_m, b_m = _scalar_measurement_map(params, eps.eps1, eps.eps2, floor)
        nats, regime, _ = _divergence_scalar_nats(v11, v22, a_m, b_m, cos_alpha, hbar, eps)
        assert regime == REGIME_ABOVE
        return nats

    problem = OptProblem(objective=objective, dim=5,
                         parametrization="log-variances + projected floor + bias",
                         budget=budget, seed=seed)
    x_best, f_best, evals = nelder_mead_restarts(problem, restarts=restarts)
    numeric_bits = convert(f_best, Units.BITS)
    gap = numeric_bits - analytic_bits

    v11, v22, v12, a_m, b_m = _scalar_measurement_map(x_best, eps.eps1, eps.eps2, floor)
    ok = (gap >= -ONE_SIDED_TOL) and (gap <= VALUE_TOL)
    detail = ""
    opt = report.optimizer
    if abs(cos_alpha) > mur.COS_SHORTCIRCUIT_TOL:
        scale = math.sqrt(opt.V11 * opt.V22)
        argmin_err = max(abs(v11 - opt.V11) / opt.V11,
                         abs(v22 - opt.V22) / opt.V22,
                         abs(v12) / scale,
                         abs(a_m) / math.sqrt(eps.eps1),
                         abs(b_m) / math.sqrt(eps.eps2))
        ok = ok and argmin_err <= ARGMIN_REL_TOL
        detail = f"argmin_rel_err={argmin_err:.3e}"
    return VerifyResult(name="scalar_minimax", analytic=analytic_bits,
                        numeric=numeric_bits, gap=gap,
                        argmin_params=(v11, v22, v12, a_m, b_m),
                        evaluations=evals, ok=bool(ok), detail=detail)


def rotation_from_angles(n: int, angles: np.ndarray) -> np.ndarray:
    """Orthogonal matrix from n(n-1)/2 Givens angles (identity for n = 1)."""
    R = np.eye(n)
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            c, s = math.cos(angles[k]), math.sin(angles[k])
            g = np.eye(n)
            g[i, i] = c
            g[j, j] = c
            g[i, j] = -s
            g[j, i] = s
            R = R @ g
            k += 1
    return R


def _vector_generator_map(params: np.ndarray, n: int, eps: Thresholds, hbar: float
                          ) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Map parameters onto a valid generating-state quadruple (A, B, a, b).

    A is rotation + log-eigenvalues (scaled by eps1); B is the minimum
    uncertainty partner hbar^2/4 A^{-1} plus a PSD slack diagonal in the
    eigenbasis of A, so B >= hbar^2/4 A^{-1} holds for every parameter vector.
    """
    n_ang = n * (n - 1) // 2
    t = params[:n]
    angles = params[n:n + n_ang]
    r = params[n + n_ang:2 * n + n_ang]
    bias_a = params[2 * n + n_ang:3 * n + n_ang] * math.sqrt(eps.eps1)
    bias_b = params[3 * n + n_ang:4 * n + n_ang] * math.sqrt(eps.eps2)
    R = rotation_from_angles(n, angles)
    a_eigs = eps.eps1 * np.exp(np.clip(t, -60.0, 60.0))
    slack = eps.eps2 * np.exp(np.clip(r, -60.0, 60.0))
    A = linalg.symmetrize((R * a_eigs) @ R.T)
    B = linalg.symmetrize((R * (hbar ** 2 / (4.0 * a_eigs) + slack)) @ R.T)
    return A, B, bias_a, bias_b


def verify_vector_minimax(n: int, eps: Thresholds, ctx: Optional[PhysContext] = None,
                          budget: int = 40000, seed: int = 0, restarts: int = 10,
                          audit: bool = False, audit_samples: int = 100
                          ) -> VerifyResult:
    """Nested minimax check for the vector incompatibility degree.

    The inner supremum over the threshold class is taken from the exact
    divergence formula (proven, and spot-checked against random states from
    the class when ``audit`` is on); the outer minimization searches
    generating states through a rotation + log-eigenvalue parametrization.
    Practical for n <= 4.
    """
    if ctx is None:
        ctx = PhysContext(hbar=1.0, n=int(n))
    hbar = ctx.hbar
    if eps.product() < hbar ** 2 / 4.0 * (1.0 - mur.REGIME_REL_TOL):
        raise DomainError("verify_vector_minimax requires the above-threshold regime")
    report = c_inc_vector(n, eps, ctx, Units.BITS)
    analytic_bits = report.value
    target_ctx = PhysContext(hbar=hbar, n=int(n))
    audit_rng = np.random.default_rng(np.random.SeedSequence([seed, 0xA0D17]))

    def objective(params):
        A, B, bias_a, bias_b = _vector_generator_map(params, n, eps, hbar)
        nats, regime, _ = _divergence_vector_nats(A, B, bias_a, bias_b, hbar, eps)
        assert regime == REGIME_ABOVE
        if audit:
            sigma = make_state_from_blocks(A, B, target_ctx)
            if np.any(bias_a) or np.any(bias_b):
                sigma = GaussianState(ctx=target_ctx, a=bias_a, b=bias_b,
                                      A=sigma.A, B=sigma.B, C=sigma.C)
            m_sigma = from_generating_state(sigma)
            for _ in range(audit_samples):
                rho = random_state_in_band(audit_rng, target_ctx, eps)
                sampled = error_function_vector(rho, m_sigma, Units.NATS)
                if sampled > nats + ONE_SIDED_TOL:
                    raise GmurError(
                        f"audit failure: sampled state beats the proven divergence "
                        f"({sampled} > {nats})")
        return nats

    dim = n * (n - 1) // 2 + 4 * n
    problem = OptProblem(objective=objective, dim=dim,
                         parametrization="rotation + log-eigenvalues + slack + bias",
                         budget=budget, seed=seed)
    x_best, f_best, evals = nelder_mead_restarts(problem, restarts=restarts)
    numeric_bits = convert(f_best, Units.BITS)
    gap = numeric_bits - analytic_bits

    A, B, bias_a, bias_b = _vector_generator_map(x_best, n, eps, hbar)
    a_target = report.optimizer.sigma.A
    a_err = float(np.max(np.abs(A - a_target))) / float(np.max(np.abs(a_target)))
    slack_err = float(np.max(np.abs(B - linalg.symmetrize(
        hbar ** 2 / 4.0 * linalg.inv_pd(A))))) / float(np.max(np.abs(B)))
    bias_err = float(max(np.max(np.abs(bias_a)) / math.sqrt(eps.eps1),
                         np.max(np.abs(bias_b)) / math.sqrt(eps.eps2)))
    ok = (gap >= -ONE_SIDED_TOL) and (gap <= VALUE_TOL * n) and a_err <= ARGMIN_REL_TOL
    return VerifyResult(
        name=f"vector_minimax_n{n}", analytic=analytic_bits, numeric=numeric_bits,
        gap=gap, argmin_params=tuple(float(x) for x in np.diag(A)),
        evaluations=evals, ok=bool(ok),
        detail=f"A_rel_err={a_err:.3e} slack_rel_err={slack_err:.3e} bias_err={bias_err:.3e}")


@dataclass(frozen=True)
class McSummary:
    """Aggregate outcome of the Monte-Carlo relative-entropy check."""

    trials: int
    n_samples: int
    passes: int
    pass_rate: float
    max_abs_z: float
    seed: int
    ok: bool

    def to_json(self) -> dict:
        return {
            "name": "entropy_mc",
            "trials": self.trials,
            "n_samples": self.n_samples,
            "passes": self.passes,
            "pass_rate": self.pass_rate,
            "max_abs_z": self.max_abs_z,
            "seed": self.seed,
            "ok": self.ok,
        }


def verify_entropy_mc(trials: int = 100, n_samples: int = 100000,
                      seed: int = 0) -> McSummary:
    """Monte-Carlo oracle versus the closed-form Gaussian relative entropy.

    Each trial draws a random pair of Gaussians (dim <= 4, condition number
    <= 1e3) and requires |MC - closed form| <= 5 standard errors; the summary
    passes when at least 99% of trials do.
    """
    if trials < 1:
        raise InputError(f"trials must be positive, got {trials}")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x3C]))
    passes = 0
    max_abs_z = 0.0
    for trial in range(trials):
        dim = int(rng.integers(1, 5))
        p = random_gaussian_dist(rng, dim)
        q = random_gaussian_dist(rng, dim)
        closed = rel_entropy(p, q, Units.BITS)
        estimate, std_error = mc_rel_entropy(p, q, n_samples,
                                             seed=int(rng.integers(2 ** 63)),
                                             units=Units.BITS)
        z = abs(estimate - closed) / std_error
        max_abs_z = max(max_abs_z, z)
        if z <= 5.0:
            passes += 1
    rate = passes / trials
    return McSummary(trials=trials, n_samples=n_samples, passes=passes,
                     pass_rate=rate, max_abs_z=max_abs_z, seed=seed,
                     ok=rate >= 0.99)
