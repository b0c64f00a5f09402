"""Closed-form entropic error functions, divergences and incompatibility degrees.

Every bound here is expressed through the scalar kernel
``s(x) = ln(1+x) - x/(1+x)``.  The error function of a state/measurement pair
is the summed relative entropy of the sharp position and momentum
distributions versus the measurement marginals; maximizing it over states
with variance thresholds gives the divergence, and minimizing that over
covariant measurements gives the incompatibility degree.  All internal math
is in nats; units are converted once at each public boundary.

Two regimes appear throughout: when the threshold product clears the quantum
bound the optima are exact and attained; below it only certified lower
bounds are available, which reports flag via ``is_exact = False``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import linalg
from .entropy import Units, convert
from .errors import DomainError, GmurError, InputError
from .observables import (Observable, ScalarCovariantObservable,
                          VectorCovariantObservable, from_generating_state,
                          observable_to_json)
from .states import (GaussianState, PhysContext, make_state_from_blocks,
                     make_state_with_scalar_variances, rescale, scalar_moments,
                     state_to_json, _check_unit)

REGIME_ABOVE = "above_quantum_threshold"
REGIME_BELOW = "below_quantum_threshold"

REGIME_REL_TOL = 1e-12
COS_SHORTCIRCUIT_TOL = 1e-12

DUAL_PATH_REL_TOL = 1e-9


@dataclass(frozen=True)
class Thresholds:
    """Variance floors (length^2, momentum^2) defining the admissible state class."""

    eps1: float
    eps2: float

    def __post_init__(self):
        if not (self.eps1 > 0 and self.eps2 > 0):
            raise InputError(f"thresholds must be positive, got ({self.eps1}, {self.eps2})")

    def product(self) -> float:
        return self.eps1 * self.eps2


@dataclass(frozen=True)
class MurReport:
    """Result of a bound computation.

    ``is_exact`` distinguishes attained optima (above the quantum threshold)
    from certified lower bounds (below it); ``optimizer`` and ``worst_state``
    carry the closed-form extremizers when they exist.
    """

    value: float
    units: str
    regime: str
    is_exact: bool
    optimizer: Optional[Observable] = None
    worst_state: Optional[GaussianState] = None

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "units": self.units,
            "regime": self.regime,
            "is_exact": self.is_exact,
            "optimizer": None if self.optimizer is None else observable_to_json(self.optimizer),
            "worst_state": None if self.worst_state is None else state_to_json(self.worst_state),
        }


def s_kernel(x):
    """The scalar kernel s(x) = ln(1+x) - x/(1+x), in nats.

    Strictly increasing on [0, inf) with s(0) = 0 and s(x) ~ x^2/2 near zero;
    accepts scalars or arrays of nonnegative values.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise DomainError(f"s_kernel requires nonnegative finite input, got {x!r}")
    out = np.log1p(arr) - arr / (1.0 + arr)
    return out if out.ndim else float(out)


def _s_trace(m: np.ndarray) -> float:
    """Trace of the spectral function s applied to a symmetric PSD matrix."""
    w = linalg.sym_eigen(m)[0]
    return float(np.sum(s_kernel(np.clip(w, 0.0, None))))


def _require_same_context(rho: GaussianState, M: Observable) -> None:
    if M.ctx.hbar != rho.ctx.hbar or M.ctx.n != rho.ctx.n:
        raise InputError(
            f"state and measurement contexts differ: "
            f"(hbar={rho.ctx.hbar}, n={rho.ctx.n}) vs (hbar={M.ctx.hbar}, n={M.ctx.n})")


def _scalar_error_nats(var_q: float, var_p: float, v11: float, v22: float,
                       a_m: float, b_m: float) -> float:
    bias = a_m ** 2 / (var_q + v11) + b_m ** 2 / (var_p + v22)
    return 0.5 * (s_kernel(v11 / var_q) + s_kernel(v22 / var_p) + bias)


def error_function_scalar(rho: GaussianState, M: ScalarCovariantObservable,
                          units: Units | str = Units.BITS) -> float:
    """Information lost by measuring M instead of sharp position/momentum.

    Equals (s(V11/VarQ) + s(V22/VarP) + bias)/2 nats, with the bias term
    quadratic in the measurement offsets; the mixed covariances of both the
    state and the noise matrix drop out.
    """
    _require_same_context(rho, M)
    mom = scalar_moments(rho, M.u, M.v)
    nats = _scalar_error_nats(mom.var_q, mom.var_p, M.V11, M.V22, M.a_M, M.b_M)
    return convert(nats, units)


def error_function_vector(rho: GaussianState, M: VectorCovariantObservable,
                          units: Units | str = Units.BITS) -> float:
    """Vector-case error function, computed along two equivalent routes.

    The trace form uses s applied to the noise-to-signal sandwiches
    E = A_rho^{-1/2} A_sigma A_rho^{-1/2} (and F for momentum); the second
    route applies s to the inverse of the signal-to-noise sandwiches.  Both
    are evaluated on every call and must agree to 1e-9 relative; the first
    value is returned.  Strictly positive: position and momentum are
    incompatible, so some information is always lost.
    """
    _require_same_context(rho, M)
    sigma = M.sigma
    e_mat = linalg.sandwich(rho.A, sigma.A)
    f_mat = linalg.sandwich(rho.B, sigma.B)
    bias = float(sigma.a @ linalg.inv_pd(rho.A + sigma.A) @ sigma.a
                 + sigma.b @ linalg.inv_pd(rho.B + sigma.B) @ sigma.b)
    nats_ef = 0.5 * (_s_trace(e_mat) + _s_trace(f_mat) + bias)

    n_eigs = linalg.sym_eigen(linalg.sandwich(sigma.A, rho.A))[0]
    r_eigs = linalg.sym_eigen(linalg.sandwich(sigma.B, rho.B))[0]
    nats_nr = 0.5 * (float(np.sum(s_kernel(1.0 / n_eigs)))
                     + float(np.sum(s_kernel(1.0 / r_eigs))) + bias)
    if abs(nats_ef - nats_nr) > DUAL_PATH_REL_TOL * max(1.0, abs(nats_ef)):
        raise GmurError(
            f"internal inconsistency: trace-form routes disagree ({nats_ef} vs {nats_nr})")
    return convert(nats_ef, units)


def state_dependent_bound_scalar(rho: GaussianState, u, v,
                                 units: Units | str = Units.BITS
                                 ) -> tuple[float, float, ScalarCovariantObservable]:
    """Tight state-dependent lower bound on the scalar error function.

    Returns ``(c_rho, z_rho, M_star)``: the bound s(z) with
    ``z = hbar |cos alpha| / (2 sqrt(VarQ VarP))`` in [0, 1], and the unique
    optimal measurement attaining it (unbiased, V12 = 0, noise variances
    proportional to the state's).  Orthogonal directions short-circuit to a
    zero bound with the projection-valued joint measurement as optimizer.
    """
    u = _check_unit(u, rho.n, "u")
    v = _check_unit(v, rho.n, "v")
    mom = scalar_moments(rho, u, v)
    ctx = rho.ctx
    if abs(mom.cos_alpha) <= COS_SHORTCIRCUIT_TOL:
        m_star = ScalarCovariantObservable(ctx=ctx, u=u, v=v)
        return convert(0.0, units), 0.0, m_star
    abs_cos = abs(mom.cos_alpha)
    z = ctx.hbar * abs_cos / (2.0 * math.sqrt(mom.var_q * mom.var_p))
    ratio = math.sqrt(mom.var_q / mom.var_p)
    m_star = ScalarCovariantObservable(
        ctx=ctx, u=u, v=v,
        V11=0.5 * ctx.hbar * ratio * abs_cos,
        V22=0.5 * ctx.hbar / ratio * abs_cos,
        V12=0.0)
    return convert(s_kernel(z), units), z, m_star


def _regime(eps_product: float, threshold: float) -> str:
    """Above-threshold iff eps1*eps2 >= threshold, at 1e-12 relative slack."""
    if eps_product >= threshold * (1.0 - REGIME_REL_TOL):
        return REGIME_ABOVE
    return REGIME_BELOW


def _divergence_scalar_nats(v11: float, v22: float, a_m: float, b_m: float,
                            cos_alpha: float, hbar: float, eps: Thresholds
                            ) -> tuple[float, str, float]:
    """Divergence value in nats plus regime and the worst momentum variance."""
    threshold = (hbar * cos_alpha / 2.0) ** 2
    regime = _regime(eps.product(), threshold)
    if regime == REGIME_ABOVE:
        var_p_worst = eps.eps2
    else:
        var_p_worst = (hbar * cos_alpha) ** 2 / (4.0 * eps.eps1)
    nats = _scalar_error_nats(eps.eps1, var_p_worst, v11, v22, a_m, b_m)
    return nats, regime, var_p_worst


def divergence_scalar(M: ScalarCovariantObservable, eps: Thresholds,
                      units: Units | str = Units.BITS) -> MurReport:
    """Worst-case error of M over states with projected variances above eps.

    Above the quantum threshold the supremum is attained at any state with
    variances exactly (eps1, eps2) and the value is exact; below it the
    report carries the certified lower bound evaluated at the boundary state
    with VarP = (hbar cos alpha)^2 / (4 eps1).
    """
    nats, regime, var_p_worst = _divergence_scalar_nats(
        M.V11, M.V22, M.a_M, M.b_M, M.cos_alpha, M.ctx.hbar, eps)
    worst = make_state_with_scalar_variances(eps.eps1, var_p_worst, M.u, M.v, M.ctx)
    return MurReport(value=convert(nats, units), units=Units(units).value,
                     regime=regime, is_exact=(regime == REGIME_ABOVE),
                     optimizer=None, worst_state=worst)


def c_inc_scalar(u, v, eps: Thresholds, ctx: PhysContext,
                 units: Units | str = Units.BITS) -> MurReport:
    """Incompatibility degree of position along u and momentum along v.

    Above the quantum threshold the minimax value is
    s(hbar |cos alpha| / (2 sqrt(eps1 eps2))) with a unique optimal
    measurement; below it the constant certified bound ln(2) - 1/2 nats
    applies, attained by the boundary measurement V11 = eps1,
    V22 = (hbar^2/(4 eps1)) cos^2(alpha).  The two expressions agree at the
    regime boundary.
    """
    u = _check_unit(u, ctx.n, "u")
    v = _check_unit(v, ctx.n, "v")
    cos_alpha = float(u @ v)
    abs_cos = abs(cos_alpha)
    hbar = ctx.hbar
    threshold = (hbar * cos_alpha / 2.0) ** 2
    regime = _regime(eps.product(), threshold)
    if regime == REGIME_ABOVE:
        z = hbar * abs_cos / (2.0 * math.sqrt(eps.product()))
        nats = s_kernel(z)
        ratio = math.sqrt(eps.eps1 / eps.eps2)
        optimizer = ScalarCovariantObservable(
            ctx=ctx, u=u, v=v,
            V11=0.5 * hbar * ratio * abs_cos,
            V22=0.5 * hbar / ratio * abs_cos,
            V12=0.0)
        var_p_worst = eps.eps2
    else:
        nats = s_kernel(1.0)
        var_p_worst = (hbar * cos_alpha) ** 2 / (4.0 * eps.eps1)
        optimizer = ScalarCovariantObservable(
            ctx=ctx, u=u, v=v,
            V11=eps.eps1,
            V22=hbar ** 2 * cos_alpha ** 2 / (4.0 * eps.eps1),
            V12=0.0)
    worst = make_state_with_scalar_variances(eps.eps1, var_p_worst, u, v, ctx)
    return MurReport(value=convert(nats, units), units=Units(units).value,
                     regime=regime, is_exact=(regime == REGIME_ABOVE),
                     optimizer=optimizer, worst_state=worst)


def _divergence_vector_nats(a_sigma: np.ndarray, b_sigma: np.ndarray,
                            bias_a: np.ndarray, bias_b: np.ndarray,
                            hbar: float, eps: Thresholds) -> tuple[float, str, float]:
    """Vector divergence in nats plus regime and worst momentum variance scale."""
    n = a_sigma.shape[0]
    regime = _regime(eps.product(), hbar ** 2 / 4.0)
    if regime == REGIME_ABOVE:
        var_p_worst = eps.eps2
    else:
        var_p_worst = hbar ** 2 / (4.0 * eps.eps1)
    trace = _s_trace(a_sigma / eps.eps1) + _s_trace(b_sigma / var_p_worst)
    bias = float(bias_a @ linalg.inv_pd(a_sigma + eps.eps1 * np.eye(n)) @ bias_a
                 + bias_b @ linalg.inv_pd(b_sigma + var_p_worst * np.eye(n)) @ bias_b)
    return 0.5 * (trace + bias), regime, var_p_worst


def divergence_vector(M: VectorCovariantObservable, eps: Thresholds,
                      units: Units | str = Units.BITS) -> MurReport:
    """Worst-case vector error of the covariant measurement generated by sigma.

    Above the quantum threshold the worst state is the isotropic one with
    blocks (eps1 I, eps2 I) and the value
    (Tr s(A_sigma/eps1) + Tr s(B_sigma/eps2))/2 plus bias terms is exact;
    below, the analogous expression with the momentum block pinned at
    hbar^2/(4 eps1) is a certified lower bound.
    """
    sigma = M.sigma
    nats, regime, var_p_worst = _divergence_vector_nats(
        sigma.A, sigma.B, sigma.a, sigma.b, M.ctx.hbar, eps)
    n = M.ctx.n
    worst = make_state_from_blocks(eps.eps1 * np.eye(n), var_p_worst * np.eye(n), M.ctx)
    return MurReport(value=convert(nats, units), units=Units(units).value,
                     regime=regime, is_exact=(regime == REGIME_ABOVE),
                     optimizer=None, worst_state=worst)


def c_inc_vector(n: int, eps: Thresholds, ctx: PhysContext,
                 units: Units | str = Units.BITS) -> MurReport:
    """Incompatibility degree of the full position and momentum vectors.

    The value is n * s(hbar / (2 sqrt(eps1 eps2))) above the quantum
    threshold, attained by the unique minimum-uncertainty generator with
    A = (hbar/2) sqrt(eps1/eps2) I; below it, the certified bound
    n (ln 2 - 1/2) nats with the boundary generator A = eps1 I,
    B = hbar^2/(4 eps1) I.  ``ctx`` supplies hbar; ``n`` the dimension.
    """
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise InputError(f"n must be a positive integer, got {n}")
    target_ctx = PhysContext(hbar=ctx.hbar, n=int(n))
    hbar = ctx.hbar
    regime = _regime(eps.product(), hbar ** 2 / 4.0)
    eye = np.eye(n)
    if regime == REGIME_ABOVE:
        z = hbar / (2.0 * math.sqrt(eps.product()))
        nats = n * s_kernel(z)
        ratio = math.sqrt(eps.eps1 / eps.eps2)
        sigma = make_state_from_blocks(0.5 * hbar * ratio * eye,
                                       0.5 * hbar / ratio * eye, target_ctx)
        var_p_worst = eps.eps2
    else:
        nats = n * s_kernel(1.0)
        sigma = make_state_from_blocks(eps.eps1 * eye,
                                       hbar ** 2 / (4.0 * eps.eps1) * eye, target_ctx)
        var_p_worst = hbar ** 2 / (4.0 * eps.eps1)
    worst = make_state_from_blocks(eps.eps1 * eye, var_p_worst * eye, target_ctx)
    return MurReport(value=convert(nats, units), units=Units(units).value,
                     regime=regime, is_exact=(regime == REGIME_ABOVE),
                     optimizer=from_generating_state(sigma), worst_state=worst)


class Rescaler:
    """Applies one consistent change of length and momentum units to everything.

    Under (s_L, s_P) the Planck constant becomes s_L*s_P*hbar, variances pick
    up squared scales and variance thresholds follow suit, so every entropic
    quantity built from rescaled ingredients must keep its value.
    """

    def __init__(self, length_scale: float = 1.0, momentum_scale: float = 1.0):
        if not (length_scale > 0 and momentum_scale > 0):
            raise InputError(f"scales must be positive, got ({length_scale}, {momentum_scale})")
        self.s_l = float(length_scale)
        self.s_p = float(momentum_scale)

    def context(self, ctx: PhysContext) -> PhysContext:
        return PhysContext(hbar=self.s_l * self.s_p * ctx.hbar, n=ctx.n)

    def state(self, state: GaussianState) -> GaussianState:
        return rescale(state, self.s_l, self.s_p)

    def thresholds(self, eps: Thresholds) -> Thresholds:
        return Thresholds(eps1=self.s_l ** 2 * eps.eps1, eps2=self.s_p ** 2 * eps.eps2)

    def scalar_observable(self, M: ScalarCovariantObservable) -> ScalarCovariantObservable:
        return ScalarCovariantObservable(
            ctx=self.context(M.ctx), u=M.u, v=M.v,
            a_M=self.s_l * M.a_M, b_M=self.s_p * M.b_M,
            V11=self.s_l ** 2 * M.V11, V22=self.s_p ** 2 * M.V22,
            V12=self.s_l * self.s_p * M.V12)

    def vector_observable(self, M: VectorCovariantObservable) -> VectorCovariantObservable:
        return from_generating_state(self.state(M.sigma))


def scale_invariance_transport(evaluate: Callable[[Rescaler], float],
                               length_scale: float, momentum_scale: float
                               ) -> tuple[float, float]:
    """Evaluate the same quantity in original and rescaled units.

    ``evaluate`` receives a :class:`Rescaler` and must build its inputs
    through it; the function returns the pair (base value, rescaled value),
    which scale invariance requires to agree to 1e-10.
    """
    base = evaluate(Rescaler(1.0, 1.0))
    scaled = evaluate(Rescaler(length_scale, momentum_scale))
    return base, scaled
