"""Seeded random generators for states, observables and classical Gaussians.

Everything takes an explicit ``numpy.random.Generator`` so that callers own
reproducibility.  Constructions guarantee validity structurally (positivity
by construction, never by rejection), which keeps sampling deterministic.
"""

from __future__ import annotations

import numpy as np

from . import linalg
from .entropy import GaussianDist
from .errors import GmurError
from .mur import Thresholds
from .observables import (ScalarCovariantObservable, VectorCovariantObservable,
                          from_generating_state)
from .states import GaussianState, PhysContext, ValidationFailure, validate_state


def random_orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-ish random orthogonal matrix via QR with sign fixing."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def random_pd_matrix(rng: np.random.Generator, n: int, scale: float = 1.0,
                     log_spread: float = 1.5) -> np.ndarray:
    """Random positive-definite matrix with eigenvalues scale*10^(+-log_spread/2)."""
    exponents = rng.uniform(-log_spread / 2.0, log_spread / 2.0, size=n)
    q = random_orthogonal(rng, n)
    return linalg.symmetrize((q * (scale * 10.0 ** exponents)) @ q.T)


def random_gaussian_dist(rng: np.random.Generator, dim: int, scale: float = 1.0,
                         mean_scale: float = 1.0) -> GaussianDist:
    """Random classical Gaussian with condition number at most ~1e3."""
    return GaussianDist(mean=mean_scale * rng.standard_normal(dim),
                        cov=random_pd_matrix(rng, dim, scale=scale, log_spread=3.0))


def _momentum_floor(A: np.ndarray, C: np.ndarray, hbar: float) -> np.ndarray:
    """Smallest real symmetric B0 with B >= B0 implying quantum validity.

    Validity is B >= (C^T - i hbar/2) A^-1 (C + i hbar/2); dominating the
    Hermitian right-hand side costs its real part plus the spectral norm of
    its antisymmetric imaginary part.
    """
    a_inv = linalg.inv_pd(A)
    gamma = hbar / 2.0
    real_part = linalg.symmetrize(C.T @ a_inv @ C + gamma ** 2 * a_inv)
    imag_part = gamma * (C.T @ a_inv - a_inv @ C)
    skew_norm = float(np.linalg.norm(imag_part, 2))
    return real_part + skew_norm * np.eye(A.shape[0])


def random_state(rng: np.random.Generator, ctx: PhysContext, scale: float = 1.0,
                 mean_scale: float = 1.0, mixedness: float = 0.5) -> GaussianState:
    """Random valid Gaussian state with generic (nonzero) mixed covariances.

    The momentum block sits a PSD bump of relative size ``mixedness`` above
    the exact validity floor, which makes physicality structural.
    """
    n = ctx.n
    A = random_pd_matrix(rng, n, scale=scale)
    C = 0.3 * ctx.hbar * rng.standard_normal((n, n))
    floor = _momentum_floor(A, C, ctx.hbar)
    bump_scale = ctx.hbar ** 2 * float(np.trace(linalg.inv_pd(A))) / n
    bump = mixedness * random_pd_matrix(rng, n, scale=bump_scale)
    B = linalg.symmetrize(floor + bump)
    state = validate_state(mean_scale * rng.standard_normal(n),
                           mean_scale * rng.standard_normal(n), A, B, C, ctx)
    if isinstance(state, ValidationFailure):
        raise GmurError(f"internal inconsistency: random state invalid ({state})")
    return state


def random_state_in_band(rng: np.random.Generator, ctx: PhysContext, eps: Thresholds,
                         slack: float = 1.0) -> GaussianState:
    """Random valid state with A >= eps1*I and B >= eps2*I.

    Both floor conditions hold by construction: A = eps1*I + PSD and
    B = C^T A^-1 C + (hbar^2/4) A^-1 + eps2*I + PSD.
    """
    n = ctx.n
    w1 = rng.standard_normal((n, n)) * np.sqrt(slack * eps.eps1 / n)
    A = linalg.symmetrize(eps.eps1 * np.eye(n) + w1 @ w1.T)
    C = 0.2 * np.sqrt(eps.eps1 * eps.eps2) * rng.standard_normal((n, n))
    w2 = rng.standard_normal((n, n)) * np.sqrt(slack * eps.eps2 / n)
    B = linalg.symmetrize(_momentum_floor(A, C, ctx.hbar)
                          + eps.eps2 * np.eye(n) + w2 @ w2.T)
    state = validate_state(rng.standard_normal(n), rng.standard_normal(n), A, B, C, ctx)
    if isinstance(state, ValidationFailure):
        raise GmurError(f"internal inconsistency: banded random state invalid ({state})")
    return state


def random_directions(rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Two independent random unit vectors in R^n."""
    u = rng.standard_normal(n)
    v = rng.standard_normal(n)
    return u / np.linalg.norm(u), v / np.linalg.norm(v)


def random_scalar_observable(rng: np.random.Generator, u: np.ndarray, v: np.ndarray,
                             ctx: PhysContext, scale: float = 1.0,
                             biased: bool = True) -> ScalarCovariantObservable:
    """Random valid scalar bi-observable along the given directions.

    V11 is log-uniform, V22 carries a margin factor >= 1 over the covariant
    positivity floor, and V12 fills a uniform fraction of the remaining room.
    """
    cos_alpha = float(u @ v)
    floor = (ctx.hbar * cos_alpha / 2.0) ** 2
    v11 = scale * ctx.hbar * 10.0 ** rng.uniform(-1.0, 1.0)
    margin = 10.0 ** rng.uniform(0.0, 1.0)
    v22 = margin * (floor + (0.1 * scale * ctx.hbar) ** 2) / v11
    room = v11 * v22 - floor
    v12 = rng.uniform(-1.0, 1.0) * np.sqrt(max(room, 0.0))
    bias = rng.standard_normal(2) * (np.sqrt(scale * ctx.hbar) if biased else 0.0)
    return ScalarCovariantObservable(ctx=ctx, u=u, v=v, a_M=float(bias[0]),
                                     b_M=float(bias[1]), V11=v11, V22=v22, V12=v12)


def random_vector_observable(rng: np.random.Generator, ctx: PhysContext,
                             scale: float = 1.0, biased: bool = True
                             ) -> VectorCovariantObservable:
    """Random covariant phase-space observable from a random generating state."""
    sigma = random_state(rng, ctx, scale=scale,
                         mean_scale=(1.0 if biased else 0.0))
    return from_generating_state(sigma)
