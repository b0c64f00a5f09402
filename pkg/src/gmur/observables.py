"""Covariant Gaussian bi-observables as parameter triples (mu, V, J).

A joint approximate measurement of position and momentum is represented
purely by its bias vector, noise matrix and outcome map; no operator-valued
measure is ever materialized.  The vector case wraps a generating Gaussian
state (J = identity); the scalar case fixes J from a pair of directions and
keeps the 2x2 noise matrix explicit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import linalg
from .entropy import GaussianDist
from .errors import DomainError, InputError
from .states import (GaussianState, PhysContext, ValidationFailure, _check_unit,
                     _check_vector)


@dataclass(frozen=True)
class GaussianBiObservable:
    """General Gaussian bi-observable with m paired outcomes on n modes.

    Physicality is the matrix condition V +/- (i/2) J Omega J^T >= 0; use
    :func:`validate_biobservable` to construct from untrusted parameters.
    """

    ctx: PhysContext
    mu: np.ndarray
    V: np.ndarray
    J: np.ndarray

    def __post_init__(self):
        mu = np.array(self.mu, dtype=float).reshape(-1)
        if mu.size % 2 != 0 or mu.size == 0:
            raise InputError(f"mu must have even positive length, got {mu.size}")
        m = mu.size // 2
        V = linalg.symmetrize(np.asarray(self.V, dtype=float))
        J = np.array(self.J, dtype=float)
        if V.shape != (2 * m, 2 * m):
            raise InputError(f"V must be {2 * m}x{2 * m}, got {V.shape}")
        if J.shape != (2 * m, 2 * self.ctx.n):
            raise InputError(f"J must be {2 * m}x{2 * self.ctx.n}, got {J.shape}")
        if not all(np.all(np.isfinite(x)) for x in (mu, V, J)):
            raise InputError("non-finite observable parameters")
        for name, arr in (("mu", mu), ("V", V), ("J", J)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def m(self) -> int:
        return self.mu.size // 2

    def noise_form(self, sign: int = +1) -> np.ndarray:
        """The Hermitian matrix V + sign*(i/2) J Omega J^T."""
        commutator = linalg.skew_symmetrize(self.J @ self.ctx.omega() @ self.J.T)
        return self.V + sign * 0.5j * commutator


@dataclass(frozen=True)
class VectorCovariantObservable:
    """Covariant phase-space observable generated by a Gaussian state sigma.

    Induced parameters are mu = mu^sigma, V = V^sigma, J = identity; validity
    is inherited from the generating state.
    """

    sigma: GaussianState

    @property
    def ctx(self) -> PhysContext:
        return self.sigma.ctx

    @property
    def m(self) -> int:
        return self.sigma.n

    @property
    def mu(self) -> np.ndarray:
        return self.sigma.mean_vector()

    @property
    def V(self) -> np.ndarray:
        return self.sigma.variance_matrix()

    @property
    def J(self) -> np.ndarray:
        return np.eye(2 * self.sigma.n)


def direction_map(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """The 2 x 2n outcome map [[u^T, 0], [0, v^T]] of a scalar bi-observable."""
    n = u.size
    J = np.zeros((2, 2 * n))
    J[0, :n] = u
    J[1, n:] = v
    return J


@dataclass(frozen=True)
class ScalarCovariantObservable:
    """Joint measurement of position along u and momentum along v.

    The noise matrix [[V11, V12], [V12, V22]] must satisfy
    V11*V22 >= (hbar*cos(alpha)/2)^2 + V12^2; the angle is always derived
    from the stored directions, never supplied separately.
    """

    ctx: PhysContext
    u: np.ndarray
    v: np.ndarray
    a_M: float = 0.0
    b_M: float = 0.0
    V11: float = 0.0
    V22: float = 0.0
    V12: float = 0.0

    def __post_init__(self):
        n = self.ctx.n
        object.__setattr__(self, "u", np.array(_check_unit(self.u, n, "u")))
        object.__setattr__(self, "v", np.array(_check_unit(self.v, n, "v")))
        self.u.setflags(write=False)
        self.v.setflags(write=False)
        verdict = linalg.herm_psd(self.noise_form(+1))
        if not verdict.is_psd:
            raise DomainError(
                f"noise matrix violates covariant positivity "
                f"(min eigenvalue {verdict.min_eigenvalue})")

    @property
    def cos_alpha(self) -> float:
        return float(self.u @ self.v)

    @property
    def m(self) -> int:
        return 1

    @property
    def mu(self) -> np.ndarray:
        return np.array([self.a_M, self.b_M])

    @property
    def V(self) -> np.ndarray:
        return np.array([[self.V11, self.V12], [self.V12, self.V22]])

    @property
    def J(self) -> np.ndarray:
        return direction_map(self.u, self.v)

    def noise_form(self, sign: int = +1) -> np.ndarray:
        gamma = 0.5 * self.ctx.hbar * self.cos_alpha
        return self.V + sign * 1j * np.array([[0.0, gamma], [-gamma, 0.0]])


Observable = Union[GaussianBiObservable, VectorCovariantObservable, ScalarCovariantObservable]


def validate_biobservable(mu, V, J, ctx: PhysContext,
                          rel_tol: float | None = None
                          ) -> Union[GaussianBiObservable, ValidationFailure]:
    """Check covariant positivity of a parameter triple, or report why not."""
    mu = np.asarray(mu, dtype=float).reshape(-1)
    if mu.size % 2 != 0 or mu.size == 0:
        raise InputError(f"mu must have even positive length, got {mu.size}")
    m = mu.size // 2
    V = linalg.symmetrize(np.asarray(V, dtype=float))
    J = np.asarray(J, dtype=float)
    if V.shape != (2 * m, 2 * m):
        raise InputError(f"V must be {2 * m}x{2 * m}, got {V.shape}")
    if J.shape != (2 * m, 2 * ctx.n):
        raise InputError(f"J must be {2 * m}x{2 * ctx.n}, got {J.shape}")
    form = V + 0.5j * linalg.skew_symmetrize(J @ ctx.omega() @ J.T)
    verdict = linalg.herm_psd(form, rel_tol)
    if verdict.is_psd:
        return GaussianBiObservable(ctx=ctx, mu=mu, V=V, J=J)
    return ValidationFailure(min_eigenvalue=verdict.min_eigenvalue,
                             tolerance=verdict.tolerance_used,
                             failed=("covariant_positivity",))


def from_generating_state(sigma: GaussianState) -> VectorCovariantObservable:
    """Covariant phase-space observable generated by sigma."""
    return VectorCovariantObservable(sigma=sigma)


def noisy_position_then_momentum(delta: float, u, v, ctx: PhysContext
                                 ) -> ScalarCovariantObservable:
    """Noisy position measurement of precision delta followed by sharp momentum.

    Yields the unbiased scalar observable with V11 = delta,
    V22 = (hbar*cos(alpha))^2 / (4*delta), V12 = 0, which saturates the
    covariant positivity bound with equality.
    """
    if not delta > 0:
        raise InputError(f"delta must be positive, got {delta}")
    u = _check_unit(u, ctx.n, "u")
    v = _check_unit(v, ctx.n, "v")
    cos_alpha = float(u @ v)
    return ScalarCovariantObservable(
        ctx=ctx, u=u, v=v,
        V11=delta, V22=(ctx.hbar * cos_alpha) ** 2 / (4.0 * delta), V12=0.0)


def _output_moments(M: Observable, rho: GaussianState) -> tuple[np.ndarray, np.ndarray]:
    if M.ctx.hbar != rho.ctx.hbar:
        raise InputError(f"hbar mismatch: observable {M.ctx.hbar}, state {rho.ctx.hbar}")
    if M.ctx.n != rho.ctx.n:
        raise InputError(f"mode mismatch: observable n={M.ctx.n}, state n={rho.ctx.n}")
    J = M.J
    mean = J @ rho.mean_vector() + M.mu
    cov = linalg.symmetrize(J @ rho.variance_matrix() @ J.T) + M.V
    return mean, cov


def output_distribution(M: Observable, rho: GaussianState) -> GaussianDist:
    """Outcome distribution N(J mu^rho + mu^M; J V^rho J^T + V^M).

    Raises DomainError if the joint covariance is singular (possible only in
    projection-valued corner cases with V^M = 0); the marginals below remain
    well defined there.
    """
    mean, cov = _output_moments(M, rho)
    return GaussianDist(mean=mean, cov=cov)


def marginals(M: Observable, rho: GaussianState) -> tuple[GaussianDist, GaussianDist]:
    """Position-type and momentum-type marginals of the outcome distribution.

    These are the first-m and last-m coordinates; their covariance blocks are
    the sharp ones plus the PSD noise blocks, hence always positive-definite.
    """
    mean, cov = _output_moments(M, rho)
    m = M.m
    first = GaussianDist(mean=mean[:m], cov=cov[:m, :m])
    second = GaussianDist(mean=mean[m:], cov=cov[m:, m:])
    return first, second


def biobs_char_function(M: Observable, rho: GaussianState, k, l) -> complex:
    """Characteristic function of the outcome distribution at (k, l).

    Evaluated directly from the moments, so it stays finite even for singular
    joint covariances; in the vector case it factorizes into the product of
    the state and generator characteristic functions.
    """
    mean, cov = _output_moments(M, rho)
    m = M.m
    t = np.concatenate([_check_vector(k, m, "k"), _check_vector(l, m, "l")])
    return complex(np.exp(1j * (t @ mean) - 0.5 * (t @ cov @ t)))


def observable_to_json(M: Observable) -> dict:
    """Serialize an observable to the CLI JSON schema."""
    if isinstance(M, ScalarCovariantObservable):
        return {
            "hbar": M.ctx.hbar,
            "u": M.u.tolist(),
            "v": M.v.tolist(),
            "a": M.a_M,
            "b": M.b_M,
            "V11": M.V11,
            "V22": M.V22,
            "V12": M.V12,
        }
    return {
        "hbar": M.ctx.hbar,
        "n": M.ctx.n,
        "mu": np.asarray(M.mu).tolist(),
        "V": np.asarray(M.V).tolist(),
        "J": np.asarray(M.J).tolist(),
    }


def observable_from_json(data: dict, rel_tol: float | None = None
                         ) -> Union[GaussianBiObservable, ScalarCovariantObservable,
                                    ValidationFailure]:
    """Parse either the generic triple schema or the scalar shorthand."""
    try:
        hbar = float(data["hbar"])
        if "u" in data:
            u = np.asarray(data["u"], dtype=float)
            ctx = PhysContext(hbar=hbar, n=u.size)
            kwargs = dict(ctx=ctx, u=u, v=np.asarray(data["v"], dtype=float),
                          a_M=float(data.get("a", 0.0)), b_M=float(data.get("b", 0.0)),
                          V11=float(data["V11"]), V22=float(data["V22"]),
                          V12=float(data.get("V12", 0.0)))
        else:
            ctx = PhysContext(hbar=hbar, n=int(data["n"]))
            return validate_biobservable(data["mu"], data["V"], data["J"], ctx, rel_tol)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed observable JSON: {exc}") from exc
    try:
        return ScalarCovariantObservable(**kwargs)
    except DomainError:
        # same Hermitian form as ScalarCovariantObservable.noise_form(+1)
        u = _check_unit(kwargs["u"], ctx.n, "u")
        v = _check_unit(kwargs["v"], ctx.n, "v")
        gamma = 0.5 * hbar * float(u @ v)
        form = (np.array([[kwargs["V11"], kwargs["V12"]], [kwargs["V12"], kwargs["V22"]]])
                + 1j * np.array([[0.0, gamma], [-gamma, 0.0]]))
        verdict = linalg.herm_psd(form)  # default tolerance, matching the constructor
        return ValidationFailure(min_eigenvalue=verdict.min_eigenvalue,
                                 tolerance=verdict.tolerance_used,
                                 failed=("covariant_positivity",))
