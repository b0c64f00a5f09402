"""Gaussian quantum states as moment data.

A state is the triple of first moments and the block variance matrix
``V = [[A, C], [C^T, B]]``; physical validity is the matrix condition
``V + (i/2) Omega >= 0`` with ``Omega = [[0, hbar*I], [-hbar*I, 0]]``.
No Hilbert-space objects are ever built: characteristic functions, output
statistics and all bounds downstream are functions of the moments alone.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import linalg
from .errors import DomainError, GmurError, InputError

UNIT_NORM_TOL = 1e-12
DEGENERATE_COS_TOL = 1e-12


@dataclass(frozen=True)
class PhysContext:
    """Physical configuration: Planck constant and number of degrees of freedom.

    ``hbar`` is explicit (default 1.0) so classical-limit sweeps can vary it;
    the symplectic form is always derived from it, never stored.
    """

    hbar: float = 1.0
    n: int = 1

    def __post_init__(self):
        if not (self.hbar > 0 and np.isfinite(self.hbar)):
            raise InputError(f"hbar must be a positive finite real, got {self.hbar}")
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 1):
            raise InputError(f"n must be a positive integer, got {self.n}")

    def omega(self) -> np.ndarray:
        """The 2n x 2n symplectic-form matrix [[0, hbar*I], [-hbar*I, 0]]."""
        n = self.n
        o = np.zeros((2 * n, 2 * n))
        o[:n, n:] = self.hbar * np.eye(n)
        o[n:, :n] = -self.hbar * np.eye(n)
        return o


@dataclass(frozen=True)
class ValidationFailure:
    """Report returned (not raised) when a candidate state or observable is unphysical."""

    min_eigenvalue: float
    tolerance: float
    failed: tuple[str, ...]

    def __bool__(self) -> bool:
        return False


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


def _check_vector(x, size: int, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (size,):
        raise InputError(f"{name} must have shape ({size},), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InputError(f"{name} contains non-finite entries")
    return x


def _check_unit(x, size: int, name: str) -> np.ndarray:
    x = _check_vector(x, size, name)
    if abs(np.linalg.norm(x) - 1.0) > UNIT_NORM_TOL:
        raise InputError(f"{name} must be a unit vector (|{name}| = {np.linalg.norm(x)})")
    return x


@dataclass(frozen=True)
class GaussianState:
    """Moment parametrization of a Gaussian state.

    ``a``/``b`` are the position/momentum means, ``A``/``B``/``C`` the blocks
    of the quantum variance matrix.  Instances produced by the factories in
    this module are guaranteed physical; use :func:`validate_state` when the
    input may not be.
    """

    ctx: PhysContext
    a: np.ndarray
    b: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        n = self.ctx.n
        object.__setattr__(self, "a", _frozen(_check_vector(self.a, n, "a")))
        object.__setattr__(self, "b", _frozen(_check_vector(self.b, n, "b")))
        for name in ("A", "B"):
            m = linalg.check_square(getattr(self, name), name)
            if m.shape != (n, n):
                raise InputError(f"{name} must be {n}x{n}, got {m.shape}")
            scale = max(1.0, float(np.max(np.abs(m))))
            if np.max(np.abs(m - m.T)) > 1e-10 * scale:
                raise InputError(f"{name} is not symmetric")
            object.__setattr__(self, name, _frozen(linalg.symmetrize(m)))
        c = np.asarray(self.C, dtype=float)
        if c.shape != (n, n):
            raise InputError(f"C must be {n}x{n}, got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise InputError("C contains non-finite entries")
        object.__setattr__(self, "C", _frozen(c))

    @property
    def n(self) -> int:
        return self.ctx.n

    @property
    def hbar(self) -> float:
        return self.ctx.hbar

    def mean_vector(self) -> np.ndarray:
        """The stacked mean (a; b) of length 2n."""
        return np.concatenate([self.a, self.b])

    def variance_matrix(self) -> np.ndarray:
        """The 2n x 2n block matrix [[A, C], [C^T, B]]."""
        return np.block([[self.A, self.C], [self.C.T, self.B]])

    def uncertainty_matrix(self, sign: int = +1) -> np.ndarray:
        """The Hermitian matrix V + sign*(i/2)*Omega whose positivity is physicality."""
        return self.variance_matrix() + sign * 0.5j * self.ctx.omega()

    def validity(self, rel_tol: Optional[float] = None) -> linalg.PsdVerdict:
        """PSD verdict of the uncertainty matrix V + (i/2)Omega."""
        return linalg.herm_psd(self.uncertainty_matrix(+1), rel_tol)


@dataclass(frozen=True)
class ScalarMoments:
    """Means and second moments of a state projected on directions (u, v)."""

    mean_q: float
    mean_p: float
    var_q: float
    var_p: float
    cov_qp: float
    cos_alpha: float


def validate_state(a, b, A, B, C, ctx: PhysContext,
                   rel_tol: Optional[float] = None) -> Union[GaussianState, ValidationFailure]:
    """Check quantum positivity and build a state, or report why not.

    An unphysical candidate is an expected data outcome (optimizers probe the
    boundary), so it yields a :class:`ValidationFailure` rather than an
    exception; only structurally malformed input raises.
    """
    n = ctx.n
    a = _check_vector(a, n, "a")
    b = _check_vector(b, n, "b")
    A = linalg.symmetrize(_check_vector(np.ravel(A), n * n, "A").reshape(n, n))
    B = linalg.symmetrize(_check_vector(np.ravel(B), n * n, "B").reshape(n, n))
    C = _check_vector(np.ravel(C), n * n, "C").reshape(n, n)

    V = np.block([[A, C], [C.T, B]])
    verdict = linalg.herm_psd(V + 0.5j * ctx.omega(), rel_tol)
    if verdict.is_psd:
        return GaussianState(ctx=ctx, a=a, b=b, A=A, B=B, C=C)

    failed = ["quantum_positivity"]
    tol = verdict.tolerance_used
    wa = linalg.sym_eigen(A)[0]
    wb = linalg.sym_eigen(B)[0]
    if wa[0] <= tol:
        failed.append("A_not_positive_definite")
    if wb[0] <= tol:
        failed.append("B_not_positive_definite")
    if wa[0] > tol:
        # weak Schur form of the positivity condition: B >= C^T A^-1 C + (hbar^2/4) A^-1
        a_inv = linalg.inv_pd(A)
        schur = B - C.T @ a_inv @ C - (ctx.hbar ** 2 / 4.0) * a_inv
        if not linalg.herm_psd(linalg.symmetrize(schur), rel_tol).is_psd:
            failed.append("schur_inequality")
    return ValidationFailure(min_eigenvalue=verdict.min_eigenvalue,
                             tolerance=tol, failed=tuple(failed))


def scalar_moments(state: GaussianState, u, v) -> ScalarMoments:
    """Project a state on unit directions u (position) and v (momentum)."""
    n = state.n
    u = _check_unit(u, n, "u")
    v = _check_unit(v, n, "v")
    return ScalarMoments(
        mean_q=float(u @ state.a),
        mean_p=float(v @ state.b),
        var_q=float(u @ state.A @ u),
        var_p=float(v @ state.B @ v),
        cov_qp=float(u @ state.C @ v),
        cos_alpha=float(u @ v),
    )


def purity_info(state: GaussianState,
                rel_tol: float = 1e-9) -> tuple[float, bool, bool]:
    """Determinant tests for purity and the minimum-uncertainty property.

    Returns ``(det V, is_pure, is_min_uncertainty)``: a Gaussian state is pure
    iff det V = (hbar/2)^(2n), and minimum-uncertainty iff additionally the
    block determinants saturate, det A * det B = (hbar/2)^(2n).
    """
    det_v = float(np.linalg.det(state.variance_matrix()))
    target = (state.hbar / 2.0) ** (2 * state.n)
    is_pure = abs(det_v - target) <= rel_tol * target
    det_ab = float(np.linalg.det(state.A) * np.linalg.det(state.B))
    is_min_unc = abs(det_ab - target) <= rel_tol * target
    if is_min_unc and not is_pure:
        raise GmurError("internal inconsistency: minimum-uncertainty state not flagged pure")
    return det_v, is_pure, is_min_unc


def make_state_from_blocks(A, B, ctx: PhysContext) -> GaussianState:
    """Build the centered state with blocks (A, B) and C = 0.

    Requires A > 0 and B >= (hbar^2/4) A^{-1}, which is exactly the condition
    for two positive matrices to be the diagonal blocks of a physical
    variance matrix.
    """
    n = ctx.n
    A = linalg.symmetrize(np.asarray(A, dtype=float).reshape(n, n))
    B = linalg.symmetrize(np.asarray(B, dtype=float).reshape(n, n))
    wa = linalg.sym_eigen(A)[0]
    if wa[0] <= 0:
        raise DomainError(f"A must be positive-definite (min eigenvalue {wa[0]})")
    gap = linalg.symmetrize(B - (ctx.hbar ** 2 / 4.0) * linalg.inv_pd(A))
    verdict = linalg.herm_psd(gap)
    if not verdict.is_psd:
        raise DomainError(
            "B - (hbar^2/4) A^-1 is not PSD "
            f"(min eigenvalue {verdict.min_eigenvalue}, tolerance {verdict.tolerance_used})")
    state = validate_state(np.zeros(n), np.zeros(n), A, B, np.zeros((n, n)), ctx)
    if isinstance(state, ValidationFailure):
        raise GmurError(f"internal inconsistency: block construction invalid ({state})")
    return state


def _span_basis(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Orthonormal basis (n x 2) of span{u, v}; requires u, v independent."""
    w = v - (u @ v) * u
    norm = np.linalg.norm(w)
    if norm < 1e-8:
        raise InputError("u and v are (anti)parallel; span basis undefined")
    return np.column_stack([u, w / norm])


def make_state_with_scalar_variances(c_Q: float, c_P: float, u, v, ctx: PhysContext,
                                     padding: Optional[tuple[float, float]] = None
                                     ) -> GaussianState:
    """Build a centered state whose projected variances along (u, v) are (c_Q, c_P).

    Such a state exists iff c_Q * c_P >= (hbar*cos(alpha)/2)^2 with
    cos(alpha) = u.v; the construction branches on |cos(alpha)|:

    - parallel directions: isotropic blocks A = c_Q I, B = c_P I;
    - orthogonal directions: saturating rank-two blocks supported on span{u, v};
    - generic angle: a coupled pair with B proportional to A^{-1} on span{u, v}.

    ``padding`` optionally overrides the coefficients (a', b') of the blocks
    a'*P + b'*P on the orthogonal complement projector P (defaults saturate
    the complement at a' = c_Q, b' = hbar^2/(4 c_Q)).
    """
    n = ctx.n
    hbar = ctx.hbar
    u = _check_unit(u, n, "u")
    v = _check_unit(v, n, "v")
    if not (c_Q > 0 and c_P > 0):
        raise InputError(f"variances must be positive, got ({c_Q}, {c_P})")
    cos_alpha = float(u @ v)
    bound = (hbar * cos_alpha / 2.0) ** 2
    if c_Q * c_P < bound * (1.0 - 1e-9):
        raise DomainError(
            f"c_Q*c_P = {c_Q * c_P} is below the Robertson bound {bound}")

    if abs(abs(cos_alpha) - 1.0) <= DEGENERATE_COS_TOL:
        A = c_Q * np.eye(n)
        B = c_P * np.eye(n)
    else:
        basis = _span_basis(u, v)
        p_perp = np.eye(n) - basis @ basis.T
        if padding is None:
            pad_a, pad_b = c_Q, hbar ** 2 / (4.0 * c_Q)
        else:
            pad_a, pad_b = padding
            if not (pad_a > 0 and pad_b * pad_a >= hbar ** 2 / 4.0 * (1.0 - 1e-9)):
                raise DomainError(f"padding ({pad_a}, {pad_b}) violates b' >= hbar^2/(4 a')")
        uu, vv = np.outer(u, u), np.outer(v, v)
        uv = np.outer(u, v) + np.outer(v, u)
        if abs(cos_alpha) <= DEGENERATE_COS_TOL:
            A = c_Q * uu + hbar ** 2 / (4.0 * c_P) * vv + pad_a * p_perp
            B = hbar ** 2 / (4.0 * c_Q) * uu + c_P * vv + pad_b * p_perp
        else:
            A = c_Q * (uu - uv / cos_alpha + 2.0 * vv / cos_alpha ** 2) + pad_a * p_perp
            a_span = linalg.symmetrize(basis.T @ A @ basis)
            b_span = (c_Q * c_P / cos_alpha ** 2) * linalg.inv_pd(a_span)
            B = basis @ b_span @ basis.T + pad_b * p_perp

    state = validate_state(np.zeros(n), np.zeros(n), linalg.symmetrize(A),
                           linalg.symmetrize(B), np.zeros((n, n)), ctx)
    if isinstance(state, ValidationFailure):
        raise GmurError(f"internal inconsistency: scalar-variance construction invalid ({state})")
    return state


def char_function(state: GaussianState, k, l) -> complex:
    """Characteristic function exp(i w.mu - w.V w / 2) at w = (k, l)."""
    n = state.n
    w = np.concatenate([_check_vector(k, n, "k"), _check_vector(l, n, "l")])
    mu = state.mean_vector()
    V = state.variance_matrix()
    return complex(np.exp(1j * (w @ mu) - 0.5 * (w @ V @ w)))


def rescale(state: GaussianState, length_scale: float, momentum_scale: float) -> GaussianState:
    """Apply independent changes of length and momentum units.

    The returned state lives in a context with hbar' = s_L * s_P * hbar, which
    keeps it physical: the uncertainty matrix transforms by congruence.
    """
    s_l, s_p = float(length_scale), float(momentum_scale)
    if not (s_l > 0 and s_p > 0):
        raise InputError(f"scales must be positive, got ({length_scale}, {momentum_scale})")
    new_ctx = PhysContext(hbar=s_l * s_p * state.hbar, n=state.n)
    out = validate_state(s_l * state.a, s_p * state.b, s_l ** 2 * state.A,
                         s_p ** 2 * state.B, s_l * s_p * state.C, new_ctx)
    if isinstance(out, ValidationFailure):
        raise GmurError(f"internal inconsistency: rescaled state invalid ({out})")
    return out


def state_to_json(state: GaussianState) -> dict:
    """Serialize to the row-major JSON schema used by the CLI."""
    return {
        "hbar": state.hbar,
        "n": state.n,
        "a": state.a.tolist(),
        "b": state.b.tolist(),
        "A": state.A.tolist(),
        "B": state.B.tolist(),
        "C": state.C.tolist(),
    }


def state_from_json(data: dict,
                    rel_tol: Optional[float] = None) -> Union[GaussianState, ValidationFailure]:
    """Parse the CLI JSON schema; invalid physics is returned, bad structure raises."""
    try:
        ctx = PhysContext(hbar=float(data["hbar"]), n=int(data["n"]))
        a, b = data["a"], data["b"]
        A, B, C = data["A"], data["B"], data["C"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed state JSON: {exc}") from exc
    return validate_state(a, b, A, B, C, ctx, rel_tol)
