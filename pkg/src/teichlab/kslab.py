"""Harmonic projectors and Green operators for finite-dimensional families.

For a matrix ``L`` self-adjoint with respect to the inner product
``<u, v> = u^* W v`` the harmonic projector ``F`` is the ``W``-orthogonal
projection onto ``ker L`` and the Green operator ``G`` inverts ``L`` on the
complement, so that ``u = F u + L G u`` for every ``u``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import IllConditioned, KernelDimensionJump, ValidationError
from .validation import check_square_matrix

RANK_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class ProjectorPair:
    F: np.ndarray
    G: np.ndarray
    weight: np.ndarray
    kernel_dim: int
    eigenvalues: np.ndarray = field(repr=False, default=None)

    def apply(self, u):
        return self.F @ u


def _weight(weight, d):
    if weight is None:
        return np.eye(d)
    w = check_square_matrix(weight, "weight")
    if w.shape != (d, d):
        raise ValidationError(f"weight has shape {w.shape}, expected {(d, d)}")
    if not np.allclose(w, w.conj().T, atol=1e-12 * np.abs(w).max()):
        raise ValidationError("weight must be Hermitian")
    return w


def _check_selfadjoint(L, W):
    a = W @ L
    scale = max(np.abs(a).max(), 1.0)
    if np.abs(a - a.conj().T).max() > 1e-10 * scale:
        raise ValidationError("L is not self-adjoint for the given weight")
    return (a + a.conj().T) / 2


def harmonic_projector(L, weight=None, rank_tol=None):
    """Harmonic projector ``F`` and Green operator ``G`` of ``L``.

    Eigenvalues with ``|lambda| <= rank_tol`` span the kernel; the default is
    ``1e-9`` times the largest ``|lambda|``.

    Raises
    ------
    IllConditioned
        The gap between kernel and non-kernel eigenvalues is below
        ``10 * rank_tol``.
    """
    L = check_square_matrix(L, "L")
    d = L.shape[0]
    W = _weight(weight, d)
    a = _check_selfadjoint(L, W)
    lam, V = scipy.linalg.eigh(a, W)
    if rank_tol is None:
        rank_tol = RANK_RTOL * max(np.abs(lam).max(), np.finfo(float).tiny)
    ker = np.abs(lam) <= rank_tol
    below = np.abs(lam[ker]).max(initial=0.0)
    above = np.abs(lam[~ker]).min(initial=np.inf)
    if above - below < 10 * rank_tol:
        raise IllConditioned(f"spectral gap {above - below:.3g} around rank_tol {rank_tol:.3g}")
    # V^* W V = I, so V V^* W is the identity split along eigenspaces
    V0, V1 = V[:, ker], V[:, ~ker]
    F = V0 @ V0.conj().T @ W
    G = (V1 / lam[~ker]) @ V1.conj().T @ W
    if not np.iscomplexobj(L) and not np.iscomplexobj(W):
        F, G = F.real, G.real
    return ProjectorPair(F, G, W, int(ker.sum()), lam)


def green_identity_residual(pair, L, trials=50, seed=0):
    """Max of ``||u - F u - L G u||`` over random unit vectors ``u``."""
    rng = np.random.default_rng(seed)
    d = L.shape[0]
    W = pair.weight
    worst = 0.0
    for _ in range(trials):
        u = rng.standard_normal(d)
        if np.iscomplexobj(pair.F):
            u = u + 1j * rng.standard_normal(d)
        u = u / np.sqrt(np.real(u.conj() @ W @ u))
        r = u - pair.F @ u - L @ (pair.G @ u)
        worst = max(worst, float(np.sqrt(max(np.real(r.conj() @ W @ r), 0.0))))
    return worst


def basis_green_residual(pair, L):
    """Largest ``||e_i - F e_i - L G e_i||`` over the standard basis."""
    d = L.shape[0]
    r = np.eye(d) - pair.F - L @ pair.G
    return float(np.linalg.norm(r, axis=0).max())


@dataclass(frozen=True, eq=False)
class OperatorFamily:
    """Matrices ``L_t`` sampled on a parameter grid."""

    ts: np.ndarray
    matrices: list
    weight: np.ndarray = None

    @classmethod
    def from_callable(cls, func, ts, weight=None):
        ts = np.asarray(ts, dtype=float)
        return cls(ts, [np.asarray(func(t)) for t in ts], weight)

    def __post_init__(self):
        ts = np.asarray(self.ts, dtype=float)
        if ts.ndim != 1 or len(ts) < 2 or np.any(np.diff(ts) <= 0):
            raise ValidationError("ts must be an increasing grid with at least two points")
        if len(self.matrices) != len(ts):
            raise ValidationError("need one matrix per parameter value")
        object.__setattr__(self, "ts", ts)


@dataclass(frozen=True)
class ContinuityReport:
    ts: tuple
    kernel_dims: tuple
    F_steps: tuple
    G_steps: tuple
    max_F_step: float
    max_G_step: float
    delta: float
    richardson_ratio: float
    passed: bool


def _max_step(mats, stride):
    return max((np.linalg.norm(mats[i + stride] - mats[i])
                for i in range(len(mats) - stride)), default=0.0)


def projector_continuity(family, rank_tol=None):
    """Step deviations ``||F_{t+d} - F_t||`` and ``||G_{t+d} - G_t||``.

    Norms are Frobenius. The Richardson check compares the largest step on
    the grid with the largest step on every other grid point: for a
    first-order smooth family the ratio is near 1/2, and the report passes
    when it lies within a factor 1.5 of that.

    Raises
    ------
    KernelDimensionJump
        Adjacent parameters have different numerical kernel dimensions.
    """
    pairs = [harmonic_projector(L, family.weight, rank_tol) for L in family.matrices]
    dims = [p.kernel_dim for p in pairs]
    for i in range(len(dims) - 1):
        if dims[i] != dims[i + 1]:
            jump = np.linalg.norm(pairs[i + 1].F - pairs[i].F)
            raise KernelDimensionJump(
                f"kernel dimension {dims[i]} -> {dims[i + 1]} between t={family.ts[i]:g} "
                f"and t={family.ts[i + 1]:g} (projector jumps by {jump:.3g})")
    Fs = [p.F for p in pairs]
    Gs = [p.G for p in pairs]
    f_steps = tuple(float(np.linalg.norm(b - a)) for a, b in zip(Fs, Fs[1:]))
    g_steps = tuple(float(np.linalg.norm(b - a)) for a, b in zip(Gs, Gs[1:]))
    fine = max(max(f_steps), max(g_steps))
    ratio = float("nan")
    passed = True
    if len(Fs) >= 3 and fine > 0:
        coarse = max(_max_step(Fs, 2), _max_step(Gs, 2))
        ratio = fine / coarse
        passed = 0.5 / 1.5 <= ratio <= 0.5 * 1.5
    delta = float(np.max(np.diff(family.ts)))
    return ContinuityReport(tuple(family.ts), tuple(dims), f_steps, g_steps,
                            max(f_steps), max(g_steps), delta, ratio, passed)


class HarmonicProjector(TransformerMixin, BaseEstimator):
    """Estimator form: ``fit(L)`` then ``transform(u) = F u``.

    Attributes
    ----------
    projector_, green_ : ndarray
    kernel_dim_ : int
    """

    def __init__(self, rank_tol=None, weight=None):
        self.rank_tol = rank_tol
        self.weight = weight

    def fit(self, X, y=None):
        pair = harmonic_projector(X, self.weight, self.rank_tol)
        self.pair_ = pair
        self.projector_ = pair.F
        self.green_ = pair.G
        self.kernel_dim_ = pair.kernel_dim
        self.operator_ = check_square_matrix(X, "L")
        return self

    def transform(self, X):
        """Harmonic part of column vectors (or rows of a 2-D array)."""
        X = np.asarray(X)
        return (self.projector_ @ X.T).T if X.ndim == 2 else self.projector_ @ X

    def green(self, X):
        X = np.asarray(X)
        return (self.green_ @ X.T).T if X.ndim == 2 else self.green_ @ X

    def score(self, X=None, y=None):
        """Negative Green-identity residual on the standard basis."""
        return -basis_green_residual(self.pair_, self.operator_)


# ------------------------------------------------------------ demo families


def rotation(t):
    c, s = np.cos(t), np.sin(t)
    return np.array([[c, -s], [s, c]])


def rotation_family(t):
    """``R(t) diag(0, 1) R(t)^T``: kernel spanned by ``(cos t, sin t)``."""
    r = rotation(t)
    return r @ np.diag([0.0, 1.0]) @ r.T


def diagonal_family(t):
    """``diag(t, 1)``: kernel dimension jumps at ``t = 0``."""
    return np.diag([t, 1.0])


def planted_kernel(d, kernel_dim, seed=0, spectrum=(1.0, 10.0)):
    """Random symmetric PSD matrix with an exact kernel of given dimension."""
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    lam = np.concatenate([np.zeros(kernel_dim),
                          rng.uniform(*spectrum, size=d - kernel_dim)])
    L = (q * lam) @ q.T
    return (L + L.T) / 2, q[:, :kernel_dim]


def planted_family(d, kernel_dim=2, seed=0):
    """Smoothly rotating planted-kernel family ``Q(t) L Q(t)^T``."""
    L0, _ = planted_kernel(d, kernel_dim, seed)
    rng = np.random.default_rng(seed + 1)
    a = rng.standard_normal((d, d))
    skew = (a - a.T) / 2

    def family(t):
        q = scipy.linalg.expm(t * skew)
        return q @ L0 @ q.T

    return family
