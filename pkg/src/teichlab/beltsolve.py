"""Spectral solver for the Beltrami equation on flat tori.

On the torus ``C / (Z l1 + Z l2)`` we look for

    u(z) = z + c0 * conj(z) + phi(z),    phi periodic with zero mean,

solving ``u_zbar = nu u_z``. Writing ``h = phi_zbar`` and ``B`` for the
Beurling transform (the unimodular Fourier multiplier taking ``phi_zbar`` to
``phi_z``), the equation becomes the fixed point

    h = nu (1 + B h) - mean(nu (1 + B h)),    c0 = mean(nu (1 + B h)),

a contraction with factor ``sup |nu|``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .beltrami import BeltramiField, GridDomain, MapGrid, spectral_multipliers
from .exceptions import DegenerateDerivative, NoConvergence, NotAdmissible, ValidationError
from .validation import check_positive, check_power_of_two


@dataclass(frozen=True, eq=False)
class TorusProblem:
    """A periodic Beltrami coefficient on the torus with the given lattice."""

    field: BeltramiField

    def __post_init__(self):
        dom = self.field.domain
        if dom.periodic != (True, True):
            raise ValidationError("torus problems need a doubly periodic field")
        if dom.nx != dom.ny:
            raise ValidationError("torus grids must be square")
        check_power_of_two(dom.nx)

    @classmethod
    def from_function(cls, nu, n, lattice=(1, 1j)):
        domain = GridDomain.torus(check_power_of_two(n), lattice)
        return cls(BeltramiField.from_function(domain, nu))

    @classmethod
    def constant(cls, c, n=16, lattice=(1, 1j)):
        domain = GridDomain.torus(check_power_of_two(n), lattice)
        return cls(BeltramiField.constant(domain, c))

    @property
    def lattice(self):
        return self.field.domain.generators

    @property
    def n(self):
        return self.field.domain.nx


@dataclass(frozen=True, eq=False)
class Solution:
    domain: GridDomain
    c0: complex
    phi: np.ndarray
    nu: np.ndarray
    n_iter: int
    residual: float
    residual_history: tuple = field(default=(), repr=False)

    def _multipliers(self):
        return spectral_multipliers(self.domain)

    @property
    def u(self):
        z = self.domain.points()
        return z + self.c0 * np.conj(z) + self.phi

    def partials(self):
        mz, mzb = self._multipliers()
        ph = np.fft.fft2(self.phi)
        return 1 + np.fft.ifft2(mz * ph), self.c0 + np.fft.ifft2(mzb * ph)

    @property
    def u_z(self):
        return self.partials()[0]

    @property
    def u_zbar(self):
        return self.partials()[1]

    def beltrami_residual(self):
        uz, uzb = self.partials()
        return float(np.abs(uzb - self.nu * uz).max())

    def to_map_grid(self):
        uz, uzb = self.partials()
        return MapGrid(self.domain, self.u, uz, uzb, linear=(1, self.c0))

    def compose(self, h, dh=None, step=1e-6):
        """The map ``h o u`` with partials from the chain rule.

        ``dh`` is the complex derivative of the holomorphic ``h``; without it
        a central difference with ``step`` is used.
        """
        u = self.u
        uz, uzb = self.partials()
        if dh is None:
            d = (h(u + step) - h(u - step)) / (2 * step)
        else:
            d = dh(u)
        return MapGrid(self.domain, h(u), d * uz, d * uzb)

    def conjugate_map(self):
        """The orientation-reversing map ``conj(u)``."""
        uz, uzb = self.partials()
        return MapGrid(self.domain, np.conj(self.u), np.conj(uzb), np.conj(uz))

    def evaluate(self, z):
        """``u`` at arbitrary points by trigonometric interpolation of ``phi``."""
        z = np.asarray(z, dtype=complex)
        s, t = self.domain.to_unit(z)
        n = self.domain.nx
        coef = np.fft.fft2(self.phi) / n ** 2
        p = np.fft.fftfreq(n) * n
        es = np.exp(2j * np.pi * np.multiply.outer(np.ravel(s), p))
        et = np.exp(2j * np.pi * np.multiply.outer(np.ravel(t), p))
        phi = np.einsum("mq,qp,mp->m", et, coef, es)
        return (z + self.c0 * np.conj(z) + phi.reshape(z.shape))

    def lattice_image(self):
        """Images of the lattice generators, ``l + c0 conj(l)``."""
        return tuple(l + self.c0 * np.conj(l) for l in self.domain.generators)

    def modulus(self):
        from .teichdeform import lattice_modulus

        return lattice_modulus(*self.lattice_image())

    def to_dict(self):
        return {
            "c0": [self.c0.real, self.c0.imag],
            "n_iter": self.n_iter,
            "residual": self.residual,
            "nx": self.domain.nx,
            "ny": self.domain.ny,
            "domain": self.domain.to_dict(),
            "periodic": list(self.domain.periodic),
            "phi": [[float(v.real), float(v.imag)] for v in self.phi.ravel()],
        }


def band_limit(values):
    """Zero every Fourier mode with ``|p| >= N/4`` or ``|q| >= N/4``."""
    ny, nx = values.shape
    p = np.abs(np.fft.fftfreq(nx) * nx)
    q = np.abs(np.fft.fftfreq(ny) * ny)
    keep = (q[:, None] < ny // 4) & (p[None, :] < nx // 4)
    return np.fft.ifft2(np.fft.fft2(values) * keep)


class BeltramiSolver(BaseEstimator):
    """Fixed-point spectral solver for ``u_zbar = nu u_z`` on a torus.

    Parameters
    ----------
    tol : float
        Stop once ``sup |u_zbar - nu u_z| < tol``.
    max_iter : int
        Raise :class:`NoConvergence` past this many iterations.
    band_limit : bool
        Low-pass ``nu`` to the lower half of its spectrum before solving.

    Attributes
    ----------
    solution_ : Solution
    c0_ : complex
    n_iter_ : int
    residual_ : float
    residual_history_ : list of float
    """

    def __init__(self, tol=1e-10, max_iter=500, band_limit=True):
        self.tol = tol
        self.max_iter = max_iter
        self.band_limit = band_limit

    def fit(self, X, y=None):
        problem = X if isinstance(X, TorusProblem) else TorusProblem(X)
        tol = check_positive(self.tol, "tol")
        domain = problem.field.domain
        nu = np.array(problem.field.values)
        if self.band_limit:
            nu = band_limit(nu)
            if np.abs(nu).max() >= 1:
                raise NotAdmissible("band-limited coefficient reaches |nu| >= 1")
        mz, mzb = spectral_multipliers(domain)
        beurling = np.zeros_like(mz)
        nz = mzb != 0
        beurling[nz] = mz[nz] / mzb[nz]

        h = np.zeros_like(nu)
        history = []
        for it in range(int(self.max_iter) + 1):
            bh = np.fft.ifft2(beurling * np.fft.fft2(h))
            g = nu * (1 + bh)
            c0 = g.mean()
            res = float(np.abs(c0 + h - g).max())
            history.append(res)
            if res < tol:
                break
            if it == self.max_iter:
                self.residual_history_ = history
                raise NoConvergence(f"residual {res:.3g} after {it} iterations "
                                    f"(sup|nu| = {np.abs(nu).max():.4g})")
            h = g - c0

        hh = np.fft.fft2(h)
        phi_hat = np.zeros_like(hh)
        phi_hat[nz] = hh[nz] / mzb[nz]
        phi = np.fft.ifft2(phi_hat)
        sol = Solution(domain, complex(c0), phi, nu, it, res, tuple(history))
        uz = sol.u_z
        if np.abs(uz).min() <= 1e-12:
            raise DegenerateDerivative("u_z vanishes on the grid")
        self.solution_ = sol
        self.c0_ = sol.c0
        self.n_iter_ = it
        self.residual_ = res
        self.residual_history_ = history
        return self

    def predict(self, Z):
        """Evaluate the fitted map at arbitrary points."""
        return self.solution_.evaluate(Z)

    def transform(self, X=None):
        """Grid samples of the fitted map."""
        return self.solution_.u


def solve_torus(problem, tol=1e-10, max_iter=500, band_limit=True):
    return BeltramiSolver(tol, max_iter, band_limit).fit(problem).solution_


@dataclass(frozen=True, eq=False)
class FamilyResult:
    ts: tuple
    solutions: list
    continuity: float
    steps: tuple

    @property
    def slope(self):
        """Largest step difference divided by the parameter step."""
        dt = np.diff(self.ts)
        if not len(dt):
            return 0.0
        return float(max(s / d for s, d in zip(self.steps, dt)))


def solve_family(problems, ts=None, **solver_params):
    """Solve each problem and measure ``max_t sup_z |u_{t+dt} - u_t|``."""
    problems = list(problems)
    ts = tuple(range(len(problems))) if ts is None else tuple(ts)
    if len(ts) != len(problems):
        raise ValidationError("need one parameter value per problem")
    solutions = [solve_torus(p, **solver_params) for p in problems]
    steps = tuple(float(np.abs(b.u - a.u).max()) for a, b in zip(solutions, solutions[1:]))
    return FamilyResult(ts, solutions, max(steps, default=0.0), steps)


def family_from_function(nu, ts, n, lattice=(1, 1j)):
    """Problems for ``nu(z, t)`` at each ``t``."""
    return [TorusProblem.from_function(lambda z, t=t: nu(z, t), n, lattice) for t in ts]


@dataclass(frozen=True)
class HoloReport:
    beltrami_residual: float
    dbar_u_residual: float
    tol: float

    @property
    def passed(self):
        return self.beltrami_residual < self.tol and self.dbar_u_residual < self.tol


def holo_in_u_check(f, solution, fld=None, tol=1e-9):
    """Test whether ``f`` is a holomorphic function of the solution ``u``.

    Reports the Beltrami residual ``sup |f_zbar - nu f_z|`` and the derivative
    of ``f`` along ``conj(u)``, ``(f_zbar u_z - f_z u_zbar) / J_u``. Both vanish
    exactly when ``f = h o u`` with ``h`` holomorphic.
    """
    nu = solution.nu if fld is None else fld.values
    fz, fzb = f.partials()
    uz, uzb = solution.partials()
    live = ~f.mask
    belt = float(np.abs(fzb - nu * fz)[live].max())
    jac = np.abs(uz) ** 2 - np.abs(uzb) ** 2
    dbar_u = float(np.abs((fzb * uz - fz * uzb) / jac)[live].max())
    return HoloReport(belt, dbar_u, tol)
