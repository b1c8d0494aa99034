"""Grid calculus of Beltrami coefficients.

Fields and maps are sampled on a parallelogram ``origin + s*l1 + t*l2`` with
``(s, t)`` on a uniform grid of the unit square. Periodic axes exclude the
right endpoint and are differentiated spectrally; other axes use second order
central differences with one-sided stencils at the boundary.

Arrays are indexed ``[t_index, s_index]``: rows run along the second
generator, matching the row-major JSON layout.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from numbers import Real

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .exceptions import DegenerateJacobian, NotAdmissible, NotInverse, ValidationError
from .validation import check_complex_grid


@dataclass(frozen=True)
class GridDomain:
    """Sampling layout: parallelogram, grid shape and periodicity."""

    nx: int
    ny: int
    origin: complex = 0j
    generators: tuple = (1 + 0j, 1j)
    periodic: tuple = (False, False)

    def __post_init__(self):
        object.__setattr__(self, "origin", complex(self.origin))
        l1, l2 = (complex(g) for g in self.generators)
        object.__setattr__(self, "generators", (l1, l2))
        object.__setattr__(self, "periodic", tuple(bool(p) for p in self.periodic))
        if (np.conj(l1) * l2).imag <= 0:
            raise ValidationError("generators must be positively oriented")
        for n, p in ((self.nx, self.periodic[0]), (self.ny, self.periodic[1])):
            if n < (2 if p else 3):
                raise ValidationError("grid too small")

    @classmethod
    def rectangle(cls, x0, x1, y0, y1, nx, ny=None, periodic=(False, False)):
        ny = nx if ny is None else ny
        return cls(nx, ny, complex(x0, y0), (x1 - x0, 1j * (y1 - y0)), periodic)

    @classmethod
    def torus(cls, n, lattice=(1, 1j)):
        return cls(n, n, 0j, tuple(lattice), (True, True))

    @property
    def shape(self):
        return (self.ny, self.nx)

    @property
    def det(self):
        l1, l2 = self.generators
        return l1 * np.conj(l2) - np.conj(l1) * l2

    def axis_coords(self):
        s = np.arange(self.nx) / (self.nx if self.periodic[0] else self.nx - 1)
        t = np.arange(self.ny) / (self.ny if self.periodic[1] else self.ny - 1)
        return s, t

    def points(self):
        s, t = self.axis_coords()
        l1, l2 = self.generators
        return self.origin + s[None, :] * l1 + t[:, None] * l2

    def to_unit(self, z):
        """Parallelogram coordinates ``(s, t)`` of points ``z``."""
        l1, l2 = self.generators
        w = np.asarray(z, dtype=complex) - self.origin
        det = (np.conj(l1) * l2).imag
        s = (np.conj(w) * l2).imag / det
        t = (np.conj(l1) * w).imag / det
        return s, t

    def to_dict(self):
        return {"origin": [self.origin.real, self.origin.imag],
                "generators": [[g.real, g.imag] for g in self.generators]}


def spectral_multipliers(domain):
    """Fourier multipliers of ``d/dz`` and ``d/dzbar`` for a periodic grid."""
    p = np.fft.fftfreq(domain.nx) * domain.nx
    q = np.fft.fftfreq(domain.ny) * domain.ny
    ds = 2j * np.pi * p[None, :]
    dt = 2j * np.pi * q[:, None]
    l1, l2 = domain.generators
    d = domain.det
    return (np.conj(l2) * ds - np.conj(l1) * dt) / d, (-l2 * ds + l1 * dt) / d


def _axis_derivative(values, axis, n, periodic, spacing):
    if periodic:
        k = 2j * np.pi * np.fft.fftfreq(n) * n
        shape = [1, 1]
        shape[axis] = n
        return np.fft.ifft(np.fft.fft(values, axis=axis) * k.reshape(shape), axis=axis)
    return np.gradient(values, spacing, axis=axis, edge_order=2)


def wirtinger(values, domain, linear=(0, 0), scheme="auto"):
    """Wirtinger partials ``(w_z, w_zbar)`` of gridded samples.

    ``linear = (a, b)`` names an affine part ``a z + b conj(z)`` removed before
    differentiating, so that ``w - a z - b conj(z)`` can be periodic.
    ``scheme="fd"`` forces finite differences on every axis.
    """
    a, b = linear
    z = domain.points()
    rem = np.asarray(values, dtype=complex) - a * z - b * np.conj(z)
    s, t = domain.axis_coords()
    spectral = scheme != "fd"
    ws = _axis_derivative(rem, 1, domain.nx, spectral and domain.periodic[0], s[1] - s[0])
    wt = _axis_derivative(rem, 0, domain.ny, spectral and domain.periodic[1], t[1] - t[0])
    l1, l2 = domain.generators
    d = domain.det
    wz = (np.conj(l2) * ws - np.conj(l1) * wt) / d
    wzb = (-l2 * ws + l1 * wt) / d
    return wz + a, wzb + b


def beltrami_coefficient(wz, wzbar):
    """Raw ratio ``w_zbar / w_z`` without admissibility checks."""
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.asarray(wzbar) / np.asarray(wz)


@dataclass(frozen=True, eq=False)
class BeltramiField:
    """Samples of ``nu`` for ``mu = nu d/dz (x) dzbar``; ``sup |nu| < 1``.

    ``mask`` marks samples excluded from norms and residuals (points where
    the underlying map is not smooth).
    """

    domain: GridDomain
    values: np.ndarray
    mask: np.ndarray = None

    def __post_init__(self):
        vals = check_complex_grid(self.values)
        if vals.shape != self.domain.shape:
            raise ValidationError(f"values have shape {vals.shape}, domain expects {self.domain.shape}")
        mask = np.zeros(vals.shape, bool) if self.mask is None else np.asarray(self.mask, bool)
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "mask", mask)
        bad = (np.abs(vals) >= 1) & ~mask
        if bad.any():
            raise NotAdmissible(f"{int(bad.sum())} samples have |nu| >= 1 "
                                f"(max {np.abs(vals[~mask]).max():.6g})")

    @classmethod
    def from_function(cls, domain, func):
        return cls(domain, np.broadcast_to(func(domain.points()), domain.shape))

    @classmethod
    def constant(cls, domain, c):
        return cls(domain, np.full(domain.shape, complex(c)))

    def to_dict(self):
        return grid_to_dict(self.domain, self.values)

    @classmethod
    def from_dict(cls, doc):
        domain, values = grid_from_dict(doc)
        return cls(domain, values)


@dataclass(frozen=True, eq=False)
class MapGrid:
    """Samples of an orientation-preserving map ``w``.

    Partials ``wz``/``wzbar`` may be given exactly; otherwise they are taken
    numerically. ``func`` (optional) evaluates the map off the grid.
    """

    domain: GridDomain
    values: np.ndarray
    wz: np.ndarray = None
    wzbar: np.ndarray = None
    linear: tuple = (0, 0)
    func: object = field(default=None, repr=False)
    mask: np.ndarray = None
    scheme: str = "auto"

    def __post_init__(self):
        vals = check_complex_grid(self.values)
        if vals.shape != self.domain.shape:
            raise ValidationError(f"values have shape {vals.shape}, domain expects {self.domain.shape}")
        object.__setattr__(self, "values", vals)
        if (self.wz is None) != (self.wzbar is None):
            raise ValidationError("give both exact partials or neither")
        mask = np.zeros(vals.shape, bool) if self.mask is None else np.asarray(self.mask, bool)
        object.__setattr__(self, "mask", mask)

    @classmethod
    def from_function(cls, domain, func, dz=None, dzbar=None, **kw):
        """Sample ``func`` on the grid; ``dz``/``dzbar`` give exact partials."""
        z = domain.points()

        def full(f):
            return np.broadcast_to(np.asarray(f(z), dtype=complex), domain.shape).copy()

        wz = full(dz) if dz is not None else None
        wzb = full(dzbar) if dzbar is not None else None
        return cls(domain, full(func), wz, wzb, func=func, **kw)

    @property
    def has_exact_partials(self):
        return self.wz is not None

    def partials(self):
        if self.has_exact_partials:
            return np.asarray(self.wz, complex), np.asarray(self.wzbar, complex)
        return wirtinger(self.values, self.domain, self.linear, self.scheme)

    def jacobian(self):
        wz, wzb = self.partials()
        return np.abs(wz) ** 2 - np.abs(wzb) ** 2

    def evaluate(self, z):
        """Map values at arbitrary points (closed form or bilinear interpolation)."""
        if self.func is not None:
            return np.asarray(self.func(np.asarray(z, dtype=complex)), dtype=complex)
        return _interpolate(self.domain, self.values, z)


def _interpolate(domain, values, z):
    s, t = domain.axis_coords()
    su, tu = domain.to_unit(z)
    pts = np.stack([np.ravel(tu), np.ravel(su)], axis=-1)
    vals = np.asarray(values, dtype=complex)
    parts = [RegularGridInterpolator((t, s), part, bounds_error=False, fill_value=np.nan)(pts)
             for part in (vals.real, vals.imag)]
    return (parts[0] + 1j * parts[1]).reshape(np.shape(z))


def mu_of_map(fmap):
    """Beltrami coefficient ``w_zbar / w_z`` of a sampled map.

    Raises
    ------
    DegenerateJacobian
        ``w_z`` vanishes at some unmasked sample.
    NotAdmissible
        ``|nu| >= 1`` somewhere, i.e. the map is not orientation preserving.
    """
    wz, wzb = fmap.partials()
    live = ~fmap.mask
    scale = max(np.abs(wz[live]).max(initial=0), np.abs(wzb[live]).max(initial=0), 1e-300)
    if np.any((np.abs(wz) <= 1e-14 * scale) & live):
        raise DegenerateJacobian("w_z vanishes on the grid")
    nu = np.where(live, beltrami_coefficient(wz, wzb), 0)
    return BeltramiField(fmap.domain, nu, fmap.mask)


def sup_norm(fld):
    """Grid supremum of ``|nu|`` over unmasked samples."""
    vals = np.abs(fld.values[~fld.mask])
    return float(vals.max(initial=0.0))


def dilatation(fld_or_norm):
    """``K = (1 + |mu|) / (1 - |mu|)``; exact when given a rational norm."""
    if isinstance(fld_or_norm, BeltramiField):
        n = sup_norm(fld_or_norm)
    else:
        n = fld_or_norm
        if isinstance(n, bool) or not isinstance(n, Real):
            raise TypeError("expected a BeltramiField or a real norm")
    if n < 0:
        raise ValidationError("norm must be non-negative")
    if n >= 1:
        return float("inf")
    if isinstance(n, (int, Fraction)):
        return (1 + Fraction(n)) / (1 - Fraction(n))
    return (1 + n) / (1 - n)


@dataclass(frozen=True)
class InverseLawReport:
    norm: float
    inverse_norm: float
    difference: float
    pointwise: float
    composition_error: float
    passed: bool


def inverse_law_check(fmap, inverse_map, tol=1e-10, inverse_tol=1e-8):
    """Compare ``||mu_F||`` with ``||mu_{F^-1}||`` and ``|mu|`` pointwise.

    Raises :class:`NotInverse` when ``F^-1(F(p))`` misses ``p`` by more than
    ``inverse_tol`` on the samples where it can be evaluated.
    """
    z = fmap.domain.points()
    back = inverse_map.evaluate(fmap.values)
    ok = np.isfinite(back) & ~fmap.mask
    if not ok.any():
        raise NotInverse("image of the map lies outside the inverse's domain")
    err = float(np.abs(back[ok] - z[ok]).max())
    if err > inverse_tol:
        raise NotInverse(f"composition misses the identity by {err:.3g}")
    mu_f = mu_of_map(fmap)
    mu_g = mu_of_map(inverse_map)
    n_f, n_g = sup_norm(mu_f), sup_norm(mu_g)
    at_image = _interpolate(inverse_map.domain, np.abs(mu_g.values).astype(complex), fmap.values).real
    both = ok & np.isfinite(at_image)
    pointwise = float(np.abs(np.abs(mu_f.values[both]) - at_image[both]).max(initial=0.0))
    diff = abs(n_f - n_g)
    return InverseLawReport(n_f, n_g, diff, pointwise, err, diff < tol and pointwise < tol)


@dataclass(frozen=True)
class CompositionReport:
    deviation: float
    passed: bool


def composition_law_check(fmap, post_map, tol=1e-8):
    """Check ``mu(h o F) == mu(F)`` for a post-composition ``h``.

    ``post_map`` is a callable on complex arrays or a :class:`MapGrid` with a
    closed form. The composed samples are differentiated on the grid with
    finite differences; ``mu(F)`` uses the map's own partials.
    """
    h = post_map.evaluate if isinstance(post_map, MapGrid) else post_map
    composed = MapGrid(fmap.domain, h(fmap.values), mask=fmap.mask, scheme="fd")
    wz, wzb = fmap.partials()
    cz, czb = composed.partials()
    live = ~fmap.mask
    dev = np.abs(beltrami_coefficient(cz, czb) - beltrami_coefficient(wz, wzb))[live]
    dev = float(np.nan_to_num(dev, nan=np.inf).max(initial=0.0))
    return CompositionReport(dev, dev < tol)


def chain_rule_residual(f, w, fld, f_wbar=None):
    """Sup of ``|f_zb - nu f_z - (1 - |nu|^2) f_wb conj(w_z)|``.

    ``f_wbar`` may be supplied in closed form; otherwise it is recovered from
    the partials of ``f`` and ``w`` by the inverse chain rule.
    """
    fz, fzb = f.partials()
    wz, wzb = w.partials()
    nu = fld.values
    if f_wbar is None:
        f_wbar = (fzb * wz - fz * wzb) / (np.abs(wz) ** 2 - np.abs(wzb) ** 2)
    f_wbar = np.broadcast_to(np.asarray(f_wbar, dtype=complex), nu.shape)
    lhs = fzb - nu * fz
    rhs = (1 - np.abs(nu) ** 2) * f_wbar * np.conj(wz)
    live = ~(fld.mask | f.mask | w.mask)
    return float(np.abs(lhs - rhs)[live].max(initial=0.0))


# ---------------------------------------------------------------- JSON


def grid_to_dict(domain, values):
    vals = np.asarray(values, dtype=complex).ravel()
    return {"nx": domain.nx, "ny": domain.ny, "domain": domain.to_dict(),
            "periodic": list(domain.periodic),
            "values": [[float(v.real), float(v.imag)] for v in vals]}


def grid_from_dict(doc):
    dom = doc["domain"]
    nx, ny = int(doc["nx"]), int(doc["ny"])
    periodic = tuple(doc.get("periodic", (False, False)))
    if isinstance(dom, dict):
        origin = complex(*dom.get("origin", (0, 0)))
        gens = tuple(complex(*g) for g in dom["generators"])
        domain = GridDomain(nx, ny, origin, gens, periodic)
    else:
        x0, x1, y0, y1 = dom
        domain = GridDomain.rectangle(x0, x1, y0, y1, nx, ny, periodic)
    vals = np.array([complex(re, im) for re, im in doc["values"]], dtype=complex)
    if vals.size != nx * ny:
        raise ValidationError(f"expected {nx * ny} values, got {vals.size}")
    return domain, vals.reshape(ny, nx)


def with_mask(obj, mask):
    return replace(obj, mask=np.asarray(mask, bool))
