"""The Teichmuller deformation of a flat surface.

In flat coordinates ``z`` (where the quadratic differential is ``dz**2``) the
deformed structure has charts

    z' = (z + k * conj(z)) / (1 - k),

a real-linear stretch of the horizontal direction by ``(1 + k) / (1 - k)``.
At a zero of the differential the charts ``z'`` do not extend, and explicit
root charts ``eta`` take over; :func:`eta_even` and :func:`eta_odd` implement
them for zeros of even and odd order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .beltrami import GridDomain, MapGrid, dilatation, mu_of_map
from .exceptions import ChartOverlap, NotATorus, ValidationError
from .flatsurf import FlatSurface, Polygon, Vec, build_surface, _is_exact
from .validation import check_k


@dataclass(frozen=True)
class DeformationParam:
    """The stretch parameter ``k``, validated to lie in ``[0, 1)``."""

    k: object

    def __post_init__(self):
        object.__setattr__(self, "k", check_k(self.k))

    @property
    def dilatation(self):
        return dilatation_of_k(self.k)


def _param(k):
    return k.k if isinstance(k, DeformationParam) else k


def _real_div(a, b):
    if _is_exact(a) and _is_exact(b):
        return Fraction(a) / Fraction(b)
    return a / b


def affine_map(z, k):
    """Apply ``z -> (z + k conj(z)) / (1 - k)``.

    Works on :class:`Vec` (exactly, if ``k`` and ``z`` are rational), on
    Python complex numbers and on numpy arrays.
    """
    k = check_k(_param(k))
    if isinstance(z, Vec):
        return Vec(_real_div(z.re * (1 + k), 1 - k), z.im)
    return (z + k * np.conj(z)) / (1 - k)


def affine_matrix(k):
    """Matrix of the affine map acting on ``(x, y)``."""
    k = check_k(_param(k))
    return ((_real_div(1 + k, 1 - k), 0), (0, 1))


def _solve2(m, rhs):
    """Cramer's rule for a real 2x2 system; exact on Fractions."""
    (a, b), (c, d) = m
    det = a * d - b * c
    if det == 0:
        raise ZeroDivisionError("singular 2x2 system")
    x, y = rhs
    return _real_div(x * d - b * y, det), _real_div(a * y - c * x, det)


def inverse_affine_map(w, k):
    """Invert :func:`affine_map` by solving the 2x2 real-linear system."""
    m = affine_matrix(k)
    if isinstance(w, Vec):
        return Vec(*_solve2(m, (w.re, w.im)))
    w = np.asarray(w, dtype=complex)
    x, y = _solve2(m, (w.real, w.imag))
    out = np.asarray(x) + 1j * np.asarray(y)
    return complex(out) if out.ndim == 0 else out


def _map_surface(surface, fn):
    polys = [Polygon(p.label, tuple(fn(e) for e in p.edges)) for p in surface.polygons]
    return build_surface(polys, surface.gluings)


def deform_surface(surface, k):
    """Replace every edge vector ``v`` by ``affine_map(v, k)``.

    Gluing signs are untouched since the map commutes with ``z -> -z``. The
    pair (input, output) represents the Teichmuller map in flat charts.
    """
    k = check_k(_param(k))
    return _map_surface(surface, lambda v: affine_map(v, k))


def undeform_surface(surface, k):
    k = check_k(_param(k))
    return _map_surface(surface, lambda v: inverse_affine_map(v, k))


def dilatation_of_k(k):
    """``(1 + k) / (1 - k)``, exact for rational ``k``."""
    k = check_k(_param(k))
    return _real_div(1 + k, 1 - k)


# ------------------------------------------------------------ root charts


def _check_order(n, name, odd=False):
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValidationError(f"{name} must be a positive integer, got {n}")
    if odd and n % 2 == 0:
        raise ValidationError(f"{name} must be odd, got {n}")
    return int(n)


def xi_even(z, k, n):
    """``(z**(n+1) + k conj(z)**(n+1)) / (1 - k)``."""
    k = float(check_k(_param(k)))
    z = np.asarray(z, dtype=complex)
    return (z ** (n + 1) + k * np.conj(z) ** (n + 1)) / (1 - k)


def eta_even(z, k, n):
    """Chart at a zero of order ``2n``: ``eta**(n+1) == xi_even``.

    ``1 + k (conj z / z)**(n+1)`` has positive real part because ``k < 1``,
    so the principal ``(n+1)``-st root is single valued.
    """
    k = float(check_k(_param(k)))
    n = _check_order(n, "n")
    z = np.asarray(z, dtype=complex)
    safe = np.where(z == 0, 1.0, z)
    phase = (np.conj(safe) / safe) ** (n + 1)
    eta = safe * ((1 + k * phase) / (1 - k)) ** (1.0 / (n + 1))
    eta = np.where(z == 0, 0.0, eta)
    return complex(eta) if eta.ndim == 0 else eta


def xi_odd(zeta, k, m):
    """``(zeta**(m+2) + k conj(zeta)**(m+2)) / (1 - k)`` on the double cover."""
    k = float(check_k(_param(k)))
    zeta = np.asarray(zeta, dtype=complex)
    return (zeta ** (m + 2) + k * np.conj(zeta) ** (m + 2)) / (1 - k)


def eta_odd(z, k, m):
    """Chart at a zero of odd order ``m``: ``eta**(m+2) == xi_odd(zeta)**2``
    whenever ``zeta**2 == z``."""
    k = float(check_k(_param(k)))
    m = _check_order(m, "m", odd=True)
    z = np.asarray(z, dtype=complex)
    safe = np.where(z == 0, 1.0, z)
    phase = (np.abs(safe) / safe) ** (m + 2)
    eta = safe * ((1 + k * phase) / (1 - k)) ** (2.0 / (m + 2))
    eta = np.where(z == 0, 0.0, eta)
    return complex(eta) if eta.ndim == 0 else eta


CHART_KINDS = ("regular", "even", "odd")


@dataclass(frozen=True)
class ChartSample:
    """One chart evaluation: base point, chart value and which chart was used.

    ``order`` is ``n`` for the even chart (zero of order ``2n``), ``m`` for
    the odd chart and ``None`` for the regular chart ``z'``.
    """

    base: complex
    value: complex
    kind: str
    order: int = None

    def __post_init__(self):
        if self.kind not in CHART_KINDS:
            raise ValidationError(f"chart kind must be one of {CHART_KINDS}, got {self.kind!r}")
        if not np.isfinite(self.value):
            raise ValidationError("chart value is not finite")
        if self.kind != "regular" and self.base == 0 and self.value != 0:
            raise ValidationError("root charts send the zero to 0")


def sample_chart(z, k, kind="regular", order=None):
    """Evaluate a chart at the points ``z`` and wrap each result."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if kind == "regular":
        vals = affine_map(z, float(check_k(_param(k))))
    elif kind == "even":
        vals = eta_even(z, _param(k), order)
    elif kind == "odd":
        vals = eta_odd(z, _param(k), order)
    else:
        raise ValidationError(f"chart kind must be one of {CHART_KINDS}, got {kind!r}")
    vals = np.atleast_1d(vals)
    return [ChartSample(complex(b), complex(v), kind, order) for b, v in zip(z, vals)]


# ----------------------------------------------- chart transition residual

_DIRECTIONS = (1.0, np.exp(0.25j * np.pi))


def stencil_wirtinger(f, z, h):
    """Wirtinger derivatives ``(f_z, f_zbar)`` by central differences.

    Two orthogonal pairs of directions are used, the coordinate axes and the
    axes rotated by 45 degrees, and the results averaged. Each pair alone is
    second order; the average also cancels the ``f'''`` error term for
    holomorphic ``f``, so it is exact on polynomials of degree three while
    staying second order on general smooth functions.
    """
    z = np.asarray(z, dtype=complex)
    fz = np.zeros_like(z)
    fzb = np.zeros_like(z)
    for u in _DIRECTIONS:
        du = (f(z + h * u) - f(z - h * u)) / (2 * h)
        dv = (f(z + 1j * h * u) - f(z - 1j * h * u)) / (2 * h)
        fz += np.conj(u) / 2 * (du - 1j * dv)
        fzb += u / 2 * (du + 1j * dv)
    return fz / len(_DIRECTIONS), fzb / len(_DIRECTIONS)


def transition_dbar(target, chart, base, h):
    """``d(target o chart^-1) / d(conj eta)`` sampled at ``base``.

    Uses ``(T_zb eta_z - T_z eta_zb) / (|eta_z|**2 - |eta_zb|**2)`` with both
    functions differentiated in the base variable.
    """
    tz, tzb = stencil_wirtinger(target, base, h)
    ez, ezb = stencil_wirtinger(chart, base, h)
    jac = np.abs(ez) ** 2 - np.abs(ezb) ** 2
    return (tzb * ez - tz * ezb) / jac


def embedded_radius(surface, vertex_class):
    """Radius below which the flat disk around a vertex class is embedded.

    Conservative: the disk is a union of corner sectors, each kept away from
    the non-incident edges of its polygon and from the neighbouring corners.
    """
    best = math.inf
    for label, i in surface.vertex_classes[vertex_class]:
        poly = surface.polygon(label)
        pts = [complex(p) for p in poly.vertices()]
        n = len(pts)
        c = pts[i]
        best = min(best, abs(poly.edges[i]) / 2, abs(poly.edges[i - 1]) / 2)
        for j in range(n):
            if j in (i, (i - 1) % n):
                continue
            a, b = pts[j], pts[(j + 1) % n]
            t = np.clip(((c - a) * np.conj(b - a)).real / abs(b - a) ** 2, 0, 1)
            best = min(best, abs(c - (a + t * (b - a))))
    return best


def chart_transition_residual(surface, k, cone=None, radius=0.25, h=1e-3, n_samples=64):
    """Largest discrete Cauchy-Riemann residual of chart transitions.

    With ``cone`` given, the transition runs from the root chart ``eta`` at
    that zero to the deformed flat charts ``z'`` on a circle of flat radius
    ``radius`` around it. With ``cone=None`` the transition between two
    overlapping ``z'`` charts at regular points is measured instead.
    """
    k = check_k(_param(k))
    kf = float(k)
    if h <= 0 or radius <= 0:
        raise ValidationError("radius and h must be positive")
    theta = 2 * np.pi * (np.arange(n_samples) + 0.5) / n_samples
    circle = np.exp(1j * theta)
    if cone is None:
        # two omega-coordinates differ by z -> sigma z + c
        sigma = -1 if any(g.sign == -1 for g in surface.gluings) else 1
        shift = complex(surface.polygons[0].edges[0])

        def target(zp):
            return affine_map(sigma * inverse_affine_map(zp, kf) + shift, kf)

        base = radius * circle
        resid = transition_dbar(target, lambda zp: zp, base, h)
        return float(np.max(np.abs(resid)))

    if radius >= embedded_radius(surface, cone.vertex_class):
        raise ChartOverlap(f"radius {radius} reaches beyond the embedded disk around "
                           f"vertex class {cone.vertex_class}")
    if cone.order % 2 == 0:
        n = cone.order // 2
        base = radius ** (1.0 / (n + 1)) * circle
        resid = transition_dbar(lambda z: xi_even(z, kf, n),
                                lambda z: eta_even(z, kf, n), base, h)
    else:
        m = cone.order
        # work on the double cover zeta**2 = z where both charts are single valued
        base = radius ** (1.0 / (m + 2)) * circle
        resid = transition_dbar(lambda s: xi_odd(s, kf, m),
                                lambda s: eta_odd(s * s, kf, m), base, h)
    return float(np.max(np.abs(resid)))


# ------------------------------------------------------------------ paths


@dataclass(frozen=True)
class PathPoint:
    t: object
    surface: FlatSurface
    dilatation: object


def teich_path(surface, k, steps):
    """Surfaces ``deform_surface(surface, t k)`` on a uniform grid in ``t``."""
    k = check_k(_param(k))
    if int(steps) != steps or steps < 2:
        raise ValidationError(f"steps must be an integer >= 2, got {steps}")
    exact = _is_exact(k)
    out = []
    for j in range(steps):
        t = Fraction(j, steps - 1) if exact else j / (steps - 1)
        kt = t * k
        out.append(PathPoint(t, deform_surface(surface, kt), dilatation_of_k(kt)))
    return out


# ----------------------------------------------------------- torus moduli


def _hnf_basis(int_vectors):
    """Z-basis of the span of integer 2-vectors (Euclid on each coordinate)."""
    a = (0, 0)
    g = 0
    for v in int_vectors:
        while v[0] != 0:
            q = a[0] // v[0]
            a, v = v, (a[0] - q * v[0], a[1] - q * v[1])
        g = math.gcd(g, v[1])
    if a[0] == 0 or g == 0:
        raise NotATorus("translation vectors do not span a lattice")
    return a, (0, g)


def translation_lattice(surface):
    """Generators of the lattice of a single-polygon translation torus."""
    if surface.genus != 1:
        raise NotATorus(f"surface has genus {surface.genus}")
    if len(surface.polygons) != 1 or any(g.sign != 1 for g in surface.gluings):
        raise NotATorus("expected one polygon glued by translations")
    poly = surface.polygons[0]
    pts = poly.vertices()
    gens = [pts[g.b[1]] - poly.edges[g.a[1]] - pts[g.a[1]] for g in surface.gluings]
    b1 = next(v for v in gens if not v.is_zero())
    b2 = next((v for v in gens if b1.cross(v) != 0 and abs(float(b1.cross(v))) > 1e-12), None)
    if b2 is None:
        raise NotATorus("translation vectors are collinear")
    exact = all(v.exact for v in gens)
    coords = []
    for v in gens:
        x, y = _solve2(((b1.re, b2.re), (b1.im, b2.im)), (v.re, v.im))
        if not exact:
            x, y = Fraction(x).limit_denominator(10 ** 6), Fraction(y).limit_denominator(10 ** 6)
        coords.append((x, y))
    den = 1
    for x, y in coords:
        den = den * Fraction(x).denominator // math.gcd(den, Fraction(x).denominator)
        den = den * Fraction(y).denominator // math.gcd(den, Fraction(y).denominator)
    ints = [(int(x * den), int(y * den)) for x, y in coords]
    (p1, q1), (p2, q2) = _hnf_basis(ints)
    scale = Fraction(1, den) if exact else 1.0 / den
    l1 = (b1 * p1 + b2 * q1) * scale
    l2 = (b1 * p2 + b2 * q2) * scale
    return l1, l2


def reduce_modulus(tau):
    """Move ``tau`` (Im > 0) into the standard fundamental domain.

    Accepts a :class:`Vec` (reduced exactly) or a complex number.
    """
    exact = isinstance(tau, Vec) and tau.exact
    if not exact:
        tau = complex(tau)
        tau = Vec(tau.real, tau.imag)
    if not tau.im > 0:
        raise ValidationError("modulus must lie in the upper half plane")
    eps = 0 if exact else 1e-12
    for _ in range(10_000):
        shift = math.floor(tau.re + (Fraction(1, 2) if exact else 0.5))
        tau = Vec(tau.re - shift, tau.im)
        if tau.abs2() < 1 - eps:
            tau = Vec(-1, 0) / tau
        else:
            break
    half = Fraction(1, 2) if exact else 0.5
    if tau.re <= -half + eps:
        tau = Vec(tau.re + 1, tau.im)
    if abs(float(tau.abs2()) - 1) <= eps and tau.re < 0:
        tau = Vec(-tau.re, tau.im)
    return tau if exact else complex(tau)


def lattice_modulus(l1, l2):
    """Reduced modulus of the lattice spanned by ``l1`` and ``l2``."""
    exact = isinstance(l1, Vec) and isinstance(l2, Vec) and l1.exact and l2.exact
    if exact:
        tau = l2 / l1
    else:
        tau = complex(l2) / complex(l1)
        tau = Vec(tau.real, tau.imag)
    if tau.im < 0:
        tau = -tau
    if tau.im == 0:
        raise NotATorus("lattice generators are collinear")
    return reduce_modulus(tau)


def torus_modulus(surface):
    """Reduced modulus: ``Im > 0``, ``|Re| <= 1/2``, ``|tau| >= 1``."""
    return lattice_modulus(*translation_lattice(surface))


# ----------------------------------------------------- extremality probe


def random_shear_modes(rng, n_modes=3, max_mode=3, amplitude=0.02):
    """Random Fourier modes ``(p, q, a)`` of a small periodic displacement.

    Each mode's derivative is bounded by ``amplitude``.
    """
    modes = []
    for _ in range(n_modes):
        p, q = 0, 0
        while p == 0 and q == 0:
            p, q = rng.integers(-max_mode, max_mode + 1, size=2)
        a = amplitude * rng.uniform(0.2, 1.0) * np.exp(2j * np.pi * rng.uniform())
        modes.append((int(p), int(q), a / (2 * np.pi * np.hypot(p, q))))
    return modes


def perturbed_affine_map(k, modes, n=64):
    """``A_k(z + phi(z))`` on the square torus, ``phi`` a sum of modes.

    The map is isotopic to the affine map ``A_k``; partials are left to the
    spectral differentiation of the periodic part.
    """
    kf = float(check_k(_param(k)))
    domain = GridDomain.torus(n)
    z = domain.points()
    phi = sum(a * np.exp(2j * np.pi * (p * z.real + q * z.imag)) for p, q, a in modes)
    w = affine_map(z + phi, kf)
    return MapGrid(domain, w, linear=(1 / (1 - kf), kf / (1 - kf)))


def extremality_probe(k, n_maps=50, n=64, seed=0, **mode_kw):
    """Measured dilatations of random periodic perturbations of ``A_k``.

    Every entry should be at least ``(1 + k) / (1 - k)``; this is a
    necessary-condition check of the affine map's extremality, not a proof.
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n_maps):
        fmap = perturbed_affine_map(k, random_shear_modes(rng, **mode_kw), n)
        out.append(dilatation(mu_of_map(fmap)))
    return np.array(out)


class TeichmullerDeformation(TransformerMixin, BaseEstimator):
    """Transformer form of the deformation.

    ``transform`` accepts a :class:`FlatSurface` or complex points in flat
    coordinates; ``inverse_transform`` undoes it.
    """

    def __init__(self, k=0.0):
        self.k = k

    def fit(self, X=None, y=None):
        self.k_ = check_k(self.k)
        self.dilatation_ = dilatation_of_k(self.k_)
        return self

    def _checked_k(self):
        if not hasattr(self, "k_"):
            self.fit()
        return self.k_

    def transform(self, X):
        k = self._checked_k()
        if isinstance(X, FlatSurface):
            return deform_surface(X, k)
        return affine_map(np.asarray(X, dtype=complex), float(k))

    def inverse_transform(self, X):
        k = self._checked_k()
        if isinstance(X, FlatSurface):
            return undeform_surface(X, k)
        return inverse_affine_map(np.asarray(X, dtype=complex), float(k))

    def path(self, surface, steps):
        return teich_path(surface, self._checked_k(), steps)


__all__ = [
    "DeformationParam", "ChartSample", "sample_chart", "affine_map", "inverse_affine_map", "affine_matrix", "deform_surface",
    "undeform_surface", "dilatation_of_k", "xi_even", "eta_even", "xi_odd",
    "eta_odd", "stencil_wirtinger", "transition_dbar", "embedded_radius",
    "chart_transition_residual", "PathPoint", "teich_path",
    "translation_lattice", "reduce_modulus", "lattice_modulus",
    "torus_modulus", "random_shear_modes", "perturbed_affine_map",
    "extremality_probe", "TeichmullerDeformation",
]
