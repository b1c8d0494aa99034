"""Flat polygonal models of Riemann surfaces with a quadratic differential.

A surface is a finite set of positively oriented polygons whose edges are
identified in pairs by maps ``z -> z + c`` (translation) or ``z -> -z + c``
(half-translation). Edge vectors are written in coordinates where the
quadratic differential is ``dz**2``, so the differential never appears
explicitly: it is the flat geometry itself.

Edge vectors are stored as :class:`Vec` values whose coordinates are either
exact :class:`fractions.Fraction` objects or floats. Rational input stays
rational through scaling by rationals and through the affine deformation,
which keeps round trips exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real

from .exceptions import (
    InvalidConeAngle,
    NonPositiveArea,
    SimplePoleAngle,
    UnmatchedEdge,
    ValidationError,
    VectorMismatch,
)
from .validation import as_fraction_or_float

ANGLE_TOL = 1e-9
VECTOR_RTOL = 1e-9


def _is_exact(x):
    return isinstance(x, (int, Fraction))


def exact_sqrt(x):
    """Square root that stays a Fraction for perfect rational squares."""
    if _is_exact(x) and x >= 0:
        x = Fraction(x)
        p, q = math.isqrt(x.numerator), math.isqrt(x.denominator)
        if p * p == x.numerator and q * q == x.denominator:
            return Fraction(p, q)
    return math.sqrt(x)


@dataclass(frozen=True)
class Vec:
    """A complex number with exact or floating coordinates."""

    re: Real
    im: Real

    @classmethod
    def of(cls, value):
        if isinstance(value, Vec):
            return value
        if isinstance(value, complex):
            return cls(value.real, value.imag)
        if isinstance(value, Real):
            return cls(value, 0)
        re, im = value
        return cls(as_fraction_or_float(re), as_fraction_or_float(im))

    @property
    def exact(self):
        return _is_exact(self.re) and _is_exact(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __add__(self, other):
        other = Vec.of(other)
        return Vec(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = Vec.of(other)
        return Vec(self.re - other.re, self.im - other.im)

    def __neg__(self):
        return Vec(-self.re, -self.im)

    def __mul__(self, other):
        if isinstance(other, Real):
            return Vec(self.re * other, self.im * other)
        other = Vec.of(other)
        return Vec(self.re * other.re - self.im * other.im,
                   self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Real):
            return Vec(self.re / other, self.im / other)
        other = Vec.of(other)
        d = other.abs2()
        return Vec((self.re * other.re + self.im * other.im) / d,
                   (self.im * other.re - self.re * other.im) / d)

    def conjugate(self):
        return Vec(self.re, -self.im)

    def abs2(self):
        return self.re * self.re + self.im * self.im

    def __abs__(self):
        return math.hypot(float(self.re), float(self.im))

    def cross(self, other):
        return self.re * other.im - self.im * other.re

    def dot(self, other):
        return self.re * other.re + self.im * other.im

    def is_zero(self, scale=1.0):
        if self.exact:
            return self.re == 0 and self.im == 0
        return abs(self) <= VECTOR_RTOL * max(scale, 1.0)

    def __repr__(self):
        return f"Vec({self.re!r}, {self.im!r})"


def _segments_cross(p1, p2, q1, q2):
    """True if closed segments p1p2 and q1q2 intersect (floats)."""

    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return 0 if abs(v) < 1e-14 else (1 if v > 0 else -1)

    def on_seg(a, b, c):
        return (min(a[0], b[0]) - 1e-14 <= c[0] <= max(a[0], b[0]) + 1e-14
                and min(a[1], b[1]) - 1e-14 <= c[1] <= max(a[1], b[1]) + 1e-14)

    o1, o2 = orient(p1, p2, q1), orient(p1, p2, q2)
    o3, o4 = orient(q1, q2, p1), orient(q1, q2, p2)
    if o1 != o2 and o3 != o4:
        return True
    return ((o1 == 0 and on_seg(p1, p2, q1)) or (o2 == 0 and on_seg(p1, p2, q2))
            or (o3 == 0 and on_seg(q1, q2, p1)) or (o4 == 0 and on_seg(q1, q2, p2)))


@dataclass(frozen=True)
class Polygon:
    """A simple, positively oriented polygon given by its edge vectors."""

    label: str
    edges: tuple

    def __post_init__(self):
        edges = tuple(Vec.of(e) for e in self.edges)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "label", str(self.label))
        if len(edges) < 3:
            raise ValidationError(f"polygon {self.label!r} needs at least 3 edges")
        perimeter = sum(abs(e) for e in edges)
        if any(e.is_zero(perimeter) for e in edges):
            raise ValidationError(f"polygon {self.label!r} has a zero-length edge")
        if not sum(edges, Vec(0, 0)).is_zero(perimeter):
            raise ValidationError(f"polygon {self.label!r} is not closed")
        if not self.area() > 0:
            raise NonPositiveArea(f"polygon {self.label!r} has signed area {self.area()}")
        self._check_simple()

    def __len__(self):
        return len(self.edges)

    def vertices(self):
        """Corner positions, starting at the origin; corner i starts edge i."""
        pts = [Vec(0, 0)]
        for e in self.edges[:-1]:
            pts.append(pts[-1] + e)
        return pts

    def area(self):
        pts = self.vertices()
        n = len(pts)
        twice = sum((pts[i].cross(pts[(i + 1) % n]) for i in range(n)), 0)
        return Fraction(twice, 2) if isinstance(twice, int) else twice / 2

    def interior_angle(self, i):
        """Interior angle at corner ``i`` (between edge i-1 and edge i)."""
        out_, back = self.edges[i], -self.edges[i - 1]
        a = math.atan2(float(out_.cross(back)), float(out_.dot(back)))
        return a if a > 0 else a + 2 * math.pi

    def _check_simple(self):
        pts = [(float(p.re), float(p.im)) for p in self.vertices()]
        n = len(pts)
        for i in range(n):
            for j in range(i + 1, n):
                if j == i + 1 or (i == 0 and j == n - 1):
                    continue
                if _segments_cross(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]):
                    raise ValidationError(f"polygon {self.label!r} is not simple")

    def scaled(self, lam):
        return Polygon(self.label, tuple(e * lam for e in self.edges))


@dataclass(frozen=True)
class Gluing:
    """Identification of edge ``a`` with edge ``b``; sign -1 is the flip."""

    a: tuple
    b: tuple
    sign: int = 1

    def __post_init__(self):
        object.__setattr__(self, "a", (str(self.a[0]), int(self.a[1])))
        object.__setattr__(self, "b", (str(self.b[0]), int(self.b[1])))
        if self.sign not in (1, -1):
            raise ValidationError(f"gluing sign must be +1 or -1, got {self.sign}")


@dataclass(frozen=True)
class ConePoint:
    vertex_class: int
    order: int

    @property
    def angle_over_pi(self):
        return self.order + 2

    @property
    def angle(self):
        return math.pi * (self.order + 2)


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            # smaller root wins so the partition does not depend on call order
            lo, hi = sorted((rx, ry))
            self.parent[hi] = lo


@dataclass(frozen=True, eq=False)
class FlatSurface:
    """A validated flat surface. Build with :func:`build_surface`."""

    polygons: tuple
    gluings: tuple
    vertex_classes: tuple = field(repr=False)
    angles_over_pi: tuple = field(repr=False)
    genus: int = 0

    def polygon(self, label):
        for p in self.polygons:
            if p.label == label:
                return p
        raise KeyError(label)

    @property
    def cone_points(self):
        return [ConePoint(i, m - 2) for i, m in enumerate(self.angles_over_pi) if m > 2]

    @property
    def cone_orders(self):
        return [c.order for c in self.cone_points]

    @property
    def is_translation_surface(self):
        return (all(g.sign == 1 for g in self.gluings)
                and all(c.order % 2 == 0 for c in self.cone_points))

    @property
    def validation_only_genus(self):
        """Genus 1 surfaces are closed-form oracles, not the g > 1 setting."""
        return self.genus < 2

    def vertex_class_of(self, label, corner):
        for i, cls in enumerate(self.vertex_classes):
            if (label, corner) in cls:
                return i
        raise KeyError((label, corner))

    def edge_vectors(self):
        return [list(p.edges) for p in self.polygons]

    def __eq__(self, other):
        if not isinstance(other, FlatSurface):
            return NotImplemented
        return self.polygons == other.polygons and self.gluings == other.gluings

    def __hash__(self):
        return hash((self.polygons, self.gluings))


def build_surface(polygons, gluings):
    """Validate polygons and gluings and compute the cone-point structure.

    Raises
    ------
    UnmatchedEdge
        Some edge takes part in no gluing.
    VectorMismatch
        A glued pair violates ``v_b == -sign * v_a``.
    NonPositiveArea
        A polygon is clockwise or degenerate.
    SimplePoleAngle
        Some vertex class (or a self-glued edge midpoint) has total angle pi.
    """
    polygons = tuple(p if isinstance(p, Polygon) else Polygon(*p) for p in polygons)
    gluings = tuple(g if isinstance(g, Gluing) else Gluing(*g) for g in gluings)
    if not polygons or not gluings:
        raise ValidationError("a surface needs at least one polygon and one gluing")
    by_label = {}
    for p in polygons:
        if p.label in by_label:
            raise ValidationError(f"duplicate polygon label {p.label!r}")
        by_label[p.label] = p

    def edge(side):
        label, idx = side
        if label not in by_label:
            raise ValidationError(f"unknown polygon label {label!r}")
        poly = by_label[label]
        if not 0 <= idx < len(poly):
            raise ValidationError(f"polygon {label!r} has no edge {idx}")
        return poly.edges[idx]

    used = set()
    for g in gluings:
        if g.a == g.b:
            # folding an edge onto itself puts a simple pole at its midpoint
            raise SimplePoleAngle(f"edge {g.a} is glued to itself")
        for side in (g.a, g.b):
            edge(side)
            if side in used:
                raise ValidationError(f"edge {side} appears in more than one gluing")
            used.add(side)
        va, vb = edge(g.a), edge(g.b)
        defect = vb + va * g.sign
        if not defect.is_zero(abs(va)):
            raise VectorMismatch(f"gluing {g.a}~{g.b} (sign {g.sign:+d}): "
                                 f"{vb!r} != {-g.sign} * {va!r}")
    for p in polygons:
        for i in range(len(p)):
            if (p.label, i) not in used:
                raise UnmatchedEdge(f"edge {i} of polygon {p.label!r} is not glued")

    corners = [(p.label, i) for p in polygons for i in range(len(p))]
    uf = _UnionFind(corners)
    components = _UnionFind([p.label for p in polygons])
    for g in gluings:
        na, nb = len(by_label[g.a[0]]), len(by_label[g.b[0]])
        # both boundaries run counterclockwise, so glued edges run opposite ways
        uf.union(g.a, (g.b[0], (g.b[1] + 1) % nb))
        uf.union((g.a[0], (g.a[1] + 1) % na), g.b)
        components.union(g.a[0], g.b[0])
    if len({components.find(p.label) for p in polygons}) != 1:
        raise ValidationError("polygons do not form a connected surface")

    classes = {}
    for c in corners:
        classes.setdefault(uf.find(c), []).append(c)
    vertex_classes = tuple(tuple(sorted(v)) for v in sorted(classes.values(), key=min))

    angles = []
    for cls in vertex_classes:
        total = sum(by_label[lab].interior_angle(i) for lab, i in cls) / math.pi
        m = round(total)
        if abs(total - m) > ANGLE_TOL * max(1, len(cls)):
            raise InvalidConeAngle(f"vertex class {cls} has angle {total}*pi")
        if m == 1:
            raise SimplePoleAngle(f"vertex class {cls} has angle pi (simple pole)")
        if m < 1:
            raise InvalidConeAngle(f"vertex class {cls} has angle {m}*pi")
        angles.append(m)

    chi = len(vertex_classes) - len(gluings) + len(polygons)
    if chi % 2 or chi > 2:
        raise ValidationError(f"Euler characteristic {chi} is not that of a closed surface")
    genus = (2 - chi) // 2
    if sum(m - 2 for m in angles) != 4 * genus - 4:
        raise ValidationError("cone orders are inconsistent with the genus")
    return FlatSurface(polygons, gluings, vertex_classes, tuple(angles), genus)


def genus(surface):
    """Genus from the Euler characteristic ``V - E + F`` of the cell complex."""
    return surface.genus


def euler_characteristic(surface):
    return len(surface.vertex_classes) - len(surface.gluings) + len(surface.polygons)


def qd_norm(surface):
    """Total flat area, i.e. the integral of ``|omega|``."""
    return sum((p.area() for p in surface.polygons), 0)


def scale_surface(surface, lam):
    """Multiply every edge vector by the real scalar ``lam``."""
    return build_surface([p.scaled(lam) for p in surface.polygons], surface.gluings)


def rescale_to_unit_ball(surface, target):
    """Rescale so that :func:`qd_norm` equals ``target`` in (0, 1)."""
    if not isinstance(target, (int, Fraction)):
        target = float(target)
    if not 0 < target < 1:
        raise ValidationError(f"target must lie in (0, 1), got {target}")
    norm = qd_norm(surface)
    if _is_exact(norm) and _is_exact(target):
        ratio = Fraction(target) / Fraction(norm)
    else:
        ratio = float(target) / float(norm)
    return scale_surface(surface, exact_sqrt(ratio))


# ---------------------------------------------------------------- examples


def square_torus(side=1):
    """Unit square with opposite sides glued by translation."""
    s = Fraction(side) if _is_exact(side) else float(side)
    sq = Polygon("sq", [(s, 0), (0, s), (-s, 0), (0, -s)])
    return build_surface([sq], [Gluing(("sq", 0), ("sq", 2)), Gluing(("sq", 1), ("sq", 3))])


def regular_octagon(side=1.0):
    """Regular octagon, opposite sides glued by translation (genus 2)."""
    s = float(side)
    c = s * math.sqrt(0.5)
    half = [Vec(s, 0.0), Vec(c, c), Vec(0.0, s), Vec(-c, c)]
    # exact negation keeps opposite edges matched bit for bit
    edges = half + [-e for e in half]
    oct_ = Polygon("oct", edges)
    return build_surface([oct_], [Gluing(("oct", i), ("oct", i + 4)) for i in range(4)])


def l_shaped():
    """Three unit squares in an L, standard identifications (genus 2)."""
    one = Fraction(1)
    edges = [(one, 0), (one, 0), (0, one), (-one, 0), (0, one), (-one, 0), (0, -one), (0, -one)]
    poly = Polygon("L", edges)
    gl = [Gluing(("L", 0), ("L", 5)), Gluing(("L", 1), ("L", 3)),
          Gluing(("L", 2), ("L", 7)), Gluing(("L", 4), ("L", 6))]
    return build_surface([poly], gl)


def five_square_strip():
    """A 5 x 1 strip glued into a genus 2 half-translation surface.

    Two pairs of horizontal edges are glued by the flip ``z -> -z + c``, which
    produces zeros of odd order: the cone orders are 2, 1 and 1.
    """
    one = Fraction(1)
    edges = [(one, 0)] * 5 + [(0, one)] + [(-one, 0)] * 5 + [(0, -one)]
    poly = Polygon("S", edges)
    pairs = [(0, 2, -1), (1, 6, 1), (3, 8, 1), (4, 9, 1), (5, 11, 1), (7, 10, -1)]
    return build_surface([poly], [Gluing(("S", a), ("S", b), s) for a, b, s in pairs])
