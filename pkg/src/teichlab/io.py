"""JSON and CSV serialization for surfaces, fields and reports."""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction

from .flatsurf import Gluing, Polygon, build_surface


def format_number(x):
    """Exact text form: decimals where finite, ``p/q`` otherwise.

    Floats go through their shortest ``repr`` first, so a float and the
    Fraction parsed back from its text print the same way.
    """
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, int):
        return str(x)
    if not isinstance(x, Fraction):
        x = float(x)
        if x != x or x in (float("inf"), float("-inf")):
            return repr(x)
        x = Fraction(repr(x))
    den = x.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{x.numerator}/{x.denominator}"
    digits = max(twos, fives)
    if digits == 0:
        return str(x.numerator)
    scaled = abs(x.numerator) * 10 ** digits // x.denominator
    sign = "-" if x < 0 else ""
    whole, frac = divmod(scaled, 10 ** digits)
    return f"{sign}{whole}.{frac:0{digits}d}".rstrip("0").rstrip(".")


def surface_to_dict(surface):
    return {
        "polygons": [{"label": p.label,
                      "edges": [[format_number(e.re), format_number(e.im)] for e in p.edges]}
                     for p in surface.polygons],
        "gluings": [{"a": [g.a[0], g.a[1]], "b": [g.b[0], g.b[1]], "sign": g.sign}
                    for g in surface.gluings],
    }


def surface_from_dict(doc):
    polys = [Polygon(p["label"], [tuple(e) for e in p["edges"]]) for p in doc["polygons"]]
    gluings = [Gluing(tuple(g["a"]), tuple(g["b"]), int(g.get("sign", 1))) for g in doc["gluings"]]
    return build_surface(polys, gluings)


def dumps(doc):
    """Canonical JSON text (stable key order, trailing newline)."""
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def load_surface(path):
    with open(path, encoding="utf-8") as fh:
        return surface_from_dict(json.load(fh))


def save_surface(surface, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(surface_to_dict(surface)))


def rows_to_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def format_complex(z):
    z = complex(z)
    return f"{z.real!r}{'+' if z.imag >= 0 else '-'}{abs(z.imag)!r}j"
