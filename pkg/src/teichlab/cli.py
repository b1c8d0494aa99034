"""``teichctl``: command line front end.

Exit codes: 0 success, 2 validation failure, 3 numerical failure. Errors are
reported on stderr as a JSON object ``{"error": <name>, "message": ...}``.
Output files go to ``--outdir``, defaulting to ``$TEICHCTL_OUTDIR`` or the
current directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import beltrami, beltsolve, kslab, teichdeform
from .exceptions import TeichError, ValidationError
from .flatsurf import qd_norm
from .io import dumps, format_complex, format_number, load_surface, rows_to_csv, surface_to_dict
from .render import surfaces_svg
from .validation import check_k, check_positive, check_power_of_two

OUTDIR_ENV = "TEICHCTL_OUTDIR"


@dataclass
class RunConfig:
    command: str
    inputs: list = field(default_factory=list)
    k: object = None
    grid: int = None
    tol: float = 1e-10
    steps: int = 2
    h: float = 1e-3
    radius: float = 0.25
    outdir: Path = Path(".")
    seed: int = 0

    def __post_init__(self):
        if self.k is not None:
            self.k = check_k(self.k)
        if self.grid is not None:
            self.grid = check_power_of_two(self.grid, "grid")
        self.tol = check_positive(self.tol, "tol")
        self.outdir = Path(self.outdir)


def parse_number(text):
    """Rationals like ``1/3`` or ``0.25`` stay exact; others become floats."""
    try:
        return Fraction(text)
    except ValueError:
        return float(text)


def _write(cfg, name, text):
    cfg.outdir.mkdir(parents=True, exist_ok=True)
    path = cfg.outdir / name
    path.write_text(text, encoding="utf-8")
    return path


def display_number(x, max_den=10 ** 12):
    """Exact text for modest rationals, ``repr(float)`` once denominators blow up.

    Float edge data read back from JSON is exact in decimal, so products of
    it carry long denominators that say nothing a float would not.
    """
    if isinstance(x, Fraction) and x.denominator > max_den:
        return repr(float(x))
    return format_number(x)


def _json_number(x):
    if isinstance(x, Fraction) and x.denominator == 1:
        return int(x)
    return x if isinstance(x, int) else float(x)


def _angle_text(m):
    return "π" if m == 1 else f"{m}π"


def surface_report(surface):
    norm = qd_norm(surface)
    return {
        "genus": surface.genus,
        "validation_only_genus": surface.validation_only_genus,
        "translation_surface": surface.is_translation_surface,
        "cones": [{"vertex_class": c.vertex_class, "order": c.order,
                   "angle": _angle_text(c.angle_over_pi)} for c in surface.cone_points],
        "norm": _json_number(norm),
        "norm_exact": display_number(norm),
    }


def cmd_surface(cfg, svg=None):
    surface = load_surface(cfg.inputs[0])
    report = surface_report(surface)
    if svg:
        _write(cfg, svg, surfaces_svg([surface], ["surface"]))
    print(dumps(report), end="")
    return report


def path_rows(surface, k, steps):
    base = qd_norm(surface)
    rows = []
    for pt in teichdeform.teich_path(surface, k, steps):
        norm = qd_norm(pt.surface)
        exact = isinstance(norm, Fraction) and isinstance(base, Fraction)
        ratio = norm / base if exact else float(norm) / float(base)
        row = [format_number(pt.t), display_number(pt.dilatation), display_number(norm),
               display_number(ratio)]
        if surface.genus == 1:
            try:
                tau = teichdeform.torus_modulus(pt.surface)
                row.append(format_complex(complex(tau)))
            except ValidationError:
                row.append("")
        rows.append(row)
    header = ["t", "K", "norm", "norm_ratio"] + (["modulus"] if surface.genus == 1 else [])
    return header, rows


def cmd_deform(cfg):
    surface = load_surface(cfg.inputs[0])
    deformed = teichdeform.deform_surface(surface, cfg.k)
    header, rows = path_rows(surface, cfg.k, cfg.steps)
    out = {
        "surface": _write(cfg, "deformed.json", dumps(surface_to_dict(deformed))),
        "path": _write(cfg, "path.csv", rows_to_csv(header, rows)),
        "svg": _write(cfg, "deform.svg", surfaces_svg(
            [surface, deformed], ["input", f"deformed, k={format_number(cfg.k)}"])),
    }
    print(dumps({"files": {k: str(v) for k, v in out.items()},
                 "dilatation": format_number(teichdeform.dilatation_of_k(cfg.k))}), end="")
    return out


def cmd_path(cfg):
    surface = load_surface(cfg.inputs[0])
    header, rows = path_rows(surface, cfg.k, cfg.steps)
    text = rows_to_csv(header, rows)
    _write(cfg, "path.csv", text)
    print(text, end="")
    return rows


def cmd_dilatation(args):
    if args.field:
        with open(args.field, encoding="utf-8") as fh:
            fld = beltrami.BeltramiField.from_dict(json.load(fh))
        norm = beltrami.sup_norm(fld)
    else:
        norm = parse_number(args.norm)
    value = beltrami.dilatation(norm)
    print(dumps({"norm": format_number(norm), "dilatation": format_number(value)}), end="")
    return value


def load_field(path, grid=None):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if "constant" in doc:
        n = check_power_of_two(grid or doc.get("nx", 16), "grid")
        lattice = tuple(complex(*g) for g in doc.get("lattice", ((1, 0), (0, 1))))
        c = complex(*doc["constant"])
        return beltrami.BeltramiField.constant(beltrami.GridDomain.torus(n, lattice), c)
    fld = beltrami.BeltramiField.from_dict(doc)
    if grid is not None and fld.domain.nx != grid:
        raise ValidationError(f"field grid is {fld.domain.nx}, --grid asks for {grid}")
    return fld


def cmd_solve(cfg, max_iter=500, param_grid=None):
    fld = load_field(cfg.inputs[0], cfg.grid)
    problem = beltsolve.TorusProblem(fld)
    solver = beltsolve.BeltramiSolver(tol=cfg.tol, max_iter=max_iter)
    if param_grid:
        t0, t1, steps = param_grid
        ts = np.linspace(t0, t1, steps)
        problems = [beltsolve.TorusProblem(beltrami.BeltramiField(fld.domain, t * fld.values))
                    for t in ts]
        fam = beltsolve.solve_family(problems, ts, tol=cfg.tol, max_iter=max_iter)
        rows = [[repr(float(t)), format_complex(s.c0), repr(s.residual), s.n_iter]
                for t, s in zip(ts, fam.solutions)]
        _write(cfg, "family.csv", rows_to_csv(["t", "c0", "residual", "iterations"], rows))
        summary = {"continuity": fam.continuity, "slope": fam.slope, "steps": list(fam.steps)}
        print(dumps(summary), end="")
        return fam
    try:
        solver.fit(problem)
    except beltsolve.NoConvergence:
        hist = getattr(solver, "residual_history_", [])
        _write(cfg, "residuals.csv", rows_to_csv(["iteration", "residual"], enumerate(hist)))
        raise
    sol = solver.solution_
    _write(cfg, "solution.json", dumps(sol.to_dict()))
    history = [(i, repr(r)) for i, r in enumerate(sol.residual_history)]
    _write(cfg, "residuals.csv", rows_to_csv(["iteration", "residual"], history))
    print(f"c0={format_complex(sol.c0)} residual={sol.residual:.3e} iterations={sol.n_iter}")
    return sol


def cmd_charts(cfg):
    surface = load_surface(cfg.inputs[0])
    rows = []
    cones = surface.cone_points or [None]
    for cone in cones:
        r1 = teichdeform.chart_transition_residual(surface, cfg.k, cone, cfg.radius, cfg.h)
        r2 = teichdeform.chart_transition_residual(surface, cfg.k, cone, cfg.radius, cfg.h / 2)
        rows.append({"vertex_class": None if cone is None else cone.vertex_class,
                     "order": 0 if cone is None else cone.order,
                     "residual": r1, "residual_half_h": r2,
                     "ratio": r1 / r2 if r2 > 0 else None})
    print(dumps({"k": format_number(cfg.k), "h": cfg.h, "radius": cfg.radius, "charts": rows}), end="")
    return rows


def cmd_kslab(cfg, family, d, delta, steps=11):
    ts = np.arange(steps) * delta
    if family == "rotation":
        fn = kslab.rotation_family
    elif family == "diagonal":
        fn = kslab.diagonal_family
        ts = ts - delta * (steps // 2)
    else:
        fn = kslab.planted_family(d, seed=cfg.seed)
    fam = kslab.OperatorFamily.from_callable(fn, ts)
    pairs = [kslab.harmonic_projector(L) for L in fam.matrices]
    devs = [""] + [repr(float(np.linalg.norm(b.F - a.F))) for a, b in zip(pairs, pairs[1:])]
    text = rows_to_csv(["t", "kernel_dim", "deviation"],
                       [[repr(float(t)), p.kernel_dim, dv] for t, p, dv in zip(ts, pairs, devs)])
    _write(cfg, f"kslab_{family}.csv", text)
    print(text, end="")
    report = kslab.projector_continuity(fam)
    status = "PASS" if report.passed else "FAIL"
    print(f"{status} max_step={report.max_F_step:.6g} delta={delta:g} "
          f"step/delta={report.max_F_step / delta:.6g} richardson={report.richardson_ratio:.4f}")
    return report


def build_parser():
    p = argparse.ArgumentParser(prog="teichctl", description=__doc__.splitlines()[0])
    p.add_argument("--outdir", default=os.environ.get(OUTDIR_ENV, "."))
    p.add_argument("--seed", type=int, default=0)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("surface", help="genus, cone points and norm of a surface")
    s.add_argument("input")
    s.add_argument("--svg", help="also write an SVG with this file name")

    for name, helptext in (("deform", "deformed surface, path CSV and SVG"),
                           ("path", "path CSV only")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("input")
        s.add_argument("--k", required=True, type=parse_number)
        s.add_argument("--steps", type=int, default=5 if name == "path" else 2)

    s = sub.add_parser("dilatation", help="dilatation from a norm or a field file")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--norm")
    g.add_argument("--field")

    s = sub.add_parser("solve-beltrami", help="solve the Beltrami equation on a torus")
    s.add_argument("--field", required=True)
    s.add_argument("--grid", type=int)
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--max-iter", type=int, default=500)
    s.add_argument("--param-grid", help="t0:t1:steps, scales the field by t")

    s = sub.add_parser("charts-check", help="holomorphy of chart transitions")
    s.add_argument("input")
    s.add_argument("--k", required=True, type=parse_number)
    s.add_argument("--h", type=float, default=1e-3)
    s.add_argument("--radius", type=float, default=0.25)

    s = sub.add_parser("kslab-demo", help="projector continuity for a demo family")
    s.add_argument("--family", choices=("rotation", "diagonal", "planted"), default="rotation")
    s.add_argument("--d", type=int, default=20)
    s.add_argument("--delta", type=float, default=1e-3)
    s.add_argument("--steps", type=int, default=11)
    return p


def _param_grid(text):
    t0, t1, steps = text.split(":")
    return float(t0), float(t1), int(steps)


def run(argv=None):
    args = build_parser().parse_args(argv)
    cmd = args.command
    inputs = [args.input] if hasattr(args, "input") else []
    if cmd == "solve-beltrami":
        inputs = [args.field]
    cfg = RunConfig(cmd, inputs, k=getattr(args, "k", None), grid=getattr(args, "grid", None),
                    tol=getattr(args, "tol", 1e-10), steps=getattr(args, "steps", 2),
                    h=getattr(args, "h", 1e-3), radius=getattr(args, "radius", 0.25),
                    outdir=args.outdir, seed=args.seed)
    if cmd == "surface":
        return cmd_surface(cfg, args.svg)
    if cmd == "deform":
        return cmd_deform(cfg)
    if cmd == "path":
        return cmd_path(cfg)
    if cmd == "dilatation":
        return cmd_dilatation(args)
    if cmd == "solve-beltrami":
        grid = _param_grid(args.param_grid) if args.param_grid else None
        return cmd_solve(cfg, args.max_iter, grid)
    if cmd == "charts-check":
        return cmd_charts(cfg)
    if cmd == "kslab-demo":
        return cmd_kslab(cfg, args.family, args.d, args.delta, args.steps)
    raise AssertionError(cmd)


def main(argv=None):
    try:
        run(argv)
    except TeichError as exc:
        print(json.dumps({"error": exc.name, "message": str(exc)}), file=sys.stderr)
        return exc.exit_code
    except (ValueError, OSError, KeyError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
