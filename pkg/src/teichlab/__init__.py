"""Flat surfaces, Teichmuller deformations, Beltrami equations and harmonic projectors."""

from importlib.resources import files

from .beltrami import (BeltramiField, GridDomain, MapGrid, composition_law_check,
                       dilatation, inverse_law_check, mu_of_map, sup_norm)
from .beltsolve import (BeltramiSolver, Solution, TorusProblem, holo_in_u_check,
                        solve_family, solve_torus)
from .exceptions import NumericalError, TeichError, ValidationError
from .flatsurf import (ConePoint, FlatSurface, Gluing, Polygon, build_surface, genus,
                       qd_norm, rescale_to_unit_ball)
from .io import load_surface, save_surface, surface_from_dict, surface_to_dict
from .kslab import (HarmonicProjector, OperatorFamily, green_identity_residual,
                    harmonic_projector, projector_continuity)
from .teichdeform import (ChartSample, DeformationParam, TeichmullerDeformation, chart_transition_residual, deform_surface,
                          eta_even, eta_odd, extremality_probe, teich_path, torus_modulus)

__version__ = "0.1.0"


def data_path(name):
    """Path of a bundled example file such as ``"octagon.json"``."""
    return files(__name__) / "data" / name
