"""Input validation helpers shared by the estimators and the CLI."""

from fractions import Fraction
from numbers import Real

import numpy as np

from .exceptions import ValidationError


def check_k(k):
    """Validate a deformation parameter ``0 <= k < 1``.

    Fractions are kept exact; anything else is converted to float.
    """
    if isinstance(k, bool) or not isinstance(k, Real):
        raise TypeError(f"k must be a real number, got {type(k).__name__}")
    if not isinstance(k, (int, Fraction)):
        k = float(k)
        if not np.isfinite(k):
            raise ValidationError("k must be finite")
    if not 0 <= k < 1:
        raise ValidationError(f"k must lie in [0, 1), got {k}")
    return k


def check_power_of_two(n, name="N"):
    n = int(n)
    if n < 2 or n & (n - 1):
        raise ValidationError(f"{name} must be a power of two >= 2, got {n}")
    return n


def check_positive(x, name):
    x = float(x)
    if not x > 0:
        raise ValidationError(f"{name} must be positive, got {x}")
    return x


def check_complex_grid(values, name="values"):
    """Return ``values`` as a 2-D complex array with finite entries."""
    arr = np.asarray(values, dtype=complex)
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be a 2-D grid, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite samples")
    return arr


def check_square_matrix(a, name="matrix"):
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {a.shape}")
    return a.astype(complex) if np.iscomplexobj(a) else a.astype(float)


def as_fraction_or_float(x):
    """Parse a number from JSON: strings become exact Fractions."""
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    return float(x)
