"""Input checks for matrices and scalar parameters."""
import numpy as np

from .errors import ValidationError


def as_matrix(a, name="matrix"):
    """Return ``a`` as a finite, square complex128 array or raise ValidationError."""
    try:
        arr = np.array(a, dtype=np.complex128)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name}: cannot convert to a complex matrix ({exc})") from exc
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise ValidationError(f"{name}: expected a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name}: entries must be finite")
    return arr


def same_shape(a, b, names=("a", "b")):
    if a.shape != b.shape:
        raise ValidationError(f"{names[0]} has shape {a.shape} but {names[1]} has shape {b.shape}")


def check_positive(value, name):
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise ValidationError(f"{name} must be a positive finite number, got {value}")
    return value


def check_nonnegative(value, name):
    value = float(value)
    if not np.isfinite(value) or value < 0:
        raise ValidationError(f"{name} must be a non-negative finite number, got {value}")
    return value


def opnorm(a):
    """Spectral norm; 0 for the zero matrix."""
    return float(np.linalg.norm(a, 2)) if a.size else 0.0
