"""Forward/inverse transforms and diagonal spectral operators.

All operators act mode-by-mode. Derivatives multiply by i*kappa where kappa
zeroes the Nyquist wavenumber; the Laplacian family (laplacian,
inverse_laplacian, heat_semigroup) uses the true |k|^2 so that
(-lap) o (-lap)^{-1} is the identity on zero-mean fields.
"""

from __future__ import annotations

import numpy as np

from .fields import _Field
from .grid import irfft_raw, rfft_raw

__all__ = [
    "HermitianSymmetryError",
    "forward_transform",
    "inverse_transform",
    "derivative",
    "laplacian",
    "inverse_laplacian",
    "heat_semigroup",
    "dealias",
]


class HermitianSymmetryError(ValueError):
    """Spectral coefficients fail the reality (conjugate-symmetry) condition."""


def _wrap(field: _Field, data: np.ndarray) -> _Field:
    return type(field)(field.grid, data)


def forward_transform(f: _Field) -> _Field:
    """Real samples -> coefficients of the expansion in exp(i k . x); the m=0
    coefficient is the field mean."""
    if f.spectral:
        raise ValueError("forward_transform expects a real-space field")
    return _wrap(f, rfft_raw(f.grid, f.data))


def _hermitian_residual(f: _Field) -> float:
    """Relative asymmetry of the two self-conjugate planes of the r2c layout."""
    total = np.sqrt(np.sum(np.abs(f.data) ** 2))
    if total == 0.0:
        return 0.0
    res = 0.0
    for iz in (0, f.grid.n // 2):
        plane = f.data[..., iz]
        mirror = np.conj(plane[..., ::-1, ::-1])
        mirror = np.roll(np.roll(mirror, 1, axis=-1), 1, axis=-2)
        res += np.sum(np.abs(plane - mirror) ** 2)
    return float(np.sqrt(res) / total)


def inverse_transform(f: _Field) -> _Field:
    """Spectral coefficients -> real samples (exact inverse of forward_transform)."""
    if not f.spectral:
        raise ValueError("inverse_transform expects a spectral field")
    res = _hermitian_residual(f)
    if res > 1e-8:
        raise HermitianSymmetryError(
            f"Hermitian symmetry residual {res:.3e} exceeds 1e-8; "
            "coefficients do not describe a real field"
        )
    return _wrap(f, irfft_raw(f.grid, f.data))


def derivative(f: _Field, axis: int) -> _Field:
    """Spectral d/dx_axis (axis in {1, 2, 3}); Nyquist derivative set to zero."""
    if not f.spectral:
        raise ValueError("derivative expects a spectral field")
    if axis not in (1, 2, 3):
        raise ValueError(f"axis must be 1, 2, or 3, got {axis}")
    return _wrap(f, 1j * f.grid.kd[axis - 1] * f.data)


def laplacian(f: _Field) -> _Field:
    if not f.spectral:
        raise ValueError("laplacian expects a spectral field")
    return _wrap(f, -f.grid.k2 * f.data)


def inverse_laplacian(f: _Field) -> _Field:
    """(-lap)^{-1}: divide by |k|^2; the mean mode maps to zero."""
    if not f.spectral:
        raise ValueError("inverse_laplacian expects a spectral field")
    return _wrap(f, f.grid.inv_k2 * f.data)


def heat_semigroup(f: _Field, nu_t: float) -> _Field:
    """Multiply by exp(-nu_t |k|^2); nu_t is viscosity times elapsed time."""
    if not f.spectral:
        raise ValueError("heat_semigroup expects a spectral field")
    if nu_t < 0:
        raise ValueError(f"nu_t must be >= 0, got {nu_t}")
    if nu_t == 0:
        return _wrap(f, f.data.copy())
    return _wrap(f, np.exp(-nu_t * f.grid.k2) * f.data)


def dealias(f: _Field) -> _Field:
    """Zero every mode with any |m_i| >= cutoff (idempotent)."""
    if not f.spectral:
        raise ValueError("dealias expects a spectral field")
    return _wrap(f, np.where(f.grid.dealias_mask, f.data, 0.0))
