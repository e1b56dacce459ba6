"""Strain/velocity/vorticity calculus, projections, and pointwise eigenvalues.

Vector-calculus multipliers share the Nyquist-zeroed wavenumbers kappa from
GridSpec.kd, which makes leray_project and strain_project exactly idempotent
and mutually consistent mode by mode.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .fields import SYM_PAIRS, ScalarField, SymTensorField, VectorField, l2_norm_sq
from .grid import (
    GridSpec,
    irfft_raw as _irfft_raw,
    rfft_dealias_raw as _rfft_dealias_raw,
)
from .spectral import forward_transform

__all__ = [
    "EigenTriple",
    "ConstraintError",
    "strain_of",
    "velocity_of",
    "vorticity_of",
    "leray_project",
    "strain_project",
    "s_squared",
    "omega_outer",
    "advection_term",
    "eig_symtensor",
    "lambda_fields",
    "divergence_residual",
    "strain_space_residual",
]


class ConstraintError(ValueError):
    """Input violates a declared constraint (solenoidality, strain space)."""


@dataclass(frozen=True)
class EigenTriple:
    """Sorted eigenvalues of a symmetric 3x3 matrix, lambda1 <= lambda2 <= lambda3."""

    lambda1: float
    lambda2: float
    lambda3: float

    @property
    def lambda2_plus(self) -> float:
        return max(0.0, self.lambda2)


# -- raw-array helpers (hot path) -----------------------------------------


def _as_spectral(f):
    return f if f.spectral else forward_transform(f)


def _as_real(f):
    return f if not f.spectral else type(f)(f.grid, f.real_samples())


def _div_sym_raw(grid: GridSpec, mh: np.ndarray) -> np.ndarray:
    """Row divergence (div M)_i = i kappa_j M_ij of a spectral 6-component tensor."""
    kx, ky, kz = grid.kd
    return np.stack(
        [
            1j * (kx * mh[0] + ky * mh[1] + kz * mh[2]),
            1j * (kx * mh[1] + ky * mh[3] + kz * mh[4]),
            1j * (kx * mh[2] + ky * mh[4] + kz * mh[5]),
        ]
    )


def _sym_grad_raw(grid: GridSpec, vh: np.ndarray) -> np.ndarray:
    """Symmetric gradient (components xx, xy, xz, yy, yz, zz) of a spectral vector."""
    kx, ky, kz = grid.kd
    return np.stack(
        [
            1j * kx * vh[0],
            0.5j * (kx * vh[1] + ky * vh[0]),
            0.5j * (kx * vh[2] + kz * vh[0]),
            1j * ky * vh[1],
            0.5j * (ky * vh[2] + kz * vh[1]),
            1j * kz * vh[2],
        ]
    )


def _leray_raw(grid: GridSpec, vh: np.ndarray) -> np.ndarray:
    kx, ky, kz = grid.kd
    kv = (kx * vh[0] + ky * vh[1] + kz * vh[2]) * grid.inv_kd2
    return np.stack([vh[0] - kx * kv, vh[1] - ky * kv, vh[2] - kz * kv])


def _strain_project_raw(grid: GridSpec, mh: np.ndarray) -> np.ndarray:
    """P_st M = sym_grad(-2 (-lap)^{-1} P_df div M), all with kappa wavenumbers."""
    if _kernels.HAVE_NUMBA:
        return _kernels.strain_project_apply(grid, mh)
    wh = -2.0 * grid.inv_kd2 * _div_sym_raw(grid, mh)
    return _sym_grad_raw(grid, _leray_raw(grid, wh))


def _velocity_raw(grid: GridSpec, sh: np.ndarray) -> np.ndarray:
    """u = -2 div (-lap)^{-1} S for a spectral strain tensor."""
    return -2.0 * grid.inv_kd2 * _div_sym_raw(grid, sh)


# -- interconversion -------------------------------------------------------


def divergence_residual(u: VectorField) -> float:
    """||div u|| / ||grad u|| in the discrete L^2 sense (0 for the zero field)."""
    uf = _as_spectral(u)
    g = uf.grid
    kx, ky, kz = g.kd
    hw = g.hermitian_weight
    div_sq = np.sum(hw * np.abs(kx * uf.data[0] + ky * uf.data[1] + kz * uf.data[2]) ** 2)
    grad_sq = np.sum(hw * g.kd2 * np.abs(uf.data) ** 2)
    if grad_sq == 0.0:
        return 0.0
    return float(np.sqrt(div_sq / grad_sq))


def strain_space_residual(S: SymTensorField) -> float:
    """||P_st S - S|| / ||S|| (0 for the zero field)."""
    sf = _as_spectral(S)
    ps = SymTensorField(sf.grid, _strain_project_raw(sf.grid, sf.data))
    denom = l2_norm_sq(sf)
    if denom == 0.0:
        return 0.0
    num = l2_norm_sq(SymTensorField(sf.grid, ps.data - sf.data))
    return float(np.sqrt(num / denom))


def strain_of(u: VectorField, div_tol: float = 1e-8) -> SymTensorField:
    """Symmetric gradient S_ij = (d_i u_j + d_j u_i)/2 of a solenoidal velocity."""
    uf = _as_spectral(u)
    res = divergence_residual(uf)
    if res > div_tol:
        raise ConstraintError(
            f"velocity divergence residual {res:.3e} exceeds {div_tol:.1e}"
        )
    return SymTensorField(uf.grid, _sym_grad_raw(uf.grid, uf.data))


def velocity_of(S: SymTensorField, residual_tol: float = 1e-6) -> VectorField:
    """Invert the strain: u = -2 div (-lap)^{-1} S, requiring S in the strain space."""
    sf = _as_spectral(S)
    res = strain_space_residual(sf)
    if res > residual_tol:
        raise ConstraintError(
            f"strain-space residual {res:.3e} exceeds {residual_tol:.1e}"
        )
    return VectorField(sf.grid, _velocity_raw(sf.grid, sf.data))


def vorticity_of(u: VectorField) -> VectorField:
    """Spectral curl omega = curl u."""
    uf = _as_spectral(u)
    kx, ky, kz = uf.grid.kd
    ux, uy, uz = uf.data
    w = np.stack(
        [
            1j * (ky * uz - kz * uy),
            1j * (kz * ux - kx * uz),
            1j * (kx * uy - ky * ux),
        ]
    )
    return VectorField(uf.grid, w)


def leray_project(v: VectorField) -> VectorField:
    """Helmholtz projection onto divergence-free fields (mean mode unchanged)."""
    vf = _as_spectral(v)
    return VectorField(vf.grid, _leray_raw(vf.grid, vf.data))


def strain_project(M: SymTensorField) -> SymTensorField:
    """Orthogonal projection onto the strain space (symmetric gradients of
    divergence-free fields); annihilates Hessians and multiples of the identity."""
    mf = _as_spectral(M)
    return SymTensorField(mf.grid, _strain_project_raw(mf.grid, mf.data))


# -- pointwise nonlinear products ------------------------------------------


def _sym_square_raw(s: np.ndarray) -> np.ndarray:
    """Pointwise matrix square of a real 6-component symmetric tensor."""
    return _kernels.sym_square(s)


def s_squared(S: SymTensorField) -> SymTensorField:
    """Pointwise S^2 computed in real space, dealiased in spectral space."""
    g = S.grid
    prod = _sym_square_raw(S.real_samples())
    return SymTensorField(g, _rfft_dealias_raw(g, prod))


def omega_outer(omega: VectorField) -> SymTensorField:
    """Pointwise outer product omega_i omega_j, dealiased."""
    g = omega.grid
    w = omega.real_samples()
    prod = np.stack([w[i] * w[j] for (i, j) in SYM_PAIRS])
    return SymTensorField(g, _rfft_dealias_raw(g, prod))


def advection_term(u: VectorField, S: SymTensorField) -> SymTensorField:
    """(u . grad) S: spectral derivatives of S, products in real space, dealiased."""
    g = S.grid
    sh = _as_spectral(S).data
    u_re = u.real_samples()
    acc = np.zeros((6,) + g.real_shape)
    for a in range(3):
        ds = _irfft_raw(g, 1j * g.kd[a] * sh)
        acc += u_re[a] * ds
    return SymTensorField(g, _rfft_dealias_raw(g, acc))


# -- eigenvalues ------------------------------------------------------------


def _eig3_raw(s: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sorted eigenvalues of symmetric 3x3 matrices given as stacked components.

    Closed-form trigonometric solution with one Newton polish pass applied
    where the characteristic-polynomial residual exceeds 1e-12 * ||m||^3.
    """
    xx, xy, xz, yy, yz, zz = (np.asarray(c, dtype=np.float64) for c in s)
    q = (xx + yy + zz) / 3.0
    p1 = xy * xy + xz * xz + yz * yz
    a, b, c = xx - q, yy - q, zz - q
    p2 = a * a + b * b + c * c + 2.0 * p1
    p = np.sqrt(p2 / 6.0)
    psafe = np.where(p > 0, p, 1.0)
    det_b = (
        a * (b * c - yz * yz) - xy * (xy * c - yz * xz) + xz * (xy * yz - b * xz)
    ) / psafe**3
    r = np.clip(det_b / 2.0, -1.0, 1.0)
    phi = np.arccos(r) / 3.0
    l3 = q + 2.0 * p * np.cos(phi)
    l1 = q + 2.0 * p * np.cos(phi + 2.0 * np.pi / 3.0)
    l2 = 3.0 * q - l1 - l3

    # invariants of the characteristic polynomial l^3 - i1 l^2 + i2 l - i3
    i1 = xx + yy + zz
    tr2 = xx * xx + yy * yy + zz * zz + 2.0 * p1
    i2 = 0.5 * (i1 * i1 - tr2)
    i3 = (
        xx * (yy * zz - yz * yz)
        - xy * (xy * zz - yz * xz)
        + xz * (xy * yz - yy * xz)
    )
    scale = np.maximum(tr2**1.5, np.finfo(np.float64).tiny)

    def polish(lam: np.ndarray) -> np.ndarray:
        f = ((lam - i1) * lam + i2) * lam - i3
        need = np.abs(f) > 1e-12 * scale
        if not np.any(need):
            return lam
        fp = (3.0 * lam - 2.0 * i1) * lam + i2
        ok = need & (np.abs(fp) > 1e-30)
        return np.where(ok, lam - f / np.where(ok, fp, 1.0), lam)

    lams = np.sort(np.stack([polish(l1), polish(l2), polish(l3)]), axis=0)
    return lams[0], lams[1], lams[2]


def eig_symtensor(m: np.ndarray) -> EigenTriple:
    """Eigenvalues of one symmetric 3x3 matrix (upper triangle is read)."""
    m = np.asarray(m, dtype=np.float64)
    if m.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    comps = [m[0, 0], m[0, 1], m[0, 2], m[1, 1], m[1, 2], m[2, 2]]
    l1, l2, l3 = _eig3_raw([np.asarray(v) for v in comps])
    return EigenTriple(float(l1), float(l2), float(l3))


def lambda_fields(S: SymTensorField) -> tuple[ScalarField, ScalarField, ScalarField]:
    """Pointwise eigenvalue fields (lambda1, lambda2, lambda2+ = max(0, lambda2))."""
    g = S.grid
    s_re = S.real_samples()
    l1, l2, _ = _eig3_raw(s_re)
    return (
        ScalarField(g, l1),
        ScalarField(g, l2),
        ScalarField(g, np.maximum(0.0, l2)),
    )
