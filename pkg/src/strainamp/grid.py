"""Periodic-box discretization and precomputed spectral multiplier arrays."""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as _fft

__all__ = ["GridSpec", "fft_workers", "rfft_raw", "rfft_dealias_raw", "irfft_raw"]

_AXES = (-3, -2, -1)


def fft_workers() -> int:
    """Worker count for FFT calls, capped by the STRAINAMP_THREADS env var."""
    cap = os.environ.get("STRAINAMP_THREADS")
    avail = os.cpu_count() or 1
    if cap is None:
        return avail
    return max(1, min(int(cap), avail))


def rfft_raw(grid: "GridSpec", a: np.ndarray) -> np.ndarray:
    """Mean-normalized r2c transform; sample j sits at x = modes1[j] * dx, so
    the coefficients are directly those of the exp(i k . x) expansion."""
    return _fft.rfftn(a, axes=_AXES, workers=fft_workers(), norm="forward")


def rfft_dealias_raw(grid: "GridSpec", a: np.ndarray) -> np.ndarray:
    """Forward transform followed by the dealias mask."""
    out = _fft.rfftn(a, axes=_AXES, workers=fft_workers(), norm="forward")
    out *= grid.dealias_mask
    return out


def irfft_raw(grid: "GridSpec", ah: np.ndarray) -> np.ndarray:
    n = grid.n
    return _fft.irfftn(
        ah, s=(n, n, n), axes=_AXES, workers=fft_workers(), norm="forward"
    )


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on the periodic cube [-L/2, L/2)^3.

    Wavenumbers are k = 2*pi*m/L for integer mode indices m in [-n/2, n/2).
    Spectral coefficients follow the mean normalization: the forward
    transform divides by n^3, so the m=0 coefficient is the field mean and
    multiplier operators carry their continuum symbols unchanged.

    Parameters
    ----------
    n : int
        Points per axis; even and >= 8.
    box_length : float
        Side length L of the cube.
    dealias_fraction : float
        Fraction of retained modes per axis, in (0, 1]. The cutoff is
        floor(dealias_fraction * n/2); modes with any |m_i| >= cutoff are
        zeroed by dealiasing.
    """

    n: int
    box_length: float
    dealias_fraction: float = 2.0 / 3.0

    def __post_init__(self) -> None:
        if self.n % 2 != 0 or self.n < 8:
            raise ValueError(f"n must be even and >= 8, got {self.n}")
        if not self.box_length > 0:
            raise ValueError(f"box_length must be positive, got {self.box_length}")
        if not 0.0 < self.dealias_fraction <= 1.0:
            raise ValueError(
                f"dealias_fraction must lie in (0, 1], got {self.dealias_fraction}"
            )
        if self.cutoff < 1:
            raise ValueError("dealias cutoff must be >= 1")

    # -- geometry -------------------------------------------------------

    @property
    def dx(self) -> float:
        return self.box_length / self.n

    @property
    def cell_volume(self) -> float:
        return self.dx**3

    @property
    def cutoff(self) -> int:
        return int(np.floor(self.dealias_fraction * self.n / 2))

    @property
    def spectral_shape(self) -> tuple[int, int, int]:
        """Shape of one spectral component (real-to-complex layout, last axis halved)."""
        return (self.n, self.n, self.n // 2 + 1)

    @property
    def real_shape(self) -> tuple[int, int, int]:
        return (self.n, self.n, self.n)

    @cached_property
    def x1(self) -> np.ndarray:
        """Sample coordinates along one axis in FFT storage order: index j holds
        x = modes1[j] * dx, covering [-L/2, L/2) with the origin at index 0.
        This ordering makes exp(i k x_j) = exp(2 pi i m j / n) exactly, so
        transforms carry no origin phase; use monotone_order() for I/O."""
        return self.dx * self.modes1.astype(np.float64)

    def coords(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Broadcastable coordinate arrays (X, Y, Z) centered on the box."""
        x = self.x1
        return x[:, None, None], x[None, :, None], x[None, None, :]

    def to_monotone(self, a: np.ndarray) -> np.ndarray:
        """Reorder trailing grid axes from FFT storage order to increasing x."""
        return np.roll(a, (self.n // 2,) * 3, axis=(-3, -2, -1))

    def from_monotone(self, a: np.ndarray) -> np.ndarray:
        return np.roll(a, (-(self.n // 2),) * 3, axis=(-3, -2, -1))

    # -- mode indices and wavenumbers ------------------------------------

    @cached_property
    def modes1(self) -> np.ndarray:
        """Signed integer mode indices along a full axis, FFT ordering."""
        return np.fft.fftfreq(self.n, 1.0 / self.n).astype(np.int64)

    @cached_property
    def modes1_half(self) -> np.ndarray:
        """Mode indices along the real-to-complex axis, 0..n/2."""
        return np.arange(self.n // 2 + 1, dtype=np.int64)

    @cached_property
    def k1(self) -> np.ndarray:
        return (2.0 * np.pi / self.box_length) * self.modes1

    @cached_property
    def k1_half(self) -> np.ndarray:
        return (2.0 * np.pi / self.box_length) * self.modes1_half

    @cached_property
    def k2(self) -> np.ndarray:
        """|k|^2 on the spectral layout, true wavenumbers (Nyquist included)."""
        kx = self.k1[:, None, None]
        ky = self.k1[None, :, None]
        kz = self.k1_half[None, None, :]
        return kx**2 + ky**2 + kz**2

    @cached_property
    def inv_k2(self) -> np.ndarray:
        """1/|k|^2 with the zero mode set to 0 (zero-mean convention)."""
        out = np.zeros_like(self.k2)
        np.divide(1.0, self.k2, out=out, where=self.k2 > 0)
        return out

    # Derivative wavenumbers zero the Nyquist mode (m = -n/2) on every axis
    # so that d/dx_i maps real fields to real fields and stays antisymmetric.
    # All vector-calculus operators (curl, div, Leray, strain projection) are
    # built from these, which keeps projections exactly idempotent per mode.

    @cached_property
    def kd1(self) -> np.ndarray:
        k = self.k1.copy()
        k[self.n // 2] = 0.0
        return k

    @cached_property
    def kd1_half(self) -> np.ndarray:
        k = self.k1_half.copy()
        k[-1] = 0.0
        return k

    @cached_property
    def kd(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Broadcastable derivative wavenumber arrays (kappa_x, kappa_y, kappa_z)."""
        return (
            self.kd1[:, None, None],
            self.kd1[None, :, None],
            self.kd1_half[None, None, :],
        )

    @cached_property
    def kd2(self) -> np.ndarray:
        kx, ky, kz = self.kd
        return kx**2 + ky**2 + kz**2

    @cached_property
    def inv_kd2(self) -> np.ndarray:
        """1/|kappa|^2, zero where kappa vanishes (zero mode and pure-Nyquist modes)."""
        out = np.zeros_like(self.kd2)
        np.divide(1.0, self.kd2, out=out, where=self.kd2 > 0)
        return out

    # -- masks and quadrature weights ------------------------------------

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Boolean retain-mask: True where all |m_i| <= cutoff - 1."""
        c = self.cutoff
        mx = np.abs(self.modes1) < c
        mz = np.abs(self.modes1_half) < c
        return mx[:, None, None] & mx[None, :, None] & mz[None, None, :]

    @cached_property
    def hermitian_weight(self) -> np.ndarray:
        """Multiplicity of each stored mode along the halved axis (2 for interior)."""
        w = np.full(self.n // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        return w


    @cached_property
    def shell_index(self) -> np.ndarray:
        """Integer radial shell round(|m|) per stored mode."""
        mx = self.modes1.astype(np.float64)
        mz = self.modes1_half.astype(np.float64)
        mag = np.sqrt(
            mx[:, None, None] ** 2 + mx[None, :, None] ** 2 + mz[None, None, :] ** 2
        )
        return np.rint(mag).astype(np.int64)

    @cached_property
    def tail_mask(self) -> np.ndarray:
        """Retained modes in the top 1/8 of radial shells (resolution monitor)."""
        top = self.cutoff - 1
        return self.dealias_mask & (self.shell_index > 0.875 * top)
