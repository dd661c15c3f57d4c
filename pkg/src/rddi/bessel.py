"""
Spherical Bessel and Hankel functions of complex argument.

j_n is computed by Miller's downward recurrence normalised to j_0 = sin z / z
(or j_1 where j_0 nearly vanishes); h_n^(1) by upward recurrence, which is
stable for the dominant solution. For Mie series with thousands of terms
the functions themselves over/underflow, so the ratio sequences

    v_n = j_n / j_{n-1}          (downward continued fraction)
    u_n = h_n / h_{n-1}          (upward)
    D_n = psi_n' / psi_n,  psi_n(z) = z j_n(z)   (downward)

are exposed as well. All routines broadcast over an array of arguments; the
order index is the last axis of the result.
"""
from __future__ import annotations

import numpy as np

__all__ = [
    "miller_start",
    "spherical_jn",
    "spherical_h1",
    "ratio_j",
    "ratio_h1",
    "log_derivative_psi",
]


def miller_start(n_max: int, z) -> int:
    """Starting order for downward recurrences that must be accurate up to n_max."""
    zmax = float(np.max(np.abs(z))) if np.size(z) else 0.0
    return int(max(n_max, zmax) + 15 + 4.0 * max(zmax, 1.0) ** (1.0 / 3.0) + 16)


def ratio_j(n_max: int, z, n_start: int | None = None):
    """v_n = j_n(z)/j_{n-1}(z) for n = 1..n_max (index n-1 on the last axis)."""
    z = np.asarray(z, dtype=complex)
    if n_start is None:
        n_start = miller_start(n_max, z)
    out = np.empty(z.shape + (n_max,), dtype=complex)
    v = np.zeros_like(z)
    for n in range(n_start, 0, -1):
        v = z / (2 * n + 1 - z * v)
        if n <= n_max:
            out[..., n - 1] = v
    return out


def ratio_h1(n_max: int, z):
    """u_n = h_n(z)/h_{n-1}(z) for n = 1..n_max, by upward recurrence."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape + (n_max,), dtype=complex)
    u = 1.0 / z - 1j
    out[..., 0] = u
    for n in range(2, n_max + 1):
        u = (2 * n - 1) / z - 1.0 / u
        out[..., n - 1] = u
    return out


def log_derivative_psi(n_max: int, z, n_start: int | None = None):
    """D_n(z) = psi_n'(z)/psi_n(z) for n = 0..n_max by downward recurrence."""
    z = np.asarray(z, dtype=complex)
    if n_start is None:
        n_start = miller_start(n_max, z)
    out = np.empty(z.shape + (n_max + 1,), dtype=complex)
    d = np.zeros_like(z)
    for n in range(n_start, 0, -1):
        if n <= n_max:
            out[..., n] = d
        d = n / z - 1.0 / (d + n / z)
    out[..., 0] = d
    return out


def spherical_jn(n_max: int, z):
    """j_n(z) for n = 0..n_max via Miller's algorithm.

    Accurate for complex z including large imaginary parts; values below the
    floating-point range underflow to zero.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        out = np.zeros(z.shape + (n_max + 1,), dtype=complex)
        nz = z != 0
        out[..., 0] = 1.0
        if np.any(nz):
            out[nz] = spherical_jn(n_max, z[nz])
        return out
    n_start = miller_start(n_max, z)
    # unnormalised downward recurrence with rescaling to avoid overflow
    out = np.zeros(z.shape + (n_max + 1,), dtype=complex)
    f_next = np.zeros_like(z)
    f = np.full_like(z, 1e-300)
    for n in range(n_start, 0, -1):
        f_prev = (2 * n + 1) / z * f - f_next
        f_next, f = f, f_prev
        big = np.abs(f) > 1e250
        if np.any(big):
            scale = np.where(big, 1e-250, 1.0)
            f = f * scale
            f_next = f_next * scale
            out *= scale[..., None]
        if n - 1 <= n_max:
            out[..., n - 1] = f
    # f = j_0 up to scale, f_next = j_1 up to scale
    j0 = np.sin(z) / z
    j1 = np.sin(z) / z**2 - np.cos(z) / z
    use_j0 = np.abs(j0) >= np.abs(j1)
    with np.errstate(divide="ignore", invalid="ignore"):
        norm = np.where(use_j0, j0 / out[..., 0], j1 / out[..., 1])
    return out * norm[..., None]


def spherical_h1(n_max: int, z):
    """h_n^(1)(z) for n = 0..n_max by upward recurrence."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape + (n_max + 1,), dtype=complex)
    out[..., 0] = -1j * np.exp(1j * z) / z
    if n_max >= 1:
        out[..., 1] = -np.exp(1j * z) * (z + 1j) / z**2
    for n in range(2, n_max + 1):
        out[..., n] = (2 * n - 1) / z * out[..., n - 1] - out[..., n - 2]
    return out
