"""
Dyadic Green tensors for free space, an absorbing bulk medium and a single
dielectric sphere.

Units: positions are given in lambda_T = 2 pi c / omega_T, frequencies in
omega_T, and tensors are returned in units of omega_T / c. In these units the
free-space tensor obeys Im G(r, r, omega) = omega / (6 pi) * I.

The sphere scattering tensor is the standard spherical-vector-wave expansion
(exterior source and observation points). To reach the thousands of
multipoles needed for points close to the surface, every order-n term is
assembled from ratio sequences of the Bessel functions, so no individual
j_n or h_n is ever formed. One point is rotated onto the polar axis, which
reduces the azimuthal sum to m = 0, 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, signal
from scipy.special import spherical_jn as _sph_jn, spherical_yn as _sph_yn

from .bessel import log_derivative_psi, miller_start, ratio_h1, ratio_j
from .material import PermittivityModel, refractive_index

__all__ = [
    "TWO_PI",
    "GreenTensor",
    "Vacuum",
    "Bulk",
    "SphereGeometry",
    "ResonanceInfo",
    "SingularityError",
    "GeometryError",
    "MieConvergenceError",
    "ResonanceSearchError",
    "vacuum_green",
    "bulk_green",
    "sphere_scattering_green",
    "sphere_scattering_array",
    "total_green",
    "projected_im_green",
    "find_resonance",
    "fit_lorentzian",
    "wiscombe_lmax",
]

TWO_PI = 2.0 * np.pi


class SingularityError(ValueError):
    """Requested a tensor component that diverges at coincident points."""


class GeometryError(ValueError):
    """A point lies inside (or on) a body."""


class MieConvergenceError(RuntimeError):
    """The multipole series did not converge within the allowed number of terms."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ResonanceSearchError(RuntimeError):
    """No peak, or more than one, in the search bracket."""


@dataclass(frozen=True)
class GreenTensor:
    matrix: np.ndarray
    r: np.ndarray
    r_prime: np.ndarray
    omega: float
    kind: str
    real_defined: bool = True
    l_max: int | None = None

    @property
    def real(self):
        if not self.real_defined:
            raise SingularityError("real part is undefined at coincident points")
        return self.matrix.real

    @property
    def imag(self):
        return self.matrix.imag

    def project(self, u, v):
        """u* . G . v for dipole vectors u (at r) and v (at r_prime)."""
        return np.conj(u) @ self.matrix @ v


@dataclass(frozen=True)
class Vacuum:
    kind: str = "vacuum"


@dataclass(frozen=True)
class Bulk:
    """Homogeneous absorbing medium filling all space."""

    material: PermittivityModel
    kind: str = "bulk"


@dataclass(frozen=True)
class SphereGeometry:
    """Dielectric sphere centred at the origin, embedded in vacuum.

    ``diameter`` is in units of lambda_T.
    """

    diameter: float
    material: object
    l_max: int | None = None
    tol: float = 1e-10
    kind: str = "sphere"

    def __post_init__(self):
        if not self.diameter > 0:
            raise ValueError("sphere diameter must be positive")

    @property
    def radius(self) -> float:
        return 0.5 * self.diameter

    def check_outside(self, *points):
        for p in points:
            if np.linalg.norm(p) <= self.radius:
                raise GeometryError(
                    f"point {np.asarray(p).tolist()} is not outside the sphere "
                    f"(radius {self.radius} lambda_T)"
                )


@dataclass(frozen=True)
class ResonanceInfo:
    omega_m: float
    delta_omega_m: float
    strength: float
    background: float = 0.0
    fit_residual: float = 0.0
    l_max: int | None = None
    extra: dict = field(default_factory=dict, compare=False)


def _vec(p):
    p = np.asarray(p, dtype=float)
    if p.shape != (3,):
        raise ValueError("positions must be 3-vectors")
    return p


def _dyad_parts(rvec):
    R = np.linalg.norm(rvec)
    rhat = rvec / R
    P = np.outer(rhat, rhat)
    return R, np.eye(3) - P, P


def _j1_over_x(x):
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-3
    xs = np.where(small, 1.0, x)
    out = np.where(small, 1.0 / 3.0 - x**2 / 30.0 + x**4 / 840.0, _sph_jn(1, xs) / xs)
    return out


def vacuum_green(r, r_prime, omega, imag_only: bool = False) -> GreenTensor:
    """Free-space Green tensor.

    At coincident points only the imaginary part, omega/(6 pi) I, exists; it
    is returned with ``real_defined=False`` when ``imag_only`` is set and a
    ``SingularityError`` is raised otherwise.
    """
    if not omega > 0:
        raise ValueError("omega must be positive")
    r, rp = _vec(r), _vec(r_prime)
    d = (r - rp) * TWO_PI
    k = float(omega)
    if np.allclose(d, 0.0, atol=0.0):
        if not imag_only:
            raise SingularityError("vacuum Green tensor diverges at r = r'")
        m = np.full((3, 3), np.nan) + 1j * (k / (6 * np.pi)) * np.eye(3)
        return GreenTensor(m, r, rp, omega, "vacuum", real_defined=False)
    R, T, L = _dyad_parts(d)
    x = k * R
    j0 = _sph_jn(0, x)
    j1x = _j1_over_x(x)
    y0 = _sph_yn(0, x)
    y1x = _sph_yn(1, x) / x
    im = (k / (4 * np.pi)) * ((j0 - j1x) * T + 2 * j1x * L)
    re = -(k / (4 * np.pi)) * ((y0 - y1x) * T + 2 * y1x * L)
    return GreenTensor(re + 1j * im, r, rp, omega, "vacuum")


def bulk_green(model, r, r_prime, omega) -> GreenTensor:
    """Green tensor of an unbounded medium with permittivity ``model``.

    (I + grad grad / k^2) exp(ikR) / (4 pi R) with k = n(omega) omega.
    """
    if not omega > 0:
        raise ValueError("omega must be positive")
    r, rp = _vec(r), _vec(r_prime)
    d = (r - rp) * TWO_PI
    if np.allclose(d, 0.0, atol=0.0):
        raise SingularityError("bulk Green tensor diverges at r = r'")
    n = refractive_index(model, omega)
    k = n * omega
    R, T, L = _dyad_parts(d)
    x = k * R
    e = np.exp(1j * x) / (4 * np.pi * R)
    a = 1 + 1j / x - 1 / x**2
    b = -1 - 3j / x + 3 / x**2
    m = e * (a * np.eye(3) + b * L)
    return GreenTensor(m, r, rp, omega, "bulk")


# --------------------------------------------------------------------------
# sphere


def wiscombe_lmax(x: float) -> int:
    """Wiscombe-style truncation for size parameter x."""
    x = max(float(x), 1e-3)
    return int(math.ceil(x + 4.05 * x ** (1.0 / 3.0) + 10))


def _angular_functions(n_max, mu):
    """P_n, pi_n, tau_n for n = 1..n_max at mu = cos(theta) (no Condon-Shortley phase)."""
    P = np.empty(n_max + 1)
    pi = np.empty(n_max + 1)
    P[0], pi[0] = 1.0, 0.0
    if n_max >= 1:
        P[1], pi[1] = mu, 1.0
    for n in range(2, n_max + 1):
        P[n] = ((2 * n - 1) * mu * P[n - 1] - (n - 1) * P[n - 2]) / n
        pi[n] = ((2 * n - 1) * mu * pi[n - 1] - n * pi[n - 2]) / (n - 1)
    n = np.arange(n_max + 1)
    tau = np.zeros(n_max + 1)
    tau[1:] = n[1:] * mu * pi[1:] - (n[1:] + 1) * pi[:-1]
    return P[1:], pi[1:], tau[1:]


def _frame(r, rp):
    """Rotation taking the local frame (r on +z, r' in the x-z plane) to the lab frame."""
    ez = r / np.linalg.norm(r)
    rph = rp / np.linalg.norm(rp)
    perp = rph - np.dot(rph, ez) * ez
    if np.linalg.norm(perp) < 1e-14:
        trial = np.array([1.0, 0.0, 0.0]) if abs(ez[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        perp = trial - np.dot(trial, ez) * ez
    ex = perp / np.linalg.norm(perp)
    ey = np.cross(ez, ex)
    mu = float(np.clip(np.dot(rph, ez), -1.0, 1.0))
    s = float(np.dot(rph, ex))
    return np.column_stack([ex, ey, ez]), mu, max(s, 0.0)


def _assemble(n, P, pi, tau, mu, s, Sa, Sb, Tr, Tp, rho, rhop):
    """Sum the order-n dyads in the local frame.

    Sa, Sb : N- and M-channel weights (with radial products factored in)
    Tr, Tp : (rho z_n)'/(rho z_n) style tangential radial factors at r and r'
    Returns the non-zero local elements (xx, xz, yy, zx, zz), last axis over n.
    """
    nn1 = n * (n + 1.0)
    w = 2 * n + 1.0
    Sa = Sa * w
    Sb = Sb * w
    xx = Sb * pi / nn1 * mu + Sa * Tr * (s * s * pi / rhop + Tp * tau * mu / nn1)
    xz = -Sb * pi / nn1 * s + Sa * Tr * (s * mu * pi / rhop - Tp * tau * s / nn1)
    yy = Sb * tau / nn1 + Sa * Tr * Tp * pi / nn1
    zx = Sa / rho * (nn1 * P * s / rhop - Tp * s * pi * mu)
    zz = Sa / rho * (nn1 * P * mu / rhop + Tp * s * s * pi)
    return xx, xz, yy, zx, zz


def _local_to_matrix(parts):
    xx, xz, yy, zx, zz = parts
    shape = np.shape(xx)
    m = np.zeros(shape + (3, 3), dtype=complex)
    m[..., 0, 0] = xx
    m[..., 0, 2] = xz
    m[..., 1, 1] = yy
    m[..., 2, 0] = zx
    m[..., 2, 2] = zz
    return m


def _regular_expansion(r, rp, omega, n_max):
    """Im of the free-space tensor from its vector-wave expansion (j_n radial functions).

    Independent of the closed form; used to validate the angular assembly.
    """
    r, rp = _vec(r) * TWO_PI, _vec(rp) * TWO_PI
    Q, mu, s = _frame(r, rp)
    k = float(omega)
    rho, rhop = k * np.linalg.norm(r), k * np.linalg.norm(rp)
    n = np.arange(1, n_max + 1)
    P, pi, tau = _angular_functions(n_max, mu)
    jr = _sph_jn(np.arange(n_max + 1), rho)
    jp = _sph_jn(np.arange(n_max + 1), rhop)
    Tr = (jr[:-1] - n * jr[1:] / rho) / np.where(jr[1:] == 0, 1, jr[1:])
    Tp = (jp[:-1] - n * jp[1:] / rhop) / np.where(jp[1:] == 0, 1, jp[1:])
    prod = jr[1:] * jp[1:]
    parts = _assemble(n, P, pi, tau, mu, s, prod, prod, Tr, Tp, rho, rhop)
    local = _local_to_matrix(tuple(np.sum(p) for p in parts))
    return (k / (4 * np.pi)) * (Q @ local @ Q.T)


def _mie_series_terms(x, m_rel, rho, rhop, n_max):
    """Scaled Mie weights for orders 1..n_max.

    Returns (Sa, Sb, Tr, Tp) where Sa = -a_n h_n(rho) h_n(rho') and
    Sb = -b_n h_n(rho) h_n(rho'), with a_n, b_n the usual exterior
    coefficients for size parameter x and relative index m_rel. All inputs
    broadcast over a leading frequency axis.
    """
    x = np.asarray(x, dtype=complex)[..., None]
    m = np.asarray(m_rel, dtype=complex)[..., None]
    rho = np.asarray(rho, dtype=complex)[..., None]
    rhop = np.asarray(rhop, dtype=complex)[..., None]
    n = np.arange(1, n_max + 1)

    mx = (m * x)[..., 0]
    D = log_derivative_psi(n_max, mx, miller_start(n_max, mx))[..., 1:]
    v = ratio_j(n_max, x[..., 0])
    ux = ratio_h1(n_max, x[..., 0])
    ur = ratio_h1(n_max, rho[..., 0])
    up = ratio_h1(n_max, rhop[..., 0])

    ea = D / m + n / x
    eb = m * D + n / x
    ra = (ea - 1.0 / v) / (ea - 1.0 / ux)
    rb = (eb - 1.0 / v) / (eb - 1.0 / ux)

    x0 = x[..., 0]
    j0 = np.sin(x0) / x0
    h0x = -1j * np.exp(1j * x0) / x0
    jh = (j0 * h0x)[..., None] * np.cumprod(v * ux, axis=-1)
    hr0 = (-1j * np.exp(1j * rho[..., 0]) / rho[..., 0]) / h0x
    hp0 = (-1j * np.exp(1j * rhop[..., 0]) / rhop[..., 0]) / h0x
    Hr = hr0[..., None] * np.cumprod(ur / ux, axis=-1)
    Hp = hp0[..., None] * np.cumprod(up / ux, axis=-1)
    base = jh * Hr * Hp
    Sa = -ra * base
    Sb = -rb * base
    Tr = 1.0 / ur - n / rho
    Tp = 1.0 / up - n / rhop
    return Sa, Sb, Tr, Tp


def _initial_lmax(x, rho, rhop, tol):
    q = math.log(rho * rhop / x**2)
    n_conv = (math.log(1.0 / tol) + 20.0) / max(q, 1e-12)
    return int(min(math.ceil(wiscombe_lmax(x) + n_conv), 10**7))


def sphere_scattering_array(sphere: SphereGeometry, r, r_prime, omegas,
                            l_max: int | None = None, tol: float | None = None,
                            max_lmax: int = 120_000, chunk: int = 64):
    """Scattering Green tensors for many frequencies.

    Returns (G, l_used) with G of shape (len(omegas), 3, 3).
    """
    r, rp = _vec(r), _vec(r_prime)
    sphere.check_outside(r, rp)
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    if np.any(omegas <= 0):
        raise ValueError("omega must be positive")
    tol = sphere.tol if tol is None else tol
    out = np.zeros((omegas.size, 3, 3), dtype=complex)
    if getattr(sphere.material, "is_vacuum", False):
        return out, 0

    r_i, rp_i = r * TWO_PI, rp * TWO_PI
    a = sphere.radius * TWO_PI
    Q, mu, s = _frame(r_i, rp_i)
    nr, nrp = np.linalg.norm(r_i), np.linalg.norm(rp_i)
    fixed = l_max if l_max is not None else sphere.l_max
    if fixed is None:
        n_max = max(_initial_lmax(w * a, w * nr, w * nrp, tol)
                    for w in (omegas.min(), omegas.max()))
        n_max = min(n_max, max_lmax)
    else:
        n_max = int(fixed)

    while True:
        P, pi, tau = _angular_functions(n_max, mu)
        n = np.arange(1, n_max + 1)
        worst = 0.0
        for lo in range(0, omegas.size, chunk):
            w = omegas[lo:lo + chunk]
            eps = np.asarray(sphere.material(w), dtype=complex)
            m_rel = np.sqrt(eps)
            m_rel = np.where(m_rel.imag < 0, -m_rel, m_rel)
            Sa, Sb, Tr, Tp = _mie_series_terms(w * a, m_rel, w * nr, w * nrp, n_max)
            parts = _assemble(n, P, pi, tau, mu, s, Sa, Sb, Tr, Tp,
                              (w * nr)[:, None], (w * nrp)[:, None])
            sums = [np.sum(p, axis=-1) for p in parts]
            if fixed is None:
                ntail = max(n_max // 20, 5)
                tail = sum(np.sum(np.abs(p[:, -ntail:]), axis=-1) for p in parts)
                total = sum(np.abs(sm) for sm in sums)
                scale = np.maximum(total, 1e-300)
                worst = max(worst, float(np.max(tail / scale)))
            local = _local_to_matrix(tuple(sums))
            pref = (1j * w / (4 * np.pi))[:, None, None]
            out[lo:lo + chunk] = pref * (Q @ local @ Q.T)
        if fixed is not None or worst < tol:
            return out, n_max
        if n_max >= max_lmax:
            raise MieConvergenceError(
                f"Mie series not converged at l_max={n_max} (relative tail {worst:.2e})",
                {"l_max": n_max, "tail": worst, "tol": tol},
            )
        n_max = min(int(n_max * 1.6) + 10, max_lmax)


def sphere_scattering_green(sphere: SphereGeometry, r, r_prime, omega,
                            l_max: int | None = None) -> GreenTensor:
    """Scattering part of the Green tensor outside a dielectric sphere.

    Regular at r = r'. Raises ``GeometryError`` for points inside the sphere and
    ``MieConvergenceError`` if the series tail does not fall below tolerance.
    """
    if not omega > 0:
        raise ValueError("omega must be positive")
    G, lm = sphere_scattering_array(sphere, r, r_prime, [omega], l_max=l_max)
    return GreenTensor(G[0], _vec(r), _vec(r_prime), float(omega), "sphere_scattering", True, lm)


def total_green(geometry, r, r_prime, omega, imag_only: bool = False) -> GreenTensor:
    """Homogeneous plus scattering Green tensor for ``geometry``.

    ``geometry`` is ``None``/``Vacuum()``, ``Bulk`` or ``SphereGeometry``.
    At coincident points the real part is undefined (NaN) and only returned
    when ``imag_only`` is set.
    """
    r, rp = _vec(r), _vec(r_prime)
    if geometry is None or isinstance(geometry, Vacuum):
        g = vacuum_green(r, rp, omega, imag_only=imag_only)
        return GreenTensor(g.matrix, r, rp, omega, "total", g.real_defined)
    if isinstance(geometry, Bulk):
        g = bulk_green(geometry.material, r, rp, omega)
        return GreenTensor(g.matrix, r, rp, omega, "total")
    if isinstance(geometry, SphereGeometry):
        geometry.check_outside(r, rp)
        g0 = vacuum_green(r, rp, omega, imag_only=imag_only)
        gs = sphere_scattering_green(geometry, r, rp, omega)
        return GreenTensor(g0.matrix + gs.matrix, r, rp, omega, "total",
                           g0.real_defined, gs.l_max)
    raise TypeError(f"unknown geometry {geometry!r}")


def projected_im_green(geometry, r, r_prime, u, v, omegas, scattering_only=False):
    """u . Im G(r, r', omega) . v on an array of frequencies (real dipoles)."""
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    u = np.real(np.asarray(u))
    v = np.real(np.asarray(v))
    out = np.zeros(omegas.size)
    if isinstance(geometry, SphereGeometry):
        Gs, _ = sphere_scattering_array(geometry, r, r_prime, omegas)
        out += np.einsum("i,wij,j->w", u, Gs.imag, v)
        if scattering_only:
            return out
        geometry = None
    if scattering_only:
        return out
    d = (_vec(r) - _vec(r_prime)) * TWO_PI
    R = float(np.linalg.norm(d))
    if R == 0.0:
        if isinstance(geometry, Bulk):
            raise SingularityError("bulk Green tensor diverges at r = r'")
        return out + (u @ v) * omegas / (6 * np.pi)
    rh = d / R
    uv, ur, vr = u @ v, u @ rh, v @ rh
    if isinstance(geometry, Bulk):
        k = refractive_index(geometry.material, omegas) * omegas
        x = k * R
        e = np.exp(1j * x) / (4 * np.pi * R)
        a = 1 + 1j / x - 1 / x**2
        b = -1 - 3j / x + 3 / x**2
        return out + np.imag(e * (a * uv + b * ur * vr))
    x = omegas * R
    j0 = _sph_jn(0, x)
    j1x = _j1_over_x(x)
    return out + (omegas / (4 * np.pi)) * ((j0 - j1x) * (uv - ur * vr) + 2 * j1x * ur * vr)


# --------------------------------------------------------------------------
# resonance location


def _lorentz(w, amp, w0, hw, c0, c1):
    return amp * hw**2 / ((w - w0) ** 2 + hw**2) + c0 + c1 * (w - w0)


def fit_lorentzian(omega, values, guess=None):
    """Least-squares fit of a Lorentzian with linear background.

    Parameters are (amplitude, center, half width at half maximum, offset,
    slope). Returns (params, relative rms residual).
    """
    omega = np.asarray(omega, dtype=float)
    values = np.asarray(values, dtype=float)
    if guess is None:
        i = int(np.argmax(values))
        base = float(np.min(values))
        half = base + 0.5 * (values[i] - base)
        above = omega[values > half]
        hw = max(0.5 * (above.max() - above.min()), np.min(np.diff(omega)))
        guess = (values[i] - base, omega[i], hw, base, 0.0)
    w0 = guess[1]
    scale_w = abs(guess[2])
    scale_v = max(abs(guess[0]), 1e-300)

    def resid(p):
        amp, dw0, hw, c0, c1 = p
        model = _lorentz(omega, amp * scale_v, w0 + dw0 * scale_w, hw * scale_w,
                         c0 * scale_v, c1 * scale_v / scale_w)
        return (model - values) / scale_v

    p0 = np.array([guess[0] / scale_v, 0.0, 1.0, guess[3] / scale_v, guess[4] * scale_w / scale_v])
    sol = optimize.least_squares(resid, p0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
    amp, dw0, hw, c0, c1 = sol.x
    params = (amp * scale_v, w0 + dw0 * scale_w, abs(hw) * scale_w, c0 * scale_v,
              c1 * scale_v / scale_w)
    rms = float(np.sqrt(np.mean(sol.fun**2)))
    return params, rms


def find_resonance(geometry, probe_position, dipole_direction, bracket,
                   n_scan: int = 1601, prominence: float = 0.05,
                   func=None) -> ResonanceInfo:
    """Locate and characterise a single peak of u . Im G(r, r, omega) . u.

    The bracket is scanned, the unique peak is refined by bounded
    maximisation, the half width is bracketed by root finding at half
    maximum, and a Lorentzian plus linear background is fitted on +-5 half
    widths around the centre.

    ``func`` may replace the Green-tensor projection with any callable of an
    array of frequencies (used for synthetic checks).
    """
    lo, hi = map(float, bracket)
    if not hi > lo:
        raise ValueError("bracket must be increasing")
    u = np.asarray(dipole_direction, dtype=float)
    u = u / np.linalg.norm(u)
    if func is None:
        def func(ws):
            return projected_im_green(geometry, probe_position, probe_position, u, u, ws)

    ws = np.linspace(lo, hi, n_scan)
    f = func(ws)
    span = float(f.max() - f.min())
    if span <= 0:
        raise ResonanceSearchError("projected Im G is flat in the bracket")
    peaks, props = signal.find_peaks(f, prominence=prominence * span)
    if len(peaks) == 0:
        raise ResonanceSearchError("no peak inside the bracket")
    if len(peaks) > 1:
        raise ResonanceSearchError(
            f"{len(peaks)} peaks inside the bracket at omega = {ws[peaks].tolist()}"
        )
    ip = int(peaks[0])
    step = ws[1] - ws[0]
    a, b = ws[max(ip - 1, 0)], ws[min(ip + 1, n_scan - 1)]

    def neg(w):
        return -float(func(np.array([w]))[0])

    res = optimize.minimize_scalar(neg, bounds=(a, b), method="bounded",
                                   options={"xatol": 1e-13 * max(1.0, abs(a))})
    w_pk = float(res.x)
    f_pk = -float(res.fun)
    base = float(props["left_bases"][0]), float(props["right_bases"][0])
    f_base = float(min(f[int(base[0])], f[int(base[1])]))
    half = f_base + 0.5 * (f_pk - f_base)

    def g(w):
        return float(func(np.array([w]))[0]) - half

    left = ip
    while left > 0 and f[left] > half:
        left -= 1
    right = ip
    while right < n_scan - 1 and f[right] > half:
        right += 1
    try:
        wl = optimize.brentq(g, ws[left], w_pk, xtol=1e-15)
        wr = optimize.brentq(g, w_pk, ws[right], xtol=1e-15)
        hw = 0.5 * (wr - wl)
    except ValueError:
        hw = step

    wfit = np.linspace(w_pk - 5 * hw, w_pk + 5 * hw, 121)
    ffit = func(wfit)
    params, rms = fit_lorentzian(wfit, ffit, guess=(f_pk - f_base, w_pk, hw, f_base, 0.0))
    amp, w0, hw_fit, c0, c1 = params
    return ResonanceInfo(
        omega_m=w_pk,
        delta_omega_m=float(hw_fit),
        strength=float(f_pk),
        background=float(c0),
        fit_residual=rms,
        extra={"halfmax_width": float(hw), "fit_center": float(w0), "fit_amplitude": float(amp)},
    )
