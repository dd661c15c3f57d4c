"""
Power spectrum of the light emitted by the two-atom system.

Spectra are functions of the detuning Delta = omega_S - omega_tilde_A in
units of gamma0. Emission weights are vectors normalised such that the
spectrum is reported in units of 3 omega_tilde^3 / (64 pi gamma0), i.e. the
weights carry the factor sqrt(64 pi / (3 omega_tilde^3 gamma0)) and are
independent of gamma0.
"""
from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from .coupling import CouplingSet, RegimeError, StrongData
from .green import fit_lorentzian, total_green
from .dynamics import Trajectory

__all__ = [
    "EmissionWeights",
    "ModeWeights",
    "SpectralLine",
    "SpectrumResult",
    "emission_weight_F",
    "emission_weight_W",
    "emission_weights",
    "weak_spectrum",
    "strong_spectrum",
    "finite_time_spectrum",
    "extract_lines",
    "default_grid",
]


@dataclass(frozen=True)
class ModeWeights:
    """Field-resonance contribution to the emission amplitude.

    The detected field from atom j through the resonance is
    g_j dw exp(-(dw + i nu_m) tau) convolved with C_j, with nu_m the
    resonance detuning from the frame frequency (gamma0 units).
    """

    g_A: np.ndarray
    g_B: np.ndarray
    nu_m: float
    delta_omega_m: float


@dataclass(frozen=True)
class EmissionWeights:
    F_A: np.ndarray
    F_B: np.ndarray
    W_A: np.ndarray | None = None
    W_B: np.ndarray | None = None
    detector_position: np.ndarray | None = None
    mode: ModeWeights | None = None

    def __post_init__(self):
        for name in ("F_A", "F_B", "W_A", "W_B"):
            v = getattr(self, name)
            if v is not None:
                v = np.atleast_1d(np.asarray(v, dtype=complex))
                if not np.all(np.isfinite(v)):
                    raise ValueError(f"{name} is not finite")
                object.__setattr__(self, name, v)


@dataclass(frozen=True)
class SpectralLine:
    position: float
    width: float
    weight: float
    kind: str

    def as_dict(self):
        return {"position": self.position, "width": self.width, "weight": self.weight,
                "kind": self.kind}


@dataclass
class SpectrumResult:
    """S on a detuning grid (gamma0 units) with line metadata.

    Line widths are full widths at half maximum.
    """

    delta: np.ndarray
    S: np.ndarray
    lines: list = field(default_factory=list)
    omega_ref: float | None = None
    gamma0: float | None = None
    meta: dict = field(default_factory=dict)

    @property
    def omega_S(self):
        if self.omega_ref is None or self.gamma0 is None:
            raise ValueError("absolute frequencies need omega_ref and gamma0")
        return self.omega_ref + self.delta * self.gamma0

    def to_csv(self, path, header_lines=()):
        with open(path, "w", newline="") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            w = csv.writer(fh, lineterminator="\n")
            absolute = self.omega_ref is not None and self.gamma0 is not None
            w.writerow((["omega_S"] if absolute else []) + ["delta", "S"])
            om = self.omega_S if absolute else None
            for i, (d, s) in enumerate(zip(self.delta, self.S)):
                row = ([repr(float(om[i]))] if absolute else []) + [repr(float(d)), repr(float(s))]
                w.writerow(row)

    def lines_json(self, path=None):
        text = json.dumps({"lines": [ln.as_dict() for ln in self.lines],
                           "width_convention": "FWHM", "units": "gamma0"},
                          indent=2, sort_keys=True)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text


# --------------------------------------------------------------------------
# weights


def emission_weight_F(position, dipole, omega_tilde, detector, geometry,
                      method: str = "kk"):
    """Weak-coupling emission weight of one atom (normalised).

    ``method='kk'`` keeps the full zeta kernel, pi delta + i PV, whose PV part
    is the Kramers-Kronig transform of Im G, giving -(8 pi i / w) G(r, r_A) u.
    ``method='delta'`` keeps only the pi delta part, (8 pi / w) Im G(r, r_A) u.
    """
    G = total_green(geometry, detector, position, omega_tilde)
    u = np.asarray(dipole)
    if method == "kk":
        return -(8j * np.pi / omega_tilde) * (G.matrix @ u)
    if method == "delta":
        return (8 * np.pi / omega_tilde) * (G.imag @ u)
    raise ValueError("method must be 'kk' or 'delta'")


def emission_weight_W(position, dipole, omega_tilde, detector, geometry, resonance,
                      Omega):
    """Strong-coupling weight omega_m^2 (dw/Omega) Im G(r, r_A, omega_m) d (normalised)."""
    G = total_green(geometry, detector, position, resonance.omega_m)
    pref = 8 * np.pi * resonance.omega_m**2 / omega_tilde**3
    return pref * (resonance.delta_omega_m / Omega) * (G.imag @ np.asarray(dipole))


def emission_weights(pair, detector, geometry, coupling: CouplingSet | None = None,
                     resonance=None, method: str = "kk") -> EmissionWeights:
    """F (and, with a resonance and strong data, W and mode) weights for a pair."""
    ra, ua, wa = pair.atom("A")
    rb, ub, wb = pair.atom("B")
    FA = emission_weight_F(ra, ua, wa, detector, geometry, method)
    FB = emission_weight_F(rb, ub, wb, detector, geometry, method)
    WA = WB = None
    mode = None
    if resonance is not None and coupling is not None and coupling.strong is not None:
        Om = coupling.strong.Omega
        # Omega is in gamma0 units, the resonance width in omega_T units
        WA = emission_weight_W(ra, ua, wa, detector, geometry, resonance, Om * pair.gamma0)
        WB = emission_weight_W(rb, ub, wb, detector, geometry, resonance, Om * pair.gamma0)
        gA = WA * Om / coupling.strong.delta_omega_m
        gB = WB * Om / coupling.strong.delta_omega_m
        nu_m = (resonance.omega_m - wa) / pair.gamma0
        mode = ModeWeights(gA, gB, nu_m, coupling.strong.delta_omega_m)
    return EmissionWeights(FA, FB, WA, WB, np.asarray(detector, dtype=float), mode)


# --------------------------------------------------------------------------
# closed forms


def default_grid(coupling: CouplingSet, n: int = 4001):
    """Grid centred on omega_tilde_A spanning max(10 G, 4|delta|, 4 Omega).

    The point count is raised (up to 200001) so that the narrowest line is
    sampled at least four times per width.
    """
    d4 = 4 * abs(np.real(coupling.delta_AB))
    sd = coupling.strong
    if sd is None:
        span = max(10 * abs(coupling.gamma_plus), d4)
        widths = [abs(coupling.gamma_plus), abs(coupling.gamma_minus)]
    else:
        # the strongly coupled channel is replaced by the mode pair
        span = max(10 * abs(sd.gamma_weak), d4, 4 * sd.Omega)
        widths = [abs(sd.gamma_weak), sd.delta_omega_m]
    span = max(span, 1e-3)
    narrow = min(w for w in widths if w > 0) if any(w > 0 for w in widths) else span
    need = int(min(200001, np.ceil(2 * span / (0.25 * narrow)) + 1))
    return np.linspace(-span, span, max(n, 2000, need))


def _sq(v):
    return np.sum(np.abs(v) ** 2, axis=-1)


def weak_spectrum(coupling: CouplingSet, weights: EmissionWeights, grid) -> SpectrumResult:
    """Doublet spectrum of two identical, equivalent atoms in the weak regime."""
    if not coupling.symmetric:
        raise RegimeError("weak spectrum requires the symmetry condition")
    if not coupling.is_identical(rtol=1e-6):
        raise RegimeError("weak spectrum requires identical atoms at equivalent positions")
    x = np.asarray(grid, dtype=float)
    d = float(np.real(coupling.delta_AB))
    gp, gm = coupling.gamma_plus, coupling.gamma_minus
    Fp = weights.F_A + weights.F_B
    Fm = weights.F_A - weights.F_B
    amp = (Fp[None, :] / (x + d + 0.5j * gp)[:, None]
           + Fm[None, :] / (x - d + 0.5j * gm)[:, None])
    S = 0.25 * _sq(amp)
    lines = [SpectralLine(-d, gp, float(_sq(Fp)), "doublet+"),
             SpectralLine(d, gm, float(_sq(Fm)), "doublet-")]
    return SpectrumResult(x, S, lines, coupling.omega_tilde[0], coupling.gamma0,
                          {"formula": "weak"})


def strong_spectrum(coupling: CouplingSet, weights: EmissionWeights, grid,
                    strong: StrongData | None = None) -> SpectrumResult:
    """Spectrum with one superposition strongly coupled to a field resonance.

    Two lines at -+delta +- Omega/2 of equal width dw and weight |W_A +- W_B|^2,
    plus the residual line of the weakly coupled superposition at +-delta.
    """
    sd = strong if strong is not None else coupling.strong
    if sd is None:
        raise RegimeError("strong spectrum requires strong-coupling data")
    if weights.W_A is None or weights.W_B is None:
        raise ValueError("strong spectrum requires W weights")
    x = np.asarray(grid, dtype=float)
    d = float(np.real(coupling.delta_AB))
    sgn = 1.0 if sd.upper else -1.0
    dw, Om, gw = sd.delta_omega_m, sd.Omega, sd.gamma_weak
    Wc = weights.W_A + sgn * weights.W_B
    Fw = weights.F_A - sgn * weights.F_B
    c = (x + sgn * d)[:, None]
    amp = (Wc[None, :] / (c + 0.5 * Om + 0.5j * dw) - Wc[None, :] / (c - 0.5 * Om + 0.5j * dw)
           + 1j * Fw[None, :] / (x - sgn * d + 0.5j * gw)[:, None])
    S = 0.25 * _sq(amp)
    wpair = float(_sq(Wc))
    lines = [SpectralLine(-sgn * d - 0.5 * Om, dw, wpair, "triplet-pair"),
             SpectralLine(-sgn * d + 0.5 * Om, dw, wpair, "triplet-pair"),
             SpectralLine(sgn * d, gw, float(_sq(Fw)), "residual")]
    return SpectrumResult(x, S, lines, coupling.omega_tilde[0], coupling.gamma0,
                          {"formula": "strong"})


# --------------------------------------------------------------------------
# finite-time oracle


def _mode_field(traj: Trajectory, mode: ModeWeights):
    """g dw int_0^t exp(-(dw + i nu)(t - s)) C(s) ds for both atoms (trapezoid, exact decay)."""
    t = traj.times
    lam = mode.delta_omega_m + 1j * mode.nu_m
    out = np.zeros((t.size, mode.g_A.size), dtype=complex)
    for C, g in ((traj.C_A, mode.g_A), (traj.C_B, mode.g_B)):
        acc = np.zeros(t.size, dtype=complex)
        for i in range(1, t.size):
            h = t[i] - t[i - 1]
            r = np.exp(-lam * h)
            acc[i] = r * acc[i - 1] + 0.5 * h * (r * C[i - 1] + C[i])
        out += mode.delta_omega_m * acc[:, None] * g[None, :]
    return out


def finite_time_spectrum(traj: Trajectory, weights: EmissionWeights, grid, T=None,
                         include_mode: bool | None = None) -> SpectrumResult:
    """|int_0^T exp(i Delta t) E(t) dt|^2 with E the detected field amplitude.

    E(t) = F_A C_A(t) + F_B C_B(t), plus the field-resonance filter from
    ``weights.mode`` when present (or forced by ``include_mode``); F should
    then describe the non-resonant background only. The time
    integral uses the exact integral of the piecewise-linear interpolant of E.
    A warning is issued when the amplitudes have not decayed by T.
    """
    t = traj.times
    if T is None:
        T = float(t[-1])
    if T > t[-1] * (1 + 1e-12):
        raise ValueError("trajectory shorter than T")
    keep = t <= T * (1 + 1e-12)
    t = t[keep]
    x = np.asarray(grid, dtype=float)
    if t.size < 2:
        return SpectrumResult(x, np.zeros_like(x), [], meta={"formula": "finite-time", "T": T})
    E = (weights.F_A[None, :] * traj.C_A[keep, None] + weights.F_B[None, :] * traj.C_B[keep, None])
    use_mode = weights.mode is not None if include_mode is None else include_mode
    if use_mode:
        if weights.mode is None:
            raise ValueError("no mode weights available")
        E = E + _mode_field(traj, weights.mode)[keep]
    tail = max(abs(traj.C_A[keep][-1]), abs(traj.C_B[keep][-1]))
    if tail > 1e-3:
        warnings.warn(f"amplitudes not decayed at T (|C| = {tail:.2e}); spectrum truncated",
                      RuntimeWarning, stacklevel=2)
    h = np.diff(t)
    S = np.empty(x.size)
    for lo in range(0, x.size, 256):
        xs = x[lo:lo + 256, None]
        z = 1j * xs * h[None, :]
        small = np.abs(z) < 1e-4
        zs = np.where(small, 1.0, z)
        e0 = np.exp(1j * xs * t[None, :-1])
        # int_0^h e^{i x s} (1 - s/h) ds and int_0^h e^{i x s} s/h ds
        a1 = np.where(small, h * (0.5 + z / 6), h * (np.exp(zs) - 1 - zs) / zs**2)
        a0 = np.where(small, h * (1 + z / 2), h * (np.exp(zs) - 1) / zs) - a1
        amp = np.einsum("wk,kc->wc", e0 * a0, E[:-1]) + np.einsum("wk,kc->wc", e0 * a1, E[1:])
        S[lo:lo + 256] = _sq(amp)
    return SpectrumResult(x, S, [], meta={"formula": "finite-time", "T": T, "tail": float(tail)})


# --------------------------------------------------------------------------


def extract_lines(result: SpectrumResult, min_prominence: float = 0.02, window: float = 5.0):
    """Local maxima with Lorentzian fits over +-``window`` half widths.

    Returns a list of SpectralLine with kind 'fitted' (FWHM widths, peak
    heights as weights).
    """
    x, S = result.delta, result.S
    peaks, props = signal.find_peaks(S, prominence=min_prominence * float(np.max(S)))
    widths = signal.peak_widths(S, peaks, rel_height=0.5)[0] * (x[1] - x[0])
    out = []
    for p, w in zip(peaks, widths):
        hw = max(0.5 * w, x[1] - x[0])
        sel = np.abs(x - x[p]) <= window * hw
        if np.count_nonzero(sel) < 7:
            out.append(SpectralLine(float(x[p]), float(w), float(S[p]), "fitted"))
            continue
        try:
            (amp, c, hwf, _, _), _ = fit_lorentzian(x[sel], S[sel], (S[p], x[p], hw, 0.0, 0.0))
            if abs(c - x[p]) > 2 * hw:
                raise RuntimeError
            out.append(SpectralLine(float(c), float(2 * hwf), float(amp), "fitted"))
        except Exception:
            out.append(SpectralLine(float(x[p]), float(w), float(S[p]), "fitted"))
    return out
