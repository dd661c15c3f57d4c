"""
Complex permittivity of the dispersing, absorbing medium.

All frequencies are in units of the transverse resonance frequency
``omega_T`` (which is fixed to 1). The single-resonance Drude-Lorentz form

    eps(w) = background + w_P**2 / (w_T**2 - w**2 - i*gamma*w)

is causal and satisfies eps(-w*) = eps(w)*, Im eps > 0 for w > 0.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.integrate import trapezoid

__all__ = [
    "PermittivityModel",
    "TabulatedPermittivity",
    "KramersKronigResult",
    "permittivity",
    "refractive_index",
    "kramers_kronig_residual",
    "load_permittivity_table",
]


class MaterialDomainError(ValueError):
    """Raised for frequencies outside the domain of a permittivity model."""


def _check_omega(omega):
    omega = np.asarray(omega, dtype=float)
    if np.any(~(omega > 0)):
        raise MaterialDomainError("permittivity requires omega > 0")
    return omega


@dataclass(frozen=True)
class PermittivityModel:
    """Single-resonance Drude-Lorentz dielectric.

    Parameters
    ----------
    omega_P : float
        Coupling (plasma) frequency in units of omega_T.
    gamma_abs : float
        Absorption parameter in units of omega_T, must be positive.
    background : float
        Real frequency-independent offset; 1 for a vacuum background.
    omega_T : float
        Transverse resonance frequency. It is the frequency unit and is
        expected to be 1; other values are accepted for tests.
    """

    omega_P: float = 0.5
    gamma_abs: float = 1e-6
    background: float = 1.0
    omega_T: float = 1.0

    def __post_init__(self):
        if not self.gamma_abs > 0:
            raise ValueError("gamma_abs must be positive")
        if self.omega_P < 0:
            raise ValueError("omega_P must be non-negative")
        if self.omega_T <= 0:
            raise ValueError("omega_T must be positive")

    @property
    def is_vacuum(self) -> bool:
        return self.omega_P == 0 and self.background == 1.0

    @property
    def omega_L(self) -> float:
        """Longitudinal frequency, upper edge of the band gap."""
        return float(np.sqrt(self.omega_T**2 + self.omega_P**2 / self.background))

    def __call__(self, omega):
        omega = _check_omega(omega)
        eps = self.background + self.omega_P**2 / (
            self.omega_T**2 - omega**2 - 1j * self.gamma_abs * omega
        )
        return eps if eps.ndim else complex(eps)

    def analytic(self, omega):
        """Evaluate the formula at arbitrary complex frequency (no domain check)."""
        omega = np.asarray(omega, dtype=complex)
        return self.background + self.omega_P**2 / (
            self.omega_T**2 - omega**2 - 1j * self.gamma_abs * omega
        )


@dataclass(frozen=True)
class TabulatedPermittivity:
    """Permittivity interpolated linearly (Re and Im separately) from a table.

    Queries outside the tabulated range raise ``MaterialDomainError``.
    """

    omega: np.ndarray
    eps: np.ndarray
    source: str = ""

    def __post_init__(self):
        w = np.asarray(self.omega, dtype=float)
        e = np.asarray(self.eps, dtype=complex)
        if w.ndim != 1 or w.shape != e.shape or w.size < 2:
            raise ValueError("table needs matching 1-d omega and eps columns")
        if np.any(np.diff(w) <= 0):
            raise ValueError("table frequencies must be strictly increasing")
        object.__setattr__(self, "omega", w)
        object.__setattr__(self, "eps", e)

    @property
    def is_vacuum(self) -> bool:
        return bool(np.all(self.eps == 1))

    def __call__(self, omega):
        omega = _check_omega(omega)
        if np.any(omega < self.omega[0]) or np.any(omega > self.omega[-1]):
            raise MaterialDomainError(
                f"omega outside tabulated range [{self.omega[0]}, {self.omega[-1]}]"
            )
        re = np.interp(omega, self.omega, self.eps.real)
        im = np.interp(omega, self.omega, self.eps.imag)
        out = re + 1j * im
        return out if out.ndim else complex(out)


def load_permittivity_table(path) -> TabulatedPermittivity:
    """Read a whitespace-separated table with columns omega, Re eps, Im eps.

    Lines starting with '#' are comments.
    """
    data = np.loadtxt(path, comments="#", ndmin=2)
    if data.shape[1] != 3:
        raise ValueError(f"{path}: expected 3 columns (omega, Re eps, Im eps)")
    return TabulatedPermittivity(data[:, 0], data[:, 1] + 1j * data[:, 2], str(Path(path)))


def permittivity(model, omega):
    """Complex permittivity eps(omega) for omega > 0."""
    return model(omega)


def refractive_index(model, omega):
    """Complex refractive index n = sqrt(eps) on the branch with Im n >= 0."""
    eps = np.asarray(model(omega), dtype=complex)
    n = np.sqrt(eps)
    # principal root has Re n >= 0; enforce Im n >= 0 for decaying waves
    n = np.where(n.imag < 0, -n, n)
    return n if n.ndim else complex(n)


@dataclass(frozen=True)
class KramersKronigResult:
    residual: float
    relative_residual: float
    grid_warning: bool
    message: str = ""


def _pv_on_grid(x, g, x0):
    """PV integral of g(x)/(x - x0) over the grid x by singularity subtraction."""
    g0 = np.interp(x0, x, g)
    with np.errstate(divide="ignore", invalid="ignore"):
        f = (g - g0) / (x - x0)
    hit = np.isclose(x, x0, rtol=0, atol=0)
    if np.any(hit):
        f[hit] = np.gradient(g, x)[hit]
    integral = trapezoid(f, x)
    return integral + g0 * np.log((x[-1] - x0) / (x0 - x[0]))


def kramers_kronig_residual(model, omega_grid, n_eval: int = 400) -> KramersKronigResult:
    """Check Re eps against the Kramers-Kronig transform of Im eps on a grid.

    Returns the maximum of |Re eps(w) - bg - (2/pi) PV int w' Im eps(w')/(w'^2-w^2) dw'|
    over up to ``n_eval`` interior grid points, together with its value
    relative to max |eps - bg| on the grid. ``grid_warning`` is set when the
    absorption peak is not resolved or is cut by the grid edges.
    """
    w = np.asarray(omega_grid, dtype=float)
    if w.ndim != 1 or w.size < 16 or np.any(np.diff(w) <= 0):
        raise ValueError("omega_grid must be an increasing 1-d grid with >= 16 points")
    eps = np.asarray(model(w), dtype=complex)
    background = getattr(model, "background", 1.0)
    im = eps.imag
    if not np.any(im > 0):
        return KramersKronigResult(0.0, 0.0, False, "no absorption on grid")

    warn_flag = False
    msg = []
    ipk = int(np.argmax(im))
    above = im > 0.5 * im[ipk]
    if ipk == 0 or ipk == w.size - 1:
        warn_flag = True
        msg.append("absorption maximum at grid edge")
    if np.count_nonzero(above) < 5:
        warn_flag = True
        msg.append("absorption peak resolved by fewer than 5 points")
    if max(im[0], im[-1]) > 1e-3 * im[ipk]:
        warn_flag = True
        msg.append("absorption not negligible at grid edges")

    idx = np.unique(np.linspace(1, w.size - 2, min(n_eval, w.size - 2)).astype(int))
    resid = np.empty(idx.size)
    for j, i in enumerate(idx):
        w0 = w[i]
        g = (2.0 / np.pi) * w * im / (w + w0)
        kk = _pv_on_grid(w, g, w0)
        resid[j] = abs(eps[i].real - background - kk)
    scale = np.max(np.abs(eps - background))
    worst = float(resid.max())
    rel = worst / scale if scale > 0 else 0.0
    if warn_flag:
        warnings.warn("Kramers-Kronig check: " + "; ".join(msg), RuntimeWarning, stacklevel=2)
    return KramersKronigResult(worst, rel, warn_flag, "; ".join(msg))
