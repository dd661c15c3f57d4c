"""
Two-atom coupling coefficients built from the Green tensor.

Conventions
-----------
Positions in lambda_T, frequencies in omega_T. The transition dipole of each
atom is a unit direction times a magnitude fixed by the free-space decay rate
``gamma0`` at the (shifted) transition frequency,

    |d|^2 = 3 pi gamma0 / omega_tilde^3        (hbar = eps0 = c = 1).

All rates and couplings returned by this module (delta, Gamma, K, Omega) are
in units of gamma0.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import roots_legendre

from .green import (
    TWO_PI,
    ResonanceInfo,
    SphereGeometry,
    projected_im_green,
    sphere_scattering_green,
    total_green,
)
from .material import refractive_index

__all__ = [
    "AtomPair",
    "StrongData",
    "CouplingSet",
    "ShiftResult",
    "RegimeError",
    "delta_coupling",
    "gamma_coupling",
    "k_from",
    "k_coefficient",
    "frequency_shift",
    "resolve_frequencies",
    "pv_coupling_oracle",
    "bulk_limit_delta",
    "check_symmetry_condition",
    "build_coupling",
]


class RegimeError(ValueError):
    """Inputs lie outside the physical regime an operation applies to."""


def _unit(v):
    v = np.asarray(v, dtype=complex)
    nrm = np.linalg.norm(v)
    if not nrm > 0:
        raise ValueError("dipole direction must be non-zero")
    v = v / nrm
    return v.real.copy() if np.all(v.imag == 0) else v


@dataclass(frozen=True)
class AtomPair:
    """Two two-level atoms.

    ``omega_A``/``omega_B`` are bare transition frequencies. The shifted
    frequencies may be given directly (as in the published figures) or
    obtained from :func:`resolve_frequencies`.
    """

    position_A: np.ndarray
    position_B: np.ndarray
    dipole_A: np.ndarray
    dipole_B: np.ndarray
    gamma0: float
    omega_A: float = 1.0
    omega_B: float = 1.0
    omega_tilde_A: float | None = None
    omega_tilde_B: float | None = None

    def __post_init__(self):
        pa = np.asarray(self.position_A, dtype=float)
        pb = np.asarray(self.position_B, dtype=float)
        if pa.shape != (3,) or pb.shape != (3,):
            raise ValueError("positions must be 3-vectors")
        if np.allclose(pa, pb, rtol=0, atol=0):
            raise ValueError("atom positions must be distinct")
        if not self.gamma0 > 0:
            raise ValueError("gamma0 must be positive")
        object.__setattr__(self, "position_A", pa)
        object.__setattr__(self, "position_B", pb)
        object.__setattr__(self, "dipole_A", _unit(self.dipole_A))
        object.__setattr__(self, "dipole_B", _unit(self.dipole_B))

    @property
    def wA(self) -> float:
        return self.omega_A if self.omega_tilde_A is None else self.omega_tilde_A

    @property
    def wB(self) -> float:
        return self.omega_B if self.omega_tilde_B is None else self.omega_tilde_B

    @property
    def separation(self) -> float:
        return float(np.linalg.norm(self.position_A - self.position_B))

    def atom(self, which):
        if which == "A":
            return self.position_A, self.dipole_A, self.wA
        return self.position_B, self.dipole_B, self.wB

    def swapped(self) -> "AtomPair":
        return AtomPair(self.position_B, self.position_A, self.dipole_B, self.dipole_A,
                        self.gamma0, self.omega_B, self.omega_A,
                        self.omega_tilde_B, self.omega_tilde_A)


@dataclass(frozen=True)
class StrongData:
    """Strong-coupling parameters, rates in gamma0 units.

    ``upper`` is True when the symmetric state |+> is the one strongly
    coupled to the field resonance.
    """

    omega_m: float
    delta_omega_m: float
    gamma_plus: float
    gamma_minus: float
    upper: bool
    detuning: float = 0.0

    @property
    def Omega_plus(self) -> float:
        return math.sqrt(max(2 * self.gamma_plus * self.delta_omega_m, 0.0))

    @property
    def Omega_minus(self) -> float:
        return math.sqrt(max(2 * self.gamma_minus * self.delta_omega_m, 0.0))

    @property
    def Omega(self) -> float:
        return self.Omega_plus if self.upper else self.Omega_minus

    @property
    def gamma_weak(self) -> float:
        return self.gamma_minus if self.upper else self.gamma_plus


@dataclass(frozen=True)
class CouplingSet:
    """delta, Gamma and K for an atom pair, all in units of gamma0.

    ``gamma[i, j]`` is Gamma_{i* j} with index 0 = A, 1 = B.
    """

    delta_AB: complex
    delta_BA: complex
    gamma: np.ndarray
    gamma0: float = 1.0
    omega_tilde: tuple = (1.0, 1.0)
    symmetric: bool = True
    symmetry_diagnostic: dict = field(default_factory=dict, compare=False)
    regime: str = "weak"
    strong: StrongData | None = None

    def __post_init__(self):
        g = np.asarray(self.gamma)
        if g.shape != (2, 2):
            raise ValueError("gamma must be 2x2")
        if np.all(np.imag(g) == 0):
            g = np.real(g).astype(float)
        object.__setattr__(self, "gamma", g)

    @classmethod
    def from_rates(cls, gamma_AA, gamma_BB, gamma_AB=0.0, delta_AB=0.0,
                   gamma_BA=None, delta_BA=None, strong: StrongData | None = None,
                   **kw) -> "CouplingSet":
        """Synthetic coupling set from explicit rates (gamma0 units)."""
        gamma_BA = gamma_AB if gamma_BA is None else gamma_BA
        delta_BA = delta_AB if delta_BA is None else delta_BA
        g = np.array([[gamma_AA, gamma_AB], [gamma_BA, gamma_BB]])
        regime = "strong" if strong is not None else "weak"
        return cls(delta_AB, delta_BA, g, strong=strong, regime=regime, **kw)

    @property
    def K_AB(self) -> complex:
        return k_from(self.delta_AB, self.gamma[0, 1])

    @property
    def K_BA(self) -> complex:
        return k_from(self.delta_BA, self.gamma[1, 0])

    @property
    def gamma_plus(self) -> float:
        return float(np.real(self.gamma[0, 0] + self.gamma[0, 1]))

    @property
    def gamma_minus(self) -> float:
        return float(np.real(self.gamma[0, 0] - self.gamma[0, 1]))

    def is_identical(self, rtol: float = 1e-9) -> bool:
        """Identical atoms at equivalent positions (real, symmetric coefficients)."""
        g = np.asarray(self.gamma)
        scale = max(abs(g[0, 0]), abs(g[1, 1]), abs(self.delta_AB), 1e-300)
        return bool(
            abs(g[0, 0] - g[1, 1]) <= rtol * scale
            and abs(g[0, 1] - g[1, 0]) <= rtol * scale
            and abs(self.delta_AB - self.delta_BA) <= rtol * scale
            and abs(np.imag(self.delta_AB)) <= rtol * scale
            and abs(np.imag(g[0, 1])) <= rtol * scale
        )


# --------------------------------------------------------------------------


def _dd(gamma0, wa, wb):
    """|d_A| |d_B| in natural units."""
    return 3 * np.pi * gamma0 / (wa * wb) ** 1.5


def _green_between(geometry, ra, rb, w, imag_only=False):
    return total_green(geometry, ra, rb, w, imag_only=imag_only)


def delta_coupling(pair: AtomPair, geometry, order: str = "AB", omega: float | None = None):
    """RDDI strength delta_{A* B} (or delta_{B* A} for ``order='BA'``), gamma0 units.

    Uses the real part of the full (vacuum plus scattering) Green tensor
    between the two atoms at the shifted frequency of the second index,
    which includes both co- and counter-rotating contributions.
    """
    p = pair if order == "AB" else pair.swapped()
    ra, ua, wa = p.atom("A")
    rb, ub, wb = p.atom("B")
    w = wb if omega is None else omega
    G = _green_between(geometry, ra, rb, w)
    proj = np.conj(ua) @ G.real @ ub
    val = w**2 * _dd(p.gamma0, wa, wb) * proj / p.gamma0
    return complex(val) if np.iscomplexobj(val) and np.imag(val) != 0 else float(np.real(val))


def gamma_coupling(pair: AtomPair, geometry, omega: float | None = None):
    """2x2 matrix Gamma_{i* j} (gamma0 units).

    By default each column is evaluated at the shifted frequency of atom j;
    ``omega`` forces a common evaluation frequency (e.g. the field resonance).
    """
    atoms = [pair.atom("A"), pair.atom("B")]
    out = np.zeros((2, 2), dtype=complex)
    for i, (ri, ui, wi) in enumerate(atoms):
        for j, (rj, uj, wj) in enumerate(atoms):
            w = wj if omega is None else omega
            G = _green_between(geometry, ri, rj, w, imag_only=(i == j))
            proj = np.conj(ui) @ G.imag @ uj
            out[i, j] = 2 * w**2 * _dd(pair.gamma0, wi, wj) * proj / pair.gamma0
    if np.all(np.abs(out.imag) <= 1e-14 * np.max(np.abs(out))):
        return out.real
    return out


def k_from(delta, gamma_ab):
    """K = -Gamma/2 + i delta."""
    return -0.5 * gamma_ab + 1j * delta


def k_coefficient(pair: AtomPair, geometry):
    """(K_{A* B}, K_{B* A}) in gamma0 units."""
    g = gamma_coupling(pair, geometry)
    return (k_from(delta_coupling(pair, geometry, "AB"), g[0, 1]),
            k_from(delta_coupling(pair, geometry, "BA"), g[1, 0]))


@dataclass(frozen=True)
class ShiftResult:
    shift: float
    omega_tilde: float
    converged: bool
    iterations: int = 2


def _shift_at(position, dipole, omega_bare, w, gamma0, geometry):
    if not isinstance(geometry, SphereGeometry):
        return 0.0
    Gs = sphere_scattering_green(geometry, position, position, w)
    u = np.asarray(dipole)
    proj = np.real(np.conj(u) @ Gs.matrix.real @ u)
    return float(omega_bare**2 * 3 * np.pi * gamma0 / w**3 * proj / gamma0)


def frequency_shift(position, dipole, omega_bare, gamma0, geometry,
                    rtol: float = 1e-3) -> ShiftResult:
    """Body-induced level shift delta_{A* A} (gamma0 units) and omega_tilde.

    Only the scattering part of Re G enters; the free-space part is taken to
    be contained in the bare frequency, and the counter-rotating correction
    is neglected. One fixed-point pass: evaluate at the bare frequency, then
    at the resulting shifted frequency, and report whether the two agree to
    ``rtol``.
    """
    dipole = _unit(dipole)
    s1 = _shift_at(position, dipole, omega_bare, omega_bare, gamma0, geometry)
    if s1 == 0.0:
        return ShiftResult(0.0, float(omega_bare), True, 1)
    w1 = omega_bare - s1 * gamma0
    s2 = _shift_at(position, dipole, omega_bare, w1, gamma0, geometry)
    conv = abs(s2 - s1) <= rtol * max(abs(s2), 1e-300)
    return ShiftResult(s2, float(omega_bare - s2 * gamma0), bool(conv), 2)


def resolve_frequencies(pair: AtomPair, geometry) -> AtomPair:
    """Fill in shifted frequencies from the bare ones where they are missing."""
    wa, wb = pair.omega_tilde_A, pair.omega_tilde_B
    if wa is None:
        wa = frequency_shift(pair.position_A, pair.dipole_A, pair.omega_A,
                             pair.gamma0, geometry).omega_tilde
    if wb is None:
        wb = frequency_shift(pair.position_B, pair.dipole_B, pair.omega_B,
                             pair.gamma0, geometry).omega_tilde
    return replace(pair, omega_tilde_A=wa, omega_tilde_B=wb)


# --------------------------------------------------------------------------
# principal-value oracle


def _gl_panels(edges, order):
    x, w = roots_legendre(order)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (b - a) * x[None, :] + 0.5 * (b + a)
    weights = 0.5 * (b - a) * w[None, :]
    return nodes.ravel(), weights.ravel()


def pv_coupling_oracle(pair: AtomPair, geometry, omega_grid=None, order: str = "AB",
                       part: str = "total", cutoff: float | None = None,
                       panel_order: int = 16, im_func=None):
    """delta_{A* B} from the principal-value frequency integral (gamma0 units).

    Evaluates (|d_A||d_B|/pi) PV int_0^inf dw w^2 u_A.Im G(w).u_B
    [1/(w - wt) + 1/(w + wt)] numerically, independently of the real part of
    the Green tensor. The free-space tensor grows along the real axis, so the
    integrand carries a Gaussian convergence factor exp(-(w/cutoff)^2); the
    regularisation bias is O((cutoff R)^-2). The pole is removed by
    subtracting the integrand value at w = wt over a panel symmetric about it.

    ``omega_grid`` gives the panel edges (must start at 0 and extend well past
    the cutoff); by default it is generated from the separation. ``part`` may
    be ``'scattering'`` to transform only the sphere scattering part.
    ``im_func`` overrides the projected Im G (array of w -> array).
    """
    p = pair if order == "AB" else pair.swapped()
    ra, ua, wa = p.atom("A")
    rb, ub, wb = p.atom("B")
    wt = wb
    R = float(np.linalg.norm(ra - rb)) * TWO_PI
    if cutoff is None:
        cutoff = max(400.0 / R, 60.0 * wt)
    if omega_grid is None:
        top = 6.5 * cutoff
        npan = int(max(200, 4 * top * R / (2 * np.pi) + 200))
        edges = np.unique(np.concatenate([
            np.linspace(0.0, 2 * wt, 41),
            np.linspace(2 * wt, top, npan),
        ]))
    else:
        edges = np.asarray(omega_grid, dtype=float)
    warn = []
    if edges[0] != 0.0:
        warn.append("grid does not start at 0")
    if edges[-1] < 5.0 * cutoff:
        warn.append("grid ends before the convergence factor has decayed")
    if cutoff * R < 100.0:
        warn.append(f"cutoff*R = {cutoff * R:.1f} < 100; regularisation bias above 1e-4")
    if warn:
        warnings.warn("pv_coupling_oracle: " + "; ".join(warn), RuntimeWarning, stacklevel=2)

    if im_func is None:
        def im_func(ws):
            if np.iscomplexobj(ua) or np.iscomplexobj(ub):
                raise ValueError("PV oracle supports real dipoles only")
            return projected_im_green(geometry, ra, rb, ua, ub, ws,
                                      scattering_only=(part == "scattering"))

    # symmetric window around the pole, handled by subtraction
    h = min(0.5 * wt, edges[-1] - wt)
    lo, hi = wt - h, wt + h
    inner = np.linspace(lo, hi, 65)
    outer_edges = np.unique(np.concatenate([edges[edges < lo], [lo], [hi], edges[edges > hi]]))
    outer_edges = outer_edges[(outer_edges <= lo) | (outer_edges >= hi)]
    left = outer_edges[outer_edges <= lo]
    right = outer_edges[outer_edges >= hi]
    xn_i, wn_i = _gl_panels(inner, panel_order)
    parts = []
    for e in (left, right):
        if e.size >= 2:
            parts.append(_gl_panels(e, panel_order))
    xo = np.concatenate([q[0] for q in parts]) if parts else np.empty(0)
    wo = np.concatenate([q[1] for q in parts]) if parts else np.empty(0)

    def g(ws):
        return ws**2 * im_func(ws) * np.exp(-(ws / cutoff) ** 2)

    g_o = g(xo)
    total = np.sum(wo * g_o * (1.0 / (xo - wt) + 1.0 / (xo + wt)))
    g_i = g(xn_i)
    g0 = float(g(np.array([wt]))[0])
    total += np.sum(wn_i * ((g_i - g0) / (xn_i - wt) + g_i / (xn_i + wt)))
    # PV of g0/(w - wt) over the symmetric window vanishes
    val = _dd(p.gamma0, wa, wb) / np.pi * total / p.gamma0
    return float(val)


# --------------------------------------------------------------------------


def bulk_limit_delta(model, pair: AtomPair, mode: str = "short"):
    """Closed-form delta_{A* B} (gamma0 units) for atoms embedded in bulk.

    ``short``: Re[1/eps] (3 (dA.R)(dB.R)/R^2 - dA.dB) / (4 pi R^3);
    ``long``:  w^2 (dA.dB - (dA.R)(dB.R)/R^2) cos(n_R w R) exp(-n_I w R) / (4 pi R).
    """
    ra, ua, wa = pair.atom("A")
    rb, ub, wb = pair.atom("B")
    Rv = (ra - rb) * TWO_PI
    R = np.linalg.norm(Rv)
    rh = Rv / R
    ua_c = np.conj(ua)
    dd = _dd(pair.gamma0, wa, wb)
    if mode == "short":
        eps = model(wb)
        ang = 3 * (ua_c @ rh) * (ub @ rh) - ua_c @ ub
        val = dd * np.real(1.0 / eps) * ang / (4 * np.pi * R**3)
    elif mode == "long":
        n = refractive_index(model, wb)
        ang = ua_c @ ub - (ua_c @ rh) * (ub @ rh)
        val = dd * wb**2 * ang * np.cos(n.real * wb * R) * np.exp(-n.imag * wb * R) / (4 * np.pi * R)
    else:
        raise ValueError("mode must be 'short' or 'long'")
    val = val / pair.gamma0
    return float(np.real(val)) if np.imag(val) == 0 else complex(val)


def check_symmetry_condition(pair: AtomPair, geometry, threshold: float = 1e-3):
    """Whether delta_{A* B} barely changes between the two shifted frequencies.

    Returns (flag, diagnostic) where the diagnostic holds both values and
    their relative difference.
    """
    d_b = delta_coupling(pair, geometry, "AB", omega=pair.wB)
    d_a = delta_coupling(pair, geometry, "AB", omega=pair.wA)
    scale = max(abs(d_a), abs(d_b), 1e-300)
    rel = abs(d_a - d_b) / scale
    return rel < threshold, {"delta_at_wA": d_a, "delta_at_wB": d_b, "relative_difference": rel,
                             "threshold": threshold}


def build_coupling(pair: AtomPair, geometry, resonance: ResonanceInfo | None = None,
                   symmetry_threshold: float = 1e-3) -> CouplingSet:
    """Assemble the full coupling set for a pair (shifted frequencies resolved first).

    With a ``resonance`` the strong-coupling data are attached: Gamma at
    omega_m, Omega_pm and the detuning of the strongly coupled channel. The
    regime is 'strong' when the larger Omega exceeds the resonance half width
    and that channel lies within Omega of omega_m.
    """
    pair = resolve_frequencies(pair, geometry)
    d_ab = delta_coupling(pair, geometry, "AB")
    d_ba = delta_coupling(pair, geometry, "BA")
    g = gamma_coupling(pair, geometry)
    flag, diag = check_symmetry_condition(pair, geometry, symmetry_threshold)
    strong = None
    regime = "weak"
    if resonance is not None:
        gpk = gamma_coupling(pair, geometry, omega=resonance.omega_m)
        gp = float(np.real(gpk[0, 0] + gpk[0, 1]))
        gm = float(np.real(gpk[0, 0] - gpk[0, 1]))
        dw = resonance.delta_omega_m / pair.gamma0
        upper = gp >= gm
        # exact resonance for the strongly coupled channel: omega_m = wA -+ delta
        chan = pair.wA - (1 if upper else -1) * np.real(d_ab) * pair.gamma0
        det = (chan - resonance.omega_m) / pair.gamma0
        strong = StrongData(resonance.omega_m, dw, gp, gm, upper, det)
        if strong.Omega > dw and abs(det) < strong.Omega:
            regime = "strong"
    return CouplingSet(d_ab, d_ba, g, pair.gamma0, (pair.wA, pair.wB), flag, diag, regime, strong)
