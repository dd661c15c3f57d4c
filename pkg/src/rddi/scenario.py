"""
Scenario files: schema, validation and execution.

A scenario is a YAML mapping with the blocks ``material``, ``geometry``,
``atoms``, ``detector``, ``resonance``, ``run`` and ``output``. Unknown keys
are errors. All quantities use omega_T = 1, lengths in lambda_T, rates and
times in gamma0 units (the frequency scale of spectra is gamma0 relative to
omega_tilde_A). See ``docs/scenario.md`` for the full schema.
"""
from __future__ import annotations

import copy
import csv
import hashlib
import json
import math
import os
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import scipy
import yaml
from scipy import optimize

from . import __version__
from .coupling import (
    AtomPair,
    CouplingSet,
    RegimeError,
    build_coupling,
    frequency_shift,
    gamma_coupling,
    delta_coupling,
)
from .dynamics import (
    KernelSpec,
    Trajectory,
    golden_rule_rate,
    strong_amplitudes,
    volterra_solve,
    weak_amplitudes,
)
from .green import (
    Bulk,
    GeometryError,
    ResonanceInfo,
    SphereGeometry,
    Vacuum,
    find_resonance,
    projected_im_green,
    sphere_scattering_array,
    total_green,
    vacuum_green,
)
from .material import PermittivityModel, load_permittivity_table
from .spectrum import (
    EmissionWeights,
    default_grid,
    emission_weights,
    extract_lines,
    finite_time_spectrum,
    strong_spectrum,
    weak_spectrum,
)

__all__ = [
    "ConfigError",
    "Scenario",
    "RunResult",
    "MODES",
    "PROFILES",
    "load_scenario",
    "parse_scenario",
    "dump_scenario",
    "preset_names",
    "preset_path",
    "run_scenario",
    "sweep",
    "scalar_paths",
]

MODES = ("dynamics-weak", "dynamics-strong", "dynamics-volterra", "rates", "spectrum-weak",
         "spectrum-strong", "spectrum-numeric", "resonance-scan", "coupling")

PROFILES = {
    "fast": {"mie_tol": 1e-8, "n_scan": 601, "grid_points": 2001},
    "paper": {"mie_tol": 1e-10, "n_scan": 1601, "grid_points": 4001},
}


class ConfigError(ValueError):
    """Invalid scenario file or parameter path."""


# --------------------------------------------------------------------------
# schema

_F, _I, _S, _B, _V = "float", "int", "str", "bool", "vec"

SCHEMA = {
    "name": _S,
    "description": _S,
    "material": {
        "omega_P": _F,
        "gamma": _F,
        "background": _F,
        "table": _S,
    },
    "geometry": {
        "type": ("enum", ("none", "bulk", "sphere")),
        "diameter": _F,
        "l_max": _I,
    },
    "atoms": {
        "gamma0": _F,
        "omega_A": _F,
        "omega_B": _F,
        "omega_tilde": ("freq",),
        "omega_tilde_A": _F,
        "omega_tilde_B": _F,
        "position_A": _V,
        "position_B": _V,
        "layout": {
            "type": ("enum", ("line", "sphere_surface")),
            "separation": _F,
            "surface_distance": _F,
            "axis": _V,
        },
        "dipole_A": ("dipole",),
        "dipole_B": ("dipole",),
        "complex_dipoles": _B,
    },
    "detector": {
        "position": _V,
        "radial_distance": _F,
    },
    "resonance": {
        "bracket": ("pair",),
        "omega_m": _F,
        "delta_omega_m": _F,
        "n_scan": _I,
    },
    "run": {
        "mode": ("enum", MODES),
        "t_max": _F,
        "dt": _F,
        "T": _F,
        "grid": {"min": _F, "max": _F, "n": _I},
        "weights": ("enum", ("kk", "delta")),
        "kernel": ("enum", ("lorentzian", "tabulated")),
        "kernel_half_width": _F,
        "kernel_points": _I,
        "symmetry_threshold": _F,
        "rddi_ratio": _F,
        "mie_tol": _F,
    },
    "output": {
        "prefix": _S,
    },
}

REQUIRED = {("atoms", "gamma0"), ("run", "mode")}


class _Lines(dict):
    """path tuple -> 1-based line number."""


_CONSTRUCTOR = yaml.constructor.SafeConstructor()


class _Loader(yaml.SafeLoader):
    """Safe loader that also reads exponent floats without a dot (1e-6)."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"""^(?:[-+]?(?:[0-9][0-9_]*)\.[0-9_]*(?:[eE][-+]?[0-9]+)?
    |[-+]?(?:[0-9][0-9_]*)(?:[eE][-+]?[0-9]+)
    |\.[0-9_]+(?:[eE][-+]?[0-9]+)?
    |[-+]?\.(?:inf|Inf|INF)
    |\.(?:nan|NaN|NAN))$""", re.X),
    list("-+0123456789."),
)


def _compose(text, source):
    try:
        node = yaml.compose(text, Loader=_Loader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{source}:{mark.line + 1}" if mark is not None else source
        raise ConfigError(f"{where}: YAML parse error: {getattr(exc, 'problem', exc)}") from None
    if node is None:
        raise ConfigError(f"{source}: empty scenario")
    return node


def _node_to_obj(node, path, lines):
    lines[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        out = {}
        for k, v in node.value:
            key = k.value
            if key in out:
                raise ConfigError(f"line {k.start_mark.line + 1}: duplicate key '{key}'")
            out[key] = _node_to_obj(v, path + (key,), lines)
        return out
    if isinstance(node, yaml.SequenceNode):
        return [_node_to_obj(v, path + (i,), lines) for i, v in enumerate(node.value)]
    return _CONSTRUCTOR.construct_object(node, deep=True)


def _is_num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _cnum(v):
    if _is_num(v):
        return True
    if isinstance(v, str):
        try:
            complex(v.replace(" ", ""))
            return True
        except ValueError:
            return False
    return False


def _check(value, spec, path, lines, source):
    where = f"{source}:{lines.get(path, '?')}"
    dotted = ".".join(map(str, path))
    if isinstance(spec, dict):
        if not isinstance(value, dict):
            raise ConfigError(f"{where}: '{dotted}' must be a mapping")
        for k, v in value.items():
            if k not in spec:
                allowed = ", ".join(sorted(spec))
                raise ConfigError(f"{source}:{lines.get(path + (k,), '?')}: unknown key "
                                  f"'{'.'.join(map(str, path + (k,)))}' (allowed: {allowed})")
            _check(v, spec[k], path + (k,), lines, source)
        return
    kind = spec if isinstance(spec, str) else spec[0]
    ok = True
    if kind == _F:
        ok = _is_num(value)
    elif kind == _I:
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif kind == _S:
        ok = isinstance(value, str)
    elif kind == _B:
        ok = isinstance(value, bool)
    elif kind == _V:
        ok = isinstance(value, list) and len(value) == 3 and all(_is_num(x) for x in value)
    elif kind == "enum":
        ok = value in spec[1]
        if not ok:
            raise ConfigError(f"{where}: '{dotted}' must be one of {list(spec[1])}, got {value!r}")
    elif kind == "freq":
        ok = _is_num(value) or value in ("bare", "shifted", "resonant")
    elif kind == "dipole":
        ok = value in ("radial", "same") or (
            isinstance(value, list) and len(value) == 3 and all(_cnum(x) for x in value))
    elif kind == "pair":
        ok = isinstance(value, list) and len(value) == 2 and all(_is_num(x) for x in value)
    if not ok:
        raise ConfigError(f"{where}: invalid value {value!r} for '{dotted}' (expected {kind})")


@dataclass
class Scenario:
    """A validated scenario: the raw mapping as written plus its source."""

    data: dict
    source: str = "<string>"
    base_dir: Path = field(default_factory=Path.cwd)

    def get(self, *path, default=None):
        d = self.data
        for p in path:
            if not isinstance(d, dict) or p not in d:
                return default
            d = d[p]
        return d


def _validate_semantics(data, lines, source):
    def err(path, msg):
        raise ConfigError(f"{source}:{lines.get(path, '?')}: {msg}")

    for sec, key in REQUIRED:
        if key not in data.get(sec, {}):
            err((sec,), f"missing required field '{sec}.{key}'")
    atoms = data["atoms"]
    if not atoms["gamma0"] > 0:
        err(("atoms", "gamma0"), "gamma0 must be positive")
    explicit = "position_A" in atoms or "position_B" in atoms
    if explicit and "layout" in atoms:
        err(("atoms", "layout"), "give either explicit positions or a layout, not both")
    if explicit and not ("position_A" in atoms and "position_B" in atoms):
        err(("atoms",), "both position_A and position_B are required")
    if not explicit and "layout" not in atoms:
        err(("atoms",), "atom positions missing (position_A/position_B or layout)")
    geo = data.get("geometry", {}).get("type", "none")
    if geo == "sphere" and "diameter" not in data.get("geometry", {}):
        err(("geometry",), "sphere geometry needs a diameter")
    if geo == "sphere" and data["geometry"]["diameter"] <= 0:
        err(("geometry", "diameter"), "diameter must be positive")
    lay = atoms.get("layout")
    if lay is not None:
        if "separation" not in lay:
            err(("atoms", "layout"), "layout needs a separation")
        if lay.get("type", "line") == "sphere_surface":
            if geo != "sphere":
                err(("atoms", "layout", "type"), "sphere_surface layout needs a sphere geometry")
            if "surface_distance" not in lay:
                err(("atoms", "layout"), "sphere_surface layout needs surface_distance")
    for k in ("dipole_A", "dipole_B"):
        v = atoms.get(k)
        if v == "radial" and geo != "sphere":
            err(("atoms", k), "radial dipoles need a sphere geometry")
    if atoms.get("dipole_A") == "same":
        err(("atoms", "dipole_A"), "'same' is only valid for dipole_B")
    if not atoms.get("complex_dipoles", False):
        for k in ("dipole_A", "dipole_B"):
            v = atoms.get(k)
            if isinstance(v, list) and not all(_is_num(x) for x in v):
                err(("atoms", k), "complex dipole components need complex_dipoles: true")
    mat = data.get("material", {})
    if "table" in mat and any(k in mat for k in ("omega_P", "gamma")):
        err(("material",), "give either Drude-Lorentz parameters or a table, not both")
    if "table" in mat:
        p = Path(mat["table"])
        if not p.is_absolute():
            p = Path(data.get("__base__", ".")) / p
        if not p.exists():
            err(("material", "table"), f"table file not found: {p}")
    mode = data["run"]["mode"]
    res = data.get("resonance", {})
    needs_res = mode in ("dynamics-strong", "spectrum-strong", "resonance-scan") or \
        atoms.get("omega_tilde") == "resonant"
    if needs_res and not ("bracket" in res or ("omega_m" in res and "delta_omega_m" in res)):
        err(("resonance",), f"mode '{mode}' needs a resonance bracket or omega_m/delta_omega_m")
    if mode.startswith("dynamics") or mode == "spectrum-numeric":
        for k in ("t_max", "dt"):
            if k not in data["run"]:
                err(("run",), f"mode '{mode}' needs run.{k}")
    if mode in ("spectrum-weak", "spectrum-strong", "spectrum-numeric"):
        if "detector" not in data:
            err((), f"mode '{mode}' needs a detector block")
    det = data.get("detector", {})
    if len(det) > 1 or (data.get("detector") is not None and not det):
        err(("detector",), "detector needs exactly one of position or radial_distance")
    if "radial_distance" in det and geo != "sphere":
        err(("detector",), "radial_distance needs a sphere geometry")
    g = data["run"].get("grid")
    if g is not None and not ({"min", "max"} <= set(g)):
        err(("run", "grid"), "grid needs min and max")


def parse_scenario(text: str, source: str = "<string>", base_dir=None) -> Scenario:
    """Parse and validate scenario text; raises ConfigError with line numbers."""
    node = _compose(text, source)
    lines = _Lines()
    data = _node_to_obj(node, (), lines)
    if not isinstance(data, dict):
        raise ConfigError(f"{source}:1: scenario must be a mapping")
    _check(data, SCHEMA, (), lines, source)
    for sec in ("atoms", "run"):
        if sec not in data:
            raise ConfigError(f"{source}: missing required block '{sec}'")
    base = Path(base_dir) if base_dir is not None else Path.cwd()
    tmp = dict(data)
    tmp["__base__"] = str(base)
    _validate_semantics(tmp, lines, source)
    return Scenario(data, source, base)


def load_scenario(path) -> Scenario:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {p}: {exc.strerror}") from None
    return parse_scenario(text, str(p), p.parent)


def dump_scenario(sc: Scenario) -> str:
    return yaml.safe_dump(sc.data, sort_keys=False, default_flow_style=None)


def preset_names():
    root = resources.files("rddi") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def preset_path(name: str) -> Path:
    p = Path(str(resources.files("rddi") / "presets" / f"{name}.yaml"))
    if not p.exists():
        raise ConfigError(f"unknown preset '{name}' (available: {', '.join(preset_names())})")
    return p


# --------------------------------------------------------------------------
# building objects


def _material(sc: Scenario):
    mat = sc.get("material", default={})
    if "table" in mat:
        p = Path(mat["table"])
        if not p.is_absolute():
            p = sc.base_dir / p
        return load_permittivity_table(p)
    return PermittivityModel(omega_P=mat.get("omega_P", 0.0), gamma_abs=mat.get("gamma", 1e-6),
                             background=mat.get("background", 1.0))


def _geometry(sc: Scenario, profile):
    g = sc.get("geometry", default={})
    kind = g.get("type", "none")
    if kind == "none":
        return Vacuum()
    if kind == "bulk":
        return Bulk(_material(sc))
    tol = sc.get("run", "mie_tol", default=profile["mie_tol"])
    return SphereGeometry(g["diameter"], _material(sc), l_max=g.get("l_max"), tol=tol)


def _dipole(v):
    return np.array([complex(str(x).replace(" ", "")) if isinstance(x, str) else x for x in v])


def _positions(sc: Scenario, geometry):
    atoms = sc.data["atoms"]
    if "layout" not in atoms:
        return np.array(atoms["position_A"], float), np.array(atoms["position_B"], float)
    lay = atoms["layout"]
    R = float(lay["separation"])
    if lay.get("type", "line") == "line":
        axis = np.array(lay.get("axis", [1.0, 0.0, 0.0]), float)
        axis = axis / np.linalg.norm(axis)
        return np.zeros(3), R * axis
    r0 = geometry.radius + float(lay["surface_distance"])
    if R > 2 * r0 * (1 + 1e-12):
        raise ConfigError(f"separation {R} exceeds the shell diameter {2 * r0}")
    th = 2 * math.asin(min(R / (2 * r0), 1.0))
    a = np.array([0.0, 0.0, r0])
    b = r0 * np.array([math.sin(th), 0.0, math.cos(th)])
    return a, b


def _dipoles(sc: Scenario, ra, rb):
    atoms = sc.data["atoms"]
    dA = atoms.get("dipole_A", [0.0, 0.0, 1.0])
    dB = atoms.get("dipole_B", "same")
    uA = ra / np.linalg.norm(ra) if dA == "radial" else _dipole(dA)
    if dB == "same":
        uB = np.array(uA)
    elif dB == "radial":
        uB = rb / np.linalg.norm(rb)
    else:
        uB = _dipole(dB)
    return uA, uB


def _detector(sc: Scenario, ra):
    det = sc.get("detector")
    if det is None:
        return None
    if "position" in det:
        return np.array(det["position"], float)
    return ra / np.linalg.norm(ra) * float(det["radial_distance"])


def _resonance(sc: Scenario, geometry, ra, uA, profile):
    res = sc.get("resonance")
    if not res:
        return None
    if "omega_m" in res and "delta_omega_m" in res:
        return ResonanceInfo(float(res["omega_m"]), float(res["delta_omega_m"]), float("nan"))
    n_scan = res.get("n_scan", profile["n_scan"])
    return find_resonance(geometry, ra, np.real(uA), res["bracket"], n_scan=n_scan)


def _equal_frequency_pair(pair: AtomPair, w):
    return AtomPair(pair.position_A, pair.position_B, pair.dipole_A, pair.dipole_B, pair.gamma0,
                    pair.omega_A, pair.omega_B, w, w)


def _delta_and_gamma(pair: AtomPair, geometry, ws):
    """delta_AB(w) and Gamma_AA(w) for both atoms at frequency w (gamma0 units)."""
    ra, ua, _ = pair.atom("A")
    rb, ub, _ = pair.atom("B")
    ua, ub = np.real(ua), np.real(ub)
    re = np.array([ua @ vacuum_green(ra, rb, w).matrix.real @ ub for w in ws])
    if isinstance(geometry, SphereGeometry):
        G, _ = sphere_scattering_array(geometry, ra, rb, ws)
        re = re + np.einsum("i,wij,j->w", ua, G.real, ub)
    elif not isinstance(geometry, Vacuum):
        re = np.array([np.real(delta_coupling(_equal_frequency_pair(pair, w), geometry)) * w / (3 * math.pi)
                       for w in ws])
    im = projected_im_green(geometry, ra, ra, ua, ua, ws)
    return 3 * math.pi / ws * re, 6 * math.pi / ws * im


def _resonant_frequency(pair: AtomPair, geometry, res: ResonanceInfo):
    """omega_tilde with omega_m = omega_tilde -+ delta_AB(omega_tilde) gamma0.

    The sphere supports a comb of narrow modes and every one of them adds
    spurious roots, so the whole interval is scanned, all roots refined, and
    the root at which atom A is least damped (off every other field
    resonance) is selected.
    """
    gpk = gamma_coupling(pair, geometry, omega=res.omega_m)
    upper = np.real(gpk[0, 0] + gpk[0, 1]) >= np.real(gpk[0, 0] - gpk[0, 1])
    sgn = 1.0 if upper else -1.0
    g0 = pair.gamma0

    def h_arr(ws):
        d, _ = _delta_and_gamma(pair, geometry, ws)
        return ws - sgn * d * g0 - res.omega_m

    def h(w):
        return float(h_arr(np.array([w]))[0])

    d0, _ = _delta_and_gamma(pair, geometry, np.array([res.omega_m]))
    half = 2 * abs(d0[0]) * g0 + 20 * res.delta_omega_m
    n = int(min(4001, max(401, 2 * half / (10 * res.delta_omega_m))))
    ws = np.linspace(res.omega_m - half, res.omega_m + half, n)
    hv = h_arr(ws)
    roots = [ws[i] for i in np.flatnonzero(hv == 0)]
    for i in np.flatnonzero(hv[:-1] * hv[1:] < 0):
        roots.append(optimize.brentq(h, ws[i], ws[i + 1], xtol=1e-15, rtol=1e-15))
    if not roots:
        raise RegimeError("no exact-resonance frequency within "
                          f"[{ws[0]:.9g}, {ws[-1]:.9g}]")
    roots = np.array(roots)
    _, gam = _delta_and_gamma(pair, geometry, roots)
    return float(roots[np.argmin(gam)]), bool(upper)


def _pair(sc: Scenario, geometry, resonance):
    atoms = sc.data["atoms"]
    ra, rb = _positions(sc, geometry)
    if isinstance(geometry, SphereGeometry):
        try:
            geometry.check_outside(ra, rb)
        except GeometryError as exc:
            raise GeometryError(f"atoms: {exc}") from None
    uA, uB = _dipoles(sc, ra, rb)
    g0 = float(atoms["gamma0"])
    wA0 = float(atoms.get("omega_A", 1.0))
    wB0 = float(atoms.get("omega_B", wA0))
    mode = atoms.get("omega_tilde", "bare")
    wA = atoms.get("omega_tilde_A")
    wB = atoms.get("omega_tilde_B")
    pair = AtomPair(ra, rb, uA, uB, g0, wA0, wB0)
    info = {}
    if wA is None and wB is None:
        if _is_num(mode):
            wA = wB = float(mode)
        elif mode == "bare":
            wA, wB = wA0, wB0
        elif mode == "shifted":
            sA = frequency_shift(ra, uA, wA0, g0, geometry)
            sB = frequency_shift(rb, uB, wB0, g0, geometry)
            wA, wB = sA.omega_tilde, sB.omega_tilde
            info["shift_A"], info["shift_B"] = sA.shift, sB.shift
            info["shift_converged"] = sA.converged and sB.converged
        elif mode == "resonant":
            if resonance is None:
                raise ConfigError("omega_tilde: resonant needs a resonance block")
            w, upper = _resonant_frequency(pair, geometry, resonance)
            wA = wB = w
            info["strong_channel"] = "+" if upper else "-"
    else:
        wA = wA0 if wA is None else float(wA)
        wB = wA if wB is None else float(wB)
    pair = AtomPair(ra, rb, uA, uB, g0, wA0, wB0, float(wA), float(wB))
    return pair, info


# --------------------------------------------------------------------------
# running


@dataclass
class RunResult:
    manifest: dict
    summary: dict
    files: list


def _manifest(sc: Scenario, profile_name, pair, coupling, resonance, info):
    man = {
        "scenario": sc.data,
        "source": Path(sc.source).name,
        "profile": profile_name,
        "versions": {"rddi": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
        "derived": {
            "omega_tilde_A": pair.wA,
            "omega_tilde_B": pair.wB,
            "dipole_sq_A": 3 * math.pi * pair.gamma0 / pair.wA**3,
            "dipole_sq_B": 3 * math.pi * pair.gamma0 / pair.wB**3,
            "separation": pair.separation,
            **{k: _jsonable(v) for k, v in info.items()},
        },
    }
    if resonance is not None:
        man["derived"]["omega_m"] = resonance.omega_m
        man["derived"]["delta_omega_m"] = resonance.delta_omega_m
    return man


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, complex) or isinstance(v, np.complexfloating):
        return {"re": float(np.real(v)), "im": float(np.imag(v))}
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()] if v.dtype.kind != "c" else \
            [_jsonable(complex(x)) for x in v.ravel()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return v


def _hash(man):
    text = json.dumps(man, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def _coupling_summary(c: CouplingSet):
    s = {
        "delta_AB": _jsonable(c.delta_AB),
        "delta_BA": _jsonable(c.delta_BA),
        "gamma_AA": _jsonable(c.gamma[0, 0]),
        "gamma_AB": _jsonable(c.gamma[0, 1]),
        "gamma_BA": _jsonable(c.gamma[1, 0]),
        "gamma_BB": _jsonable(c.gamma[1, 1]),
        "K_AB": _jsonable(c.K_AB),
        "K_BA": _jsonable(c.K_BA),
        "symmetric": bool(c.symmetric),
        "regime": c.regime,
    }
    if c.strong is not None:
        s.update({"Omega_plus": c.strong.Omega_plus, "Omega_minus": c.strong.Omega_minus,
                  "delta_omega_m_gamma0": c.strong.delta_omega_m,
                  "strong_channel": "+" if c.strong.upper else "-",
                  "resonance_detuning": c.strong.detuning})
    return s


def _grid(sc: Scenario, coupling, profile):
    g = sc.get("run", "grid")
    n = profile["grid_points"]
    if g is None:
        return default_grid(coupling, n)
    return np.linspace(float(g["min"]), float(g["max"]), int(g.get("n", n)))


def _times(sc: Scenario):
    t_max = float(sc.data["run"]["t_max"])
    dt = float(sc.data["run"]["dt"])
    n = int(round(t_max / dt))
    return np.linspace(0.0, t_max, n + 1)


def _tabulated_kernel(pair, geometry, sc: Scenario, coupling):
    W = float(sc.get("run", "kernel_half_width", default=50.0))
    n = int(sc.get("run", "kernel_points", default=2001))
    nu = np.linspace(-W, W, n)
    ws = pair.wA + nu * pair.gamma0
    if np.any(ws <= 0):
        raise ConfigError("kernel frequency window reaches omega <= 0")
    atoms = [pair.atom("A"), pair.atom("B")]
    J = np.zeros((2, 2, n), dtype=complex)
    for i, (ri, ui, wi) in enumerate(atoms):
        for j, (rj, uj, wj) in enumerate(atoms):
            im = projected_im_green(geometry, ri, rj, np.real(ui), np.real(uj), ws)
            dd = 3 * math.pi * pair.gamma0 / (wi * wj) ** 1.5
            J[i, j] = 2 * ws**2 * dd * im / pair.gamma0 / (2 * math.pi)
    return KernelSpec("tabulated", nu=nu, J=J)


def gamma_coupling_offdiag(pair: AtomPair, geometry):
    """Gamma_{A* B} alone (gamma0 units), at the shifted frequency of atom B."""
    rb, ub, wb = pair.atom("B")
    ra, ua, wa = pair.atom("A")
    G = total_green(geometry, ra, rb, wb)
    dd = 3 * math.pi * pair.gamma0 / (wa * wb) ** 1.5
    val = 2 * wb**2 * dd * (np.conj(ua) @ G.imag @ ub) / pair.gamma0
    return float(np.real(val)) if np.imag(val) == 0 else complex(val)


def _execute(sc: Scenario, profile_name="paper"):
    profile = PROFILES[profile_name]
    geometry = _geometry(sc, profile)
    mode = sc.data["run"]["mode"]
    ra, rb = _positions(sc, geometry)
    uA, _ = _dipoles(sc, ra, rb)
    resonance = _resonance(sc, geometry, ra, uA, profile)
    pair, info = _pair(sc, geometry, resonance)
    if isinstance(geometry, Bulk):
        # the self-decay rate diverges for an atom embedded in absorbing bulk,
        # so only the inter-atomic quantities are defined
        if mode != "coupling":
            raise ConfigError(f"bulk geometry supports run.mode 'coupling' only, not '{mode}'")
        man = _manifest(sc, profile_name, pair, None, resonance, info)
        g = gamma_coupling_offdiag(pair, geometry)
        summary = {"delta_AB": _jsonable(delta_coupling(pair, geometry, "AB")),
                   "delta_BA": _jsonable(delta_coupling(pair, geometry, "BA")),
                   "gamma_AB": _jsonable(g), "regime": "n/a"}
        return man, summary, {}
    thr = float(sc.get("run", "symmetry_threshold", default=1e-3))
    coupling = build_coupling(pair, geometry, resonance, thr)
    man = _manifest(sc, profile_name, pair, coupling, resonance, info)
    summary = _coupling_summary(coupling)
    tables = {}  # name -> (kind, object)

    if mode == "coupling":
        pass
    elif mode == "resonance-scan":
        lo, hi = (sc.get("resonance", "bracket") or
                  [resonance.omega_m - 20 * resonance.delta_omega_m,
                   resonance.omega_m + 20 * resonance.delta_omega_m])
        ws = np.linspace(lo, hi, profile["n_scan"])
        vals = projected_im_green(geometry, pair.position_A, pair.position_A,
                                  np.real(pair.dipole_A), np.real(pair.dipole_A), ws)
        g = 6 * math.pi * ws**2 / pair.wA**3 * vals
        tables["scan"] = ("columns", (["omega", "gamma_AA_over_gamma0"], [ws, g]))
        summary.update({"omega_m": resonance.omega_m, "delta_omega_m": resonance.delta_omega_m,
                        "fit_residual": resonance.fit_residual})
    elif mode == "rates":
        rep = golden_rule_rate(coupling, rddi_ratio=float(sc.get("run", "rddi_ratio", default=0.1)))
        summary.update({k: _jsonable(v) for k, v in rep.__dict__.items()})
    elif mode == "dynamics-weak":
        t = _times(sc)
        CA, CB = weak_amplitudes(coupling, t)
        tables["trajectory"] = ("trajectory", Trajectory(t, CA, CB))
    elif mode == "dynamics-strong":
        if coupling.regime != "strong":
            raise RegimeError("scenario is not in the strong-coupling regime")
        t = _times(sc)
        CA, CB = strong_amplitudes(coupling, resonance, t)
        tables["trajectory"] = ("trajectory", Trajectory(t, CA, CB))
    elif mode == "dynamics-volterra":
        kind = sc.get("run", "kernel", default="lorentzian" if coupling.strong else "tabulated")
        if kind == "lorentzian":
            if coupling.strong is None:
                raise ConfigError("Lorentzian kernel needs a resonance block")
            kernel = KernelSpec.lorentzian(coupling.strong, float(np.real(coupling.delta_AB)))
        else:
            kernel = _tabulated_kernel(pair, geometry, sc, coupling)
        det = (0.0, (pair.wB - pair.wA) / pair.gamma0)
        traj = volterra_solve(kernel, coupling, float(sc.data["run"]["t_max"]),
                              float(sc.data["run"]["dt"]), detunings=det)
        tables["trajectory"] = ("trajectory", traj)
    else:
        det_pos = _detector(sc, pair.position_A)
        method = sc.get("run", "weights", default="kk")
        weights = emission_weights(pair, det_pos, geometry, coupling, resonance, method)
        grid = _grid(sc, coupling, profile)
        if mode == "spectrum-weak":
            spec = weak_spectrum(coupling, weights, grid)
        elif mode == "spectrum-strong":
            if coupling.regime != "strong":
                raise RegimeError("scenario is not in the strong-coupling regime")
            spec = strong_spectrum(coupling, weights, grid)
        else:
            t = _times(sc)
            if coupling.regime == "strong":
                CA, CB = strong_amplitudes(coupling, resonance, t)
                m = weights.mode
                # remove the resonant part already contained in F at omega_tilde
                f0 = 1j * m.delta_omega_m / (-m.nu_m + 1j * m.delta_omega_m)
                weights = EmissionWeights(weights.F_A - m.g_A * f0, weights.F_B - m.g_B * f0,
                                          weights.W_A, weights.W_B, weights.detector_position, m)
            else:
                CA, CB = weak_amplitudes(coupling, t)
            spec = finite_time_spectrum(Trajectory(t, CA, CB), weights, grid,
                                        float(sc.get("run", "T", default=t[-1])))
            spec.omega_ref, spec.gamma0 = pair.wA, pair.gamma0
            spec.lines = extract_lines(spec)
        tables["spectrum"] = ("spectrum", spec)
        summary["lines"] = [ln.as_dict() for ln in spec.lines]
        summary["weights"] = {k: _jsonable(getattr(weights, k)) for k in ("F_A", "F_B", "W_A", "W_B")
                              if getattr(weights, k) is not None}
    return man, summary, tables


def _write_columns(path, header_lines, names, cols):
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(",".join(names) + "\n")
        for row in zip(*cols):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def run_scenario(sc: Scenario | str | os.PathLike, out_dir=".", profile: str = "paper") -> RunResult:
    """Run a scenario and write ``<prefix>_manifest.json``, ``<prefix>_summary.json``
    and the mode's CSV tables into ``out_dir``."""
    if not isinstance(sc, Scenario):
        sc = load_scenario(sc)
    if profile not in PROFILES:
        raise ConfigError(f"unknown tolerance profile '{profile}'")
    man, summary, tables = _execute(sc, profile)
    man = _jsonable(man)
    digest = _hash(man)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    prefix = sc.get("output", "prefix", default=sc.get("name", default=Path(sc.source).stem))
    header = [f"manifest-sha256: {digest}", f"scenario: {prefix}", f"mode: {sc.data['run']['mode']}"]
    files = []
    mpath = out / f"{prefix}_manifest.json"
    mpath.write_text(json.dumps({**man, "sha256": digest}, indent=2, sort_keys=True) + "\n")
    files.append(mpath)
    spath = out / f"{prefix}_summary.json"
    spath.write_text(json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")
    files.append(spath)
    for name, (kind, obj) in tables.items():
        p = out / f"{prefix}_{name}.csv"
        if kind == "trajectory":
            obj.to_csv(p, header)
        elif kind == "spectrum":
            obj.to_csv(p, header)
            lp = out / f"{prefix}_lines.json"
            obj.lines_json(lp)
            files.append(lp)
        else:
            _write_columns(p, header, *obj)
        files.append(p)
    return RunResult(man, _jsonable(summary), files)


# --------------------------------------------------------------------------
# sweeps


def scalar_paths(sc: Scenario):
    """Dotted paths of all numeric scalar fields present in the scenario."""
    out = []

    def walk(d, prefix):
        for k, v in d.items():
            p = prefix + (k,)
            if isinstance(v, dict):
                walk(v, p)
            elif _is_num(v):
                out.append(".".join(p))
    walk(sc.data, ())
    return out


def _set_path(data, path, value):
    keys = path.split(".")
    d = data
    for k in keys[:-1]:
        if not isinstance(d, dict) or k not in d:
            raise KeyError(path)
        d = d[k]
    if not isinstance(d, dict) or keys[-1] not in d or not _is_num(d[keys[-1]]):
        raise KeyError(path)
    d[keys[-1]] = value


def _sweep_one(args):
    text, source, base, path, value, profile = args
    sc = parse_scenario(text, source, base)
    data = copy.deepcopy(sc.data)
    _set_path(data, path, value)
    sc = parse_scenario(yaml.safe_dump(data, sort_keys=False), source, base)
    man, summary, tables = _execute(sc, profile)
    row = {path: value}
    for k, v in summary.items():
        v = _jsonable(v)
        if isinstance(v, dict) and set(v) == {"re", "im"}:
            row[f"{k}_re"], row[f"{k}_im"] = v["re"], v["im"]
        elif k == "lines":
            for i, ln in enumerate(v):
                row[f"line{i}_position"] = ln["position"]
                row[f"line{i}_width"] = ln["width"]
        elif isinstance(v, (int, float, bool, str)):
            row[k] = v
    return row


def sweep(sc: Scenario | str, parameter_path: str, values, out_dir=".", profile: str = "paper",
          threads: int = 1):
    """Run the scenario once per value of a scalar parameter; write one CSV row per value."""
    if not isinstance(sc, Scenario):
        sc = load_scenario(sc)
    paths = scalar_paths(sc)
    if parameter_path not in paths:
        raise ConfigError(f"parameter path '{parameter_path}' is not a scalar field; valid paths: "
                          + ", ".join(paths))
    text = dump_scenario(sc)
    jobs = [(text, sc.source, str(sc.base_dir), parameter_path, float(v), profile) for v in values]
    if threads > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=threads) as ex:
            rows = list(ex.map(_sweep_one, jobs))
    else:
        rows = [_sweep_one(j) for j in jobs]
    cols = [parameter_path]
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    man = {"scenario": sc.data, "sweep": {"path": parameter_path, "values": [float(v) for v in values]},
           "profile": profile, "versions": {"rddi": __version__, "numpy": np.__version__,
                                             "scipy": scipy.__version__}}
    digest = _hash(_jsonable(man))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    prefix = sc.get("output", "prefix", default=sc.get("name", default=Path(sc.source).stem))
    path = out / f"{prefix}_sweep.csv"

    with open(path, "w", newline="") as fh:
        fh.write(f"# manifest-sha256: {digest}\n# sweep: {parameter_path}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow(["" if k not in r else (repr(float(r[k])) if _is_num(r[k]) else r[k])
                        for k in cols])
    (out / f"{prefix}_sweep_manifest.json").write_text(
        json.dumps({**_jsonable(man), "sha256": digest}, indent=2, sort_keys=True) + "\n")
    return path, rows
