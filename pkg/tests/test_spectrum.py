import json

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import trapezoid

from rddi import PermittivityModel, SphereGeometry
from rddi.coupling import AtomPair, CouplingSet, RegimeError, StrongData
from rddi.dynamics import Trajectory, strong_amplitudes, weak_amplitudes
from rddi.green import Vacuum
from rddi.spectrum import (
    EmissionWeights,
    ModeWeights,
    default_grid,
    emission_weight_F,
    emission_weights,
    extract_lines,
    finite_time_spectrum,
    strong_spectrum,
    weak_spectrum,
)

Z = np.array([0.0, 0.0, 1.0])
FA = np.array([1 + 0.3j, 0.2, 0.0])
FB = np.array([0.7, -0.1j, 0.1])


def strong_pair(delta, Omega=128.0, dw=1.0, gm=1.0):
    gp = Omega**2 / (2 * dw)
    sd = StrongData(1.05, dw, gp, gm, True, 0.0)
    g = 0.5 * np.array([[gp + gm, gp - gm], [gp - gm, gp + gm]])
    return CouplingSet.from_rates(g[0, 0], g[1, 1], g[0, 1], delta, strong=sd)


cvec = st.lists(st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False),
                min_size=3, max_size=3)


@given(cvec, cvec, st.floats(0.01, 5.0), st.floats(0.0, 0.99), st.floats(-20, 20))
def test_weak_spectrum_nonnegative(fa, fb, g, frac, d):
    c = CouplingSet.from_rates(g, g, frac * g, d)
    S = weak_spectrum(c, EmissionWeights(np.array(fa), np.array(fb)), np.linspace(-50, 50, 501)).S
    assert np.all(S >= 0)


def test_weak_doublet_positions_and_widths():
    c = CouplingSet.from_rates(1.0, 1.0, 0.5, 10.0)
    res = weak_spectrum(c, EmissionWeights(FA, FA), np.linspace(-40, 40, 16001))
    # F_A = F_B: only the symmetric line at -delta with width Gamma_+ survives
    (line,) = extract_lines(res)
    assert line.position == pytest.approx(-10.0, abs=1e-3)
    assert line.width == pytest.approx(1.5, rel=1e-3)
    res = weak_spectrum(c, EmissionWeights(FA, -FA), np.linspace(-40, 40, 16001))
    (line,) = extract_lines(res)
    assert line.position == pytest.approx(10.0, abs=1e-3)
    assert line.width == pytest.approx(0.5, rel=1e-3)


def test_weak_spectrum_parseval():
    c = CouplingSet.from_rates(1.0, 1.0, 0.4, 3.0)
    x = np.linspace(-3000, 3000, 600001)
    S = weak_spectrum(c, EmissionWeights(FA, FB), x).S
    t = np.linspace(0, 80, 80001)
    CA, CB = weak_amplitudes(c, t)
    E = FA[None, :] * CA[:, None] + FB[None, :] * CB[:, None]
    energy = trapezoid(np.sum(np.abs(E) ** 2, axis=1), t)
    assert trapezoid(S, x) == pytest.approx(2 * np.pi * energy, rel=2e-3)


def test_strong_lines():
    c = strong_pair(-20.0)
    W = np.array([0.3, 0.1j, 0.0]) / 128
    res = strong_spectrum(c, EmissionWeights(0 * FA, 0 * FA, W, W), np.linspace(-150, 150, 30001))
    pos = sorted(ln.position for ln in extract_lines(res))
    assert pos == pytest.approx([20.0 - 64.0, 20.0 + 64.0], abs=1e-2)
    kinds = [ln.kind for ln in res.lines]
    assert kinds == ["triplet-pair", "triplet-pair", "residual"]
    assert res.lines[2].position == pytest.approx(-20.0)


def test_finite_time_matches_closed_forms():
    c = CouplingSet.from_rates(1.0, 1.0, 0.4, 3.0)
    x = np.linspace(-8, 8, 401)
    t = np.linspace(0, 40, 16001)
    ref = weak_spectrum(c, EmissionWeights(FA, FB), x).S
    ft = finite_time_spectrum(Trajectory(t, *weak_amplitudes(c, t)), EmissionWeights(FA, FB), x).S
    assert np.max(np.abs(ft - ref)) < 1e-3 * np.max(ref)

    sc = strong_pair(-20.0)
    g = np.array([0.3, 0.1j, 0.0])
    Fb = np.array([0.2, 0.05, 0.01j])
    wts = EmissionWeights(Fb, -Fb, g / 128, g / 128, mode=ModeWeights(g, g, 20.0, 1.0))
    x = np.linspace(-150, 150, 601)
    ref = strong_spectrum(sc, wts, x).S
    t = np.linspace(0, 20, 20001)
    ft = finite_time_spectrum(Trajectory(t, *strong_amplitudes(sc, None, t)), wts, x).S
    assert np.max(np.abs(ft - ref)) < 2e-2 * np.max(ref)


def test_finite_time_warns_when_truncated():
    c = CouplingSet.from_rates(1.0, 1.0, 0.0, 1.0)
    t = np.linspace(0, 1, 101)
    with pytest.warns(RuntimeWarning, match="not decayed"):
        finite_time_spectrum(Trajectory(t, *weak_amplitudes(c, t)), EmissionWeights(FA, FB),
                             np.linspace(-5, 5, 11))
    with pytest.raises(ValueError):
        finite_time_spectrum(Trajectory(t, *weak_amplitudes(c, t)), EmissionWeights(FA, FB),
                             np.linspace(-5, 5, 11), T=2.0)


def test_kk_and_delta_weights_share_the_dissipative_part():
    sp = SphereGeometry(0.2, PermittivityModel(0.5, 0.05))
    r, det = np.array([0, 0, 0.12]), np.array([0.0, 0.0, 2.0])
    for geo in (Vacuum(), sp):
        kk = emission_weight_F(r, Z, 0.9, det, geo, "kk")
        de = emission_weight_F(r, Z, 0.9, det, geo, "delta")
        assert np.allclose(kk.real, de)
    with pytest.raises(ValueError):
        emission_weight_F(r, Z, 0.9, det, Vacuum(), "other")


def test_emission_weights_for_pair():
    p = AtomPair([0, 0, -0.1], [0, 0, 0.1], Z, Z, 1e-6)
    w = emission_weights(p, [2.0, 0, 0], Vacuum())
    # mirror images under z -> -z: F_B = -M F_A with M = diag(1, 1, -1)
    assert np.allclose(w.F_B, -np.array([1, 1, -1]) * w.F_A)
    assert w.W_A is None and w.mode is None
    with pytest.raises(ValueError):
        EmissionWeights(np.array([np.nan, 0, 0]), FB)


def test_regime_guards():
    with pytest.raises(RegimeError):
        weak_spectrum(CouplingSet.from_rates(1.0, 2.0, 0.1, 1.0), EmissionWeights(FA, FB), [0.0])
    with pytest.raises(RegimeError):
        weak_spectrum(CouplingSet.from_rates(1.0, 1.0, 0.1, 1.0, symmetric=False),
                      EmissionWeights(FA, FB), [0.0])
    with pytest.raises(RegimeError):
        strong_spectrum(CouplingSet.from_rates(1.0, 1.0), EmissionWeights(FA, FB), [0.0])
    with pytest.raises(ValueError):
        strong_spectrum(strong_pair(-20.0), EmissionWeights(FA, FB), [0.0])


def test_default_grid_resolves_narrowest_line():
    c = CouplingSet.from_rates(1.0, 1.0, 0.99, 30.0)
    x = default_grid(c)
    assert x[-1] >= 4 * 30.0
    assert np.diff(x)[0] <= 0.25 * c.gamma_minus
    s = default_grid(strong_pair(-20.0))
    assert s[-1] >= 4 * 128.0
    assert np.diff(s)[0] <= 0.25 * 1.0
    # the point count is capped for extremely narrow lines
    assert default_grid(CouplingSet.from_rates(1.0, 1.0, 1.0 - 1e-9, 30.0)).size == 200001


def test_outputs(tmp_path):
    c = CouplingSet.from_rates(1.0, 1.0, 0.5, 10.0, gamma0=1e-6, omega_tilde=(1.05, 1.05))
    res = weak_spectrum(c, EmissionWeights(FA, FB), np.linspace(-20, 20, 9))
    res.to_csv(tmp_path / "s.csv", ["mode: test"])
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "# mode: test" and lines[1] == "omega_S,delta,S"
    assert float(lines[2].split(",")[0]) == pytest.approx(1.05 - 20e-6)
    doc = json.loads(res.lines_json(tmp_path / "l.json"))
    assert doc["width_convention"] == "FWHM"
    assert [ln["kind"] for ln in doc["lines"]] == ["doublet+", "doublet-"]
