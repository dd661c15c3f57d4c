import numpy as np
import pytest
from hypothesis import given, strategies as st

from rddi import PermittivityModel, SphereGeometry
from rddi.coupling import (
    AtomPair,
    CouplingSet,
    build_coupling,
    bulk_limit_delta,
    check_symmetry_condition,
    delta_coupling,
    frequency_shift,
    gamma_coupling,
    k_coefficient,
    k_from,
    pv_coupling_oracle,
)
from rddi.green import Bulk, ResonanceInfo, Vacuum

Z = np.array([0.0, 0.0, 1.0])
X = np.array([1.0, 0.0, 0.0])


@pytest.mark.parametrize("w", [0.8, 1.0, 1.05])
def test_vacuum_near_zone_transverse_and_collinear(w):
    R = 1e-3
    side = AtomPair([0, 0, 0], [R, 0, 0], Z, Z, 1e-6, omega_tilde_A=w, omega_tilde_B=w)
    line = AtomPair([0, 0, 0], [R, 0, 0], X, X, 1e-6, omega_tilde_A=w, omega_tilde_B=w)
    Ri = 2 * np.pi * R
    assert delta_coupling(side, Vacuum()) == pytest.approx(-3 / (4 * w**3 * Ri**3), rel=1e-4)
    assert delta_coupling(line, Vacuum()) == pytest.approx(3 / (2 * w**3 * Ri**3), rel=1e-4)


def test_vacuum_values_from_frozen_tensor():
    # [DERIVED] 3 pi Re G_zz and 6 pi Im G_zz of the mpmath tensor at omega = 1
    n = np.array([1.0, 2.0, 2.0]) / 3
    p = AtomPair([0, 0, 0], 0.3 * n, Z, Z, 1e-6)
    g_zz = -0.0013713442793681887 + 0.028379859500491653j
    assert delta_coupling(p, Vacuum()) == pytest.approx(3 * np.pi * g_zz.real, rel=1e-11)
    assert gamma_coupling(p, Vacuum())[0, 1] == pytest.approx(6 * np.pi * g_zz.imag, rel=1e-11)


@given(st.floats(0.5, 2.0), st.floats(1e-9, 1e-3))
def test_free_space_decay_rate_is_unity(w, g0):
    p = AtomPair([0, 0, 0], [0.4, 0, 0], Z, X, g0, omega_tilde_A=w, omega_tilde_B=w)
    g = gamma_coupling(p, Vacuum())
    assert g[0, 0] == pytest.approx(1.0, rel=1e-12)
    assert g[1, 1] == pytest.approx(1.0, rel=1e-12)


def _random_dipole(draw_vals):
    v = np.asarray(draw_vals, dtype=float)
    return v if np.linalg.norm(v) > 1e-3 else Z


vec = st.lists(st.floats(-1, 1), min_size=3, max_size=3)


@given(vec, vec, vec, st.floats(0.01, 2.0))
def test_vacuum_gamma_positive_semidefinite(u, v, rdir, R):
    d = _random_dipole(rdir)
    p = AtomPair([0, 0, 0], R * d / np.linalg.norm(d), _random_dipole(u), _random_dipole(v), 1e-6)
    g = np.real(gamma_coupling(p, Vacuum()))
    assert np.all(np.linalg.eigvalsh(0.5 * (g + g.T)) >= -1e-12)
    assert g[0, 1] ** 2 <= g[0, 0] * g[1, 1] * (1 + 1e-12)


@given(st.floats(0.11, 0.3), st.floats(0.0, np.pi), st.floats(0.11, 0.3), st.floats(0.6, 1.4))
def test_sphere_gamma_positive_semidefinite(ra, theta, rb, w):
    sp = SphereGeometry(0.2, PermittivityModel(0.5, 0.05))
    pb = rb * np.array([np.sin(theta), 0, np.cos(theta)])
    if np.linalg.norm(pb - [0, 0, ra]) < 1e-3:
        return
    p = AtomPair([0, 0, ra], pb, Z, Z, 1e-6, omega_tilde_A=w, omega_tilde_B=w)
    g = np.real(gamma_coupling(p, sp))
    assert np.all(np.linalg.eigvalsh(0.5 * (g + g.T)) >= -1e-10 * np.max(np.abs(g)))


@pytest.mark.parametrize("R", [0.3, 1.3])
def test_principal_value_oracle_vacuum(R):
    p = AtomPair([0, 0, 0], [R, 0, 0], Z, Z, 1e-6)
    assert pv_coupling_oracle(p, Vacuum()) == pytest.approx(delta_coupling(p, Vacuum()), rel=1e-2)


@pytest.mark.filterwarnings("ignore:pv_coupling_oracle")
def test_principal_value_oracle_sphere_scattering(sphere_small):
    p = AtomPair([0, 0, 0.15], [0.1, 0, 0.14], Z, Z, 1e-6, omega_tilde_A=0.8, omega_tilde_B=0.8)
    ref = delta_coupling(p, sphere_small) - delta_coupling(p, Vacuum())
    o = pv_coupling_oracle(p, sphere_small, part="scattering", cutoff=80.0)
    assert o == pytest.approx(ref, rel=1e-2)


def test_bulk_limits():
    m = PermittivityModel(0.5, 0.5)
    near = AtomPair([0, 0, 0], [2e-3, 0, 0], Z, Z, 1e-6, omega_tilde_A=0.5, omega_tilde_B=0.5)
    assert delta_coupling(near, Bulk(m)) == pytest.approx(bulk_limit_delta(m, near, "short"),
                                                          rel=1e-3)
    # the long-zone form drops O(1/kR) terms; compare over an oscillation window
    diffs, longs = [], []
    for R in np.linspace(10.0, 12.0, 41):
        far = AtomPair([0, 0, 0], [R, 0, 0], Z, Z, 1e-6, omega_tilde_A=0.5, omega_tilde_B=0.5)
        longs.append(bulk_limit_delta(m, far, "long"))
        diffs.append(delta_coupling(far, Bulk(m)) - longs[-1])
    assert np.max(np.abs(diffs)) < 0.1 * np.max(np.abs(longs))
    with pytest.raises(ValueError):
        bulk_limit_delta(m, far, "middle")


def test_k_coefficient_definition():
    p = AtomPair([0, 0, 0], [0.2, 0, 0], Z, Z, 1e-6)
    kab, kba = k_coefficient(p, Vacuum())
    g = gamma_coupling(p, Vacuum())
    assert kab == pytest.approx(-0.5 * g[0, 1] + 1j * delta_coupling(p, Vacuum()))
    assert kab == pytest.approx(kba)
    assert k_from(2.0, 4.0) == -2.0 + 2.0j


def test_symmetry_condition():
    same = AtomPair([0, 0, 0], [0.2, 0, 0], Z, Z, 1e-6)
    assert check_symmetry_condition(same, Vacuum())[0]
    split = AtomPair([0, 0, 0], [0.2, 0, 0], Z, Z, 1e-6, omega_tilde_A=1.0, omega_tilde_B=1.3)
    flag, diag = check_symmetry_condition(split, Vacuum())
    assert not flag and diag["relative_difference"] > 1e-3


def test_frequency_shift():
    assert frequency_shift([0, 0, 0], Z, 1.0, 1e-6, Vacuum()).shift == 0.0
    sp = SphereGeometry(0.2, PermittivityModel(0.5, 0.05))
    res = frequency_shift([0, 0, 0.12], Z, 1.0, 1e-6, sp)
    assert res.converged
    assert res.omega_tilde == pytest.approx(1.0 - res.shift * 1e-6)
    assert res.shift != 0


def test_atom_pair_validation():
    with pytest.raises(ValueError):
        AtomPair([0, 0, 0], [0, 0, 0], Z, Z, 1e-6)
    with pytest.raises(ValueError):
        AtomPair([0, 0, 0], [1, 0, 0], Z, Z, 0.0)
    with pytest.raises(ValueError):
        AtomPair([0, 0, 0], [1, 0, 0], [0, 0, 0], Z, 1e-6)
    p = AtomPair([0, 0, 0], [1, 0, 0], [0, 0, 2], X, 1e-6, omega_tilde_A=1.1)
    assert np.allclose(p.dipole_A, Z)
    assert p.swapped().wB == 1.1


def test_build_coupling_weak_and_strong():
    p = AtomPair([0, 0, 0], [0.2, 0, 0], Z, Z, 1e-6)
    c = build_coupling(p, Vacuum())
    assert c.regime == "weak" and c.symmetric and c.is_identical()
    res = ResonanceInfo(1.0 - c.delta_AB * 1e-6, 5e-7, 1.0)
    c2 = build_coupling(p, Vacuum(), resonance=res)
    assert c2.strong is not None
    assert c2.strong.Omega_plus == pytest.approx(np.sqrt(2 * c2.gamma_plus * 0.5))


def test_from_rates_defaults():
    c = CouplingSet.from_rates(1.0, 2.0, 0.3, 0.4)
    assert c.gamma[1, 0] == 0.3 and c.delta_BA == 0.4
    assert c.gamma_plus == pytest.approx(1.3) and c.gamma_minus == pytest.approx(0.7)
    with pytest.raises(ValueError):
        CouplingSet(0.0, 0.0, np.eye(3))
