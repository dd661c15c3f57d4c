import numpy as np
import pytest
from hypothesis import given, strategies as st

from rddi import PermittivityModel, SphereGeometry
from rddi.green import (
    Bulk,
    GeometryError,
    MieConvergenceError,
    ResonanceSearchError,
    SingularityError,
    Vacuum,
    bulk_green,
    find_resonance,
    fit_lorentzian,
    sphere_scattering_array,
    sphere_scattering_green,
    total_green,
    vacuum_green,
)

# [DERIVED] mpmath closed-form dyadic tensor, omega = 1, separation 0.3 along (1, 2, 2)/3
FROZEN_G0 = np.array([
    [-0.023348951137653044 + 0.023542090950502745j, 0.014651737905523237 + 0.0032251790333259386j,
     0.014651737905523237 + 0.0032251790333259386j],
    [0.014651737905523237 + 0.0032251790333259386j, -0.0013713442793681887 + 0.028379859500491653j,
     0.029303475811046474 + 0.0064503580666518772j],
    [0.014651737905523237 + 0.0032251790333259386j, 0.029303475811046474 + 0.0064503580666518772j,
     -0.0013713442793681887 + 0.028379859500491653j],
])


def test_vacuum_frozen_tensor():
    n = np.array([1.0, 2.0, 2.0]) / 3
    G = vacuum_green(0.3 * n, [0, 0, 0], 1.0).matrix
    assert np.allclose(G, FROZEN_G0, rtol=1e-12, atol=1e-15)


@given(st.floats(0.1, 5.0))
def test_vacuum_coincident_imaginary_part(w):
    g = vacuum_green([0.1, 0.2, 0.3], [0.1, 0.2, 0.3], w, imag_only=True)
    assert np.allclose(g.imag, w / (6 * np.pi) * np.eye(3))
    with pytest.raises(SingularityError):
        g.real


@given(st.floats(1e-4, 1e-2))
def test_vacuum_imag_part_is_regular_near_origin(R):
    g = vacuum_green([R, 0, 0], [0, 0, 0], 1.0)
    assert np.allclose(g.imag, np.eye(3) / (6 * np.pi), rtol=1e-3)


def test_vacuum_coincident_raises():
    with pytest.raises(SingularityError):
        vacuum_green([0, 0, 0], [0, 0, 0], 1.0)


@given(st.floats(0.01, 3.0), st.floats(0.2, 3.0))
def test_bulk_reduces_to_vacuum(R, w):
    vac = PermittivityModel(0.0, 1e-6)
    a = bulk_green(vac, [R, 0, 0], [0, 0, 0], w).matrix
    b = vacuum_green([R, 0, 0], [0, 0, 0], w).matrix
    assert np.allclose(a, b, rtol=1e-9, atol=1e-12 * np.max(np.abs(b)))


def test_sphere_of_vacuum_scatters_nothing():
    sp = SphereGeometry(1.0, PermittivityModel(0.0, 1e-6))
    G = sphere_scattering_green(sp, [0, 0, 0.7], [0.3, 0, 0.8], 1.0)
    assert np.all(G.matrix == 0)


def test_quasi_static_small_sphere():
    # [DERIVED] dipole image of a sphere much smaller than both r and the wavelength
    m = PermittivityModel(0.5, 0.05)
    a, r, w = 0.0005, 0.01, 0.8
    G = sphere_scattering_green(SphereGeometry(2 * a, m), [0, 0, r], [0, 0, r], w).matrix
    eps = m(w)
    A, Rr = 2 * np.pi * a, 2 * np.pi * r
    qs = A**3 * (eps - 1) / (eps + 2) / (np.pi * Rr**6 * w**2)
    assert G[2, 2] == pytest.approx(qs, rel=2e-2)
    assert G[0, 0] == pytest.approx(qs / 4, rel=2e-2)
    assert abs(G[0, 2]) < 1e-12 * abs(qs)


@given(
    st.floats(0.12, 0.4), st.floats(0, np.pi), st.floats(0, 2 * np.pi),
    st.floats(0.12, 0.4), st.floats(0, np.pi), st.floats(0, 2 * np.pi),
    st.floats(0.5, 1.6),
)
def test_sphere_reciprocity(r1, t1, p1, r2, t2, p2, w):
    sp = SphereGeometry(0.2, PermittivityModel(0.5, 0.05))

    def pt(r, t, p):
        return r * np.array([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)])

    a, b = pt(r1, t1, p1), pt(r2, t2, p2)
    Gab = sphere_scattering_green(sp, a, b, w).matrix
    Gba = sphere_scattering_green(sp, b, a, w).matrix
    assert np.allclose(Gab, Gba.T, rtol=1e-7, atol=1e-9 * np.max(np.abs(Gab)))


@given(st.floats(0.11, 0.5), st.floats(0.3, 2.0))
def test_sphere_local_density_nonnegative(r, w):
    sp = SphereGeometry(0.2, PermittivityModel(0.5, 0.05))
    G = total_green(sp, [0, 0, r], [0, 0, r], w, imag_only=True)
    assert np.all(np.linalg.eigvalsh(0.5 * (G.imag + G.imag.T)) > -1e-12)


def test_frequency_array_matches_single_calls():
    sp = SphereGeometry(0.2, PermittivityModel(0.5, 0.05))
    ws = np.array([0.7, 1.0, 1.3])
    G, _ = sphere_scattering_array(sp, [0, 0, 0.15], [0.1, 0, 0.14], ws)
    for w, g in zip(ws, G):
        assert np.allclose(g, sphere_scattering_green(sp, [0, 0, 0.15], [0.1, 0, 0.14], w).matrix,
                           rtol=1e-8)


def test_point_inside_sphere_raises():
    sp = SphereGeometry(1.0, PermittivityModel())
    with pytest.raises(GeometryError):
        sphere_scattering_green(sp, [0, 0, 0.4], [0, 0, 0.7], 1.0)
    with pytest.raises(GeometryError):
        total_green(sp, [0, 0, 0.7], [0, 0, 0.5], 1.0)


def test_mie_truncation_failure_is_reported():
    sp = SphereGeometry(20.0, PermittivityModel(0.5, 1e-6), tol=1e-14)
    with pytest.raises(MieConvergenceError) as exc:
        sphere_scattering_array(sp, [0, 0, 10.02], [0, 0, 10.02], [1.05], max_lmax=200)
    assert exc.value.diagnostics["l_max"] == 200


def test_total_green_dispatch():
    r = np.array([0.0, 0.0, 0.3])
    assert np.allclose(total_green(None, r, [0, 0, 0], 1.0).matrix,
                       total_green(Vacuum(), r, [0, 0, 0], 1.0).matrix)
    m = PermittivityModel(0.5, 0.05)
    assert np.allclose(total_green(Bulk(m), r, [0, 0, 0], 1.0).matrix,
                       bulk_green(m, r, [0, 0, 0], 1.0).matrix)
    with pytest.raises(TypeError):
        total_green("glass", r, [0, 0, 0], 1.0)


def test_fit_lorentzian_recovers_parameters():
    w = np.linspace(0.9, 1.1, 401)
    y = 3.0 * 0.01**2 / ((w - 1.003) ** 2 + 0.01**2) + 0.2 + 0.5 * (w - 1.003)
    (amp, w0, hw, c0, c1), rms = fit_lorentzian(w, y)
    assert (amp, w0, hw, c0, c1) == pytest.approx((3.0, 1.003, 0.01, 0.2, 0.5), rel=1e-6)
    assert rms < 1e-10


def test_find_resonance_on_synthetic_line():
    def f(ws):
        return 2.0 * 1e-4**2 / ((ws - 1.0502) ** 2 + 1e-4**2) + 0.01

    res = find_resonance(None, None, [0, 0, 1], (1.049, 1.052), n_scan=3001, func=f)
    assert res.omega_m == pytest.approx(1.0502, abs=1e-9)
    assert res.delta_omega_m == pytest.approx(1e-4, rel=1e-5)
    assert res.strength == pytest.approx(2.01, rel=1e-8)


def test_find_resonance_errors():
    with pytest.raises(ResonanceSearchError):
        find_resonance(None, None, [0, 0, 1], (1.0, 1.1), func=lambda w: np.ones_like(w))

    def two(ws):
        return 1 / ((ws - 1.02) ** 2 + 1e-6) + 1 / ((ws - 1.08) ** 2 + 1e-6)

    with pytest.raises(ResonanceSearchError, match="2 peaks"):
        find_resonance(None, None, [0, 0, 1], (1.0, 1.1), func=two)
    with pytest.raises(ValueError):
        find_resonance(None, None, [0, 0, 1], (1.1, 1.0), func=two)
