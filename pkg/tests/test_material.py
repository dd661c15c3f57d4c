import numpy as np
import pytest
from hypothesis import given, strategies as st

from rddi.material import (
    MaterialDomainError,
    PermittivityModel,
    kramers_kronig_residual,
    load_permittivity_table,
    permittivity,
    refractive_index,
)

# [DERIVED] 40-digit mpmath evaluation of background + w_P^2 / (1 - w^2 - i gamma w)
FROZEN_EPS = [
    (1.05, 0.5, 1e-6, -1.4390243899879572 + 2.4985127897437611e-5j),
    (0.8, 0.5, 0.05, 1.6859756097560976 + 0.076219512195121951j),
    (1.2, 0.5, 0.05, 0.44219066937119675 + 0.076064908722109533j),
]


@pytest.mark.parametrize("w, wp, g, expected", FROZEN_EPS)
def test_permittivity_frozen_values(w, wp, g, expected):
    eps = permittivity(PermittivityModel(wp, g), w)
    assert eps.real == pytest.approx(expected.real, rel=1e-13)
    assert eps.imag == pytest.approx(expected.imag, rel=1e-9)


@given(st.floats(1e-3, 50.0), st.floats(0.0, 2.0), st.floats(1e-8, 1.0))
def test_absorption_is_positive(w, wp, g):
    eps = PermittivityModel(wp, g)(w)
    assert eps.imag >= 0
    if wp > 0:
        assert eps.imag > 0 or wp**2 * g * w < 1e-300


@given(st.floats(1e-3, 10.0), st.floats(-1.0, 1.0), st.floats(0.01, 1.0))
def test_crossing_relation(wr, wi, g):
    m = PermittivityModel(0.5, g)
    w = complex(wr, wi)
    assert m.analytic(-np.conj(w)) == pytest.approx(np.conj(m.analytic(w)), rel=1e-12)


def test_band_gap_edges():
    m = PermittivityModel(0.5, 1e-6)
    assert m.omega_L == pytest.approx(np.sqrt(1.25))
    inside = np.linspace(1.001, 1.117, 50)
    assert np.all(m(inside).real < 0)
    assert m(1.2).real > 0 and m(0.9).real > 0


def test_refractive_index_branch():
    m = PermittivityModel(0.5, 1e-3)
    n = refractive_index(m, np.linspace(0.5, 2.0, 200))
    assert np.all(n.imag >= 0)
    assert np.allclose(n**2, m(np.linspace(0.5, 2.0, 200)))


def test_vacuum_flag():
    assert PermittivityModel(0.0, 1e-6).is_vacuum
    assert not PermittivityModel(0.5, 1e-6).is_vacuum


@pytest.mark.parametrize("bad", [0.0, -1.0, np.nan])
def test_nonpositive_frequency_raises(bad):
    with pytest.raises(MaterialDomainError):
        PermittivityModel()(bad)


@pytest.mark.parametrize("kw", [{"gamma_abs": 0.0}, {"omega_P": -0.1}, {"omega_T": 0.0}])
def test_invalid_parameters(kw):
    with pytest.raises(ValueError):
        PermittivityModel(**kw)


def test_kramers_kronig_consistency():
    m = PermittivityModel(0.5, 0.05)
    res = kramers_kronig_residual(m, np.linspace(1e-3, 40.0, 40001))
    assert not res.grid_warning
    assert res.relative_residual < 1e-3


def test_kramers_kronig_coarse_grid_warns():
    m = PermittivityModel(0.5, 1e-6)
    with pytest.warns(RuntimeWarning):
        res = kramers_kronig_residual(m, np.linspace(0.5, 2.0, 100))
    assert res.grid_warning


def test_kramers_kronig_detects_inconsistent_data():
    class Broken:
        background = 1.0

        def __call__(self, w):
            e = PermittivityModel(0.5, 0.05)(w)
            return e.real + 0.3 + 1j * e.imag

    res = kramers_kronig_residual(Broken(), np.linspace(1e-3, 40.0, 40001))
    assert res.relative_residual > 0.05


def test_table_roundtrip(tmp_path):
    m = PermittivityModel(0.5, 0.05)
    w = np.linspace(0.5, 1.5, 2001)
    e = m(w)
    p = tmp_path / "eps.dat"
    np.savetxt(p, np.column_stack([w, e.real, e.imag]), header="omega re im")
    tab = load_permittivity_table(p)
    assert tab(1.03) == pytest.approx(m(1.03), rel=1e-4)
    with pytest.raises(MaterialDomainError):
        tab(2.0)


def test_table_errors(tmp_path):
    p = tmp_path / "bad.dat"
    p.write_text("1 2\n3 4\n")
    with pytest.raises(ValueError):
        load_permittivity_table(p)
    p.write_text("2 1 0\n1 1 0\n")
    with pytest.raises(ValueError):
        load_permittivity_table(p)
