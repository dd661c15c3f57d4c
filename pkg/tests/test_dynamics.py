import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rddi.coupling import CouplingSet, RegimeError, StrongData
from rddi.dynamics import (
    KernelSpec,
    StepSizeError,
    classify_regime,
    golden_rule_rate,
    identical_probabilities,
    strong_amplitudes,
    strong_probabilities,
    transfer_rate_w1,
    transfer_time_t0,
    volterra_solve,
    weak_amplitudes,
)


def strong_pair(delta, Omega=128.0, dw=0.5, gm=0.005):
    gp = Omega**2 / (2 * dw)
    sd = StrongData(1.05, dw, gp, gm, True, 0.0)
    g = 0.5 * np.array([[gp + gm, gp - gm], [gp - gm, gp + gm]])
    return CouplingSet.from_rates(g[0, 0], g[1, 1], g[0, 1], delta, strong=sd)


rates = st.floats(1e-3, 10.0)


@given(rates, rates, st.floats(-1, 1), st.floats(-20.0, 20.0))
def test_probabilities_bounded(gA, gB, frac, delta):
    gab = frac * math.sqrt(gA * gB)
    c = CouplingSet.from_rates(gA, gB, gab, delta)
    t = np.linspace(0, 10, 400)
    CA, CB = weak_amplitudes(c, t)
    PA, PB = np.abs(CA) ** 2, np.abs(CB) ** 2
    assert np.all(PA >= -1e-12) and np.all(PB >= -1e-12)
    assert np.all(PA + PB <= 1 + 1e-9)
    assert np.all(np.diff(PA + PB) <= 1e-9)


def test_lossless_rabi_oscillation():
    c = CouplingSet.from_rates(0.0, 0.0, 0.0, 2.5)
    t = np.linspace(0, 5, 501)
    CA, CB = weak_amplitudes(c, t)
    assert np.allclose(np.abs(CB) ** 2, np.sin(2.5 * t) ** 2, atol=1e-12)
    assert np.allclose(np.abs(CA) ** 2 + np.abs(CB) ** 2, 1.0)


def test_identical_closed_form_matches_general():
    c = CouplingSet.from_rates(1.0, 1.0, 0.6, 1.7)
    t = np.linspace(0, 6, 200)
    CA, CB = weak_amplitudes(c, t)
    PA, PB = identical_probabilities(c, t)
    assert np.allclose(PA, np.abs(CA) ** 2) and np.allclose(PB, np.abs(CB) ** 2)


def test_dark_state_traps_a_quarter():
    c = CouplingSet.from_rates(1.0, 1.0, 1.0, 0.0)
    CA, CB = weak_amplitudes(c, [200.0])
    assert abs(CA[0]) ** 2 == pytest.approx(0.25)
    assert abs(CB[0]) ** 2 == pytest.approx(0.25)


def test_weak_requires_weak_regime():
    with pytest.raises(RegimeError):
        weak_amplitudes(strong_pair(-32.0), [0.0])
    c = CouplingSet.from_rates(1.0, 1.0, 0.0, 1.0, symmetric=False)
    with pytest.raises(RegimeError):
        weak_amplitudes(c, [0.0])
    with pytest.raises(RegimeError):
        identical_probabilities(CouplingSet.from_rates(1.0, 2.0), [0.0])


@pytest.mark.parametrize("gA, gB", [(1.0, 1e-4), (1.0, 1.0), (1e-4, 1.0)])
def test_transfer_time_and_rate_against_numerics(gA, gB):
    c = CouplingSet.from_rates(gA, gB, 0.0, 1e-4 * max(gA, gB) * 0.1)
    rep = golden_rule_rate(c)
    assert rep.t0 == pytest.approx(rep.t0_numeric, rel=1e-4)
    assert rep.w1 == pytest.approx(rep.w1_numeric, rel=1e-4)
    assert rep.case == {(1.0, 1e-4): "i", (1.0, 1.0): "ii", (1e-4, 1.0): "iii"}[(gA, gB)]


def test_identical_transfer_time():
    c = CouplingSet.from_rates(2.0, 2.0, 0.0, 1e-4)
    assert transfer_time_t0(c) == pytest.approx((2 - math.sqrt(2)) / 2.0)


def test_rates_refuse_oscillating_transfer():
    with pytest.raises(RegimeError):
        transfer_rate_w1(CouplingSet.from_rates(1.0, 1.0, 0.0, 5.0))


def test_strong_amplitudes_initial_state_and_decay():
    c = strong_pair(-32.0)
    CA, CB = strong_amplitudes(c, None, [0.0, 1e4])
    assert CA[0] == pytest.approx(1.0) and CB[0] == pytest.approx(0.0)
    assert abs(CA[1]) < 1e-3
    t = np.linspace(0, 2, 300)
    PA, PB = strong_probabilities(c, None, t)
    CA, CB = strong_amplitudes(c, None, t)
    assert np.allclose(PA, np.abs(CA) ** 2) and np.allclose(PB, np.abs(CB) ** 2)


def test_strong_detuning_rejected():
    c = strong_pair(-32.0)
    sd = StrongData(1.05, 0.5, c.strong.gamma_plus, c.strong.gamma_minus, True, detuning=3.0)
    bad = CouplingSet.from_rates(*np.diag(c.gamma), c.gamma[0, 1], -32.0, strong=sd)
    with pytest.raises(RegimeError):
        strong_amplitudes(bad, None, [0.0])
    with pytest.raises(RegimeError):
        strong_amplitudes(CouplingSet.from_rates(1.0, 1.0), None, [0.0])


@pytest.mark.parametrize("delta, case, fractions", [
    (-4000.0, "i", (0.5, 0.5, 0.0)),
    (-32.0, "ii", (5 / 8, 1 / 8, 2 / 8)),
    (0.05, "iii", (3 / 8, 3 / 8, 2 / 8)),
])
def test_trapping_fractions(delta, case, fractions):
    rep = classify_regime(strong_pair(delta))
    assert rep.case == case
    assert rep.averages == pytest.approx(fractions, abs=5e-3)


def test_regime_general_between_thresholds():
    assert classify_regime(strong_pair(-2129.0)).case == "general"


def test_volterra_flat_kernel_matches_weak():
    c = CouplingSet.from_rates(1.0, 0.5, 0.3, 0.8)
    k = KernelSpec.flat(c.gamma, half_width=400.0, n=4001)
    tr = volterra_solve(k, c, 6.0, 5e-4)
    CA, CB = weak_amplitudes(c, tr.times)
    assert np.max(np.abs(tr.P_B - np.abs(CB) ** 2)) < 1e-2
    assert np.max(np.abs(tr.P_A - np.abs(CA) ** 2)) < 1e-2


def test_volterra_lorentzian_matches_strong():
    c = strong_pair(-32.0)
    tr = volterra_solve(KernelSpec.lorentzian(c.strong, -32.0), c, 0.5, 5e-5)
    CA, CB = strong_amplitudes(c, None, tr.times)
    assert np.max(np.abs(tr.P_A - np.abs(CA) ** 2)) < 2e-2
    assert np.max(np.abs(tr.P_B - np.abs(CB) ** 2)) < 2e-2


def test_volterra_step_checks():
    c = strong_pair(-32.0)
    k = KernelSpec.lorentzian(c.strong, -32.0)
    with pytest.raises(StepSizeError) as exc:
        volterra_solve(k, c, 1.0, 0.1)
    assert "dt" in exc.value.diagnostics
    flat = KernelSpec.flat(np.eye(2), half_width=10.0, n=11)
    with pytest.raises(StepSizeError, match="aliases"):
        volterra_solve(flat, CouplingSet.from_rates(1.0, 1.0), 10.0, 1e-3)
    with pytest.raises(ValueError):
        volterra_solve(k, c, -1.0, 1e-3)


def test_kernel_validation():
    with pytest.raises(ValueError):
        KernelSpec("lorentzian", np.eye(2), 0.0)
    with pytest.raises(ValueError):
        KernelSpec("tabulated", nu=np.linspace(-1, 1, 5), J=np.zeros((2, 2, 4)))
    with pytest.raises(ValueError):
        KernelSpec("gaussian")


def test_trajectory_csv(tmp_path):
    c = CouplingSet.from_rates(1.0, 1.0, 0.2, 0.5)
    t = np.linspace(0, 1, 5)
    from rddi.dynamics import Trajectory

    tr = Trajectory(t, *weak_amplitudes(c, t))
    p = tmp_path / "traj.csv"
    tr.to_csv(p, ["scenario: test"])
    lines = p.read_text().splitlines()
    assert lines[0] == "# scenario: test"
    assert lines[1].split(",") == ["t", "re_C_A", "im_C_A", "re_C_B", "im_C_B", "P_A", "P_B", "P_L"]
    assert len(lines) == 7
