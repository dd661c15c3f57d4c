"""
Energy transfer between two atoms in free space.

Two identical atoms with parallel dipoles exchange an excitation through the
resonant dipole-dipole interaction delta. At short distances delta falls off
as R^-3 and the excitation oscillates between the atoms; at larger distances
the collective decay rates Gamma_+- = Gamma (1 +- Gamma_AB / Gamma) govern how
much of the excitation survives in the dark superposition.

Run:  python3 demos/01_vacuum_transfer.py
"""
import numpy as np

from rddi import AtomPair, Vacuum, build_coupling, weak_amplitudes
from rddi.dynamics import classify_regime, golden_rule_rate
from rddi.coupling import CouplingSet, StrongData

z = np.array([0.0, 0.0, 1.0])

print("distance law (transverse dipoles, lengths in lambda_T)")
print(f"{'R':>8} {'delta/gamma0':>14} {'Gamma_AB/gamma0':>16}")
for R in (0.005, 0.01, 0.02, 0.05, 0.1, 0.5, 1.0):
    c = build_coupling(AtomPair([0, 0, 0], [R, 0, 0], z, z, 1e-6), Vacuum())
    print(f"{R:8.3f} {c.delta_AB:14.6g} {c.gamma[0, 1]:16.6g}")

# near zone: the excitation swaps back and forth at the rate delta
c = build_coupling(AtomPair([0, 0, 0], [0.02, 0, 0], z, z, 1e-6), Vacuum())
t = np.linspace(0, np.pi / abs(c.delta_AB), 5)
CA, CB = weak_amplitudes(c, t)
print("\nR = 0.02: P_B over one exchange period")
for ti, pb in zip(t, np.abs(CB) ** 2):
    print(f"  t = {ti:9.3e} / gamma0   P_B = {pb:.4f}")

# one-way transfer when the RDDI is weak compared with the decay rates
print("\none-way transfer to an atom with a different decay rate")
for gA, gB in ((1.0, 1e-4), (1.0, 1.0), (1e-4, 1.0)):
    rep = golden_rule_rate(CouplingSet.from_rates(gA, gB, 0.0, 1e-5))
    print(f"  Gamma_A = {gA:g}, Gamma_B = {gB:g}: case {rep.case:7s} "
          f"t0 = {rep.t0:.4g}  w1/w = {rep.ratio:.4f}")

# strong coupling of the symmetric state to a field resonance, Omega = 128
print("\ntime-averaged trapping with a strongly coupled field resonance (Omega = 128)")
for d in (-4000.0, -32.0, 0.05):
    gp = 128.0**2 / (2 * 0.5)
    sd = StrongData(1.05, 0.5, gp, 0.005, True)
    s = CouplingSet.from_rates(0.5 * gp, 0.5 * gp, 0.5 * gp, d, strong=sd)
    rep = classify_regime(s)
    print(f"  delta = {d:8.2f}: case {rep.case:4s} <P_A, P_B, P_L> = "
          + ", ".join(f"{v:.3f}" for v in rep.averages))
