"""
The whispering-gallery / surface resonance of a Drude-Lorentz microsphere.

A sphere of diameter 20 lambda_T with omega_P = 0.5 and gamma = 1e-6 has a
band gap between omega_T = 1 and omega_L = sqrt(1.25). Inside the gap a comb
of very narrow resonances appears in the local density of states seen by an
atom 0.02 lambda_T above the surface. The script locates the one near
1.05048 and then runs the weak-coupling spectrum preset for two atoms on
opposite poles.

Run:  python3 demos/02_microsphere_resonance.py   (about half a minute)
"""
import tempfile

import numpy as np

from rddi import PermittivityModel, SphereGeometry, find_resonance
from rddi.scenario import load_scenario, preset_path, run_scenario

material = PermittivityModel(omega_P=0.5, gamma_abs=1e-6)
print(f"band gap: omega_T = 1, omega_L = {material.omega_L:.6f}")

sphere = SphereGeometry(20.0, material, tol=1e-8)
r = np.array([0.0, 0.0, 10.02])
res = find_resonance(sphere, r, [0, 0, 1], (1.0504, 1.0506), n_scan=601)
print(f"resonance: omega_m = {res.omega_m:.9f}, half width = {res.delta_omega_m:.3e}, "
      f"Lorentzian fit residual = {res.fit_residual:.1e}")

with tempfile.TemporaryDirectory() as tmp:
    out = run_scenario(load_scenario(preset_path("fig1_solid")), tmp, "fast")
    s = out.summary
    print(f"\nfig1_solid: delta = {s['delta_AB']:.2f} gamma0, Gamma_+ = "
          f"{s['gamma_AA'] + s['gamma_AB']:.2f}, Gamma_- = {s['gamma_AA'] - s['gamma_AB']:.3f}")
    for ln in s["lines"]:
        print(f"  line {ln['kind']:9s} at {ln['position']:9.2f} gamma0, FWHM {ln['width']:.3g}")
