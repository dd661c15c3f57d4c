"""
Atoms strongly coupled to a microsphere resonance.

At exact resonance one superposition of the two atoms exchanges energy with
the field resonance at the vacuum Rabi frequency Omega, splitting its line
into a pair at -delta +- Omega/2, while the other superposition stays weakly
coupled. How the excitation is shared between the atoms depends on 4|delta|
relative to Omega. The three figure presets place the atoms close together,
at an intermediate distance, and on opposite poles.

Run:  python3 demos/03_strong_coupling.py   (a few minutes; each case solves
      for the exactly resonant transition frequency)
"""
import tempfile

from rddi.scenario import load_scenario, preset_path, run_scenario

for name in ("fig2_case_iii", "fig2_case_ii", "fig2_case_i"):
    with tempfile.TemporaryDirectory() as tmp:
        out = run_scenario(load_scenario(preset_path(name)), tmp, "fast")
    s = out.summary
    d = s["delta_AB"]
    Om = s["Omega_plus"] if s["strong_channel"] == "+" else s["Omega_minus"]
    print(f"{name}: regime {s['regime']}, delta = {d:.4g} gamma0, Omega = {Om:.4g} gamma0, "
          f"4|delta|/Omega = {4 * abs(d) / Om:.3g}")
    for ln in s["lines"]:
        print(f"    {ln['kind']:12s} at {ln['position']:10.2f} gamma0, FWHM {ln['width']:.3g}")
