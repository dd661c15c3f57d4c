"""
Resonant energy exchange between two atoms near dispersing, absorbing bodies.

Submodules
----------
material  : Drude-Lorentz and tabulated permittivities
green     : free-space, bulk and microsphere Green tensors, resonance search
coupling  : RDDI strengths, decay matrix, level shifts
dynamics  : closed-form and Volterra single-excitation dynamics, transfer rates
spectrum  : emission spectra (closed forms and finite-time oracle)
scenario  : scenario files, presets and the command-line front end

Units: omega_T = 1, lengths in lambda_T = 2 pi c / omega_T, rates in gamma0.
"""
__version__ = "0.1.0"

from .material import PermittivityModel, TabulatedPermittivity, permittivity, refractive_index
from .green import (
    Bulk,
    GreenTensor,
    ResonanceInfo,
    SphereGeometry,
    Vacuum,
    bulk_green,
    find_resonance,
    sphere_scattering_green,
    total_green,
    vacuum_green,
)
from .coupling import (
    AtomPair,
    CouplingSet,
    StrongData,
    build_coupling,
    delta_coupling,
    frequency_shift,
    gamma_coupling,
    k_coefficient,
)
from .dynamics import (
    KernelSpec,
    Trajectory,
    golden_rule_rate,
    identical_probabilities,
    strong_amplitudes,
    transfer_rate_w1,
    volterra_solve,
    weak_amplitudes,
)
from .spectrum import (
    EmissionWeights,
    SpectrumResult,
    finite_time_spectrum,
    strong_spectrum,
    weak_spectrum,
)

