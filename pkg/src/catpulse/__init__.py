"""catpulse: cavity-assisted Schrodinger-cat engineering for optical pulses.

Simulates reflection of weak coherent pulses from a single-atom cavity,
extracts the reflected output mode and its noise figures, and propagates
them through exact coherent-superposition algebra to predict cat-state
fidelities, protocols, and Wigner functions.
"""

__version__ = "0.1.0"

from .catstates import (Branch, CatState, ReflectionNoise, coherent_state,
                        displace, even_odd_cat, measure_atom,
                        measurement_probabilities, overlap, prepare_atom,
                        product_coherent, reflect, wigner)
from .lindblad import (CutoffError, DensityMatrix, HilbertDims,
                       IntegrationError, SystemParams, Trajectory,
                       coherence_diagnostic, evolve)
from .protocols import (ProtocolError, ProtocolResult, ProtocolStep,
                        multidimensional_cat, multipartite_cat, run_script)
from .pulses import (ComplexEnvelope, SpectralEnvelope, TimeGrid,
                     apply_spectral_filter, default_grid, empty_cavity_filter,
                     empty_cavity_reflect, inner_product, make_gaussian_pulse,
                     mismatch)
from .reflection import (FidelityReport, ReflectionOutcome, ReflectionRun,
                         RingdownError, compute_mismatch_figures,
                         extract_output_mode, fidelity_eq7, fidelity_exact,
                         simulate_reflection, weak_drive_oracle)

__all__ = [
    "__version__",
    "Branch", "CatState", "ReflectionNoise", "coherent_state", "displace",
    "even_odd_cat", "measure_atom", "measurement_probabilities", "overlap",
    "prepare_atom", "product_coherent", "reflect", "wigner",
    "CutoffError", "DensityMatrix", "HilbertDims", "IntegrationError",
    "SystemParams", "Trajectory", "coherence_diagnostic", "evolve",
    "ProtocolError", "ProtocolResult", "ProtocolStep", "multidimensional_cat",
    "multipartite_cat", "run_script",
    "ComplexEnvelope", "SpectralEnvelope", "TimeGrid", "apply_spectral_filter",
    "default_grid", "empty_cavity_filter", "empty_cavity_reflect",
    "inner_product", "make_gaussian_pulse", "mismatch",
    "FidelityReport", "ReflectionOutcome", "ReflectionRun", "RingdownError",
    "compute_mismatch_figures", "extract_output_mode", "fidelity_eq7",
    "fidelity_exact", "simulate_reflection", "weak_drive_oracle",
]
