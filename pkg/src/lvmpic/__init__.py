"""Structure-preserving delta-f PIC solver for linearized Vlasov-Maxwell."""

from .diagnostics import (
    ScalarSeries,
    SpectrumGrid,
    bernstein_residual,
    cold_plasma_modes,
    cvk_peak_offsets,
    dispersion_spectrum,
    fit_damping_rate,
    hamiltonian,
    hybrid_frequencies,
    rel_energy_error,
)
from .feec import DeRhamComplex, MassMatrices, assemble_mass, build_complex, cg_solve, solve_poisson
from .geometry import MappingBundle, MappingSpec, evaluate_bundle
from .markers import (
    BackgroundSpec,
    MarkerBatch,
    PhysParams,
    eval_f0,
    init_weights,
    sample_markers,
)
from .propagators import (
    FieldState,
    Stepper,
    SubstepSchedule,
    accumulate_coupling,
    accumulate_current,
    direct_deltaf_step,
)
from .runner import RunRecord, SimConfig, Simulation, parse_config, preset_text, run

__version__ = "0.1.0"
