"""Deterministic simulator of single-photon spin-orbit entanglement.

A q-plate couples a photon's circular polarization to its orbital angular
momentum; heralding one photon of a polarization-entangled pair leaves
the other in a single-photon spin-orbit Bell state.  This package
prepares that state, measures it with paired phase analyzers (both as
abstract projectors and as an element-by-element optical chain), and
evaluates the CHSH combination exactly, with shot noise, and against the
brute-force noncontextual hidden-variable bound.
"""

__version__ = "0.1.0"

from .chsh import (
    CIRCLE_SETTINGS,
    ChshSettings,
    CountRecord,
    McEstimate,
    RngSeed,
    SweepRow,
    TSIRELSON_SETTINGS,
    chsh_S,
    chsh_monte_carlo,
    estimate_E,
    nchv_max_S,
    sample_counts,
    sweep,
)
from .elements import (
    OrientationField,
    QPlateSpec,
    dove_pair_op,
    mirror_op,
    orientation_field,
    qplate_op,
    smf_filter_op,
    symmetry_order,
    transmission_matrix,
    waveplate_op,
)
from .experiment import (
    AnalyzerSettings,
    HeraldOutcome,
    LostWeightError,
    Observable,
    default_m_max,
    expectation,
    herald,
    interferometer_detect,
    joint_probabilities,
    observable_A,
    observable_B,
    prepare_hybrid,
    spdc_source,
    spin_orbit_bell_state,
)
from .qstate import (
    BipartiteState,
    LinearOp,
    PhotonState,
    Projector,
    apply,
    apply_alice,
    apply_bob,
    basis_change_circular_linear,
    inner,
    project,
    spin_ket,
    states_equal_up_to_phase,
    tensor,
)

__all__ = [
    "AnalyzerSettings",
    "BipartiteState",
    "CIRCLE_SETTINGS",
    "ChshSettings",
    "CountRecord",
    "HeraldOutcome",
    "LinearOp",
    "LostWeightError",
    "McEstimate",
    "Observable",
    "OrientationField",
    "PhotonState",
    "Projector",
    "QPlateSpec",
    "RngSeed",
    "SweepRow",
    "TSIRELSON_SETTINGS",
    "apply",
    "apply_alice",
    "apply_bob",
    "basis_change_circular_linear",
    "chsh_S",
    "chsh_monte_carlo",
    "default_m_max",
    "dove_pair_op",
    "estimate_E",
    "expectation",
    "herald",
    "inner",
    "interferometer_detect",
    "joint_probabilities",
    "mirror_op",
    "nchv_max_S",
    "observable_A",
    "observable_B",
    "orientation_field",
    "prepare_hybrid",
    "project",
    "qplate_op",
    "sample_counts",
    "smf_filter_op",
    "spdc_source",
    "spin_ket",
    "spin_orbit_bell_state",
    "states_equal_up_to_phase",
    "sweep",
    "symmetry_order",
    "tensor",
    "transmission_matrix",
    "waveplate_op",
]
