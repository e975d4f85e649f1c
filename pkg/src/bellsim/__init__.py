"""Simulator and verification toolkit for a linear-optical Bell-state
analyzer that works on polarization, orbital angular momentum (OAM), and
path modes of single photons.

The package is layered bottom-up:

- ``state``: sparse single/two-photon states over (pol, OAM, path) modes
- ``elements``: wave plates, q-plates, prisms, splitters as mode maps
- ``gates``: the analyzer's composite gates and their element
  decompositions, with exact equivalence checking
- ``circuit``: text format, canonical printer, static validation
- ``engine``: compilation, sparse propagation, dense matrix oracle
- ``measurement``: sorter blocks and coincidence-pattern distributions
- ``analyzer``: Bell inputs, the 64-pattern classification table, and
  end-to-end verification
"""

from .errors import (
    BellSimError,
    CalibrationFailure,
    CircuitSemanticError,
    CircuitSyntaxError,
    DimensionCap,
    DimensionMismatch,
    LeakedAmplitude,
    MalformedPattern,
    NonPhysicalQ,
    OamOverflow,
    SamePath,
    UnknownPath,
    UnsortableOam,
    ZeroNorm,
)
from .state import (
    BasisMode,
    ModeSpace,
    PhotonState,
    TwoPhotonState,
    basis_state,
    circular_state,
    equal_up_to_global_phase,
    fidelity,
    global_phase_between,
    max_amplitude_difference,
    superpose,
    tensor,
)
from .elements import (
    Element,
    apply_element,
    apply_elements,
    bs,
    dl,
    dp,
    element_column,
    hwp,
    mirror,
    oam_sorter,
    pbs,
    pp,
    qp,
    qwp,
    spp,
)
from .gates import (
    EquivalenceReport,
    apply_oam_flip,
    apply_oam_hadamard,
    apply_path_router,
    apply_pol_shift,
    gate_equiv,
    hadamard_row_report,
    oam_flip_decomposition,
    oam_hadamard_decomposition,
    path_router_decomposition,
    path_router_stage_groups,
    pol_shift_decomposition,
)
from .circuit import (
    Circuit,
    Stage,
    ValidationReport,
    builtin_document,
    parse_circuit,
    print_circuit,
    validate,
)
from .engine import (
    AssembledUnitary,
    Plan,
    assemble,
    compile_circuit,
    propagate,
    propagate_with_checkpoints,
    restrict_to_circuit,
)
from .measurement import (
    CoincidencePattern,
    DetectorId,
    OutcomeDistribution,
    enumerate_patterns,
    parse_pattern,
    sppm_project,
)
from .analyzer import (
    BELL_LABELS,
    CLASSIFICATION_TABLE,
    OracleReport,
    VerificationReport,
    analyze,
    classify,
    classify_by_parity,
    default_circuit,
    oracle_check,
    prepare_input,
    stage_states,
    tamper_table,
    verify,
)

__version__ = "0.1.0"

__all__ = [
    "BellSimError",
    "CalibrationFailure",
    "CircuitSemanticError",
    "CircuitSyntaxError",
    "DimensionCap",
    "DimensionMismatch",
    "LeakedAmplitude",
    "MalformedPattern",
    "NonPhysicalQ",
    "OamOverflow",
    "SamePath",
    "UnknownPath",
    "UnsortableOam",
    "ZeroNorm",
    "BasisMode",
    "ModeSpace",
    "PhotonState",
    "TwoPhotonState",
    "basis_state",
    "circular_state",
    "equal_up_to_global_phase",
    "fidelity",
    "global_phase_between",
    "max_amplitude_difference",
    "superpose",
    "tensor",
    "Element",
    "apply_element",
    "apply_elements",
    "bs",
    "dl",
    "dp",
    "element_column",
    "hwp",
    "mirror",
    "oam_sorter",
    "pbs",
    "pp",
    "qp",
    "qwp",
    "spp",
    "EquivalenceReport",
    "apply_oam_flip",
    "apply_oam_hadamard",
    "apply_path_router",
    "apply_pol_shift",
    "gate_equiv",
    "hadamard_row_report",
    "oam_flip_decomposition",
    "oam_hadamard_decomposition",
    "path_router_decomposition",
    "path_router_stage_groups",
    "pol_shift_decomposition",
    "Circuit",
    "Stage",
    "ValidationReport",
    "builtin_document",
    "parse_circuit",
    "print_circuit",
    "validate",
    "AssembledUnitary",
    "Plan",
    "assemble",
    "compile_circuit",
    "propagate",
    "propagate_with_checkpoints",
    "restrict_to_circuit",
    "CoincidencePattern",
    "DetectorId",
    "OutcomeDistribution",
    "enumerate_patterns",
    "parse_pattern",
    "sppm_project",
    "BELL_LABELS",
    "CLASSIFICATION_TABLE",
    "OracleReport",
    "VerificationReport",
    "analyze",
    "classify",
    "classify_by_parity",
    "default_circuit",
    "oracle_check",
    "prepare_input",
    "stage_states",
    "tamper_table",
    "verify",
    "__version__",
]
