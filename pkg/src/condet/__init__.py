"""condet: a deterministic simulator for concept-detector networks.

Detectors recognize sets of signal addresses rather than weighted sums.
A module of detectors competes winner-take-all each cycle, novel inputs
capture free detectors, and teacher coupling binds detectors to labels
while correcting their concepts toward the features every presentation
of a class shares.
"""

from .competition import ModuleVerdict, compete, module_step, normalize
from .detector import (
    EPSP_MV_RANGE,
    EXCITATION_THRESHOLD_MV,
    PRESYNAPTIC_ENVELOPE,
    RESTING_POTENTIAL_MV,
    DetectorCore,
    DetectorOutcome,
    LevelBand,
    OutcomeKind,
    check_excitation,
    detector_step,
    output_level,
    partition_inputs,
)
from .errors import (
    AlreadyBoundError,
    CheckpointError,
    CondetError,
    ConfigError,
    DimensionMismatchError,
    DuplicateAddressError,
    EmptyConceptError,
    EmptyFieldError,
    LevelOutOfRangeError,
    NoFreeDetectorError,
    OutOfBandError,
    PatternParseError,
    UnknownTeacherError,
    ZeroCyclesError,
    ZeroLevelError,
)
from .estimator import ConceptDetectorClassifier
from .harness import (
    ExperimentConfig,
    PatternSet,
    Report,
    load_checkpoint,
    load_patterns,
    run_experiment,
    save_checkpoint,
)
from .learning import (
    CorridorParams,
    MembershipTable,
    SelfLearningMode,
    TeacherMode,
    extract_concept,
    membership,
    output_ceiling,
    recompute_thresholds,
    self_update,
    teacher_update,
    update_band,
)
from .network import (
    Bound,
    DetectorUnit,
    Event,
    EventKind,
    Free,
    Identifier,
    ModuleState,
    NetworkState,
    PresentationStep,
    bind,
    build_network,
    capture,
    present,
    recall,
)
from .signals import (
    FREQUENCY_BAND_HZ,
    Address,
    Signal,
    SignalVector,
    build_vector,
    frequency_from_level,
    level_from_frequency,
)

__version__ = "0.1.0"

__all__ = [
    "Address",
    "AlreadyBoundError",
    "Bound",
    "CheckpointError",
    "CondetError",
    "ConceptDetectorClassifier",
    "ConfigError",
    "CorridorParams",
    "DetectorCore",
    "DetectorOutcome",
    "DetectorUnit",
    "DimensionMismatchError",
    "DuplicateAddressError",
    "EmptyConceptError",
    "EmptyFieldError",
    "EPSP_MV_RANGE",
    "Event",
    "EventKind",
    "EXCITATION_THRESHOLD_MV",
    "ExperimentConfig",
    "Free",
    "FREQUENCY_BAND_HZ",
    "Identifier",
    "LevelBand",
    "LevelOutOfRangeError",
    "MembershipTable",
    "ModuleState",
    "ModuleVerdict",
    "NetworkState",
    "NoFreeDetectorError",
    "OutcomeKind",
    "OutOfBandError",
    "PatternParseError",
    "PatternSet",
    "PresentationStep",
    "PRESYNAPTIC_ENVELOPE",
    "Report",
    "RESTING_POTENTIAL_MV",
    "SelfLearningMode",
    "Signal",
    "SignalVector",
    "TeacherMode",
    "UnknownTeacherError",
    "ZeroCyclesError",
    "ZeroLevelError",
    "bind",
    "build_network",
    "build_vector",
    "capture",
    "check_excitation",
    "compete",
    "detector_step",
    "extract_concept",
    "frequency_from_level",
    "level_from_frequency",
    "load_checkpoint",
    "load_patterns",
    "membership",
    "module_step",
    "normalize",
    "output_ceiling",
    "output_level",
    "partition_inputs",
    "present",
    "recall",
    "recompute_thresholds",
    "run_experiment",
    "save_checkpoint",
    "self_update",
    "teacher_update",
    "update_band",
]
