"""Forward pipeline of a single detector.

A detector fires when the inputs that fall inside its concept carry,
together with its base excitation g0, enough total level to clear the
threshold g_star. Inputs inside the receptive field but outside the
concept never gate firing; they only raise the raw output that the
subsequent competition compares. Inputs outside the receptive field are
invisible to the detector.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .signals import Address, SignalVector

# Motoneuron-scale figures for the physiological sanity preset:
# resting potential, excitation threshold, and the admissible range of
# one excitatory postsynaptic potential, all in millivolts.
RESTING_POTENTIAL_MV = -65.0
EXCITATION_THRESHOLD_MV = -45.0
EPSP_MV_RANGE = (0.5, 1.0)

# Envelope of presynaptic counts implied by the preset above: fewer
# than 20 maximal EPSPs cannot excite, 40 minimal ones just can.
PRESYNAPTIC_ENVELOPE = (20, 40)


@dataclass(frozen=True)
class LevelBand:
    """Observed level statistics for one concept address.

    min and max are the extremes seen so far, opt the running mean, and
    count the number of observations folded in.
    """

    min: float
    opt: float
    max: float
    count: int = 1

    def __post_init__(self) -> None:
        if not 0.0 < self.min <= self.opt <= self.max:
            raise ValueError(
                f"band requires 0 < min <= opt <= max, got "
                f"({self.min}, {self.opt}, {self.max})"
            )
        if self.count < 1:
            raise ValueError(f"band count must be at least 1, got {self.count}")


@dataclass
class DetectorCore:
    """Everything a detector needs to form its output.

    receptive_field is the set of addresses it has synapses for, fixed
    at capture time; concept is the subset whose joint presence means
    "my pattern". g0 is the base excitation, g_star the threshold, and
    y_max the ceiling used to normalize the raw output.
    """

    own_address: Address
    receptive_field: frozenset[Address] = frozenset()
    concept: frozenset[Address] = frozenset()
    bands: dict[Address, LevelBand] = field(default_factory=dict)
    g0: float = 0.0
    g_star: float = 1.0
    y_max: float = 1.0

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if not self.concept <= self.receptive_field:
            extra = self.concept - self.receptive_field
            raise ValueError(f"concept addresses outside receptive field: {sorted(extra)}")
        missing = self.concept - set(self.bands)
        if missing:
            raise ValueError(f"concept addresses without a band: {sorted(missing)}")
        if self.g0 < 0.0:
            raise ValueError(f"g0 must be non-negative, got {self.g0}")
        if self.g_star <= 0.0:
            raise ValueError(f"g_star must be positive, got {self.g_star}")
        if self.y_max <= 0.0:
            raise ValueError(f"y_max must be positive, got {self.y_max}")


class OutcomeKind(Enum):
    """Why a detector did or did not emit this cycle."""

    NO_MATCH = "no_match"
    SUB_THRESHOLD = "sub_threshold"
    FIRED = "fired"


@dataclass(frozen=True)
class DetectorOutcome:
    """Result of one forward pass; raw_level is set only when fired."""

    kind: OutcomeKind
    raw_level: float | None = None

    def __post_init__(self) -> None:
        if (self.kind is OutcomeKind.FIRED) != (self.raw_level is not None):
            raise ValueError("raw_level must be present exactly when fired")

    @property
    def fired(self) -> bool:
        return self.kind is OutcomeKind.FIRED


def partition_inputs(inputs: SignalVector, det: DetectorCore) -> tuple[float, float]:
    """Split the input levels into concept and non-concept sums (g', g'').

    Addresses outside the receptive field contribute to neither sum.
    Both sums fold left in address order, so the same entries always
    reduce to the same floats regardless of how the vector was built.
    """
    g_prime = 0.0
    g_dprime = 0.0
    for address, level in inputs.items():
        if address in det.concept:
            g_prime += level
        elif address in det.receptive_field:
            g_dprime += level
    return g_prime, g_dprime


def check_excitation(
    base: float, contribution: float, threshold: float, strict: bool = False
) -> bool:
    """Corridor check: does base + contribution reach the threshold?

    The default comparison is >=; strict=True switches to the
    alternative > reading.
    """
    total = base + contribution
    if strict:
        return total > threshold
    return total >= threshold


def output_level(g0: float, g_prime: float, g_dprime: float) -> float:
    """Raw output y = dg + g'' with dg = g0 + g'.

    Evaluated as (g0 + g_prime) + g_dprime, in exactly that association
    order, so the identity against separately computed dg holds
    bit-for-bit.
    """
    return (g0 + g_prime) + g_dprime


def detector_step(
    det: DetectorCore, inputs: SignalVector, strict: bool = False
) -> DetectorOutcome:
    """One forward pass: membership gate, corridor check, raw output.

    No input address inside the concept means NO_MATCH and nothing is
    summed. Concept inputs that stay below the corridor mean
    SUB_THRESHOLD. Only a fired detector carries a raw level.
    """
    if not any(address in det.concept for address in inputs):
        return DetectorOutcome(OutcomeKind.NO_MATCH)
    g_prime, g_dprime = partition_inputs(inputs, det)
    if not check_excitation(det.g0, g_prime, det.g_star, strict=strict):
        return DetectorOutcome(OutcomeKind.SUB_THRESHOLD)
    return DetectorOutcome(OutcomeKind.FIRED, output_level(det.g0, g_prime, g_dprime))
