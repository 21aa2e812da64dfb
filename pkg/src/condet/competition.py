"""Winner-take-all competition inside one module.

Of all detectors that fired in a cycle, exactly one wins: the one with
the highest raw output, ties broken toward the smallest address. Every
loser is pushed into pre-excitation for the cycle and emits nothing. A
module whose detectors all stayed silent on a non-empty input reports
novelty, the condition the command neuron reacts to.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

from .detector import DetectorCore, detector_step
from .errors import EmptyFieldError
from .signals import Address, Signal, SignalVector


@dataclass(frozen=True)
class ModuleVerdict:
    """Outcome of one module cycle.

    winner is the single emitted signal, or None when nothing fired.
    pre_excited holds the losers. novelty is True exactly when the
    inputs were non-empty and no detector fired.
    """

    winner: Signal | None
    pre_excited: frozenset[Address]
    novelty: bool

    def __post_init__(self) -> None:
        if self.winner is not None:
            if self.novelty:
                raise ValueError("a cycle with a winner cannot be novel")
            if self.winner.address in self.pre_excited:
                raise ValueError("the winner cannot also be pre-excited")
            if not 0.0 <= self.winner.level <= 1.0:
                raise ValueError(f"winner level {self.winner.level} outside [0, 1]")
        elif self.pre_excited:
            raise ValueError("losers require a winner")


def compete(
    fired: Sequence[tuple[Address, float]],
) -> tuple[Address, frozenset[Address]]:
    """Pick the single winner by raw level; ties go to the smallest address.

    Returns the winner and the set of losers. An empty field raises
    EmptyFieldError.
    """
    if not fired:
        raise EmptyFieldError("no fired detectors to compete")
    best_address, best_level = fired[0]
    for address, level in fired[1:]:
        if level > best_level or (level == best_level and address < best_address):
            best_address, best_level = address, level
    losers = frozenset(address for address, _ in fired if address != best_address)
    return best_address, losers


def normalize(raw_level: float, y_max: float) -> float:
    """Clamp-normalize a raw output into [0, 1] against its ceiling."""
    if raw_level < 0.0:
        raise ValueError(f"raw level must be non-negative, got {raw_level}")
    if y_max <= 0.0:
        raise ValueError(f"y_max must be positive, got {y_max}")
    return min(1.0, raw_level / y_max)


def module_step(
    detectors: Sequence[DetectorCore], inputs: SignalVector, strict: bool = False
) -> ModuleVerdict:
    """Run every detector on the inputs, then alpha-competition.

    The winner's raw output is normalized against its own ceiling; the
    emitted level is therefore always in [0, 1].
    """
    fired: dict[Address, tuple[float, float]] = {}
    for det in detectors:
        outcome = detector_step(det, inputs, strict=strict)
        if outcome.fired:
            fired[det.own_address] = (outcome.raw_level, det.y_max)
    if not fired:
        return ModuleVerdict(None, frozenset(), novelty=len(inputs) > 0)
    winner_address, losers = compete([(a, raw) for a, (raw, _) in fired.items()])
    raw, y_max = fired[winner_address]
    return ModuleVerdict(
        Signal(winner_address, normalize(raw, y_max)), losers, novelty=False
    )
