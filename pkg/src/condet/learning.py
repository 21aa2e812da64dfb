"""Occurrence counting, concept extraction, and corridor maintenance.

Learning state is one counter per known presynaptic address plus a
cycle counter; membership of an address in the concept is a pure
function of those counts. Teacher coupling demands presence in every
counted cycle, self-learning passes the occurrence ratio through a
power curve and compares it against a statistical threshold. Level
bands accumulate alongside the counters and feed the excitation
corridor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from collections.abc import Mapping

from .detector import LevelBand
from .errors import EmptyConceptError, ZeroCyclesError, ZeroLevelError
from .signals import Address, SignalVector


@dataclass(frozen=True)
class TeacherMode:
    """Membership by exact co-occurrence: w = l/k, in-concept iff w >= 1 - delta."""

    delta: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.delta < 1.0:
            raise ValueError(f"delta must lie in [0, 1), got {self.delta}")


@dataclass(frozen=True)
class SelfLearningMode:
    """Membership through a power curve: w = (l/k)**c, in-concept iff w >= q."""

    c: float = 0.5
    q: float = 0.7

    def __post_init__(self) -> None:
        if not 0.0 < self.c < 1.0:
            raise ValueError(f"exponent c must lie in (0, 1), got {self.c}")
        if not 0.0 < self.q < 1.0:
            raise ValueError(f"threshold q must lie in (0, 1), got {self.q}")


LearningMode = TeacherMode | SelfLearningMode


@dataclass(frozen=True)
class CorridorParams:
    """Knobs of threshold recomputation.

    theta scales the optimal-level sum down to the threshold g_star.
    epsilon_level is the smallest admissible threshold, a floor that
    keeps g_star positive even for degenerate bands.
    """

    theta: float = 0.9
    epsilon_level: float = 1e-9

    def __post_init__(self) -> None:
        if not 0.0 < self.theta <= 1.0:
            raise ValueError(f"theta must lie in (0, 1], got {self.theta}")
        if self.epsilon_level <= 0.0:
            raise ValueError(f"epsilon_level must be positive, got {self.epsilon_level}")


@dataclass
class MembershipTable:
    """Per-detector learning state: cycle counter, occurrence counters, bands.

    Counters and bands are kept for every address ever observed, so an
    address that drops out of the concept keeps its history and its
    band.
    """

    mode: LearningMode = field(default_factory=TeacherMode)
    k_count: int = 0
    l_counts: dict[Address, int] = field(default_factory=dict)
    bands: dict[Address, LevelBand] = field(default_factory=dict)

    def validate(self) -> None:
        if self.k_count < 0:
            raise ValueError(f"k_count must be non-negative, got {self.k_count}")
        for address, count in self.l_counts.items():
            if not 0 <= count <= self.k_count:
                raise ValueError(
                    f"l_count({address}) = {count} outside [0, k = {self.k_count}]"
                )


def update_band(band: LevelBand | None, observed: float) -> LevelBand:
    """Fold one observed level into a band; opt is the running mean.

    None starts a fresh band at the observation. The running mean is
    clamped into [min, max] to absorb one-ulp float drift.
    """
    if observed <= 0.0:
        raise ZeroLevelError(f"band observation must be positive, got {observed}")
    if band is None:
        return LevelBand(min=observed, opt=observed, max=observed, count=1)
    new_min = min(band.min, observed)
    new_max = max(band.max, observed)
    mean = (band.opt * band.count + observed) / (band.count + 1)
    mean = min(max(mean, new_min), new_max)
    return LevelBand(min=new_min, opt=mean, max=new_max, count=band.count + 1)


def teacher_update(
    table: MembershipTable, inputs: SignalVector, z_present: bool
) -> MembershipTable:
    """One teacher-coupled learning cycle.

    Cycles without the teacher signal z do not count at all: no counter
    moves and no band changes. With z present, the cycle counter ticks
    and every input address gains one occurrence and one band
    observation.
    """
    if not isinstance(table.mode, TeacherMode):
        raise ValueError("teacher_update requires a table in teacher mode")
    if not z_present:
        return table
    return _count_cycle(table, inputs)


def self_update(table: MembershipTable, inputs: SignalVector) -> MembershipTable:
    """One self-learning cycle; every presented cycle counts."""
    if not isinstance(table.mode, SelfLearningMode):
        raise ValueError("self_update requires a table in self-learning mode")
    return _count_cycle(table, inputs)


def _count_cycle(table: MembershipTable, inputs: SignalVector) -> MembershipTable:
    table.k_count += 1
    for address, level in inputs.items():
        table.l_counts[address] = table.l_counts.get(address, 0) + 1
        table.bands[address] = update_band(table.bands.get(address), level)
    return table


def membership(table: MembershipTable, address: Address) -> tuple[float, bool]:
    """Membership weight of one address and whether it clears the rule.

    Teacher mode: w = l/k, in-concept iff w >= 1 - delta. Self-learning:
    w = (l/k)**c, in-concept iff w >= q. Querying before any counted
    cycle raises ZeroCyclesError.
    """
    if table.k_count == 0:
        raise ZeroCyclesError("membership undefined before the first counted cycle")
    ratio = table.l_counts.get(address, 0) / table.k_count
    mode = table.mode
    if isinstance(mode, TeacherMode):
        return ratio, ratio >= 1.0 - mode.delta
    weight = ratio**mode.c
    return weight, weight >= mode.q


def extract_concept(table: MembershipTable) -> frozenset[Address]:
    """Addresses whose membership weight clears the rule."""
    if table.k_count == 0:
        raise ZeroCyclesError("concept undefined before the first counted cycle")
    return frozenset(
        address for address in table.l_counts if membership(table, address)[1]
    )


def recompute_thresholds(
    bands: Mapping[Address, LevelBand], params: CorridorParams
) -> tuple[float, float]:
    """New (g0, g_star) for a concept described by its bands.

    g_star takes theta of the optimal-level sum, floored at
    epsilon_level; g0 makes up whatever the minimum-level sum still
    needs to reach g_star, and never goes negative. Both sums fold left
    in address order so they agree bit-for-bit with the detector's own
    input sums over the same levels.
    """
    if not bands:
        raise EmptyConceptError("cannot recompute thresholds for an empty concept")
    sum_opt = 0.0
    sum_min = 0.0
    for address in sorted(bands):
        band = bands[address]
        sum_opt += band.opt
        sum_min += band.min
    g_star = max(params.theta * sum_opt, params.epsilon_level)
    g0 = max(0.0, g_star - sum_min)
    return g0, g_star


def output_ceiling(bands: Mapping[Address, LevelBand], g_star: float) -> float:
    """Largest corridor-admissible raw output: g_star plus the max-level sum."""
    if not bands:
        raise EmptyConceptError("cannot compute a ceiling for an empty concept")
    total = 0.0
    for address in sorted(bands):
        total += bands[address].max
    return g_star + total
