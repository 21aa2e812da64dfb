"""Addresses, excitation levels, and signal vectors.

A signal is an (address, level) pair: the identity of the emitting unit
plus the normalized strength of its excitation. Absence of a signal is
the only "off" state; a present signal always carries a level in (0, 1].
Signal vectors are immutable address-to-level mappings and are the sole
information carrier between units.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping
from typing import NamedTuple

from .errors import (
    DuplicateAddressError,
    LevelOutOfRangeError,
    OutOfBandError,
    ZeroLevelError,
)

# Linear lability band mapped onto the [0, 1] level scale.
FREQUENCY_BAND_HZ = (100.0, 1000.0)


class Address(NamedTuple):
    """Identity of a unit as (module_id, unit_id).

    Tuple comparison gives the lexicographic order used everywhere a
    deterministic tie-break or iteration order is needed.
    """

    module_id: int
    unit_id: int

    def __str__(self) -> str:
        return f"{self.module_id}/{self.unit_id}"


class Signal(NamedTuple):
    """One emitted (address, level) pair."""

    address: Address
    level: float


def check_level(level: float, owner: object = "signal") -> float:
    """Validate one level value: strictly positive, at most 1."""
    level = float(level)
    if level <= 0.0:
        raise ZeroLevelError(f"{owner}: level {level!r} is not positive")
    if level > 1.0:
        raise LevelOutOfRangeError(f"{owner}: level {level!r} exceeds 1")
    return level


class SignalVector(Mapping):
    """Immutable mapping of Address to level with all levels in (0, 1].

    Entries are stored in address order, so iteration is deterministic
    and independent of construction order. Two vectors are equal exactly
    when they hold the same entries.
    """

    __slots__ = ("_entries",)

    def __init__(self, pairs: Iterable[tuple[Address, float]] = ()):
        entries: dict[Address, float] = {}
        for address, level in pairs:
            address = Address(*address)
            if address in entries:
                raise DuplicateAddressError(f"duplicate address {address}")
            entries[address] = check_level(level, owner=address)
        self._entries: dict[Address, float] = dict(sorted(entries.items()))

    def __getitem__(self, address: Address) -> float:
        return self._entries[address]

    def __iter__(self) -> Iterator[Address]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, SignalVector):
            return self._entries == other._entries
        return NotImplemented

    def __hash__(self) -> int:
        return hash(tuple(self._entries.items()))

    def __repr__(self) -> str:
        inner = ", ".join(f"{a}: {v}" for a, v in self._entries.items())
        return f"SignalVector({{{inner}}})"

    @property
    def addresses(self) -> frozenset[Address]:
        return frozenset(self._entries)


def build_vector(pairs: Iterable[tuple[Address, float]]) -> SignalVector:
    """Validate (address, level) pairs into a SignalVector.

    Rejects duplicate addresses, non-positive levels, and levels above 1.
    """
    return SignalVector(pairs)


def level_from_frequency(hz: float) -> float:
    """Map a spike frequency inside the lability band linearly onto [0, 1].

    100 Hz maps to 0.0 and 1000 Hz to 1.0; anything outside that band
    raises OutOfBandError.
    """
    lo, hi = FREQUENCY_BAND_HZ
    hz = float(hz)
    if not lo <= hz <= hi:
        raise OutOfBandError(f"frequency {hz} Hz outside [{lo}, {hi}] Hz")
    return (hz - lo) / (hi - lo)


def frequency_from_level(level: float) -> float:
    """Inverse of level_from_frequency, from [0, 1] back to the band."""
    level = float(level)
    if not 0.0 <= level <= 1.0:
        raise OutOfBandError(f"level {level} outside [0, 1]")
    lo, hi = FREQUENCY_BAND_HZ
    return lo + level * (hi - lo)
