"""Two-system orchestration: perceptual modules, label units, capture, binding.

A network holds perceptual modules full of detectors plus one label
module whose units stand in for teacher detectors. Presenting an input
runs every perceptual module through competition and then applies the
supervision rules: a novel input captures the nearest free detector, a
teacher firing together with an unbound winner binds the two, an
agreeing teacher corrects the winner's concept, and a disagreeing
teacher suppresses the winner and forks a fresh detector for the new
label.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import Enum

from .competition import ModuleVerdict, module_step, normalize
from .detector import DetectorCore, LevelBand, detector_step
from .errors import (
    AlreadyBoundError,
    NoFreeDetectorError,
    UnknownTeacherError,
)
from .learning import (
    CorridorParams,
    LearningMode,
    MembershipTable,
    SelfLearningMode,
    TeacherMode,
    extract_concept,
    output_ceiling,
    recompute_thresholds,
    self_update,
    teacher_update,
)
from .signals import Address, Signal, SignalVector

RECEPTOR_MODULE_ID = 0


@dataclass(frozen=True)
class Free:
    """Not yet captured: empty concept, never fires."""


@dataclass(frozen=True)
class Identifier:
    """Holds a captured concept but is not yet coupled to a label."""


@dataclass(frozen=True)
class Bound:
    """Coupled to exactly one label unit."""

    teacher: Address


Lifecycle = Free | Identifier | Bound


class EventKind(Enum):
    """Supervision events a presentation can raise."""

    NOVELTY_FIRED = "novelty_fired"
    CAPTURED = "captured"
    BOUND = "bound"
    CORRECTED = "corrected"
    CONFLICT = "conflict"
    ASSOCIATIVE_UNSUPPORTED = "associative_unsupported"


@dataclass(frozen=True)
class Event:
    """One supervision event: what happened, where, to whom."""

    kind: EventKind
    module_id: int | None = None
    detector: Address | None = None
    teacher: Address | None = None


@dataclass(frozen=True)
class PresentationStep:
    """Record of one cycle: per-module winners plus supervision events.

    winners maps module_id to the emitted signal; a module that stayed
    silent has no entry, so each module contributes at most one signal.
    """

    cycle: int
    winners: dict[int, Signal]
    events: tuple[Event, ...]


@dataclass
class DetectorUnit:
    """One detector slot in a module: core, learning state, lifecycle."""

    core: DetectorCore
    table: MembershipTable
    life: Lifecycle = field(default_factory=Free)


@dataclass
class ModuleState:
    """Detectors sharing one module id; at most one winner per cycle."""

    module_id: int
    units: list[DetectorUnit]

    def __post_init__(self) -> None:
        seen: set[int] = set()
        for unit in self.units:
            address = unit.core.own_address
            if address.module_id != self.module_id:
                raise ValueError(f"unit {address} inside module {self.module_id}")
            if address.unit_id in seen:
                raise ValueError(f"duplicate unit id {address.unit_id}")
            seen.add(address.unit_id)

    @classmethod
    def empty(cls, module_id: int, size: int) -> "ModuleState":
        """A module of `size` free detectors with unit ids 0..size-1."""
        units = [
            DetectorUnit(
                core=DetectorCore(own_address=Address(module_id, unit_id)),
                table=MembershipTable(),
            )
            for unit_id in range(size)
        ]
        return cls(module_id=module_id, units=units)

    def find(self, address: Address) -> DetectorUnit:
        for unit in self.units:
            if unit.core.own_address == address:
                return unit
        raise KeyError(f"no unit {address} in module {self.module_id}")

    def cores(self) -> list[DetectorCore]:
        return [unit.core for unit in self.units]


@dataclass
class NetworkState:
    """Full simulator state.

    ps_modules are the perceptual modules in ascending module id,
    rs_module the label module. couplings lists every (detector, label)
    pair ever bound, in binding order. y_max_fixed, when set, overrides
    the corridor-derived output ceiling of captured detectors.
    """

    ps_modules: list[ModuleState]
    rs_module: ModuleState
    corridor: CorridorParams = field(default_factory=CorridorParams)
    learning: LearningMode = field(default_factory=TeacherMode)
    strict_threshold: bool = False
    y_max_fixed: float | None = None
    cycle: int = 0
    couplings: list[tuple[Address, Address]] = field(default_factory=list)
    trace: list[PresentationStep] = field(default_factory=list)

    def __post_init__(self) -> None:
        ids = [m.module_id for m in self.ps_modules] + [self.rs_module.module_id]
        if len(ids) != len(set(ids)):
            raise ValueError(f"module ids must be unique, got {ids}")

    def find_ps_unit(self, address: Address) -> DetectorUnit:
        for module in self.ps_modules:
            if module.module_id == address.module_id:
                return module.find(address)
        raise KeyError(f"no perceptual module {address.module_id}")

    def is_label(self, address: Address) -> bool:
        return address.module_id == self.rs_module.module_id and any(
            unit.core.own_address == address for unit in self.rs_module.units
        )


def build_network(
    ps_sizes: Sequence[int],
    n_labels: int,
    corridor: CorridorParams | None = None,
    learning: LearningMode | None = None,
    strict_threshold: bool = False,
    y_max_fixed: float | None = None,
) -> NetworkState:
    """Assemble a fresh network.

    Receptors are module 0 by convention; perceptual modules take ids
    1..len(ps_sizes) and the label module the next id. Label units are
    pre-wired identifiers, they never capture.
    """
    if not ps_sizes:
        raise ValueError("at least one perceptual module is required")
    if n_labels < 0:
        raise ValueError(f"n_labels must be non-negative, got {n_labels}")
    ps = [
        ModuleState.empty(RECEPTOR_MODULE_ID + 1 + index, size)
        for index, size in enumerate(ps_sizes)
    ]
    rs_id = RECEPTOR_MODULE_ID + 1 + len(ps)
    rs_units = [
        DetectorUnit(
            core=DetectorCore(own_address=Address(rs_id, unit_id)),
            table=MembershipTable(),
            life=Identifier(),
        )
        for unit_id in range(n_labels)
    ]
    return NetworkState(
        ps_modules=ps,
        rs_module=ModuleState(module_id=rs_id, units=rs_units),
        corridor=corridor if corridor is not None else CorridorParams(),
        learning=learning if learning is not None else TeacherMode(),
        strict_threshold=strict_threshold,
        y_max_fixed=y_max_fixed,
    )


def capture(
    module: ModuleState,
    inputs: SignalVector,
    corridor: CorridorParams,
    mode: LearningMode,
    y_max_fixed: float | None = None,
) -> Address:
    """Hand the input vector to the free detector nearest the command neuron.

    Nearest means smallest unit id. The detector memorizes the input
    address set as both receptive field and concept, seeds its bands and
    counters from this single observation, computes its corridor, and
    becomes an identifier.
    """
    if not inputs:
        raise ValueError("cannot capture an empty input vector")
    unit = next((u for u in module.units if isinstance(u.life, Free)), None)
    if unit is None:
        raise NoFreeDetectorError(f"module {module.module_id} has no free detector")
    addresses = frozenset(inputs)
    bands = {
        address: LevelBand(min=level, opt=level, max=level, count=1)
        for address, level in inputs.items()
    }
    g0, g_star = recompute_thresholds(bands, corridor)
    core = unit.core
    core.receptive_field = addresses
    core.concept = addresses
    core.bands = dict(bands)
    core.g0 = g0
    core.g_star = g_star
    core.y_max = y_max_fixed if y_max_fixed is not None else output_ceiling(bands, g_star)
    core.validate()
    unit.table = MembershipTable(
        mode=mode,
        k_count=1,
        l_counts={address: 1 for address in sorted(addresses)},
        bands={address: bands[address] for address in sorted(addresses)},
    )
    unit.life = Identifier()
    return core.own_address


def bind(net: NetworkState, ps_address: Address, rs_address: Address) -> None:
    """Couple a perceptual detector with a label unit, both directions.

    Binding is idempotent for the same pair. A detector already bound to
    a different label raises AlreadyBoundError: relabeling runs through
    the conflict path of present(), never through bind().
    """
    if not net.is_label(rs_address):
        raise UnknownTeacherError(f"{rs_address} is not a label unit")
    unit = net.find_ps_unit(ps_address)
    if isinstance(unit.life, Bound):
        if unit.life.teacher == rs_address:
            return
        raise AlreadyBoundError(
            f"{ps_address} is bound to {unit.life.teacher}, refusing {rs_address}"
        )
    if isinstance(unit.life, Free):
        raise ValueError(f"cannot bind free detector {ps_address}")
    unit.life = Bound(teacher=rs_address)
    pair = (ps_address, rs_address)
    if pair not in net.couplings:
        net.couplings.append(pair)


def _restrict(inputs: SignalVector, field_: frozenset[Address]) -> SignalVector:
    # a detector only ever sees addresses it has synapses for
    return SignalVector(
        (address, level) for address, level in inputs.items() if address in field_
    )


def _learning_cycle(table: MembershipTable, inputs: SignalVector) -> None:
    if isinstance(table.mode, SelfLearningMode):
        self_update(table, inputs)
    else:
        teacher_update(table, inputs, z_present=True)


def _refresh_corridor(unit: DetectorUnit, net: NetworkState) -> None:
    """Re-extract the concept from the counters and recompute the corridor."""
    concept = extract_concept(unit.table)
    core = unit.core
    core.concept = concept
    core.bands = {address: unit.table.bands[address] for address in sorted(concept)}
    if concept:
        g0, g_star = recompute_thresholds(core.bands, net.corridor)
        core.g0 = g0
        core.g_star = g_star
        if net.y_max_fixed is None:
            core.y_max = output_ceiling(core.bands, g_star)
    core.validate()


def _capture_and_emit(
    net: NetworkState,
    module: ModuleState,
    inputs: SignalVector,
    winners: dict[int, Signal],
    events: list[Event],
) -> Address:
    address = capture(module, inputs, net.corridor, net.learning, net.y_max_fixed)
    events.append(Event(EventKind.CAPTURED, module_id=module.module_id, detector=address))
    unit = module.find(address)
    outcome = detector_step(unit.core, inputs, strict=net.strict_threshold)
    if outcome.fired:
        winners[module.module_id] = Signal(
            address, normalize(outcome.raw_level, unit.core.y_max)
        )
    return address


def present(
    net: NetworkState,
    inputs: SignalVector,
    teacher: Address | None = None,
    learn: bool = True,
) -> PresentationStep:
    """One full presentation cycle.

    Runs every perceptual module, applies the supervision rules, appends
    the resulting step to the trace, and returns it. learn=False keeps
    novelty observable but disables capture, binding, and correction.
    """
    if teacher is not None and not net.is_label(teacher):
        raise UnknownTeacherError(f"{teacher} is not a label unit")
    events: list[Event] = []
    winners: dict[int, Signal] = {}
    if teacher is not None:
        # the teacher fires by instruction, at full level
        winners[net.rs_module.module_id] = Signal(teacher, 1.0)
    if teacher is not None and len(inputs) == 0:
        # associative excitation of a detector by its label alone is not modeled
        events.append(Event(EventKind.ASSOCIATIVE_UNSUPPORTED, teacher=teacher))
        return _finalize(net, winners, events)

    for module in net.ps_modules:
        verdict: ModuleVerdict = module_step(
            [unit.core for unit in module.units], inputs, strict=net.strict_threshold
        )
        if verdict.winner is None:
            if not verdict.novelty:
                continue
            events.append(Event(EventKind.NOVELTY_FIRED, module_id=module.module_id))
            if not learn:
                continue
            address = _capture_and_emit(net, module, inputs, winners, events)
            if teacher is not None:
                bind(net, address, teacher)
                events.append(
                    Event(
                        EventKind.BOUND,
                        module_id=module.module_id,
                        detector=address,
                        teacher=teacher,
                    )
                )
            continue

        winner = verdict.winner
        unit = module.find(winner.address)
        if teacher is None or not learn:
            winners[module.module_id] = winner
            continue

        if isinstance(unit.life, Bound) and unit.life.teacher != teacher:
            # the winner answers to a different label: suppress it and
            # fork a fresh detector for this one
            events.append(
                Event(
                    EventKind.CONFLICT,
                    module_id=module.module_id,
                    detector=winner.address,
                    teacher=teacher,
                )
            )
            address = _capture_and_emit(net, module, inputs, winners, events)
            bind(net, address, teacher)
            events.append(
                Event(
                    EventKind.BOUND,
                    module_id=module.module_id,
                    detector=address,
                    teacher=teacher,
                )
            )
            continue

        winners[module.module_id] = winner
        if isinstance(unit.life, Identifier):
            # coincident firing of an unbound winner and the teacher
            bind(net, winner.address, teacher)
            events.append(
                Event(
                    EventKind.BOUND,
                    module_id=module.module_id,
                    detector=winner.address,
                    teacher=teacher,
                )
            )
            continue
        # bound winner, agreeing teacher: one learning cycle corrects
        # the concept and the corridor moves with it
        _learning_cycle(unit.table, _restrict(inputs, unit.core.receptive_field))
        _refresh_corridor(unit, net)
        events.append(
            Event(
                EventKind.CORRECTED,
                module_id=module.module_id,
                detector=winner.address,
                teacher=teacher,
            )
        )
    return _finalize(net, winners, events)


def _finalize(
    net: NetworkState, winners: dict[int, Signal], events: list[Event]
) -> PresentationStep:
    step = PresentationStep(cycle=net.cycle, winners=winners, events=tuple(events))
    net.trace.append(step)
    net.cycle += 1
    return step


def recall(net: NetworkState, inputs: SignalVector) -> Address | None:
    """Inference: present without teacher or learning, return the label.

    The answer is the label bound to the first bound winner in module
    order, or None when no bound detector won anywhere.
    """
    step = present(net, inputs, teacher=None, learn=False)
    for module in net.ps_modules:
        signal = step.winners.get(module.module_id)
        if signal is None:
            continue
        unit = module.find(signal.address)
        if isinstance(unit.life, Bound):
            return unit.life.teacher
    return None
