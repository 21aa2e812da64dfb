"""Experiment orchestration: configs, pattern sets, traces, checkpoints.

The harness turns files into runs. A config carries every free knob of
the model, a pattern set carries named intensity grids with class
labels, and run_experiment wires both into a network, trains it,
evaluates recall, and reports. Every presentation is mirrored into a
line-delimited JSON trace whose bytes are a pure function of config and
patterns, and the full network state round-trips through a JSON
checkpoint.
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, TextIO

from .detector import LevelBand
from .errors import (
    CheckpointError,
    ConfigError,
    DimensionMismatchError,
    PatternParseError,
)
from .learning import (
    CorridorParams,
    LearningMode,
    MembershipTable,
    SelfLearningMode,
    TeacherMode,
)
from .network import (
    Bound,
    DetectorCore,
    DetectorUnit,
    Event,
    EventKind,
    Free,
    Identifier,
    Lifecycle,
    ModuleState,
    NetworkState,
    PresentationStep,
    build_network,
    present,
    recall,
)
from .signals import Address, Signal, SignalVector

CHECKPOINT_FORMAT = 1

_MODES = ("train", "recall", "inspect")
_LEARNING_KINDS = ("teacher", "self")
_Y_MAX_POLICIES = ("corridor", "fixed")


@dataclass
class ExperimentConfig:
    """Every free parameter of a run.

    theta scales optimal-level sums into thresholds; delta loosens
    teacher membership; c and q shape self-learning membership;
    epsilon_level floors the threshold. module_sizes fixes the detector
    capacity of each perceptual module. Shuffling is off by default and,
    when on, draws only from the seeded generator.
    """

    seed: int = 0
    theta: float = 0.9
    delta: float = 0.0
    c: float = 0.5
    q: float = 0.7
    epsilon_level: float = 1e-9
    learning: str = "teacher"
    strict_gt: bool = False
    y_max_policy: str = "corridor"
    y_max_fixed: float = 1.0
    module_sizes: tuple[int, ...] = (64,)
    epochs: int = 1
    mode: str = "train"
    shuffle: bool = False

    def __post_init__(self) -> None:
        if isinstance(self.module_sizes, list):
            self.module_sizes = tuple(self.module_sizes)
        self.validate()

    def validate(self) -> None:
        if not 0.0 < self.theta <= 1.0:
            raise ConfigError(f"theta must lie in (0, 1], got {self.theta}")
        if not 0.0 <= self.delta < 1.0:
            raise ConfigError(f"delta must lie in [0, 1), got {self.delta}")
        if not 0.0 < self.c < 1.0:
            raise ConfigError(f"c must lie in (0, 1), got {self.c}")
        if not 0.0 < self.q < 1.0:
            raise ConfigError(f"q must lie in (0, 1), got {self.q}")
        if self.epsilon_level <= 0.0:
            raise ConfigError(f"epsilon_level must be positive, got {self.epsilon_level}")
        if self.learning not in _LEARNING_KINDS:
            raise ConfigError(f"learning must be one of {_LEARNING_KINDS}, got {self.learning!r}")
        if self.y_max_policy not in _Y_MAX_POLICIES:
            raise ConfigError(
                f"y_max_policy must be one of {_Y_MAX_POLICIES}, got {self.y_max_policy!r}"
            )
        if self.y_max_fixed <= 0.0:
            raise ConfigError(f"y_max_fixed must be positive, got {self.y_max_fixed}")
        if not self.module_sizes or any(s < 1 for s in self.module_sizes):
            raise ConfigError(f"module_sizes must be positive, got {self.module_sizes}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be at least 1, got {self.epochs}")
        if self.mode not in _MODES:
            raise ConfigError(f"mode must be one of {_MODES}, got {self.mode!r}")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["module_sizes"] = list(self.module_sizes)
        return data

    def corridor(self) -> CorridorParams:
        return CorridorParams(theta=self.theta, epsilon_level=self.epsilon_level)

    def learning_mode(self) -> LearningMode:
        if self.learning == "self":
            return SelfLearningMode(c=self.c, q=self.q)
        return TeacherMode(delta=self.delta)


@dataclass
class PatternSet:
    """Named intensity grids plus their class labels.

    All grids share one rows x cols shape. Pixel (r, c) with a positive
    intensity becomes a receptor signal at Address(0, r * cols + c).
    """

    names: list[str]
    grids: dict[str, list[list[float]]]
    labels: dict[str, str]
    rows: int
    cols: int

    def vector(self, name: str) -> SignalVector:
        grid = self.grids[name]
        pairs = []
        for r, row in enumerate(grid):
            for c, value in enumerate(row):
                if value > 0.0:
                    pairs.append((Address(0, r * self.cols + c), value))
        return SignalVector(pairs)

    def label_names(self) -> list[str]:
        return sorted(set(self.labels.values()))


def _parse_grid(name: str, entry: dict[str, Any], where: str) -> list[list[float]]:
    if "rows" in entry:
        rows = entry["rows"]
        if not isinstance(rows, list) or not all(isinstance(r, str) for r in rows):
            raise PatternParseError(f"{where}: 'rows' must be a list of strings")
        glyph = []
        for r, line in enumerate(rows):
            parsed = []
            for c, ch in enumerate(line):
                if ch == "#":
                    parsed.append(1.0)
                elif ch in (".", " "):
                    parsed.append(0.0)
                else:
                    raise PatternParseError(
                        f"{where}: row {r} has unknown glyph character {ch!r}"
                    )
            glyph.append(parsed)
        return glyph
    if "grid" in entry:
        grid = entry["grid"]
        if not isinstance(grid, list) or not all(isinstance(r, list) for r in grid):
            raise PatternParseError(f"{where}: 'grid' must be a list of lists")
        parsed = []
        for r, row in enumerate(grid):
            line = []
            for c, value in enumerate(row):
                if not isinstance(value, (int, float)) or isinstance(value, bool):
                    raise PatternParseError(f"{where}: cell ({r}, {c}) is not a number")
                value = float(value)
                if not 0.0 <= value <= 1.0:
                    raise PatternParseError(
                        f"{where}: cell ({r}, {c}) intensity {value} outside [0, 1]"
                    )
                line.append(value)
            parsed.append(line)
        return parsed
    raise PatternParseError(f"{where}: pattern needs either 'rows' or 'grid'")


def load_patterns(path: str | Path) -> PatternSet:
    """Read a pattern file: {"patterns": [{name, label, rows|grid}, ...]}.

    rows spell the glyph with '#' for 1.0 and '.' or ' ' for 0.0; grid
    gives explicit intensities in [0, 1]. Every grid must have the same
    shape and no grid may be ragged.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise PatternParseError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or not isinstance(data.get("patterns"), list):
        raise PatternParseError(f"{path}: expected an object with a 'patterns' list")
    entries = data["patterns"]
    if not entries:
        raise PatternParseError(f"{path}: 'patterns' is empty")
    names: list[str] = []
    grids: dict[str, list[list[float]]] = {}
    labels: dict[str, str] = {}
    rows = cols = -1
    for index, entry in enumerate(entries):
        where = f"{path}: pattern {index}"
        if not isinstance(entry, dict):
            raise PatternParseError(f"{where}: must be an object")
        name = entry.get("name")
        if not isinstance(name, str) or not name:
            raise PatternParseError(f"{where}: missing or empty 'name'")
        where = f"{path}: pattern {index} ({name!r})"
        if name in grids:
            raise PatternParseError(f"{where}: duplicate pattern name")
        label = entry.get("label", name)
        if not isinstance(label, str) or not label:
            raise PatternParseError(f"{where}: 'label' must be a non-empty string")
        grid = _parse_grid(name, entry, where)
        if not grid or not grid[0]:
            raise PatternParseError(f"{where}: grid is empty")
        widths = {len(row) for row in grid}
        if len(widths) != 1:
            raise DimensionMismatchError(f"{where}: ragged grid, row widths {sorted(widths)}")
        if rows == -1:
            rows, cols = len(grid), len(grid[0])
        elif (len(grid), len(grid[0])) != (rows, cols):
            raise DimensionMismatchError(
                f"{where}: shape {len(grid)}x{len(grid[0])} differs from {rows}x{cols}"
            )
        names.append(name)
        grids[name] = grid
        labels[name] = label
    return PatternSet(names=names, grids=grids, labels=labels, rows=rows, cols=cols)


# --- trace records ---------------------------------------------------------


def _address_json(address: Address | None) -> list[int] | None:
    if address is None:
        return None
    return [address.module_id, address.unit_id]


def step_record(step: PresentationStep, **context: Any) -> dict[str, Any]:
    """Flatten one presentation step into a JSON-ready dict.

    Extra context keys (phase, epoch, pattern, teacher label, predicted
    label) are merged in so a report is recomputable from the trace
    alone.
    """
    record: dict[str, Any] = {
        "cycle": step.cycle,
        "winners": {
            str(module_id): {
                "address": _address_json(signal.address),
                "level": signal.level,
            }
            for module_id, signal in step.winners.items()
        },
        "events": [
            {
                "kind": event.kind.value,
                "module": event.module_id,
                "detector": _address_json(event.detector),
                "teacher": _address_json(event.teacher),
            }
            for event in step.events
        ],
    }
    record.update(context)
    return record


def trace_line(record: dict[str, Any]) -> str:
    """Canonical byte form of one trace record: sorted keys, no spaces."""
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def emit_trace(records: list[dict[str, Any]], stream: TextIO) -> None:
    """Write records as line-delimited JSON in canonical form."""
    for record in records:
        stream.write(trace_line(record) + "\n")


# --- training and evaluation ----------------------------------------------


def _epoch_order(names: list[str], config: ExperimentConfig, epoch: int) -> list[str]:
    order = list(names)
    if config.shuffle:
        # a per-epoch generator keeps the order a pure function of
        # (seed, epoch), so a resumed run shuffles identically
        random.Random(f"{config.seed}:{epoch}").shuffle(order)
    return order


def build_from_config(
    config: ExperimentConfig, patterns: PatternSet
) -> tuple[NetworkState, dict[str, Address]]:
    """A fresh network sized for the config plus the label address map."""
    label_names = patterns.label_names()
    net = build_network(
        ps_sizes=config.module_sizes,
        n_labels=len(label_names),
        corridor=config.corridor(),
        learning=config.learning_mode(),
        strict_threshold=config.strict_gt,
        y_max_fixed=config.y_max_fixed if config.y_max_policy == "fixed" else None,
    )
    rs_id = net.rs_module.module_id
    label_map = {name: Address(rs_id, index) for index, name in enumerate(label_names)}
    return net, label_map


def train_epochs(
    net: NetworkState,
    patterns: PatternSet,
    label_map: dict[str, Address],
    config: ExperimentConfig,
    records: list[dict[str, Any]],
    start_epoch: int = 0,
    epochs: int | None = None,
) -> None:
    """Present every pattern with its teacher for the requested epochs.

    Epoch numbering is absolute so a run resumed from a checkpoint at
    start_epoch produces the same records as an uninterrupted one.
    """
    end_epoch = start_epoch + (config.epochs if epochs is None else epochs)
    for epoch in range(start_epoch, end_epoch):
        for name in _epoch_order(patterns.names, config, epoch):
            teacher = label_map[patterns.labels[name]]
            step = present(net, patterns.vector(name), teacher=teacher, learn=True)
            records.append(
                step_record(
                    step,
                    phase="train",
                    epoch=epoch,
                    pattern=name,
                    teacher=patterns.labels[name],
                )
            )


def evaluate_recall(
    net: NetworkState,
    patterns: PatternSet,
    label_map: dict[str, Address],
    records: list[dict[str, Any]],
) -> dict[str, str | None]:
    """Recall every pattern once, in file order; returns name -> label."""
    by_address = {address: name for name, address in label_map.items()}
    results: dict[str, str | None] = {}
    for name in patterns.names:
        answer = recall(net, patterns.vector(name))
        predicted = by_address.get(answer) if answer is not None else None
        results[name] = predicted
        step = net.trace[-1]
        records.append(
            step_record(
                step,
                phase="recall",
                pattern=name,
                expected=patterns.labels[name],
                predicted=predicted,
            )
        )
    return results


# --- report ----------------------------------------------------------------


@dataclass
class Report:
    """Summary of one run; every number here is recomputable from the trace."""

    patterns: int
    epochs: int
    captures: int
    conflicts: int
    corrections: int
    novelty_events: int
    unsupported: int
    per_class: dict[str, dict[str, int]]
    accuracy: float | None
    detectors: list[dict[str, Any]]

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def describe_detectors(
    net: NetworkState, label_map: dict[str, Address]
) -> list[dict[str, Any]]:
    """State table of every non-free detector, in address order."""
    by_address = {address: name for name, address in label_map.items()}
    out = []
    for module in net.ps_modules:
        for unit in module.units:
            if isinstance(unit.life, Free):
                continue
            life = unit.life
            out.append(
                {
                    "address": _address_json(unit.core.own_address),
                    "state": "bound" if isinstance(life, Bound) else "identifier",
                    "label": by_address.get(life.teacher) if isinstance(life, Bound) else None,
                    "concept_size": len(unit.core.concept),
                    "field_size": len(unit.core.receptive_field),
                    "g0": unit.core.g0,
                    "g_star": unit.core.g_star,
                    "y_max": unit.core.y_max,
                    "cycles": unit.table.k_count,
                }
            )
    return out


def summarize(
    net: NetworkState,
    patterns: PatternSet,
    label_map: dict[str, Address],
    config: ExperimentConfig,
    records: list[dict[str, Any]],
) -> Report:
    """Count events and recall hits out of the trace records."""
    counts = {kind.value: 0 for kind in EventKind}
    for record in records:
        for event in record["events"]:
            counts[event["kind"]] += 1
    per_class: dict[str, dict[str, int]] = {
        label: {"hits": 0, "total": 0} for label in patterns.label_names()
    }
    scored = 0
    hits = 0
    for record in records:
        if record.get("phase") != "recall":
            continue
        expected = record["expected"]
        per_class[expected]["total"] += 1
        scored += 1
        if record["predicted"] == expected:
            per_class[expected]["hits"] += 1
            hits += 1
    return Report(
        patterns=len(patterns.names),
        epochs=config.epochs if config.mode == "train" else 0,
        captures=counts[EventKind.CAPTURED.value],
        conflicts=counts[EventKind.CONFLICT.value],
        corrections=counts[EventKind.CORRECTED.value],
        novelty_events=counts[EventKind.NOVELTY_FIRED.value],
        unsupported=counts[EventKind.ASSOCIATIVE_UNSUPPORTED.value],
        per_class=per_class,
        accuracy=(hits / scored) if scored else None,
        detectors=describe_detectors(net, label_map),
    )


def run_experiment(
    config: ExperimentConfig,
    patterns: PatternSet,
    trace_path: str | Path | None = None,
    checkpoint_path: str | Path | None = None,
    net: NetworkState | None = None,
    label_map: dict[str, Address] | None = None,
) -> Report:
    """Train (unless mode is recall), evaluate recall, report.

    A pre-built network (for instance one loaded from a checkpoint) can
    be passed in; otherwise a fresh one is built from the config.
    """
    if net is None or label_map is None:
        net, label_map = build_from_config(config, patterns)
    records: list[dict[str, Any]] = []
    if config.mode == "train":
        train_epochs(net, patterns, label_map, config, records)
    evaluate_recall(net, patterns, label_map, records)
    report = summarize(net, patterns, label_map, config, records)
    if trace_path is not None:
        with open(trace_path, "w") as stream:
            emit_trace(records, stream)
    if checkpoint_path is not None:
        meta = {
            "config": config.to_dict(),
            "labels": {name: _address_json(a) for name, a in label_map.items()},
            "epochs_done": config.epochs if config.mode == "train" else 0,
        }
        save_checkpoint(net, checkpoint_path, meta=meta)
    return report


# --- checkpointing ----------------------------------------------------------


def _band_json(band: LevelBand) -> list[Any]:
    return [band.min, band.opt, band.max, band.count]


def _band_from(data: list[Any]) -> LevelBand:
    return LevelBand(min=data[0], opt=data[1], max=data[2], count=data[3])


def _mode_json(mode: LearningMode) -> dict[str, Any]:
    if isinstance(mode, SelfLearningMode):
        return {"kind": "self", "c": mode.c, "q": mode.q}
    return {"kind": "teacher", "delta": mode.delta}


def _mode_from(data: dict[str, Any]) -> LearningMode:
    if data["kind"] == "self":
        return SelfLearningMode(c=data["c"], q=data["q"])
    return TeacherMode(delta=data["delta"])


def _life_json(life: Lifecycle) -> dict[str, Any]:
    if isinstance(life, Bound):
        return {"state": "bound", "teacher": _address_json(life.teacher)}
    if isinstance(life, Identifier):
        return {"state": "identifier"}
    return {"state": "free"}


def _life_from(data: dict[str, Any]) -> Lifecycle:
    state = data["state"]
    if state == "bound":
        return Bound(teacher=Address(*data["teacher"]))
    if state == "identifier":
        return Identifier()
    if state == "free":
        return Free()
    raise CheckpointError(f"unknown lifecycle state {state!r}")


def _unit_json(unit: DetectorUnit) -> dict[str, Any]:
    core = unit.core
    table = unit.table
    return {
        "address": _address_json(core.own_address),
        "field": [_address_json(a) for a in sorted(core.receptive_field)],
        "concept": [_address_json(a) for a in sorted(core.concept)],
        "bands": {str(a): _band_json(core.bands[a]) for a in sorted(core.bands)},
        "g0": core.g0,
        "g_star": core.g_star,
        "y_max": core.y_max,
        "mode": _mode_json(table.mode),
        "k": table.k_count,
        "l": {str(a): table.l_counts[a] for a in sorted(table.l_counts)},
        "table_bands": {str(a): _band_json(table.bands[a]) for a in sorted(table.bands)},
        "life": _life_json(unit.life),
    }


def _address_from_key(key: str) -> Address:
    module_id, unit_id = key.split("/")
    return Address(int(module_id), int(unit_id))


def _unit_from(data: dict[str, Any]) -> DetectorUnit:
    core = DetectorCore(
        own_address=Address(*data["address"]),
        receptive_field=frozenset(Address(*a) for a in data["field"]),
        concept=frozenset(Address(*a) for a in data["concept"]),
        bands={_address_from_key(k): _band_from(v) for k, v in data["bands"].items()},
        g0=data["g0"],
        g_star=data["g_star"],
        y_max=data["y_max"],
    )
    table = MembershipTable(
        mode=_mode_from(data["mode"]),
        k_count=data["k"],
        l_counts={_address_from_key(k): v for k, v in data["l"].items()},
        bands={_address_from_key(k): _band_from(v) for k, v in data["table_bands"].items()},
    )
    return DetectorUnit(core=core, table=table, life=_life_from(data["life"]))


def _module_json(module: ModuleState) -> dict[str, Any]:
    return {
        "module_id": module.module_id,
        "units": [_unit_json(unit) for unit in module.units],
    }


def _module_from(data: dict[str, Any]) -> ModuleState:
    return ModuleState(
        module_id=data["module_id"],
        units=[_unit_from(u) for u in data["units"]],
    )


def _event_json(event: Event) -> dict[str, Any]:
    return {
        "kind": event.kind.value,
        "module": event.module_id,
        "detector": _address_json(event.detector),
        "teacher": _address_json(event.teacher),
    }


def _event_from(data: dict[str, Any]) -> Event:
    return Event(
        kind=EventKind(data["kind"]),
        module_id=data["module"],
        detector=Address(*data["detector"]) if data["detector"] else None,
        teacher=Address(*data["teacher"]) if data["teacher"] else None,
    )


def _step_json(step: PresentationStep) -> dict[str, Any]:
    return {
        "cycle": step.cycle,
        "winners": {
            str(module_id): [_address_json(s.address), s.level]
            for module_id, s in step.winners.items()
        },
        "events": [_event_json(e) for e in step.events],
    }


def _step_from(data: dict[str, Any]) -> PresentationStep:
    return PresentationStep(
        cycle=data["cycle"],
        winners={
            int(module_id): Signal(Address(*value[0]), value[1])
            for module_id, value in data["winners"].items()
        },
        events=tuple(_event_from(e) for e in data["events"]),
    )


def network_json(net: NetworkState) -> dict[str, Any]:
    """Full network state as a JSON-ready dict."""
    return {
        "format": CHECKPOINT_FORMAT,
        "corridor": {"theta": net.corridor.theta, "epsilon_level": net.corridor.epsilon_level},
        "learning": _mode_json(net.learning),
        "strict_threshold": net.strict_threshold,
        "y_max_fixed": net.y_max_fixed,
        "cycle": net.cycle,
        "ps_modules": [_module_json(m) for m in net.ps_modules],
        "rs_module": _module_json(net.rs_module),
        "couplings": [[_address_json(a), _address_json(b)] for a, b in net.couplings],
        "trace": [_step_json(s) for s in net.trace],
    }


def network_from_json(data: dict[str, Any]) -> NetworkState:
    """Rebuild a network from its JSON dict; inverse of network_json."""
    if data.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError(f"unsupported checkpoint format {data.get('format')!r}")
    try:
        return NetworkState(
            ps_modules=[_module_from(m) for m in data["ps_modules"]],
            rs_module=_module_from(data["rs_module"]),
            corridor=CorridorParams(**data["corridor"]),
            learning=_mode_from(data["learning"]),
            strict_threshold=data["strict_threshold"],
            y_max_fixed=data["y_max_fixed"],
            cycle=data["cycle"],
            couplings=[
                (Address(*a), Address(*b)) for a, b in data["couplings"]
            ],
            trace=[_step_from(s) for s in data["trace"]],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"malformed checkpoint: {exc}") from exc


def save_checkpoint(
    net: NetworkState, path: str | Path, meta: dict[str, Any] | None = None
) -> None:
    """Write the network (and optional run metadata) as JSON."""
    payload = network_json(net)
    if meta is not None:
        payload["meta"] = meta
    Path(path).write_text(json.dumps(payload, sort_keys=True, separators=(",", ":")))


def load_checkpoint(path: str | Path) -> tuple[NetworkState, dict[str, Any]]:
    """Read a checkpoint back; returns (network, metadata)."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise CheckpointError(f"{path}: checkpoint must be a JSON object")
    net = network_from_json(data)
    return net, data.get("meta", {})


def labels_from_meta(meta: dict[str, Any]) -> dict[str, Address]:
    """Label name to address map stored by run_experiment's checkpoint."""
    labels = meta.get("labels", {})
    return {name: Address(*value) for name, value in labels.items()}
