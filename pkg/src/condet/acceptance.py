"""Acceptance criteria.

Ten self-contained checks covering the whole pipeline, each a pure
function that returns a one-line detail string on success and raises
AssertionError on failure. The CLI selftest verb and the test suite
both run this registry, printing one pass/fail line per criterion.
Every criterion is deterministic: all randomness comes from fixed
seeds.
"""

from __future__ import annotations

import random
import sys
import tempfile
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path
from typing import TextIO

from .competition import compete, module_step
from .detector import (
    EXCITATION_THRESHOLD_MV,
    RESTING_POTENTIAL_MV,
    DetectorCore,
    LevelBand,
    OutcomeKind,
    check_excitation,
    detector_step,
)
from .errors import ConfigError, NoFreeDetectorError
from .harness import (
    ExperimentConfig,
    PatternSet,
    build_from_config,
    evaluate_recall,
    load_checkpoint,
    save_checkpoint,
    summarize,
    trace_line,
    train_epochs,
    run_experiment,
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
    teacher_update,
    update_band,
)
from .network import (
    Bound,
    EventKind,
    ModuleState,
    build_network,
    capture,
    present,
)
from .signals import Address, SignalVector, build_vector

import math


def _receptor(unit_id: int) -> Address:
    return Address(0, unit_id)


def criterion_1_concept_intersection() -> str:
    """Teacher-mode training recovers exactly the shared address core."""
    rng = random.Random(101)
    trials = 100
    for trial in range(trials):
        pool = list(range(40))
        core = set(rng.sample(pool, 10))
        noise_pool = [u for u in pool if u not in core]
        noise = rng.sample(noise_pool, rng.randint(3, 8))
        # every noise address misses at least one of the 20 cycles
        present_cycles = {
            n: set(rng.sample(range(20), rng.randint(1, 19))) for n in noise
        }
        log: list[frozenset[int]] = []
        table = MembershipTable(mode=TeacherMode(delta=0.0))
        for cycle in range(20):
            members = core | {n for n in noise if cycle in present_cycles[n]}
            log.append(frozenset(members))
            inputs = build_vector(
                [(_receptor(u), rng.uniform(0.2, 1.0)) for u in sorted(members)]
            )
            teacher_update(table, inputs, z_present=True)
        oracle = frozenset.intersection(*log)
        extracted = {address.unit_id for address in extract_concept(table)}
        assert oracle == frozenset(core), f"trial {trial}: oracle drifted from core"
        assert extracted == core, f"trial {trial}: extracted {extracted} != core"
    return f"{trials}/{trials} trials recovered the 10-address core exactly"


def criterion_2_self_learning_boundary() -> str:
    """The power-curve membership boundary at l/k = 0.49 is ulp-exact."""
    mode = SelfLearningMode(c=0.5, q=0.7)
    at_boundary = MembershipTable(mode=mode, k_count=100, l_counts={_receptor(1): 49})
    w49, in49 = membership(at_boundary, _receptor(1))
    below = MembershipTable(mode=mode, k_count=100, l_counts={_receptor(1): 48})
    w48, in48 = membership(below, _receptor(1))
    assert abs(w49 - 0.7) <= math.ulp(0.7), f"w(49/100) = {w49!r} not 0.7 within 1 ulp"
    assert in49, "49/100 must be in-concept at q = 0.7"
    assert w48 < 0.7, f"w(48/100) = {w48!r} not below 0.7"
    assert not in48, "48/100 must be out of concept at q = 0.7"
    return f"w(49/100) = {w49!r} in-concept, w(48/100) = {w48:.6f} out"


def _random_captured_detector(rng: random.Random) -> DetectorCore:
    """A detector shaped like capture + one higher-level learning cycle.

    First observation in [0.3, 0.6] fixes the band minima, a second in
    [0.8, 1.0] lifts the means; this keeps theta * sum(opt) >= sum(min)
    and g_star <= 2 * sum(min), the regime where the corridor equality
    g0 + sum(min) = g_star is float-exact.
    """
    size = rng.randint(2, 12)
    bands: dict[Address, LevelBand] = {}
    for unit in range(size):
        low = rng.uniform(0.3, 0.6)
        high = rng.uniform(0.8, 1.0)
        bands[_receptor(unit)] = update_band(update_band(None, low), high)
    g0, g_star = recompute_thresholds(bands, CorridorParams(theta=0.9))
    addresses = frozenset(bands)
    return DetectorCore(
        own_address=Address(1, 0),
        receptive_field=addresses,
        concept=addresses,
        bands=bands,
        g0=g0,
        g_star=g_star,
        y_max=output_ceiling(bands, g_star),
    )


def criterion_3_corridor() -> str:
    """Opt levels fire, min levels fire via g0 support, any gap does not."""
    rng = random.Random(303)
    detectors = 1000
    drop_checks = 0
    for index in range(detectors):
        det = _random_captured_detector(rng)
        opt_inputs = build_vector(
            [(address, band.opt) for address, band in det.bands.items()]
        )
        assert detector_step(det, opt_inputs).fired, f"detector {index}: opt did not fire"
        min_pairs = [(address, band.min) for address, band in sorted(det.bands.items())]
        min_inputs = build_vector(min_pairs)
        assert detector_step(det, min_inputs).fired, f"detector {index}: min did not fire"
        for dropped, _ in min_pairs:
            partial = build_vector(
                [(address, level) for address, level in min_pairs if address != dropped]
            )
            outcome = detector_step(det, partial)
            assert not outcome.fired, f"detector {index}: fired without {dropped}"
            assert outcome.kind is OutcomeKind.SUB_THRESHOLD
            drop_checks += 1
    return f"{detectors} detectors: opt fired, min fired, {drop_checks} dropped-address checks stayed silent"


def criterion_4_output_identity() -> str:
    """raw - g'' - g' - g0 is exactly zero for every fired outcome.

    Levels and thresholds are drawn from a power-of-two grid, so every
    sum in the pipeline is exact and the identity must hold bitwise.
    """
    rng = random.Random(404)

    def grid_level() -> float:
        return rng.randrange(1, 1025) / 1024.0

    steps = 10_000
    fired_count = 0
    for step in range(steps):
        field_ids = rng.sample(range(24), rng.randint(1, 10))
        concept_ids = rng.sample(field_ids, rng.randint(1, len(field_ids)))
        bands = {_receptor(u): LevelBand(*(lambda v: (v, v, v))(grid_level())) for u in concept_ids}
        g0 = rng.randrange(0, 1025) / 1024.0
        concept = frozenset(_receptor(u) for u in concept_ids)
        field = frozenset(_receptor(u) for u in field_ids)
        if rng.random() < 0.5:
            # aim for a fired outcome: threshold below the concept sum
            total = g0
            for u in sorted(concept_ids):
                total += bands[_receptor(u)].opt
            g_star = max(total * rng.randrange(1, 17) / 16.0, 1 / 1024.0)
            entries = {u: bands[_receptor(u)].opt for u in concept_ids}
        else:
            g_star = rng.randrange(1, 2049) / 1024.0
            entries = {
                u: grid_level()
                for u in rng.sample(field_ids, rng.randint(0, len(field_ids)))
            }
        for u in range(24, 28):
            if rng.random() < 0.25:
                entries[u] = grid_level()
        det = DetectorCore(
            own_address=Address(1, 0),
            receptive_field=field,
            concept=concept,
            bands=bands,
            g0=g0,
            g_star=g_star,
            y_max=4096.0,
        )
        inputs = build_vector([(_receptor(u), lvl) for u, lvl in entries.items()])
        outcome = detector_step(det, inputs)
        if not outcome.fired:
            continue
        fired_count += 1
        g_prime = 0.0
        g_dprime = 0.0
        for address, level in sorted(inputs.items()):
            if address in concept:
                g_prime += level
            elif address in field:
                g_dprime += level
        residual = outcome.raw_level - g_dprime - g_prime - g0
        assert residual == 0.0, f"step {step}: residual {residual!r}"
        dg = g0 + g_prime
        assert outcome.raw_level == dg + g_dprime, (
            f"step {step}: raw level is not the threshold part plus g''"
        )
    assert fired_count >= 2000, f"only {fired_count} fired outcomes in the fuzz run"
    return f"{fired_count} fired outcomes out of {steps} steps, residual exactly 0.0 in all"


def criterion_5_alpha_competition() -> str:
    """One winner per step; superset concepts win; scaling never flips."""
    rng = random.Random(505)
    corridor = CorridorParams()

    module = ModuleState.empty(1, 6)
    for _ in range(6):
        members = rng.sample(range(12), rng.randint(1, 4))
        inputs = build_vector(
            [(_receptor(u), rng.uniform(0.3, 1.0)) for u in sorted(members)]
        )
        capture(module, inputs, corridor, TeacherMode())
    cores = module.cores()
    steps = 10_000
    for step in range(steps):
        chosen = cores[rng.randrange(6)]
        entries = {address: band.opt for address, band in chosen.bands.items()}
        if rng.random() < 0.4:
            extra = _receptor(rng.randrange(12))
            entries.setdefault(extra, rng.uniform(0.3, 1.0))
        inputs = build_vector(sorted(entries.items()))
        verdict = module_step(cores, inputs)
        outcomes = {core.own_address: detector_step(core, inputs) for core in cores}
        fired = {a: o.raw_level for a, o in outcomes.items() if o.fired}
        assert verdict.winner is not None, f"step {step}: no winner"
        best = max(fired.values())
        expected = min(a for a, lvl in fired.items() if lvl == best)
        assert verdict.winner.address == expected, f"step {step}: wrong winner"
        assert verdict.pre_excited == set(fired) - {expected}, f"step {step}: wrong losers"

    pairs = 100
    for pair in range(pairs):
        big = rng.sample(range(20), rng.randint(2, 8))
        small = rng.sample(big, rng.randint(1, len(big) - 1))
        levels = {u: rng.uniform(0.3, 1.0) for u in big}
        pair_module = ModuleState.empty(1, 2)
        capture(
            pair_module,
            build_vector([(_receptor(u), levels[u]) for u in sorted(small)]),
            corridor,
            TeacherMode(),
        )
        capture(
            pair_module,
            build_vector([(_receptor(u), levels[u]) for u in sorted(big)]),
            corridor,
            TeacherMode(),
        )
        inputs = build_vector([(_receptor(u), levels[u]) for u in sorted(big)])
        verdict = module_step(pair_module.cores(), inputs)
        assert verdict.winner is not None
        assert verdict.winner.address == Address(1, 1), f"pair {pair}: subset won"

    scale_checks = 0
    for _ in range(100):
        while True:
            levels = [rng.uniform(0.1, 10.0) for _ in range(rng.randint(1, 8))]
            gaps = [
                abs(x - y) for i, x in enumerate(levels) for y in levels[i + 1 :]
            ]
            if all(gap > 1e-6 for gap in gaps):
                break
        fired = [(Address(1, u), lvl) for u, lvl in enumerate(levels)]
        baseline = compete(fired)[0]
        for factor in (0.125, 0.5, 2.0, 8.0, 3.7, 41.0):
            scaled = [(address, lvl * factor) for address, lvl in fired]
            assert compete(scaled)[0] == baseline, f"factor {factor} moved the winner"
            scale_checks += 1
    return (
        f"{steps} steps single-winner, {pairs} superset pairs won, "
        f"{scale_checks} scaling checks stable"
    )


def _glyph_vector(index: int, *, on_level: float = 1.0) -> SignalVector:
    """Glyph index occupies its own 25-address tile; about 17 pixels on."""
    pairs = []
    for r in range(5):
        for c in range(5):
            if (r * 5 + c + index) % 3 != 0:
                pairs.append((_receptor(index * 25 + r * 5 + c), on_level))
    return build_vector(pairs)


def criterion_6_novelty_capture() -> str:
    """26 disjoint glyphs: 26 captures on first sight, none on replay."""
    net = build_network([26], 0)
    glyphs = [_glyph_vector(i) for i in range(26)]
    for glyph in glyphs:
        present(net, glyph)
    first_pass = [e.kind for step in net.trace for e in step.events]
    captured = first_pass.count(EventKind.CAPTURED)
    assert captured == 26, f"{captured} captures on first stream"
    start = len(net.trace)
    for glyph in glyphs:
        step = present(net, glyph)
        assert step.winners, "replayed glyph did not excite its identifier"
    replay = [e.kind for step in net.trace[start:] for e in step.events]
    assert replay.count(EventKind.CAPTURED) == 0, "replay captured again"
    assert replay.count(EventKind.NOVELTY_FIRED) == 0, "replay still counted as novel"
    return "26 captures on first stream, 0 on replay, every replayed glyph won"


def _tiled_patterns(n_classes: int) -> PatternSet:
    """n glyph classes on one shared grid, mutually pixel-disjoint."""
    cols = 5 * n_classes
    names = []
    grids = {}
    labels = {}
    for index in range(n_classes):
        grid = [[0.0] * cols for _ in range(5)]
        for r in range(5):
            for c in range(5):
                if (r * 5 + c + index) % 3 != 0:
                    grid[r][5 * index + c] = 1.0
        name = f"g{index}"
        names.append(name)
        grids[name] = grid
        labels[name] = f"L{index}"
    return PatternSet(names=names, grids=grids, labels=labels, rows=5, cols=cols)


def criterion_7_end_to_end() -> str:
    """10 labeled classes train to perfect recall; a relabel forks once."""
    patterns = _tiled_patterns(10)
    config = ExperimentConfig(epochs=5, module_sizes=(16,))
    net, label_map = build_from_config(config, patterns)
    records: list = []
    train_epochs(net, patterns, label_map, config, records)
    results = evaluate_recall(net, patterns, label_map, records)
    wrong = {n: r for n, r in results.items() if r != patterns.labels[n]}
    assert not wrong, f"recall errors: {wrong}"
    bound = [
        u
        for u in net.ps_modules[0].units
        if isinstance(u.life, Bound)
    ]
    assert len(bound) == 10, f"{len(bound)} bound detectors after training"

    original = net.find_ps_unit(Address(1, 0))
    original_binding = original.life
    step = present(net, patterns.vector("g0"), teacher=label_map["L1"])
    kinds = [event.kind for event in step.events]
    assert kinds == [EventKind.CONFLICT, EventKind.CAPTURED, EventKind.BOUND], kinds
    assert original.life == original_binding, "conflict disturbed the original binding"
    forked = net.find_ps_unit(Address(1, 10))
    assert forked.life == Bound(label_map["L1"]), "fork not bound to the new label"
    assert forked.core.concept == patterns.vector("g0").addresses
    return "10/10 recall after 5 epochs; relabel produced exactly one conflict and one fork"


def criterion_8_boundedness() -> str:
    """A 5-layer chain never emits a level outside [0, 1]."""
    rng = random.Random(808)
    corridor = CorridorParams()
    layers = [ModuleState.empty(layer + 1, 32) for layer in range(5)]
    steps = 10_000
    emissions = 0
    clamped = 0
    emitting_layers: set[int] = set()
    for _ in range(steps):
        members = rng.sample(range(5), rng.randint(1, 5))
        x = build_vector(
            [(_receptor(u), rng.uniform(0.5, 1.0)) for u in sorted(members)]
        )
        for module in layers:
            if not x:
                break
            verdict = module_step(module.cores(), x)
            if verdict.winner is None and verdict.novelty:
                try:
                    capture(module, x, corridor, TeacherMode())
                except NoFreeDetectorError:
                    pass
                else:
                    verdict = module_step(module.cores(), x)
            if verdict.winner is None:
                x = build_vector([])
                continue
            level = verdict.winner.level
            assert 0.0 <= level <= 1.0, f"emitted level {level!r} escaped [0, 1]"
            emissions += 1
            clamped += level == 1.0
            emitting_layers.add(module.module_id)
            x = build_vector([(verdict.winner.address, level)])
    assert emissions >= 5000, f"only {emissions} emissions over the run"
    assert len(emitting_layers) >= 3, f"only layers {sorted(emitting_layers)} ever emitted"
    return (
        f"{emissions} emissions across {len(emitting_layers)} layers stayed in [0, 1] "
        f"({clamped} at the ceiling)"
    )


def criterion_9_millivolt_preset() -> str:
    """The motoneuron figures reproduce the 20-40 presynaptic envelope."""
    base = RESTING_POTENTIAL_MV
    threshold = EXCITATION_THRESHOLD_MV
    assert check_excitation(base, 20 * 1.0, threshold), "20 EPSPs of +1.0 mV must fire"
    assert not check_excitation(base, 19 * 1.0, threshold), "19 EPSPs of +1.0 mV must not"
    assert check_excitation(base, 40 * 0.5, threshold), "40 EPSPs of +0.5 mV must fire"
    assert not check_excitation(base, 39 * 0.5, threshold), "39 EPSPs of +0.5 mV must not"
    return "-65 mV + 20x1.0 and 40x0.5 reach -45 mV; 19x1.0 and 39x0.5 stay below"


def criterion_10_determinism() -> str:
    """Same seed, same bytes; a mid-run checkpoint changes nothing."""
    patterns = _tiled_patterns(5)
    config = ExperimentConfig(seed=42, shuffle=True, epochs=3, module_sizes=(8,))
    with tempfile.TemporaryDirectory() as tmp:
        tmp_path = Path(tmp)
        path_a = tmp_path / "a.jsonl"
        path_b = tmp_path / "b.jsonl"
        run_experiment(config, patterns, trace_path=path_a)
        run_experiment(config, patterns, trace_path=path_b)
        assert path_a.read_bytes() == path_b.read_bytes(), "re-run bytes differ"

        net_a, labels_a = build_from_config(config, patterns)
        records_a: list = []
        train_epochs(net_a, patterns, labels_a, config, records_a)
        evaluate_recall(net_a, patterns, labels_a, records_a)
        report_a = summarize(net_a, patterns, labels_a, config, records_a)

        net_b, labels_b = build_from_config(config, patterns)
        records_b: list = []
        train_epochs(net_b, patterns, labels_b, config, records_b, start_epoch=0, epochs=2)
        mid = tmp_path / "mid.json"
        save_checkpoint(net_b, mid)
        net_b2, _ = load_checkpoint(mid)
        train_epochs(net_b2, patterns, labels_b, config, records_b, start_epoch=2, epochs=1)
        evaluate_recall(net_b2, patterns, labels_b, records_b)
        report_b = summarize(net_b2, patterns, labels_b, config, records_b)

        stream_a = "\n".join(trace_line(r) for r in records_a)
        stream_b = "\n".join(trace_line(r) for r in records_b)
        assert stream_a == stream_b, "resumed trace differs from uninterrupted trace"
        assert report_a.to_dict() == report_b.to_dict(), "resumed report differs"
    return "re-run traces byte-identical; checkpoint resume reproduced trace and report"


@dataclass(frozen=True)
class Criterion:
    number: int
    name: str
    run: Callable[[], str]


CRITERIA: tuple[Criterion, ...] = (
    Criterion(1, "concept intersection", criterion_1_concept_intersection),
    Criterion(2, "self-learning boundary", criterion_2_self_learning_boundary),
    Criterion(3, "excitation corridor", criterion_3_corridor),
    Criterion(4, "output identity", criterion_4_output_identity),
    Criterion(5, "alpha-competition", criterion_5_alpha_competition),
    Criterion(6, "novelty capture", criterion_6_novelty_capture),
    Criterion(7, "end-to-end supervision", criterion_7_end_to_end),
    Criterion(8, "boundedness", criterion_8_boundedness),
    Criterion(9, "millivolt preset", criterion_9_millivolt_preset),
    Criterion(10, "determinism", criterion_10_determinism),
)


def run_criteria(numbers: list[int] | None = None, stream: TextIO = sys.stdout) -> bool:
    """Run the selected criteria (all by default), one line per result."""
    if numbers:
        known = {crit.number for crit in CRITERIA}
        unknown = sorted(set(numbers) - known)
        if unknown:
            raise ConfigError(f"unknown criterion numbers: {unknown}")
        selected = [crit for crit in CRITERIA if crit.number in set(numbers)]
    else:
        selected = list(CRITERIA)
    all_ok = True
    for crit in selected:
        try:
            detail = crit.run()
        except AssertionError as exc:
            all_ok = False
            stream.write(f"criterion {crit.number} {crit.name}: FAIL ({exc})\n")
        else:
            stream.write(f"criterion {crit.number} {crit.name}: PASS ({detail})\n")
    return all_ok
