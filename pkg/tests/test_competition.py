import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from condet.competition import ModuleVerdict, compete, module_step, normalize
from condet.detector import DetectorCore, LevelBand
from condet.errors import EmptyFieldError
from condet.learning import CorridorParams, output_ceiling, recompute_thresholds
from condet.signals import Address, Signal, build_vector


def a(unit_id):
    return Address(0, unit_id)


def d(unit_id):
    return Address(1, unit_id)


def captured_core(own, levels):
    """A detector as capture would build it: field = concept = inputs."""
    bands = {addr: LevelBand(lvl, lvl, lvl) for addr, lvl in levels.items()}
    g0, g_star = recompute_thresholds(bands, CorridorParams())
    return DetectorCore(
        own_address=own,
        receptive_field=frozenset(levels),
        concept=frozenset(levels),
        bands=bands,
        g0=g0,
        g_star=g_star,
        y_max=output_ceiling(bands, g_star),
    )


# --- compete -----------------------------------------------------------------


def test_compete_highest_level_wins():
    winner, losers = compete([(d(1), 1.2), (d(2), 1.5)])
    assert winner == d(2)
    assert losers == {d(1)}


def test_compete_single_contestant():
    winner, losers = compete([(d(1), 1.2)])
    assert winner == d(1)
    assert losers == frozenset()


def test_compete_tie_breaks_to_smallest_address():
    winner, losers = compete([(d(1), 1.0), (d(2), 1.0)])
    assert winner == d(1)
    assert losers == {d(2)}


def test_compete_empty_field():
    with pytest.raises(EmptyFieldError):
        compete([])


@given(
    st.lists(
        st.tuples(st.integers(0, 40), st.floats(0.001, 100.0)),
        unique_by=lambda p: p[0],
        min_size=1,
        max_size=12,
    )
)
def test_compete_winner_is_argmax(pairs):
    fired = [(d(u), lvl) for u, lvl in pairs]
    winner, losers = compete(fired)
    best = max(lvl for _, lvl in fired)
    assert dict(fired)[winner] == best
    assert winner == min(addr for addr, lvl in fired if lvl == best)
    assert losers == {addr for addr, _ in fired} - {winner}


@given(
    st.lists(
        st.tuples(st.integers(0, 40), st.floats(0.001, 10.0)),
        unique_by=lambda p: p[0],
        min_size=1,
        max_size=10,
    ),
    st.sampled_from([0.25, 0.5, 2.0, 4.0, 1024.0]),
)
def test_compete_scaling_invariance(pairs, factor):
    # power-of-two factors rescale exactly, so the argmax cannot move
    fired = [(d(u), lvl) for u, lvl in pairs]
    scaled = [(addr, lvl * factor) for addr, lvl in fired]
    assert compete(fired)[0] == compete(scaled)[0]


# --- normalize ----------------------------------------------------------------


def test_normalize_zero():
    assert normalize(0.0, 5.0) == 0.0


def test_normalize_ceiling():
    assert normalize(5.0, 5.0) == 1.0


def test_normalize_saturation_clamp():
    assert normalize(10.0, 5.0) == 1.0


def test_normalize_rejects_bad_arguments():
    with pytest.raises(ValueError):
        normalize(-0.1, 1.0)
    with pytest.raises(ValueError):
        normalize(0.5, 0.0)


# --- ModuleVerdict validation ----------------------------------------------------


def test_verdict_winner_excludes_novelty_and_self_loss():
    with pytest.raises(ValueError):
        ModuleVerdict(Signal(d(1), 0.5), frozenset(), novelty=True)
    with pytest.raises(ValueError):
        ModuleVerdict(Signal(d(1), 0.5), frozenset({d(1)}), novelty=False)
    with pytest.raises(ValueError):
        ModuleVerdict(None, frozenset({d(1)}), novelty=False)


# --- module_step -------------------------------------------------------------------


def test_module_step_subset_dominance():
    levels2 = {a(1): 0.5, a(2): 0.5, a(3): 0.5}
    levels1 = {a(1): 0.5, a(2): 0.5}
    det1 = captured_core(d(1), levels1)
    det2 = captured_core(d(2), levels2)
    inputs = build_vector(list(levels2.items()))
    verdict = module_step([det1, det2], inputs)
    assert verdict.winner is not None
    assert verdict.winner.address == d(2)
    assert verdict.pre_excited == {d(1)}
    assert not verdict.novelty


def test_module_step_empty_inputs_quiescent():
    det = captured_core(d(1), {a(1): 0.5})
    verdict = module_step([det], build_vector([]))
    assert verdict.winner is None
    assert not verdict.novelty
    assert verdict.pre_excited == frozenset()


def test_module_step_disjoint_inputs_raise_novelty():
    det = captured_core(d(1), {a(1): 0.5})
    verdict = module_step([det], build_vector([(a(9), 0.9)]))
    assert verdict.winner is None
    assert verdict.novelty


def test_module_step_winner_level_is_normalized():
    det = captured_core(d(1), {a(1): 0.5, a(2): 0.5})
    verdict = module_step([det], build_vector([(a(1), 0.5), (a(2), 0.5)]))
    assert verdict.winner is not None
    assert 0.0 <= verdict.winner.level <= 1.0


@given(st.data())
def test_module_step_exactly_one_winner(data):
    rng = random.Random(data.draw(st.integers(0, 10**6)))
    detectors = []
    for unit in range(6):
        size = rng.randint(1, 4)
        members = rng.sample(range(12), size)
        levels = {a(u): rng.uniform(0.3, 1.0) for u in members}
        detectors.append(captured_core(d(unit), levels))
    chosen = rng.randrange(6)
    inputs_levels = {addr: band.opt for addr, band in detectors[chosen].bands.items()}
    inputs = build_vector(list(inputs_levels.items()))
    verdict = module_step(detectors, inputs)
    fired = {
        det.own_address
        for det in detectors
        if _fires(det, inputs)
    }
    assert verdict.winner is not None
    assert verdict.winner.address in fired
    assert verdict.pre_excited == fired - {verdict.winner.address}


def _fires(det, inputs):
    from condet.detector import detector_step

    return detector_step(det, inputs).fired
