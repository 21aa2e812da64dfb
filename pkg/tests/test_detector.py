import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from condet.detector import (
    EPSP_MV_RANGE,
    EXCITATION_THRESHOLD_MV,
    RESTING_POTENTIAL_MV,
    DetectorCore,
    LevelBand,
    OutcomeKind,
    check_excitation,
    detector_step,
    output_level,
    partition_inputs,
)
from condet.signals import Address, build_vector


def a(unit_id):
    return Address(0, unit_id)


def make_core(concept, field=None, g0=0.0, g_star=1.0, y_max=1.0, band_level=0.5):
    concept = frozenset(concept)
    field = frozenset(field) if field is not None else concept
    bands = {addr: LevelBand(band_level, band_level, band_level) for addr in concept}
    return DetectorCore(
        own_address=Address(1, 0),
        receptive_field=field,
        concept=concept,
        bands=bands,
        g0=g0,
        g_star=g_star,
        y_max=y_max,
    )


# --- LevelBand and DetectorCore validation ---------------------------------


def test_band_ordering_enforced():
    LevelBand(0.4, 0.5, 0.6)
    with pytest.raises(ValueError):
        LevelBand(0.5, 0.4, 0.6)
    with pytest.raises(ValueError):
        LevelBand(0.0, 0.5, 0.6)


def test_core_concept_must_be_inside_field():
    with pytest.raises(ValueError):
        make_core({a(1)}, field={a(2)})


def test_core_concept_addresses_need_bands():
    with pytest.raises(ValueError):
        DetectorCore(
            own_address=Address(1, 0),
            receptive_field=frozenset({a(1)}),
            concept=frozenset({a(1)}),
            bands={},
        )


def test_core_threshold_signs():
    with pytest.raises(ValueError):
        make_core(set(), g_star=0.0)
    with pytest.raises(ValueError):
        make_core(set(), g0=-0.1)


# --- partition_inputs -------------------------------------------------------


def test_partition_all_inputs_in_concept():
    det = make_core({a(1), a(2)})
    gp, gdp = partition_inputs(build_vector([(a(1), 0.5), (a(2), 0.5)]), det)
    assert (gp, gdp) == (1.0, 0.0)


def test_partition_direct_sums():
    det = make_core({a(1)}, field={a(1), a(3)})
    gp, gdp = partition_inputs(build_vector([(a(1), 0.5), (a(3), 0.2)]), det)
    assert (gp, gdp) == (0.5, 0.2)


def test_partition_empty_inputs():
    det = make_core({a(1)})
    assert partition_inputs(build_vector([]), det) == (0.0, 0.0)


def test_partition_ignores_addresses_outside_field():
    det = make_core({a(1)}, field={a(1)})
    gp, gdp = partition_inputs(build_vector([(a(1), 0.5), (a(9), 0.9)]), det)
    assert (gp, gdp) == (0.5, 0.0)


@given(
    st.lists(
        st.tuples(st.integers(0, 30), st.floats(0.01, 1.0)),
        unique_by=lambda p: p[0],
        max_size=15,
    ),
    st.sets(st.integers(0, 30), max_size=10),
    st.sets(st.integers(0, 30), max_size=10),
)
def test_partition_completeness(pairs, concept_ids, extra_field_ids):
    concept = {a(u) for u in concept_ids}
    field = concept | {a(u) for u in extra_field_ids}
    bands = {addr: LevelBand(0.5, 0.5, 0.5) for addr in concept}
    det = DetectorCore(
        own_address=Address(1, 0),
        receptive_field=frozenset(field),
        concept=frozenset(concept),
        bands=bands,
    )
    inputs = build_vector([(a(u), lvl) for u, lvl in pairs])
    gp, gdp = partition_inputs(inputs, det)
    restricted = sum(lvl for addr, lvl in inputs.items() if addr in field)
    assert gp + gdp == pytest.approx(restricted, rel=1e-12, abs=1e-15)


# --- check_excitation --------------------------------------------------------


def test_excitation_reaches_threshold():
    assert check_excitation(0.2, 1.0, 1.1) is True


def test_excitation_below_threshold():
    assert check_excitation(0.2, 0.8, 1.1) is False


def test_excitation_millivolt_figures():
    assert check_excitation(-65.0, 25 * 1.0, -45.0) is True
    assert check_excitation(-65.0, 19 * 1.0, -45.0) is False


def test_excitation_boundary_inclusive_by_default():
    assert check_excitation(0.0, 1.0, 1.0) is True
    assert check_excitation(0.0, 1.0, 1.0, strict=True) is False
    assert check_excitation(0.0, 1.0000001, 1.0, strict=True) is True


def test_millivolt_preset_constants():
    assert RESTING_POTENTIAL_MV == -65.0
    assert EXCITATION_THRESHOLD_MV == -45.0
    assert EPSP_MV_RANGE == (0.5, 1.0)


# --- output_level ------------------------------------------------------------


def test_output_level_sum():
    assert output_level(0.2, 1.0, 0.3) == pytest.approx(1.5)


def test_output_level_without_outside_contribution():
    assert output_level(0.2, 1.0, 0.0) == pytest.approx(1.2)
    assert output_level(0.2, 1.0, 0.0) == 0.2 + 1.0


def test_output_level_zero():
    assert output_level(0.0, 0.0, 0.0) == 0.0


# --- detector_step -----------------------------------------------------------


def test_step_no_match_on_disjoint_inputs():
    det = make_core({a(1), a(2)}, field={a(1), a(2), a(3)})
    outcome = detector_step(det, build_vector([(a(3), 0.9)]))
    assert outcome.kind is OutcomeKind.NO_MATCH
    assert outcome.raw_level is None


def test_step_sub_threshold():
    det = make_core({a(1), a(2)}, g0=0.2, g_star=1.1)
    outcome = detector_step(det, build_vector([(a(1), 0.4)]))
    assert outcome.kind is OutcomeKind.SUB_THRESHOLD


def test_step_fired():
    det = make_core({a(1), a(2)}, g0=0.2, g_star=1.1, y_max=2.0)
    outcome = detector_step(det, build_vector([(a(1), 0.5), (a(2), 0.5)]))
    assert outcome.fired
    assert outcome.raw_level == pytest.approx(1.2)


def test_step_empty_inputs_is_no_match():
    det = make_core({a(1)})
    assert detector_step(det, build_vector([])).kind is OutcomeKind.NO_MATCH


def test_step_free_detector_never_matches():
    det = DetectorCore(own_address=Address(1, 0))
    outcome = detector_step(det, build_vector([(a(1), 1.0)]))
    assert outcome.kind is OutcomeKind.NO_MATCH


def test_h1_precedence_over_large_outside_contribution():
    # non-concept inputs alone can never fire a detector
    det = make_core({a(1)}, field={a(1), a(2), a(3)}, g0=5.0, g_star=0.1)
    inputs = build_vector([(a(2), 1.0), (a(3), 1.0)])
    assert detector_step(det, inputs).kind is OutcomeKind.NO_MATCH


def test_outside_contribution_never_gates_firing():
    # g'' is not routed through the threshold comparison
    det = make_core({a(1), a(2)}, field={a(1), a(2), a(3)}, g0=0.0, g_star=1.5, y_max=3.0)
    inputs = build_vector([(a(1), 0.5), (a(3), 1.0)])
    assert detector_step(det, inputs).kind is OutcomeKind.SUB_THRESHOLD


def test_strict_flag_changes_boundary_decision():
    det = make_core({a(1)}, g0=0.5, g_star=1.0, y_max=2.0)
    boundary = build_vector([(a(1), 0.5)])
    assert detector_step(det, boundary).fired
    assert detector_step(det, boundary, strict=True).kind is OutcomeKind.SUB_THRESHOLD


def test_step_determinism():
    det = make_core({a(1), a(2)}, field={a(1), a(2), a(4)}, g0=0.1, g_star=0.9, y_max=3.0)
    inputs = build_vector([(a(1), 0.7), (a(2), 0.31), (a(4), 0.22)])
    first = detector_step(det, inputs)
    for _ in range(5):
        again = detector_step(det, inputs)
        assert again.kind is first.kind
        assert again.raw_level == first.raw_level


@given(
    st.floats(0.0, 2.0),
    st.floats(0.01, 2.0),
    st.lists(st.floats(0.01, 1.0), min_size=1, max_size=8),
    st.floats(0.01, 1.0),
)
def test_monotonicity_adding_concept_input(g0, g_star, levels, extra_level):
    # a fired detector stays fired when one more concept input arrives
    concept = {a(i) for i in range(len(levels) + 1)}
    bands = {addr: LevelBand(0.5, 0.5, 0.5) for addr in concept}
    det = DetectorCore(
        own_address=Address(1, 0),
        receptive_field=frozenset(concept),
        concept=frozenset(concept),
        bands=bands,
        g0=g0,
        g_star=g_star,
        y_max=10.0,
    )
    base_inputs = build_vector([(a(i), lvl) for i, lvl in enumerate(levels)])
    if not detector_step(det, base_inputs).fired:
        return
    widened = build_vector(
        [(a(i), lvl) for i, lvl in enumerate(levels)] + [(a(len(levels)), extra_level)]
    )
    assert detector_step(det, widened).fired


def test_eq_10_11_identity_on_dyadic_levels():
    # levels on a power-of-two grid make every sum exact, so the
    # decomposition identity holds bitwise
    det = make_core({a(1), a(2)}, field={a(1), a(2), a(3)}, g0=0.25, g_star=0.5, y_max=4.0)
    inputs = build_vector([(a(1), 0.5), (a(2), 0.75), (a(3), 0.125)])
    outcome = detector_step(det, inputs)
    gp, gdp = partition_inputs(inputs, det)
    assert outcome.raw_level - gdp - gp - det.g0 == 0.0
    dg = det.g0 + gp
    assert outcome.raw_level == dg + gdp


def test_eq_10_11_identity_close_on_arbitrary_levels():
    det = make_core({a(1), a(2)}, field={a(1), a(2), a(3)}, g0=0.1, g_star=0.3, y_max=4.0)
    inputs = build_vector([(a(1), 0.3), (a(2), 0.7), (a(3), 0.9)])
    outcome = detector_step(det, inputs)
    gp, gdp = partition_inputs(inputs, det)
    assert math.isclose(outcome.raw_level, (det.g0 + gp) + gdp, rel_tol=0, abs_tol=0)
