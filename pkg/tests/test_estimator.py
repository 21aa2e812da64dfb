import numpy as np
import pytest
from sklearn.base import clone

from condet.estimator import ConceptDetectorClassifier


def toy_data():
    X = np.array(
        [
            [1.0, 1.0, 1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0, 1.0, 1.0],
            [1.0, 1.0, 0.0, 0.0, 0.0, 1.0],
        ]
    )
    y = np.array(["left", "right", "mix"])
    return X, y


def test_fit_predict_round_trip():
    X, y = toy_data()
    clf = ConceptDetectorClassifier(n_detectors=8, epochs=3).fit(X, y)
    assert list(clf.predict(X)) == list(y)
    assert clf.score(X, y) == 1.0


def test_classes_are_sorted_unique():
    X, y = toy_data()
    clf = ConceptDetectorClassifier(n_detectors=8).fit(X, y)
    assert list(clf.classes_) == sorted(set(y))


def test_capture_count_matches_distinct_patterns():
    X, y = toy_data()
    clf = ConceptDetectorClassifier(n_detectors=8, epochs=4).fit(X, y)
    assert clf.capture_count_ == 3
    assert clf.conflict_count_ == 0


def test_unknown_pattern_maps_to_unknown_label():
    X, y = toy_data()
    clf = ConceptDetectorClassifier(n_detectors=8, unknown_label="?").fit(X, y)
    unseen = np.array([[0.0, 0.0, 0.0, 0.0, 0.0, 0.9]])
    assert clf.predict(unseen)[0] == "?"


def test_unknown_label_defaults_to_none():
    X, y = toy_data()
    clf = ConceptDetectorClassifier(n_detectors=8).fit(X, y)
    unseen = np.array([[0.9, 0.0, 0.0, 0.0, 0.0, 0.0]])
    assert clf.predict(unseen)[0] is None


def test_rejects_intensities_outside_unit_interval():
    X, y = toy_data()
    clf = ConceptDetectorClassifier(n_detectors=8)
    with pytest.raises(ValueError):
        clf.fit(X * 2.0, y)
    clf.fit(X, y)
    with pytest.raises(ValueError):
        clf.predict(X - 0.5)


def test_rejects_feature_count_mismatch():
    X, y = toy_data()
    clf = ConceptDetectorClassifier(n_detectors=8).fit(X, y)
    with pytest.raises(ValueError):
        clf.predict(X[:, :4])


def test_requires_fit_before_predict():
    X, _ = toy_data()
    with pytest.raises(Exception):
        ConceptDetectorClassifier().predict(X)


def test_get_params_round_trips_through_clone():
    clf = ConceptDetectorClassifier(n_detectors=16, epochs=2, theta=0.8, seed=5)
    cloned = clone(clf)
    assert cloned.get_params() == clf.get_params()
    assert cloned.get_params()["theta"] == 0.8


def test_set_params_changes_behavior():
    X, y = toy_data()
    clf = ConceptDetectorClassifier(n_detectors=8)
    clf.set_params(epochs=1)
    clf.fit(X, y)
    assert clf.get_params()["epochs"] == 1


def test_conflicting_duplicate_sample_counts_conflict():
    X = np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0]])
    y = np.array(["a", "b"])
    clf = ConceptDetectorClassifier(n_detectors=8, epochs=1).fit(X, y)
    assert clf.conflict_count_ == 1
    assert clf.capture_count_ == 2


def test_shuffle_is_seed_deterministic():
    X, y = toy_data()
    clf1 = ConceptDetectorClassifier(n_detectors=8, shuffle=True, seed=3).fit(X, y)
    clf2 = ConceptDetectorClassifier(n_detectors=8, shuffle=True, seed=3).fit(X, y)
    assert list(clf1.predict(X)) == list(clf2.predict(X))
    assert clf1.capture_count_ == clf2.capture_count_


def test_numeric_labels_round_trip():
    X = np.array([[1.0, 0.0], [0.0, 1.0]])
    y = np.array([3, 7])
    clf = ConceptDetectorClassifier(n_detectors=4, epochs=2).fit(X, y)
    assert list(clf.predict(X)) == [3, 7]


def test_concepts_report_bound_labels():
    X, y = toy_data()
    clf = ConceptDetectorClassifier(n_detectors=8, epochs=2).fit(X, y)
    concepts = clf.concepts_()
    assert set(concepts) == set(y)
    left = concepts["left"][0]
    assert {address.unit_id for address in left} == {0, 1, 2}
