"""Scikit-learn estimator facade over the detector network."""

from __future__ import annotations

import random

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .learning import CorridorParams, TeacherMode
from .network import Bound, build_network, present, recall
from .signals import Address, SignalVector


class ConceptDetectorClassifier(ClassifierMixin, BaseEstimator):
    """Classifies intensity vectors with a module of concept detectors.

    Each non-zero feature of a sample excites one receptor address. A
    free detector captures the address set the first time a class
    pattern appears, the matching label unit binds to it, and repeated
    agreeing presentations tighten the concept down to the features the
    class always shows. Prediction recalls the label bound to the
    winning detector.

    Parameters
    ----------
    n_detectors : int, default=64
        Capacity of the perceptual module; every distinct pattern the
        network meets occupies one detector.
    epochs : int, default=3
        Full passes over the training set.
    theta : float, default=0.9
        Fraction of the optimal-level sum a detector demands before it
        fires.
    delta : float, default=0.0
        Co-occurrence tolerance: a feature stays in a concept while its
        occurrence ratio is at least 1 - delta.
    strict_threshold : bool, default=False
        Use > instead of >= at the excitation threshold.
    shuffle : bool, default=False
        Reorder samples each epoch, driven only by `seed`.
    seed : int, default=0
        Seed for the shuffle order; ignored when shuffle is off.
    unknown_label : object, default=None
        Returned for samples no bound detector recognizes.

    Attributes
    ----------
    classes_ : ndarray
        Sorted unique training labels.
    network_ : NetworkState
        The trained detector network.
    capture_count_, conflict_count_ : int
        Supervision events observed during fit.
    """

    def __init__(
        self,
        n_detectors: int = 64,
        epochs: int = 3,
        theta: float = 0.9,
        delta: float = 0.0,
        strict_threshold: bool = False,
        shuffle: bool = False,
        seed: int = 0,
        unknown_label: object = None,
    ):
        self.n_detectors = n_detectors
        self.epochs = epochs
        self.theta = theta
        self.delta = delta
        self.strict_threshold = strict_threshold
        self.shuffle = shuffle
        self.seed = seed
        self.unknown_label = unknown_label

    def _validate_intensities(self, X: np.ndarray) -> None:
        if not np.all(np.isfinite(X)):
            raise ValueError("X must be finite")
        if X.size and (X.min() < 0.0 or X.max() > 1.0):
            raise ValueError("X must hold intensities in [0, 1]")

    def _vector(self, row: np.ndarray) -> SignalVector:
        return SignalVector(
            (Address(0, j), float(v)) for j, v in enumerate(row) if v > 0.0
        )

    def fit(self, X, y) -> "ConceptDetectorClassifier":
        """Present every sample with its label for `epochs` passes."""
        X, y = check_X_y(X, y, dtype=float)
        self._validate_intensities(X)
        if self.epochs < 1:
            raise ValueError(f"epochs must be at least 1, got {self.epochs}")
        self.classes_ = np.unique(y)
        net = build_network(
            ps_sizes=(self.n_detectors,),
            n_labels=len(self.classes_),
            corridor=CorridorParams(theta=self.theta),
            learning=TeacherMode(delta=self.delta),
            strict_threshold=self.strict_threshold,
        )
        rs_id = net.rs_module.module_id
        teacher_of = {
            label: Address(rs_id, index) for index, label in enumerate(self.classes_)
        }
        captures = conflicts = 0
        order = list(range(X.shape[0]))
        for epoch in range(self.epochs):
            if self.shuffle:
                random.Random(f"{self.seed}:{epoch}").shuffle(order)
            for i in order:
                step = present(
                    net, self._vector(X[i]), teacher=teacher_of[y[i]], learn=True
                )
                for event in step.events:
                    captures += event.kind.value == "captured"
                    conflicts += event.kind.value == "conflict"
        self.network_ = net
        self.label_of_ = {address: label for label, address in teacher_of.items()}
        self.capture_count_ = captures
        self.conflict_count_ = conflicts
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X) -> np.ndarray:
        """Recall the bound label of each sample's winning detector."""
        check_is_fitted(self, "network_")
        X = check_array(X, dtype=float)
        self._validate_intensities(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, expected {self.n_features_in_}"
            )
        out = []
        for row in X:
            answer = recall(self.network_, self._vector(row))
            if answer is None:
                out.append(self.unknown_label)
            else:
                out.append(self.label_of_[answer])
        if all(label in self.classes_ for label in out):
            return np.asarray(out, dtype=self.classes_.dtype)
        return np.asarray(out, dtype=object)

    def concepts_(self) -> dict[object, list[frozenset[Address]]]:
        """Per-label list of learned concepts, for inspection."""
        check_is_fitted(self, "network_")
        out: dict[object, list[frozenset[Address]]] = {}
        for module in self.network_.ps_modules:
            for unit in module.units:
                if isinstance(unit.life, Bound):
                    label = self.label_of_[unit.life.teacher]
                    out.setdefault(label, []).append(unit.core.concept)
        return out
