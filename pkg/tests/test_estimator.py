"""Estimator-API tests: sklearn conventions plus bit-equality with the engine."""

from __future__ import annotations

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import Pipeline

from unlescore.errors import InvalidArgument
from unlescore.estimator import SCORE_COLUMNS, CompletenessScorer
from unlescore.scoring import fit_reference_arrays, score_arrays


@pytest.fixture
def fitted(rng):
    X_ref = rng.uniform(0.02, 0.98, size=(150, 2))
    return X_ref, CompletenessScorer().fit(X_ref)


class TestFit:
    def test_learns_the_same_references_as_the_engine(self, fitted):
        X_ref, scorer = fitted
        assert scorer.references_ == fit_reference_arrays(X_ref[:, 0], X_ref[:, 1])
        assert scorer.n_features_in_ == 2

    def test_rejects_bad_shapes_and_values(self):
        scorer = CompletenessScorer()
        for bad in (
            np.zeros((4, 3)),
            np.zeros(4),
            np.full((4, 2), 1.5),
            np.array([[0.5, np.nan]] * 4),
        ):
            with pytest.raises(InvalidArgument):
                scorer.fit(bad)


class TestTransform:
    def test_matches_engine_bitwise(self, fitted, rng):
        X_ref, scorer = fitted
        X = rng.uniform(0.0, 1.0, size=(300, 2))
        cols = score_arrays(X[:, 0], X[:, 1], scorer.references_)
        expected = np.column_stack([cols[name] for name in SCORE_COLUMNS])
        assert np.array_equal(scorer.transform(X), expected)

    def test_score_samples_is_last_column(self, fitted, rng):
        _, scorer = fitted
        X = rng.uniform(0.0, 1.0, size=(50, 2))
        assert SCORE_COLUMNS[-1] == "unle_score"
        assert np.array_equal(scorer.score_samples(X), scorer.transform(X)[:, -1])

    def test_unfitted_raises(self):
        with pytest.raises(NotFittedError):
            CompletenessScorer().transform(np.full((3, 2), 0.5))

    def test_feature_names(self, fitted):
        _, scorer = fitted
        assert tuple(scorer.get_feature_names_out()) == SCORE_COLUMNS


class TestSklearnProtocol:
    def test_no_hyperparameters(self):
        assert CompletenessScorer().get_params() == {}

    def test_clone_and_refit(self, fitted, rng):
        X_ref, scorer = fitted
        fresh = clone(scorer)
        assert not hasattr(fresh, "references_")
        assert fresh.fit(X_ref).references_ == scorer.references_

    def test_composes_in_a_pipeline(self, fitted, rng):
        X_ref, scorer = fitted
        pipe = Pipeline([("completeness", CompletenessScorer())]).fit(X_ref)
        X = rng.uniform(0.0, 1.0, size=(40, 2))
        assert np.array_equal(pipe.transform(X), scorer.transform(X))

    def test_accepts_lists(self, fitted):
        _, scorer = fitted
        out = scorer.score_samples([[0.9, 0.1], [0.5, 0.5]])
        assert out.shape == (2,)
        assert out[0] > out[1]  # collapsed confidence scores as more unlearned
