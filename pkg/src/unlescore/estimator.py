"""scikit-learn style wrapper around the scoring engine.

CompletenessScorer makes the engine compose with sklearn pipelines and model
selection utilities: fit() learns the nonmember reference distributions from
an (n, 2) array of [conf_ori, conf_unl] pairs, transform() maps any such
array to the seven score columns, and score_samples() returns the final
completeness score per row. All metric constants are fixed by the engine, so
the estimator has no hyperparameters.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .errors import InvalidArgument
from .scoring import ReferenceFits, fit_reference_arrays, score_arrays

SCORE_COLUMNS = ("h_ori", "h_unl", "l_diff", "d_a_lik", "d_b_lik", "d_liks", "unle_score")


def _check_confidence_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != 2:
        raise InvalidArgument("expected an (n, 2) array of [conf_ori, conf_unl] pairs")
    if not np.all(np.isfinite(X)):
        raise InvalidArgument("confidences must be finite")
    if X.min() < 0.0 or X.max() > 1.0:
        raise InvalidArgument("confidences must lie in [0, 1]")
    return X


class CompletenessScorer(BaseEstimator, TransformerMixin):
    """Scores how completely samples were unlearned, from confidence pairs.

    fit() consumes NONMEMBER confidence pairs only; transform() may then be
    applied to any samples, members or not.

    Attributes
    ----------
    references_ : ReferenceFits
        The four nonmember reference Gaussians learned by fit().
    n_features_in_ : int
        Always 2 ([conf_ori, conf_unl]).
    """

    def fit(self, X, y=None) -> "CompletenessScorer":
        X = _check_confidence_matrix(X)
        self.references_: ReferenceFits = fit_reference_arrays(X[:, 0], X[:, 1])
        self.n_features_in_ = 2
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "references_")
        X = _check_confidence_matrix(X)
        cols = score_arrays(X[:, 0], X[:, 1], self.references_)
        return np.column_stack([cols[name] for name in SCORE_COLUMNS])

    def score_samples(self, X) -> np.ndarray:
        check_is_fitted(self, "references_")
        X = _check_confidence_matrix(X)
        return score_arrays(X[:, 0], X[:, 1], self.references_)["unle_score"]

    def get_feature_names_out(self, input_features=None) -> np.ndarray:
        return np.asarray(SCORE_COLUMNS, dtype=object)
