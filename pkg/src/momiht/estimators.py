"""scikit-learn estimators wrapping the hard-thresholding solvers.

``IHTRegressor`` fits sparse (or group-sparse) linear models with
``fit(X, y)`` / ``predict(X)``; ``momentum=0`` recovers plain IHT.
``LowRankCompleter`` fills the NaN entries of a partially observed matrix
with a rank-constrained fit, following the imputer ``fit``/``transform``
convention.  Both compose with pipelines, ``get_params`` and cloning.
"""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from . import models, objectives, solvers

__all__ = ["IHTRegressor", "LowRankCompleter"]


class IHTRegressor(BaseEstimator, RegressorMixin):
    """Sparse linear regression by momentum iterative hard thresholding.

    Parameters
    ----------
    k : int
        Atom budget: number of nonzero coefficients, or number of active
        groups when ``groups`` is given.
    momentum : float
        Extrapolation weight mixing consecutive iterates; 0 disables
        acceleration.
    step_size : float, "auto" or "line-search"
        Gradient step; "auto" uses ``1 / lambda_max(X^T X)``.
    tol : float
        Relative iterate-change stopping tolerance.
    max_iter : int
        Iteration cap.
    debias : bool
        Refit coefficients on the final support each iteration.
    groups : sequence of index lists or None
        Non-overlapping groups partitioning the features (group sparsity).

    Attributes
    ----------
    coef_ : ndarray of shape (n_features,)
    n_iter_ : int
    converged_ : bool
    trace_ : SolverTrace of the fitting run.
    """

    def __init__(self, k=10, momentum=0.25, step_size="auto", tol=1e-7,
                 max_iter=10000, debias=False, groups=None):
        self.k = k
        self.momentum = momentum
        self.step_size = step_size
        self.tol = tol
        self.max_iter = max_iter
        self.debias = debias
        self.groups = groups

    def _model(self):
        if self.groups is not None:
            return models.BlockSparsity(tuple(tuple(g) for g in self.groups), self.k)
        return models.Sparsity(self.k)

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        config = solvers.SolverConfig(
            tau=self.momentum,
            mu=self.step_size,
            eta=self.tol,
            max_iter=self.max_iter,
            debias=self.debias,
        )
        trace = solvers.acc_iht(objectives.LeastSquares(X, y), self._model(), config)
        if trace.diverged:
            raise RuntimeError(
                "iteration diverged; reduce momentum or step_size "
                f"(momentum={self.momentum}, step_size={self.step_size})"
            )
        self.coef_ = trace.final
        self.n_iter_ = trace.iterations
        self.converged_ = trace.termination == "tolerance"
        self.trace_ = trace
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        return X @ self.coef_


class LowRankCompleter(BaseEstimator, TransformerMixin):
    """Matrix completion transformer: NaN entries are treated as unobserved
    and replaced by a rank-``rank`` reconstruction fit to the observed ones.
    """

    def __init__(self, rank=3, momentum=0.25, step_size="line-search",
                 tol=1e-9, max_iter=3000):
        self.rank = rank
        self.momentum = momentum
        self.step_size = step_size
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y=None):
        X = check_array(X, ensure_all_finite="allow-nan")
        observed = ~np.isnan(X)
        if not observed.any():
            raise ValueError("X has no observed entries")
        rows, cols = np.nonzero(observed)
        obj = objectives.MaskedLeastSquares(rows, cols, X[rows, cols], X.shape)
        config = solvers.SolverConfig(
            tau=self.momentum,
            mu=self.step_size,
            eta=self.tol,
            max_iter=self.max_iter,
        )
        trace = solvers.acc_iht(obj, models.LowRank(self.rank, *X.shape), config)
        if trace.diverged:
            raise RuntimeError("completion diverged; reduce momentum")
        self.completion_ = trace.final
        self.n_iter_ = trace.iterations
        self.converged_ = trace.termination == "tolerance"
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "completion_")
        X = check_array(X, ensure_all_finite="allow-nan")
        if X.shape != self.completion_.shape:
            raise ValueError(
                f"X has shape {X.shape}, fitted completion has {self.completion_.shape}"
            )
        out = np.asarray(X, dtype=float).copy()
        missing = np.isnan(out)
        out[missing] = self.completion_[missing]
        return out
