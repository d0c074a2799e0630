"""Smooth convex objectives with value / gradient / restricted gradient.

Every objective exposes ``value(x)``, ``gradient(x)`` and ``signal_shape``;
solvers only rely on this contract.  ``LeastSquares`` is the objective the
convergence theory applies to; the masked and logistic losses run through the
same solver without guarantee claims.
"""

import numpy as np
from scipy.special import expit

from . import linalg, models

__all__ = [
    "LeastSquares",
    "MaskedLeastSquares",
    "LogisticL2",
    "gradient_restricted",
    "save_mask_file",
    "load_mask_file",
]


class LeastSquares:
    """f(x) = 0.5 * ||b - Phi x||^2."""

    def __init__(self, Phi, b):
        self.Phi = np.asarray(Phi, dtype=float)
        self.b = np.asarray(b, dtype=float).ravel()
        if self.Phi.ndim != 2 or self.Phi.shape[0] != self.b.size:
            raise ValueError("Phi and b have inconsistent dimensions")

    @property
    def signal_shape(self):
        return (self.Phi.shape[1],)

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != self.signal_shape:
            raise ValueError(f"expected signal of shape {self.signal_shape}, got {x.shape}")
        return x

    def residual(self, x):
        return self.b - self.Phi @ self._check(x)

    def value(self, x):
        r = self.residual(x)
        return 0.5 * float(r @ r)

    def gradient(self, x):
        return self.Phi.T @ (self.Phi @ self._check(x) - self.b)


class MaskedLeastSquares:
    """Squared loss over an observed subset of matrix entries.

    f(X) = 0.5 * sum over observed (i, j) of (b_ij - X_ij)^2.  Observations
    are stored sorted by (row, col) so iteration order is deterministic.
    """

    def __init__(self, rows, cols, values, shape):
        rows = np.asarray(rows, dtype=int).ravel()
        cols = np.asarray(cols, dtype=int).ravel()
        values = np.asarray(values, dtype=float).ravel()
        if not rows.size == cols.size == values.size:
            raise ValueError("rows, cols and values must have equal length")
        p, n = int(shape[0]), int(shape[1])
        if rows.size and (rows.min() < 0 or rows.max() >= p or cols.min() < 0 or cols.max() >= n):
            raise ValueError("observed position out of range")
        flat = rows * n + cols
        if np.unique(flat).size != flat.size:
            raise ValueError("observed positions must be distinct")
        order = np.argsort(flat, kind="stable")
        self.rows = rows[order]
        self.cols = cols[order]
        self.values = values[order]
        self.shape = (p, n)

    @property
    def signal_shape(self):
        return self.shape

    @property
    def n_observed(self):
        return self.values.size

    def _check(self, X):
        X = np.asarray(X, dtype=float)
        if X.shape != self.shape:
            raise ValueError(f"expected matrix of shape {self.shape}, got {X.shape}")
        return X

    def apply_mask(self, X):
        """Observed entries of ``X`` in storage order (the mask operator)."""
        return self._check(X)[self.rows, self.cols]

    def value(self, X):
        r = self.apply_mask(X) - self.values
        return 0.5 * float(r @ r)

    def gradient(self, X):
        G = np.zeros(self.shape)
        G[self.rows, self.cols] = self.apply_mask(X) - self.values
        return G


class LogisticL2:
    """l2-regularized logistic loss with labels in {-1, +1}.

    f(x) = sum_i log(1 + exp(-y_i <phi_i, x>)) + 0.5 * lam * ||x||^2,
    evaluated with log1p-exp so large margins cannot overflow.
    """

    def __init__(self, features, labels, lam=0.0):
        self.features = np.asarray(features, dtype=float)
        self.labels = np.asarray(labels, dtype=float).ravel()
        if self.features.ndim != 2 or self.features.shape[0] != self.labels.size:
            raise ValueError("features and labels have inconsistent dimensions")
        if not np.all(np.isin(self.labels, (-1.0, 1.0))):
            raise ValueError("labels must be -1 or +1")
        if lam < 0:
            raise ValueError("lam must be nonnegative")
        self.lam = float(lam)

    @property
    def signal_shape(self):
        return (self.features.shape[1],)

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != self.signal_shape:
            raise ValueError(f"expected signal of shape {self.signal_shape}, got {x.shape}")
        return x

    def margins(self, x):
        return self.labels * (self.features @ self._check(x))

    def value(self, x):
        x = self._check(x)
        loss = float(np.sum(np.logaddexp(0.0, -self.margins(x))))
        return loss + 0.5 * self.lam * float(x @ x)

    def gradient(self, x):
        x = self._check(x)
        w = expit(-self.margins(x))
        return -self.features.T @ (self.labels * w) + self.lam * x


def gradient_restricted(obj, x, support):
    """Gradient of ``obj`` at ``x`` with everything outside ``support`` zeroed."""
    return models.restrict(obj.gradient(x), support)


def save_mask_file(path, obj):
    """Write a masked objective as text: header ``p n m_obs``, then
    ``row col value`` lines with 1-based indices."""
    if not isinstance(obj, MaskedLeastSquares):
        raise TypeError("mask files hold MaskedLeastSquares objectives")
    lines = [f"{obj.shape[0]} {obj.shape[1]} {obj.n_observed}"]
    for i, j, v in zip(obj.rows, obj.cols, obj.values):
        lines.append(f"{i + 1} {j + 1} {repr(float(v))}")
    linalg.atomic_write_text(path, "\n".join(lines) + "\n")


def load_mask_file(path):
    """Read a mask file written by :func:`save_mask_file`."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise ValueError(f"{path}: expected 'p n m_obs' header")
        p, n, m_obs = (int(v) for v in header)
        rows, cols, values = [], [], []
        for line in fh:
            if not line.strip():
                continue
            i, j, v = line.split()
            rows.append(int(i) - 1)
            cols.append(int(j) - 1)
            values.append(float(v))
    if len(values) != m_obs:
        raise ValueError(f"{path}: header says {m_obs} observations, found {len(values)}")
    return MaskedLeastSquares(rows, cols, values, (p, n))
