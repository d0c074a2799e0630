"""Dense linear-algebra kernels and the plain-text matrix format.

Everything here is desk scale (dimensions up to a few thousand) and dense.
Kernels are deterministic: same inputs give bitwise-identical outputs.
"""

import os
import tempfile

import numpy as np

__all__ = [
    "extreme_eigs_sym",
    "truncated_svd",
    "solve_restricted_ls",
    "save_matrix",
    "load_matrix",
    "save_vector",
    "load_vector",
    "atomic_write_text",
]


def _as_finite_array(M, name):
    M = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} contains non-finite entries")
    return M


def extreme_eigs_sym(M, tol=1e-8):
    """Smallest and largest eigenvalue of a symmetric matrix.

    Args:
        M: square symmetric matrix (symmetric within ``tol`` relative to its
           largest entry).
        tol: symmetry tolerance.

    Returns:
        ``(lambda_min, lambda_max)``.
    """
    M = _as_finite_array(M, "M")
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise ValueError("M must be a square matrix with dimension >= 1")
    scale = max(1.0, float(np.max(np.abs(M))))
    if np.max(np.abs(M - M.T)) > tol * scale:
        raise ValueError("M is not symmetric within tolerance")
    w = np.linalg.eigvalsh(0.5 * (M + M.T))
    return float(w[0]), float(w[-1])


def truncated_svd(M, r):
    """Best rank-``r`` approximation factors of ``M``.

    Returns ``(U, s, V)`` with ``U`` of shape ``(rows, r)``, ``s`` the top
    ``r`` singular values in descending order and ``V`` of shape
    ``(cols, r)``, so that ``U @ diag(s) @ V.T`` is the closest rank-r matrix
    in Frobenius norm.
    """
    M = _as_finite_array(M, "M")
    if M.ndim != 2:
        raise ValueError("M must be a 2-d matrix")
    if not 1 <= r <= min(M.shape):
        raise ValueError(f"rank r={r} out of range for shape {M.shape}")
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    return U[:, :r], s[:r], Vt[:r].T


def solve_restricted_ls(Phi, b, support):
    """Least-squares solve restricted to a column subset.

    Minimizes ``0.5 * ||b - Phi @ x||^2`` over vectors supported on
    ``support`` (a sequence of column indices).  The selected columns must be
    linearly independent.  An empty support returns the zero vector.
    """
    Phi = _as_finite_array(Phi, "Phi")
    b = _as_finite_array(b, "b")
    idx = np.asarray(sorted(set(int(i) for i in support)), dtype=int)
    x = np.zeros(Phi.shape[1])
    if idx.size == 0:
        return x
    if idx[0] < 0 or idx[-1] >= Phi.shape[1]:
        raise ValueError("support index out of range")
    sub = Phi[:, idx]
    coef, _, rank, _ = np.linalg.lstsq(sub, b, rcond=None)
    if rank < idx.size:
        raise np.linalg.LinAlgError("restricted submatrix is rank deficient")
    x[idx] = coef
    return x


def atomic_write_text(path, text):
    """Write ``text`` to ``path`` via a temp file and rename (no partial files)."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_matrix(path, M):
    """Save a matrix as text: first line ``rows cols``, one row per line."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    lines = [f"{M.shape[0]} {M.shape[1]}"]
    for row in M:
        lines.append(" ".join(repr(float(v)) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_matrix(path):
    """Load a matrix written by :func:`save_matrix`."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: expected 'rows cols' header")
        rows, cols = int(header[0]), int(header[1])
        data = np.loadtxt(fh, ndmin=2)
    if data.shape != (rows, cols):
        raise ValueError(
            f"{path}: header says {rows}x{cols}, body is {data.shape[0]}x{data.shape[1]}"
        )
    return data


def save_vector(path, v):
    """Save a vector as an ``n x 1`` matrix in the text format."""
    v = np.asarray(v, dtype=float).ravel()
    save_matrix(path, v.reshape(-1, 1))


def load_vector(path):
    """Load a vector stored as a one-column (or one-row) matrix."""
    M = load_matrix(path)
    if 1 not in M.shape:
        raise ValueError(f"{path}: not a vector (shape {M.shape})")
    return M.ravel()
