"""Structure models and their exact projections.

Three families of structured signals are supported, each with a budget on
the number of active atoms:

* ``Sparsity(k)``        -- vectors with at most k nonzero entries,
* ``BlockSparsity(groups, k)`` -- vectors with at most k active groups out of
  a non-overlapping partition of the coordinates,
* ``LowRank(r, rows, cols)``   -- matrices with rank at most r.

``project`` is the exact Euclidean projection onto the model (top-k
magnitudes / top-k group energies / truncated SVD).  Supports identify which
atoms a projection selected; for matrices a support is an explicit pair of
orthonormal bases since index sets do not exist for subspaces.

Ties in magnitudes or group energies are broken toward the lowest index so
every operation is deterministic.
"""

from dataclasses import dataclass

import numpy as np

from . import linalg

__all__ = [
    "Sparsity",
    "BlockSparsity",
    "LowRank",
    "EntrySupport",
    "GroupSupport",
    "SubspaceSupport",
    "budget_of",
    "with_budget",
    "project",
    "support_of",
    "active_support",
    "empty_support",
    "restrict",
    "complement_restrict",
    "union",
    "support_size",
]

# Relative singular-value cutoff used when inferring the active subspace of
# a matrix and when re-orthonormalizing basis unions.
_RANK_TOL = 1e-10


@dataclass(frozen=True)
class Sparsity:
    """Plain sparsity: at most ``k`` nonzero entries."""

    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("sparsity budget k must be >= 1")


@dataclass(frozen=True)
class BlockSparsity:
    """Non-overlapping group sparsity: at most ``k`` active groups.

    ``groups`` must partition ``range(n)`` where ``n`` is the signal length.
    """

    groups: tuple
    k: int

    def __post_init__(self):
        groups = tuple(tuple(int(i) for i in g) for g in self.groups)
        object.__setattr__(self, "groups", groups)
        if not groups or any(len(g) == 0 for g in groups):
            raise ValueError("groups must be non-empty")
        flat = sorted(i for g in groups for i in g)
        n = len(flat)
        if flat != list(range(n)):
            raise ValueError("groups must be non-overlapping and cover range(n)")
        if not 1 <= self.k <= len(groups):
            raise ValueError("block budget k must be in [1, number of groups]")

    @property
    def n(self):
        return sum(len(g) for g in self.groups)


@dataclass(frozen=True)
class LowRank:
    """Low-rankness: matrices of shape ``(rows, cols)`` with rank <= ``r``."""

    r: int
    rows: int
    cols: int

    def __post_init__(self):
        if not 1 <= self.r <= min(self.rows, self.cols):
            raise ValueError("rank budget r must be in [1, min(rows, cols)]")


@dataclass(frozen=True)
class EntrySupport:
    """Atom indices of a plain-sparse vector (sorted, 0-based)."""

    indices: tuple

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(sorted(int(i) for i in set(self.indices))))


@dataclass(frozen=True)
class GroupSupport:
    """Active group ids plus the member entry indices they cover."""

    groups: tuple
    entries: tuple

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(sorted(int(g) for g in set(self.groups))))
        object.__setattr__(self, "entries", tuple(sorted(int(i) for i in set(self.entries))))


@dataclass(eq=False)
class SubspaceSupport:
    """Orthonormal left/right bases spanning the active matrix subspace."""

    left: np.ndarray
    right: np.ndarray

    def __post_init__(self):
        self.left = np.asarray(self.left, dtype=float)
        self.right = np.asarray(self.right, dtype=float)
        for name, B in (("left", self.left), ("right", self.right)):
            if B.ndim != 2:
                raise ValueError(f"{name} basis must be 2-d")
            if B.shape[1] and np.max(np.abs(B.T @ B - np.eye(B.shape[1]))) > 1e-8:
                raise ValueError(f"{name} basis columns are not orthonormal")


def budget_of(model):
    """Number of atoms the model allows."""
    if isinstance(model, (Sparsity, BlockSparsity)):
        return model.k
    if isinstance(model, LowRank):
        return model.r
    raise TypeError(f"unknown structure model {type(model).__name__}")


def with_budget(model, k):
    """Copy of ``model`` with its atom budget replaced by ``k``."""
    if isinstance(model, Sparsity):
        return Sparsity(k)
    if isinstance(model, BlockSparsity):
        return BlockSparsity(model.groups, k)
    if isinstance(model, LowRank):
        return LowRank(k, model.rows, model.cols)
    raise TypeError(f"unknown structure model {type(model).__name__}")


def _check_shape(x, model):
    x = np.asarray(x, dtype=float)
    if isinstance(model, Sparsity):
        if x.ndim != 1:
            raise ValueError("Sparsity expects a 1-d signal")
        if model.k > x.size:
            raise ValueError(f"budget k={model.k} exceeds signal length {x.size}")
    elif isinstance(model, BlockSparsity):
        if x.ndim != 1 or x.size != model.n:
            raise ValueError(f"BlockSparsity expects a 1-d signal of length {model.n}")
    elif isinstance(model, LowRank):
        if x.shape != (model.rows, model.cols):
            raise ValueError(f"LowRank expects shape {(model.rows, model.cols)}, got {x.shape}")
    else:
        raise TypeError(f"unknown structure model {type(model).__name__}")
    return x


def _top_k(values, k):
    # Stable sort on -|v| keeps the lowest index first among ties.
    order = np.argsort(-np.abs(values), kind="stable")
    return np.sort(order[:k])


def _group_energies(x, model):
    return np.array([float(np.dot(x[list(g)], x[list(g)])) for g in model.groups])


def project(x, model):
    """Exact Euclidean projection of ``x`` onto the model's constraint set."""
    x = _check_shape(x, model)
    if isinstance(model, Sparsity):
        keep = _top_k(x, model.k)
        out = np.zeros_like(x)
        out[keep] = x[keep]
        return out
    if isinstance(model, BlockSparsity):
        keep = _top_k(np.sqrt(_group_energies(x, model)), model.k)
        out = np.zeros_like(x)
        for g in keep:
            members = list(model.groups[g])
            out[members] = x[members]
        return out
    U, s, V = linalg.truncated_svd(x, model.r)
    return U @ (s[:, None] * V.T)


def support_of(x, model):
    """Support selected by projecting ``x``: exactly ``budget`` atoms.

    Ties (including all-zero signals) resolve to the lowest indices, so the
    result is deterministic and always has full budget cardinality.
    """
    x = _check_shape(x, model)
    if isinstance(model, Sparsity):
        return EntrySupport(_top_k(x, model.k))
    if isinstance(model, BlockSparsity):
        gids = _top_k(np.sqrt(_group_energies(x, model)), model.k)
        entries = [i for g in gids for i in model.groups[g]]
        return GroupSupport(gids, entries)
    U, s, V = linalg.truncated_svd(x, model.r)
    return SubspaceSupport(U, V)


def active_support(x, model):
    """Atoms actually present in ``x`` (no padding to the budget).

    Sparse: nonzero entries.  Block: groups with nonzero energy.  Low rank:
    singular subspace above a relative cutoff.  The result may be smaller or
    larger than the model budget; it describes ``x`` itself.
    """
    x = _check_shape(x, model)
    if isinstance(model, Sparsity):
        return EntrySupport(np.nonzero(x)[0])
    if isinstance(model, BlockSparsity):
        gids = [g for g, members in enumerate(model.groups) if np.any(x[list(members)] != 0.0)]
        entries = [i for g in gids for i in model.groups[g]]
        return GroupSupport(gids, entries)
    U, s, Vt = np.linalg.svd(x, full_matrices=False)
    rank = int(np.sum(s > _RANK_TOL * s[0])) if s.size and s[0] > 0 else 0
    return SubspaceSupport(U[:, :rank], Vt[:rank].T)


def empty_support(model):
    if isinstance(model, Sparsity):
        return EntrySupport(())
    if isinstance(model, BlockSparsity):
        return GroupSupport((), ())
    if isinstance(model, LowRank):
        return SubspaceSupport(np.zeros((model.rows, 0)), np.zeros((model.cols, 0)))
    raise TypeError(f"unknown structure model {type(model).__name__}")


def restrict(x, support):
    """Zero the part of ``x`` outside ``support``; keep the rest unchanged.

    For subspace supports this is the two-sided projection
    ``P_left @ x @ P_right``.
    """
    x = np.asarray(x, dtype=float)
    if isinstance(support, EntrySupport):
        idx = list(support.indices)
        if idx and (idx[0] < 0 or idx[-1] >= x.size):
            raise IndexError("support index out of range")
        out = np.zeros_like(x)
        out[idx] = x[idx]
        return out
    if isinstance(support, GroupSupport):
        idx = list(support.entries)
        if idx and (idx[0] < 0 or idx[-1] >= x.size):
            raise IndexError("support index out of range")
        out = np.zeros_like(x)
        out[idx] = x[idx]
        return out
    if isinstance(support, SubspaceSupport):
        L, R = support.left, support.right
        if x.ndim != 2 or x.shape[0] != L.shape[0] or x.shape[1] != R.shape[0]:
            raise ValueError("signal shape does not match subspace support")
        if L.shape[1] == 0 or R.shape[1] == 0:
            return np.zeros_like(x)
        return L @ (L.T @ x @ R) @ R.T
    raise TypeError(f"unknown support {type(support).__name__}")


def complement_restrict(x, support):
    """Part of ``x`` outside ``support`` (``x - restrict(x, support)``)."""
    return np.asarray(x, dtype=float) - restrict(x, support)


def _orth_columns(B):
    if B.shape[1] == 0:
        return B
    U, s, _ = np.linalg.svd(B, full_matrices=False)
    rank = int(np.sum(s > _RANK_TOL * s[0])) if s[0] > 0 else 0
    return U[:, :rank]


def union(a, b):
    """Union of two supports of the same variant.

    Index sets take the set union; subspace pairs are concatenated and
    re-orthonormalized side by side.  Cardinality is at most ``|a| + |b|``.
    """
    if isinstance(a, EntrySupport) and isinstance(b, EntrySupport):
        return EntrySupport(a.indices + b.indices)
    if isinstance(a, GroupSupport) and isinstance(b, GroupSupport):
        return GroupSupport(a.groups + b.groups, a.entries + b.entries)
    if isinstance(a, SubspaceSupport) and isinstance(b, SubspaceSupport):
        left = _orth_columns(np.concatenate([a.left, b.left], axis=1))
        right = _orth_columns(np.concatenate([a.right, b.right], axis=1))
        return SubspaceSupport(left, right)
    raise TypeError(
        f"cannot union supports of different variants: "
        f"{type(a).__name__} and {type(b).__name__}"
    )


def support_size(support):
    """Number of atoms a support spans."""
    if isinstance(support, EntrySupport):
        return len(support.indices)
    if isinstance(support, GroupSupport):
        return len(support.groups)
    if isinstance(support, SubspaceSupport):
        return max(support.left.shape[1], support.right.shape[1])
    raise TypeError(f"unknown support {type(support).__name__}")
