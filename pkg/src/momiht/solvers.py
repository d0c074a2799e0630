"""Hard-thresholding solvers with optional momentum.

The accelerated iteration keeps two sequences: the feasible estimates
``x_i`` and the momentum points ``u_i = x_i + tau * (x_i - x_{i-1})``.  Each
step explores the gradient outside the current active set, restricts the
gradient to the expanded set, takes a gradient step and projects back onto
the model:

    T_i   = supp(project(gradient outside supp(u_i))) union supp(u_i)
    ubar  = u_i - mu * gradient restricted to T_i
    x_new = project(ubar)            [optional debias on its support]
    u_new = x_new + tau * (x_new - x_i)

Starting point is x_0 = u_0 = 0 (with the convention x_{-1} = x_0), and the
loop stops once ``||x_i - x_{i-1}|| <= eta * ||x_i||`` or after ``max_iter``
iterations.  Plain IHT is the tau = 0 special case.

Cardinality bookkeeping: estimates are k-atom feasible, momentum points span
at most 2k atoms, expanded sets at most 3k.
"""

import csv
import dataclasses
import io
import json
import time
import warnings
from dataclasses import dataclass

import numpy as np

from . import analysis, linalg, models, objectives

__all__ = [
    "SolverConfig",
    "IterationRecord",
    "SolverTrace",
    "support_expansion",
    "acc_iht",
    "iht",
    "debias",
    "line_search_tau",
    "save_trace_csv",
    "load_trace_csv",
    "save_trace_json",
]

# A run is declared divergent once the objective exceeds this multiple of
# its starting value (or turns non-finite).
_DIVERGENCE_FACTOR = 1e12


@dataclass(frozen=True)
class SolverConfig:
    """Knobs of one solver run.

    ``k`` overrides the model's atom budget when set (e.g. an overshot
    sparsity estimate); ``mu`` is a positive step size, ``"auto"`` (least
    squares only: ``1 / lambda_max(Phi^T Phi)``) or ``"line-search"``
    (quadratic objectives: exact minimizing step along the restricted
    gradient).
    """

    k: int | None = None
    tau: float = 0.25
    mu: float | str = "auto"
    eta: float = 1e-7
    max_iter: int = 10000
    debias: bool = False

    def __post_init__(self):
        if self.k is not None and self.k < 1:
            raise ValueError("budget k must be >= 1")
        if not np.isfinite(self.tau):
            raise ValueError("tau must be finite")
        if isinstance(self.mu, str):
            if self.mu not in ("auto", "line-search"):
                raise ValueError(f"mu must be positive, 'auto' or 'line-search', got {self.mu!r}")
        elif not (np.isfinite(self.mu) and self.mu > 0):
            raise ValueError("numeric mu must be positive")
        if not self.eta > 0:
            raise ValueError("eta must be > 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass
class IterationRecord:
    x: np.ndarray
    support: object
    f_value: float
    step_norm: float  # nan for the initial record
    dist_to_truth: float | None


@dataclass
class SolverTrace:
    """Everything one solver run produced, in iteration order."""

    records: list
    termination: str  # "tolerance" | "max_iterations" | "diverged"
    wall_time: float
    config: SolverConfig
    mu: float | str

    @property
    def iterations(self):
        """Number of gradient steps taken (the initial state is record 0)."""
        return len(self.records) - 1

    @property
    def diverged(self):
        return self.termination == "diverged"

    @property
    def final(self):
        return self.records[-1].x

    @property
    def f_values(self):
        return np.array([r.f_value for r in self.records])

    @property
    def step_norms(self):
        return np.array([r.step_norm for r in self.records])

    @property
    def dists_to_truth(self):
        if self.records[0].dist_to_truth is None:
            return None
        return np.array([r.dist_to_truth for r in self.records])


def support_expansion(u, obj, model, U):
    """Expanded active set: best-budget atoms of the gradient outside ``U``,
    unioned with ``U`` itself.

    ``U`` must span at most twice the model budget, so the result spans at
    most three times the budget.
    """
    g = obj.gradient(u)
    outside = models.complement_restrict(g, U)
    fresh = models.support_of(outside, model)
    expanded = models.union(fresh, U)
    assert models.support_size(expanded) <= 3 * models.budget_of(model)
    return expanded


def _resolve_budget_model(obj, model, config):
    budget = config.k if config.k is not None else models.budget_of(model)
    solver_model = models.with_budget(model, budget)
    zero = np.zeros(obj.signal_shape)
    models._check_shape(zero, solver_model)  # validates budget against the signal
    return solver_model


def _constant_mu(obj, config):
    if isinstance(config.mu, float) or isinstance(config.mu, int):
        return float(config.mu)
    if config.mu == "auto":
        if not isinstance(obj, objectives.LeastSquares):
            raise ValueError("mu='auto' needs a LeastSquares objective; pass a numeric step size")
        return 1.0 / analysis.rip_surrogate(obj.Phi)
    return None  # line-search resolves per iteration


def _line_search_mu(obj, g):
    """Exact minimizing step along ``-g`` for quadratic objectives."""
    if isinstance(obj, objectives.LeastSquares):
        Ag = obj.Phi @ g
    elif isinstance(obj, objectives.MaskedLeastSquares):
        Ag = obj.apply_mask(g)
    else:
        raise ValueError("mu='line-search' needs a (masked) least-squares objective")
    num = float(np.sum(g * g))
    den = float(Ag @ Ag)
    if den <= 1e-300 * max(num, 1.0):
        # direction invisible to the data term; any step is as good
        return 1.0
    return num / den


def acc_iht(obj, model, config, truth=None):
    """Run the momentum hard-thresholding iteration; returns a SolverTrace.

    ``truth`` (the planted signal, if known) only adds a distance column to
    the trace.  A run whose objective blows past 1e12 times its initial
    value (or turns non-finite) is cut off and marked ``"diverged"``; the
    partial trace is preserved.
    """
    solver_model = _resolve_budget_model(obj, model, config)
    budget = models.budget_of(solver_model)
    mu_const = _constant_mu(obj, config)
    tau = config.tau

    def dist(x):
        return float(np.linalg.norm(x - truth)) if truth is not None else None

    start = time.perf_counter()
    x = np.zeros(obj.signal_shape)
    u = x.copy()
    U = models.empty_support(solver_model)
    f0 = obj.value(x)
    records = [
        IterationRecord(
            x=x.copy(),
            support=models.support_of(x, solver_model),
            f_value=f0,
            step_norm=float("nan"),
            dist_to_truth=dist(x),
        )
    ]
    termination = "max_iterations"
    for _ in range(config.max_iter):
        expanded = support_expansion(u, obj, solver_model, U)
        g = objectives.gradient_restricted(obj, u, expanded)
        mu = mu_const if mu_const is not None else _line_search_mu(obj, g)
        x_new = models.project(u - mu * g, solver_model)
        if config.debias:
            x_new = debias(x_new, obj)
        f_new = obj.value(x_new)
        step = float(np.linalg.norm(x_new - x))
        records.append(
            IterationRecord(
                x=x_new.copy(),
                support=models.support_of(x_new, solver_model),
                f_value=f_new,
                step_norm=step,
                dist_to_truth=dist(x_new),
            )
        )
        if not np.isfinite(f_new) or f_new > _DIVERGENCE_FACTOR * (1.0 + f0):
            termination = "diverged"
            break
        u = x_new + tau * (x_new - x)
        U = models.active_support(u, solver_model)
        assert models.support_size(U) <= 2 * budget
        x = x_new
        if step <= config.eta * float(np.linalg.norm(x_new)):
            termination = "tolerance"
            break
    return SolverTrace(
        records=records,
        termination=termination,
        wall_time=time.perf_counter() - start,
        config=config,
        mu=mu_const if mu_const is not None else "line-search",
    )


def iht(obj, model, config, truth=None):
    """Plain hard-thresholding iteration: the zero-momentum special case."""
    return acc_iht(obj, model, dataclasses.replace(config, tau=0.0), truth=truth)


def debias(x, obj):
    """Least-squares refit of ``x`` restricted to its own support.

    Never increases the objective and never changes the support.  If the
    restricted system is rank deficient the input is returned unchanged
    (with a warning).
    """
    x = np.asarray(x, dtype=float)
    if isinstance(obj, objectives.LeastSquares):
        idx = np.nonzero(x)[0]
        if idx.size == 0:
            return x.copy()
        try:
            return linalg.solve_restricted_ls(obj.Phi, obj.b, idx)
        except np.linalg.LinAlgError:
            warnings.warn("debias skipped: restricted columns are rank deficient")
            return x.copy()
    if isinstance(obj, objectives.MaskedLeastSquares):
        return _debias_masked(x, obj)
    raise ValueError("debias needs a (masked) least-squares objective")


def _debias_masked(X, obj):
    # Refit the core of X = L C R^T over the observed entries, keeping the
    # active row/column spaces of X fixed.
    U, s, Vt = np.linalg.svd(X, full_matrices=False)
    rank = int(np.sum(s > 1e-10 * s[0])) if s.size and s[0] > 0 else 0
    if rank == 0:
        return X.copy()
    L, R = U[:, :rank], Vt[:rank].T
    design = L[obj.rows, :][:, :, None] * R[obj.cols, :][:, None, :]
    design = design.reshape(obj.n_observed, rank * rank)
    core, _, drank, _ = np.linalg.lstsq(design, obj.values, rcond=None)
    if drank < rank * rank:
        warnings.warn("debias skipped: observed entries underdetermine the core")
        return X.copy()
    return L @ core.reshape(rank, rank) @ R.T


def line_search_tau(ls, x_new, x_old):
    """Momentum weight minimizing the residual along ``x_new - x_old``.

    For the extrapolation ``v = x_new + tau * (x_new - x_old)`` the
    least-squares residual is quadratic in tau with unconstrained minimizer

        tau* = <b - Phi x_new, Phi (x_new - x_old)> / ||Phi (x_new - x_old)||^2.
    """
    if not isinstance(ls, objectives.LeastSquares):
        raise TypeError("line_search_tau is defined for LeastSquares objectives")
    d = np.asarray(x_new, dtype=float) - np.asarray(x_old, dtype=float)
    Ad = ls.Phi @ d
    den = float(Ad @ Ad)
    if den == 0.0:
        raise ValueError("direction has no range-space component (Phi (x_new - x_old) = 0)")
    return float(ls.residual(x_new) @ Ad) / den


def _support_to_text(support):
    # 1-based on disk, matching the other text formats.
    if isinstance(support, models.EntrySupport):
        return ";".join(str(i + 1) for i in support.indices)
    if isinstance(support, models.GroupSupport):
        return ";".join(str(g + 1) for g in support.groups)
    return ""  # subspace supports have no index representation


def _record_rows(trace):
    for i, r in enumerate(trace.records):
        yield {
            "iter": i,
            "f_value": r.f_value,
            "step_norm": None if np.isnan(r.step_norm) else r.step_norm,
            "dist_to_truth": r.dist_to_truth,
            "support": _support_to_text(r.support),
        }


def save_trace_csv(path, trace):
    """Write the per-iteration trace as CSV.

    Columns: iter, f_value, step_norm, dist_to_truth (empty when unknown),
    support (semicolon-joined 1-based indices; empty for subspace supports).
    """
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["iter", "f_value", "step_norm", "dist_to_truth", "support"])
    for row in _record_rows(trace):
        writer.writerow(
            [
                row["iter"],
                repr(row["f_value"]),
                "" if row["step_norm"] is None else repr(row["step_norm"]),
                "" if row["dist_to_truth"] is None else repr(row["dist_to_truth"]),
                row["support"],
            ]
        )
    linalg.atomic_write_text(path, buf.getvalue())


def load_trace_csv(path):
    """Parse a trace CSV back into a list of row dicts (0-based supports)."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            support = rec["support"]
            rows.append(
                {
                    "iter": int(rec["iter"]),
                    "f_value": float(rec["f_value"]),
                    "step_norm": float(rec["step_norm"]) if rec["step_norm"] else None,
                    "dist_to_truth": float(rec["dist_to_truth"]) if rec["dist_to_truth"] else None,
                    "support": tuple(int(t) - 1 for t in support.split(";")) if support else (),
                }
            )
    return rows


def save_trace_json(path, trace):
    """JSON mirror of the CSV trace with the config echoed back."""
    payload = {
        "config": dataclasses.asdict(trace.config),
        "mu": trace.mu,
        "termination": trace.termination,
        "wall_time": trace.wall_time,
        "iterations": trace.iterations,
        "records": list(_record_rows(trace)),
    }
    linalg.atomic_write_text(path, json.dumps(payload, indent=2) + "\n")
