"""Reproducible synthetic problem generators and recovery metrics.

Randomness policy: every generator seeds a ``numpy.random.SeedSequence`` and
spawns one independent PCG64 stream per logical draw (design matrix, planted
signal, noise, splits), so instances are bit-identical given the seed and a
change to one ingredient never perturbs the others.
"""

import json
import os
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from . import linalg, models, objectives

__all__ = [
    "ProblemInstance",
    "MetricsReport",
    "gen_iid_gaussian",
    "gen_ar1",
    "gen_matrix_completion",
    "evaluate",
    "support_auc",
    "save_instance",
    "load_instance",
]


@dataclass
class ProblemInstance:
    """A generated problem: objective + structure model (+ planted truth)."""

    objective: object
    model: object
    truth: np.ndarray | None
    noise: np.ndarray | None
    seed: int
    descriptor: dict


@dataclass
class MetricsReport:
    """Recovery metrics; fields are None when not applicable."""

    r2_test: float | None
    support_auc: float | None
    train_loglik: float
    exact_support_match: bool | None
    relative_error: float


def _streams(seed, count):
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(seed).spawn(count)]


def _planted_sparse(rng, n, k):
    support = np.sort(rng.choice(n, size=k, replace=False))
    x = np.zeros(n)
    x[support] = rng.standard_normal(k)
    x /= np.linalg.norm(x)
    return x


def gen_iid_gaussian(n, m, k, noise_sigma=0.0, seed=0):
    """Standard-normal design, unit-norm k-sparse truth, b = Phi x + sigma w."""
    if not (1 <= k <= n and m >= 1):
        raise ValueError("need 1 <= k <= n and m >= 1")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be nonnegative")
    phi_rng, sig_rng, noise_rng = _streams(seed, 3)
    Phi = phi_rng.standard_normal((m, n))
    x_star = _planted_sparse(sig_rng, n, k)
    eps = noise_sigma * noise_rng.standard_normal(m) if noise_sigma > 0 else None
    b = Phi @ x_star + (eps if eps is not None else 0.0)
    return ProblemInstance(
        objective=objectives.LeastSquares(Phi, b),
        model=models.Sparsity(k),
        truth=x_star,
        noise=eps,
        seed=seed,
        descriptor={
            "generator": "iid-gaussian",
            "params": {"n": n, "m": m, "k": k, "noise_sigma": noise_sigma},
            "seed": seed,
        },
    )


def gen_ar1(n=200, m_total=800, k=20, rho=0.4, snr=10.0, seed=0):
    """Correlated design split 50-50 into train and test instances.

    Rows follow a first-order autoregressive process:
    ``row[j] = rho * row[j-1] + sqrt(1 - rho^2) * fresh normal``; columns are
    then normalized to unit l2 norm over all ``m_total`` rows.  The noise is
    rescaled so that ``||Phi x_star||^2 / ||eps||^2`` equals ``snr`` exactly.
    """
    if not (1 <= k <= n and m_total >= 2):
        raise ValueError("need 1 <= k <= n and m_total >= 2")
    if not (0 <= rho < 1) or snr <= 0:
        raise ValueError("need 0 <= rho < 1 and snr > 0")
    phi_rng, sig_rng, noise_rng, split_rng = _streams(seed, 4)
    Z = phi_rng.standard_normal((m_total, n))
    Phi = np.empty((m_total, n))
    Phi[:, 0] = Z[:, 0]
    for j in range(1, n):
        Phi[:, j] = rho * Phi[:, j - 1] + np.sqrt(1.0 - rho**2) * Z[:, j]
    Phi /= np.linalg.norm(Phi, axis=0)
    x_star = _planted_sparse(sig_rng, n, k)
    raw = noise_rng.standard_normal(m_total)
    signal_energy = float(np.linalg.norm(Phi @ x_star))
    eps = raw * (signal_energy / (np.sqrt(snr) * np.linalg.norm(raw)))
    perm = split_rng.permutation(m_total)
    half = m_total // 2
    params = {"n": n, "m_total": m_total, "k": k, "rho": rho, "snr": snr}

    def make(rows, role):
        # b is assembled per split so b = Phi x_star + eps holds bit-exactly
        # on each instance's own design matrix
        Phi_rows = Phi[rows]
        return ProblemInstance(
            objective=objectives.LeastSquares(Phi_rows, Phi_rows @ x_star + eps[rows]),
            model=models.Sparsity(k),
            truth=x_star,
            noise=eps[rows],
            seed=seed,
            descriptor={"generator": "ar1", "params": params, "seed": seed, "role": role},
        )

    return make(np.sort(perm[:half]), "train"), make(np.sort(perm[half:]), "test")


def gen_matrix_completion(p, n, r, observe_frac, seed=0):
    """Rank-r planted matrix observed on a uniform random entry subset."""
    if not 1 <= r <= min(p, n):
        raise ValueError("need 1 <= r <= min(p, n)")
    if not 0 < observe_frac <= 1:
        raise ValueError("observe_frac must be in (0, 1]")
    factor_rng, mask_rng = _streams(seed, 2)
    X_star = factor_rng.standard_normal((p, r)) @ factor_rng.standard_normal((r, n))
    m_obs = int(observe_frac * p * n)
    pos = np.sort(mask_rng.choice(p * n, size=m_obs, replace=False))
    rows, cols = np.unravel_index(pos, (p, n))
    return ProblemInstance(
        objective=objectives.MaskedLeastSquares(rows, cols, X_star[rows, cols], (p, n)),
        model=models.LowRank(r, p, n),
        truth=X_star,
        noise=None,
        seed=seed,
        descriptor={
            "generator": "matrix-completion",
            "params": {"p": p, "n": n, "r": r, "observe_frac": observe_frac},
            "seed": seed,
        },
    )


def support_auc(scores, truth_indicator):
    """Probability a true-support entry outscores an off-support entry
    (ties count half), i.e. the ranking AUC of ``scores`` against the
    indicator."""
    scores = np.asarray(scores, dtype=float).ravel()
    truth_indicator = np.asarray(truth_indicator, dtype=bool).ravel()
    n_pos = int(truth_indicator.sum())
    n_neg = truth_indicator.size - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = rankdata(scores)  # average ranks on ties
    return float((ranks[truth_indicator].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def _gaussian_loglik(sse, count):
    sigma2 = max(sse, 1e-300) / count
    return -0.5 * count * (np.log(2.0 * np.pi * sigma2) + 1.0)


def _train_loglik(obj, x):
    if isinstance(obj, objectives.LeastSquares):
        return _gaussian_loglik(2.0 * obj.value(x), obj.b.size)
    if isinstance(obj, objectives.MaskedLeastSquares):
        return _gaussian_loglik(2.0 * obj.value(x), obj.n_observed)
    if isinstance(obj, objectives.LogisticL2):
        x = np.asarray(x, dtype=float)
        return -(obj.value(x) - 0.5 * obj.lam * float(x @ x))
    raise TypeError(f"no likelihood defined for {type(obj).__name__}")


def evaluate(trace, instance, test=None):
    """Score a solver result against the planted truth.

    ``trace`` may be a SolverTrace or a bare estimate array.  Support metrics
    (AUC, exact match) apply to vector signals; ``r2_test`` needs a held-out
    ``test`` instance with a least-squares objective.
    """
    x_hat = trace.final if hasattr(trace, "final") else np.asarray(trace, dtype=float)
    x_star = instance.truth
    if x_star is None:
        raise ValueError("instance has no planted truth; recovery metrics undefined")
    truth_norm = float(np.linalg.norm(x_star))
    if truth_norm == 0:
        raise ValueError("planted truth is zero; relative error undefined")
    relative_error = float(np.linalg.norm(x_hat - x_star)) / truth_norm

    auc = match = None
    if x_star.ndim == 1:
        truth_support = x_star != 0
        auc = support_auc(np.abs(x_hat), truth_support)
        match = bool(np.array_equal(np.nonzero(x_hat)[0], np.nonzero(x_star)[0]))

    r2 = None
    if test is not None:
        if not isinstance(test.objective, objectives.LeastSquares):
            raise ValueError("r2_test needs a least-squares test instance")
        resid = test.objective.residual(x_hat)
        centered = test.objective.b - test.objective.b.mean()
        r2 = 1.0 - float(resid @ resid) / float(centered @ centered)

    return MetricsReport(
        r2_test=r2,
        support_auc=auc,
        train_loglik=float(_train_loglik(instance.objective, x_hat)),
        exact_support_match=match,
        relative_error=relative_error,
    )


def _model_to_dict(model):
    if isinstance(model, models.Sparsity):
        return {"variant": "sparse", "k": model.k}
    if isinstance(model, models.BlockSparsity):
        # groups are 1-based on disk
        return {
            "variant": "block",
            "k": model.k,
            "groups": [[i + 1 for i in g] for g in model.groups],
        }
    if isinstance(model, models.LowRank):
        return {"variant": "low-rank", "r": model.r, "rows": model.rows, "cols": model.cols}
    raise TypeError(f"unknown structure model {type(model).__name__}")


def _model_from_dict(d):
    if d["variant"] == "sparse":
        return models.Sparsity(d["k"])
    if d["variant"] == "block":
        return models.BlockSparsity(tuple(tuple(i - 1 for i in g) for g in d["groups"]), d["k"])
    if d["variant"] == "low-rank":
        return models.LowRank(d["r"], d["rows"], d["cols"])
    raise ValueError(f"unknown model variant {d['variant']!r}")


def save_instance(directory, instance):
    """Write an instance as a directory of text matrices plus descriptor.json."""
    os.makedirs(directory, exist_ok=True)
    obj = instance.objective
    meta = {
        "descriptor": instance.descriptor,
        "seed": instance.seed,
        "model": _model_to_dict(instance.model),
        "has_truth": instance.truth is not None,
        "has_noise": instance.noise is not None,
    }
    if isinstance(obj, objectives.LeastSquares):
        meta["objective"] = "least-squares"
        linalg.save_matrix(os.path.join(directory, "phi.txt"), obj.Phi)
        linalg.save_vector(os.path.join(directory, "b.txt"), obj.b)
    elif isinstance(obj, objectives.MaskedLeastSquares):
        meta["objective"] = "masked-least-squares"
        objectives.save_mask_file(os.path.join(directory, "mask.txt"), obj)
    else:
        raise TypeError(f"cannot save objective of type {type(obj).__name__}")
    if instance.truth is not None:
        t = instance.truth
        if t.ndim == 1:
            linalg.save_vector(os.path.join(directory, "x_star.txt"), t)
        else:
            linalg.save_matrix(os.path.join(directory, "x_star.txt"), t)
    if instance.noise is not None:
        linalg.save_vector(os.path.join(directory, "noise.txt"), instance.noise)
    linalg.atomic_write_text(os.path.join(directory, "descriptor.json"), json.dumps(meta, indent=2) + "\n")


def load_instance(directory):
    """Inverse of :func:`save_instance`."""
    with open(os.path.join(directory, "descriptor.json")) as fh:
        meta = json.load(fh)
    model = _model_from_dict(meta["model"])
    if meta["objective"] == "least-squares":
        obj = objectives.LeastSquares(
            linalg.load_matrix(os.path.join(directory, "phi.txt")),
            linalg.load_vector(os.path.join(directory, "b.txt")),
        )
    elif meta["objective"] == "masked-least-squares":
        obj = objectives.load_mask_file(os.path.join(directory, "mask.txt"))
    else:
        raise ValueError(f"unknown objective kind {meta['objective']!r}")
    truth = noise = None
    if meta["has_truth"]:
        path = os.path.join(directory, "x_star.txt")
        truth = linalg.load_vector(path) if isinstance(model, (models.Sparsity, models.BlockSparsity)) else linalg.load_matrix(path)
    if meta["has_noise"]:
        noise = linalg.load_vector(os.path.join(directory, "noise.txt"))
    return ProblemInstance(
        objective=obj,
        model=model,
        truth=truth,
        noise=noise,
        seed=meta["seed"],
        descriptor=meta["descriptor"],
    )
