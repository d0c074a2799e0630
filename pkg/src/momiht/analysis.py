"""Convergence analysis for momentum hard-thresholding iterations.

The error dynamics of the solver couple two consecutive distances to the
planted signal.  With restricted condition number ``kappa = beta / alpha``
(ratio of the restricted smoothness and strong-convexity constants at level
3k), define the contraction coefficient

    xi = 2 * (kappa - 1) / (kappa + 1).

Running with momentum ``tau`` and step size ``2 / (alpha + beta)`` gives, per
iteration,

    [e_{i+1}]     [xi*|1+tau|  xi*|tau|] [e_i    ]
    [e_i    ]  <= [1           0       ] [e_{i-1}]   (+ a noise offset),

and everything else here -- eigenvalues, closed-form matrix powers, the
geometric-sum inverse, admissible momentum range, error curves and iteration
counts -- is derived from that 2x2 system.

This module only speaks least squares; the restricted constants are the
generalized RIP of the design matrix, estimated either exactly (subset
enumeration, exponential but fine at desk scale) or through the global
surrogate ``lambda_max(Phi^T Phi)``.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg

__all__ = [
    "GOLDEN_RATIO",
    "RipConstants",
    "ContractionSystem",
    "BoundReport",
    "xi_of",
    "contraction_matrix",
    "matrix_power",
    "tau_range",
    "geometric_sum",
    "error_bound",
    "iteration_bound",
    "rip_exact",
    "rip_surrogate",
    "optimal_mu",
    "estimate_rip",
]

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0

# Relative eigenvalue gap below which the repeated-eigenvalue power formula
# is used; the distinct-eigenvalue formula loses precision as the gap closes.
_EIG_GAP_TOL = 1e-9

# Subset-enumeration guard for exact RIP constants.
_ENUMERATION_BUDGET = 10**6


@dataclass(frozen=True)
class RipConstants:
    """Restricted strong-convexity / smoothness constants per sparsity level.

    ``alpha[s]`` and ``beta[s]`` bound ``||Phi x||^2 / ||x||^2`` from below
    and above over s-sparse vectors.  ``k`` records the atom budget the
    levels refer to (levels 2k and 3k are the ones the theory consumes).
    """

    alpha: dict
    beta: dict
    method: str
    k: int | None = None

    def __post_init__(self):
        if self.method not in ("exact-enumeration", "lambda-max-surrogate", "user-supplied"):
            raise ValueError(f"unknown RIP estimation method {self.method!r}")
        if set(self.alpha) != set(self.beta):
            raise ValueError("alpha and beta must cover the same sparsity levels")
        levels = sorted(self.alpha)
        for s in levels:
            if not 0 < self.alpha[s] <= self.beta[s]:
                raise ValueError(f"need 0 < alpha <= beta at level {s}")
        for lo, hi in zip(levels, levels[1:]):
            if self.alpha[hi] > self.alpha[lo] + 1e-12:
                raise ValueError("alpha must be non-increasing in the sparsity level")
            if self.beta[hi] < self.beta[lo] - 1e-12:
                raise ValueError("beta must be non-decreasing in the sparsity level")

    def kappa(self, level):
        return self.beta[level] / self.alpha[level]


@dataclass(frozen=True)
class ContractionSystem:
    """The 2x2 error-recursion matrix together with its spectrum."""

    xi: float
    tau: float
    A: np.ndarray
    lambda1: float  # |lambda1| >= |lambda2|
    lambda2: float
    delta: float


@dataclass
class BoundReport:
    """Bundle of theoretical guarantees for one (xi, tau) configuration."""

    tau_range: tuple | None
    iteration_bound: int | None
    error_curve: np.ndarray = field(default_factory=lambda: np.zeros(0))
    noise_floor: float = 0.0


def xi_of(kappa):
    """Contraction coefficient ``2 (kappa - 1) / (kappa + 1)`` for kappa > 1."""
    if not np.isfinite(kappa) or kappa <= 1.0:
        raise ValueError("kappa must be a finite number > 1")
    return 2.0 * (kappa - 1.0) / (kappa + 1.0)


def contraction_matrix(xi, tau):
    """Build the coupled error-recursion matrix and its eigenvalues.

    ``A = [[xi*|1+tau|, xi*|tau|], [1, 0]]``.  The discriminant
    ``delta = xi^2 (1+tau)^2 + 4 xi |tau|`` is nonnegative, so both
    eigenvalues are real: ``(xi*|1+tau| +/- sqrt(delta)) / 2``.
    """
    if not (np.isfinite(xi) and np.isfinite(tau)):
        raise ValueError("xi and tau must be finite")
    if xi <= 0:
        raise ValueError("xi must be positive")
    trace = xi * abs(1.0 + tau)
    delta = xi**2 * (1.0 + tau) ** 2 + 4.0 * xi * abs(tau)
    root = math.sqrt(delta)
    lam1 = 0.5 * (trace + root)
    lam2 = 0.5 * (trace - root)
    A = np.array([[trace, xi * abs(tau)], [1.0, 0.0]])
    return ContractionSystem(xi=float(xi), tau=float(tau), A=A, lambda1=lam1, lambda2=lam2, delta=delta)


def matrix_power(A, i):
    """``A**i`` for a 2x2 matrix with real eigenvalues, in closed form.

    Distinct eigenvalues use

        A^i = (l1^i - l2^i)/(l1 - l2) * A  -  l1*l2 * (l1^(i-1) - l2^(i-1))/(l1 - l2) * I,

    a (near-)repeated eigenvalue l uses ``A^i = l^i I + i l^(i-1) (A - l I)``.
    """
    A = np.asarray(A, dtype=float)
    if A.shape != (2, 2):
        raise ValueError("matrix_power handles 2x2 matrices")
    if i < 0:
        raise ValueError("power must be a nonnegative integer")
    if i == 0:
        return np.eye(2)
    if i == 1:
        return A.copy()
    trace = A[0, 0] + A[1, 1]
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    disc = trace**2 - 4.0 * det
    scale = max(1.0, abs(trace) ** 2, 4.0 * abs(det))
    if disc < -1e-12 * scale:
        raise ValueError("matrix has complex eigenvalues")
    root = math.sqrt(max(disc, 0.0))
    lam1 = 0.5 * (trace + root)
    lam2 = 0.5 * (trace - root)
    if abs(lam1 - lam2) > _EIG_GAP_TOL * (abs(lam1) + abs(lam2) + 1.0):
        c1 = (lam1**i - lam2**i) / (lam1 - lam2)
        c0 = lam1 * lam2 * (lam1 ** (i - 1) - lam2 ** (i - 1)) / (lam1 - lam2)
        return c1 * A - c0 * np.eye(2)
    lam = 0.5 * trace
    return lam**i * np.eye(2) + i * lam ** (i - 1) * (A - lam * np.eye(2))


def tau_range(xi):
    """Symmetric momentum interval with a convergence guarantee, or ``None``.

    The admissible magnitude is ``(1 - phi*sqrt(xi)) / (phi*sqrt(xi))`` with
    ``phi`` the golden ratio; the interval is empty once
    ``xi >= 1/phi^2`` (about 0.382).
    """
    if not np.isfinite(xi) or xi <= 0:
        raise ValueError("xi must be positive")
    edge = GOLDEN_RATIO * math.sqrt(xi)
    if edge >= 1.0 + 1e-15:
        return None
    t = (1.0 - edge) / edge
    return (-t, t)


def geometric_sum(xi, tau):
    """Limit ``B = (I - A)^{-1}`` of ``sum_i A^i`` in closed form.

    Requires ``tau >= 0`` and ``xi * (1 + 2 tau) < 1`` (otherwise the sum
    diverges and the closed form is invalid).
    """
    if tau < 0:
        raise ValueError("closed-form geometric sum requires tau >= 0")
    if xi <= 0:
        raise ValueError("xi must be positive")
    denom = 1.0 - xi * (1.0 + 2.0 * tau)
    if denom <= 0:
        raise ValueError(f"geometric sum diverges: xi*(1+2*tau) = {xi * (1 + 2 * tau)} >= 1")
    return np.array([[1.0, xi * tau], [1.0, 1.0 - xi * (1.0 + tau)]]) / denom


def _noise_coefficient(rip):
    if rip.k is None:
        raise ValueError("RipConstants must carry the budget k to locate levels 2k and 3k")
    lvl2, lvl3 = 2 * rip.k, 3 * rip.k
    for lvl in (lvl2, lvl3):
        if lvl not in rip.alpha:
            raise ValueError(f"RIP constants missing sparsity level {lvl}")
    return 2.0 * math.sqrt(rip.beta[lvl2]) / (rip.alpha[lvl3] + rip.beta[lvl3])


def error_bound(xi, tau, rip, x_star_norm, eps_norm, T):
    """Per-iteration upper bounds on the distance to the planted signal.

    Returns a :class:`BoundReport` whose ``error_curve[t]`` bounds
    ``||x_t - x_star||`` for ``t = 0..T``:

        2*|l1|^t/(|l1|-|l2|) * ( (1+xi(1+2tau))*||x_star||
            + (1+xi(1+2tau))/(1-xi(1+2tau)) * c_eps )  +  c_eps/(1-xi(1+2tau))

    with ``c_eps = 2 sqrt(beta_2k)/(alpha_3k + beta_3k) * ||eps||``.  The
    last term is the noise floor that does not vanish with t.
    """
    if tau < 0:
        raise ValueError("error_bound requires tau >= 0")
    if x_star_norm < 0 or eps_norm < 0:
        raise ValueError("norms must be nonnegative")
    sys = contraction_matrix(xi, tau)
    lam1, lam2 = abs(sys.lambda1), abs(sys.lambda2)
    if lam1 >= 1.0:
        raise ValueError(f"|lambda1| = {lam1} >= 1: no convergence guarantee")
    if lam1 - lam2 <= 0:
        raise ValueError("eigenvalues coincide: spectral-gap bound undefined")
    shrink = 1.0 - xi * (1.0 + 2.0 * tau)
    if shrink <= 0:
        raise ValueError(f"xi*(1+2*tau) = {xi * (1 + 2 * tau)} >= 1: bound invalid")
    c_eps = _noise_coefficient(rip) * eps_norm if eps_norm > 0 else 0.0
    grow = 1.0 + xi * (1.0 + 2.0 * tau)
    floor = c_eps / shrink
    t = np.arange(T + 1)
    curve = (2.0 * lam1**t / (lam1 - lam2)) * (grow * x_star_norm + grow / shrink * c_eps) + floor
    return BoundReport(
        tau_range=tau_range(xi),
        iteration_bound=None,
        error_curve=curve,
        noise_floor=floor,
    )


def iteration_bound(xi, tau, x_star_norm, zeta):
    """Smallest T with noiseless ``error_curve[T] <= zeta``.

    Evaluates ``ceil(log(2 (1+xi(1+2tau)) ||x_star|| / (zeta (|l1|-|l2|)))
    / log(1/|l1|))`` and then adjusts by one if floating-point rounding put
    it off the exact threshold.  Raises when ``|lambda1| >= 1``.
    """
    if zeta <= 0:
        raise ValueError("zeta must be positive")
    sys = contraction_matrix(xi, tau)
    lam1, lam2 = abs(sys.lambda1), abs(sys.lambda2)
    if lam1 >= 1.0:
        raise ValueError(f"infeasible: |lambda1| = {lam1} >= 1")
    if lam1 - lam2 <= 0:
        raise ValueError("eigenvalues coincide: spectral-gap bound undefined")
    if lam1 == 0.0:
        return 0 if x_star_norm == 0 else 1

    def bound_at(t):
        return 2.0 * lam1**t / (lam1 - lam2) * (1.0 + xi * (1.0 + 2.0 * tau)) * x_star_norm

    if bound_at(0) <= zeta:
        return 0
    ratio = bound_at(0) / zeta
    T = max(0, math.ceil(math.log(ratio) / math.log(1.0 / lam1)))
    while T > 0 and bound_at(T - 1) <= zeta:
        T -= 1
    while bound_at(T) > zeta:
        T += 1
    return T


def rip_exact(Phi, s, budget=_ENUMERATION_BUDGET):
    """Exact restricted constants at level ``s`` by enumerating column subsets.

    Returns ``(alpha_s, beta_s)``: the extreme eigenvalues of the
    ``Phi_I^T Phi_I`` Gram matrices over all index sets ``I`` of size s.
    Refuses when the subset count exceeds ``budget``.
    """
    Phi = np.asarray(Phi, dtype=float)
    n = Phi.shape[1]
    if not 1 <= s <= n:
        raise ValueError(f"sparsity level s={s} out of range for n={n}")
    count = math.comb(n, s)
    if count > budget:
        raise ValueError(
            f"enumeration budget exceeded: C({n},{s}) = {count} > {budget}; "
            "use the lambda-max surrogate or supply constants"
        )
    alpha, beta = np.inf, -np.inf
    gram = Phi.T @ Phi
    for idx in itertools.combinations(range(n), s):
        sub = gram[np.ix_(idx, idx)]
        w = np.linalg.eigvalsh(sub)
        alpha = min(alpha, w[0])
        beta = max(beta, w[-1])
    return float(alpha), float(beta)


def rip_surrogate(Phi):
    """Global smoothness surrogate ``beta_hat = lambda_max(Phi^T Phi)``.

    Dominates ``beta_s`` for every level s.  Computed on the smaller Gram
    matrix since both share the nonzero spectrum.
    """
    Phi = np.asarray(Phi, dtype=float)
    m, n = Phi.shape
    gram = Phi @ Phi.T if m <= n else Phi.T @ Phi
    return linalg.extreme_eigs_sym(gram)[1]


def optimal_mu(alpha, beta):
    """Step size minimizing ``||I - mu * Phi_S^T Phi_S||`` over PSD spectra
    contained in ``[alpha, beta]``.

    Returns ``(mu, contraction) = (2/(alpha+beta), (beta-alpha)/(beta+alpha))``.
    """
    if not (np.isfinite(alpha) and np.isfinite(beta)) or alpha <= 0 or beta < alpha:
        raise ValueError("need 0 < alpha <= beta")
    return 2.0 / (alpha + beta), (beta - alpha) / (beta + alpha)


def estimate_rip(Phi, k, budget=_ENUMERATION_BUDGET):
    """Exact RIP constants at levels 2k and 3k, packaged for the bounds."""
    a2, b2 = rip_exact(Phi, 2 * k, budget=budget)
    a3, b3 = rip_exact(Phi, 3 * k, budget=budget)
    return RipConstants(
        alpha={2 * k: a2, 3 * k: a3},
        beta={2 * k: b2, 3 * k: b3},
        method="exact-enumeration",
        k=k,
    )
