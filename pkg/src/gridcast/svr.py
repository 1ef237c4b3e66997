"""Epsilon-insensitive support vector regression trained by SMO.

The dual is solved in the beta = alpha - alpha* parametrization:

    minimize  J(beta) = 1/2 beta' K beta + eps * ||beta||_1 - y' beta
    subject to  sum(beta) = 0,  -C <= beta_i <= C

SMO picks the maximal-violating pair (steepest feasible descent
direction respecting the equality constraint) and solves the resulting
one-dimensional piecewise quadratic exactly, so the box and equality
constraints hold at every iteration and the dual objective never
degrades. Selection is deterministic: ties resolve to the lowest index.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import SupervisedSet
from .errors import DimensionMismatch, EmptyDataset

KERNEL_CACHE_LIMIT = 8000  # full Gram matrix kept below this many points
_SV_EPS = 1e-12  # |beta| below this counts as zero for bias estimation


def kernel_rbf(a, b, gamma: float) -> float:
    """Gaussian kernel exp(-gamma * ||a - b||^2)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"kernel inputs {a.shape} vs {b.shape}")
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    d = a - b
    return float(np.exp(-gamma * np.dot(d, d)))


def _kernel_cross(X, Z, gamma: float, kind: str) -> np.ndarray:
    """Kernel matrix K[i, j] = k(X[i], Z[j])."""
    if kind == "linear":
        return X @ Z.T
    sq = (
        np.sum(X * X, axis=1)[:, None]
        + np.sum(Z * Z, axis=1)[None, :]
        - 2.0 * (X @ Z.T)
    )
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


def _kernel_gram(X, gamma: float, kind: str) -> np.ndarray:
    K = _kernel_cross(X, X, gamma, kind)
    K = 0.5 * (K + K.T)
    if kind == "rbf":
        np.fill_diagonal(K, 1.0)
    return K


@dataclass(frozen=True)
class SmoConfig:
    tol: float = 1e-3
    max_passes: int = 10
    max_iters: int = 200_000

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_passes < 1 or self.max_iters < 1:
            raise ValueError("iteration caps must be >= 1")


@dataclass(frozen=True)
class SmoTrace:
    """Per-update diagnostics: dual objective and constraint status."""

    objective: np.ndarray
    sum_beta: np.ndarray
    max_abs_beta: np.ndarray


@dataclass(frozen=True)
class SvrModel:
    inputs: np.ndarray  # all training inputs; covers every support vector
    beta: np.ndarray  # alpha_i - alpha_i*, one per training point
    bias: float
    gamma: float
    C: float
    epsilon: float
    kernel: str = "rbf"
    converged: bool = True
    trace: SmoTrace | None = field(default=None, compare=False)

    def __post_init__(self):
        inputs = np.asarray(self.inputs, dtype=np.float64)
        beta = np.asarray(self.beta, dtype=np.float64)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "beta", beta)
        if inputs.ndim != 2 or len(beta) != len(inputs):
            raise DimensionMismatch("one beta per stored input required")
        if np.any(np.abs(beta) > self.C * (1 + 1e-12)):
            raise ValueError("beta outside the box constraint")

    @property
    def support_indices(self) -> np.ndarray:
        return np.flatnonzero(self.beta != 0.0)

    @property
    def support_inputs(self) -> np.ndarray:
        return self.inputs[self.support_indices]

    def predict_many(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.inputs.shape[1]:
            raise DimensionMismatch(
                f"expected (M, {self.inputs.shape[1]}) inputs, got {X.shape}"
            )
        idx = self.support_indices
        if len(idx) == 0:
            return np.full(len(X), self.bias)
        K = _kernel_cross(X, self.inputs[idx], self.gamma, self.kernel)
        return K @ self.beta[idx] + self.bias


def _line_search(eta, d, bi, bj, eps, lo, hi):
    """Exact minimizer of the pairwise subproblem over [lo, hi].

    phi(t) = eta/2 t^2 + d t + eps(|bi + t| + |bj - t|), convex piecewise
    quadratic; the minimum sits at an endpoint, a kink, or a per-piece
    stationary point.
    """
    candidates = [lo, hi]
    for kink in (-bi, bj):
        if lo < kink < hi:
            candidates.append(kink)
    if eta > 0.0:
        for si in (-1.0, 1.0):
            for sj in (-1.0, 1.0):
                t = -(d + eps * (si - sj)) / eta
                if lo < t < hi:
                    candidates.append(t)

    def phi(t):
        return 0.5 * eta * t * t + d * t + eps * (abs(bi + t) + abs(bj - t))

    best = candidates[0]
    best_val = phi(best)
    for t in candidates[1:]:
        v = phi(t)
        if v < best_val:
            best, best_val = t, v
    return best, best_val - phi(0.0)


def fit_svr(
    data: SupervisedSet,
    C: float = 1.0,
    epsilon: float = 0.1,
    gamma: float | None = None,
    cfg: SmoConfig | None = None,
    kernel: str = "rbf",
) -> SvrModel:
    """Solve the eps-SVR dual by sequential minimal optimization."""
    if len(data) == 0:
        raise EmptyDataset("cannot fit SVR on an empty dataset")
    if C <= 0:
        raise ValueError("C must be positive")
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    if kernel not in ("rbf", "linear"):
        raise ValueError(f"unknown kernel {kernel!r}")
    cfg = cfg or SmoConfig()
    X = data.inputs
    y = data.targets
    n_pts = len(y)
    if gamma is None:
        gamma = 1.0 / data.window

    cached = n_pts <= KERNEL_CACHE_LIMIT
    K = _kernel_gram(X, gamma, kernel) if cached else None
    if kernel == "rbf":
        diag = np.ones(n_pts)
    else:
        diag = np.sum(X * X, axis=1)

    beta = np.zeros(n_pts)
    kb = np.zeros(n_pts)  # K @ beta, maintained incrementally
    eps = epsilon
    trace_obj, trace_sum, trace_max = [], [], []
    converged = False
    stall = 0

    def column(i):
        if cached:
            return K[i]
        return _kernel_cross(X, X[i : i + 1], gamma, kernel)[:, 0]

    for it in range(cfg.max_iters):
        g = kb - y
        g_up = g + np.where(beta >= 0.0, eps, -eps)
        g_dn = -g + np.where(beta <= 0.0, eps, -eps)
        g_up_masked = np.where(beta < C, g_up, np.inf)
        g_dn_masked = np.where(beta > -C, g_dn, np.inf)
        i = int(np.argmin(g_up_masked))
        j = int(np.argmin(g_dn_masked))
        if g_up_masked[i] + g_dn_masked[j] >= -cfg.tol:
            converged = True
            break

        ki = column(i)
        kj = column(j)
        eta = diag[i] + diag[j] - 2.0 * ki[j]
        d = (kb[i] - kb[j]) - (y[i] - y[j])
        lo = max(-C - beta[i], beta[j] - C)
        hi = min(C - beta[i], beta[j] + C)
        delta, gain = _line_search(eta, d, beta[i], beta[j], eps, lo, hi)

        if gain >= 0.0 or delta == 0.0:
            stall += 1
            if stall >= cfg.max_passes:
                break
            continue
        stall = 0

        # clip both updated coordinates into the box, then re-derive delta so
        # the equality constraint is preserved to rounding
        new_bi = min(max(beta[i] + delta, -C), C)
        delta = new_bi - beta[i]
        new_bj = min(max(beta[j] - delta, -C), C)
        delta = beta[j] - new_bj
        new_bi = min(max(beta[i] + delta, -C), C)
        beta[i] = new_bi
        beta[j] = new_bj
        kb += delta * (ki - kj)
        if cached and (it + 1) % 1000 == 0:
            kb = K @ beta  # refresh accumulated rounding

        trace_obj.append(
            float(y @ beta - 0.5 * (beta @ kb) - eps * np.sum(np.abs(beta)))
        )
        trace_sum.append(float(np.sum(beta)))
        trace_max.append(float(np.max(np.abs(beta))))

    bias = _estimate_bias(beta, kb, y, C, eps)
    trace = SmoTrace(
        objective=np.array(trace_obj),
        sum_beta=np.array(trace_sum),
        max_abs_beta=np.array(trace_max),
    )
    return SvrModel(
        inputs=X.copy(),
        beta=beta,
        bias=bias,
        gamma=gamma,
        C=C,
        epsilon=eps,
        kernel=kernel,
        converged=converged,
        trace=trace,
    )


def _estimate_bias(beta, kb, y, C, eps):
    """Average b over unbounded support vectors, else the midpoint of the
    feasible bias interval."""
    r = y - kb
    near_zero = np.abs(beta) <= _SV_EPS * max(C, 1.0)
    pos_free = (~near_zero) & (beta > 0.0) & (beta < C)
    neg_free = (~near_zero) & (beta < 0.0) & (beta > -C)
    estimates = np.concatenate((r[pos_free] - eps, r[neg_free] + eps))
    if len(estimates):
        return float(np.mean(estimates))
    lower = r - np.where(beta >= 0.0, eps, -eps)
    upper = r + np.where(beta <= 0.0, eps, -eps)
    lo_mask = beta < C
    hi_mask = beta > -C
    b_lo = np.max(lower[lo_mask]) if np.any(lo_mask) else -np.inf
    b_hi = np.min(upper[hi_mask]) if np.any(hi_mask) else np.inf
    if not np.isfinite(b_lo) or not np.isfinite(b_hi):
        return float(np.mean(y))
    return float(0.5 * (b_lo + b_hi))


def svr_predict(model: SvrModel, x) -> float:
    """f(x) = sum_i beta_i k(x, x_i) + bias."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != model.inputs.shape[1]:
        raise DimensionMismatch(
            f"expected a {model.inputs.shape[1]}-vector, got shape {x.shape}"
        )
    return float(model.predict_many(x[None, :])[0])


def svr_dual_objective(model: SvrModel, data: SupervisedSet) -> float:
    """Dual objective W(beta) of the stored coefficients on `data`."""
    if len(data) != len(model.beta):
        raise DimensionMismatch(
            f"model has {len(model.beta)} coefficients, data has {len(data)} points"
        )
    if data.inputs.shape[1] != model.inputs.shape[1]:
        raise DimensionMismatch("input dimension differs from the model's")
    K = _kernel_gram(data.inputs, model.gamma, model.kernel)
    beta = model.beta
    return float(
        data.targets @ beta
        - 0.5 * (beta @ (K @ beta))
        - model.epsilon * np.sum(np.abs(beta))
    )
