"""ARMA(p, q) baseline: Hannan-Rissanen estimation and recursive forecasts.

Two-stage least squares: a long AR fit supplies residual proxies, then
x_t is regressed on p lags of x and q lags of those proxies. Closed-form
and deterministic, which is all the baseline role requires.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import TimeSeries
from .errors import (
    InsufficientHistory,
    NoFeasibleOrder,
    SeriesTooShort,
    SingularNormalEquations,
)

NEAR_UNIT_ROOT_MODULUS = 1.02


@dataclass(frozen=True)
class ArmaModel:
    p: int
    q: int
    phi: np.ndarray
    theta: np.ndarray
    intercept: float
    noise_variance: float
    tail_values: np.ndarray
    tail_residuals: np.ndarray
    warnings: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        phi = np.atleast_1d(np.asarray(self.phi, dtype=np.float64))
        theta = np.atleast_1d(np.asarray(self.theta, dtype=np.float64))
        if self.p == 0:
            phi = np.zeros(0)
        if self.q == 0:
            theta = np.zeros(0)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(
            self, "tail_values", np.asarray(self.tail_values, dtype=np.float64)
        )
        object.__setattr__(
            self, "tail_residuals", np.asarray(self.tail_residuals, dtype=np.float64)
        )
        if len(self.phi) != self.p or len(self.theta) != self.q:
            raise ValueError("coefficient lengths must match the orders")
        if self.noise_variance < 0:
            raise ValueError("noise variance must be non-negative")
        if len(self.tail_values) < self.p or len(self.tail_residuals) < self.q:
            raise ValueError("tail buffers too short to seed forecasting")


def _lagged_design(x: np.ndarray, lags: int) -> np.ndarray:
    """Columns [x_{t-1}, ..., x_{t-lags}] for t = lags..len(x)-1."""
    if lags == 0:
        return np.empty((len(x), 0))
    return np.column_stack([x[lags - j : len(x) - j] for j in range(1, lags + 1)])


def _solve_ls(design: np.ndarray, y: np.ndarray) -> np.ndarray:
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < design.shape[1]:
        raise SingularNormalEquations(
            f"regressor matrix rank {rank} < {design.shape[1]} columns"
        )
    return coef


def fit_arma(train: TimeSeries, p: int, q: int) -> ArmaModel:
    """Hannan-Rissanen two-stage least-squares ARMA fit."""
    if p < 0 or q < 0 or p + q < 1:
        raise ValueError("orders must satisfy p >= 0, q >= 0, p + q >= 1")
    x = train.values
    if len(x) < 10 * (p + q + 1):
        raise SeriesTooShort(
            f"need at least {10 * (p + q + 1)} samples for ARMA({p},{q}), have {len(x)}"
        )

    # Stage 1: long AR by OLS, residuals proxy the unobserved innovations.
    m = max(20, 2 * (p + q))
    if len(x) <= m + max(p, q) + 1:
        raise SeriesTooShort("series too short for the long-AR stage")
    design1 = np.column_stack([np.ones(len(x) - m), _lagged_design(x, m)])
    coef1 = _solve_ls(design1, x[m:])
    resid_proxy = x[m:] - design1 @ coef1  # aligned with t = m..len(x)-1

    # Stage 2: regress x_t on p lags of x and q lags of the proxies.
    # Proxies exist for t >= m, so rows start at t0 = m + q.
    t0 = m + q
    rows = len(x) - t0
    cols = [np.ones(rows)]
    for i in range(1, p + 1):
        cols.append(x[t0 - i : len(x) - i])
    for j in range(1, q + 1):
        cols.append(resid_proxy[q - j : rows + q - j])
    design2 = np.column_stack(cols)
    coef2 = _solve_ls(design2, x[t0:])
    final_resid = x[t0:] - design2 @ coef2

    intercept = float(coef2[0])
    phi = coef2[1 : 1 + p]
    theta = coef2[1 + p : 1 + p + q]
    noise_variance = float(np.mean(final_resid**2))

    warnings: tuple[str, ...] = ()
    if p > 0 and np.any(phi != 0):
        # roots of the AR lag polynomial 1 - phi1 z - ... - phip z^p;
        # stationarity needs all of them outside the unit circle
        roots = np.roots(np.concatenate((-phi[::-1], [1.0])))
        if len(roots) and np.min(np.abs(roots)) <= NEAR_UNIT_ROOT_MODULUS:
            warnings = (
                "AR characteristic root with modulus <= "
                f"{NEAR_UNIT_ROOT_MODULUS}; fit is near-integrated",
            )

    tail_len = max(p, m)
    return ArmaModel(
        p=p,
        q=q,
        phi=phi,
        theta=theta,
        intercept=intercept,
        noise_variance=noise_variance,
        tail_values=x[len(x) - tail_len :].copy(),
        tail_residuals=final_resid[len(final_resid) - q :].copy()
        if q
        else np.zeros(0),
        warnings=warnings,
    )


def select_order(
    train: TimeSeries, p_max: int = 5, q_max: int = 5
) -> tuple[int, int]:
    """Pick (p, q) minimizing AIC = N ln(sigma2) + 2(p+q+1) over the grid."""
    if p_max > 5 or q_max > 5:
        raise ValueError("order search is capped at p, q <= 5")
    n = len(train)
    best: tuple[float, int, int] | None = None
    for p in range(p_max + 1):
        for q in range(q_max + 1):
            if p + q < 1:
                continue
            try:
                model = fit_arma(train, p, q)
            except (SeriesTooShort, SingularNormalEquations):
                continue
            sigma2 = max(model.noise_variance, 1e-300)
            aic = n * np.log(sigma2) + 2 * (p + q + 1)
            key = (aic, p, q)
            if best is None or key < best:
                best = key
    if best is None:
        raise NoFeasibleOrder(
            f"no ARMA order in the grid p<={p_max}, q<={q_max} could be fitted"
        )
    return best[1], best[2]


def _filter_residuals(model: ArmaModel, history: np.ndarray) -> np.ndarray:
    """Innovation estimates over `history`, zero-initialized.

    Conditional least-squares style filter: residuals before the first
    usable time point are taken as zero, so estimates improve as the
    history grows (geometric decay of the initialization error).
    """
    p, q = model.p, model.q
    if q == 0:
        return np.zeros(0)
    resid = np.zeros(len(history))
    for t in range(p, len(history)):
        pred = model.intercept
        for i in range(1, p + 1):
            pred += model.phi[i - 1] * history[t - i]
        for j in range(1, q + 1):
            if t - j >= 0:
                pred += model.theta[j - 1] * resid[t - j]
        resid[t] = history[t] - pred
    return resid[len(resid) - q :]


def arma_forecast(
    model: ArmaModel, history: np.ndarray | None = None, h: int = 1
) -> np.ndarray:
    """Recursive h-step forecast with future innovations set to zero.

    `history` holds the most recent observed values (model space). When
    None, the model's stored training-tail values and residuals seed the
    recursion; otherwise residuals are re-estimated by filtering the
    provided history.
    """
    if h < 1:
        raise ValueError("horizon must be >= 1")
    if history is None:
        values = model.tail_values
        residuals = model.tail_residuals
    else:
        values = np.asarray(history, dtype=np.float64)
        if len(values) < model.p:
            raise InsufficientHistory(
                f"need {model.p} recent values, got {len(values)}"
            )
        residuals = _filter_residuals(model, values)

    p, q = model.p, model.q
    buf = list(values[len(values) - p :]) if p else []
    res = list(residuals[len(residuals) - q :]) if q else []
    out = np.empty(h)
    for s in range(h):
        pred = model.intercept
        for i in range(1, p + 1):
            pred += model.phi[i - 1] * buf[-i]
        for j in range(1, q + 1):
            # residual at lag j from step s is known only if it predates the
            # forecast origin (j > s); future innovations are zero
            if j > s and len(res) - j + s >= 0:
                pred += model.theta[j - 1] * res[len(res) - j + s]
        out[s] = pred
        if p:
            buf.append(pred)
            buf.pop(0)
    return out
