"""One-hidden-layer feed-forward regressor, the per-step subproblem of
the nonlinear autoregressive scheme.

Training is Levenberg-Marquardt on the regularized objective
F = beta_hp * sum(e^2) + alpha * sum(w^2), with the weight-decay and
data-fit hyperparameters re-estimated after every accepted step by the
evidence framework (effective parameter count gamma_eff).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .data import SupervisedSet
from .errors import (
    DimensionMismatch,
    EmptyDataset,
    NonFiniteObjective,
    SingularSystem,
)

DEFAULT_HIDDEN = 40


def sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass(frozen=True)
class MlpModel:
    w_hidden: np.ndarray  # (hidden, n_in)
    b_hidden: np.ndarray  # (hidden,)
    w_out: np.ndarray  # (hidden,)
    b_out: float

    def __post_init__(self):
        w_hidden = np.asarray(self.w_hidden, dtype=np.float64)
        object.__setattr__(self, "w_hidden", w_hidden)
        object.__setattr__(
            self, "b_hidden", np.asarray(self.b_hidden, dtype=np.float64)
        )
        object.__setattr__(self, "w_out", np.asarray(self.w_out, dtype=np.float64))
        hidden = w_hidden.shape[0]
        if self.b_hidden.shape != (hidden,) or self.w_out.shape != (hidden,):
            raise DimensionMismatch("hidden-layer parameter shapes disagree")
        for block in (self.w_hidden, self.b_hidden, self.w_out, [self.b_out]):
            if not np.all(np.isfinite(block)):
                raise ValueError("model parameters must be finite")

    @property
    def n_in(self) -> int:
        return self.w_hidden.shape[1]

    @property
    def hidden(self) -> int:
        return self.w_hidden.shape[0]

    @property
    def n_params(self) -> int:
        return self.hidden * self.n_in + 2 * self.hidden + 1

    def to_vector(self) -> np.ndarray:
        return np.concatenate(
            (self.w_hidden.ravel(), self.b_hidden, self.w_out, [self.b_out])
        )

    def with_vector(self, w: np.ndarray) -> "MlpModel":
        hidden, n_in = self.w_hidden.shape
        c0 = hidden * n_in
        return MlpModel(
            w_hidden=w[:c0].reshape(hidden, n_in),
            b_hidden=w[c0 : c0 + hidden],
            w_out=w[c0 + hidden : c0 + 2 * hidden],
            b_out=float(w[-1]),
        )

    def forward_many(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_in:
            raise DimensionMismatch(
                f"expected (M, {self.n_in}) inputs, got {X.shape}"
            )
        act = sigmoid(X @ self.w_hidden.T + self.b_hidden)
        return act @ self.w_out + self.b_out


@dataclass(frozen=True)
class LmConfig:
    mu0: float = 1e-3
    mu_inc: float = 10.0
    mu_dec: float = 0.1
    mu_min: float = 1e-12
    mu_max: float = 1e10
    max_iters: int = 200
    grad_tol: float = 1e-7
    bayesian: bool = True

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.mu0 <= 0 or self.mu_min <= 0 or self.mu_max <= self.mu_min:
            raise ValueError("damping bounds must satisfy 0 < mu_min < mu_max")


@dataclass(frozen=True)
class LmState:
    mu: float
    mu_inc: float
    mu_dec: float
    alpha: float
    beta_hp: float
    gamma_eff: float

    def __post_init__(self):
        if self.mu <= 0:
            raise ValueError("damping must stay positive")
        if self.alpha < 0 or self.beta_hp <= 0:
            raise ValueError("hyperparameters out of range")


@dataclass(frozen=True)
class LmTraceRow:
    iteration: int
    objective_before: float
    objective_after: float
    accepted: bool
    mu: float
    alpha: float
    beta_hp: float
    gamma_eff: float
    grad_norm: float
    sse: float  # sum of squared errors at the end of the iteration


def mlp_forward(model: MlpModel, x) -> float:
    """y = w_out . sigmoid(w_hidden x + b_hidden) + b_out."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != model.n_in:
        raise DimensionMismatch(f"expected a {model.n_in}-vector, got {x.shape}")
    return float(model.forward_many(x[None, :])[0])


def nguyen_widrow_init(n_in: int, n_hidden: int, seed: int) -> MlpModel:
    """Nguyen-Widrow initialization: hidden rows rescaled to a common norm
    0.7 * n_hidden^(1/n_in), biases spread evenly across the active region,
    small uniform output layer. Deterministic in the seed."""
    if n_in < 1 or n_hidden < 1:
        raise ValueError("layer sizes must be >= 1")
    rng = np.random.default_rng(seed)
    target_norm = 0.7 * float(n_hidden) ** (1.0 / n_in)
    w = rng.uniform(-1.0, 1.0, size=(n_hidden, n_in))
    norms = np.linalg.norm(w, axis=1)
    norms[norms == 0.0] = 1.0
    w = w * (target_norm / norms)[:, None]
    if n_hidden == 1:
        b = np.zeros(1)
    else:
        b = target_norm * np.linspace(-1.0, 1.0, n_hidden)
    return MlpModel(
        w_hidden=w,
        b_hidden=b,
        w_out=rng.uniform(-0.1, 0.1, size=n_hidden),
        b_out=float(rng.uniform(-0.1, 0.1)),
    )


def _forward_parts(model: MlpModel, X):
    act = sigmoid(X @ model.w_hidden.T + model.b_hidden)
    pred = act @ model.w_out + model.b_out
    return act, pred


def mlp_jacobian(model: MlpModel, data: SupervisedSet) -> np.ndarray:
    """Rows are d e_i / d w for the signed errors e_i = y_i - f(x_i),
    parameters flattened in to_vector order."""
    if len(data) == 0:
        raise EmptyDataset("jacobian of an empty dataset")
    if data.inputs.shape[1] != model.n_in:
        raise DimensionMismatch("data dimension differs from the model's")
    X = data.inputs
    act, _ = _forward_parts(model, X)
    # d pred / d z_h = w_out_h * act_h * (1 - act_h), one column per neuron
    dz = act * (1.0 - act) * model.w_out  # (N, hidden)
    n_rows, hidden = dz.shape
    J = np.empty((n_rows, model.n_params))
    c0 = hidden * model.n_in
    # e = y - pred, so every block is the negated prediction gradient
    J[:, :c0] = -(dz[:, :, None] * X[:, None, :]).reshape(n_rows, c0)
    J[:, c0 : c0 + hidden] = -dz
    J[:, c0 + hidden : c0 + 2 * hidden] = -act
    J[:, -1] = -1.0
    return J


def lm_br_train(
    init: MlpModel, data: SupervisedSet, cfg: LmConfig | None = None
) -> tuple[MlpModel, LmState, list[LmTraceRow]]:
    """Levenberg-Marquardt with evidence-based re-estimation of the
    weight-decay and data-fit hyperparameters.

    Steps solve (beta_hp J'J + (alpha + mu) I) dw = -(beta_hp J'e + alpha w)
    and are accepted only when the regularized objective decreases at the
    hyperparameters used for the step.
    """
    if len(data) == 0:
        raise EmptyDataset("cannot train on an empty dataset")
    cfg = cfg or LmConfig()
    X, y = data.inputs, data.targets
    n_samples = len(y)
    n_w = init.n_params

    model = init
    w = model.to_vector()
    mu = cfg.mu0
    alpha = 0.0
    beta_hp = 1.0
    gamma_eff = float(n_w)
    trace: list[LmTraceRow] = []

    def objective(weights, errors, a, b):
        return b * float(errors @ errors) + a * float(weights @ weights)

    _, pred = _forward_parts(model, X)
    e = y - pred
    if not np.all(np.isfinite(e)):
        raise NonFiniteObjective("non-finite predictions at the initial point")

    for it in range(cfg.max_iters):
        J = mlp_jacobian(model, data)
        jtj = J.T @ J
        grad = beta_hp * (J.T @ e) + alpha * w
        grad_norm = float(np.linalg.norm(grad))
        f_before = objective(w, e, alpha, beta_hp)

        if grad_norm < cfg.grad_tol:
            break

        accepted = False
        solved_any = False
        w_new, e_new, f_after = w, e, f_before
        while mu <= cfg.mu_max:
            a_matrix = beta_hp * jtj + (alpha + mu) * np.eye(n_w)
            try:
                step = np.linalg.solve(a_matrix, -grad)
            except np.linalg.LinAlgError:
                mu *= cfg.mu_inc
                continue
            solved_any = True
            w_try = w + step
            candidate = model.with_vector(w_try)
            _, pred_try = _forward_parts(candidate, X)
            e_try = y - pred_try
            f_try = objective(w_try, e_try, alpha, beta_hp)
            if not np.isfinite(f_try):
                mu *= cfg.mu_inc
                continue
            if f_try < f_before:
                accepted = True
                w_new, e_new, f_after = w_try, e_try, f_try
                model = candidate
                mu = max(mu * cfg.mu_dec, cfg.mu_min)
                break
            mu *= cfg.mu_inc
        if not accepted and not solved_any:
            raise SingularSystem(
                "damped normal equations unsolvable even at mu_max"
            )

        if accepted and cfg.bayesian:
            e_w = max(float(w_new @ w_new), 1e-30)
            e_d = max(float(e_new @ e_new), 1e-30)
            if alpha == 0.0:
                gamma_eff = float(n_w)
            else:
                h = beta_hp * jtj + alpha * np.eye(n_w)
                try:
                    gamma_eff = n_w - alpha * float(np.trace(np.linalg.inv(h)))
                except np.linalg.LinAlgError:
                    gamma_eff = float(n_w)
            gamma_eff = float(min(max(gamma_eff, 0.0), n_w))
            alpha = gamma_eff / (2.0 * e_w)
            beta_hp = max(n_samples - gamma_eff, 1e-3) / (2.0 * e_d)

        w, e = w_new, e_new
        trace.append(
            LmTraceRow(
                iteration=it,
                objective_before=f_before,
                objective_after=f_after,
                accepted=accepted,
                mu=mu,
                alpha=alpha,
                beta_hp=beta_hp,
                gamma_eff=gamma_eff,
                grad_norm=grad_norm,
                sse=float(e @ e),
            )
        )
        if not accepted:
            break  # damping hit mu_max without an objective decrease

    state = LmState(
        mu=min(mu, cfg.mu_max),
        mu_inc=cfg.mu_inc,
        mu_dec=cfg.mu_dec,
        alpha=alpha,
        beta_hp=beta_hp,
        gamma_eff=gamma_eff,
    )
    return model, state, trace
