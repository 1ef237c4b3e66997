"""Independent oracles the gridcast tests check against.

These deliberately avoid the code paths under test: the SVR oracle is a
plain projected-gradient QP solver on the (alpha, alpha*) box with the
balance constraint, and the gradient oracle is central finite
differences on a generic flat parameter vector.
"""

import numpy as np


def _project_box_hyperplane(v, a, C):
    """Euclidean projection onto {0 <= z <= C, a.z = 0} with a in {-1,+1}^m.

    z(lam) = clip(v - lam * a, 0, C), and balance(lam) = a.z(lam) is a
    non-increasing piecewise-linear function whose kinks sit where a
    coordinate enters or leaves the box, so the balancing shift is found
    exactly by bracketing between sorted kinks and interpolating.
    """
    kinks = np.sort(np.concatenate((v * a, (v - C) * a)))
    values = np.clip(v[None, :] - kinks[:, None] * a[None, :], 0.0, C) @ a
    below = np.flatnonzero(values <= 0.0)
    if len(below) == 0:
        lam = kinks[-1]
    else:
        k = below[0]
        if k == 0 or values[k] == 0.0:
            lam = kinks[k]
        else:
            b0, b1 = values[k - 1], values[k]
            lam = kinks[k - 1] + (kinks[k] - kinks[k - 1]) * b0 / (b0 - b1)
    return np.clip(v - lam * a, 0.0, C)


def svr_dual_oracle(X, y, C, epsilon, gamma, iters=300_000):
    """Projected-gradient solve of the eps-SVR dual.

    Works on the stacked z = (alpha, alpha*) in [0, C]^{2N} with
    sum(alpha) - sum(alpha*) = 0. Returns (beta, maximized dual value).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    sq = (
        np.sum(X * X, axis=1)[:, None]
        + np.sum(X * X, axis=1)[None, :]
        - 2.0 * (X @ X.T)
    )
    K = np.exp(-gamma * np.maximum(sq, 0.0))
    a = np.concatenate((np.ones(n), -np.ones(n)))
    z = np.zeros(2 * n)
    lam_max = float(np.max(np.linalg.eigvalsh(K)))
    step = 1.0 / (2.0 * max(lam_max, 1e-12))

    for _ in range(iters):
        beta = z[:n] - z[n:]
        kb = K @ beta
        grad = np.concatenate((kb - y + epsilon, -kb + y + epsilon))
        z = _project_box_hyperplane(z - step * grad, a, C)

    beta = z[:n] - z[n:]
    value = float(y @ beta - 0.5 * beta @ (K @ beta) - epsilon * np.sum(z))
    return beta, value


def svr_oracle_predict(X_train, beta, bias, gamma, X_eval):
    """Decision values of the oracle solution, computed independently."""
    X_train = np.asarray(X_train, dtype=np.float64)
    X_eval = np.asarray(X_eval, dtype=np.float64)
    out = np.empty(len(X_eval))
    for m, x in enumerate(X_eval):
        acc = bias
        for b, xi in zip(beta, X_train):
            d = x - xi
            acc += b * np.exp(-gamma * float(d @ d))
        out[m] = acc
    return out


def svr_oracle_bias(X, y, beta, C, epsilon, gamma):
    """Bias from the KKT conditions of the oracle solution."""
    X = np.asarray(X, dtype=np.float64)
    sq = (
        np.sum(X * X, axis=1)[:, None]
        + np.sum(X * X, axis=1)[None, :]
        - 2.0 * (X @ X.T)
    )
    K = np.exp(-gamma * np.maximum(sq, 0.0))
    kb = K @ beta
    margin = 1e-6 * C
    free_pos = (beta > margin) & (beta < C - margin)
    free_neg = (beta < -margin) & (beta > -C + margin)
    est = np.concatenate(
        ((y - kb)[free_pos] - epsilon, (y - kb)[free_neg] + epsilon)
    )
    if len(est):
        return float(np.mean(est))
    return float(np.mean(y - kb))


def finite_difference_gradient(f, w, step=1e-6):
    """Central finite differences of a scalar function of a flat vector."""
    w = np.asarray(w, dtype=np.float64)
    grad = np.empty_like(w)
    for k in range(len(w)):
        wp = w.copy()
        wm = w.copy()
        wp[k] += step
        wm[k] -= step
        grad[k] = (f(wp) - f(wm)) / (2.0 * step)
    return grad


def relative_errors(analytic, numeric, floor_scale=1e-6):
    """Elementwise relative disagreement with a scale-aware floor.

    The floor keeps entries that are tiny relative to the gradient's own
    magnitude from dividing by ~0; it is proportional to the largest
    entry so it cannot hide a genuine mismatch.
    """
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    scale = max(np.max(np.abs(analytic)), np.max(np.abs(numeric)), 1e-12)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor_scale * scale)
    return np.abs(analytic - numeric) / denom
