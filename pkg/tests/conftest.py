import numpy as np
import pytest

from gridcast.data import TimeSeries

FIXTURE_PATH = "data/household_power_20k.csv"


def simulate_arma(phi, theta, sigma, n, seed, burn_in=500):
    """Simulate a zero-mean ARMA process with known coefficients."""
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    p, q = len(phi), len(theta)
    rng = np.random.default_rng(seed)
    e = rng.normal(0.0, sigma, size=n + burn_in)
    x = np.zeros(n + burn_in)
    for t in range(max(p, q), n + burn_in):
        x[t] = e[t]
        for i in range(p):
            x[t] += phi[i] * x[t - 1 - i]
        for j in range(q):
            x[t] += theta[j] * e[t - 1 - j]
    return x[burn_in:]


def series_from(values, **kwargs):
    return TimeSeries(values=np.asarray(values, dtype=float), **kwargs)


@pytest.fixture(scope="session")
def fixture_series():
    from gridcast.data import parse_household_csv

    return parse_household_csv(FIXTURE_PATH)
