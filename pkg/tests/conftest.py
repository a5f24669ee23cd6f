import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from schedsim import model

settings.register_profile(
    "default", deadline=None, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.load_profile("default")


def single_scheduler_state(mu, lam, delay=0.0, bandwidth=1e5, b=1e6):
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    cluster = model.ClusterSpec(
        mu,
        np.broadcast_to(np.asarray(delay, dtype=float), (1, mu.size)),
        np.broadcast_to(np.asarray(bandwidth, dtype=float), (1, mu.size)),
    )
    return model.SystemState.from_arrival_rates(cluster, [lam], b)


def random_single_instance(rng, m=2):
    """Random n=1 instance drawn from the acceptance ranges."""
    mu = rng.uniform(0.2, 2.0, m)
    lam = rng.uniform(1e-6, 0.5 * mu.min())
    delay = rng.uniform(0.0, 1.0, m)
    bandwidth = 10 ** rng.uniform(4, 6, m)
    return single_scheduler_state(mu, lam, delay, bandwidth)


def symmetric_state(n=3, m=4, mu=0.5, rho=0.3):
    cluster = model.ClusterSpec.uniform(np.full(m, mu), n)
    return model.SystemState(cluster, model.WorkloadSpec(np.full(n, 1.0 / n), rho))


def pytest_terminal_summary(terminalreporter):
    from tests import test_acceptance

    if test_acceptance.LINES:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# -- extended-precision finite-difference oracle ------------------------------
# Independent re-statement of the cost formulas in mpmath, so central
# differences are free of double-precision cancellation.
import mpmath

mpmath.mp.dps = 40


def mp_slice_cost(a, mu_ji, lam, e, b, c):
    a, mu_ji, lam = mpmath.mpf(a), mpmath.mpf(mu_ji), mpmath.mpf(lam)
    return a / (mu_ji - lam * a) + mpmath.mpf(e) + mpmath.mpf(b) * a / mpmath.mpf(c)


def mp_entropy(f, w, p):
    p = mpmath.mpf(p)
    return mpmath.log(mpmath.fsum(mpmath.mpf(wi) * mpmath.exp(p * fi) for wi, fi in zip(w, f))) / p


def mp_central_difference(fun, x, h=mpmath.mpf("1e-15")):
    return (fun(mpmath.mpf(x) + h) - fun(mpmath.mpf(x) - h)) / (2 * h)


def mp_entropy_gradient(x, ctx, w, p):
    """Central differences of the smoothed row objective, one coordinate at a time."""
    def costs(row):
        return [mp_slice_cost(row[j], ctx.mu_ji[j], ctx.lam_i, ctx.delay[j], ctx.b, ctx.bandwidth[j])
                for j in range(len(row))]

    grad = []
    for j in range(len(x)):
        def along(t, j=j):
            row = [mpmath.mpf(v) for v in x]
            row[j] = t
            return mp_entropy(costs(row), w, p)
        grad.append(float(mp_central_difference(along, x[j])))
    return np.array(grad)
