import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def random_spd(rng, dim, cond=10.0):
    Q, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
    w = np.exp(rng.uniform(0, np.log(cond), size=dim))
    return Q @ np.diag(w) @ Q.T


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


@pytest.fixture
def verdict(capsys):
    """Print one PASS/FAIL line straight to the terminal, then assert."""

    def _report(label, ok, detail=""):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        assert ok, f"{label}: {detail}"

    return _report
