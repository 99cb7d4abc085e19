import numpy as np
import pytest

from polyeiv.moments import RegressionSample


def sim1(rng, n, noise_sd=1.0, c=0.0, beta=(0.0, 1.0)):
    """Uniform[-3, 4] covariate, N(0, 1) errors, Gaussian covariate noise."""
    x = rng.uniform(-3.0, 4.0, n)
    y = np.polynomial.polynomial.polyval(x, beta) + c * np.cos(x) + rng.normal(size=n)
    w = x + noise_sd * rng.normal(size=n)
    return RegressionSample(w, y), x


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


ACCEPTANCE_LINES = []


def record(criterion, ok, detail):
    """Log one acceptance verdict; printed again in the terminal summary."""
    line = f"criterion {criterion:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
