"""Independent reference implementations used as test oracles.

Nothing here imports the code under test.
"""
import math

import pytest


def i0_horner(x, terms=60):
    """I0 by Horner evaluation of sum_k y**k / (k!)**2, y = x*x/4."""
    y = x * x / 4.0
    acc = 0.0
    for k in range(terms, -1, -1):
        acc = acc * y + 1.0 / math.factorial(k) ** 2
    return acc


def i1_series(x, terms=60):
    half = x / 2.0
    return math.fsum(
        half ** (2 * k + 1) / (math.factorial(k) * math.factorial(k + 1)) for k in range(terms)
    )


def pcs_reference(mu, n):
    return mu ** (2 * n) / math.factorial(n) ** 2 / i0_horner(2 * mu)


def click(eta_a, d_a, n):
    return 1.0 - (1.0 - eta_a) ** n + d_a


def bb84_yield_error(eta, n, p_dark, e_det):
    eta_n = 1.0 - (1.0 - eta) ** n
    y = (eta_n + (1.0 - eta_n) * p_dark) / 2.0
    return y, (eta_n * e_det / 2.0 + (1.0 - eta_n) * p_dark / 4.0) / y


def sarg_yield_error(eta, n, p_dark, e_det):
    eta_n = 1.0 - (1.0 - eta) ** n
    y = eta_n * (e_det / 2.0 + 0.25) + (1.0 - eta_n) * p_dark / 2.0
    return y, (eta_n * e_det / 2.0 + (1.0 - eta_n) * p_dark / 4.0) / y


def entropy(p):
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


@pytest.fixture
def gys():
    from hpcs_qkd import ChannelParams

    return ChannelParams(alpha=0.21, eta_bob=0.045, p_dark=1.7e-6, e_det=0.033)


@pytest.fixture
def trigger():
    from hpcs_qkd import TriggerParams

    return TriggerParams(eta_a=0.6, d_a=5e-8)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES: list = []


def record_criterion(label, passed, detail):
    ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'}  {label}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
