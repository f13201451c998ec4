import numpy as np
import pytest
from scipy.optimize import brentq

from sfacdf.cli import GridSpec
from sfacdf.composed import exp_cdf_emg, tn_cdf_bvn

# one line per acceptance criterion, echoed in the terminal summary
CRITERIA = []

PROB_LEVELS = np.linspace(0.001, 0.999, 50)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for line in CRITERIA:
        terminalreporter.write_line(line)


def quantile(fn, params, p, scale):
    """kappa with fn(params, kappa) = p, by bracketing and Brent's method."""
    lo, hi = -scale, scale
    while fn(params, lo) > p:
        lo *= 2.0
    while fn(params, hi) < p:
        hi *= 2.0
    return brentq(lambda k: fn(params, k) - p, lo, hi,
                  xtol=1e-10 * scale, rtol=1e-12)


def kappa_table(cells, fn, scale_of, probs=PROB_LEVELS):
    return [(c, [quantile(fn, c, p, scale_of(c)) for p in probs])
            for c in cells]


@pytest.fixture(scope="session")
def grid():
    return GridSpec()


@pytest.fixture(scope="session")
def tn_kappas(grid):
    """(params, 50 kappas at p = 0.001..0.999) for every tn grid cell."""
    return kappa_table(grid.tn_cells(), tn_cdf_bvn, lambda c: c.s)


@pytest.fixture(scope="session")
def exp_kappas(grid):
    return kappa_table(grid.exp_cells(), exp_cdf_emg,
                       lambda c: np.hypot(c.sigma_v, 1.0 / c.lam))
