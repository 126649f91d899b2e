import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from nkshoot.nk_background import HalfFamily, find_bstar_search, integrate_half
from nkshoot.hitchin_eigen import find_lambda_star_search

from frozen_values import B_STAR


@pytest.fixture(scope="session")
def bstar_search():
    """Full descending-grid search; shared because it costs a few seconds."""
    return find_bstar_search(grid_lo=0.05, grid_hi=0.999, grid_n=200, tol_b=1e-8)


@pytest.fixture(scope="session")
def half_bstar(bstar_search):
    return integrate_half(HalfFamily("b", bstar_search.bstar))


@pytest.fixture(scope="session")
def lambda_search(half_bstar):
    return find_lambda_star_search(half_bstar, tol_l=1e-8)


@pytest.fixture(scope="session")
def half_b1():
    return integrate_half(HalfFamily("b", 1.0))
