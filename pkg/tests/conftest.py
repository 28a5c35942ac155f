import math

import pytest

from annulusdyn import (Grid, build_horseshoe_core, build_paper_example,
                        chain_classes, make_denjoy, transition_graph)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
SILVER = math.sqrt(2.0) - 1.0

HS_WINDOW = (0.0, 0.25, -0.25, 0.0)


@pytest.fixture(scope="session")
def horseshoe():
    return build_horseshoe_core()


@pytest.fixture(scope="session")
def paper_map():
    # alpha rational, beta irrational-in-practice: the acceptance pairing
    return build_paper_example(1.0 / 3.0, SILVER, tol=1e-6)


@pytest.fixture(scope="session")
def golden_denjoy():
    return make_denjoy(GOLDEN, 1e-4)


@pytest.fixture(scope="session")
def hs_grid8():
    return Grid(HS_WINDOW, 8)


@pytest.fixture(scope="session")
def hs_dg8(horseshoe, hs_grid8):
    return transition_graph(horseshoe, hs_grid8, "auto", seed=0)


@pytest.fixture(scope="session")
def hs_dec8(hs_dg8):
    return chain_classes(hs_dg8)
