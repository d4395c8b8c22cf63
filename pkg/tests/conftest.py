import numpy as np
import pytest

from taskfmm.geometry import CurveSpec, generate_sources
from taskfmm.operators import NesaParams, build_all
from taskfmm.quadtree import TreeParams, build_tree


def grid_points(k: int) -> np.ndarray:
    """k x k points at the cell centers of the unit square."""
    c = (np.arange(k) + 0.5) / k
    xx, yy = np.meshgrid(c, c)
    return np.column_stack((xx.ravel(), yy.ravel()))


@pytest.fixture(scope="session")
def wave_2000():
    return generate_sources(CurveSpec(), 2000)


@pytest.fixture(scope="session")
def wave_tree_2000(wave_2000):
    return build_tree(wave_2000, TreeParams(P=50))


@pytest.fixture(scope="session")
def wave_ops_2000(wave_tree_2000):
    return build_all(wave_tree_2000, NesaParams(Q=12))
