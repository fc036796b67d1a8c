from __future__ import annotations

import numpy as np
import pytest

from polykin import GridConfig, SchemeParams, build_grid


@pytest.fixture
def small_grid():
    # velocity nodes {-2,-1,0,1,2}, energy nodes {0, 0.5, 1.0, 1.5}
    return build_grid(GridConfig(n_x=4, n_v=5, v_max=2.0, n_i=4, i_max=2.0))


@pytest.fixture
def default_params():
    return SchemeParams(nu=0.5, theta=0.8, delta=2.0, kappa=1.0, q=8.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240814)


def random_field_values(rng, grid, sparsity: float = 0.0) -> np.ndarray:
    vals = rng.random(grid.field_shape)
    if sparsity > 0.0:
        vals *= rng.random(grid.field_shape) > sparsity
    return vals
