"""Randomized differential testing: datapath vs the naive re-implementation.

The acceptance suite runs the full-size campaign; this keeps a fast slice in
the regular test run.
"""

import numpy as np
import pytest

from difftools import CASE_GRID, run_case, run_grid


@pytest.mark.parametrize("precision,paradigm,tiled", CASE_GRID,
                         ids=lambda v: getattr(v, "name", str(v)))
def test_differential_slice(precision, paradigm, tiled):
    rng = np.random.default_rng(hash((precision.name, paradigm, tiled)) % 2**32)
    for _ in range(300):
        run_case(rng, precision, paradigm, tiled)


def test_grid_runner_counts():
    assert run_grid(2, seed=0) == 2 * len(CASE_GRID)
