import os
from pathlib import Path

import numpy as np
import pytest

from geodissip.control import ControlProblem
from geodissip.manifold import MetricField, ScalarField


@pytest.fixture()
def tmp_directory(tmp_path):
    old = os.getcwd()
    os.chdir(str(tmp_path))
    yield str(Path(tmp_path).resolve())
    os.chdir(old)


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def euclidean3():
    return MetricField.euclidean(3)


@pytest.fixture
def sphere_problem(euclidean3):
    """F = 1/2 |x|^2, G = x^3 in Euclidean R^3"""
    return ControlProblem(
        euclidean3,
        [ScalarField.half_norm_squared(3, name="F")],
        ScalarField.coordinate(3, 3, name="G"),
    )


@pytest.fixture
def curved_problem():
    """Two conserved fields and a target on a non-constant metric in R^4"""

    def evaluator(x):
        return np.diag(1.0 + np.sin(x) ** 2) + 0.1 * np.ones((4, 4))

    metric = MetricField(4, evaluator, name="curved")
    F1 = ScalarField.quadratic(np.diag([1.0, 2.0, 3.0, 4.0]), name="F1")
    F2 = ScalarField.linear([1.0, -1.0, 0.5, 2.0], name="F2")
    G = ScalarField.quadratic(
        [
            [0.0, 1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 2.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
        ],
        linear=[0.3, 0.0, -1.0, 0.2],
        name="G",
    )
    return ControlProblem(metric, [F1, F2], G)


@pytest.fixture
def curved_point():
    return np.array([0.3, -0.7, 1.1, 0.4])
