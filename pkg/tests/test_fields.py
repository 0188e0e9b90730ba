import numpy as np
import pytest

from geodissip import fields
from geodissip.exceptions import ConfigError
from geodissip.manifold import MetricField, ScalarField


@pytest.mark.parametrize(
    "spec, x, value",
    [
        ({"name": "constant", "value": 2.5}, [1.0, 2.0, 3.0], 2.5),
        ({"name": "coordinate", "index": 2}, [1.0, 2.0, 3.0], 2.0),
        ({"name": "linear", "coeffs": [1, 0, -1], "offset": 1}, [1.0, 2.0, 3.0], -1.0),
        ({"name": "half-norm-squared"}, [1.0, 2.0, 2.0], 4.5),
        ({"name": "norm", "scale": 2.0}, [0.0, 3.0, 4.0], 10.0),
        (
            {"name": "quadratic", "matrix": np.eye(3).tolist()},
            [1.0, 1.0, 1.0],
            1.5,
        ),
    ],
)
def test_build_field(spec, x, value):
    field = fields.build_field(spec, 3)
    assert field(x) == pytest.approx(value)


def test_build_field_label():
    field = fields.build_field({"name": "coordinate", "index": 3, "label": "G"}, 3)
    assert field.name == "G"


def test_build_field_unknown_name():
    with pytest.raises(ConfigError) as excinfo:
        fields.build_field({"name": "cubic"}, 3, where="target")

    assert excinfo.value.field == "target"
    assert "half-norm-squared" in str(excinfo.value)


def test_build_field_requires_name():
    with pytest.raises(ConfigError, match="'name' key"):
        fields.build_field({"index": 1}, 3)


def test_build_field_bad_parameters():
    with pytest.raises(ConfigError, match="Invalid parameters"):
        fields.build_field({"name": "coordinate", "column": 1}, 3)


def test_build_field_dimension_mismatch():
    with pytest.raises(ConfigError, match="dimension 2"):
        fields.build_field({"name": "linear", "coeffs": [1, 2]}, 3)


def test_build_field_invalid_index():
    with pytest.raises(ConfigError, match="Invalid"):
        fields.build_field({"name": "coordinate", "index": 5}, 3)


def test_build_metric_defaults_to_euclidean():
    metric = fields.build_metric(None, 4)
    assert metric.is_euclidean
    assert metric.dim == 4


def test_build_metric_diagonal():
    metric = fields.build_metric({"name": "diagonal", "diag": [1.0, 4.0]}, 2)
    assert metric([0.0, 0.0]) == pytest.approx(np.diag([1.0, 4.0]))


def test_build_metric_unknown():
    with pytest.raises(ConfigError) as excinfo:
        fields.build_metric({"name": "hyperbolic"}, 2)

    assert excinfo.value.field == "metric"


def test_gram_det_field():
    metric = MetricField.euclidean(3)
    F = ScalarField.half_norm_squared(3)
    G = ScalarField.coordinate(3, 3)
    h = fields.gram_det_field(metric, [F, G])
    assert h([1.0, 1.0, 1.0]) == pytest.approx(2.0)


def test_build_rate_gram_det():
    metric = MetricField.euclidean(3)
    F = ScalarField.half_norm_squared(3)
    G = ScalarField.coordinate(3, 3)
    h = fields.build_rate({"name": "gram-det"}, metric, [F], G)
    assert h([0.0, 3.0, 4.0]) == pytest.approx(9.0)


def test_build_rate_from_field_spec():
    metric = MetricField.euclidean(2)
    F = ScalarField.coordinate(2, 1)
    G = ScalarField.coordinate(2, 2)
    h = fields.build_rate({"name": "constant", "value": 3.0}, metric, [F], G)
    assert h([5.0, 5.0]) == 3.0
