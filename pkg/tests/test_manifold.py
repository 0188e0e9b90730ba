import numpy as np
import pytest

from geodissip.exceptions import (
    DimensionMismatch,
    InvalidMetric,
    InvalidPoint,
    OriginExcluded,
    SingularMetric,
)
from geodissip.manifold import (
    ChartPoint,
    MetricField,
    ScalarField,
    check_partials,
    flat,
    gradient,
    gradients,
    inner,
    linear_combination,
)


def test_chart_point_is_read_only():
    point = ChartPoint([1.0, 2.0])

    with pytest.raises(ValueError):
        point.coords[0] = 3.0


@pytest.mark.parametrize("coords", [[1.0, np.nan], [np.inf, 0.0]])
def test_chart_point_rejects_non_finite(coords):
    with pytest.raises(InvalidPoint):
        ChartPoint(coords)


def test_chart_point_rejects_matrix():
    with pytest.raises(DimensionMismatch):
        ChartPoint([[1.0, 2.0]])


def test_chart_point_checks_dimension():
    with pytest.raises(DimensionMismatch, match="dimension 3"):
        ChartPoint.of([1.0, 2.0], dim=3)


def test_gradient_divides_by_diagonal_metric():
    g = MetricField.diagonal([4.0, 1.0])
    grad = gradient(g, ScalarField.coordinate(2, 1), [0.0, 0.0])
    assert grad == pytest.approx([0.25, 0.0])


def test_gradient_matches_flat_inverse(rng):
    A = rng.normal(size=(3, 3))
    g = MetricField.constant(A @ A.T + 3 * np.eye(3))
    F = ScalarField.quadratic(rng.normal(size=(3, 3)), linear=[1.0, 2.0, 3.0])
    x = rng.normal(size=3)

    grad = gradient(g, F, x)

    assert flat(g, x, grad) == pytest.approx(F.partials(x))


def test_gradients_returns_partials_and_vectors():
    g = MetricField.diagonal([2.0, 2.0, 2.0])
    fields = [ScalarField.coordinate(3, 1), ScalarField.coordinate(3, 2)]

    partials, grads = gradients(g, fields, [0.0, 0.0, 0.0])

    assert partials == pytest.approx(np.array([[1, 0, 0], [0, 1, 0]]))
    assert grads == pytest.approx(np.array([[0.5, 0, 0], [0, 0.5, 0]]))


def test_gradients_of_no_fields():
    partials, grads = gradients(MetricField.euclidean(2), [], [1.0, 1.0])
    assert partials.shape == (0, 2)
    assert grads.shape == (0, 2)


def test_inner_uses_metric():
    g = MetricField.diagonal([1.0, 9.0])
    assert inner(g, [0.0, 0.0], [1.0, 1.0], [2.0, 1.0]) == pytest.approx(11.0)


def test_metric_must_be_symmetric():
    g = MetricField(2, lambda x: np.array([[1.0, 0.5], [0.0, 1.0]]), name="bad")

    with pytest.raises(InvalidMetric, match="bad"):
        g([0.0, 0.0])


def test_metric_shape_is_checked():
    g = MetricField(2, lambda x: np.eye(3))

    with pytest.raises(DimensionMismatch):
        g([0.0, 0.0])


def test_singular_metric():
    g = MetricField.constant([[1.0, 1.0], [1.0, 1.0]])

    with pytest.raises(SingularMetric):
        g.inverse([0.0, 0.0])


def test_indefinite_metric_falls_back_to_lu():
    g = MetricField.constant([[1.0, 0.0], [0.0, -2.0]])
    assert g.det([0.0, 0.0]) == pytest.approx(-2.0)
    assert g.inverse([0.0, 0.0]) == pytest.approx(np.diag([1.0, -0.5]))


def test_metric_det():
    g = MetricField.diagonal([2.0, 3.0, 4.0])
    assert g.det([0.0, 0.0, 0.0]) == pytest.approx(24.0)


def test_coordinate_index_is_one_based():
    F = ScalarField.coordinate(3, 3)
    assert F([1.0, 2.0, 3.0]) == 3.0

    with pytest.raises(DimensionMismatch):
        ScalarField.coordinate(3, 0)


def test_norm_field_excludes_origin():
    F = ScalarField.norm(3, scale=2.0)
    assert F([3.0, 4.0, 0.0]) == pytest.approx(10.0)

    with pytest.raises(OriginExcluded):
        F([0.0, 0.0, 0.0])


def test_field_arithmetic():
    x = np.array([1.0, 2.0])
    F = ScalarField.coordinate(2, 1)
    G = ScalarField.half_norm_squared(2)

    combined = 3 * F - G

    assert combined(x) == pytest.approx(3.0 - 2.5)
    assert combined.partials(x) == pytest.approx([2.0, -2.0])
    assert (-F)(x) == -1.0


def test_linear_combination():
    x = np.array([1.0, 2.0])
    F = linear_combination(
        [ScalarField.coordinate(2, 1), ScalarField.coordinate(2, 2)],
        [2.0, -1.0],
        offset=5.0,
    )
    assert F(x) == pytest.approx(5.0)
    assert F.partials(x) == pytest.approx([2.0, -1.0])


def test_finite_difference_partials_without_analytic():
    F = ScalarField(2, lambda x: np.sin(x[0]) * x[1])
    x = np.array([0.4, 1.5])

    assert not F.has_analytic_partials
    assert F.partials(x) == pytest.approx(
        [np.cos(0.4) * 1.5, np.sin(0.4)], rel=1e-6
    )


def test_check_partials_passes_for_correct_derivatives(rng):
    F = ScalarField.quadratic(rng.normal(size=(3, 3)), linear=[1.0, 0.0, -1.0])
    report = check_partials(F, rng.normal(size=3))
    assert report.passed


def test_check_partials_detects_wrong_derivatives():
    F = ScalarField(2, lambda x: x[0] ** 2, lambda x: np.array([1.0, 0.0]))
    report = check_partials(F, [3.0, 0.0])
    assert not report.passed
    assert report.max_relative_error > 0.5


def test_check_partials_requires_analytic():
    with pytest.raises(ValueError, match="no analytic partials"):
        check_partials(ScalarField(1, lambda x: x[0]), [1.0])
