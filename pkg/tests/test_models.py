import math

import numpy as np
import pytest

from geodissip import models
from geodissip.control import v0
from geodissip.exceptions import InvalidLevel, InvalidPoint, OriginExcluded
from geodissip.exterior import v0_hodge
from geodissip.leafgeom import (
    induced_metric,
    leaf_components,
    leaf_gradient,
    leaf_gradient_check,
    leaf_metric,
    tensor_T,
    v0_via_projection,
    v0_via_T,
)
from geodissip.models import LandauLifschitzModel, RigidBodyModel

UNIT = [1.0, 1.0, 1.0]
LEAF_POINTS = [(0.4, 0.3), (1.2, -2.0), (2.5, 1.1)]


@pytest.fixture
def ll():
    return LandauLifschitzModel()


@pytest.fixture
def ll_scaled():
    return LandauLifschitzModel(gamma=0.5, lambda_=2.0, b=(0.3, -0.2, 1.0))


@pytest.fixture
def rb():
    return RigidBodyModel(3.0, 2.0, 1.0)


def test_ll_base_field(ll):
    assert models.ll_base_field(ll, [1.0, 0.0, 0.0]) == pytest.approx([0, -1, 0])


def test_ll_base_field_parallel_to_field(ll):
    assert models.ll_base_field(ll, [0.0, 0.0, 2.0]) == pytest.approx([0, 0, 0])


def test_ll_base_field_is_orthogonal(ll_scaled, rng):
    M = rng.normal(size=3)
    X = models.ll_base_field(ll_scaled, M)
    assert X @ M == pytest.approx(0.0, abs=1e-12)
    assert X @ ll_scaled.b == pytest.approx(0.0, abs=1e-12)


def test_ll_perturbation(ll):
    assert models.ll_perturbation(ll, [1.0, 0.0, 0.0]) == pytest.approx([0, 0, -1])


def test_ll_perturbation_vanishes_at_fixed_points(ll):
    assert models.ll_perturbation(ll, [0.0, 0.0, -3.0]) == pytest.approx([0, 0, 0])


def test_ll_perturbation_conserves_norm(ll_scaled, rng):
    M = rng.normal(size=3)
    assert models.ll_perturbation(ll_scaled, M) @ M == pytest.approx(0.0, abs=1e-12)


def test_ll_perturbation_is_v0(ll_scaled, rng):
    M = rng.normal(size=3)
    assert models.ll_perturbation(ll_scaled, M) == pytest.approx(
        v0(ll_scaled.problem(), M), rel=1e-10
    )


def test_ll_perturbation_is_double_bracket(ll_scaled, rng):
    M = rng.normal(size=3)
    assert models.ll_perturbation(ll_scaled, M) == pytest.approx(
        models.ll_double_bracket(ll_scaled, M), rel=1e-10
    )


def test_ll_excludes_origin(ll):
    with pytest.raises(OriginExcluded):
        models.ll_perturbation(ll, [0.0, 0.0, 0.0])


def test_ll_v0_hodge(ll):
    assert v0_hodge(ll.problem(), [1.0, 0.0, 0.0]) == pytest.approx([0, 0, -1])


def test_ll_v0_via_T(ll_scaled, rng):
    M = rng.normal(size=3)
    assert v0_via_T(ll_scaled.problem(), M) == pytest.approx(
        models.ll_perturbation(ll_scaled, M), rel=1e-9
    )


def test_ll_flow(ll):
    rhs = models.ll_flow(ll)
    assert rhs([1.0, 0.0, 0.0]) == pytest.approx([0.0, -1.0, -1.0])


def test_ll_trends(ll):
    assert ll.trends == {"F": "conserved", "G": "increasing", "H": "decreasing"}


def test_ll_custom_hamiltonian():
    from geodissip.manifold import ScalarField

    H = ScalarField.quadratic(np.diag([1.0, 2.0, 3.0]), name="H")
    model = LandauLifschitzModel(hamiltonian=H)
    M = np.array([0.3, 0.4, 1.2])
    assert models.ll_perturbation(model, M) == pytest.approx(
        v0(model.problem(), M), rel=1e-10
    )


@pytest.mark.parametrize(
    "kwargs", [{"gamma": 0.0}, {"gamma": 1.0, "lambda_": -1.0}, {"gamma": math.nan}]
)
def test_ll_invalid_parameters(kwargs):
    with pytest.raises(ValueError):
        LandauLifschitzModel(**kwargs)


def test_rb_base_field(rb):
    assert models.rb_base_field(rb, UNIT) == pytest.approx([0.5, -2 / 3, 1 / 6])


def test_rb_base_field_equilibrium(rb):
    assert models.rb_base_field(rb, [1.0, 0.0, 0.0]) == pytest.approx([0, 0, 0])


def test_rb_base_field_conserves_energy_and_casimir(rb, rng):
    x = rng.normal(size=3)
    X = models.rb_base_field(rb, x)

    assert rb.hamiltonian.partials(x) @ X == pytest.approx(0.0, abs=1e-12)
    assert rb.casimir.partials(x) @ X == pytest.approx(0.0, abs=1e-12)


def test_morrison_matrix_entry(rb):
    assert models.morrison_matrix(rb, UNIT)[0, 0] == pytest.approx(1.25)


def test_morrison_matrix_structure(rb, rng):
    x = rng.normal(size=3)
    grad_H = rb.hamiltonian.partials(x)
    expected = grad_H @ grad_H * np.eye(3) - np.outer(grad_H, grad_H)
    matrix = models.morrison_matrix(rb, x)

    assert matrix == pytest.approx(expected, abs=1e-12)
    assert matrix @ grad_H == pytest.approx(np.zeros(3), abs=1e-12)
    assert np.linalg.eigvalsh(matrix).min() >= -1e-12


def test_rb_dissipation_at_unit_point(rb):
    assert models.rb_dissipation(rb, UNIT) == pytest.approx([3 / 4, 4 / 9, -17 / 36])


@pytest.mark.parametrize("formulation", [v0, v0_hodge, v0_via_T, v0_via_projection])
def test_rb_formulations_at_unit_point(rb, formulation):
    v = formulation(rb.problem(), UNIT)
    assert v == pytest.approx([3 / 4, 4 / 9, -17 / 36], rel=1e-9)
    assert rb.hamiltonian.partials(UNIT) @ v == pytest.approx(0.0, abs=1e-12)


def test_rb_tensor_T_is_morrison_matrix(rb, rng):
    x = rng.normal(size=3)
    assert tensor_T(rb.problem(), x) == pytest.approx(
        models.morrison_matrix(rb, x), abs=1e-12
    )


def test_rb_metriplectic_flow(rb):
    rhs = models.rb_metriplectic_flow(rb)
    assert rhs(UNIT) == pytest.approx([0.5 + 3 / 4, -2 / 3 + 4 / 9, 1 / 6 - 17 / 36])


@pytest.mark.parametrize("moments", [(1.0, 2.0, 3.0), (3.0, 3.0, 1.0), (3, 2, 0)])
def test_rb_requires_ordered_moments(moments):
    with pytest.raises(ValueError):
        RigidBodyModel(*moments)


def test_rb_axisymmetric():
    model = RigidBodyModel.axisymmetric(2.0, 1.0)
    assert model.is_axisymmetric
    assert model.moments.tolist() == [2.0, 2.0, 1.0]

    with pytest.raises(ValueError, match="I1 = I2"):
        RigidBodyModel.axisymmetric(1.0, 1.0)


@pytest.mark.parametrize("c", [0.5, 2.0])
@pytest.mark.parametrize("y", LEAF_POINTS)
def test_ll_leaf_chart_lies_on_level(ll_scaled, c, y):
    chart = models.ll_leaf_chart(ll_scaled, c)
    assert ll_scaled.conserved(chart.point(y)) == pytest.approx(c, rel=1e-12)
    assert chart.check_basis(y)


@pytest.mark.parametrize("c", [0.5, 2.0])
@pytest.mark.parametrize("y", LEAF_POINTS)
def test_rb_leaf_chart_lies_on_level(rb, c, y):
    chart = models.rb_leaf_chart(rb, c)
    assert rb.hamiltonian(chart.point(y)) == pytest.approx(c, rel=1e-12)


@pytest.mark.parametrize("c", [0.0, -1.0, math.nan])
def test_leaf_charts_reject_non_positive_levels(ll, rb, c):
    with pytest.raises(InvalidLevel):
        models.ll_leaf_chart(ll, c)

    with pytest.raises(InvalidLevel):
        models.rb_leaf_chart(rb, c)


def test_leaf_chart_excludes_poles(ll):
    chart = models.ll_leaf_chart(ll, 1.0)

    with pytest.raises(InvalidPoint, match="outside the domain"):
        chart.point([0.0, 0.0])


@pytest.mark.parametrize("y", LEAF_POINTS)
def test_ll_leaf_metric(ll_scaled, y):
    c = 1.5
    chart = models.ll_leaf_chart(ll_scaled, c)
    p = ll_scaled.problem()

    assert leaf_metric(p, chart, y) == pytest.approx(
        models.ll_leaf_metric_closed(ll_scaled, c, y), rel=1e-9
    )
    assert induced_metric(p.metric, chart, y) == pytest.approx(
        models.ll_induced_metric_closed(ll_scaled, c, y), rel=1e-9, abs=1e-12
    )


@pytest.mark.parametrize("y", LEAF_POINTS)
def test_ll_tensor_in_spherical_components(ll_scaled, y):
    c = 0.8
    chart = models.ll_leaf_chart(ll_scaled, c)
    T = tensor_T(ll_scaled.problem(), chart.point(y))

    assert leaf_components(chart, y, T) == pytest.approx(
        models.ll_tensor_spherical(ll_scaled, c, y), rel=1e-8, abs=1e-12
    )


@pytest.mark.parametrize("y", LEAF_POINTS)
def test_ll_leaf_gradient(ll_scaled, y):
    c = 1.2
    chart = models.ll_leaf_chart(ll_scaled, c)
    p = ll_scaled.problem()

    assert leaf_gradient(p, chart, y) == pytest.approx(
        models.ll_leaf_gradient_closed(ll_scaled, c, y), rel=1e-6, abs=1e-9
    )
    assert leaf_gradient_check(p, chart, y).passed()


@pytest.mark.parametrize("y", LEAF_POINTS)
def test_rb_leaf_quantities(rb, y):
    c = 0.7
    chart = models.rb_leaf_chart(rb, c)
    p = rb.problem()
    x = chart.point(y)
    grad_H = rb.hamiltonian.partials(x)

    assert grad_H @ grad_H == pytest.approx(
        models.rb_grad_h_norm2_closed(rb, c, y), rel=1e-12
    )
    assert induced_metric(p.metric, chart, y) == pytest.approx(
        models.rb_induced_metric_closed(rb, c, y), rel=1e-9, abs=1e-12
    )
    assert leaf_gradient(p, chart, y) == pytest.approx(
        models.rb_leaf_gradient_closed(rb, c, y), rel=1e-6, abs=1e-9
    )
    assert leaf_gradient_check(p, chart, y).passed()


@pytest.mark.parametrize("y", LEAF_POINTS)
def test_axisymmetric_dissipation_has_no_phi_component(y):
    model = RigidBodyModel.axisymmetric(2.0, 1.0)
    chart = models.rb_leaf_chart(model, 1.0)
    v = v0(model.problem(), chart.point(y))
    components = np.linalg.pinv(chart.tangent_basis(y)) @ v

    assert abs(components[1]) <= 1e-10 * max(1.0, abs(components[0]))
    assert models.rb_leaf_gradient_closed(model, 1.0, y)[1] == 0.0


@pytest.mark.parametrize(
    "fn",
    [
        models.ll_leaf_metric_closed,
        models.ll_induced_metric_closed,
        models.ll_tensor_spherical,
        models.rb_grad_h_norm2_closed,
        models.rb_induced_metric_closed,
    ],
)
def test_closed_forms_require_positive_level(fn):
    model = RigidBodyModel() if fn.__name__.startswith("rb") else LandauLifschitzModel()

    with pytest.raises(ValueError, match="c must be a positive number"):
        fn(model, 0.0, (1.0, 1.0))


def test_build_model_with_defaults():
    model = models.build_model("landau-lifschitz")
    assert model.defaults() == {"gamma": 1.0, "lambda": 1.0, "b": [0.0, 0.0, 1.0]}


def test_build_model_with_params():
    params = {"I": [2.0, 2.0, 1.0], "axisymmetric": True}
    model = models.build_model("rigid-body", params)
    assert model.is_axisymmetric
    assert model.defaults() == {"I": [2.0, 2.0, 1.0], "axisymmetric": True}


def test_build_model_unknown_name():
    with pytest.raises(ValueError, match="not a valid model"):
        models.build_model("pendulum")


def test_build_model_unknown_parameter():
    with pytest.raises(ValueError, match="Unknown parameters"):
        models.build_model("landau-lifschitz", {"alpha": 1.0})


def test_registered_flows(rb, ll):
    assert models.base_field(rb)(UNIT) == pytest.approx([0.5, -2 / 3, 1 / 6])
    assert models.dissipation(ll)([1.0, 0.0, 0.0]) == pytest.approx([0, 0, -1])
