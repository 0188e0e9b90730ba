"""
Ready-made systems: the Landau-Lifschitz equation (damping = v0 for
F = sqrt(lambda/gamma) |M|, G = -H) and the rigid body with Morrison's
metriplectic dissipation (v0 for F = H, G = C0), with their leaf charts and
the closed-form leaf expressions
"""
import math

import numpy as np
from ploomber_core.exceptions import modify_exceptions

from geodissip.control import ControlProblem
from geodissip.exceptions import InvalidLevel, OriginExcluded
from geodissip.leafgeom import LeafChart
from geodissip.manifold import MetricField, ScalarField, as_coords
from geodissip.validate import argument_is_positive, choice

POLE_EXCLUSION = 1e-6

INCREASING = "increasing"
DECREASING = "decreasing"
CONSERVED = "conserved"


def _spherical_domain():
    return ((POLE_EXCLUSION, math.pi - POLE_EXCLUSION), (-math.inf, math.inf))


def _check_level(c):
    if not (math.isfinite(c) and c > 0):
        raise InvalidLevel(f"The leaf level c must be positive, got {c!r}")


def _check_unused(cls, params):
    if params:
        raise ValueError(f"Unknown parameters for {cls.name}: {sorted(params)}")


class LandauLifschitzModel:
    """Damped spin precession on R^3 minus the origin

    Parameters
    ----------
    gamma : float, default=1.0
        Gyromagnetic ratio, non-zero

    lambda_ : float, default=1.0
        Damping, with lambda_ / gamma > 0

    b : array-like, default=(0, 0, 1)
        Constant field, the default Hamiltonian is H(M) = b . M

    hamiltonian : ScalarField, default=None
        Any smooth H with gamma B = grad H, replaces ``b``
    """

    name = "landau-lifschitz"
    dim = 3

    def __init__(self, gamma=1.0, lambda_=1.0, b=(0.0, 0.0, 1.0), hamiltonian=None):
        gamma = float(gamma)
        lambda_ = float(lambda_)

        if gamma == 0.0 or not math.isfinite(gamma) or not math.isfinite(lambda_):
            raise ValueError(f"gamma must be finite and non-zero, got {gamma!r}")

        if not lambda_ / gamma > 0:
            raise ValueError(
                f"lambda / gamma must be positive, got lambda={lambda_!r}, "
                f"gamma={gamma!r}"
            )

        self.gamma = gamma
        self.lambda_ = lambda_
        self.b = np.array(b, dtype=float)

        if hamiltonian is None:
            hamiltonian = ScalarField.linear(self.b, name="H")

        self.hamiltonian = hamiltonian
        self.metric = MetricField.euclidean(3)

    @property
    def ratio(self):
        """lambda / gamma"""
        return self.lambda_ / self.gamma

    @property
    def conserved(self):
        return ScalarField.norm(3, math.sqrt(self.ratio), name="F")

    @property
    def target(self):
        target = -self.hamiltonian
        target.name = "G"
        return target

    @property
    def trends(self):
        return {"F": CONSERVED, "G": INCREASING, "H": DECREASING}

    def problem(self, rate=None):
        return ControlProblem(self.metric, [self.conserved], self.target, rate=rate)

    def defaults(self):
        return {"gamma": self.gamma, "lambda": self.lambda_, "b": self.b.tolist()}

    @classmethod
    def from_params(cls, params):
        params = dict(params)
        model = cls(
            gamma=params.pop("gamma", 1.0),
            lambda_=params.pop("lambda", 1.0),
            b=params.pop("b", (0.0, 0.0, 1.0)),
        )
        _check_unused(cls, params)
        return model

    def __repr__(self):
        return (
            f"{type(self).__name__}(gamma={self.gamma!r}, lambda_={self.lambda_!r}, "
            f"b={self.b.tolist()!r})"
        )


class RigidBodyModel:
    """Free rigid body with principal moments I1 > I2 > I3 > 0

    The axisymmetric case I1 = I2 is built with ``RigidBodyModel.axisymmetric``
    """

    name = "rigid-body"
    dim = 3

    def __init__(self, I1=3.0, I2=2.0, I3=1.0, casimir=None, *, _axisymmetric=False):
        moments = np.array([I1, I2, I3], dtype=float)

        if not np.all(np.isfinite(moments)) or np.any(moments <= 0):
            raise ValueError(f"Moments of inertia must be positive, got {moments}")

        if _axisymmetric:
            if not (moments[0] == moments[1] and moments[1] != moments[2]):
                raise ValueError(
                    f"The axisymmetric body needs I1 = I2 != I3, got {moments}"
                )
        elif not moments[0] > moments[1] > moments[2]:
            raise ValueError(
                f"Moments of inertia must satisfy I1 > I2 > I3, got {moments}"
            )

        self.moments = moments
        self.casimir = casimir or ScalarField.half_norm_squared(3, name="C0")
        self.metric = MetricField.euclidean(3)

    @classmethod
    def axisymmetric(cls, I1=2.0, I3=1.0, casimir=None):
        return cls(I1, I1, I3, casimir, _axisymmetric=True)

    @property
    def is_axisymmetric(self):
        return self.moments[0] == self.moments[1]

    @property
    def hamiltonian(self):
        """H = 1/2 (x1^2 / I1 + x2^2 / I2 + x3^2 / I3)"""
        return ScalarField.quadratic(np.diag(1.0 / self.moments), name="H")

    @property
    def trends(self):
        return {"H": CONSERVED, "C0": INCREASING}

    def problem(self, rate=None):
        return ControlProblem(
            self.metric, [self.hamiltonian], self.casimir, rate=rate
        )

    def defaults(self):
        return {"I": self.moments.tolist(), "axisymmetric": bool(self.is_axisymmetric)}

    @classmethod
    def from_params(cls, params):
        params = dict(params)
        moments = params.pop("I", (3.0, 2.0, 1.0))
        axisymmetric = params.pop("axisymmetric", False)
        _check_unused(cls, params)

        if len(moments) != 3:
            raise ValueError(f"I must hold three moments of inertia, got {moments!r}")

        if axisymmetric:
            return cls.axisymmetric(moments[0], moments[2])

        return cls(*moments)

    def __repr__(self):
        return f"{type(self).__name__}(I={self.moments.tolist()!r})"


def _spin(M):
    M = as_coords(M, 3)

    if not np.any(M):
        raise OriginExcluded("The Landau-Lifschitz model is not defined at M = 0")

    return M


def ll_base_field(m, M):
    """M x grad H"""
    M = _spin(M)
    return np.cross(M, m.hamiltonian.partials(M))


def ll_perturbation(m, M):
    """(lambda / gamma |M|^2) <M, grad H> M - (lambda / gamma) grad H"""
    M = _spin(M)
    grad_H = m.hamiltonian.partials(M)
    return m.ratio * (float(M @ grad_H) / float(M @ M) * M - grad_H)


def ll_double_bracket(m, M):
    """(lambda / gamma |M|^2) M x (M x grad H)"""
    M = _spin(M)
    grad_H = m.hamiltonian.partials(M)
    return m.ratio / float(M @ M) * np.cross(M, np.cross(M, grad_H))


def ll_flow(m):
    """Right-hand side of the damped equation, base plus damping"""

    def rhs(M):
        return ll_base_field(m, M) + ll_perturbation(m, M)

    return rhs


def rb_base_field(m, x):
    """Euler equations of the free rigid body, x x grad H"""
    x = as_coords(x, 3)
    I1, I2, I3 = m.moments
    return np.array(
        [
            (1 / I3 - 1 / I2) * x[1] * x[2],
            (1 / I1 - 1 / I3) * x[0] * x[2],
            (1 / I2 - 1 / I1) * x[0] * x[1],
        ]
    )


def morrison_matrix(m, x):
    """Entries of the metriplectic matrix [h^ij](x)

    Examples
    --------
    >>> from geodissip.models import RigidBodyModel, morrison_matrix
    >>> round(float(morrison_matrix(RigidBodyModel(3, 2, 1), [1, 1, 1])[0, 0]), 12)
    1.25
    """
    x = as_coords(x, 3)
    I1, I2, I3 = m.moments
    x1, x2, x3 = x
    return np.array(
        [
            [x2**2 / I2**2 + x3**2 / I3**2, -x1 * x2 / (I1 * I2), -x1 * x3 / (I1 * I3)],
            [-x1 * x2 / (I1 * I2), x1**2 / I1**2 + x3**2 / I3**2, -x2 * x3 / (I2 * I3)],
            [-x1 * x3 / (I1 * I3), -x2 * x3 / (I2 * I3), x1**2 / I1**2 + x2**2 / I2**2],
        ]
    )


def rb_dissipation(m, x):
    """Morrison's dissipation [h^ij] grad C"""
    x = as_coords(x, 3)
    return morrison_matrix(m, x) @ m.casimir.partials(x)


def rb_metriplectic_flow(m):
    """Right-hand side of the Euler equations plus the metriplectic term"""

    def rhs(x):
        return rb_base_field(m, x) + rb_dissipation(m, x)

    return rhs


def ll_leaf_chart(m, c):
    """Sphere |M| = r, r = sqrt(gamma / lambda) c, in coordinates (theta, phi)"""
    _check_level(c)
    r = math.sqrt(1.0 / m.ratio) * c

    def embedding(y):
        theta, phi = y
        return r * np.array(
            [
                math.sin(theta) * math.cos(phi),
                math.sin(theta) * math.sin(phi),
                math.cos(theta),
            ]
        )

    def basis(y):
        theta, phi = y
        st, ct = math.sin(theta), math.cos(theta)
        sp, cp = math.sin(phi), math.cos(phi)
        return r * np.array([[ct * cp, -st * sp], [ct * sp, st * cp], [-st, 0.0]])

    return LeafChart(
        dim=3,
        leaf_dim=2,
        embedding=embedding,
        basis=basis,
        domain=_spherical_domain(),
        level=(float(c),),
        name=f"LL sphere c={c!r}",
    )


def rb_leaf_chart(m, c):
    """Ellipsoid H = c: x = r (sqrt(I1) s c, sqrt(I2) s s, sqrt(I3) c), r = sqrt(2c)"""
    _check_level(c)
    r = math.sqrt(2.0 * c)
    roots = np.sqrt(m.moments)

    def embedding(y):
        theta, phi = y
        return (
            r
            * roots
            * np.array(
                [
                    math.sin(theta) * math.cos(phi),
                    math.sin(theta) * math.sin(phi),
                    math.cos(theta),
                ]
            )
        )

    def basis(y):
        theta, phi = y
        st, ct = math.sin(theta), math.cos(theta)
        sp, cp = math.sin(phi), math.cos(phi)
        frame = np.array([[ct * cp, -st * sp], [ct * sp, st * cp], [-st, 0.0]])
        return r * roots[:, np.newaxis] * frame

    return LeafChart(
        dim=3,
        leaf_dim=2,
        embedding=embedding,
        basis=basis,
        domain=_spherical_domain(),
        level=(float(c),),
        name=f"RB ellipsoid c={c!r}",
    )


@argument_is_positive("c")
def ll_leaf_metric_closed(m, c, y):
    """(gamma^2 c^2 / lambda^2) diag(1, sin^2 theta)"""
    theta = y[0]
    return c**2 / m.ratio**2 * np.diag([1.0, math.sin(theta) ** 2])


@argument_is_positive("c")
def ll_induced_metric_closed(m, c, y):
    """(gamma / lambda) c^2 diag(1, sin^2 theta)"""
    theta = y[0]
    return c**2 / m.ratio * np.diag([1.0, math.sin(theta) ** 2])


@argument_is_positive("c")
def ll_tensor_spherical(m, c, y):
    """Leaf components of T: (lambda / gamma r^2) diag(1, 1 / sin^2 theta)"""
    theta = y[0]
    r = math.sqrt(1.0 / m.ratio) * c
    return m.ratio / r**2 * np.diag([1.0, 1.0 / math.sin(theta) ** 2])


def ll_leaf_gradient_closed(m, c, y):
    """
    Leaf components of v0 on the sphere:
    -(lambda^2 / gamma^2 c^2) (dH/dtheta, dH/dphi / sin^2 theta)
    """
    chart = ll_leaf_chart(m, c)
    dH = m.hamiltonian.partials(chart.point(y)) @ chart.tangent_basis(y)
    theta = y[0]
    factor = m.ratio**2 / c**2
    return -factor * np.array([dH[0], dH[1] / math.sin(theta) ** 2])


@argument_is_positive("c")
def rb_grad_h_norm2_closed(m, c, y):
    """|grad H|^2 = 2c (s^2 c^2 / I1 + s^2 s^2 / I2 + c^2 / I3) on the ellipsoid"""
    theta, phi = y
    I1, I2, I3 = m.moments
    st, ct = math.sin(theta), math.cos(theta)
    sp, cp = math.sin(phi), math.cos(phi)
    return 2 * c * (st**2 * cp**2 / I1 + st**2 * sp**2 / I2 + ct**2 / I3)


@argument_is_positive("c")
def rb_induced_metric_closed(m, c, y):
    """First fundamental form of the ellipsoid H = c"""
    theta, phi = y
    I1, I2, I3 = m.moments
    st, ct = math.sin(theta), math.cos(theta)
    sp, cp = math.sin(phi), math.cos(phi)
    r2 = 2.0 * c
    g_tt = r2 * (I1 * ct**2 * cp**2 + I2 * ct**2 * sp**2 + I3 * st**2)
    g_tp = r2 * st * ct * sp * cp * (I2 - I1)
    g_pp = r2 * st**2 * (I1 * sp**2 + I2 * cp**2)
    return np.array([[g_tt, g_tp], [g_tp, g_pp]])


def rb_leaf_gradient_closed(m, c, y):
    """
    Leaf components of v0 on the ellipsoid:
    (2c s c (1/I3 - sin^2 phi / I2 - cos^2 phi / I1), 2c (1/I1 - 1/I2) s c)
    """
    theta, phi = y
    I1, I2, I3 = m.moments
    st, ct = math.sin(theta), math.cos(theta)
    sp, cp = math.sin(phi), math.cos(phi)
    return np.array(
        [
            2 * c * st * ct * (1 / I3 - sp**2 / I2 - cp**2 / I1),
            2 * c * (1 / I1 - 1 / I2) * sp * cp,
        ]
    )


MODELS = {
    LandauLifschitzModel.name: LandauLifschitzModel,
    RigidBodyModel.name: RigidBodyModel,
}

FLOWS = {
    LandauLifschitzModel.name: (ll_base_field, ll_perturbation),
    RigidBodyModel.name: (rb_base_field, rb_dissipation),
}


@modify_exceptions
def build_model(name, params=None):
    """Instantiate a registered model from a parameter mapping"""
    choice("model", name, MODELS)
    return MODELS[name].from_params(params or {})


def base_field(model):
    """The unperturbed vector field of a registered model"""
    base, _ = FLOWS[model.name]
    return lambda x: base(model, x)


def dissipation(model):
    """The closed-form v0 of a registered model"""
    _, closed = FLOWS[model.name]
    return lambda x: closed(model, x)
