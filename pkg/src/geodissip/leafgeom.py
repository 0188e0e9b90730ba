"""
Geometry of the regular leaves F_1 = c_1, ..., F_k = c_k: the contravariant
tensor T whose contraction with dG is v0, the orthogonal projector onto the
leaves, the leaf metric conformal to the induced one and the scaling law for
functionally dependent conserved quantities
"""
from dataclasses import dataclass
import logging

import numpy as np
from scipy import linalg

from geodissip import manifold
from geodissip.control import ControlProblem, v0
from geodissip.exceptions import DimensionMismatch, InvalidPoint
from geodissip.gram import GramFrame, check_regular, determinant
from geodissip.manifold import as_coords, as_vector
from geodissip.telemetry import GeodissipLogger
from geodissip.util import central_differences, central_jacobian, relative_deviation

logger = logging.getLogger(__name__)

BASIS_INDEPENDENCE = 1e-8
LEAF_DEVIATION_FLOOR = 1e-6


def _conserved_frame(p, x):
    return GramFrame.of(p.metric, p.conserved, x)


def _tensor_from_frame(frame, ginv):
    k = frame.size
    everything = range(k)
    T = determinant(frame.gram) * ginv

    for i in range(k):
        rows = [r for r in everything if r != i]

        for j in range(k):
            cols = [c for c in everything if c != j]
            minor = determinant(frame.gram[np.ix_(rows, cols)])
            sign = (-1) ** (i + j + 3)
            T = T + sign * minor * np.outer(frame.grads[i], frame.grads[j])

    return T


def tensor_T(p, x):
    """Contravariant components T^{pq} at x

    Examples
    --------
    >>> from geodissip.manifold import MetricField, ScalarField
    >>> from geodissip.control import ControlProblem
    >>> from geodissip.leafgeom import tensor_T
    >>> p = ControlProblem(MetricField.euclidean(3),
    ...                    [ScalarField.half_norm_squared(3)],
    ...                    ScalarField.coordinate(3, 3))
    >>> tensor_T(p, [1.0, 0.0, 0.0])
    array([[0., 0., 0.],
           [0., 1., 0.],
           [0., 0., 1.]])
    """
    coords = as_coords(x, p.dim)
    return _tensor_from_frame(_conserved_frame(p, coords), p.metric.inverse(coords))


class TensorT:
    """The tensor T of a problem, evaluated on demand"""

    def __init__(self, problem):
        self.problem = problem

    def __call__(self, x):
        return tensor_T(self.problem, x)

    def contract(self, x, alpha, beta=None):
        """T(alpha, beta), or the vector T(alpha, .) when beta is omitted"""
        vector = self(x) @ as_vector(alpha, self.problem.dim, name="alpha")

        if beta is None:
            return vector

        return float(as_vector(beta, self.problem.dim, name="beta") @ vector)


def v0_via_T(p, x):
    """Contraction of T with dG"""
    coords = as_coords(x, p.dim)
    return tensor_T(p, coords) @ p.target.partials(coords)


def _projector_from_frame(frame):
    n = frame.grads.shape[1]
    coefficients = linalg.solve(frame.gram, frame.partials, assume_a="pos")
    return np.eye(n) - frame.grads.T @ coefficients


def projector(p, x):
    """
    Orthogonal projection of the tangent space onto the tangent space of the
    leaf through x. Raises DegenerateGram at irregular points of (F_1..F_k)
    """
    frame = _conserved_frame(p, as_coords(x, p.dim))
    check_regular(frame)
    return _projector_from_frame(frame)


def v0_via_projection(p, x):
    """det Sigma_FF times the leaf projection of grad G"""
    coords = as_coords(x, p.dim)
    frame = _conserved_frame(p, coords)
    det = check_regular(frame)
    grad_G = manifold.gradient(p.metric, p.target, coords)
    return det * (_projector_from_frame(frame) @ grad_G)


def tangential_part(p, x, beta):
    """
    Component of the covector ``beta`` annihilating every conserved gradient
    (the metric projection onto the leaf covectors)
    """
    coords = as_coords(x, p.dim)
    beta = as_vector(beta, p.dim, name="beta")
    frame = _conserved_frame(p, coords)
    check_regular(frame)
    coefficients = linalg.solve(frame.gram, frame.grads @ beta, assume_a="pos")
    return beta - frame.partials.T @ coefficients


@dataclass
class FlatTReport:
    """Check of T applied to flat_g(X) / det Sigma for a leaf-tangent X"""

    tangential_residual: float
    deviation: float

    def passed(self, tolerance=1e-9):
        return self.tangential_residual <= tolerance and self.deviation <= tolerance


@GeodissipLogger.log(feature="leafgeom")
def flat_T_check(p, x, X):
    """
    For X tangent to the leaf, alpha = flat_g(X) / det Sigma_FF must be
    tangential and satisfy T(alpha, .) = X
    """
    coords = as_coords(x, p.dim)
    X = as_vector(X, p.dim, name="X")
    frame = _conserved_frame(p, coords)
    det = check_regular(frame)
    alpha = manifold.flat(p.metric, coords, X) / det

    scale = float(np.max(np.abs(alpha))) * float(np.max(np.abs(frame.grads)))
    scale = max(scale, 1e-300)
    residual = float(np.max(np.abs(frame.grads @ alpha))) / scale
    T = _tensor_from_frame(frame, p.metric.inverse(coords))

    return FlatTReport(
        tangential_residual=residual,
        deviation=relative_deviation(T @ alpha, X),
    )


@dataclass(frozen=True)
class LeafChart:
    """Explicit parametrization of a regular leaf

    Parameters
    ----------
    dim : int
        Dimension n of the ambient chart

    leaf_dim : int
        Dimension m = n - k of the leaf

    embedding : callable
        Maps leaf coordinates (length m) to ambient coordinates (length n)

    basis : callable, default=None
        Maps leaf coordinates to the n x m matrix whose columns push forward
        the coordinate frame. Central finite differences of ``embedding`` are
        used when omitted

    domain : sequence of (low, high), default=None
        Open box of admissible leaf coordinates

    level : tuple, default=()
        The values c of the conserved fields on the leaf
    """

    dim: int
    leaf_dim: int
    embedding: object
    basis: object = None
    domain: tuple = None
    level: tuple = ()
    name: str = "leaf"

    def _coords(self, y):
        y = np.asarray(y, dtype=float)

        if y.shape != (self.leaf_dim,):
            raise DimensionMismatch(
                f"Leaf point of {self.name!r} must have {self.leaf_dim} "
                f"coordinates, got shape {y.shape}"
            )

        if self.domain is not None:
            for value, (low, high) in zip(y, self.domain):
                if not low < value < high:
                    raise InvalidPoint(
                        f"Leaf coordinates {y!r} are outside the domain of "
                        f"{self.name!r}: {self.domain!r}"
                    )

        return y

    def point(self, y):
        """Ambient coordinates i_c(y)"""
        return as_coords(self.embedding(self._coords(y)), self.dim)

    def tangent_basis(self, y):
        y = self._coords(y)

        if self.basis is None:
            B = central_jacobian(self.embedding, y)
        else:
            B = np.asarray(self.basis(y), dtype=float)

        if B.shape != (self.dim, self.leaf_dim):
            raise DimensionMismatch(
                f"Tangent basis of {self.name!r} has shape {B.shape}, expected "
                f"{(self.dim, self.leaf_dim)}"
            )

        return B

    def check_basis(self, y):
        """True when the basis columns are numerically independent"""
        s = np.linalg.svd(self.tangent_basis(y), compute_uv=False)
        return bool(s[-1] > BASIS_INDEPENDENCE * s[0])


def induced_metric(g, chart, y):
    """First fundamental form B^T g B of the leaf at y"""
    x = chart.point(y)
    B = chart.tangent_basis(y)
    return B.T @ g(x) @ B


def leaf_metric(p, chart, y):
    """The leaf metric: induced metric divided by det Sigma_FF"""
    x = chart.point(y)

    if not chart.check_basis(y):
        raise InvalidPoint(
            f"The tangent basis of chart {chart.name!r} is degenerate at y={y!r}"
        )

    det = check_regular(_conserved_frame(p, x))
    return induced_metric(p.metric, chart, y) / det


def leaf_components(chart, y, matrix):
    """
    Leaf components S of a tangential contravariant 2-tensor, B S B^T = matrix
    """
    B = chart.tangent_basis(y)
    left = np.linalg.pinv(B)
    return left @ np.asarray(matrix, dtype=float) @ left.T


def leaf_gradient(p, chart, y):
    """Leaf components of the gradient of G restricted to the leaf"""
    y = chart._coords(y)
    tau = leaf_metric(p, chart, y)
    partials = central_differences(lambda z: p.target(chart.embedding(z)), y)
    return linalg.solve(tau, partials, assume_a="pos")


@dataclass
class LeafGradientReport:
    """Comparison of the pushed-forward leaf gradient against v0"""

    leaf_components: np.ndarray
    pushed_forward: np.ndarray
    v0: np.ndarray
    max_relative_deviation: float

    def passed(self, tolerance=1e-6):
        return self.max_relative_deviation <= tolerance


@GeodissipLogger.log(feature="leafgeom")
def leaf_gradient_check(p, chart, y):
    """
    Push the leaf gradient of G through the tangent basis and compare with v0
    at the embedded point. The deviation is relative to max(|v0|, 1e-6)
    """
    components = leaf_gradient(p, chart, y)
    pushed = chart.tangent_basis(y) @ components
    expected = v0(p, chart.point(y))
    scale = max(float(np.max(np.abs(expected))), LEAF_DEVIATION_FLOOR)

    return LeafGradientReport(
        leaf_components=components,
        pushed_forward=pushed,
        v0=expected,
        max_relative_deviation=float(np.max(np.abs(pushed - expected))) / scale,
    )


def linear_reparametrization(fields, matrix, offset=None):
    """
    H_i = sum_j matrix[i][j] F_j + offset_i, returned with det(matrix) (the
    Jacobian determinant of the reparametrization)
    """
    fields = list(fields)
    matrix = np.asarray(matrix, dtype=float)

    if matrix.shape != (len(fields), len(fields)):
        raise DimensionMismatch(
            f"Reparametrization matrix must be {len(fields)} x {len(fields)}, "
            f"got {matrix.shape}"
        )

    offset = np.zeros(len(fields)) if offset is None else np.asarray(offset, float)
    rescaled = [
        manifold.linear_combination(fields, row, offset=b, name=f"H{i + 1}")
        for i, (row, b) in enumerate(zip(matrix, offset))
    ]
    return rescaled, determinant(matrix)


@dataclass
class RescaleReport:
    """Scaling of v0 and det Sigma under a reparametrization of the leaves"""

    factor: float
    v0_deviation: float
    det_deviation: float

    def passed(self, tolerance=1e-8):
        return self.v0_deviation <= tolerance and self.det_deviation <= tolerance


@GeodissipLogger.log(feature="leafgeom")
def dependent_rescale_check(p, h_jacobian_det, x, rescaled):
    """
    Compare v0 and det Sigma_FF of ``p`` with those of the same problem whose
    conserved fields are replaced by ``rescaled`` = h(F_1, ..., F_k). Both
    must scale by (det Dh)^2
    """
    coords = as_coords(x, p.dim)
    rescaled = list(rescaled)

    if len(rescaled) != p.k:
        raise DimensionMismatch(
            f"Expected {p.k} rescaled conserved fields, got {len(rescaled)}"
        )

    other = ControlProblem(p.metric, rescaled, p.target)
    factor = float(h_jacobian_det) ** 2

    det_F = check_regular(_conserved_frame(p, coords))
    det_H = check_regular(_conserved_frame(other, coords))

    return RescaleReport(
        factor=factor,
        v0_deviation=relative_deviation(v0(other, coords), factor * v0(p, coords)),
        det_deviation=relative_deviation(det_H, factor * det_F),
    )
