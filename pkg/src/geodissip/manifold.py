"""
Chart points, Riemannian metrics and scalar fields on a single coordinate
chart, plus the musical operations (gradient, flat) and the metric inner
product.

A "manifold" here is one open chart of R^n. Punctured domains (e.g. R^3 minus
the origin) document their excluded set and fail when evaluated there.
"""
from dataclasses import dataclass
import logging

import numpy as np
from scipy import linalg

from geodissip.exceptions import (
    DimensionMismatch,
    InvalidMetric,
    InvalidPoint,
    OriginExcluded,
    SingularMetric,
)
from geodissip.telemetry import GeodissipLogger
from geodissip.util import central_differences

logger = logging.getLogger(__name__)

SYMMETRY_TOLERANCE = 1e-12


@dataclass(frozen=True)
class ChartPoint:
    """Coordinates of a point in an n-dimensional chart

    Parameters
    ----------
    coords : array-like
        Coordinates (x^1, ..., x^n), all finite
    """

    coords: np.ndarray

    def __post_init__(self):
        coords = np.array(self.coords, dtype=float)

        if coords.ndim != 1:
            raise DimensionMismatch(
                f"A chart point must be a 1d array, got shape {coords.shape}"
            )

        if not np.all(np.isfinite(coords)):
            raise InvalidPoint(f"Chart point has non-finite coordinates: {coords!r}")

        coords.flags.writeable = False
        object.__setattr__(self, "coords", coords)

    @property
    def dim(self):
        return self.coords.shape[0]

    @classmethod
    def of(cls, x, dim=None):
        """Build a point from a ChartPoint or an array-like, checking ``dim``"""
        point = x if isinstance(x, cls) else cls(x)

        if dim is not None and point.dim != dim:
            raise DimensionMismatch(
                f"Expected a point of dimension {dim}, got {point.dim}"
            )

        return point

    def __len__(self):
        return self.dim


def as_coords(x, dim=None):
    """Coordinates (read-only numpy array) of a point or array-like"""
    return ChartPoint.of(x, dim).coords


def as_vector(v, dim, name="vector"):
    """Components of a tangent vector (or covector) as a float array"""
    v = np.asarray(v, dtype=float)

    if v.ndim != 1 or v.shape[0] != dim:
        raise DimensionMismatch(
            f"{name} must have {dim} components, got shape {v.shape}"
        )

    return v


class MetricFactor:
    """Factorization of g(x): Cholesky when positive definite, LU otherwise"""

    def __init__(self, matrix, kind, factors):
        self.matrix = matrix
        self.kind = kind
        self._factors = factors

    def solve(self, b):
        if self.kind == "identity":
            return np.array(b, dtype=float)
        elif self.kind == "cholesky":
            return linalg.cho_solve(self._factors, b)
        else:
            return linalg.lu_solve(self._factors, b)

    def inverse(self):
        return self.solve(np.eye(self.matrix.shape[0]))

    def det(self):
        if self.kind == "identity":
            return 1.0
        elif self.kind == "cholesky":
            c, _ = self._factors
            return float(np.prod(np.diag(c)) ** 2)
        else:
            lu, piv = self._factors
            swaps = np.count_nonzero(piv != np.arange(piv.shape[0]))
            return float((-1) ** swaps * np.prod(np.diag(lu)))


class MetricField:
    """Map from a chart point to the symmetric positive-definite matrix g_ij(x)

    Parameters
    ----------
    dim : int
        Chart dimension n

    evaluator : callable
        Takes the coordinates (numpy array of length n) and returns the n x n
        matrix of components g_ij

    name : str, default="metric"
        Label used in messages and reports

    Notes
    -----
    Positive definiteness is checked lazily: only when the Cholesky
    factorization fails, in which case an LU factorization is used and a
    warning is logged.
    """

    def __init__(self, dim, evaluator, *, name="metric", euclidean=False):
        if dim < 1:
            raise ValueError(f"dim must be a positive integer, got {dim!r}")

        self.dim = int(dim)
        self._evaluator = evaluator
        self.name = name
        self.is_euclidean = euclidean

    def __call__(self, x):
        coords = as_coords(x, self.dim)
        matrix = np.asarray(self._evaluator(coords), dtype=float)

        if matrix.shape != (self.dim, self.dim):
            raise DimensionMismatch(
                f"{self.name} returned a matrix of shape {matrix.shape}, "
                f"expected {(self.dim, self.dim)}"
            )

        if np.max(np.abs(matrix - matrix.T)) > SYMMETRY_TOLERANCE:
            raise InvalidMetric(f"{self.name} is not symmetric at {coords!r}")

        return matrix

    def factor(self, x):
        """Factorize g(x), raises SingularMetric if it cannot be inverted"""
        if self.is_euclidean:
            as_coords(x, self.dim)
            return MetricFactor(np.eye(self.dim), "identity", None)

        matrix = self(x)

        try:
            return MetricFactor(matrix, "cholesky", linalg.cho_factor(matrix))
        except linalg.LinAlgError:
            logger.warning(
                "%s is not positive definite at %r, using LU", self.name, x
            )

        lu, piv = linalg.lu_factor(matrix, check_finite=True)
        pivots = np.abs(np.diag(lu))
        scale = max(np.max(np.abs(matrix)), 1.0)

        if np.min(pivots) <= np.finfo(float).eps * self.dim * scale:
            raise SingularMetric(f"{self.name} is singular at {as_coords(x)!r}")

        return MetricFactor(matrix, "lu", (lu, piv))

    def inverse(self, x):
        """Components g^{ij}(x)"""
        return self.factor(x).inverse()

    def det(self, x):
        """Determinant |g|(x)"""
        return self.factor(x).det()

    @classmethod
    def euclidean(cls, dim):
        return cls(dim, lambda x: np.eye(dim), name="euclidean", euclidean=True)

    @classmethod
    def diagonal(cls, diag, *, name="diagonal"):
        diag = np.array(diag, dtype=float)
        matrix = np.diag(diag)
        matrix.flags.writeable = False
        return cls(diag.shape[0], lambda x: matrix, name=name)

    @classmethod
    def constant(cls, matrix, *, name="constant"):
        matrix = np.array(matrix, dtype=float)
        matrix.flags.writeable = False
        return cls(matrix.shape[0], lambda x: matrix, name=name)

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim}, name={self.name!r})"


class ScalarField:
    """A smooth function F: chart -> R with its coefficient vector dF

    Parameters
    ----------
    dim : int
        Chart dimension n

    value : callable
        Takes the coordinates and returns a float

    partials : callable, default=None
        Takes the coordinates and returns the n partial derivatives. If None,
        central finite differences are used (step max(1e-6, 1e-6 |x^a|))

    name : str, default=None
        Label used in messages and reports
    """

    def __init__(self, dim, value, partials=None, *, name=None):
        self.dim = int(dim)
        self._value = value
        self._partials = partials
        self.name = name or "F"

    @property
    def has_analytic_partials(self):
        return self._partials is not None

    def __call__(self, x):
        return float(self._value(as_coords(x, self.dim)))

    def partials(self, x):
        """Coefficients dF/dx^a at x (analytic when available)"""
        coords = as_coords(x, self.dim)

        if self._partials is None:
            return central_differences(self._value, coords)

        return as_vector(self._partials(coords), self.dim, name=f"d{self.name}")

    def finite_difference_partials(self, x):
        return central_differences(self._value, as_coords(x, self.dim))

    def _combine(self, other, a, b, name):
        if self.dim != other.dim:
            raise DimensionMismatch(
                f"Cannot combine fields of dimensions {self.dim} and {other.dim}"
            )

        def value(x):
            return a * self._value(x) + b * other._value(x)

        partials = None

        if self.has_analytic_partials and other.has_analytic_partials:

            def partials(x):
                return a * self.partials(x) + b * other.partials(x)

        return ScalarField(self.dim, value, partials, name=name)

    def __add__(self, other):
        return self._combine(other, 1.0, 1.0, f"({self.name} + {other.name})")

    def __sub__(self, other):
        return self._combine(other, 1.0, -1.0, f"({self.name} - {other.name})")

    def __mul__(self, scalar):
        scalar = float(scalar)
        partials = None

        if self.has_analytic_partials:

            def partials(x):
                return scalar * self.partials(x)

        return ScalarField(
            self.dim,
            lambda x: scalar * self._value(x),
            partials,
            name=f"{scalar!r}*{self.name}",
        )

    __rmul__ = __mul__

    def __neg__(self):
        field = self * -1.0
        field.name = f"-{self.name}"
        return field

    @classmethod
    def constant(cls, dim, value, *, name=None):
        value = float(value)
        return cls(
            dim,
            lambda x: value,
            lambda x: np.zeros(dim),
            name=name or f"const({value!r})",
        )

    @classmethod
    def coordinate(cls, dim, index, *, name=None):
        """The coordinate function x^index (1-based index)"""
        if not 1 <= index <= dim:
            raise DimensionMismatch(f"index must be in 1..{dim}, got {index}")

        e = np.zeros(dim)
        e[index - 1] = 1.0
        e.flags.writeable = False
        return cls(dim, lambda x: x[index - 1], lambda x: e, name=name or f"x{index}")

    @classmethod
    def linear(cls, coeffs, offset=0.0, *, name=None):
        """b . x + offset"""
        b = np.array(coeffs, dtype=float)
        b.flags.writeable = False
        offset = float(offset)
        return cls(
            b.shape[0], lambda x: float(b @ x) + offset, lambda x: b, name=name or "b.x"
        )

    @classmethod
    def quadratic(cls, matrix, linear=None, offset=0.0, *, name=None):
        """1/2 x^T A x + b . x + offset, with A symmetrized"""
        A = np.array(matrix, dtype=float)
        A = (A + A.T) / 2
        dim = A.shape[0]
        b = np.zeros(dim) if linear is None else np.array(linear, dtype=float)
        offset = float(offset)

        def value(x):
            return 0.5 * float(x @ A @ x) + float(b @ x) + offset

        def partials(x):
            return A @ x + b

        return cls(dim, value, partials, name=name or "quadratic")

    @classmethod
    def half_norm_squared(cls, dim, *, name="C0"):
        """C0 = 1/2 ||x||^2"""
        return cls(dim, lambda x: 0.5 * float(x @ x), lambda x: np.array(x), name=name)

    @classmethod
    def norm(cls, dim, scale=1.0, *, name=None):
        """scale * ||x||, excluded at the origin"""
        scale = float(scale)

        def _norm(x):
            r = float(np.linalg.norm(x))

            if r == 0.0:
                raise OriginExcluded("The norm field is not smooth at the origin")

            return r

        return cls(
            dim,
            lambda x: scale * _norm(x),
            lambda x: scale * np.asarray(x) / _norm(x),
            name=name or "norm",
        )

    def __repr__(self):
        kind = "analytic" if self.has_analytic_partials else "finite-difference"
        return f"{type(self).__name__}(dim={self.dim}, name={self.name!r}, {kind})"


def linear_combination(fields, coeffs, offset=0.0, *, name=None):
    """sum_j coeffs[j] * fields[j] + offset"""
    fields = list(fields)
    coeffs = [float(c) for c in coeffs]

    if len(fields) != len(coeffs) or not fields:
        raise ValueError("fields and coeffs must be non-empty and of equal length")

    dim = fields[0].dim

    if any(f.dim != dim for f in fields):
        raise DimensionMismatch("All fields must share the chart dimension")

    offset = float(offset)

    def value(x):
        return sum(c * f._value(x) for c, f in zip(coeffs, fields)) + offset

    partials = None

    if all(f.has_analytic_partials for f in fields):

        def partials(x):
            return sum(c * f.partials(x) for c, f in zip(coeffs, fields))

    return ScalarField(dim, value, partials, name=name or "combination")


def _check_field(g, F):
    if F.dim != g.dim:
        raise DimensionMismatch(
            f"Field {F.name!r} has dimension {F.dim}, metric has {g.dim}"
        )


def gradient(g, F, x):
    """Gradient vector field g^{aj} dF/dx^a d/dx^j at x

    Examples
    --------
    >>> import numpy as np
    >>> from geodissip.manifold import MetricField, ScalarField, gradient
    >>> g = MetricField.diagonal([4.0, 1.0])
    >>> gradient(g, ScalarField.coordinate(2, 1), [0.0, 0.0])
    array([0.25, 0.  ])
    """
    _check_field(g, F)
    coords = as_coords(x, g.dim)
    return g.factor(coords).solve(F.partials(coords))


def gradients(g, fields, x):
    """Rows are the gradients of ``fields`` at x (one factorization of g)"""
    coords = as_coords(x, g.dim)

    for F in fields:
        _check_field(g, F)

    if not fields:
        return np.zeros((0, g.dim)), np.zeros((0, g.dim))

    partials = np.array([F.partials(coords) for F in fields])
    grads = g.factor(coords).solve(partials.T).T
    return partials, grads


def inner(g, x, u, v):
    """Metric inner product u^T g(x) v"""
    coords = as_coords(x, g.dim)
    u = as_vector(u, g.dim, name="u")
    v = as_vector(v, g.dim, name="v")

    if g.is_euclidean:
        return float(u @ v)

    return float(u @ g(coords) @ v)


def flat(g, x, v):
    """Covector coefficients g(x) v (the flat operator)"""
    coords = as_coords(x, g.dim)
    v = as_vector(v, g.dim)

    if g.is_euclidean:
        return np.array(v)

    return g(coords) @ v


@dataclass
class PartialsReport:
    """Comparison between analytic and finite-difference partials"""

    max_relative_error: float
    passed: bool
    analytic: np.ndarray
    finite_difference: np.ndarray


@GeodissipLogger.log(feature="manifold")
def check_partials(F, x, rtol=1e-5, atol=1e-8):
    """
    Compare analytic partials against central finite differences. A component
    passes when its relative error is at most ``rtol`` or its absolute error
    is at most ``atol`` (near-zero components)
    """
    if not F.has_analytic_partials:
        raise ValueError(f"Field {F.name!r} has no analytic partials to check")

    coords = as_coords(x, F.dim)
    analytic = F.partials(coords)
    fd = F.finite_difference_partials(coords)

    abs_error = np.abs(analytic - fd)
    denom = np.maximum(np.abs(fd), np.abs(analytic))
    rel_error = np.where(abs_error <= atol, 0.0, abs_error / np.maximum(denom, atol))
    max_rel = float(np.max(rel_error, initial=0.0))

    return PartialsReport(
        max_relative_error=max_rel,
        passed=bool(max_rel <= rtol),
        analytic=analytic,
        finite_difference=fd,
    )
