"""
The standard control vector field v0 and the general control fields
u = q v0 + w that realize a prescribed rate of change of the target G while
conserving F_1, ..., F_k
"""
from dataclasses import dataclass, replace
import logging

import numpy as np

from geodissip.exceptions import DimensionMismatch, MissingRate
from geodissip.gram import GramFrame, check_regular, determinant
from geodissip.manifold import as_coords, as_vector, inner
from geodissip.telemetry import GeodissipLogger

logger = logging.getLogger(__name__)

TRANSVERSE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ControlProblem:
    """Metric, ordered conserved fields, target and (optional) rate

    Parameters
    ----------
    metric : MetricField
        Riemannian metric g

    conserved : sequence of ScalarField
        F_1, ..., F_k in the order used by every minor and sign

    target : ScalarField
        G, the function whose rate is controlled

    rate : ScalarField, default=None
        h, the prescribed value of dG/dt along the control flow

    transverse : callable, default=None
        w, takes the coordinates and returns a vector orthogonal to every
        gradient. Defaults to zero

    prolongation : callable, default=None
        q, a continuous extension of h / det Sigma supplied by the caller. When
        given, it replaces the division (and ``rate`` is not needed)
    """

    metric: object
    conserved: tuple
    target: object
    rate: object = None
    transverse: object = None
    prolongation: object = None

    def __post_init__(self):
        conserved = tuple(self.conserved)

        if len(conserved) < 1:
            raise ValueError("A control problem needs at least one conserved field")

        object.__setattr__(self, "conserved", conserved)

        for F in conserved + (self.target,):
            if F.dim != self.metric.dim:
                raise DimensionMismatch(
                    f"Field {F.name!r} has dimension {F.dim}, "
                    f"metric has {self.metric.dim}"
                )

    @property
    def dim(self):
        return self.metric.dim

    @property
    def k(self):
        return len(self.conserved)

    @property
    def fields(self):
        """Conserved fields followed by the target"""
        return list(self.conserved) + [self.target]

    def frame(self, x):
        return GramFrame.of(self.metric, self.fields, x)

    def with_rate(self, rate, transverse=None, prolongation=None):
        return replace(
            self, rate=rate, transverse=transverse, prolongation=prolongation
        )


def formal_determinant(frame, v):
    """
    Expansion along the last row of the (k+1) x (k+1) formal determinant whose
    first k rows are [Sigma_FF | <v, grad F_r>] and whose last row holds the
    vectors grad F_1, ..., grad F_k, v
    """
    k = frame.size
    top = np.hstack([frame.gram, (frame.partials @ v)[:, np.newaxis]])
    out = determinant(frame.gram) * np.asarray(v, dtype=float)

    for i in range(1, k + 1):
        cols = [c for c in range(k + 1) if c != i - 1]
        out = out + (-1) ** (i + k + 1) * determinant(top[:, cols]) * frame.grads[i - 1]

    return out


def _v0_from_frame(frame):
    k = frame.size - 1
    return formal_determinant(frame.head(k), frame.grads[k])


def v0(p, x):
    """Standard control vector field at x

    Examples
    --------
    >>> from geodissip.manifold import MetricField, ScalarField
    >>> from geodissip.control import ControlProblem, v0
    >>> p = ControlProblem(
    ...     MetricField.euclidean(3),
    ...     [ScalarField.half_norm_squared(3)],
    ...     ScalarField.coordinate(3, 3),
    ... )
    >>> v0(p, [1.0, 1.0, 1.0])
    array([-1., -1.,  2.])
    """
    return _v0_from_frame(p.frame(x))


def v0_formal(p, x, v):
    """
    The formal determinant with ``v`` in place of grad G. It equals
    det Sigma_FF times the orthogonal projection of v onto the leaf
    """
    coords = as_coords(x, p.dim)
    v = as_vector(v, p.dim, name="v")
    return formal_determinant(GramFrame.of(p.metric, p.conserved, coords), v)


def check_transverse(p, x, w=None):
    """
    Largest normalized inner product |<w, grad X>| / (|w| |grad X|) over the
    conserved fields and the target. Zero when there is no transverse part
    """
    coords = as_coords(x, p.dim)

    if w is None:
        if p.transverse is None:
            return 0.0

        w = p.transverse(coords)

    w = as_vector(w, p.dim, name="w")
    frame = p.frame(coords)
    w_norm = np.sqrt(max(inner(p.metric, coords, w, w), 0.0))

    if w_norm == 0.0:
        return 0.0

    residual = 0.0

    for partials, grad in zip(frame.partials, frame.grads):
        grad_norm = np.sqrt(max(float(partials @ grad), 0.0))

        if grad_norm == 0.0:
            continue

        residual = max(residual, abs(float(partials @ w)) / (w_norm * grad_norm))

    return residual


def control_field(p, x, check_transverse_part=False):
    """u(x) = (h(x) / det Sigma(x)) v0(x) + w(x)

    Raises DegenerateGram (with a rank diagnostic) outside the regular set.
    When a prolongation q is supplied it is used instead of the quotient
    """
    if p.rate is None and p.prolongation is None:
        raise MissingRate("control_field requires a rate function h (or q)")

    coords = as_coords(x, p.dim)
    frame = p.frame(coords)

    if p.prolongation is not None:
        q = float(p.prolongation(coords))
    else:
        h_value = float(p.rate(coords))
        q = h_value / check_regular(frame, h_value)

    u = q * _v0_from_frame(frame)

    if p.transverse is not None:
        w = as_vector(p.transverse(coords), p.dim, name="w")

        if check_transverse_part:
            residual = check_transverse(p, coords, w)

            if residual > TRANSVERSE_TOLERANCE:
                raise ValueError(
                    f"The transverse part is not orthogonal to the gradients "
                    f"(residual {residual!r} > {TRANSVERSE_TOLERANCE!r})"
                )

        u = u + w

    return u


def rate_along(p, x, v):
    """dG(v), the rate of change of G along v at x"""
    coords = as_coords(x, p.dim)
    v = as_vector(v, p.dim, name="v")
    return float(p.target.partials(coords) @ v)


@GeodissipLogger.log(feature="control")
def defining_system_residuals(p, x, v=None):
    """
    Residuals of the defining system at x for v (default v0): the normalized
    inner products with the conserved gradients and the relative error of
    <v, grad G> against det Sigma
    """
    coords = as_coords(x, p.dim)
    frame = p.frame(coords)
    v = _v0_from_frame(frame) if v is None else as_vector(v, p.dim, name="v")
    v_norm = np.sqrt(max(inner(p.metric, coords, v, v), 0.0))

    conserved = []

    for i in range(p.k):
        grad_norm = np.sqrt(max(float(frame.partials[i] @ frame.grads[i]), 0.0))
        scale = v_norm * grad_norm or 1.0
        conserved.append(abs(float(frame.partials[i] @ v)) / scale)

    det_full = determinant(frame.gram)
    rate = float(frame.partials[-1] @ v)
    scale = max(abs(det_full), abs(rate), 1e-300)

    return {
        "conserved": conserved,
        "rate": rate,
        "det_sigma": det_full,
        "rate_error": abs(rate - det_full) / scale,
    }
