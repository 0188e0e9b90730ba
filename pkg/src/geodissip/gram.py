"""
Sigma matrices (pairwise inner products of gradients), their determinants and
the Cramer solution of the linear system defining the control coefficients
"""
from dataclasses import dataclass, field
import warnings

import numpy as np
from scipy import linalg

from geodissip.exceptions import DegenerateGram
from geodissip.manifold import as_coords, gradients
from geodissip.validate import argument_is_finite

REGULARITY_FACTOR = 1e-10
RANK_FACTOR = 1e-10


def determinant(matrix):
    """
    Determinant of a square matrix. Cofactor formulas for sizes up to 3, LU
    with partial pivoting above. The empty (0 x 0) determinant is 1
    """
    m = np.asarray(matrix, dtype=float)

    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"determinant requires a square matrix, got {m.shape}")

    size = m.shape[0]

    if size == 0:
        return 1.0
    elif size == 1:
        return float(m[0, 0])
    elif size == 2:
        return float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    elif size == 3:
        return float(
            m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
            - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
            + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0])
        )

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", linalg.LinAlgWarning)
        lu, piv = linalg.lu_factor(m)

    swaps = np.count_nonzero(piv != np.arange(size))
    return float((-1) ** swaps * np.prod(np.diag(lu)))


def regularity_threshold(gram):
    """1e-10 * scale^2, scale being the largest diagonal Gram entry (at least 1)"""
    gram = np.asarray(gram)
    diagonal = np.diag(gram) if gram.size else np.zeros(0)
    scale = max(1.0, float(np.max(diagonal, initial=0.0)))
    return REGULARITY_FACTOR * scale**2


def numerical_rank(matrix):
    """Rank via SVD with tolerance 1e-10 * largest singular value"""
    matrix = np.asarray(matrix, dtype=float)

    if matrix.size == 0:
        return 0

    s = np.linalg.svd(matrix, compute_uv=False)

    if s[0] == 0.0:
        return 0

    return int(np.count_nonzero(s > RANK_FACTOR * s[0]))


@dataclass(frozen=True)
class SigmaMatrix:
    """
    The r x s matrix whose (i, j) entry is <grad col_j, grad row_i>. ``rows``
    and ``cols`` hold the labels of the fields in order
    """

    rows: tuple
    cols: tuple
    entries: np.ndarray

    @property
    def shape(self):
        return self.entries.shape

    @property
    def det(self):
        return determinant(self.entries)


class GramFrame:
    """
    Partials, gradients and the full Gram matrix of an ordered list of fields
    at one point. Entry (i, j) of ``gram`` is <grad F_j, grad F_i>
    """

    def __init__(self, partials, grads):
        self.partials = partials
        self.grads = grads
        self.gram = partials @ grads.T

    @classmethod
    def of(cls, g, fields, x):
        partials, grads = gradients(g, list(fields), x)
        return cls(partials, grads)

    @property
    def size(self):
        return self.gram.shape[0]

    def head(self, count):
        """Frame of the first ``count`` fields"""
        return GramFrame(self.partials[:count], self.grads[:count])

    def minor(self, rows, cols):
        """Determinant of the Sigma matrix restricted to ``rows`` x ``cols``"""
        return determinant(self.gram[np.ix_(list(rows), list(cols))])


def sigma(g, row_fields, col_fields, x):
    """Sigma matrix with rows ``row_fields`` and columns ``col_fields`` at x

    Examples
    --------
    >>> from geodissip.manifold import MetricField, ScalarField
    >>> from geodissip.gram import sigma
    >>> g = MetricField.euclidean(3)
    >>> F = ScalarField.half_norm_squared(3)
    >>> sigma(g, [F], [F], [1.0, 2.0, 2.0]).entries
    array([[9.]])
    """
    coords = as_coords(x, g.dim)
    row_partials, _ = gradients(g, list(row_fields), coords)
    _, col_grads = gradients(g, list(col_fields), coords)
    entries = row_partials @ col_grads.T
    return SigmaMatrix(
        rows=tuple(F.name for F in row_fields),
        cols=tuple(F.name for F in col_fields),
        entries=entries,
    )


def gram_det(g, fields, x):
    """
    Determinant of the Gram matrix of the gradients of ``fields``. The raw
    value is returned (it can be slightly negative because of round-off)
    """
    return GramFrame.of(g, fields, x).minor(range(len(fields)), range(len(fields)))


@dataclass
class RankDiagnostic:
    """Compatibility analysis of the defining system when det Sigma vanishes"""

    rank_rows: int
    rank_full: int
    rank_augmented: int
    h_value: float
    compatible: bool
    reason: str

    def __str__(self):
        verdict = "compatible" if self.compatible else "incompatible"
        return (
            f"rank(rows block)={self.rank_rows}, rank(Sigma)={self.rank_full}, "
            f"rank(augmented)={self.rank_augmented}, h={self.h_value!r}: "
            f"{verdict} ({self.reason})"
        )


def _rank_diagnostic_from_gram(gram, k, h_value):
    rows_block = gram[:k, :]
    rhs = np.zeros((k + 1, 1))
    rhs[k, 0] = h_value
    augmented = np.hstack([gram, rhs])

    rank_rows = numerical_rank(rows_block)
    rank_full = numerical_rank(gram)
    rank_augmented = numerical_rank(augmented)

    if rank_full == k + 1:
        compatible, reason = True, "Sigma is nonsingular"
    elif rank_rows < rank_full:
        compatible, reason = True, "rows block has smaller rank than Sigma"
    else:
        compatible = h_value == 0.0
        reason = "common principal minor: compatible if and only if h(x) = 0"

    return RankDiagnostic(
        rank_rows=rank_rows,
        rank_full=rank_full,
        rank_augmented=rank_augmented,
        h_value=float(h_value),
        compatible=compatible,
        reason=reason,
    )


def rank_diagnostic(g, Fs, G, h_value, x):
    """Ranks of the defining system at x and its compatibility verdict"""
    Fs = list(Fs)
    frame = GramFrame.of(g, Fs + [G], x)
    return _rank_diagnostic_from_gram(frame.gram, len(Fs), h_value)


@dataclass
class CramerSolution:
    """Coefficients of v = sum alpha_i grad F_i + alpha grad G"""

    alphas: np.ndarray
    alpha: float
    det_sigma: float = field(default=float("nan"))

    def assemble(self, grads):
        """The vector field value given the gradient rows (F_1..F_k, G)"""
        grads = np.asarray(grads)
        return self.alphas @ grads[:-1] + self.alpha * grads[-1]


def check_regular(frame, h_value=None):
    """
    Gram determinant of a frame, raising DegenerateGram below the threshold.
    When ``h_value`` is given the frame is read as (F_1..F_k, G) and the
    error carries the rank diagnostic of the defining system
    """
    size = frame.size
    det_full = frame.minor(range(size), range(size))
    threshold = regularity_threshold(frame.gram)

    if abs(det_full) <= threshold:
        diagnostic = None

        if h_value is not None:
            diagnostic = _rank_diagnostic_from_gram(frame.gram, size - 1, h_value)

        message = (
            f"det Sigma = {det_full!r} is below the regularity threshold "
            f"{threshold!r}; the gradients are dependent at this point"
        )

        if diagnostic is not None:
            message = f"{message} ({diagnostic})"

        raise DegenerateGram(
            message,
            det=det_full,
            threshold=threshold,
            diagnostic=diagnostic,
        )

    return det_full


@argument_is_finite("h_value")
def cramer_solve(g, Fs, G, h_value, x):
    """Cramer's rule solution of the defining system with right-hand side h

    Examples
    --------
    >>> from geodissip.manifold import MetricField, ScalarField
    >>> from geodissip.gram import cramer_solve
    >>> g = MetricField.euclidean(3)
    >>> F = ScalarField.half_norm_squared(3)
    >>> G = ScalarField.coordinate(3, 3)
    >>> solution = cramer_solve(g, [F], G, 2.0, [1.0, 1.0, 1.0])
    >>> float(solution.alphas[0]), solution.alpha
    (-1.0, 3.0)
    """
    Fs = list(Fs)
    k = len(Fs)
    frame = GramFrame.of(g, Fs + [G], x)
    det_full = check_regular(frame, h_value)
    rows = range(k)

    alphas = np.empty(k)

    for i in range(1, k + 1):
        cols = [c for c in range(k + 1) if c != i - 1]
        sign = (-1) ** (i + k + 1)
        alphas[i - 1] = sign * h_value * frame.minor(rows, cols) / det_full

    alpha = h_value * frame.minor(rows, rows) / det_full
    return CramerSolution(alphas=alphas, alpha=float(alpha), det_sigma=det_full)


def lu_solve_system(g, Fs, G, h_value, x):
    """Dense LU solution of the same system (independent of Cramer's rule)"""
    Fs = list(Fs)
    k = len(Fs)
    frame = GramFrame.of(g, Fs + [G], x)
    rhs = np.zeros(k + 1)
    rhs[k] = h_value
    solution = linalg.solve(frame.gram, rhs)
    return CramerSolution(
        alphas=solution[:k],
        alpha=float(solution[k]),
        det_sigma=determinant(frame.gram),
    )
