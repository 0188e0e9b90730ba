"""
Coordinate exterior algebra with the metric Hodge star: alternating forms,
wedge products, the covariant description of v0 and brute-force checks of the
index-symbol identities (Ricci epsilon, generalized Kronecker delta)
"""
from collections import defaultdict
from itertools import combinations, permutations, product
from math import factorial
import logging

import numpy as np

from geodissip.exceptions import (
    DegreeMismatch,
    DegreeOverflow,
    DimensionLimit,
    DimensionMismatch,
    SingularMetric,
)
from geodissip import manifold
from geodissip.manifold import as_coords, as_vector
from geodissip.telemetry import GeodissipLogger
from geodissip.util import permutation_sign

logger = logging.getLogger(__name__)

HODGE_MAX_DIM = 8
IDENTITY_MAX_DIM = 6


class AlternatingForm:
    """Degree-r form as coefficients over strictly increasing 1-based tuples

    Parameters
    ----------
    dim : int
        Chart dimension n

    degree : int
        Degree r, 0 <= r. Forms of degree above n are always zero

    coeffs : dict, default=None
        Maps increasing index tuples to coefficients (absent keys are zero).
        The degree-0 form uses the empty tuple as its only key
    """

    def __init__(self, dim, degree, coeffs=None):
        if degree < 0:
            raise ValueError(f"degree must be non-negative, got {degree}")

        self.dim = int(dim)
        self.degree = int(degree)
        self._coeffs = {}

        for key, value in (coeffs or {}).items():
            key = tuple(int(i) for i in key)
            self._check_key(key)

            if value != 0.0:
                self._coeffs[key] = float(value)

    def _check_key(self, key):
        if len(key) != self.degree:
            raise DegreeMismatch(
                f"Key {key} does not have length {self.degree} (the form degree)"
            )

        if any(not 1 <= i <= self.dim for i in key):
            raise DimensionMismatch(f"Key {key} has indices outside 1..{self.dim}")

        if any(a >= b for a, b in zip(key, key[1:])):
            raise ValueError(f"Key {key} is not strictly increasing")

    @classmethod
    def zero(cls, dim, degree):
        return cls(dim, degree)

    @classmethod
    def scalar(cls, dim, value):
        return cls(dim, 0, {(): value})

    @classmethod
    def from_covector(cls, coeffs):
        """Degree-1 form sum_a coeffs[a] dx^(a+1)"""
        coeffs = np.asarray(coeffs, dtype=float)
        return cls(coeffs.shape[0], 1, {(a + 1,): c for a, c in enumerate(coeffs)})

    @classmethod
    def basis(cls, dim, indices):
        """dx^i1 ^ ... ^ dx^ir for any (possibly unsorted) index tuple"""
        indices = tuple(indices)
        sign = permutation_sign(indices)
        key = tuple(sorted(indices))
        return cls(dim, len(indices), {key: sign} if sign else {})

    def items(self):
        return sorted(self._coeffs.items())

    def __getitem__(self, indices):
        """Antisymmetric component a_{i1...ir} for any index tuple"""
        indices = tuple(indices)
        sign = permutation_sign(indices)

        if sign == 0:
            return 0.0

        return sign * self._coeffs.get(tuple(sorted(indices)), 0.0)

    def covector(self):
        """Coefficient vector of a degree-1 form"""
        if self.degree != 1:
            raise DegreeMismatch(f"Expected a 1-form, got degree {self.degree}")

        out = np.zeros(self.dim)

        for (a,), c in self._coeffs.items():
            out[a - 1] = c

        return out

    def top_coefficient(self):
        """The single coefficient of a degree-n form"""
        if self.degree != self.dim:
            raise DegreeMismatch(
                f"Expected a top-degree ({self.dim}) form, got degree {self.degree}"
            )

        return self._coeffs.get(tuple(range(1, self.dim + 1)), 0.0)

    def scalar_value(self):
        if self.degree != 0:
            raise DegreeMismatch(f"Expected a 0-form, got degree {self.degree}")

        return self._coeffs.get((), 0.0)

    def _check_compatible(self, other):
        if self.dim != other.dim:
            raise DimensionMismatch(
                f"Forms live on charts of dimensions {self.dim} and {other.dim}"
            )

        if self.degree != other.degree:
            raise DegreeMismatch(
                f"Cannot add forms of degrees {self.degree} and {other.degree}"
            )

    def __add__(self, other):
        self._check_compatible(other)
        coeffs = defaultdict(float, self._coeffs)

        for key, value in other._coeffs.items():
            coeffs[key] += value

        return AlternatingForm(self.dim, self.degree, coeffs)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, scalar):
        scalar = float(scalar)
        return AlternatingForm(
            self.dim,
            self.degree,
            {key: scalar * value for key, value in self._coeffs.items()},
        )

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def norm(self):
        return max((abs(v) for v in self._coeffs.values()), default=0.0)

    def allclose(self, other, rtol=1e-10, atol=0.0):
        """Componentwise comparison relative to the largest coefficient"""
        self._check_compatible(other)
        keys = set(self._coeffs) | set(other._coeffs)
        scale = max(self.norm(), other.norm())
        return all(
            abs(self._coeffs.get(key, 0.0) - other._coeffs.get(key, 0.0))
            <= atol + rtol * scale
            for key in keys
        )

    def __eq__(self, other):
        if not isinstance(other, AlternatingForm):
            return NotImplemented

        return (
            self.dim == other.dim
            and self.degree == other.degree
            and self._coeffs == other._coeffs
        )

    def __repr__(self):
        return (
            f"{type(self).__name__}(dim={self.dim}, degree={self.degree}, "
            f"coeffs={dict(self.items())!r})"
        )


def ricci_epsilon(indices):
    """
    +1 / -1 if ``indices`` is an even / odd permutation of 1..r, 0 otherwise
    """
    indices = tuple(indices)

    if sorted(indices) != list(range(1, len(indices) + 1)):
        return 0

    return permutation_sign(indices)


def gen_kronecker(upper, lower):
    """Generalized Kronecker delta

    +1 / -1 if the lower indices are distinct and ``upper`` is an even / odd
    permutation of them, 0 otherwise
    """
    upper = tuple(upper)
    lower = tuple(lower)

    if len(upper) != len(lower):
        raise ValueError(
            f"upper and lower must have equal lengths, got {len(upper)} "
            f"and {len(lower)}"
        )

    if len(set(lower)) != len(lower) or sorted(upper) != sorted(lower):
        return 0

    return permutation_sign([lower.index(i) for i in upper])


def wedge(a, b):
    """Exterior product. Beyond the top degree the result is a zero form"""
    if a.dim != b.dim:
        raise DimensionMismatch(
            f"Cannot wedge forms of dimensions {a.dim} and {b.dim}"
        )

    degree = a.degree + b.degree

    if degree > a.dim:
        logger.warning("wedge of degree %d exceeds dimension %d", degree, a.dim)
        return AlternatingForm.zero(a.dim, degree)

    coeffs = defaultdict(float)

    for left, ca in a.items():
        for right, cb in b.items():
            merged = left + right
            sign = permutation_sign(merged)

            if sign:
                coeffs[tuple(sorted(merged))] += sign * ca * cb

    return AlternatingForm(a.dim, degree, coeffs)


def wedge_all(forms):
    forms = list(forms)
    out = forms[0]

    for form in forms[1:]:
        out = wedge(out, form)

    return out


def _volume_factor(g, coords):
    det = g.det(coords)

    if not det > 0.0:
        raise SingularMetric(
            f"{g.name} has non-positive determinant {det!r} at {coords!r}"
        )

    return float(np.sqrt(det))


def hodge(g, x, a):
    """Hodge star of ``a`` at x, term by term in local coordinates

    Examples
    --------
    >>> from geodissip.manifold import MetricField
    >>> from geodissip.exterior import AlternatingForm, hodge
    >>> star = hodge(MetricField.euclidean(3), [0.0, 0.0, 0.0],
    ...              AlternatingForm.basis(3, (1,)))
    >>> star.items()
    [((2, 3), 1.0)]
    """
    n = g.dim

    if a.dim != n:
        raise DimensionMismatch(f"Form has dimension {a.dim}, metric has {n}")

    if n > HODGE_MAX_DIM:
        raise DimensionLimit(
            f"hodge enumerates index permutations and supports n <= "
            f"{HODGE_MAX_DIM}, got n={n}"
        )

    coords = as_coords(x, n)
    ginv = g.inverse(coords)
    volume = _volume_factor(g, coords)
    r = a.degree
    everything = set(range(n))
    coeffs = defaultdict(float)

    for key, value in a.items():
        rows = [i - 1 for i in key]

        for raised in permutations(range(n), r):
            weight = 1.0

            for row, col in zip(rows, raised):
                weight *= ginv[row, col]

            if weight == 0.0:
                continue

            rest = tuple(sorted(everything - set(raised)))
            sign = permutation_sign(raised + rest)
            coeffs[tuple(i + 1 for i in rest)] += sign * volume * value * weight

    return AlternatingForm(n, n - r, coeffs)


def differential(F, x):
    """dF at x as a 1-form"""
    return AlternatingForm.from_covector(F.partials(as_coords(x, F.dim)))


def sharp(g, x, a):
    """Vector metrically dual to a 1-form"""
    if a.degree != 1:
        raise DegreeMismatch(f"sharp requires a 1-form, got degree {a.degree}")

    if a.dim != g.dim:
        raise DimensionMismatch(f"Form has dimension {a.dim}, metric has {g.dim}")

    return g.factor(as_coords(x, g.dim)).solve(a.covector())


def flat(g, x, v):
    """1-form metrically dual to a vector"""
    return AlternatingForm.from_covector(manifold.flat(g, x, as_vector(v, g.dim)))


def inner_forms(g, x, a, b):
    """Metric inner product of two r-forms (sum over increasing tuples)"""
    if a.dim != b.dim or a.dim != g.dim:
        raise DimensionMismatch("Forms and metric must share the dimension")

    if a.degree != b.degree:
        raise DegreeMismatch(
            f"Inner product needs equal degrees, got {a.degree} and {b.degree}"
        )

    ginv = g.inverse(as_coords(x, g.dim))
    total = 0.0

    for left, ca in a.items():
        for right, cb in b.items():
            block = ginv[np.ix_([i - 1 for i in left], [j - 1 for j in right])]
            total += ca * cb * np.linalg.det(block) if block.size else ca * cb

    return float(total)


@GeodissipLogger.log(feature="exterior")
def v0_hodge(p, x):
    """
    v0 = (-1)^(n+1) sharp(*(dF_1 ^ ... ^ dF_k ^ *(dG ^ dF_1 ^ ... ^ dF_k)))
    """
    n, k = p.dim, p.k

    if k + 1 > n:
        raise DegreeOverflow(
            f"{k} conserved fields and a target need k + 1 <= n, got n={n}"
        )

    coords = as_coords(x, n)
    dFs = wedge_all(differential(F, coords) for F in p.conserved)
    dG = differential(p.target, coords)
    inner_star = hodge(p.metric, coords, wedge(dG, dFs))
    one_form = hodge(p.metric, coords, wedge(dFs, inner_star))
    return (-1) ** (n + 1) * sharp(p.metric, coords, one_form)


def _check_identity_dim(n):
    if n > IDENTITY_MAX_DIM:
        raise DimensionLimit(
            f"Identity checks enumerate all index tuples, n <= {IDENTITY_MAX_DIM}"
        )


def _upper_candidates(lower, n):
    """Rearrangements of ``lower`` plus one-index shifts (which give zeros)"""
    candidates = set(permutations(lower))

    for position in range(len(lower)):
        shifted = list(lower)
        shifted[position] = lower[position] % n + 1
        candidates.add(tuple(shifted))

    return sorted(candidates)


@GeodissipLogger.log(feature="exterior")
def delta_contraction_check(n, r, p):
    """
    Contracting the last p - r index pairs of the p-index delta gives
    (n-r)! / (n-p)! times the r-index delta, for every choice of free indices
    """
    if not 0 <= r <= p <= n:
        raise ValueError(f"Expected 0 <= r <= p <= n, got r={r}, p={p}, n={n}")

    _check_identity_dim(n)
    factor = factorial(n - r) // factorial(n - p)
    indices = range(1, n + 1)
    trailing = list(product(indices, repeat=p - r))

    for lower in product(indices, repeat=r):
        for upper in _upper_candidates(lower, n):
            contracted = sum(
                gen_kronecker(upper + rest, lower + rest) for rest in trailing
            )

            if contracted != factor * gen_kronecker(upper, lower):
                logger.warning(
                    "delta contraction fails for n=%d r=%d p=%d upper=%s lower=%s",
                    n,
                    r,
                    p,
                    upper,
                    lower,
                )
                return False

    return True


def index_shift_check(r):
    """
    Moving the last index of an r-index epsilon to position j + 1 multiplies
    it by (-1)^(r-j-1), for every permutation of 1..r
    """
    for indices in permutations(range(1, r + 1)):
        head, last = indices[:-1], indices[-1]

        for j in range(r):
            moved = head[:j] + (last,) + head[j:]

            if ricci_epsilon(indices) != (-1) ** (r - j - 1) * ricci_epsilon(moved):
                return False

    return True


def _relabel(indices, support):
    rank = {value: position + 1 for position, value in enumerate(support)}
    return tuple(rank[i] for i in indices)


@GeodissipLogger.log(feature="exterior")
def kronecker_epsilon_check(n, r):
    """
    The r-index delta equals the product of the epsilons of its (relabeled)
    lower and upper indices whenever both range over the same index set, and
    vanishes otherwise
    """
    if not 1 <= r <= n:
        raise ValueError(f"Expected 1 <= r <= n, got r={r}, n={n}")

    _check_identity_dim(n)

    for lower in product(range(1, r + 1), repeat=r):
        for upper in product(range(1, r + 1), repeat=r):
            expected = ricci_epsilon(lower) * ricci_epsilon(upper)

            if gen_kronecker(upper, lower) != expected:
                return False

    for support in combinations(range(1, n + 1), r):
        for lower in permutations(support):
            for upper in _upper_candidates(lower, n):
                expected = 0

                if set(upper) == set(support):
                    expected = ricci_epsilon(
                        _relabel(lower, support)
                    ) * ricci_epsilon(_relabel(upper, support))

                if gen_kronecker(upper, lower) != expected:
                    return False

    return True


def gram_det_by_expansion(g, fields, x):
    """
    det Sigma_FF as the sum over distinct index tuples s of
    prod_i (grad F_i)^(s_i) times det[dF_l / dx^(s_m)]
    """
    fields = list(fields)
    k = len(fields)
    n = g.dim

    if k > n:
        return 0.0

    partials, grads = manifold.gradients(g, fields, x)
    total = 0.0

    for s in permutations(range(n), k):
        weight = float(np.prod([grads[i, s[i]] for i in range(k)]))

        if weight == 0.0:
            continue

        total += weight * np.linalg.det(partials[:, list(s)])

    return float(total)
