"""
Built-in scalar fields and metrics, selected by name from configuration
documents. A field spec is a mapping ``{"name": <registered name>, ...}``
whose remaining keys are the builder's parameters
"""
from geodissip.exceptions import ConfigError
from geodissip.gram import GramFrame, determinant
from geodissip.manifold import MetricField, ScalarField


def _constant(dim, value=0.0):
    return ScalarField.constant(dim, value)


def _coordinate(dim, index):
    return ScalarField.coordinate(dim, int(index))


def _linear(dim, coeffs, offset=0.0):
    return ScalarField.linear(coeffs, offset)


def _quadratic(dim, matrix, linear=None, offset=0.0):
    return ScalarField.quadratic(matrix, linear, offset)


def _half_norm_squared(dim):
    return ScalarField.half_norm_squared(dim)


def _norm(dim, scale=1.0):
    return ScalarField.norm(dim, scale)


FIELDS = {
    "constant": _constant,
    "coordinate": _coordinate,
    "linear": _linear,
    "quadratic": _quadratic,
    "half-norm-squared": _half_norm_squared,
    "norm": _norm,
}

RATE_ONLY = ("gram-det",)

METRICS = {
    "euclidean": lambda dim: MetricField.euclidean(dim),
    "diagonal": lambda dim, diag: MetricField.diagonal(diag),
    "constant": lambda dim, matrix: MetricField.constant(matrix),
}


def _split(spec, where):
    if not isinstance(spec, dict) or "name" not in spec:
        raise ConfigError(
            f"{where} must be a mapping with a 'name' key, got {spec!r}", field=where
        )

    params = dict(spec)
    return params.pop("name"), params


def _call(builder, name, dim, params, where):
    try:
        built = builder(dim, **params)
    except TypeError as e:
        raise ConfigError(f"Invalid parameters for {where} {name!r}: {e}", field=where)
    except ValueError as e:
        raise ConfigError(f"Invalid {where} {name!r}: {e}", field=where)

    if built.dim != dim:
        raise ConfigError(
            f"{where} {name!r} has dimension {built.dim}, expected {dim}", field=where
        )

    return built


def build_field(spec, dim, where="field"):
    """Scalar field from a spec"""
    name, params = _split(spec, where)

    if name not in FIELDS:
        raise ConfigError(
            f"Unknown {where} {name!r}. Valid values are: {sorted(FIELDS)}",
            field=where,
        )

    label = params.pop("label", None)
    field = _call(FIELDS[name], name, dim, params, where)

    if label is not None:
        field.name = label

    return field


def build_metric(spec, dim, where="metric"):
    """Metric from a spec, Euclidean when ``spec`` is None"""
    if spec is None:
        return MetricField.euclidean(dim)

    name, params = _split(spec, where)

    if name not in METRICS:
        raise ConfigError(
            f"Unknown {where} {name!r}. Valid values are: {sorted(METRICS)}",
            field=where,
        )

    return _call(METRICS[name], name, dim, params, where)


def gram_det_field(metric, fields, name="gram-det"):
    """h(x) = det Sigma of ``fields`` at x"""
    fields = list(fields)
    size = len(fields)

    def value(x):
        frame = GramFrame.of(metric, fields, x)
        return determinant(frame.gram[:size, :size])

    return ScalarField(metric.dim, value, name=name)


def build_rate(spec, metric, conserved, target, where="control.rate"):
    """Rate function h from a spec, ``gram-det`` uses the problem's fields"""
    name, _ = _split(spec, where)

    if name == "gram-det":
        return gram_det_field(metric, list(conserved) + [target])

    return build_field(spec, metric.dim, where=where)
