import math

import pytest

from geodissip import validate


@pytest.mark.parametrize("valid", [1e-12, 0.5, 1, 100.0])
def test_decorator_argument_is_positive(valid):
    def fn(dt):
        pass

    validate.argument_is_positive("dt")(fn)(dt=valid)


@pytest.mark.parametrize("invalid", [0, -1, -0.001, math.inf, math.nan])
def test_decorator_argument_is_positive_error(invalid):
    def fn(dt):
        pass

    with pytest.raises(ValueError, match="dt must be a positive number"):
        validate.argument_is_positive("dt")(fn)(dt=invalid)


def test_decorator_argument_is_positive_skips_none():
    def fn(dt=None):
        return "called"

    assert validate.argument_is_positive("dt")(fn)() == "called"


@pytest.mark.parametrize("valid", [0, -1.5, 1e300])
def test_decorator_argument_is_finite(valid):
    def fn(h):
        pass

    validate.argument_is_finite("h")(fn)(valid)


@pytest.mark.parametrize("invalid", [math.inf, -math.inf, math.nan])
def test_decorator_argument_is_finite_error(invalid):
    def fn(h):
        pass

    with pytest.raises(ValueError, match="h must be finite"):
        validate.argument_is_finite("h")(fn)(invalid)


def test_choice():
    assert validate.choice("suite", "gram", ["gram", "leaf"]) == "gram"


def test_choice_error_lists_valid_values():
    with pytest.raises(ValueError) as excinfo:
        validate.choice("suite", "nope", ["gram", "leaf"])

    assert str(excinfo.value) == (
        "'nope' is not a valid suite. Valid values are: ['gram', 'leaf']"
    )
