import math

from decorator import decorator

from geodissip.util import map_parameters_in_fn_call


def argument_is_positive(argname):
    @decorator
    def argument_is_positive(func, *args, **kwargs):
        """Validate that an argument is a finite number strictly above zero"""
        arg_maps = map_parameters_in_fn_call(args, kwargs, func)
        value = arg_maps.get(argname)

        # Validate value, but only if has a value
        if value is not None and not (math.isfinite(value) and value > 0):
            raise ValueError(
                "{argname} must be a positive number, got {value!r}".format(
                    argname=argname, value=value
                )
            )
        return func(*args, **kwargs)

    return argument_is_positive


def argument_is_finite(argname):
    @decorator
    def argument_is_finite(func, *args, **kwargs):
        """Validate that an argument is a finite real number"""
        arg_maps = map_parameters_in_fn_call(args, kwargs, func)
        value = arg_maps.get(argname)

        if value is not None and not math.isfinite(value):
            raise ValueError(
                "{argname} must be finite, got {value!r}".format(
                    argname=argname, value=value
                )
            )
        return func(*args, **kwargs)

    return argument_is_finite


def choice(name, value, valid):
    """Return ``value`` if it is one of ``valid``, else a ValueError listing them"""
    valid = list(valid)

    if value not in valid:
        raise ValueError(
            f"{value!r} is not a valid {name}. Valid values are: {valid}"
        )

    return value
