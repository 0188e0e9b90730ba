from copy import copy
from inspect import signature, _empty
from itertools import combinations

import numpy as np


def permutation_sign(sequence):
    """
    Sign of the permutation that sorts ``sequence`` (+1 even, -1 odd), 0 when
    the sequence has repeated elements
    """
    items = list(sequence)

    if len(set(items)) != len(items):
        return 0

    inversions = sum(
        1 for i, j in combinations(range(len(items)), 2) if items[i] > items[j]
    )
    return -1 if inversions % 2 else 1


def relative_deviation(a, b, floor=1e-300):
    """Normwise (max-abs) relative deviation between two arrays"""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = max(np.max(np.abs(a), initial=0.0), np.max(np.abs(b), initial=0.0), floor)
    return float(np.max(np.abs(a - b), initial=0.0) / scale)


def fd_step(value):
    """Central finite difference step for a coordinate"""
    return max(1e-6, 1e-6 * abs(value))


def central_differences(fn, x):
    """
    Central finite differences of a scalar function at x, one step per
    coordinate (see ``fd_step``)
    """
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape[0])

    for a in range(x.shape[0]):
        step = fd_step(x[a])
        forward = x.copy()
        backward = x.copy()
        forward[a] += step
        backward[a] -= step
        out[a] = (fn(forward) - fn(backward)) / (2 * step)

    return out


def central_jacobian(fn, y):
    """Central finite difference Jacobian (columns are partials) of a map"""
    y = np.asarray(y, dtype=float)
    columns = []

    for a in range(y.shape[0]):
        step = fd_step(y[a])
        forward = y.copy()
        backward = y.copy()
        forward[a] += step
        backward[a] -= step
        difference = np.asarray(fn(forward), dtype=float) - np.asarray(
            fn(backward), dtype=float
        )
        columns.append(difference / (2 * step))

    return np.column_stack(columns)


def format_number(value):
    """Shortest round-trip representation of a float"""
    return repr(float(value))


def map_parameters_in_fn_call(args, kwargs, func):
    """
    Based on function signature, parse args to to convert them to key-value
    pairs and merge them with kwargs
    Any parameter found in args that does not match the function signature
    is still passed.
    Missing parameters are filled with their default values
    """
    sig = signature(func)
    # Get missing parameters in kwargs to look for them in args
    args_spec = list(sig.parameters)
    params_all = set(args_spec)
    params_missing = params_all - set(kwargs.keys())

    if "self" in args_spec:
        offset = 1
    else:
        offset = 0

    # Get indexes for those args
    idxs = [args_spec.index(name) for name in params_missing]

    # Parse args
    args_parsed = dict()

    for idx in idxs:
        key = args_spec[idx]

        try:
            value = args[idx - offset]
        except IndexError:
            pass
        else:
            args_parsed[key] = value

    parsed = copy(kwargs)
    parsed.update(args_parsed)

    # fill default values
    default = {k: v.default for k, v in sig.parameters.items() if v.default != _empty}

    to_add = set(default.keys()) - set(parsed.keys())

    default_to_add = {k: v for k, v in default.items() if k in to_add}
    parsed.update(default_to_add)

    return parsed
