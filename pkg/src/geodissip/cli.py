"""
Command line interface: ``simulate`` integrates a configured flow and writes
its trajectory, ``verify`` runs the property suites and ``eval`` prints v0,
T, the leaf projector or Sigma at a point.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 integration failure
"""
import argparse
from dataclasses import dataclass, field
import json
import logging
import math
from pathlib import Path
import sys

import numpy as np
from ploomber_core.exceptions import modify_exceptions

from geodissip import __version__, fields, leafgeom, models, telemetry, verify
from geodissip import trajectory_io
from geodissip.control import ControlProblem, v0
from geodissip.exceptions import ConfigError, GeodissipError
from geodissip.gram import sigma
from geodissip.integrate import ControlMode, FlowSpec, integrate
from geodissip.util import format_number

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_INTEGRATION = 3

CUSTOM = "custom"
WHAT = ("v0", "T", "projector", "sigma")
MAX_SEED = 2**64


def _require(data, key, where):
    if key not in data:
        raise ConfigError(f"Missing required entry {where!r}", field=where)

    return data[key]


def _number(value, where):
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{where} must be a number, got {value!r}", field=where)

    if not math.isfinite(number):
        raise ConfigError(f"{where} must be finite, got {value!r}", field=where)

    return number


@dataclass
class RunConfig:
    """A simulation run, parsed from a JSON document"""

    model: str
    x0: list
    t1: float
    dt: float
    t0: float = 0.0
    params: dict = field(default_factory=dict)
    dim: int = None
    metric: dict = None
    conserved: list = None
    target: dict = None
    mode: str = "off"
    rate: dict = None
    prolongation: dict = None
    out_path: str = None
    out_format: str = "csv"
    stride: int = 1

    @classmethod
    def from_path(cls, path):
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"Config file {str(path)!r} does not exist", "config")
        except json.JSONDecodeError as e:
            raise ConfigError(f"Config file is not valid JSON: {e}", field="config")

        return cls.from_dict(data)

    @classmethod
    @modify_exceptions
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("The config must be a JSON object", field="config")

        integrator = _require(data, "integrator", "integrator")
        control = data.get("control", {"mode": "off"})
        output = data.get("output", {})

        config = cls(
            model=_require(data, "model", "model"),
            params=data.get("params", {}),
            dim=data.get("dim"),
            metric=data.get("metric"),
            conserved=data.get("conserved"),
            target=data.get("target"),
            mode=control.get("mode", "off"),
            rate=control.get("rate"),
            prolongation=control.get("prolongation"),
            t0=_number(integrator.get("t0", 0.0), "integrator.t0"),
            t1=_number(_require(integrator, "t1", "integrator.t1"), "integrator.t1"),
            dt=_number(_require(integrator, "dt", "integrator.dt"), "integrator.dt"),
            x0=_require(integrator, "x0", "integrator.x0"),
            out_path=output.get("path"),
            out_format=output.get("format", "csv"),
            stride=output.get("stride", 1),
        )
        config.validate()
        return config

    def validate(self):
        registered = sorted(models.MODELS) + [CUSTOM]

        if self.model not in registered:
            raise ConfigError(
                f"Unknown model {self.model!r}. Registered models: {registered}",
                field="model",
            )

        modes = [mode.value for mode in ControlMode]

        if self.mode not in modes:
            raise ConfigError(
                f"Unknown control mode {self.mode!r}. Valid values are: {modes}",
                field="control.mode",
            )

        if self.mode == "rate" and self.rate is None and self.prolongation is None:
            raise ConfigError(
                "Control mode 'rate' requires a rate spec", field="control.rate"
            )

        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt!r}", "integrator.dt")

        if not self.t1 > self.t0:
            raise ConfigError(
                f"t1 must be greater than t0, got t0={self.t0!r}, t1={self.t1!r}",
                field="integrator.t1",
            )

        if self.dt > self.t1 - self.t0:
            raise ConfigError(
                f"dt={self.dt!r} exceeds the interval length", "integrator.dt"
            )

        if not isinstance(self.x0, list) or not self.x0:
            raise ConfigError("x0 must be a non-empty list", field="integrator.x0")

        self.x0 = [_number(value, "integrator.x0") for value in self.x0]

        if len(self.x0) != self.dimension:
            raise ConfigError(
                f"x0 has {len(self.x0)} coordinates, the model has dimension "
                f"{self.dimension}",
                field="integrator.x0",
            )

        if self.out_format not in trajectory_io.FORMATS:
            raise ConfigError(
                f"Unknown output format {self.out_format!r}. Valid values are: "
                f"{list(trajectory_io.FORMATS)}",
                field="output.format",
            )

        if not isinstance(self.stride, int) or self.stride < 1:
            raise ConfigError(
                f"stride must be a positive integer, got {self.stride!r}",
                field="output.stride",
            )

        if self.model == CUSTOM:
            if self.conserved is None or not self.conserved:
                raise ConfigError(
                    "A custom problem needs conserved fields", field="conserved"
                )

            if self.target is None:
                raise ConfigError("A custom problem needs a target", field="target")

    @property
    def dimension(self):
        if self.model == CUSTOM:
            if not isinstance(self.dim, int) or self.dim < 1:
                raise ConfigError(
                    f"dim must be a positive integer, got {self.dim!r}", field="dim"
                )

            return self.dim

        return models.MODELS[self.model].dim

    def build(self):
        """The flow spec and (for registered models) the model"""
        model = None

        if self.model == CUSTOM:
            metric = fields.build_metric(self.metric, self.dim)
            conserved = [
                fields.build_field(spec, self.dim, where=f"conserved[{i}]")
                for i, spec in enumerate(self.conserved)
            ]
            target = fields.build_field(self.target, self.dim, where="target")
            base, closed_form = None, None
        else:
            try:
                model = models.build_model(self.model, self.params)
            except ConfigError:
                raise
            except (TypeError, ValueError) as e:
                raise ConfigError(f"Invalid model parameters: {e}", field="params")

            problem = model.problem()
            metric, conserved, target = (
                problem.metric,
                list(problem.conserved),
                problem.target,
            )
            base = models.base_field(model)
            closed_form = models.dissipation(model)

        rate = prolongation = None

        if self.rate is not None:
            rate = fields.build_rate(self.rate, metric, conserved, target)

        if self.prolongation is not None:
            prolongation = fields.build_field(
                self.prolongation, metric.dim, where="control.prolongation"
            )

        problem = ControlProblem(
            metric, conserved, target, rate=rate, prolongation=prolongation
        )
        spec = FlowSpec(
            x0=self.x0,
            t0=self.t0,
            t1=self.t1,
            dt=self.dt,
            base=base,
            problem=problem,
            mode=self.mode,
            closed_form=closed_form if self.mode == "v0" else None,
        )
        return spec, model


@dataclass
class VerifyConfig:
    suites: list
    seed: int = 42
    count: int = 100
    tolerances: dict = field(default_factory=dict)
    json_path: str = None

    @classmethod
    @modify_exceptions
    def from_args(cls, args):
        tolerances = {}

        for item in args.tolerance or []:
            name, _, value = item.rpartition("=")
            tolerances[name or "*"] = _number(value, "tolerance")

        config = cls(
            suites=args.suite,
            seed=args.seed,
            count=args.count,
            tolerances=tolerances,
            json_path=args.json,
        )
        config.validate()
        return config

    def validate(self):
        if not 0 <= self.seed < MAX_SEED:
            raise ConfigError(
                f"seed must be a 64-bit unsigned integer, got {self.seed}", "seed"
            )

        if self.count < 1:
            raise ConfigError(f"count must be at least 1, got {self.count}", "count")

        try:
            verify.expand_suites(self.suites)
            verify.resolve_tolerances(self.tolerances)
        except ValueError as e:
            raise ConfigError(str(e), field="suite")


def cmd_simulate(args):
    config = RunConfig.from_path(args.config)
    config.out_path = args.out or config.out_path
    config.out_format = args.format or config.out_format
    config.stride = args.stride or config.stride
    config.validate()

    if config.out_path is None:
        raise ConfigError("No output path (use --out)", field="output.path")

    spec, model = config.build()

    if model is not None:
        logger.info(
            "model %s defaults: %s (w = 0)",
            model.name,
            json.dumps(model.defaults(), sort_keys=True),
        )

    try:
        samples = integrate(spec)
    except GeodissipError as e:
        partial = getattr(e, "trajectory", None) or []
        trajectory_io.write(partial, config.out_path, config.out_format, config.stride)
        print(f"integration failed: {e}", file=sys.stderr)
        return EXIT_INTEGRATION

    trajectory_io.write(samples, config.out_path, config.out_format, config.stride)
    logger.info("Wrote %d samples to %s", len(samples), config.out_path)
    return EXIT_OK


def cmd_verify(args):
    config = VerifyConfig.from_args(args)

    try:
        records = verify.run_suites(
            config.suites,
            seed=config.seed,
            count=config.count,
            tolerances=config.tolerances,
        )
    except GeodissipError as e:
        print(f"verification failed: {e}", file=sys.stderr)
        return EXIT_VERIFY_FAILED

    if config.json_path:
        Path(config.json_path).write_text(
            verify.to_json(records, config.seed, config.suites) + "\n",
            encoding="utf-8",
        )

    print(verify.to_text(records, config.seed, config.suites))
    passed = all(record.passed for record in records)
    return EXIT_OK if passed else EXIT_VERIFY_FAILED


def parse_point(text, dim):
    try:
        point = [float(value) for value in text.split(",")]
    except ValueError:
        raise ConfigError(f"Cannot parse point {text!r}", field="point")

    if len(point) != dim:
        raise ConfigError(
            f"Point has {len(point)} coordinates, expected {dim}", field="point"
        )

    return np.array(point)


def parse_params(items):
    params = {}

    for item in items or []:
        key, sep, value = item.partition("=")

        if not sep:
            raise ConfigError(f"Expected key=value, got {item!r}", field="param")

        try:
            params[key] = json.loads(value)
        except json.JSONDecodeError:
            raise ConfigError(f"Cannot parse value of {key!r}: {value!r}", "param")

    return params


def format_rows(matrix):
    matrix = np.atleast_2d(matrix)
    return "\n".join(" ".join(format_number(v) for v in row) for row in matrix)


def evaluate(model, what, x):
    """The requested object at x for a registered model"""
    problem = model.problem()

    if what == "v0":
        return np.asarray(v0(problem, x))
    elif what == "T":
        return leafgeom.tensor_T(problem, x)
    elif what == "projector":
        return leafgeom.projector(problem, x)
    else:
        conserved = list(problem.conserved)
        return sigma(problem.metric, conserved, conserved, x).entries


def cmd_eval(args):
    if args.model not in models.MODELS:
        raise ConfigError(
            f"Unknown model {args.model!r}. Registered models: "
            f"{sorted(models.MODELS)}",
            field="model",
        )

    params = parse_params(args.param)

    try:
        model = models.build_model(args.model, params)
    except ConfigError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid model parameters: {e}", field="param")

    x = parse_point(args.point, model.dim)

    try:
        result = evaluate(model, args.what, x)
    except ConfigError:
        raise
    except GeodissipError as e:
        raise ConfigError(str(e), field="point") from e

    print(format_rows(result))
    return EXIT_OK


def make_parser():
    parser = argparse.ArgumentParser(
        prog="geodissip",
        description="Standard control vector fields on a Riemannian chart",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "--verbose", action="store_true", help="Log debug records to stderr"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser("simulate", help="Integrate a configured flow")
    simulate.add_argument("--config", required=True, help="JSON run config")
    simulate.add_argument("--out", help="Trajectory output path")
    simulate.add_argument("--format", choices=trajectory_io.FORMATS)
    simulate.add_argument("--stride", type=int, help="Write every N-th sample")
    simulate.set_defaults(func=cmd_simulate)

    check = sub.add_parser("verify", help="Run the property suites")
    check.add_argument(
        "--suite", nargs="+", default=[verify.ALL], help="Suites or 'all'"
    )
    check.add_argument("--seed", type=int, default=42)
    check.add_argument("--count", type=int, default=100)
    check.add_argument("--json", help="Path of the JSON report")
    check.add_argument(
        "--tolerance",
        action="append",
        help="NAME=VALUE overrides one property, VALUE overrides all",
    )
    check.set_defaults(func=cmd_verify)

    evaluate_ = sub.add_parser("eval", help="Evaluate an object at a point")
    evaluate_.add_argument("--model", required=True)
    evaluate_.add_argument("--point", required=True, help='e.g. "1,1,1"')
    evaluate_.add_argument("--what", required=True, choices=WHAT)
    evaluate_.add_argument("--param", action="append", help="key=value (JSON)")
    evaluate_.set_defaults(func=cmd_eval)

    return parser


def main(argv=None):
    args = make_parser().parse_args(argv)
    telemetry.configure(verbose=args.verbose, stream=sys.stderr)

    try:
        return args.func(args)
    except ConfigError as e:
        print(f"configuration error ({e.field}): {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
