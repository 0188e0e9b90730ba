"""
Fixed-step classical Runge-Kutta integration of x' = X(x) + u(x) with
conservation and dissipation diagnostics at every sample
"""
from dataclasses import dataclass, field, replace
from enum import Enum
import logging

import numpy as np

from geodissip import control
from geodissip.exceptions import (
    DegenerateGram,
    EmptyTrajectory,
    InvalidPoint,
    MissingRate,
    StepFailure,
)
from geodissip.gram import determinant
from geodissip.manifold import as_coords, as_vector
from geodissip.telemetry import GeodissipLogger
from geodissip.validate import argument_is_positive

logger = logging.getLogger(__name__)

MONOTONICITY_SLACK = 1e-10
RATE_FLOOR = 1e-6


class ControlMode(Enum):
    OFF = "off"
    V0 = "v0"
    RATE = "rate"


@dataclass(frozen=True)
class FlowSpec:
    """What to integrate and over which interval

    Parameters
    ----------
    x0 : array-like
        Initial point

    t0, t1 : float
        Interval, t1 > t0

    dt : float
        Step, 0 < dt <= t1 - t0. The last step is shortened to land on t1

    base : callable, default=None
        Unperturbed vector field X. Absent means the pure control flow

    problem : ControlProblem, default=None
        Conserved fields, target and rate. Required unless ``mode`` is "off";
        when present it also drives the diagnostics

    mode : {"off", "v0", "rate"}, default="off"
        Which control is added to the base field: none, v0 or the control
        field realizing the problem's rate

    closed_form : callable, default=None
        Replaces the generic v0 evaluation in "v0" mode (a model's printed
        expression for the same field)
    """

    x0: np.ndarray
    t0: float = 0.0
    t1: float = 1.0
    dt: float = 1e-3
    base: object = None
    problem: object = None
    mode: ControlMode = ControlMode.OFF
    closed_form: object = None

    def __post_init__(self):
        try:
            mode = ControlMode(self.mode)
        except ValueError:
            valid = [m.value for m in ControlMode]
            raise ValueError(
                f"{self.mode!r} is not a valid control mode. "
                f"Valid values are: {valid}"
            ) from None

        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "x0", np.array(as_coords(self.x0)))

        if not self.t1 > self.t0:
            raise ValueError(f"t1 must be greater than t0, got [{self.t0}, {self.t1}]")

        if not 0 < self.dt <= self.t1 - self.t0:
            raise ValueError(
                f"dt must be in (0, t1 - t0], got dt={self.dt!r} for "
                f"[{self.t0}, {self.t1}]"
            )

        if mode is not ControlMode.OFF and self.problem is None:
            raise ValueError(f"Control mode {mode.value!r} requires a problem")

        if (
            mode is ControlMode.RATE
            and self.problem.rate is None
            and self.problem.prolongation is None
        ):
            raise MissingRate("Control mode 'rate' requires a rate function h")

        if self.problem is not None and self.problem.dim != self.x0.shape[0]:
            raise ValueError(
                f"x0 has {self.x0.shape[0]} coordinates, the problem lives in "
                f"dimension {self.problem.dim}"
            )

    def times(self):
        """Sample times t0 + j dt, closed by t1"""
        span = self.t1 - self.t0
        count = int(np.floor(span / self.dt + 1e-9))
        times = self.t0 + self.dt * np.arange(count + 1)

        if self.t1 - times[-1] > 1e-12 * max(1.0, abs(self.t1)):
            times = np.append(times, self.t1)
        else:
            times[-1] = self.t1

        return times


@dataclass
class TrajectorySample:
    """State and diagnostics at one sample time"""

    t: float
    x: np.ndarray
    F_values: np.ndarray
    G_value: float
    det_sigma_full: float
    rate_target: float = float("nan")
    G_rate_fd: float = float("nan")


def vector_field(spec):
    """The right-hand side x -> X(x) + u(x) of a flow"""
    dim = spec.x0.shape[0]
    problem = spec.problem

    if spec.mode is ControlMode.V0:
        if spec.closed_form is not None:
            u = spec.closed_form
        else:

            def u(x):
                return control.v0(problem, x)

    elif spec.mode is ControlMode.RATE:

        def u(x):
            return control.control_field(problem, x)

    else:
        u = None

    def rhs(x):
        out = np.zeros(dim)

        if spec.base is not None:
            out = out + as_vector(spec.base(x), dim, name="X")

        if u is not None:
            out = out + as_vector(u(x), dim, name="u")

        return out

    return rhs


def _sample(spec, t, x):
    problem = spec.problem

    if problem is None:
        return TrajectorySample(
            t=float(t),
            x=np.array(x),
            F_values=np.zeros(0),
            G_value=float("nan"),
            det_sigma_full=float("nan"),
        )

    frame = problem.frame(x)
    det = determinant(frame.gram)

    if spec.mode is ControlMode.V0:
        target = det
    elif spec.mode is ControlMode.RATE:
        if problem.prolongation is not None:
            target = float(problem.prolongation(x)) * det
        else:
            target = float(problem.rate(x))
    else:
        target = float("nan")

    return TrajectorySample(
        t=float(t),
        x=np.array(x),
        F_values=np.array([F(x) for F in problem.conserved]),
        G_value=problem.target(x),
        det_sigma_full=det,
        rate_target=target,
    )


def fill_rates(samples):
    """Central-difference dG/dt over the sample times (one-sided at the ends)"""
    if len(samples) < 2:
        return samples

    t = np.array([s.t for s in samples])
    G = np.array([s.G_value for s in samples])
    rates = np.gradient(G, t, edge_order=2 if len(samples) > 2 else 1)

    for sample, rate in zip(samples, rates):
        sample.G_rate_fd = float(rate)

    return samples


def rk4_step(rhs, x, h):
    k1 = rhs(x)
    k2 = rhs(x + 0.5 * h * k1)
    k3 = rhs(x + 0.5 * h * k2)
    k4 = rhs(x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@GeodissipLogger.log(feature="integrate")
def integrate(spec):
    """Integrate a flow, returning one sample per step

    Raises StepFailure on a non-finite state or stage and DegenerateGram when the rate
    mode leaves the regular set; both carry the samples computed so far in
    their ``trajectory`` attribute
    """
    rhs = vector_field(spec)
    times = spec.times()
    x = np.array(spec.x0)
    samples = [_sample(spec, times[0], x)]

    for t_start, t_end in zip(times[:-1], times[1:]):
        try:
            x_next = rk4_step(rhs, x, t_end - t_start)
        except DegenerateGram as e:
            e.trajectory = fill_rates(samples)
            logger.warning("Integration left the regular set at t=%r", t_start)
            raise
        except InvalidPoint as e:
            raise StepFailure(
                f"Non-finite stage in the step from t={t_start!r} to t={t_end!r}",
                trajectory=fill_rates(samples),
            ) from e

        if not np.all(np.isfinite(x_next)):
            raise StepFailure(
                f"Non-finite state after the step from t={t_start!r} to "
                f"t={t_end!r}",
                trajectory=fill_rates(samples),
            )

        x = x_next
        samples.append(_sample(spec, t_end, x))

    logger.info(
        "Integrated %d steps on [%r, %r] (mode=%s)",
        len(samples) - 1,
        spec.t0,
        spec.t1,
        spec.mode.value,
    )
    return fill_rates(samples)


@dataclass
class ConservationReport:
    """Drift, monotonicity and rate diagnostics of a trajectory"""

    samples: int
    max_F_drift: list = field(default_factory=list)
    G_violations: int = 0
    max_rate_mismatch: float = float("nan")

    @property
    def max_drift(self):
        return max(self.max_F_drift, default=0.0)

    def passed(self, drift_tolerance=1e-8, rate_tolerance=None):
        ok = self.max_drift <= drift_tolerance and self.G_violations == 0

        if rate_tolerance is not None and np.isfinite(self.max_rate_mismatch):
            ok = ok and self.max_rate_mismatch <= rate_tolerance

        return ok


def conservation_report(traj, slack=MONOTONICITY_SLACK):
    """Summarize a trajectory

    Drift is measured against the first sample. A monotonicity violation is a
    sample where G decreases by more than ``slack``. The rate mismatch
    compares the finite-difference dG/dt against the expected rate (det Sigma
    in v0 mode, h in rate mode) relative to max(|rate|, 1e-6 max |rate|). When
    every expected rate is zero the mismatch is absolute
    """
    traj = list(traj)

    if not traj:
        raise EmptyTrajectory("conservation_report requires at least one sample")

    F = np.array([s.F_values for s in traj], dtype=float)
    G = np.array([s.G_value for s in traj], dtype=float)

    drift = [float(d) for d in np.max(np.abs(F - F[0]), axis=0)] if F.size else []
    violations = int(np.count_nonzero(np.diff(G) < -slack))

    target = np.array([s.rate_target for s in traj], dtype=float)
    fd = np.array([s.G_rate_fd for s in traj], dtype=float)
    usable = np.isfinite(target) & np.isfinite(fd)
    mismatch = float("nan")

    if np.any(usable):
        error = np.abs(fd[usable] - target[usable])
        scale = float(np.max(np.abs(target[usable])))

        if scale == 0.0:
            mismatch = float(np.max(error))
        else:
            denominator = np.maximum(np.abs(target[usable]), RATE_FLOOR * scale)
            mismatch = float(np.max(error / denominator))

    return ConservationReport(
        samples=len(traj),
        max_F_drift=drift,
        G_violations=violations,
        max_rate_mismatch=mismatch,
    )


@argument_is_positive("dt")
def convergence_ratio(spec, dt=None):
    """Max conserved drift at ``dt`` divided by the drift at ``dt / 2``"""
    dt = spec.dt if dt is None else dt
    coarse = conservation_report(integrate(replace(spec, dt=dt)))
    fine = conservation_report(integrate(replace(spec, dt=dt / 2)))

    if fine.max_drift == 0.0:
        return float("inf")

    return coarse.max_drift / fine.max_drift
