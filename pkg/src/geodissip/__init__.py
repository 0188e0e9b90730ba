__version__ = "0.1.0dev"

from geodissip.manifold import ChartPoint, MetricField, ScalarField
from geodissip.control import ControlProblem, v0, control_field
from geodissip.integrate import FlowSpec, integrate, conservation_report

__all__ = [
    "ChartPoint",
    "MetricField",
    "ScalarField",
    "ControlProblem",
    "v0",
    "control_field",
    "FlowSpec",
    "integrate",
    "conservation_report",
]
