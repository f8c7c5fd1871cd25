"""Regularized quasi-monotone method (RQM) for stochastic composite minimization.

The package bundles the RQM solver, an SRSG comparator with Nesterov
extrapolation, the Huber/l1 robust-regression benchmark problem, a synthetic
data generator, and runtime checks of the Lyapunov and rate bounds.
"""

from rqmopt.errors import (
    ConfigurationError,
    DegenerateSubproblemError,
    NumericalFailure,
    ParseError,
    RateNotMeasurableError,
    ReferenceNotConvergedError,
    RqmError,
    ShapeError,
)
from rqmopt.schedules import Schedule, ScheduleKind, modulus_mu, schedule_gamma, schedule_weights
from rqmopt.prox import L1Regularizer, ProxFunction, EUCLIDEAN, phi_eval, phi_gradient_check, rqm_prox, srsg_prox
from rqmopt.oracle import (
    ExactOracle,
    HuberRegressionProblem,
    SubgradientSample,
    full_objective,
    huber_subgradient,
    huber_value,
    sample_subgradient,
)
from rqmopt.datagen import DataSet, generate, read_csv, write_csv
from rqmopt.trace import Trace, TraceOptions
from rqmopt.rqm import RqmState, init, run, step
from rqmopt.srsg import SrsgState, srsg_init, srsg_run, srsg_step

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "DataSet",
    "DegenerateSubproblemError",
    "EUCLIDEAN",
    "ExactOracle",
    "HuberRegressionProblem",
    "L1Regularizer",
    "NumericalFailure",
    "ParseError",
    "ProxFunction",
    "RateNotMeasurableError",
    "ReferenceNotConvergedError",
    "RqmError",
    "RqmState",
    "Schedule",
    "ScheduleKind",
    "ShapeError",
    "SrsgState",
    "SubgradientSample",
    "Trace",
    "TraceOptions",
    "full_objective",
    "generate",
    "huber_subgradient",
    "huber_value",
    "init",
    "modulus_mu",
    "phi_eval",
    "phi_gradient_check",
    "read_csv",
    "rqm_prox",
    "run",
    "sample_subgradient",
    "schedule_gamma",
    "schedule_weights",
    "srsg_init",
    "srsg_prox",
    "srsg_run",
    "srsg_step",
    "step",
    "write_csv",
]
