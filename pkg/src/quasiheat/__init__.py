"""Quasi self-similar analysis of semilinear heat equations u_t = Lap(u) + f(u).

The library revolves around the lifetime transform F(s) = int_s^inf ds'/f(s')
and its inverse, which turn general superlinear reaction terms into the
power/exponential model cases: computing the small-amplitude exponent q,
solving the radial profile ODEs that generate forward self-similar solutions,
lifting profiles into comparison solutions of the full heat flow, evolving
radially symmetric data to classify global existence versus finite-time
blow-up, and locating the critical initial-data amplitude.
"""

from .errors import (
    BracketFailure,
    ConfigError,
    DomainError,
    GridTooCoarse,
    InvalidBracket,
    InvalidQ,
    NoConvergence,
    NonIntegrableTail,
    NotConverged,
    OutOfGrid,
    QuasiheatError,
    SandwichViolated,
    SingularPoint,
    SmallnessViolated,
    StepFailure,
    TailUnknown,
    UnboundedSupremum,
)
from .nonlinearity import (
    FujitaClass,
    Nonlinearity,
    QEstimate,
    custom,
    estimate_q,
    eval_F,
    eval_Finv,
    eval_Finv_log,
    eval_Finv_log_grid,
    eval_logF,
    exp_inverse,
    exp_model,
    fprime_F,
    from_config,
    fujita_classify,
    log_power,
    power,
    register_custom,
)

__version__ = "0.1.0"
