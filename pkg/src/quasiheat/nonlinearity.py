"""Reaction terms and their lifetime transform.

This module defines the nonlinear reaction term f of the semilinear heat
equation u_t = Laplace(u) + f(u) together with the machinery everything else
in the library is built on: the lifetime transform

    F(s) = integral_s^inf  ds' / f(s'),

its decreasing inverse F^{-1}, and the small-amplitude exponent

    q = lim_{s -> 0+} f'(s) F(s).

F(s) is the blow-up time of the spatially flat ODE u' = f(u) started at s,
so finiteness of F is the basic superlinearity requirement, and q >= 1 always
holds when the limit exists.  The dichotomy between global existence and
finite-time blow-up of small solutions is governed by q against 1 + N/2.

Built-in reaction terms
-----------------------
``power(p)``        f(s) = s^p with p > 1 (closed-form transform).
``exp_model()``     f(s) = e^s, defined on all of R (closed-form transform).
``exp_inverse()``   f(s) = exp(-1/s) for s <= 1/4, continued by a C^2-matched
                    increasing convex exponential  a*e^{b s} + c.
``log_power(p,r)``  f(s) = s^p * log(e + 1/s)^{-r} for s <= 1/2, continued
                    the same way.
``custom(...)``     user-supplied f, f', f'' (plus optional helpers).

The extended terms matter: exp_inverse is convex only below 1/2 and log_power
is only specified for small arguments, so both are blended at ``u_blend``
into an exponential that keeps f > 0, f' > 0, f'' > 0 and an integrable 1/f.

Numerical range
---------------
F can exceed the double-precision range by astronomical margins (for
exp_inverse, F(1e-4) ~ e^10000).  All internal computation therefore runs on
log F.  ``eval_F``/``eval_Finv`` are thin wrappers over ``eval_logF`` and
``eval_Finv_log``, which are the robust log-domain interface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq
from scipy.special import logsumexp

from .errors import (
    BracketFailure,
    DomainError,
    InvalidQ,
    NoConvergence,
    NonIntegrableTail,
)

__all__ = [
    "Nonlinearity",
    "FujitaClass",
    "QEstimate",
    "power",
    "exp_model",
    "exp_inverse",
    "log_power",
    "custom",
    "register_custom",
    "from_config",
    "eval_F",
    "eval_logF",
    "eval_Finv",
    "eval_Finv_log",
    "eval_Finv_log_grid",
    "estimate_q",
    "fujita_classify",
    "fprime_F",
]

_LOG_HUGE = 700.0  # exp() overflow guard


# ---------------------------------------------------------------------------
# the Nonlinearity record


@dataclass(frozen=True)
class Nonlinearity:
    """A reaction term f with derivatives and transform helpers.

    ``f``, ``f1``, ``f2`` are vectorized maps for f, f', f''.  ``log_f`` and
    ``dlog_f`` are scalar maps for log f and f'/f; they stay finite where f
    itself under- or overflows, which is what keeps the transform computable
    at extreme arguments.  ``analytic_logF`` short-circuits quadrature when a
    closed form exists.
    """

    kind: str
    params: dict
    f: Callable
    f1: Callable
    f2: Callable
    log_f: Callable[[float], float]
    dlog_f: Callable[[float], float]
    log_f_vec: Callable
    analytic_logF: Callable[[float], float] | None = None
    analytic_logFinv: Callable[[float], float] | None = None
    domain_floor: float = 1e-12
    u_blend: float | None = None
    allow_nonpositive: bool = False  # exp model: domain is all of R
    label: str = ""

    def __repr__(self):  # params in a stable order for reports
        inner = ", ".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"Nonlinearity({self.kind}{': ' if inner else ''}{inner})"

    def with_floor(self, domain_floor):
        return replace(self, domain_floor=domain_floor)


@dataclass(frozen=True)
class FujitaClass:
    """Verdict of the exponent q against the critical value 1 + N/2."""

    q: float
    n_dim: int
    verdict: str  # "subcritical" | "critical" | "supercritical"

    @property
    def critical_value(self):
        return 1.0 + self.n_dim / 2.0


@dataclass(frozen=True)
class QEstimate:
    """Extrapolated small-amplitude exponent plus its raw sample sequence.

    ``sequence`` holds the raw f'(s)F(s) samples on ``s_grid``;
    ``window_estimates`` the limit read from fits over nested tail windows
    (their spread is the convergence diagnostic); ``accelerated`` the
    delta-squared accelerated sequence kept for inspection.
    """

    q: float
    s_grid: np.ndarray
    sequence: np.ndarray
    window_estimates: np.ndarray
    accelerated: np.ndarray

    def __float__(self):
        return float(self.q)


# ---------------------------------------------------------------------------
# built-in reaction terms


def _vectorize_scalar(fn):
    """Lift a float->float map to accept arrays (used for custom terms)."""

    def wrapped(s):
        arr = np.asarray(s, dtype=float)
        if arr.ndim == 0:
            return float(fn(float(arr)))
        out = np.empty_like(arr)
        flat = arr.ravel()
        o = out.ravel()
        for i, v in enumerate(flat):
            o[i] = fn(float(v))
        return out

    return wrapped


def power(p: float, domain_floor: float = 1e-12) -> Nonlinearity:
    """f(s) = s^p with p > 1.  Transform F(s) = s^{-(p-1)} / (p-1)."""
    if p <= 1:
        raise DomainError(f"power nonlinearity needs p > 1, got {p}")
    pm1 = p - 1.0
    log_pm1 = math.log(pm1)

    def f(s):
        s = np.asarray(s, dtype=float)
        out = np.power(np.maximum(s, 0.0), p)
        return out if out.ndim else float(out)

    def f1(s):
        s = np.asarray(s, dtype=float)
        out = p * np.power(np.maximum(s, 0.0), p - 1.0)
        return out if out.ndim else float(out)

    def f2(s):
        s = np.asarray(s, dtype=float)
        out = p * pm1 * np.power(np.maximum(s, 1e-300), p - 2.0)
        return out if out.ndim else float(out)

    def log_f(s):
        return p * math.log(s)

    def log_f_vec(s):
        return p * np.log(s)

    return Nonlinearity(
        kind="power",
        params={"p": p},
        f=f,
        f1=f1,
        f2=f2,
        log_f=log_f,
        dlog_f=lambda s: p / s,
        log_f_vec=log_f_vec,
        analytic_logF=lambda s: -pm1 * math.log(s) - log_pm1,
        analytic_logFinv=lambda ls: math.exp(-(ls + log_pm1) / pm1),
        domain_floor=domain_floor,
        label=f"power(p={p:g})",
    )


def exp_model(domain_floor: float = 1e-12) -> Nonlinearity:
    """f(s) = e^s on all of R.  Transform F(s) = e^{-s}; note f(0) = 1."""

    def f(s):
        s = np.asarray(s, dtype=float)
        out = np.exp(np.minimum(s, _LOG_HUGE))
        return out if out.ndim else float(out)

    return Nonlinearity(
        kind="exp_model",
        params={},
        f=f,
        f1=f,
        f2=f,
        log_f=lambda s: s,
        dlog_f=lambda s: 1.0,
        log_f_vec=lambda s: np.asarray(s, dtype=float),
        analytic_logF=lambda s: -s,
        analytic_logFinv=lambda ls: -ls,
        domain_floor=domain_floor,
        allow_nonpositive=True,
        label="exp_model",
    )


def _blend_coefficients(f_val, f1_val, f2_val, ub):
    """C^2-match a*e^{b u} + c to (f, f', f'') at u = ub."""
    b = f2_val / f1_val
    a = f1_val * math.exp(-b * ub) / b
    c = f_val - f1_val / b
    return a, b, c


def exp_inverse(domain_floor: float = 1e-12) -> Nonlinearity:
    """f(s) = exp(-1/s), continued past s = 1/4 by a convex exponential.

    The bare formula has f'' > 0 only for s < 1/2, so the continuation point
    sits at 1/4, safely inside the convexity region.  The blend coefficients
    follow from the C^2 matching conditions and come out exactly as
    a = 2 e^{-6}, b = 8, c = -e^{-4}.
    """
    ub = 0.25
    fb = math.exp(-1.0 / ub)
    f1b = fb / ub**2
    f2b = fb * (1.0 - 2.0 * ub) / ub**4
    a, b, c = _blend_coefficients(fb, f1b, f2b, ub)

    def f(s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            nat = np.where(s > 0.0, np.exp(-1.0 / np.maximum(s, 1e-300)), 0.0)
            ext = a * np.exp(np.minimum(b * s, _LOG_HUGE)) + c
        out = np.where(s < ub, nat, ext)
        return out if out.ndim else float(out)

    def f1(s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            sm = np.maximum(s, 1e-300)
            nat = np.exp(-1.0 / sm) / sm**2
            ext = a * b * np.exp(np.minimum(b * s, _LOG_HUGE))
        out = np.where(s < ub, np.where(s > 0.0, nat, 0.0), ext)
        return out if out.ndim else float(out)

    def f2(s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            sm = np.maximum(s, 1e-300)
            nat = np.exp(-1.0 / sm) * (1.0 - 2.0 * sm) / sm**4
            ext = a * b * b * np.exp(np.minimum(b * s, _LOG_HUGE))
        out = np.where(s < ub, np.where(s > 0.0, nat, 0.0), ext)
        return out if out.ndim else float(out)

    def log_f(s):
        if s < ub:
            return -1.0 / s
        t = b * s
        if t > 40.0:
            return math.log(a) + t + math.log1p(c * math.exp(-t) / a)
        return math.log(a * math.exp(t) + c)

    def dlog_f(s):
        if s < ub:
            return 1.0 / (s * s)
        return b / (1.0 + (c / a) * math.exp(-b * s))

    def log_f_vec(s):
        s = np.asarray(s, dtype=float)
        t = b * s
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            ext = np.where(
                t > 40.0,
                math.log(a) + t + np.log1p(c * np.exp(-np.minimum(t, _LOG_HUGE)) / a),
                np.log(np.maximum(a * np.exp(np.minimum(t, 41.0)) + c, 1e-300)),
            )
            out = np.where(s < ub, -1.0 / np.maximum(s, 1e-300), ext)
        return out

    return Nonlinearity(
        kind="exp_inverse",
        params={},
        f=f,
        f1=f1,
        f2=f2,
        log_f=log_f,
        dlog_f=dlog_f,
        log_f_vec=log_f_vec,
        domain_floor=domain_floor,
        u_blend=ub,
        label="exp_inverse",
    )


def log_power(p: float, r: float, domain_floor: float = 1e-12) -> Nonlinearity:
    """f(s) = s^p * log(e + 1/s)^{-r}, continued past s = 1/2.

    Power-type decay at zero with a logarithmic damping; the parameter names
    follow the usual convention (p the power, r >= 0 the log exponent).
    """
    if p <= 1:
        raise DomainError(f"log_power needs p > 1, got {p}")
    if r < 0:
        raise DomainError(f"log_power needs r >= 0, got {r}")
    ub = 0.5
    e = math.e

    def _nat_f(u):
        return u**p * math.log(e + 1.0 / u) ** (-r)

    def _nat_f1(u):
        L = math.log(e + 1.0 / u)
        A = p + r / (L * (e * u + 1.0))
        return u ** (p - 1.0) * L ** (-r) * A

    def _nat_f2(u):
        L = math.log(e + 1.0 / u)
        D = L * (e * u + 1.0)
        A = p + r / D
        Dp = e * L - 1.0 / u
        Ap = -r * Dp / (D * D)
        return u ** (p - 2.0) * L ** (-r) * ((p - 1.0) * A + r * A / D + u * Ap)

    fb, f1b, f2b = _nat_f(ub), _nat_f1(ub), _nat_f2(ub)
    a, b, c = _blend_coefficients(fb, f1b, f2b, ub)

    def f(s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            sm = np.maximum(s, 1e-300)
            nat = sm**p * np.log(e + 1.0 / sm) ** (-r)
            ext = a * np.exp(np.minimum(b * s, _LOG_HUGE)) + c
        out = np.where(s < ub, np.where(s > 0.0, nat, 0.0), ext)
        return out if out.ndim else float(out)

    def f1(s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            sm = np.maximum(s, 1e-300)
            L = np.log(e + 1.0 / sm)
            A = p + r / (L * (e * sm + 1.0))
            nat = sm ** (p - 1.0) * L ** (-r) * A
            ext = a * b * np.exp(np.minimum(b * s, _LOG_HUGE))
        out = np.where(s < ub, np.where(s > 0.0, nat, 0.0), ext)
        return out if out.ndim else float(out)

    def f2(s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            sm = np.maximum(s, 1e-300)
            L = np.log(e + 1.0 / sm)
            D = L * (e * sm + 1.0)
            A = p + r / D
            Dp = e * L - 1.0 / sm
            Ap = -r * Dp / (D * D)
            nat = sm ** (p - 2.0) * L ** (-r) * ((p - 1.0) * A + r * A / D + sm * Ap)
            ext = a * b * b * np.exp(np.minimum(b * s, _LOG_HUGE))
        out = np.where(s < ub, np.where(s > 0.0, nat, 0.0), ext)
        return out if out.ndim else float(out)

    def log_f(s):
        if s < ub:
            return p * math.log(s) - r * math.log(math.log(e + 1.0 / s))
        t = b * s
        if t > 40.0:
            return math.log(a) + t + math.log1p(c * math.exp(-t) / a)
        return math.log(a * math.exp(t) + c)

    def dlog_f(s):
        if s < ub:
            L = math.log(e + 1.0 / s)
            return p / s + r / (s * (e * s + 1.0) * L)
        return b / (1.0 + (c / a) * math.exp(-b * s))

    def log_f_vec(s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            sm = np.maximum(s, 1e-300)
            nat = p * np.log(sm) - r * np.log(np.log(e + 1.0 / sm))
            t = b * s
            ext = np.where(
                t > 40.0,
                math.log(a) + t + np.log1p(c * np.exp(-np.minimum(t, _LOG_HUGE)) / a),
                np.log(np.maximum(a * np.exp(np.minimum(t, 41.0)) + c, 1e-300)),
            )
        return np.where(s < ub, nat, ext)

    return Nonlinearity(
        kind="log_power",
        params={"p": p, "r": r},
        f=f,
        f1=f1,
        f2=f2,
        log_f=log_f,
        dlog_f=dlog_f,
        log_f_vec=log_f_vec,
        domain_floor=domain_floor,
        u_blend=ub,
        label=f"log_power(p={p:g}, r={r:g})",
    )


def custom(
    name: str,
    f: Callable,
    f1: Callable,
    f2: Callable,
    log_f: Callable[[float], float] | None = None,
    dlog_f: Callable[[float], float] | None = None,
    analytic_F: Callable[[float], float] | None = None,
    domain_floor: float = 1e-12,
) -> Nonlinearity:
    """Wrap user-supplied scalar maps f, f', f'' as a reaction term.

    ``log_f``/``dlog_f`` default to compositions of ``f`` and only matter when
    f leaves the double range; supply them for terms with extreme behaviour.
    """
    f_v = f if _accepts_arrays(f) else _vectorize_scalar(f)
    f1_v = f1 if _accepts_arrays(f1) else _vectorize_scalar(f1)
    f2_v = f2 if _accepts_arrays(f2) else _vectorize_scalar(f2)

    if log_f is None:
        def log_f(s, _f=f):  # noqa: E306 - simple fallback closure
            return math.log(float(_f(s)))

    if dlog_f is None:
        def dlog_f(s, _lf=log_f):
            h = 1e-6 * s
            return (_lf(s + h) - _lf(s - h)) / (2.0 * h)

    analytic_logF = None
    if analytic_F is not None:
        def analytic_logF(s, _F=analytic_F):
            return math.log(float(_F(s)))

    return Nonlinearity(
        kind="custom",
        params={"name": name},
        f=f_v,
        f1=f1_v,
        f2=f2_v,
        log_f=log_f,
        dlog_f=dlog_f,
        log_f_vec=_vectorize_scalar(log_f),
        analytic_logF=analytic_logF,
        domain_floor=domain_floor,
        label=f"custom({name})",
    )


def _accepts_arrays(fn):
    try:
        out = fn(np.array([0.5, 1.0]))
    except Exception:
        return False
    return isinstance(out, np.ndarray) and out.shape == (2,)


CUSTOM_REGISTRY: dict[str, Callable[[], Nonlinearity]] = {}


def register_custom(name: str, factory: Callable[[], Nonlinearity]) -> None:
    """Register a named factory so configs can refer to custom terms by name."""
    CUSTOM_REGISTRY[name] = factory


def from_config(cfg: dict) -> Nonlinearity:
    """Build a reaction term from a config mapping.

    Examples: ``{"kind": "power", "p": 3.0}``,
    ``{"kind": "log_power", "p": 3.0, "r": 1.0}``,
    ``{"kind": "custom", "name": "my_term"}`` (looked up in the registry;
    no runtime expression parsing).
    """
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise DomainError(f"nonlinearity config needs a 'kind' key: {cfg!r}")
    kind = cfg["kind"]
    if kind == "power":
        return power(float(cfg["p"]))
    if kind == "exp_model":
        return exp_model()
    if kind == "exp_inverse":
        return exp_inverse()
    if kind == "log_power":
        return log_power(float(cfg["p"]), float(cfg["r"]))
    if kind == "custom":
        name = cfg.get("name")
        if name not in CUSTOM_REGISTRY:
            raise DomainError(f"unknown custom nonlinearity {name!r}")
        return CUSTOM_REGISTRY[name]()
    raise DomainError(f"unknown nonlinearity kind {kind!r}")


# ---------------------------------------------------------------------------
# the lifetime transform  F(s) = int_s^inf ds'/f(s')  (computed as log F)

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}

# piece-splitting thresholds for the adaptive composite quadrature
_MAX_DROP = 6.0      # max variation of log f across one quadrature piece
_MAX_RATIO = 4.0     # max endpoint ratio of one piece
_CUTOFF = 40.0       # stop once the remaining stretch is e^-40 of the total


def _gl(n):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = leggauss(n)
    return _GL_CACHE[n]


def _partition(nl, s, S):
    """Split [s, S] into pieces on which 1/f is mild enough for fixed-order
    Gauss-Legendre quadrature.

    Pieces are accepted once log f varies by at most ``_MAX_DROP`` and the
    endpoint ratio stays below ``_MAX_RATIO``; otherwise they are bisected
    (geometrically for wide pieces).  Pieces are emitted left to right, and
    the walk stops early once everything to the right is provably below
    e^-40 of the accumulated integral — that is what keeps the cost bounded
    for terms whose 1/f collapses over thousands of e-foldings.
    """
    lf = nl.log_f
    pieces = []
    log_lb = -math.inf  # running lower bound for log of the integral so far
    # f is only C^2 across the blend junction; never let a piece straddle it
    if nl.u_blend is not None and s < nl.u_blend < S:
        ub = nl.u_blend
        stack = [(ub, lf(ub), S, lf(S)), (s, lf(s), ub, lf(ub))]
    else:
        stack = [(s, lf(s), S, lf(S))]
    broke = False
    while stack:
        a, lfa, b, lfb = stack.pop()
        if pieces and (-lfa + math.log(max(S - a, 1e-300))) < log_lb - _CUTOFF:
            broke = True
            break
        drop = lfb - lfa
        tiny = (b - a) <= 1e-13 * b
        if tiny or (drop <= _MAX_DROP and b <= _MAX_RATIO * a):
            pieces.append((a, b))
            log_lb = np.logaddexp(log_lb, -lfb + math.log(b - a))
            continue
        mid = math.sqrt(a * b) if b > 16.0 * a else 0.5 * (a + b)
        lfm = lf(mid)
        stack.append((mid, lfm, b, lfb))
        stack.append((a, lfa, mid, lfm))
    return pieces, broke


def _tail_log_integral(nl, S):
    """Analytic tail  int_S^inf ds/f  from a power-law fit of f on [S/10, S].

    Fitting log f against log s over the last resolved decade gives a local
    model C s^m; its tail integral is S / (f(S) (m-1)).  A slope below ~1
    means 1/f is not integrable and the transform does not exist.
    """
    nodes = np.geomspace(S / 10.0, S, 16)
    lfv = nl.log_f_vec(nodes)
    x = np.log(nodes)
    xc = x - x.mean()
    m = float(np.dot(xc, lfv - lfv.mean()) / np.dot(xc, xc))
    if not np.isfinite(m) or m <= 1.02:
        raise NonIntegrableTail(
            f"{nl.label or nl.kind}: local growth exponent {m:.4g} at s ~ {S:.3g} "
            "gives a divergent lifetime integral"
        )
    return math.log(S) - float(lfv[-1]) - math.log(m - 1.0)


def eval_logF(nl: Nonlinearity, s: float, n_nodes: int = 32) -> float:
    """log of the lifetime transform F(s) = int_s^inf ds'/f(s').

    Closed forms are used when available; otherwise the integral is taken to
    S = max(s,1)*1e3 by adaptive piecewise Gauss-Legendre quadrature on
    log-scaled pieces, plus an analytic tail from the local power-law model
    of f.  Working on log F keeps the result meaningful far outside the
    double range of F itself.
    """
    s = float(s)
    if not np.isfinite(s) or (s < nl.domain_floor and not nl.allow_nonpositive):
        raise DomainError(
            f"eval_F: s = {s:g} is below the domain floor {nl.domain_floor:g}"
        )
    if nl.analytic_logF is not None:
        return float(nl.analytic_logF(s))
    if s <= 0.0:
        raise DomainError(f"eval_F: numeric transform needs s > 0, got {s:g}")
    S = max(s, 1.0) * 1e3
    pieces, broke = _partition(nl, s, S)
    x, w = _gl(n_nodes)
    a = np.array([p[0] for p in pieces])
    b = np.array([p[1] for p in pieces])
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    logw = (np.log(half)[:, None] + np.log(w)[None, :]).ravel()
    lfv = nl.log_f_vec(nodes)
    log_main = float(logsumexp(logw - lfv))
    if broke:
        return log_main
    log_tail = _tail_log_integral(nl, S)
    return float(np.logaddexp(log_main, log_tail))


def eval_F(nl: Nonlinearity, s: float, n_nodes: int = 32) -> float:
    """Lifetime transform F(s).  Returns inf when F exceeds the double range
    (use ``eval_logF`` in that regime)."""
    lf = eval_logF(nl, s, n_nodes=n_nodes)
    if lf > _LOG_HUGE:
        return math.inf
    return math.exp(lf)


def eval_Finv_log(
    nl: Nonlinearity,
    log_sigma: float,
    s_hint: float | None = None,
    n_nodes: int = 32,
) -> float:
    """Inverse transform: the s with log F(s) = log_sigma.

    F is strictly decreasing with range (0, inf), so the root is found by
    geometric bracket expansion followed by Brent iteration.  ``s_hint``
    seeds the bracket and makes sweeps along slowly-varying arguments cheap.
    """
    if nl.analytic_logFinv is not None:
        return float(nl.analytic_logFinv(log_sigma))
    floor = nl.domain_floor

    def g(s):
        return eval_logF(nl, s, n_nodes=n_nodes) - log_sigma

    s0 = s_hint if s_hint is not None else 0.1
    s0 = min(max(s0, 10.0 * floor), 1e8)
    g0 = g(s0)
    if g0 == 0.0:
        return s0
    grow = 8.0
    if g0 > 0.0:  # F(s0) too big -> move right
        lo, glo = s0, g0
        hi = s0
        for _ in range(40):
            hi *= grow
            ghi = g(hi)
            if ghi <= 0.0:
                break
            lo, glo = hi, ghi
            if hi > 1e12:
                raise BracketFailure(
                    f"{nl.label}: no s <= 1e12 with F(s) = exp({log_sigma:.6g})"
                )
        else:
            raise BracketFailure(f"{nl.label}: bracket expansion failed upward")
    else:
        hi, ghi = s0, g0
        lo = s0
        for _ in range(400):
            lo /= grow
            if lo < floor:
                lo = floor
            glo = g(lo)
            if glo >= 0.0:
                break
            hi, ghi = lo, glo
            if lo <= floor:
                raise BracketFailure(
                    f"{nl.label}: F(domain_floor) < exp({log_sigma:.6g}); "
                    "sigma is outside the representable range"
                )
        else:
            raise BracketFailure(f"{nl.label}: bracket expansion failed downward")
    if lo == hi:
        return lo
    return float(brentq(g, lo, hi, xtol=1e-280, rtol=4 * np.finfo(float).eps,
                        maxiter=200))


def eval_Finv(nl: Nonlinearity, sigma: float, s_hint: float | None = None) -> float:
    """Inverse transform at sigma > 0, to relative tolerance ~1e-12."""
    if not sigma > 0.0:
        raise DomainError(f"eval_Finv needs sigma > 0, got {sigma!r}")
    return eval_Finv_log(nl, math.log(sigma), s_hint=s_hint)


def eval_Finv_log_grid(nl: Nonlinearity, log_sigmas: np.ndarray) -> np.ndarray:
    """Vectorized inverse transform along a slowly varying array of log sigma.

    Consecutive solutions seed each other, which turns a grid of n inversions
    into roughly O(n) cheap Brent solves instead of n cold bracket searches.
    """
    log_sigmas = np.asarray(log_sigmas, dtype=float)
    out = np.empty(log_sigmas.shape)
    flat_in = log_sigmas.ravel()
    flat_out = out.ravel()
    hint = None
    for i, ls in enumerate(flat_in):
        flat_out[i] = eval_Finv_log(nl, float(ls), s_hint=hint)
        hint = flat_out[i]
    return out


def fprime_F(nl: Nonlinearity, s: float) -> float:
    """The product f'(s) F(s), computed stably as (f'/f) * exp(log f + log F)."""
    expo = nl.log_f(s) + eval_logF(nl, s)
    return float(nl.dlog_f(s)) * math.exp(expo)


# ---------------------------------------------------------------------------
# small-amplitude exponent and its dichotomy classification


def _aitken(seq):
    """One Aitken delta-squared pass; robust against vanishing differences."""
    seq = np.asarray(seq, dtype=float)
    if seq.size < 3:
        return seq.copy()
    d1 = seq[1:] - seq[:-1]
    d2 = d1[1:] - d1[:-1]
    out = np.empty(seq.size - 2)
    for i in range(out.size):
        if abs(d2[i]) > 1e-14 * (abs(seq[i + 2]) + 1e-300):
            out[i] = seq[i + 2] - d1[i + 1] ** 2 / d2[i]
        else:
            out[i] = seq[i + 2]
    return out


def _invlog_limit(s_tail, q_tail, deg=2):
    """Limit of q(s) = q + a/L + b/L^2 + ...  with L = log(1/s), read from a
    least-squares fit in powers of 1/L.  Returns (limit, rms residual)."""
    L = -np.log(s_tail)
    A = np.vander(1.0 / L, deg + 1, increasing=True)
    coef, *_ = np.linalg.lstsq(A, q_tail, rcond=None)
    resid = q_tail - A @ coef
    return float(coef[0]), float(np.sqrt(np.mean(resid**2)))


def estimate_q(
    nl: Nonlinearity,
    s0: float = 1e-1,
    n_levels: int = 30,
    conv_tol: float = 1e-2,
) -> QEstimate:
    """Small-amplitude exponent  q = lim_{s->0+} f'(s) F(s).

    Samples f'F on the geometric grid s_k = s0 * 2^-k and extrapolates with a
    quadratic fit in 1/log(1/s).  That basis is what makes log-damped terms
    tractable: their corrections decay like 1/log(1/s), far too slowly for a
    raw read or for difference-based acceleration (a delta-squared pass is
    still computed and returned for inspection).  The limit is read from
    three nested tail windows; ``NoConvergence`` is raised when the window
    estimates disagree or the fit does not actually describe the samples.
    """
    ks = np.arange(n_levels)
    s_grid = s0 * 0.5**ks
    if s_grid[-1] < nl.domain_floor:
        raise DomainError("estimate_q grid reaches below the domain floor")
    seq = np.array([fprime_F(nl, s) for s in s_grid])
    windows = (10, 12, 14)
    fits = []
    rms_worst = 0.0
    for m in windows:
        val, rms = _invlog_limit(s_grid[-m:], seq[-m:])
        fits.append(val)
        rms_worst = max(rms_worst, rms)
    fits = np.array(fits)
    q_val = float(fits[1])
    spread = float(np.max(fits) - np.min(fits))
    scale = max(1.0, abs(q_val))
    if spread > conv_tol * scale or rms_worst > conv_tol * scale:
        raise NoConvergence(
            f"{nl.label}: f'F limit did not settle (window spread {spread:.3g}, "
            f"fit residual {rms_worst:.3g}); raw sequence attached"
        )
    return QEstimate(
        q=q_val,
        s_grid=s_grid,
        sequence=seq,
        window_estimates=fits,
        accelerated=_aitken(_aitken(seq)),
    )


def fujita_classify(q: float, n_dim: int, tol: float = 1e-9) -> FujitaClass:
    """Place q against the critical exponent 1 + N/2.

    Below it, small solutions of the heat flow survive globally; above it,
    every nontrivial nonnegative solution blows up.  Ties within ``tol`` are
    reported as critical, never silently rounded to a side.
    """
    if not q >= 1.0 - 1e-12:
        raise InvalidQ(f"q = {q!r} < 1 cannot occur for an admissible reaction term")
    if n_dim < 1 or int(n_dim) != n_dim:
        raise DomainError(f"n_dim must be a positive integer, got {n_dim!r}")
    crit = 1.0 + n_dim / 2.0
    if abs(q - crit) <= tol:
        verdict = "critical"
    elif q < crit:
        verdict = "subcritical"
    else:
        verdict = "supercritical"
    return FujitaClass(q=float(q), n_dim=int(n_dim), verdict=verdict)


# ---------------------------------------------------------------------------
# construction-time sanity checks


def validate(nl: Nonlinearity, s_max: float = 4.0, n_samples: int = 120) -> None:
    """Sample the structural requirements: f, f', f'' > 0, f(0+) = 0 (except
    the exponential model), and a finite lifetime integral."""
    grid = np.geomspace(max(nl.domain_floor * 10.0, 1e-10), s_max, n_samples)
    fv, f1v, f2v = nl.f(grid), nl.f1(grid), nl.f2(grid)
    for name, vals in (("f", fv), ("f'", f1v), ("f''", f2v)):
        bad = ~(np.asarray(vals) > 0.0)
        # exp(-1/s) underflows to 0 for s < ~1/700; that is a representation
        # limit, not a sign violation
        bad &= grid > 2e-3
        if np.any(bad):
            i = int(np.argmax(bad))
            raise DomainError(
                f"{nl.label}: {name}({grid[i]:.3g}) = {vals[i]:.3g} is not positive"
            )
    if nl.kind != "exp_model":
        probe = nl.f(np.array([1e-9, 1e-6, 1e-3]))
        if not (probe[0] <= probe[1] <= probe[2] and probe[0] < 1e-6):
            raise DomainError(f"{nl.label}: f does not vanish at 0+")
    eval_logF(nl, 0.5)  # raises NonIntegrableTail if the tail diverges
