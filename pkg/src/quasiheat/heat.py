"""Radially symmetric evolution of u_t = Lap(u) + f(u) and its certificates.

The solver is a method-of-lines scheme on the radial form

    u_t = u_rr + (N-1)/r u_r + f(u),    u_r(0) = 0,

with second-order central differences, the symmetry stencil
Lap(u)(0) ~ 2N (u_1 - u_0)/dr^2 at the axis, and an adaptive
implicit-explicit predictor/corrector in time (diffusion implicit, reaction
explicit, step size controlled by the embedded error and by the reaction
scale).  Near blow-up the reaction cap collapses the step, which together
with the sup-norm ceiling is the numerical blow-up proxy; runs that reach
T_max below their comparison envelope are classified global; everything
else is reported undecided rather than coerced.

Independent of evolution, the linear semigroup bound gives a blow-up
certificate: a global solution forces F(sup e^{t Lap} u_0) >= t for all t,
so finding a time where that fails proves nonexistence without solving the
nonlinear flow (``necessary_condition_scan``).  ``verify_sandwich`` checks an
evolved global run against the lifted comparison solutions from
:mod:`quasiheat.similarity`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.linalg import solve_banded
from scipy.special import gammaln

from .errors import (
    ConfigError,
    DomainError,
    GridTooCoarse,
    SandwichViolated,
    TailUnknown,
)
from .nonlinearity import Nonlinearity, eval_logF
from .similarity import LiftedSolution

__all__ = [
    "RadialField",
    "SolverConfig",
    "EvolutionOutcome",
    "heat_semigroup_sup",
    "evolve",
    "necessary_condition_scan",
    "verify_sandwich",
    "snapshots_to_csv",
]


# ---------------------------------------------------------------------------
# fields


@dataclass
class RadialField:
    """A radial grid function u(r) at a fixed time.

    ``fn``, when present, is the closed-form (vectorized) profile the grid
    was sampled from; quadratures use it for accuracy beyond the grid and
    between its nodes.  ``nonincreasing`` is a verified tag, not a promise.
    """

    n_dim: int
    r_grid: np.ndarray
    values: np.ndarray
    time: float = 0.0
    fn: Callable | None = None
    nonincreasing: bool | None = None
    label: str = ""

    def __post_init__(self):
        self.r_grid = np.asarray(self.r_grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.r_grid.shape != self.values.shape:
            raise DomainError("r_grid and values must have matching shapes")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("field values must be finite")
        if self.nonincreasing is None:
            self.nonincreasing = bool(np.all(np.diff(self.values) <= 1e-12))

    def sup(self) -> float:
        return float(np.max(self.values))

    @property
    def r_domain(self) -> float:
        return float(self.r_grid[-1])


# ---------------------------------------------------------------------------
# linear heat semigroup

def _sphere_area(n_dim):
    # surface measure of the unit sphere in R^N
    return 2.0 * math.pi ** (n_dim / 2.0) / math.exp(gammaln(n_dim / 2.0))


def heat_semigroup_sup(u0: RadialField, t: float, epsrel: float = 1e-11) -> float:
    """Sup norm of the linear heat semigroup applied to a radially
    non-increasing field:

        (e^{t Lap} u0)(0) = (4 pi t)^{-N/2} omega_{N-1}
                            int_0^inf e^{-r^2/4t} u0(r) r^{N-1} dr.

    Radial monotonicity puts the supremum at the origin.  With a closed-form
    profile attached the integral is adaptive quadrature over the full range;
    otherwise the grid is integrated by Simpson's rule and ``TailUnknown`` is
    raised when the part beyond the grid could matter.
    """
    if not t > 0.0:
        raise DomainError(f"semigroup time must be positive, got {t!r}")
    if not u0.nonincreasing:
        raise DomainError("heat_semigroup_sup needs a radially non-increasing field")
    n = u0.n_dim
    pref = (4.0 * math.pi * t) ** (-n / 2.0) * _sphere_area(n)
    gauss_reach = math.sqrt(2760.0 * t)  # e^{-r^2/4t} < 1e-300 beyond this
    if u0.fn is not None:
        upper = max(gauss_reach, float(u0.r_grid[-1]))

        def integrand(r):
            return math.exp(-r * r / (4.0 * t)) * float(u0.fn(r)) * r ** (n - 1.0)

        pts = [p for p in (math.sqrt(2.0 * n * t), float(u0.r_grid[-1]))
               if 0.0 < p < upper]
        val, _ = quad(integrand, 0.0, upper, points=pts or None,
                      limit=400, epsabs=0.0, epsrel=epsrel)
        return pref * val
    r = u0.r_grid
    weights = np.exp(-(r * r) / (4.0 * t)) * u0.values * r ** (n - 1.0)
    from scipy.integrate import simpson

    val = float(simpson(weights, x=r))
    tail_bound = (
        float(u0.values[-1])
        * math.exp(-r[-1] ** 2 / (4.0 * t))
        * max(gauss_reach - r[-1], 0.0)
        * max(r[-1], gauss_reach) ** (n - 1.0)
    )
    if tail_bound > 1e-10 * max(val, 1e-300):
        raise TailUnknown(
            "grid tail is not negligible for this t and the field carries "
            "no closed-form extension"
        )
    return pref * val


# ---------------------------------------------------------------------------
# solver configuration and outcome


_DEFAULT_CEILING = {"power": 1e6, "exp_model": 1e3, "exp_inverse": 1e3,
                    "log_power": 1e3, "custom": 1e6}


@dataclass(frozen=True)
class SolverConfig:
    """Configuration of one evolution run.

    ``boundary`` is "neumann" (homogeneous, outer edge) or "dirichlet" with
    ``boundary_values(t)`` supplying the pinned outer value (typically the
    lifted supersolution).  ``envelope(t)``, when given, is a sup-norm bound
    a global run must stay below (with 5% slack) to earn its verdict.
    ``u_max`` defaults per reaction kind; blow-up is declared at sup > u_max
    or when the reaction-limited step collapses below ``dt_min``.
    """

    n_dim: int
    t_max: float
    r_domain: float
    dr: float
    u_max: float | None = None
    dt_min: float | None = None
    rtol: float = 1e-6
    atol: float = 1e-10
    boundary: str = "neumann"
    boundary_values: Callable | None = None
    envelope: Callable | None = None
    snapshot_times: tuple = ()
    max_steps: int = 4_000_000
    verify_grid: bool = False

    def __post_init__(self):
        if self.n_dim < 1 or int(self.n_dim) != self.n_dim:
            raise ConfigError(f"n_dim must be a positive integer, got {self.n_dim!r}")
        if not (self.t_max > 0 and self.r_domain > 0 and self.dr > 0):
            raise ConfigError("t_max, r_domain, dr must be positive")
        if self.dr > self.r_domain / 8:
            raise ConfigError("dr too coarse for the domain")
        if self.boundary not in ("neumann", "dirichlet"):
            raise ConfigError(f"unknown boundary {self.boundary!r}")
        if self.boundary == "dirichlet" and self.boundary_values is None:
            raise ConfigError("dirichlet boundary needs boundary_values(t)")
        if any(ts < 0 or ts > self.t_max for ts in self.snapshot_times):
            raise ConfigError("snapshot times must lie in [0, t_max]")

    def resolved_u_max(self, f: Nonlinearity) -> float:
        if self.u_max is not None:
            return self.u_max
        return _DEFAULT_CEILING.get(f.kind, 1e6)

    def resolved_dt_min(self) -> float:
        return self.dt_min if self.dt_min is not None else 1e-12 * self.t_max

    def summary(self, f: Nonlinearity) -> dict:
        return {
            "nonlinearity": f.label,
            "n_dim": self.n_dim,
            "t_max": self.t_max,
            "r_domain": self.r_domain,
            "dr": self.dr,
            "u_max": self.resolved_u_max(f),
            "dt_min": self.resolved_dt_min(),
            "rtol": self.rtol,
            "atol": self.atol,
            "boundary": self.boundary,
        }


@dataclass
class EvolutionOutcome:
    """Classification of one run: global / blowup / undecided, with history."""

    verdict: str  # "global" | "blowup" | "undecided"
    t_estimate: float | None = None
    t_reached: float | None = None
    reason: str = ""
    snapshots: list = field(default_factory=list)
    sup_norm_history: np.ndarray | None = None
    dt_stats: dict = field(default_factory=dict)
    config_summary: dict = field(default_factory=dict)
    scan_violation: float | None = None

    @property
    def is_global(self):
        return self.verdict == "global"

    @property
    def is_blowup(self):
        return self.verdict == "blowup"

    def report(self) -> dict:
        rep = {
            "verdict": self.verdict,
            "reason": self.reason,
            "dt_stats": self.dt_stats,
            "config": self.config_summary,
        }
        if self.t_estimate is not None:
            rep["t_estimate"] = self.t_estimate
        if self.t_reached is not None:
            rep["t_reached"] = self.t_reached
        if self.scan_violation is not None:
            rep["scan_violation_time"] = self.scan_violation
        return rep


# ---------------------------------------------------------------------------
# spatial operator


def _radial_operator(n_dim, r, dr):
    """Tridiagonal second-order discretization of u_rr + (N-1)/r u_r with the
    symmetry stencil at the axis; returns (lower, diag, upper) bands."""
    m = r.size
    lower = np.zeros(m)
    diag = np.zeros(m)
    upper = np.zeros(m)
    inv2 = 1.0 / (dr * dr)
    diag[0] = -2.0 * n_dim * inv2
    upper[1] = 2.0 * n_dim * inv2  # band storage: upper[i] multiplies u[i]
    ri = r[1:-1]
    adv = (n_dim - 1.0) / (2.0 * dr * ri)
    lower[0:-2] = inv2 - adv  # lower[i] multiplies u[i] in row i+1
    diag[1:-1] = -2.0 * inv2
    upper[2:] = inv2 + adv
    # outer row: homogeneous Neumann mirror by default (overwritten for
    # dirichlet in the step routine)
    lower[-2] = 2.0 * inv2
    diag[-1] = -2.0 * inv2
    return lower, diag, upper


def _apply_operator(bands, u):
    lower, diag, upper = bands
    out = diag * u
    out[1:] += lower[:-1] * u[:-1]
    out[:-1] += upper[1:] * u[1:]
    return out


def _implicit_solve(bands, coeff, rhs, dirichlet_value):
    """Solve (I - coeff * L) x = rhs, optionally pinning the outer node."""
    lower, diag, upper = bands
    m = diag.size
    ab = np.zeros((3, m))
    ab[0, 1:] = -coeff * upper[1:]
    ab[1] = 1.0 - coeff * diag
    ab[2, :-1] = -coeff * lower[:-1]
    b = rhs.copy()
    if dirichlet_value is not None:
        ab[0, -1] = 0.0
        ab[1, -1] = 1.0
        ab[2, -2] = 0.0
        b[-1] = dirichlet_value
    return solve_banded((1, 1), ab, b)


# ---------------------------------------------------------------------------
# evolution


def evolve(f: Nonlinearity, u0: RadialField, cfg: SolverConfig) -> EvolutionOutcome:
    """Evolve radial data under u_t = Lap(u) + f(u) and classify the run.

    Time stepping is a two-stage implicit/explicit predictor-corrector
    (backward-Euler/Crank-Nicolson diffusion, explicit reaction), second
    order.  Each accepted step is computed once at dt and once as two half
    steps; their Richardson difference both drives the adaptive controller
    (local third-order target) and corrects the accepted state.  The step is
    additionally capped by the reaction scale: dt <= 0.5 / max f'(u) and
    dt <= 0.2 max(u)/max f(u).  Those caps are what make the step collapse
    at a blow-up, turning ``dt_min`` into a meaningful detector alongside
    the sup ceiling.

    With ``cfg.verify_grid`` the run is repeated at dr/2 and a verdict flip
    raises ``GridTooCoarse``.
    """
    if u0.n_dim != cfg.n_dim:
        raise ConfigError("field and config dimensions disagree")
    outcome = _evolve_once(f, u0, cfg)
    if cfg.verify_grid:
        finer = replace(cfg, dr=cfg.dr / 2.0, verify_grid=False)
        check = _evolve_once(f, u0, finer)
        if check.verdict != outcome.verdict:
            raise GridTooCoarse(
                f"verdict changed from {outcome.verdict!r} to {check.verdict!r} "
                f"under dr -> dr/2"
            )
    return outcome


def _evolve_once(f, u0, cfg):
    n = cfg.n_dim
    m = int(round(cfg.r_domain / cfg.dr))
    r = np.linspace(0.0, cfg.r_domain, m + 1)
    dr = r[1] - r[0]
    if u0.fn is not None:
        u = np.asarray(u0.fn(r), dtype=float).copy()
    else:
        u = np.interp(r, u0.r_grid, u0.values)
    bands = _radial_operator(n, r, dr)
    u_max = cfg.resolved_u_max(f)
    dt_min = cfg.resolved_dt_min()

    t = 0.0
    sup_hist = [(0.0, float(np.max(u)))]
    snapshots = []
    snap_left = sorted(set(cfg.snapshot_times))
    if snap_left and snap_left[0] == 0.0:
        snapshots.append(RadialField(n, r.copy(), u.copy(), 0.0,
                                     nonincreasing=None, label="t=0"))
        snap_left = snap_left[1:]

    clamp_count = 0
    n_steps = 0
    n_rejects = 0
    dt_smallest = math.inf
    dt_largest = 0.0

    def reaction_cap(u_now):
        fmax = float(np.max(f.f(u_now)))
        f1max = float(np.max(f.f1(u_now)))
        cap = math.inf
        if f1max > 0.0:
            cap = 0.5 / f1max
        if fmax > 0.0:
            scale = max(float(np.max(u_now)), 100.0 * cfg.atol)
            cap = min(cap, 0.2 * scale / fmax)
        return cap

    def pc_step(u_now, t_now, dt_now):
        """One IMEX predictor/corrector step; None when overflow rejects it."""
        g_new = (
            float(cfg.boundary_values(t_now + dt_now))
            if cfg.boundary == "dirichlet"
            else None
        )
        with np.errstate(over="ignore", invalid="ignore"):
            fu = f.f(u_now)
        if cfg.boundary == "dirichlet":
            fu = fu.copy()
            fu[-1] = 0.0
        if not np.all(np.isfinite(fu)):
            return None
        # predictor: backward-Euler diffusion, explicit reaction
        pred = _implicit_solve(bands, dt_now, u_now + dt_now * fu, g_new)
        with np.errstate(over="ignore", invalid="ignore"):
            f_pred = f.f(np.maximum(pred, 0.0))
        if cfg.boundary == "dirichlet":
            f_pred = f_pred.copy()
            f_pred[-1] = 0.0
        if not np.all(np.isfinite(f_pred)):
            return None
        # corrector: trapezoidal diffusion and reaction
        lu = _apply_operator(bands, u_now)
        if cfg.boundary == "dirichlet":
            lu = lu.copy()
            lu[-1] = 0.0
        rhs = u_now + 0.5 * dt_now * (lu + fu + f_pred)
        return _implicit_solve(bands, 0.5 * dt_now, rhs, g_new)

    dt = min(dr * dr, 1e-4 * cfg.t_max, reaction_cap(u))
    verdict = None
    reason = ""
    t_estimate = None

    env_check_times = (
        np.linspace(0.0, cfg.t_max, 101)[1:] if cfg.envelope is not None else None
    )
    env_idx = 0

    while t < cfg.t_max - 1e-14 * cfg.t_max:
        if n_steps + n_rejects > cfg.max_steps:
            verdict, reason = "undecided", "step budget exhausted"
            break
        next_stop = cfg.t_max if not snap_left else min(snap_left[0], cfg.t_max)
        dt = min(dt, reaction_cap(u), next_stop - t)
        if dt < dt_min:
            lu = _apply_operator(bands, u)
            reaction_dominated = float(np.max(f.f(u))) >= float(np.max(np.abs(lu)))
            if reaction_dominated:
                verdict, reason = "blowup", "reaction-limited step collapse"
                t_estimate = t
            else:
                verdict, reason = "undecided", "step collapse without reaction dominance"
            break

        # Richardson pair: one full step against two half steps
        full = pc_step(u, t, dt)
        half = pc_step(u, t, 0.5 * dt) if full is not None else None
        half2 = pc_step(half, t + 0.5 * dt, 0.5 * dt) if half is not None else None
        if half2 is None or not np.all(np.isfinite(half2)):
            dt *= 0.25
            n_rejects += 1
            continue
        diff = half2 - full
        err = float(
            np.max(np.abs(diff) / (cfg.atol + cfg.rtol * np.maximum(np.abs(half2), 1e-300)))
        ) / 3.0
        if not math.isfinite(err) or err > 1.0:
            dt *= max(0.1, 0.6 * err ** (-1.0 / 3.0) if math.isfinite(err) else 0.1)
            n_rejects += 1
            continue

        t += dt
        new = half2 + diff / 3.0  # local extrapolation of the order-2 pair
        neg = new < 0.0
        if np.any(neg):
            worst = float(np.min(new))
            if worst < -1e-10 * max(1.0, float(np.max(new))):
                clamp_count += int(np.count_nonzero(neg))
            new = np.maximum(new, 0.0)
        u = new
        n_steps += 1
        dt_smallest = min(dt_smallest, dt)
        dt_largest = max(dt_largest, dt)
        sup_now = float(np.max(u))
        sup_hist.append((t, sup_now))

        if sup_now > u_max:
            verdict, reason = "blowup", "sup norm exceeded the ceiling"
            t_estimate = t
            break
        if env_check_times is not None:
            while env_idx < env_check_times.size and t >= env_check_times[env_idx]:
                bound = float(cfg.envelope(env_check_times[env_idx]))
                if sup_now > 1.05 * bound:
                    verdict, reason = (
                        "undecided",
                        f"escaped the comparison envelope at t = {t:.6g}",
                    )
                env_idx += 1
            if verdict is not None:
                break
        if snap_left and t >= snap_left[0] - 1e-12:
            snapshots.append(
                RadialField(n, r.copy(), u.copy(), t, nonincreasing=None,
                            label=f"t={snap_left[0]:g}")
            )
            snap_left = snap_left[1:]
        dt = dt * min(4.0, max(0.25, 0.8 * err ** (-1.0 / 3.0) if err > 0 else 4.0))

    if verdict is None:
        verdict = "global"
        reason = "reached t_max" + (
            " below the comparison envelope" if cfg.envelope is not None else ""
        )
    return EvolutionOutcome(
        verdict=verdict,
        t_estimate=t_estimate,
        t_reached=t if verdict == "global" else None,
        reason=reason,
        snapshots=snapshots,
        sup_norm_history=np.array(sup_hist),
        dt_stats={
            "n_steps": n_steps,
            "n_rejects": n_rejects,
            "dt_min_seen": dt_smallest if math.isfinite(dt_smallest) else None,
            "dt_max_seen": dt_largest,
            "clamped_negative_nodes": clamp_count,
        },
        config_summary=cfg.summary(f),
    )


# ---------------------------------------------------------------------------
# the semigroup lifetime certificate


def necessary_condition_scan(
    f: Nonlinearity,
    u0: RadialField,
    t_grid,
    _quadrature_nodes: int = 24,
) -> float | None:
    """First t in ``t_grid`` with F(sup e^{t Lap} u0) < t, or None.

    A global solution forces F(sup e^{t Lap} u0) >= t for every t (the
    semigroup subsolution argument), so a violation certifies that no global
    solution exists — blow-up no later than the violation time.  The
    comparison runs on log F, so it stays meaningful when F overflows.

    The semigroup values are computed with a fixed composite Gauss-Legendre
    rule sharing one evaluation of u0 across all times (validated against
    the adaptive route in the test suite).
    """
    t_grid = np.asarray(sorted(t_grid), dtype=float)
    if np.any(t_grid <= 0.0):
        raise DomainError("scan times must be positive")
    if not u0.nonincreasing:
        raise DomainError("necessary_condition_scan needs non-increasing data")
    n = u0.n_dim
    t_min, t_max = float(t_grid[0]), float(t_grid[-1])
    reach = math.sqrt(2760.0 * t_max)
    upper = max(reach, float(u0.r_grid[-1]))
    inner = min(math.sqrt(4.0 * t_min) * 1e-2, 1e-2)
    edges = np.concatenate(([0.0], np.geomspace(inner, upper, 90)))
    from numpy.polynomial.legendre import leggauss

    x, w = leggauss(_quadrature_nodes)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    if u0.fn is not None:
        uvals = np.asarray(u0.fn(nodes), dtype=float)
    else:
        uvals = np.interp(nodes, u0.r_grid, u0.values, right=float(u0.values[-1]))
        tail_extent = max(upper - float(u0.r_grid[-1]), 0.0)
        if float(u0.values[-1]) * tail_extent > 1e-10:
            raise TailUnknown("scan needs a closed-form tail for this data")
    base = weights * uvals * nodes ** (n - 1.0)
    area = _sphere_area(n)
    for t in t_grid:
        kernel = np.exp(-(nodes * nodes) / (4.0 * t))
        sup_val = (4.0 * math.pi * t) ** (-n / 2.0) * area * float(base @ kernel)
        if sup_val <= 0.0:
            continue
        if eval_logF(f, sup_val) < math.log(t):
            return float(t)
    return None


# ---------------------------------------------------------------------------
# sandwich verification


def verify_sandwich(
    run: EvolutionOutcome,
    w_lower: LiftedSolution,
    w_upper: LiftedSolution,
    tol: float,
    n_samples: int = 100,
) -> dict:
    """Check an evolved global run against its comparison solutions.

    For each stored snapshot and sampled radius x (with y = x/sqrt(t+1)):

        |y|^2 / F(W_*(y))  <=  |x|^2 / F(u(x,t))  <=  |y|^2 / F(W^*(y)),

    up to relative slack ``tol``.  Equivalently the run must stay between the
    lifted subsolution and supersolution; the check is done on log F so huge
    transforms are harmless.  Returns worst-case margins (in log terms,
    nonnegative means satisfied) or raises ``SandwichViolated``.
    """
    if not run.is_global:
        raise DomainError("verify_sandwich applies to global runs")
    if not run.snapshots:
        raise DomainError("run carries no snapshots")
    if w_lower.f is not w_upper.f:
        raise DomainError("comparison solutions must share the reaction term")
    f = w_lower.f
    slack = math.log1p(tol)
    margin_low = math.inf
    margin_up = math.inf
    worst_low = worst_up = None
    checked = 0
    for snap in run.snapshots:
        t = snap.time
        scale = math.sqrt(t + 1.0)
        r_cap = min(w_lower.profile.r_end, w_upper.profile.r_end) * scale
        xs_all = snap.r_grid
        mask = (xs_all > 0.0) & (xs_all <= min(0.95 * xs_all[-1], r_cap))
        idx = np.nonzero(mask)[0]
        if idx.size > n_samples:
            idx = idx[np.linspace(0, idx.size - 1, n_samples).astype(int)]
        for i in idx:
            x = float(xs_all[i])
            uval = float(snap.values[i])
            if uval < 10.0 * f.domain_floor:
                continue
            y = x / scale
            log_ratio_mid = 2.0 * math.log(x) - eval_logF(f, uval)
            log_ratio_low = 2.0 * math.log(y) - float(
                w_lower.g.analytic_logF(w_lower.profile.v_at(y))
            )
            log_ratio_up = 2.0 * math.log(y) - float(
                w_upper.g.analytic_logF(w_upper.profile.v_at(y))
            )
            m_low = log_ratio_mid - log_ratio_low
            m_up = log_ratio_up - log_ratio_mid
            checked += 1
            if m_low < margin_low:
                margin_low, worst_low = m_low, (x, t)
            if m_up < margin_up:
                margin_up, worst_up = m_up, (x, t)
    report = {
        "n_checked": checked,
        "margin_lower_log": margin_low,
        "margin_upper_log": margin_up,
        "worst_lower_at": worst_low,
        "worst_upper_at": worst_up,
        "tol": tol,
    }
    if margin_low < -slack or margin_up < -slack:
        raise SandwichViolated(
            f"sandwich failed: lower margin {margin_low:.3e} at {worst_low}, "
            f"upper margin {margin_up:.3e} at {worst_up}"
        )
    return report


def snapshots_to_csv(run: EvolutionOutcome, path) -> None:
    """Write the stored snapshots as rows of (t, r, u)."""
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "r", "u"])
        for snap in run.snapshots:
            for rr, uu in zip(snap.r_grid, snap.values):
                writer.writerow([repr(float(snap.time)), repr(float(rr)), repr(float(uu))])
