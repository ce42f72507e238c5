"""Radial profile ODEs generating forward self-similar solutions.

For the model reaction terms the similarity ansatz reduces the heat flow to a
radial second-order problem

    v'' + (N-1)/r v' + (r/2) v' + h(v) = 0,    v'(0) = 0,  v(0) = alpha,

with source h(v) = v/(p-1) + v^p for the power model and h(v) = 1 + e^v for
the exponential model.  Solutions decay like r^{-2/(p-1)} (power) resp.
-2 log r (exponential); the scaled far-field limits

    ell_p(alpha)   = lim r^{2/(p-1)} v(r)
    ell_exp(alpha) = lim (2 log r + v(r))

measure how much spatial decay of initial data the corresponding lifted
comparison solution can dominate.  The key structural facts used downstream:
for p > 1 + 2/N there is a threshold alpha_* below which profiles stay
positive with ell > 0, ell is increasing in alpha and vanishes as alpha -> 0,
and profiles obey uniform decay bounds.

The coordinate singularity at r = 0 is handled by starting the integrator at
r0 = 1e-4 from the second-order series v ~ alpha - h(alpha) r^2 / (2N).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy.integrate import solve_ivp

from .errors import BracketFailure, DomainError, NotConverged, StepFailure, UnboundedSupremum
from .nonlinearity import Nonlinearity, exp_model, power

__all__ = [
    "ProfileModel",
    "SelfSimilarProfile",
    "AlphaStarResult",
    "solve_profile",
    "solve_profile_auto",
    "estimate_ell",
    "find_alpha_star",
    "uniform_decay_check",
    "profile_to_csv",
]

_SERIES_R0 = 1e-4
_POSITIVITY_FLOOR = 10.0 * np.finfo(float).eps


@dataclass(frozen=True)
class ProfileModel:
    """Which model profile equation to solve, and in which dimension.

    kind "power" uses h(v) = v/(p-1) + v^p (needs p > 1; the threshold
    results additionally need p > 1 + 2/N, which solvers check where they
    rely on it); kind "exp" uses h(v) = 1 + e^v.
    """

    kind: str  # "power" | "exp"
    n_dim: int
    p: float | None = None

    def __post_init__(self):
        if self.kind not in ("power", "exp"):
            raise DomainError(f"unknown profile kind {self.kind!r}")
        if self.n_dim < 1 or int(self.n_dim) != self.n_dim:
            raise DomainError(f"n_dim must be a positive integer, got {self.n_dim!r}")
        if self.kind == "power":
            if self.p is None or self.p <= 1.0:
                raise DomainError(f"power profile needs p > 1, got {self.p!r}")

    def source(self, v):
        """The zeroth-order term h(v) of the profile equation."""
        if self.kind == "power":
            p = self.p
            # odd continuation below zero keeps RK stages finite for
            # fractional p; integration stops at the first sign change anyway
            return v / (p - 1.0) + np.sign(v) * np.abs(v) ** p
        return 1.0 + np.exp(np.minimum(v, 700.0))

    def comparison_nonlinearity(self) -> Nonlinearity:
        """The reaction term g whose self-similar profiles these are."""
        return power(self.p) if self.kind == "power" else exp_model()

    @property
    def q_param(self) -> float:
        """g'G of the comparison term: p/(p-1) for power, 1 for exponential."""
        return self.p / (self.p - 1.0) if self.kind == "power" else 1.0

    @property
    def decay_exponent(self) -> float:
        if self.kind != "power":
            raise DomainError("decay_exponent only defined for power profiles")
        return 2.0 / (self.p - 1.0)

    def label(self) -> str:
        if self.kind == "power":
            return f"power(p={self.p:g}, N={self.n_dim})"
        return f"exp(N={self.n_dim})"


@dataclass
class SelfSimilarProfile:
    """A solved radial profile with its far-field diagnostics.

    ``ell`` stays None until ``estimate_ell`` extracts the scaled limit.
    ``r_grid`` always starts at 0 (value alpha, slope 0); when a power
    profile crosses zero the grid stops at the crossing and
    ``positive_on_grid`` is False.
    """

    model: ProfileModel
    alpha: float
    r_grid: np.ndarray
    v: np.ndarray
    dv: np.ndarray
    positive_on_grid: bool
    tol: float
    ell: float | None = None
    _dense: object = field(default=None, repr=False)

    @property
    def r_end(self) -> float:
        return float(self.r_grid[-1])

    def _eval(self, r, component):
        r = np.asarray(r, dtype=float)
        if np.any(r < 0.0) or np.any(r > self.r_end * (1 + 1e-12)):
            raise DomainError(f"radius outside [0, {self.r_end:g}]")
        scalar = r.ndim == 0
        r = np.atleast_1d(r)
        out = np.empty_like(r)
        small = r < _SERIES_R0
        if np.any(~small):
            out[~small] = self._dense(np.minimum(r[~small], self.r_end))[component]
        if np.any(small):
            h0 = self.model.source(self.alpha)
            n = self.model.n_dim
            rs = r[small]
            if component == 0:
                out[small] = self.alpha - h0 * rs**2 / (2.0 * n)
            else:
                out[small] = -h0 * rs / n
        return float(out[0]) if scalar else out

    def v_at(self, r):
        """Profile value at arbitrary radius (dense-output interpolation)."""
        return self._eval(r, 0)

    def dv_at(self, r):
        """Profile slope at arbitrary radius."""
        return self._eval(r, 1)

    def tracked(self, r=None):
        """The scaled quantity whose limit is ell: r^{2/(p-1)} v  or  2 log r + v."""
        if r is None:
            r, v = self.r_grid, self.v
        else:
            r = np.asarray(r, dtype=float)
            v = self.v_at(r)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.model.kind == "power":
                return r ** self.model.decay_exponent * v
            return 2.0 * np.log(r) + v


def solve_profile(
    model: ProfileModel,
    alpha: float,
    r_max: float = 50.0,
    tol: float = 1e-10,
    n_grid: int = 1200,
) -> SelfSimilarProfile:
    """Integrate the radial profile equation out to ``r_max``.

    Starts at r0 = 1e-4 with the second-order series around the origin (the
    (N-1)/r term is singular there), then runs an adaptive high-order
    Runge-Kutta scheme with local tolerance ``tol``.  For power profiles the
    integration terminates at the first sign change of v.
    """
    if model.kind == "power" and not alpha > 0.0:
        raise DomainError(f"power profile needs alpha > 0, got {alpha!r}")
    n = model.n_dim
    h0 = float(model.source(alpha))
    r0 = _SERIES_R0
    y0 = [alpha - h0 * r0**2 / (2.0 * n), -h0 * r0 / n]

    def rhs(r, y):
        v, w = y
        return [w, -((n - 1.0) / r + 0.5 * r) * w - float(model.source(v))]

    events = None
    if model.kind == "power":
        def crossing(r, y):
            return y[0] - _POSITIVITY_FLOOR
        crossing.terminal = True
        crossing.direction = -1.0
        events = [crossing]

    r_eval = np.geomspace(r0, r_max, n_grid)
    sol = solve_ivp(
        rhs,
        (r0, r_max),
        y0,
        method="DOP853",
        t_eval=r_eval,
        events=events,
        dense_output=True,
        rtol=tol,
        atol=tol * 1e-2,
    )
    if sol.status == -1:
        raise StepFailure(
            f"profile integration failed at r = {sol.t[-1] if sol.t.size else r0:g}: "
            f"{sol.message}"
        )
    r = sol.t
    v, dv = sol.y
    if sol.status == 1 and sol.t_events[0].size:  # stopped at a sign change
        r_cross = sol.t_events[0][0]
        v_cross, dv_cross = sol.y_events[0][0]
        r = np.append(r, r_cross)
        v = np.append(v, v_cross)
        dv = np.append(dv, dv_cross)
    r_grid = np.concatenate(([0.0], r))
    v_grid = np.concatenate(([alpha], v))
    dv_grid = np.concatenate(([0.0], dv))
    positive = bool(np.all(v_grid > _POSITIVITY_FLOOR)) and sol.status != 1
    return SelfSimilarProfile(
        model=model,
        alpha=alpha,
        r_grid=r_grid,
        v=v_grid,
        dv=dv_grid,
        positive_on_grid=positive,
        tol=tol,
        _dense=sol.sol,
    )


def estimate_ell(profile: SelfSimilarProfile, fit_tol: float = 1e-4) -> float:
    """Far-field limit of the tracked quantity, by fitting its known
    correction order a + b r^-2 over the last decade of the grid.

    Raises ``NotConverged`` when the fit does not describe the tail (the
    caller should extend r_max) or, for power profiles, when the profile
    failed positivity.  On success stores the limit on ``profile.ell``.
    """
    model = profile.model
    if model.kind == "power" and not profile.positive_on_grid:
        raise NotConverged("profile lost positivity; no decaying branch to fit")
    r_end = profile.r_end
    mask = (profile.r_grid >= r_end / 10.0) & (profile.r_grid >= 1.0)
    if np.count_nonzero(mask) < 12:
        raise NotConverged("too few grid points in the fit window; extend r_max")
    r = profile.r_grid[mask]
    z = profile.tracked()[mask]
    basis = np.column_stack([np.ones_like(r), r**-2.0])
    coef, *_ = np.linalg.lstsq(basis, z, rcond=None)
    a, b = float(coef[0]), float(coef[1])
    resid = float(np.max(np.abs(z - basis @ coef)))
    scale = max(abs(a), 1e-12)
    if resid > fit_tol * scale:
        raise NotConverged(
            f"tail fit residual {resid:.3g} exceeds {fit_tol:.1g} * |ell|; "
            f"r_max = {r_end:g} is too short"
        )
    # the correction itself must be subdominant in the window, else the
    # "limit" is an extrapolation artifact
    if abs(b) * r[0] ** -2.0 > 0.5 * scale:
        raise NotConverged("r^-2 correction still dominates; extend r_max")
    profile.ell = a
    return a


def solve_profile_auto(
    model: ProfileModel,
    alpha: float,
    tol: float = 1e-10,
    r_max: float = 50.0,
    r_cap: float = 400.0,
    fit_tol: float = 1e-4,
) -> SelfSimilarProfile:
    """solve_profile + estimate_ell, extending r_max geometrically on
    NotConverged up to ``r_cap``."""
    last_err = None
    r = r_max
    while r <= r_cap * (1 + 1e-9):
        prof = solve_profile(model, alpha, r_max=r, tol=tol)
        try:
            estimate_ell(prof, fit_tol=fit_tol)
            return prof
        except NotConverged as err:
            last_err = err
            if model.kind == "power" and not prof.positive_on_grid:
                return prof  # no amount of range helps; caller sees ell=None
            r *= 2.0
    raise last_err


@dataclass(frozen=True)
class AlphaStarResult:
    """Bracket for the positivity threshold alpha_*, or evidence it exceeds
    the search cap."""

    alpha_ok: float | None
    alpha_fail: float | None
    unbounded: bool
    n_solves: int

    @property
    def bracket(self):
        return (self.alpha_ok, self.alpha_fail)


def find_alpha_star(
    model: ProfileModel,
    alpha_max: float,
    tol: float = 1e-3,
    solver_tol: float = 1e-10,
) -> AlphaStarResult:
    """Bisect for the largest amplitude with a positive, decaying profile.

    The predicate is "profile positive on the grid and far-field limit
    extractable with ell > 0".  Returns an ``AlphaStarResult``: either a
    bracket [alpha_ok, alpha_fail] of relative width <= tol, or unbounded
    when positivity persists all the way up to ``alpha_max`` (reported
    honestly; finiteness of the threshold is not assumed).
    """
    if model.kind != "power":
        raise DomainError("the positivity threshold applies to power profiles")
    if model.p <= 1.0 + 2.0 / model.n_dim:
        raise DomainError(
            f"threshold search needs p > 1 + 2/N = {1 + 2 / model.n_dim:g}, "
            f"got p = {model.p:g}"
        )
    n_solves = 0

    def good(alpha):
        nonlocal n_solves
        n_solves += 1
        try:
            prof = solve_profile_auto(model, alpha, tol=solver_tol)
        except (NotConverged, StepFailure):
            return False
        return prof.positive_on_grid and prof.ell is not None and prof.ell > 0.0

    if good(alpha_max):
        return AlphaStarResult(alpha_max, None, True, n_solves)
    hi = alpha_max
    lo = alpha_max
    for _ in range(60):
        lo *= 0.5
        if good(lo):
            break
        hi = lo
    else:
        raise BracketFailure("no positive profile found down to alpha_max * 2^-60")
    while hi - lo > tol * lo:
        mid = 0.5 * (lo + hi)
        if good(mid):
            lo = mid
        else:
            hi = mid
    return AlphaStarResult(lo, hi, False, n_solves)


def uniform_decay_check(
    model: ProfileModel,
    alphas: Iterable[float],
    alpha0: float,
    r_max: float = 50.0,
    solver_tol: float = 1e-10,
    check_growth: bool = True,
) -> float:
    """Empirical constant of the uniform decay bound over a family of
    amplitudes below alpha0.

    Power model:        C = max_alpha  sup_r (1+r)^{2/(p-1)} v(r) / alpha
    Exponential model:  C = max_alpha  sup_r (2 log(1+r) + v(r)) - alpha

    A finite, refinement-stable C is the pass condition; if the supremum
    grows by more than 10% when r_max doubles, ``UnboundedSupremum`` is
    raised instead of returning a misleading number.
    """
    alphas = list(alphas)
    if model.kind == "power" and any(a >= alpha0 for a in alphas):
        raise DomainError("all amplitudes must lie below alpha0")
    if model.kind == "exp" and any(a >= alpha0 for a in alphas):
        raise DomainError("all amplitudes must lie below alpha0")

    def one(r_stop):
        worst = -math.inf
        for a in alphas:
            prof = solve_profile(model, a, r_max=r_stop, tol=solver_tol)
            r, v = prof.r_grid, prof.v
            if model.kind == "power":
                val = float(np.max((1.0 + r) ** model.decay_exponent * v)) / a
            else:
                val = float(np.max(2.0 * np.log1p(r) + v)) - a
            worst = max(worst, val)
        return worst

    c_val = one(r_max)
    if check_growth:
        c2 = one(2.0 * r_max)
        if c2 > c_val * 1.10 + 1e-12:
            raise UnboundedSupremum(
                f"decay constant grew from {c_val:.6g} to {c2:.6g} under range doubling"
            )
        c_val = max(c_val, c2)
    return c_val


def profile_to_csv(profile: SelfSimilarProfile, path) -> None:
    """Write r, v, v', and the tracked asymptotic quantity; the header
    comment carries the model, amplitude, and solver tolerance."""
    with open(path, "w", newline="") as fh:
        fh.write(
            f"# model={profile.model.label()} alpha={profile.alpha!r} "
            f"tol={profile.tol!r} ell={profile.ell!r}\n"
        )
        writer = csv.writer(fh)
        writer.writerow(["r", "v", "dv", "tracked"])
        tracked = profile.tracked()
        for i in range(profile.r_grid.size):
            writer.writerow(
                [
                    repr(float(profile.r_grid[i])),
                    repr(float(profile.v[i])),
                    repr(float(profile.dv[i])),
                    repr(float(tracked[i])),
                ]
            )
