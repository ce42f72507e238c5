"""The quasi self-similar transformation and the comparison solutions it builds.

General superlinear reaction terms admit no exact scaling invariance, but the
lifetime transform provides a substitute.  With F the transform of f and G the
transform of a model term g (a pure power or exponential), a radial model
profile v is lifted to a spacetime function of the full equation by

    w(r)    = F^{-1}[ G(v(r)) ]
    u(x, t) = F^{-1}[ (t+1) G(v(|x|/sqrt(t+1))) ]     (= F^{-1}[(t+1) F(w)]).

The three residual forms (in u, in w, in v) agree identically; when v solves
the model profile equation the lift satisfies the heat equation up to the
defect term  |grad u|^2 / (f F) * [g'G - f'F](u),  whose sign is controlled by
pinching f'F between constants q_* <= q <= q^* on a small-amplitude interval
(0, s_*].  Choosing the model exponent from q^* yields a supersolution, from
q_* (or the exponential model when q = 1) a subsolution; together they
sandwich the true solution grown from the canonical initial data.

The amplitude map of the quasi-scaling, u -> F^{-1}[lambda^-2 F(u)], and the
map phi(s) = F^{-1}[G(s)] used by the nonexistence argument live here too.

All sign checks are done by finite differences of the lifted function itself,
never through the chain-rule identity being verified, so the construction and
its check stay independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, OutOfGrid, SingularPoint, SmallnessViolated
from .nonlinearity import (
    Nonlinearity,
    estimate_q,
    eval_Finv_log,
    eval_logF,
    exp_model,
    power,
)
from .profile_ode import ProfileModel, SelfSimilarProfile, solve_profile_auto

__all__ = [
    "LiftedSolution",
    "SuperSubConfig",
    "default_config",
    "scan_fprimeF_threshold",
    "w_from_v",
    "lift",
    "quasi_scale",
    "residual_triple",
    "selfsimilar_residual",
    "build_supersolution",
    "build_subsolution",
    "phi_transform",
    "pde_residual",
]

_Q_EQUAL_TOL = 1e-9


# ---------------------------------------------------------------------------
# elementary maps


def w_from_v(f: Nonlinearity, g: Nonlinearity, v_val: float) -> float:
    """Transplant a model-profile value onto the f-scale: F^{-1}[G(v)]."""
    return eval_Finv_log(f, eval_logF(g, v_val))


def quasi_scale(f: Nonlinearity, u_val: float, lam: float) -> float:
    """Amplitude part of the quasi-scaling: F^{-1}[lambda^-2 F(u)].

    The caller owns the argument rescaling (x, t) -> (lambda x, lambda^2 t);
    for a pure power term this map reduces to u -> lambda^{2/(p-1)} u.
    """
    if not lam > 0.0:
        raise DomainError(f"scaling factor must be positive, got {lam!r}")
    return eval_Finv_log(f, eval_logF(f, u_val) - 2.0 * math.log(lam))


def phi_transform(f: Nonlinearity, g: Nonlinearity, s: float):
    """The comparison map phi(s) = F^{-1}[G(s)] with its diagnostics.

    Returns (phi, phi', indicator) where phi' = f(phi)/g(s) > 0 and the
    indicator f'(phi)F(phi) - g'(s)G(s) is the quantity whose sign makes phi
    convex; convexity is what lets Jensen's inequality pass phi through the
    heat semigroup in the nonexistence argument.
    """
    log_G = eval_logF(g, s)
    phi = eval_Finv_log(f, log_G)
    dphi = math.exp(f.log_f(phi) - g.log_f(s))
    fF = f.dlog_f(phi) * math.exp(f.log_f(phi) + eval_logF(f, phi))
    gG = g.dlog_f(s) * math.exp(g.log_f(s) + log_G)
    return phi, dphi, fF - gG


# ---------------------------------------------------------------------------
# lifted comparison solutions


@dataclass
class LiftedSolution:
    """A model profile lifted onto the f-scale as a spacetime function.

    ``g`` is the model reaction term the profile solves (pure power with
    exponent ``p_star`` or the exponential model), ``q_param`` its constant
    g'G.  ``role`` records whether the lift was built as a supersolution,
    subsolution, or exact solution.  Residual bounds over the verification
    grid are attached by the builders.
    """

    f: Nonlinearity
    g: Nonlinearity
    profile: SelfSimilarProfile
    q_param: float
    role: str = "exact"
    p_star: float | None = None
    amplitude: float | None = None  # alpha (super) or beta (sub)
    s_star: float | None = None
    residual_min: float | None = None
    residual_max: float | None = None
    residual_grid: dict | None = None
    gamma_star: float | None = None  # largest canonical amplitude dominated at t=0
    gamma_min: float | None = None  # smallest canonical amplitude dominating it

    def log_G_of_v(self, r):
        """log G(v(r)) along the profile; G is closed-form for model terms."""
        v = self.profile.v_at(r)
        if np.ndim(v) == 0:
            return self.g.analytic_logF(v)
        return np.array([self.g.analytic_logF(float(x)) for x in np.atleast_1d(v)])

    def value(self, x_radius: float, t: float = 0.0, s_hint: float | None = None) -> float:
        """Evaluate the lift u(x, t) = F^{-1}[(t+1) G(v(|x|/sqrt(t+1)))]."""
        if t <= -1.0:
            raise DomainError("the lift exists for t > -1")
        r = x_radius / math.sqrt(t + 1.0)
        if r > self.profile.r_end * (1.0 + 1e-12):
            raise OutOfGrid(
                f"|x|/sqrt(t+1) = {r:g} exceeds the solved profile range "
                f"{self.profile.r_end:g}"
            )
        log_sigma = math.log(t + 1.0) + self.log_G_of_v(r)
        return eval_Finv_log(self.f, log_sigma, s_hint=s_hint)

    def initial(self, x_radius):
        """The t = 0 slice (the profile transplanted through phi)."""
        if np.ndim(x_radius) == 0:
            return self.value(float(x_radius), 0.0)
        out = np.empty(len(x_radius))
        hint = None
        for i, xr in enumerate(x_radius):
            out[i] = self.value(float(xr), 0.0, s_hint=hint)
            hint = out[i]
        return out

    def sup_value(self) -> float:
        """Supremum of the lift over all space and time (attained at the
        spacetime origin, because (t+1) G(v) is minimal there)."""
        return self.value(0.0, 0.0)

    def sup_envelope(self, t: float) -> float:
        """Supremum over space at fixed time, attained on the axis."""
        return self.value(0.0, t)

    def report(self) -> dict:
        """Machine-readable construction summary."""
        key = "q_upper" if self.role == "supersolution" else "q_lower"
        amp_key = "alpha" if self.role != "subsolution" else "beta"
        return {
            "role": self.role,
            "f": self.f.label,
            "g": self.g.label,
            "q_param": self.q_param,
            key: self.q_param,
            "p_star": self.p_star,
            amp_key: self.amplitude,
            "s_star": self.s_star,
            "residual_min": self.residual_min,
            "residual_max": self.residual_max,
            "grid": self.residual_grid,
            "gamma_star": self.gamma_star,
            "gamma_min": self.gamma_min,
        }


def lift(ls: LiftedSolution, x_radius: float, t: float) -> float:
    """Evaluate a lifted solution at radius |x| and time t."""
    return ls.value(x_radius, t)


# ---------------------------------------------------------------------------
# finite-difference residuals


def _d1(fn, x, h):
    return (fn(x + h) - fn(x - h)) / (2.0 * h)


def _d2(fn, x, h):
    return (fn(x + h) - 2.0 * fn(x) + fn(x - h)) / (h * h)


def pde_residual(u_fn: Callable[[float, float], float], f: Nonlinearity,
                 x_radius: float, t: float, n_dim: int,
                 hx: float, ht: float) -> float:
    """Central-difference evaluation of  u_t - Lap(u) - f(u)  for a radial
    spacetime function.  Negative values certify failure of the supersolution
    inequality, positive values failure of the subsolution inequality (up to
    the O(h^2) discretization of the derivatives)."""
    u0 = u_fn(x_radius, t)
    ut = (u_fn(x_radius, t + ht) - u_fn(x_radius, t - ht)) / (2.0 * ht)
    if x_radius < hx:  # symmetry stencil through the axis
        lap = 2.0 * n_dim * (u_fn(hx, t) - u_fn(0.0, t)) / (hx * hx)
    else:
        up = u_fn(x_radius + hx, t)
        um = u_fn(x_radius - hx, t)
        lap = (up - 2.0 * u0 + um) / (hx * hx) + (n_dim - 1.0) / x_radius * (
            up - um
        ) / (2.0 * hx)
    return ut - lap - float(f.f(u0))


def residual_triple(
    f: Nonlinearity,
    g: Nonlinearity,
    v_fn: Callable[[float], float],
    r: float,
    t: float,
    h: float,
    n_dim: int = 3,
):
    """The three equivalent residual forms of the lift, each by central
    differences.

    Given any smooth radial v > 0, set w = F^{-1}[G(v)] and
    u = F^{-1}[(t+1) G(v(|x|/sqrt(t+1)))].  Then the u-form

        (1/f(u)) [u_t - Lap(u) - f(u) + (f'(u)/f(u)) |grad u|^2]

    equals the w-form and the v-form

        (1/g(v)) [-v'' - (N-1)/r v' - (r/2) v' - g(v) - g(v)G(v)
                  + (g'(v)/g(v)) (v')^2]

    identically; discretization leaves O(h^2) gaps, which is exactly what the
    identity checks measure.  The u-form is evaluated at |x| = r sqrt(t+1) so
    all three refer to the same profile radius.
    """
    if not r > 0.0:
        raise DomainError("residual_triple needs r > 0")

    def w_fn(rr):
        return eval_Finv_log(f, eval_logF(g, v_fn(rr)))

    def u_fn(x_radius, tt):
        rr = x_radius / math.sqrt(tt + 1.0)
        return eval_Finv_log(f, math.log(tt + 1.0) + eval_logF(g, v_fn(rr)))

    def bracket_form(nl, z_fn, rr, hh):
        z = z_fn(rr)
        dz = _d1(z_fn, rr, hh)
        d2z = _d2(z_fn, rr, hh)
        log_fz = nl.log_f(z)
        fz = math.exp(log_fz)
        zF = math.exp(log_fz + eval_logF(nl, z))  # f(z) F(z)
        return (
            -d2z
            - (n_dim - 1.0) / rr * dz
            - 0.5 * rr * dz
            - fz
            - zF
            + nl.dlog_f(z) * dz * dz
        ) / fz

    r_v = bracket_form(g, v_fn, r, h)
    r_w = bracket_form(f, w_fn, r, h)

    x = r * math.sqrt(t + 1.0)
    hx = h * math.sqrt(t + 1.0)
    ht = h * (t + 1.0)
    u0 = u_fn(x, t)
    ut = (u_fn(x, t + ht) - u_fn(x, t - ht)) / (2.0 * ht)
    up, um = u_fn(x + hx, t), u_fn(x - hx, t)
    lap = (up - 2.0 * u0 + um) / (hx * hx) + (n_dim - 1.0) / x * (up - um) / (2.0 * hx)
    du = (up - um) / (2.0 * hx)
    fu = math.exp(f.log_f(u0))
    r_u = (ut - lap - fu + f.dlog_f(u0) * du * du) / fu
    return r_u, r_w, r_v


def selfsimilar_residual(
    f: Nonlinearity,
    q_param: float,
    W_fn: Callable[[float], float],
    y_radius: float,
    n_dim: int = 3,
    h: float | None = None,
) -> float:
    """Residual of the quasi self-similar equation at one radius:

        Lap(W) + (y/2) W' + f(W)F(W) + f(W)
        + |W'|^2 / (f(W)F(W)) * [q - f'(W)F(W)].

    For a pure power term with q = p/(p-1) this is the classical forward
    self-similar profile equation; for the exponential model with q = 1 the
    exponential one.  Derivatives of ``W_fn`` are taken by central
    differences (step ``h``, default scaled to the radius).
    """
    if not y_radius > 0.0:
        raise DomainError("selfsimilar_residual needs y > 0")
    if h is None:
        h = 4e-4 * (1.0 + y_radius)
    W = W_fn(y_radius)
    if not W > 0.0:
        raise DomainError(f"W({y_radius:g}) = {W!r} is not positive")
    dW = _d1(W_fn, y_radius, h)
    d2W = _d2(W_fn, y_radius, h)
    log_fF = f.log_f(W) + eval_logF(f, W)
    if log_fF < -680.0:
        raise SingularPoint(f"f(W)F(W) underflows at W = {W:g}")
    fF = math.exp(log_fF)
    fW = math.exp(f.log_f(W))
    fpF = f.dlog_f(W) * fF
    return (
        d2W
        + (n_dim - 1.0) / y_radius * dW
        + 0.5 * y_radius * dW
        + fF
        + fW
        + dW * dW / fF * (q_param - fpF)
    )


# ---------------------------------------------------------------------------
# pinching thresholds and configuration


def scan_fprimeF_threshold(
    f: Nonlinearity,
    bound: float,
    side: str,
    margin: float = 0.01,
    s_max: float = 4.0,
    n_scan: int = 400,
) -> float:
    """Largest s such that f'F stays on the required side of ``bound`` on the
    whole sampled interval (floor, s].

    ``side`` "below" demands f'F <= bound (supersolution pinching), "above"
    demands f'F >= bound (subsolution pinching).  The margin is a fraction of
    the gap between the bound and the limit value at zero, guarding against
    acceptance by roundoff right where the inequality turns tight.

    The scan floor is 1e-6: below that, f'F = exp(log f + log F) loses
    digits to cancellation for terms with log F ~ 1/s, while the value is
    pinned by the limit q anyway.
    """
    if side not in ("below", "above"):
        raise DomainError(f"side must be 'below' or 'above', got {side!r}")
    grid = np.geomspace(max(f.domain_floor * 10.0, 1e-6), s_max, n_scan)
    vals = np.array(
        [f.dlog_f(s) * math.exp(f.log_f(s) + eval_logF(f, s)) for s in grid]
    )
    q0 = vals[0]
    gap = abs(bound - q0)
    if side == "below":
        ok = vals <= bound - margin * gap + 1e-12
    else:
        ok = vals >= bound + margin * gap - 1e-12
    if not ok[0]:
        raise DomainError(
            f"{f.label}: f'F = {q0:.6g} already violates the {side} bound "
            f"{bound:.6g} at s = {grid[0]:.3g}"
        )
    bad = np.nonzero(~ok)[0]
    idx = bad[0] - 1 if bad.size else n_scan - 1
    return float(grid[idx])


@dataclass(frozen=True)
class SuperSubConfig:
    """Pinching exponents and the smallness interval they are valid on.

    q_upper in (q, 1+N/2) controls the supersolution, q_lower in (1, q]
    (exactly 1 when q = 1) the subsolution; f'F must stay below q_upper and
    above q_lower on (0, s_star].  ``alpha``/``beta`` are the profile
    amplitudes; builders check the resulting lifts stay below s_star.
    """

    q: float
    q_upper: float
    q_lower: float
    s_star: float
    alpha: float
    beta: float
    n_dim: int


def default_config(
    f: Nonlinearity,
    n_dim: int,
    q: float | None = None,
    gamma_target: float | None = None,
) -> SuperSubConfig:
    """Choose pinching exponents, the smallness threshold, and amplitudes.

    Defaults: q_upper halves the gap to the critical value 1 + N/2, q_lower
    halves the gap down to 1.  s_star is discovered by scanning f'F; the
    amplitudes are shrunk geometrically until the corresponding lift suprema
    sit below s_star.  With ``gamma_target`` set, beta keeps shrinking until
    the subsolution's initial slice is dominated by the canonical data of
    that amplitude (needed when sandwiching an actual run).
    """
    if q is None:
        q = estimate_q(f).q
    crit = 1.0 + n_dim / 2.0
    if not q < crit - _Q_EQUAL_TOL:
        raise DomainError(
            f"{f.label}: q = {q:.6g} is not below the critical value {crit:g}; "
            "no global small-data regime to work in"
        )
    q_upper = q + 0.5 * (crit - q)
    q_is_one = q <= 1.0 + _Q_EQUAL_TOL
    q_lower = 1.0 if q_is_one else 1.0 + 0.5 * (q - 1.0)
    s_up = scan_fprimeF_threshold(f, q_upper, "below")
    margin = 0.0 if q_is_one else 0.01
    s_dn = scan_fprimeF_threshold(f, q_lower, "above", margin=margin)
    s_star = min(s_up, s_dn)

    # supersolution amplitude: F^{-1}[G(alpha)] <= s_star
    p_star = q_upper / (q_upper - 1.0)
    g_up = power(p_star)
    bound_log = eval_logF(f, s_star)
    alpha = 0.5
    for _ in range(200):
        if eval_logF(g_up, alpha) >= bound_log:
            break
        alpha *= 0.5
    else:
        raise SmallnessViolated("no admissible supersolution amplitude found")

    # subsolution amplitude: F^{-1}[G(beta_q)] <= s_star
    g_dn = exp_model() if q_is_one else power(q_lower / (q_lower - 1.0))
    beta = 0.25
    for _ in range(400):
        beta_q = math.log(beta) if q_is_one else beta
        if eval_logF(g_dn, beta_q) >= bound_log:
            break
        beta *= 0.5
    else:
        raise SmallnessViolated("no admissible subsolution amplitude found")

    cfg = SuperSubConfig(
        q=q, q_upper=q_upper, q_lower=q_lower, s_star=s_star,
        alpha=alpha, beta=beta, n_dim=n_dim,
    )
    # couple the amplitudes: the pair only sandwiches canonical data (and
    # hence each other) once the subsolution's domination constant drops
    # below the supersolution's
    sup = build_supersolution(f, cfg, n_dim, verify=False)
    target = sup.gamma_star if gamma_target is None else min(sup.gamma_star, gamma_target)
    return shrink_beta_for_gamma(f, cfg, target)


def shrink_beta_for_gamma(f, cfg: SuperSubConfig, gamma: float) -> SuperSubConfig:
    """Halve beta until the subsolution's t = 0 slice sits below the
    canonical data of amplitude gamma."""
    beta = cfg.beta
    for _ in range(200):
        sub = build_subsolution(f, cfg_with(cfg, beta=beta), cfg.n_dim, verify=False)
        if sub.gamma_min <= gamma:
            return cfg_with(cfg, beta=beta)
        beta *= 0.5
    raise SmallnessViolated(
        f"subsolution never dominated by canonical data at gamma = {gamma:g}"
    )


def cfg_with(cfg: SuperSubConfig, **kw) -> SuperSubConfig:
    from dataclasses import replace

    return replace(cfg, **kw)


# ---------------------------------------------------------------------------
# builders


def _default_residual_grid(n_x=50, t_values=(0.0, 0.5, 1.0, 5.0, 20.0)):
    return {"n_x": n_x, "t_values": tuple(float(t) for t in t_values),
            "x_span": "[0, 10 sqrt(t+1)]"}


def _verify_lift_residual(ls: LiftedSolution, n_dim: int, grid: dict):
    """Scan u_t - Lap(u) - f(u) over the verification grid by central
    differences of the lift itself (independent of the chain-rule identity)."""
    res_min, res_max = math.inf, -math.inf
    argmin = argmax = None
    fd_scale = 6e-4
    hint = [None]  # warm-start the inversions across neighbouring stencils
    for t in grid["t_values"]:
        xs = np.linspace(0.0, 10.0 * math.sqrt(t + 1.0), grid["n_x"])
        for x in xs:
            hx = fd_scale * (1.0 + x)
            ht = fd_scale * (1.0 + t)

            def u_fn(xr, tt):
                hint[0] = ls.value(xr, tt, s_hint=hint[0])
                return hint[0]

            val = pde_residual(u_fn, ls.f, float(x), float(t), n_dim, hx, ht)
            if val < res_min:
                res_min, argmin = val, (float(x), float(t))
            if val > res_max:
                res_max, argmax = val, (float(x), float(t))
    ls.residual_min = res_min
    ls.residual_max = res_max
    ls.residual_grid = dict(grid, argmin=argmin, argmax=argmax)


def _gamma_bounds_from_profile(ls: LiftedSolution):
    """Initial-data comparison constants of a lifted profile.

    gamma_star: the lift's t = 0 slice dominates canonical data of amplitude
    gamma iff gamma <= inf_r (r^2+1)/G(v(r)).  gamma_min: the slice is
    dominated by canonical data iff gamma >= sup_r (r^2+1)/G(v(r)).
    """
    r = ls.profile.r_grid
    logG = np.array([ls.g.analytic_logF(float(v)) for v in ls.profile.v])
    log_ratio = np.log(r**2 + 1.0) - logG
    ls.gamma_star = float(np.exp(np.min(log_ratio)))
    ls.gamma_min = float(np.exp(np.max(log_ratio)))


def build_supersolution(
    f: Nonlinearity,
    cfg: SuperSubConfig,
    n_dim: int,
    r_max: float = 50.0,
    tol: float = 1e-10,
    verify: bool = True,
    grid: dict | None = None,
) -> LiftedSolution:
    """Lift of the power profile with exponent p* = q_upper/(q_upper-1).

    Because f'F <= q_upper below s_star, the defect term of the lift is
    nonnegative there, so the lift is a supersolution of the heat flow as
    long as it stays below s_star; that smallness is enforced against
    cfg.alpha (raise ``SmallnessViolated``, shrink alpha).  The verified
    residual scan and the t = 0 domination constants are attached.
    """
    p_star = cfg.q_upper / (cfg.q_upper - 1.0)
    model = ProfileModel("power", n_dim, p=p_star)
    profile = solve_profile_auto(model, cfg.alpha, tol=tol, r_max=r_max)
    g = power(p_star)
    ls = LiftedSolution(
        f=f, g=g, profile=profile, q_param=cfg.q_upper, role="supersolution",
        p_star=p_star, amplitude=cfg.alpha, s_star=cfg.s_star,
    )
    sup = ls.sup_value()
    if sup > cfg.s_star * (1.0 + 1e-9):
        raise SmallnessViolated(
            f"sup of the lifted profile = {sup:.6g} exceeds s_star = "
            f"{cfg.s_star:.6g}; shrink alpha"
        )
    _gamma_bounds_from_profile(ls)
    if verify:
        _verify_lift_residual(ls, n_dim, grid or _default_residual_grid())
    return ls


def build_subsolution(
    f: Nonlinearity,
    cfg: SuperSubConfig,
    n_dim: int,
    r_max: float = 50.0,
    tol: float = 1e-10,
    verify: bool = True,
    grid: dict | None = None,
) -> LiftedSolution:
    """Lift of the model profile chosen from q_lower.

    For q > 1 the model is the power p_* = q_lower/(q_lower-1) with profile
    amplitude beta; for q = 1 it is the exponential model with amplitude
    log(beta) (which tends to -inf as beta -> 0, so arbitrarily small
    subsolutions exist).  Because f'F >= q_lower below s_star the defect is
    nonpositive, making the lift a subsolution while it stays below s_star.
    """
    q_is_one = cfg.q_lower <= 1.0 + _Q_EQUAL_TOL
    if q_is_one:
        # the q = 1 branch is only sound if f'F >= 1 actually holds near 0
        scan_fprimeF_threshold(f, 1.0, "above", margin=0.0, s_max=max(cfg.s_star, 1e-3))
        model = ProfileModel("exp", n_dim)
        beta_q = math.log(cfg.beta)
        g = exp_model()
        q_param = 1.0
    else:
        p_low = cfg.q_lower / (cfg.q_lower - 1.0)
        model = ProfileModel("power", n_dim, p=p_low)
        beta_q = cfg.beta
        g = power(p_low)
        q_param = cfg.q_lower
    profile = solve_profile_auto(model, beta_q, tol=tol, r_max=r_max)
    ls = LiftedSolution(
        f=f, g=g, profile=profile, q_param=q_param, role="subsolution",
        p_star=None if q_is_one else q_param / (q_param - 1.0),
        amplitude=cfg.beta, s_star=cfg.s_star,
    )
    sup = ls.sup_value()
    if sup > cfg.s_star * (1.0 + 1e-9):
        raise SmallnessViolated(
            f"sup of the lifted profile = {sup:.6g} exceeds s_star = "
            f"{cfg.s_star:.6g}; shrink beta"
        )
    _gamma_bounds_from_profile(ls)
    if verify:
        _verify_lift_residual(ls, n_dim, grid or _default_residual_grid())
    return ls
