"""The logarithmic double-phase function and its derived objects.

Phi(x,t) = t^p(x) + a(x) t^q(x) log(e+t)^r(x), its generalized inverse
and convex conjugate, the Sobolev target Psi, and the elementary
monotonicity structure ((Inc)/(Dec) rates, inverse relation against
Psi).  Position enters only through the exponent field, so every
operation takes explicit points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .fields import ExponentField, SampleRegion, ScalarField
from .kernels import DoublePhaseGrid, double_phase_eval
from .reports import VerificationReport

__all__ = [
    "PhiFunction",
    "PsiFunction",
    "phi_eval",
    "psi_eval",
    "phi_inverse",
    "phi_conjugate",
    "phi_conjugate_on_cells",
    "sobolev_conjugate",
    "make_target_psi",
    "check_inc_dec",
    "check_inverse_relation",
]

INVERSE_REL_TOL = 1e-12
CONJUGATE_GRID = (1e-8, 1e8, 100_000)
CONJUGATE_REL_TOL = 1e-10
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0  # golden section step


@dataclass
class PhiFunction:
    """Theorem-shaped evaluator; ``equal`` mode forces q identical to p."""

    field: ExponentField
    mode: str = "general"
    _grid_cache: dict = dc_field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.mode not in ("general", "equal"):
            raise ValueError("mode must be 'general' or 'equal'")
        if self.mode == "equal" and self.field.q is not self.field.p:
            self.field = ExponentField(
                n=self.field.n,
                p=self.field.p,
                q=self.field.p,
                r=self.field.r,
                a=self.field.a,
                theorem_mode=self.field.theorem_mode,
            )

    @property
    def n(self) -> int:
        return self.field.n

    def params_at(self, points) -> tuple[np.ndarray, ...]:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        f = self.field
        return f.p(points), f.q(points), f.r(points), f.a(points)

    def eval(self, points, t) -> np.ndarray:
        p, q, r, a = self.params_at(points)
        with np.errstate(divide="ignore"):
            amp = np.where(a > 0, np.log(np.where(a > 0, a, 1.0)), -np.inf)
        return double_phase_eval(p, q, r, amp, 0.0, t)

    def grid(self, domain) -> DoublePhaseGrid:
        key = id(domain)
        cached = self._grid_cache.get(key)
        if cached is not None and cached[0] is domain:
            return cached[1]
        pts = domain.active_centers
        self.field.validate_on(pts)
        p, q, r, a = self.params_at(pts)
        with np.errstate(divide="ignore"):
            amp = np.where(a > 0, np.log(np.where(a > 0, a, 1.0)), -np.inf)
        g = DoublePhaseGrid(p, q, r, amp, 0.0, domain.quad_weights)
        self._grid_cache[key] = (domain, g)
        return g


@dataclass
class PsiFunction:
    """Sobolev-conjugate target built from a PhiFunction."""

    source: PhiFunction
    p_star: ScalarField
    q_star: ScalarField
    _grid_cache: dict = dc_field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.source.n

    @property
    def field(self) -> ExponentField:
        return self.source.field

    def params_at(self, points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        f = self.field
        p_s = self.p_star(points)
        q_s = self.q_star(points)
        q = f.q(points)
        r = f.r(points)
        a = f.a(points)
        with np.errstate(divide="ignore"):
            la = np.where(a > 0, np.log(np.where(a > 0, a, 1.0)), -np.inf)
        amp = np.where(a > 0, (q_s / q) * la, -np.inf)
        shift = np.where(a > 0, ((q - 1.0) / q) * la, 0.0)
        rho = r * q_s / q
        return p_s, q_s, rho, amp, shift

    def eval(self, points, t) -> np.ndarray:
        p_s, q_s, rho, amp, shift = self.params_at(points)
        return double_phase_eval(p_s, q_s, rho, amp, shift, t)

    def grid(self, domain) -> DoublePhaseGrid:
        key = id(domain)
        cached = self._grid_cache.get(key)
        if cached is not None and cached[0] is domain:
            return cached[1]
        p_s, q_s, rho, amp, shift = self.params_at(domain.active_centers)
        g = DoublePhaseGrid(p_s, q_s, rho, amp, shift, domain.quad_weights)
        self._grid_cache[key] = (domain, g)
        return g


def phi_eval(phi: PhiFunction, x, t):
    """Phi(x, t); x one point or (M, n), t scalar or matching array."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("t must be nonnegative")
    out = phi.eval(x, t_arr)
    if np.ndim(t) == 0 and np.asarray(x).ndim <= 1:
        return float(np.asarray(out).ravel()[0])
    return out


def psi_eval(psi: PsiFunction, x, t):
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("t must be nonnegative")
    out = psi.eval(x, t_arr)
    if np.ndim(t) == 0 and np.asarray(x).ndim <= 1:
        return float(np.asarray(out).ravel()[0])
    return out


def _scalar_evaluator(fn_like, x):
    """Bind x once; returns a fast t -> value closure in plain floats."""
    if isinstance(fn_like, PhiFunction):
        p, q, r, a = fn_like.params_at(x)
        alpha, beta, rho = float(p[0]), float(q[0]), float(r[0])
        amp = math.log(a[0]) if a[0] > 0 else -math.inf
        shift = 0.0
    elif isinstance(fn_like, PsiFunction):
        p_s, q_s, rho_a, amp_a, shift_a = fn_like.params_at(x)
        alpha, beta, rho = float(p_s[0]), float(q_s[0]), float(rho_a[0])
        amp, shift = float(amp_a[0]), float(shift_a[0])
    else:
        raise TypeError("expected PhiFunction or PsiFunction")

    def ev(t):
        if t <= 0.0:
            return 0.0
        lt = math.log(t)
        e1 = alpha * lt
        v = math.exp(e1) if e1 < 709.0 else math.inf
        if amp > -math.inf:
            z = lt - shift
            big = z if z > 30.0 else math.log(math.e + math.exp(z))
            e2 = beta * lt + rho * math.log(big) + amp
            v += math.exp(e2) if e2 < 709.0 else math.inf
        return v

    return ev


def _is_monotone(ev, k_lo=-40, k_hi=40) -> bool:
    ts = 2.0 ** np.arange(k_lo, k_hi + 1)
    vals = np.array([ev(t) for t in ts])
    return bool(np.all(np.diff(vals) >= -1e-15 * np.maximum(vals[:-1], 1e-300)))


def phi_inverse(fn_like, x, s: float, rel_tol: float = INVERSE_REL_TOL, return_info: bool = False):
    """Left inverse: the t with G(x, t) = s, by bracketed bisection.

    Strict monotonicity holds for theorem-mode exponents (r >= 0); when
    sign-mixed r breaks it at small t the smallest root is returned and
    flagged in the info dict.
    """
    if s < 0 or not math.isfinite(s):
        raise ValueError("s must be finite and nonnegative")
    info = {"monotone": True, "iterations": 0}
    ev = _scalar_evaluator(fn_like, x)
    if s == 0.0:
        return (0.0, info) if return_info else 0.0
    monotone = _is_monotone(ev)
    if not monotone:
        info["monotone"] = False
        t = _smallest_root(ev, s, rel_tol, info)
        return (t, info) if return_info else t

    t_hi = 1.0
    it = 0
    while ev(t_hi) < s:
        t_hi *= 2.0
        it += 1
        if it > 4200:
            raise ArithmeticError("failed to bracket inverse from above")
    t_lo = t_hi
    while ev(t_lo) >= s and t_lo > 0:
        t_lo /= 2.0
        it += 1
        if it > 8400:
            break
    t = _bisect_increasing(ev, s, t_lo, t_hi, rel_tol, info)
    info["iterations"] += it
    return (t, info) if return_info else t


def _bisect_increasing(ev, s, t_lo, t_hi, rel_tol, info):
    for _ in range(200):
        if t_hi - t_lo <= rel_tol * t_hi:
            break
        mid = 0.5 * (t_lo + t_hi)
        info["iterations"] += 1
        if ev(mid) < s:
            t_lo = mid
        else:
            t_hi = mid
    return 0.5 * (t_lo + t_hi)


def _smallest_root(ev, s, rel_tol, info):
    ks = np.arange(-60, 61, 0.25)
    ts = 2.0**ks
    prev_t, prev_v = 0.0, 0.0
    for t in ts:
        v = ev(t)
        info["iterations"] += 1
        if v >= s:
            return _bisect_increasing(ev, s, prev_t if prev_t > 0 else t / 2, t, rel_tol, info)
        prev_t, prev_v = t, v
    raise ArithmeticError("no root found up to 2^60")


def phi_conjugate(phi: PhiFunction, x, s: float) -> float:
    """Legendre transform sup_{t>=0} (s t - Phi(x, t)).

    Maximized over a log-spaced grid with golden-section refinement;
    returns inf when the objective is still climbing at the top of the
    grid (possible only for p(x) = 1 with s at or past the slope bound).
    """
    if s < 0:
        raise ValueError("s must be nonnegative")
    if s == 0.0:
        return 0.0
    ev = _scalar_evaluator(phi, x)
    lo, hi, count = CONJUGATE_GRID
    ts = np.geomspace(lo, hi, count)
    p, q, r, a = phi.params_at(x)
    amp = np.log(a) if a[0] > 0 else np.array([-np.inf])
    vals = s * ts - double_phase_eval(p, q, r, amp, 0.0, ts)
    k = int(np.argmax(vals))
    if k == count - 1:
        probe = hi * 1.5
        if s * probe - ev(probe) > vals[k]:
            return math.inf
    t_lo = ts[max(k - 1, 0)]
    t_hi = ts[min(k + 1, count - 1)]
    # golden section on g(t) = s t - Phi(t), unimodal for convex Phi
    g = lambda t: s * t - ev(t)
    c = t_hi - _INV_PHI * (t_hi - t_lo)
    d = t_lo + _INV_PHI * (t_hi - t_lo)
    gc, gd = g(c), g(d)
    while t_hi - t_lo > CONJUGATE_REL_TOL * max(t_hi, 1.0):
        if gc >= gd:
            t_hi, d, gd = d, c, gc
            c = t_hi - _INV_PHI * (t_hi - t_lo)
            gc = g(c)
        else:
            t_lo, c, gc = c, d, gd
            d = t_lo + _INV_PHI * (t_hi - t_lo)
            gd = g(d)
    t_best = 0.5 * (t_lo + t_hi)
    return max(float(g(t_best)), float(vals[k]), 0.0)


def phi_conjugate_on_cells(
    phi: PhiFunction,
    points: np.ndarray,
    s_values: np.ndarray,
    coarse: int = 257,
    refine_iters: int = 80,
) -> np.ndarray:
    """Vectorized conjugate for per-cell s values (norm computations).

    Same objective as ``phi_conjugate`` with a coarser initial grid;
    the unimodal bracket is then sharpened by vectorized golden section.
    """
    points = np.atleast_2d(points)
    s_values = np.asarray(s_values, dtype=float)
    p, q, r, a = phi.params_at(points)
    with np.errstate(divide="ignore"):
        amp = np.where(a > 0, np.log(np.where(a > 0, a, 1.0)), -np.inf)
    lo, hi, _ = CONJUGATE_GRID
    ts = np.geomspace(lo, hi, coarse)
    vals = s_values[:, None] * ts[None, :] - double_phase_eval(
        p[:, None], q[:, None], r[:, None], amp[:, None], 0.0, ts[None, :]
    )
    ks = np.argmax(vals, axis=1)
    t_lo = ts[np.maximum(ks - 1, 0)]
    t_hi = ts[np.minimum(ks + 1, coarse - 1)]

    def g(t):
        return s_values * t - double_phase_eval(p, q, r, amp, 0.0, t)

    c = t_hi - _INV_PHI * (t_hi - t_lo)
    d = t_lo + _INV_PHI * (t_hi - t_lo)
    gc, gd = g(c), g(d)
    for _ in range(refine_iters):
        left = gc >= gd
        t_hi = np.where(left, d, t_hi)
        t_lo = np.where(left, t_lo, c)
        c = t_hi - _INV_PHI * (t_hi - t_lo)
        d = t_lo + _INV_PHI * (t_hi - t_lo)
        gc, gd = g(c), g(d)
    best = np.maximum(g(0.5 * (t_lo + t_hi)), np.max(vals, axis=1))
    out = np.maximum(best, 0.0)
    # objective still climbing at the top of the grid: slope-bound breach
    unbounded = (ks == coarse - 1) & (s_values > 0)
    out[unbounded] = np.inf
    return out


def sobolev_conjugate(field: ExponentField, which: str) -> ScalarField:
    """Pointwise n f / (n - f); raises on supercritical values."""
    base = field.which(which)
    n = field.n

    def fn(pts):
        vals = base(pts)
        if np.any(vals >= n):
            raise ValueError("supercritical exponent")
        return n * vals / (n - vals)

    return ScalarField(fn, {"kind": "sobolev_conjugate", "of": which, "n": n})


def make_target_psi(phi: PhiFunction, region: SampleRegion | None = None) -> PsiFunction:
    """Build the embedding target from phi, rejecting supercritical
    exponents on the probe region (general mode also requires q+ < n)."""
    f = phi.field
    p_star = sobolev_conjugate(f, "p")
    q_star = sobolev_conjugate(f, "q")
    if region is not None:
        pv = f.p(region.points)
        qv = f.q(region.points)
        if pv.max() >= f.n:
            raise ValueError("supercritical exponent: sup p >= n")
        if phi.mode == "general" and qv.max() >= f.n:
            raise ValueError("supercritical exponent: sup q >= n")
    return PsiFunction(source=phi, p_star=p_star, q_star=q_star)


def check_inc_dec(
    phi: PhiFunction,
    region: SampleRegion,
    exponents: tuple[float, float],
    samples: int = 64,
    k_range: tuple[int, int] = (-40, 40),
) -> VerificationReport:
    """(Inc)_alpha and (Dec)_beta on a geometric t-grid per sampled x.

    Margins are differences of consecutive ratios Phi(x,t)/t^alpha
    (resp. reversed for beta); the worst margin over all pairs is
    reported and must be >= 0 for a pass.
    """
    alpha, beta = exponents
    pts = region.points
    if pts.shape[0] > samples:
        stride = int(np.ceil(pts.shape[0] / samples))
        pts = pts[::stride]
    ts = 2.0 ** np.arange(k_range[0], k_range[1] + 1, dtype=float)
    worst_inc, worst_dec = math.inf, math.inf
    witness = {}
    for x in pts:
        vals = phi.eval(x, ts).ravel()
        with np.errstate(over="ignore"):
            ratio_inc = vals / ts**alpha
            ratio_dec = vals / ts**beta
        finite = np.isfinite(ratio_inc)
        d_inc = np.diff(ratio_inc[finite])
        if d_inc.size:
            m = float(d_inc.min())
            if m < worst_inc:
                worst_inc = m
                if m < 0:
                    witness = {"x": np.asarray(x).tolist(), "check": "Inc", "alpha": alpha}
        finite = np.isfinite(ratio_dec)
        d_dec = -np.diff(ratio_dec[finite])
        if d_dec.size:
            m = float(d_dec.min())
            if m < worst_dec:
                worst_dec = m
                if m < 0:
                    witness = {"x": np.asarray(x).tolist(), "check": "Dec", "beta": beta}
    worst = min(worst_inc, worst_dec)
    return VerificationReport(
        name="inc_dec",
        passed=bool(worst >= -1e-9),
        worst_margin=worst,
        witness=witness,
        details={"alpha": alpha, "beta": beta, "worst_inc": worst_inc, "worst_dec": worst_dec},
        items_checked=int(pts.shape[0] * (ts.size - 1) * 2),
    )


def check_inverse_relation(
    phi: PhiFunction,
    psi: PsiFunction,
    region: SampleRegion,
    t_range: tuple[float, float] = (1.0, 1e6),
    kappa: float = 10.0,
    x_samples: int = 16,
    t_samples: int = 25,
) -> VerificationReport:
    """Ratio t^(-1/n) Phi^-1(x,t) / Psi^-1(x,t) over (x, t) samples;
    passes when it stays inside [1/kappa, kappa]."""
    if psi.source is not phi:
        raise ValueError("psi must be built from phi")
    n = phi.n
    pts = region.points
    if pts.shape[0] > x_samples:
        stride = int(np.ceil(pts.shape[0] / x_samples))
        pts = pts[::stride]
    ts = np.geomspace(t_range[0], t_range[1], t_samples)
    lo, hi = math.inf, 0.0
    witness = {}
    for x in pts:
        for t in ts:
            it_phi = phi_inverse(phi, x, float(t))
            it_psi = phi_inverse(psi, x, float(t))
            if it_psi == 0:
                continue
            ratio = t ** (-1.0 / n) * it_phi / it_psi
            if ratio < lo:
                lo = ratio
                witness["min"] = {"x": np.asarray(x).tolist(), "t": float(t), "ratio": ratio}
            if ratio > hi:
                hi = ratio
                witness["max"] = {"x": np.asarray(x).tolist(), "t": float(t), "ratio": ratio}
    passed = lo >= 1.0 / kappa and hi <= kappa
    return VerificationReport(
        name="inverse_relation",
        passed=bool(passed),
        worst_margin=float(min(lo - 1.0 / kappa, kappa - hi)),
        witness=witness,
        details={"ratio_min": lo, "ratio_max": hi, "kappa": kappa},
        items_checked=int(pts.shape[0] * ts.size),
    )
