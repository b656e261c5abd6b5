"""Modulars and Luxemburg quasi-norms on L^Phi and W^{1,Phi}.

The modular is a midpoint-rule sum over the domain grid.  The Luxemburg
norm inf{lam > 0 : rho(u/lam) <= 1} is found by exponential bracketing
followed by bracketed root refinement in log-lambda; refinement uses
Illinois-damped secant steps clipped to the bracket (bisection-grade
robustness, far fewer modular evaluations), stopping at relative
tolerance 1e-12 with a 200-evaluation cap.  Norm computations restrict
to the support of the function first, since Phi(x, 0) = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels import DoublePhaseGrid
from .phi import PhiFunction, phi_conjugate_on_cells
from .reports import VerificationReport

__all__ = [
    "SampledFunction",
    "NormResult",
    "modular",
    "luxemburg_norm",
    "sobolev_modular",
    "sobolev_norm",
    "conjugate_norm",
    "check_norm_modular_sandwich",
    "check_unit_ball",
    "check_holder_inequality",
    "check_pointwise_embedding_certificate",
]

NORM_REL_TOL = 1e-12
MAX_EVALS = 200
BRACKET_SPAN = 60  # powers of two around max|u|


@dataclass
class SampledFunction:
    """Values of u (and optionally |grad u|) on the domain's active cells."""

    domain: object
    values: np.ndarray
    grad_norm: np.ndarray | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        m = self.domain.active_centers.shape[0]
        if self.values.shape != (m,):
            raise ValueError("values must match the domain cell count")
        if self.grad_norm is not None:
            self.grad_norm = np.asarray(self.grad_norm, dtype=float)
            if self.grad_norm.shape != (m,):
                raise ValueError("grad_norm must match the domain cell count")
            if np.any(self.grad_norm < 0):
                raise ValueError("grad_norm must be nonnegative")

    @classmethod
    def from_callable(cls, domain, fn, grad_fn=None) -> "SampledFunction":
        pts = domain.active_centers
        values = np.asarray(fn(pts), dtype=float)
        grad = None if grad_fn is None else np.asarray(grad_fn(pts), dtype=float)
        return cls(domain=domain, values=values, grad_norm=grad)

    @classmethod
    def indicator(cls, domain, mask) -> "SampledFunction":
        mask = np.asarray(mask)
        values = np.zeros(domain.active_centers.shape[0])
        values[mask] = 1.0
        return cls(domain=domain, values=values)

    def scaled(self, c: float) -> "SampledFunction":
        return SampledFunction(
            domain=self.domain,
            values=self.values * c,
            grad_norm=None if self.grad_norm is None else self.grad_norm * abs(c),
        )


@dataclass
class NormResult:
    value: float
    modular_at_value: float
    iterations: int


def _grid_for(fn_like, domain) -> DoublePhaseGrid:
    return fn_like.grid(domain)


def modular(fn_like, u: SampledFunction) -> float:
    """rho(u) = sum Phi(x_i, |u_i|) w_i over the grid."""
    grid = _grid_for(fn_like, u.domain)
    return grid.modular(u.values)


def _support_grid(grid: DoublePhaseGrid, arrays: list[np.ndarray]):
    support = np.zeros(grid.size, dtype=bool)
    for arr in arrays:
        support |= arr != 0.0
    support &= grid.weights > 0.0
    frac = support.mean() if grid.size else 0.0
    if frac == 0.0:
        return None, support
    if frac < 0.7:
        return grid.subset(support), support
    return grid, None


def _root_find(grid: DoublePhaseGrid, log_values: np.ndarray, ll_start: float,
               rel_tol: float = NORM_REL_TOL):
    """Solve rho(exp(ll)) = 1 for ll = log(lambda); returns (ll, log rho, evals)."""

    def f(ll):
        rho = grid.modular_scaled(log_values, ll)
        if rho <= 0.0:
            return -745.0
        return min(max(math.log(rho), -745.0), 745.0)

    evals = 0
    step = math.log(2.0)
    fa = f(ll_start)
    evals += 1
    if fa > 0.0:  # rho > 1: lambda must grow
        ll_lo, f_lo = ll_start, fa
        ll_hi = ll_start
        for _ in range(2 * BRACKET_SPAN):
            ll_hi += step
            f_hi = f(ll_hi)
            evals += 1
            if f_hi <= 0.0:
                break
            ll_lo, f_lo = ll_hi, f_hi
        else:
            raise ArithmeticError("failed to bracket the Luxemburg norm from above")
    else:
        ll_hi, f_hi = ll_start, fa
        ll_lo = ll_start
        for _ in range(2 * BRACKET_SPAN):
            ll_lo -= step
            f_lo = f(ll_lo)
            evals += 1
            if f_lo > 0.0:
                break
            ll_hi, f_hi = ll_lo, f_lo
        else:
            raise ArithmeticError("failed to bracket the Luxemburg norm from below")

    # Illinois refinement on the bracket [ll_lo (rho>1), ll_hi (rho<=1)]
    side = 0
    while ll_hi - ll_lo > rel_tol and evals < MAX_EVALS:
        denom = f_hi - f_lo
        if denom == 0.0 or not math.isfinite(denom):
            ll_mid = 0.5 * (ll_lo + ll_hi)
        else:
            ll_mid = ll_hi - f_hi * (ll_hi - ll_lo) / denom
            margin = 0.01 * (ll_hi - ll_lo)
            if not (ll_lo + margin <= ll_mid <= ll_hi - margin):
                ll_mid = 0.5 * (ll_lo + ll_hi)
        f_mid = f(ll_mid)
        evals += 1
        if f_mid > 0.0:
            ll_lo, f_lo = ll_mid, f_mid
            if side == 1:
                f_hi *= 0.5
            side = 1
        else:
            ll_hi, f_hi = ll_mid, f_mid
            if side == -1:
                f_lo *= 0.5
            side = -1
    return ll_hi, f_hi, evals


def _norm_from_grid(grid: DoublePhaseGrid, values: np.ndarray, warm_start: float | None = None,
                    rel_tol: float = NORM_REL_TOL) -> NormResult:
    values = np.abs(np.asarray(values, dtype=float))
    if not np.all(np.isfinite(values)):
        raise ValueError("function values must be finite")
    sub, support = _support_grid(grid, [values])
    if sub is None:
        return NormResult(value=0.0, modular_at_value=0.0, iterations=0)
    vals = values[support] if support is not None else values
    with np.errstate(divide="ignore"):
        log_values = np.log(vals)
    ll_start = math.log(vals.max()) if warm_start is None else math.log(warm_start)
    ll, f_hi, evals = _root_find(sub, log_values, ll_start, rel_tol)
    return NormResult(value=math.exp(ll), modular_at_value=math.exp(f_hi), iterations=evals)


def luxemburg_norm(fn_like, u: SampledFunction, warm_start: float | None = None) -> NormResult:
    grid = _grid_for(fn_like, u.domain)
    return _norm_from_grid(grid, u.values, warm_start)


def sobolev_modular(fn_like, u: SampledFunction) -> float:
    """rho_W(u) = rho(u) + rho(|grad u|), first-order only."""
    if u.grad_norm is None:
        raise ValueError("sobolev modular needs grad_norm")
    grid = _grid_for(fn_like, u.domain)
    return grid.modular(u.values) + grid.modular(u.grad_norm)


def sobolev_norm(fn_like, u: SampledFunction, warm_start: float | None = None) -> NormResult:
    if u.grad_norm is None:
        raise ValueError("sobolev norm needs grad_norm")
    grid = _grid_for(fn_like, u.domain)
    both = np.concatenate([u.values, u.grad_norm])
    joint = grid.concat(grid)
    sub, support = _support_grid(joint, [np.abs(both)])
    if sub is None:
        return NormResult(value=0.0, modular_at_value=0.0, iterations=0)
    vals = np.abs(both)[support] if support is not None else np.abs(both)
    with np.errstate(divide="ignore"):
        log_values = np.log(vals)
    ll_start = math.log(vals.max()) if warm_start is None else math.log(warm_start)
    ll, f_hi, evals = _root_find(sub, log_values, ll_start)
    return NormResult(value=math.exp(ll), modular_at_value=math.exp(f_hi), iterations=evals)


def conjugate_norm(phi: PhiFunction, u: SampledFunction) -> NormResult:
    """Luxemburg norm in the conjugate space L^{Phi*}, with Phi*
    evaluated pointwise per cell (no closed form; cost is one batched
    conjugate maximization per modular evaluation)."""
    domain = u.domain
    values = np.abs(u.values)
    support = (values != 0.0) & (domain.quad_weights > 0.0)
    if not support.any():
        return NormResult(0.0, 0.0, 0)
    pts = domain.active_centers[support]
    vals = values[support]
    weights = domain.quad_weights[support]

    def rho(lam: float) -> float:
        star = phi_conjugate_on_cells(phi, pts, vals / lam)
        return float(np.sum(np.where(np.isfinite(star), star, 1e300) * weights))

    lam = float(vals.max())
    evals = 0
    if rho(lam) > 1.0:
        evals += 1
        lo = lam
        for _ in range(2 * BRACKET_SPAN):
            lam *= 2.0
            evals += 1
            if rho(lam) <= 1.0:
                break
            lo = lam
        hi = lam
    else:
        evals += 1
        hi = lam
        for _ in range(2 * BRACKET_SPAN):
            lam /= 2.0
            evals += 1
            if rho(lam) > 1.0:
                break
            hi = lam
        lo = lam
    for _ in range(80):
        if hi - lo <= 1e-9 * hi:
            break
        mid = math.sqrt(lo * hi)
        evals += 1
        if rho(mid) > 1.0:
            lo = mid
        else:
            hi = mid
    return NormResult(value=hi, modular_at_value=rho(hi), iterations=evals)


# ---------------------------------------------------------------------------
# verification suites


def _field_bounds_on(phi: PhiFunction, domain) -> dict:
    pts = domain.active_centers
    f = phi.field
    return {
        "p_minus": float(f.p(pts).min()),
        "p_plus": float(f.p(pts).max()),
        "q_plus": float(f.q(pts).max()),
        "r_plus": float(f.r(pts).max()),
        "r_minus": float(f.r(pts).min()),
        "a_sup": float(f.a(pts).max()),
    }


def check_norm_modular_sandwich(phi: PhiFunction, u_samples: list[SampledFunction],
                                tol: float = 1e-9) -> VerificationReport:
    """min(|u|^p-, |u|^(p+ + r+)) <= rho(u) <= max(...) per sample.

    Valid when Phi satisfies (Inc)_{p-} and (Dec)_{p+ + r+}; with the
    log weight present that requires sup(q + r) <= p+ + r+ on the
    region, which every theorem-shaped equal-mode field meets.
    """
    worst = math.inf
    witness = {}
    for k, u in enumerate(u_samples):
        b = _field_bounds_on(phi, u.domain)
        lo_exp, hi_exp = b["p_minus"], b["p_plus"] + b["r_plus"]
        res = luxemburg_norm(phi, u)
        rho = modular(phi, u)
        if res.value == 0:
            continue
        lower = min(res.value**lo_exp, res.value**hi_exp)
        upper = max(res.value**lo_exp, res.value**hi_exp)
        m = min(rho - lower, upper - rho) / max(rho, 1e-300)
        if m < worst:
            worst = m
            witness = {"sample": k, "norm": res.value, "modular": rho,
                       "lower": lower, "upper": upper}
    return VerificationReport(
        name="norm_modular_sandwich",
        passed=bool(worst >= -tol),
        worst_margin=worst,
        witness=witness,
        items_checked=len(u_samples),
    )


def check_unit_ball(phi: PhiFunction, u_samples: list[SampledFunction],
                    tol: float = 1e-7) -> VerificationReport:
    """Three-way equivalence of norm vs modular around 1."""
    worst = math.inf
    witness = {}
    checked = 0
    for k, u in enumerate(u_samples):
        res = luxemburg_norm(phi, u)
        if res.value == 0:
            continue
        rho = modular(phi, u)
        checked += 1
        if abs(res.value - 1.0) <= tol:
            margin = tol - abs(rho - 1.0)
        elif res.value < 1.0:
            margin = 1.0 - rho - tol
        else:
            margin = rho - 1.0 - tol
        if margin < worst:
            worst = margin
            witness = {"sample": k, "norm": res.value, "modular": rho}
    return VerificationReport(
        name="unit_ball_equivalence",
        passed=bool(worst >= -tol),
        worst_margin=worst,
        witness=witness,
        items_checked=checked,
    )


def check_holder_inequality(phi: PhiFunction, u_samples: list[SampledFunction],
                            v_samples: list[SampledFunction],
                            tol: float = 1e-9) -> VerificationReport:
    """int |u v| <= 2 |u|_Phi |v|_Phi* for all sampled pairs."""
    worst = math.inf
    witness = {}
    checked = 0
    for k, (u, v) in enumerate(zip(u_samples, v_samples)):
        w = u.domain.quad_weights
        lhs = float(np.sum(np.abs(u.values) * np.abs(v.values) * w))
        nu = luxemburg_norm(phi, u).value
        nv = conjugate_norm(phi, v).value
        rhs = 2.0 * nu * nv
        checked += 1
        if lhs == 0.0:
            margin = rhs
        else:
            margin = (rhs - lhs) / lhs + tol
        if margin < worst:
            worst = margin
            witness = {"pair": k, "lhs": lhs, "norm_u": nu, "conj_norm_v": nv}
    return VerificationReport(
        name="holder_inequality",
        passed=bool(worst >= -tol),
        worst_margin=worst,
        witness=witness,
        items_checked=checked,
    )


def check_pointwise_embedding_certificate(
    phi_a_eval,
    phi_b_eval,
    domain,
    K: float,
    h_values: np.ndarray,
    t_grid=None,
    tol: float = 1e-9,
) -> VerificationReport:
    """Psi(x, t/K) <= Phi(x, t) + h(x) on an (x, t) grid plus
    integral(h) <= 1; certifies L^PhiA -> L^PhiB with constant K."""
    if t_grid is None:
        t_grid = np.geomspace(1e-6, 1e8, 57)
    pts = domain.active_centers
    stride = max(1, pts.shape[0] // 512)
    pts = pts[::stride]
    h = np.asarray(h_values, dtype=float)[::stride]
    worst = math.inf
    witness = {}
    for t in t_grid:
        lhs = phi_b_eval(pts, float(t) / K)
        rhs = phi_a_eval(pts, float(t)) + h
        ok = np.isfinite(rhs)
        margin_arr = np.where(ok, rhs - lhs, np.inf)
        k = int(np.argmin(margin_arr))
        scale = max(float(rhs[k]) if np.isfinite(rhs[k]) else 1.0, 1.0)
        m = float(margin_arr[k]) / scale
        if m < worst:
            worst = m
            witness = {"x": pts[k].tolist(), "t": float(t)}
    h_int = float(np.sum(np.asarray(h_values, dtype=float) * domain.quad_weights))
    passed = worst >= -tol and h_int <= 1.0 + tol
    return VerificationReport(
        name="pointwise_embedding_certificate",
        passed=bool(passed),
        worst_margin=worst,
        witness=witness,
        details={"K": K, "h_integral": h_int},
        items_checked=int(len(t_grid) * pts.shape[0]),
    )