"""The two headline experiments and the indicator-norm machinery.

Sufficiency: certified fields on John-type domains produce a bounded
empirical embedding constant max |u|_Psi / |u|_W over a documented
trial family.  Necessity: halving-radius traces at boundary points
expose the measure-density behaviour the embedding forces; on cusp
domains the density ratio collapses while the cutoff-family embedding
ratio blows up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .conditions import (
    ConditionReport,
    a0_beta,
    a1_holder_beta,
    a1_qholder_constant,
    compute_claim_constants,
    verify_A0,
    verify_A1_equivalent,
    verify_A1_prime,
    verify_A2_prime,
)
from .fields import (
    SampleRegion,
    estimate_holder,
    estimate_log_holder,
    estimate_loglog_holder,
)
from .geometry import DiscretizedDomain, halving_radius, make_cutoff
from .norms import NormResult, SampledFunction, luxemburg_norm, sobolev_norm
from .phi import PhiFunction, PsiFunction, check_inc_dec, make_target_psi
from .reports import VerificationReport

__all__ = [
    "EmbeddingTrial",
    "NecessityTrace",
    "certify_sufficiency",
    "trial_family",
    "run_embedding_trials",
    "check_indicator_norm_bounds",
    "check_radius_gap_lemma",
    "run_necessity_trace",
    "compute_r0_threshold",
    "integral_test_bound",
]

TRIAL_SEED = 0xE3B
FACTORIAL = math.gamma  # (r+)! extended continuously as Gamma(r+ + 1)


@dataclass
class EmbeddingTrial:
    name: str
    lhs: float  # |u|_{L^Psi}
    rhs: float  # |u|_{W^{1,Phi}}
    ratio: float


@dataclass
class NecessityTrace:
    x: np.ndarray
    r0: float
    radii: list
    measures: list
    eta_r: list
    r_plus_a: list
    bound_checks: list
    density_ratio_plain: list
    density_ratio_log: list
    telescoping_error: float
    truncated: bool
    flags: list = dc_field(default_factory=list)


# ---------------------------------------------------------------------------
# hypothesis certification (field side of Theorem-type sufficiency)


def certify_sufficiency(
    phi: PhiFunction,
    domain: DiscretizedDomain,
    case: str = "i",
    gamma: float | None = None,
    c_a: float | None = None,
    ball_samples: int = 400,
    seed: int = TRIAL_SEED,
) -> dict:
    """Check the exponent-side hypotheses and the structure conditions.

    case 'i': Holder p, q, a with (q/p)+ < 1 + gamma/n and log-log
    Holder r; case 'ii': log-Holder p, q with a q+-Holder weight.
    Both need r >= 0 and p+ + r+ < n.  Returns a dict of sub-reports
    plus 'certified'.
    """
    region = SampleRegion.from_domain(domain)
    f = phi.field
    pts = region.points
    p_vals, q_vals, r_vals, a_vals = f.p(pts), f.q(pts), f.r(pts), f.a(pts)
    n = f.n
    p_minus, p_plus = float(p_vals.min()), float(p_vals.max())
    q_minus, q_plus = float(q_vals.min()), float(q_vals.max())
    r_plus = float(r_vals.max())
    a_sup = float(a_vals.max())
    out = {"case": case}
    basic = {
        "subcritical": p_plus + r_plus < n,
        "ordered": bool(np.all(p_vals <= q_vals + 1e-12)),
        "r_nonnegative": bool(r_vals.min() >= 0),
    }
    out["field_checks"] = basic

    a0 = verify_A0(phi, region)
    out["A0"] = a0
    a2 = verify_A2_prime(phi, region, mode="bounded", domain=domain)
    out["A2"] = a2
    incdec = check_inc_dec(phi, region, exponents=(p_minus, q_plus + r_plus))
    out["inc_dec"] = incdec

    if case == "i":
        if gamma is None:
            raise ValueError("case 'i' needs the Holder exponent gamma of a")
        ratio_plus = float((q_vals / p_vals).max())
        basic["growth_gap"] = ratio_plus < 1.0 + gamma / n
        if c_a is None:
            c_a = estimate_holder(f, region, gamma, "a").constant
        claims = compute_claim_constants(phi, region, ball_samples=ball_samples, seed=seed)
        out["claims"] = claims
        m_const = claims.m_bound
        n_const = claims.n_bound
        beta = a1_holder_beta(
            n, p_minus, p_plus, q_minus, q_plus, r_plus, gamma, c_a, m_const, n_const
        )
        a1 = verify_A1_prime(phi, region, beta, ball_samples=ball_samples, seed=seed)
        out["A1"] = a1
        certified = all(basic.values()) and a0.passed and a2.passed and incdec.passed and a1.passed and claims.passed
    elif case == "ii":
        if c_a is None:
            c_a = estimate_holder(f, region, min(q_plus, 1.0), "a").constant
        c_q_log = estimate_log_holder(f, region, "q").constant
        big_c = a1_qholder_constant(q_minus, q_plus, a_sup, c_a, c_q_log)
        beta = min(1.0, 1.0 / big_c) if big_c > 0 else 1.0
        a1 = verify_A1_equivalent(f, region, beta)
        out["A1"] = a1
        certified = all(basic.values()) and a0.passed and a2.passed and incdec.passed and a1.passed
    else:
        raise ValueError("case must be 'i' or 'ii'")
    out["certified"] = bool(certified)
    return out


# ---------------------------------------------------------------------------
# trial family


def trial_family(domain: DiscretizedDomain, count: int, seed: int = TRIAL_SEED):
    """Deterministic list of (name, values, grad_norm) test functions.

    Kinds cycle through: the constant, radial cones, radial parabolic
    bumps, tensor bumps, interior cutoffs at varying scale, and clipped
    trigonometric polynomials.  All gradients are analytic.
    """
    rng = np.random.default_rng(seed)
    pts = domain.active_centers
    n = domain.n
    box = domain.bounding_box
    span = box[:, 1] - box[:, 0]
    inner_lo = box[:, 0] + 0.25 * span
    inner_hi = box[:, 1] - 0.25 * span
    out = []

    def random_center():
        return inner_lo + rng.random(n) * (inner_hi - inner_lo)

    k = 0
    while len(out) < count:
        kind = k % 6
        k += 1
        if kind == 0:
            out.append(("constant", np.ones(pts.shape[0]), np.zeros(pts.shape[0])))
        elif kind == 1:
            c = random_center()
            rho = float(span.min()) * rng.uniform(0.15, 0.4)
            d = np.sqrt(((pts - c[None, :]) ** 2).sum(axis=1))
            vals = np.maximum(0.0, 1.0 - d / rho)
            grad = np.where((d < rho), 1.0 / rho, 0.0)
            out.append((f"cone_{k}", vals, grad))
        elif kind == 2:
            c = random_center()
            rho = float(span.min()) * rng.uniform(0.15, 0.4)
            d = np.sqrt(((pts - c[None, :]) ** 2).sum(axis=1))
            vals = np.maximum(0.0, 1.0 - (d / rho) ** 2)
            grad = np.where(d < rho, 2.0 * d / rho**2, 0.0)
            out.append((f"bump_{k}", vals, grad))
        elif kind == 3:
            c = random_center()
            rho = float(span.min()) * rng.uniform(0.2, 0.45)
            comps = 1.0 - ((pts - c[None, :]) / rho) ** 2
            comps = np.maximum(comps, 0.0)
            vals = comps.prod(axis=1)
            grad_sq = np.zeros(pts.shape[0])
            for j in range(n):
                dj = np.where(comps[:, j] > 0, -2.0 * (pts[:, j] - c[j]) / rho**2, 0.0)
                others = vals / np.where(comps[:, j] > 0, comps[:, j], 1.0)
                grad_sq += (dj * others) ** 2
            out.append((f"tensor_{k}", vals, np.sqrt(grad_sq)))
        elif kind == 4:
            c = random_center()
            radius = float(span.min()) * rng.uniform(0.12, 0.3)
            r_tilde = radius * 2.0 ** (-1.0 / n)
            d = np.sqrt(((pts - c[None, :]) ** 2).sum(axis=1))
            vals = np.clip((radius - d) / (radius - r_tilde), 0.0, 1.0)
            grad = np.where((d > r_tilde) & (d < radius), 1.0 / (radius - r_tilde), 0.0)
            out.append((f"cutoff_{k}", vals, grad))
        else:
            terms = 3
            amps = rng.uniform(-1.0, 1.0, size=terms)
            freqs = rng.integers(1, 4, size=(terms, n))
            phases = rng.uniform(0.0, 2 * math.pi, size=(terms, n))
            vals = np.zeros(pts.shape[0])
            grads = np.zeros((pts.shape[0], n))
            for m in range(terms):
                prod = np.ones(pts.shape[0])
                cos_parts = []
                for j in range(n):
                    cos_parts.append(np.cos(math.pi * freqs[m, j] * pts[:, j] + phases[m, j]))
                    prod = prod * cos_parts[-1]
                vals += amps[m] * prod
                for j in range(n):
                    dj = -math.pi * freqs[m, j] * np.sin(
                        math.pi * freqs[m, j] * pts[:, j] + phases[m, j]
                    )
                    grads[:, j] += amps[m] * dj * np.where(
                        np.abs(cos_parts[j]) > 1e-300, prod / cos_parts[j], 0.0
                    )
            out.append((f"trig_{k}", np.abs(vals), np.sqrt((grads**2).sum(axis=1))))
    return out[:count]


def run_embedding_trials(
    phi: PhiFunction,
    domain: DiscretizedDomain,
    family: str = "standard",
    count: int = 50,
    certification: dict | None = None,
    case: str = "i",
    gamma: float | None = None,
    seed: int = TRIAL_SEED,
    psi: PsiFunction | None = None,
) -> list[EmbeddingTrial]:
    """Empirical embedding constant over the trial family; the max
    ratio witnesses boundedness (sufficiency) or blow-up (necessity)."""
    if certification is None:
        certification = certify_sufficiency(phi, domain, case=case, gamma=gamma, seed=seed)
    if not certification.get("certified", False):
        raise ValueError("hypotheses not certified")
    region = SampleRegion.from_domain(domain)
    if psi is None:
        psi = make_target_psi(phi, region)
    trials = []
    for name, vals, grad in trial_family(domain, count, seed):
        u = SampledFunction(domain=domain, values=vals, grad_norm=grad)
        lhs = luxemburg_norm(psi, u).value
        rhs = sobolev_norm(phi, u).value
        if rhs == 0:
            continue
        trials.append(EmbeddingTrial(name=name, lhs=lhs, rhs=rhs, ratio=lhs / rhs))
    trials.sort(key=lambda t: t.ratio)
    return trials


# ---------------------------------------------------------------------------
# indicator norm bounds (the three r-sign regimes)


def _set_bounds(phi: PhiFunction, domain: DiscretizedDomain, mask: np.ndarray):
    pts = domain.active_centers[mask]
    f = phi.field
    p_vals = f.p(pts)
    r_vals = f.r(pts)
    measure = float(domain.quad_weights[mask].sum())
    return measure, float(p_vals.min()), float(p_vals.max()), float(r_vals.max())


def check_indicator_norm_bounds(
    phi: PhiFunction,
    domain: DiscretizedDomain,
    masks: list[np.ndarray],
    regime: str,
    psi: PsiFunction | None = None,
    tol: float = 1e-9,
) -> VerificationReport:
    """Two-sided |1_A| bounds with the explicit constants per r-sign
    regime (factors 2 / 2 / 4, the (1+|a|_inf)^{1/p_A^-} weight and the
    log^{r_A^+} corrections).  Requires the equal-growth shape q = p;
    sets are boolean masks over the domain's active cells."""
    f = phi.field
    pts = domain.active_centers
    r_all = f.r(pts)
    q_gap = float(np.abs(f.q(pts) - f.p(pts)).max())
    if q_gap > 1e-12:
        raise ValueError("indicator bounds need the equal mode q = p")
    if regime == "nonneg" and r_all.min() < 0:
        raise ValueError("regime mismatch: r takes negative values")
    if regime == "negative" and r_all.max() >= 0:
        raise ValueError("regime mismatch: r takes nonnegative values")
    if regime == "mixed" and (r_all.min() >= 0 or r_all.max() < 0):
        raise ValueError("regime mismatch: r does not change sign")
    a_sup = float(f.a(pts).max())
    worst = math.inf
    witness = {}
    checked = 0
    for k, mask in enumerate(masks):
        measure, p_minus_a, p_plus_a, r_plus_a = _set_bounds(phi, domain, mask)
        if measure <= 0:
            continue
        if measure > 1.0 or (regime == "mixed" and measure >= 0.5):
            raise ValueError("set measure outside the regime's range")
        norm = luxemburg_norm(phi, SampledFunction.indicator(domain, mask)).value
        le = math.log(math.e + 1.0 / measure)
        l1 = math.log(1.0 + math.e)
        amp = (1.0 + a_sup) ** (1.0 / p_minus_a)
        if regime == "nonneg":
            lower = min(measure ** (1.0 / p_plus_a), measure ** (1.0 / p_minus_a))
            upper = 2.0 * amp * max(
                measure ** (1.0 / p_plus_a) * le**r_plus_a,
                measure ** (1.0 / p_minus_a) * l1**r_plus_a,
            )
        elif regime == "negative":
            lower = min(measure ** (1.0 / p_plus_a), measure ** (1.0 / p_minus_a))
            upper = 2.0 * amp * max(measure ** (1.0 / p_plus_a), measure ** (1.0 / p_minus_a))
        else:
            lower = measure ** (1.0 / p_minus_a)
            upper = 4.0 * amp * max(
                measure ** (1.0 / p_plus_a) * le ** max(r_plus_a, 0.0),
                measure ** (1.0 / p_minus_a) * l1 ** max(r_plus_a, 0.0),
            )
        margin = min(norm - lower, upper - norm) / max(norm, 1e-300)
        checked += 1
        if margin < worst:
            worst = margin
            witness = {
                "set": k,
                "measure": measure,
                "norm": norm,
                "lower": lower,
                "upper": upper,
            }
    return VerificationReport(
        name=f"indicator_bounds_{regime}",
        passed=bool(worst >= -tol),
        worst_margin=float(worst),
        witness=witness,
        items_checked=checked,
    )


# ---------------------------------------------------------------------------
# radius-gap lemma and the necessity trace


def _r_sign_regime(r_vals: np.ndarray) -> str:
    if r_vals.min() >= 0:
        return "nonneg"
    if r_vals.max() < 0:
        return "negative"
    return "mixed"


def radius_gap_bound(
    regime: str,
    c2: float,
    a_sup: float,
    p_minus_global: float,
    n: int,
    measure: float,
    p_plus_a: float,
    p_minus_a: float,
    r_plus_a: float,
) -> float:
    """Closed-form bound on R - R~ per r-sign regime (C1 = c2)."""
    core = measure ** (1.0 / p_plus_a - 1.0 / p_minus_a + 1.0 / n)
    amp = (1.0 + a_sup) ** (1.0 / p_minus_global)
    le = math.log(math.e + 1.0 / measure)
    if regime == "nonneg":
        return c2 * amp * 2.0 ** (1.0 / p_minus_global - 1.0 / n + 1.0) * core * le**r_plus_a
    if regime == "negative":
        return c2 * amp * 2.0 ** (1.0 / p_minus_global - 1.0 / n + 1.0) * core
    return 4.0 * c2 * amp * 2.0 ** (1.0 / p_minus_global - 1.0 / n) * core * le ** max(r_plus_a, 0.0)


def check_radius_gap_lemma(
    phi: PhiFunction,
    psi: PsiFunction,
    domain: DiscretizedDomain,
    x,
    radius: float,
    c1: float,
    c_tilde: float = 1.0,
    tol: float = 1e-9,
) -> VerificationReport:
    """Cutoff chain |1_{B_R~}|_Psi <= c2/(R-R~) |1_{B_R}|_Phi followed
    by the regime-specific closed-form bound on R - R~."""
    if c1 <= 0:
        raise ValueError("c1 must be positive")
    if phi.mode != "equal":
        raise ValueError("radius-gap lemma needs the equal mode q = p")
    c2 = 2.0 * c1 * max(1.0, c_tilde)
    r_tilde = halving_radius(domain, x, radius)
    u = make_cutoff(domain, x, radius, r_tilde)
    d = np.sqrt(((domain.active_centers - np.asarray(x)[None, :]) ** 2).sum(axis=1))
    inner_mask = d <= r_tilde
    outer_mask = d <= radius
    measure, _ = domain.ball_measure(x, radius)
    if measure <= 0 or not inner_mask.any():
        raise ValueError("ball carries no measure at this resolution")
    lhs_psi = luxemburg_norm(psi, SampledFunction.indicator(domain, inner_mask)).value
    rhs_phi = luxemburg_norm(phi, SampledFunction.indicator(domain, outer_mask)).value
    u_norm = sobolev_norm(phi, u).value
    embed_margin = (c1 * u_norm - lhs_psi) / max(lhs_psi, 1e-300)
    chain_rhs = c2 / (radius - r_tilde) * rhs_phi
    chain_margin = (chain_rhs - lhs_psi) / max(lhs_psi, 1e-300)
    f = phi.field
    pts_a = domain.active_centers[outer_mask]
    r_vals = f.r(pts_a)
    regime = _r_sign_regime(r_vals)
    p_vals_a = f.p(pts_a)
    bound = radius_gap_bound(
        regime,
        c2,
        float(f.a(domain.active_centers).max()),
        float(f.p(domain.active_centers).min()),
        domain.n,
        measure,
        float(p_vals_a.max()),
        float(p_vals_a.min()),
        float(r_vals.max()),
    )
    gap_margin = (bound - (radius - r_tilde)) / radius
    worst = min(embed_margin, chain_margin, gap_margin)
    return VerificationReport(
        name="radius_gap_lemma",
        passed=bool(worst >= -tol),
        worst_margin=float(worst),
        witness={"x": np.asarray(x).tolist(), "R": radius, "R_tilde": r_tilde, "regime": regime},
        details={
            "lhs_psi": lhs_psi,
            "rhs_phi": rhs_phi,
            "u_w_norm": u_norm,
            "c2": c2,
            "bound": bound,
            "embed_margin": embed_margin,
            "chain_margin": chain_margin,
            "gap_margin": gap_margin,
        },
        items_checked=3,
    )


def compute_r0_threshold(c_log: float, n: int) -> dict:
    """r0 = (1/2) min(1/4, e^{-n C_log}/2) and the uniform positive
    eta~ = 1/n - C_log / log(1/(2 r0))."""
    r0 = 0.5 * min(0.25, 0.5 * math.exp(-n * c_log))
    eta_tilde = 1.0 / n - c_log / math.log(1.0 / (2.0 * r0))
    if eta_tilde <= 0:
        raise AssertionError("eta~ must be positive by construction")
    return {"r0": r0, "eta_tilde": eta_tilde, "c_log": c_log, "n": n}


def integral_test_bound(k: float, eta: float) -> tuple[float, float]:
    """(series value, factorial bound) for sum_i i^k 2^{-i eta} vs
    Gamma(k+1)/(eta ln 2)^{k+1}."""
    x = 2.0 ** (-eta)
    total = 0.0
    term_i = 1
    parts = []
    while True:
        term = term_i**k * x**term_i
        parts.append(term)
        if term_i > 10 and term < 1e-18 * max(total, 1.0):
            break
        total += term
        term_i += 1
        if term_i > 100000:
            break
    series = math.fsum(parts)
    bound = FACTORIAL(k + 1.0) / (eta * math.log(2.0)) ** (k + 1.0)
    return series, bound


def run_necessity_trace(
    phi: PhiFunction,
    psi: PsiFunction,
    domain: DiscretizedDomain,
    x,
    r0: float,
    levels: int = 10,
    c1: float | None = None,
) -> NecessityTrace:
    """Halving-radius iteration R_{i+1} = R~_i recording measures,
    eta_R, the per-level radius-gap data and the density ratios."""
    if phi.mode != "equal":
        raise ValueError("necessity trace needs the equal mode q = p")
    if levels > 40:
        raise ValueError("levels capped at 40")
    x = np.asarray(x, dtype=float)
    f = phi.field
    n = domain.n
    pts = domain.active_centers
    p_all = f.p(pts)
    r_all = f.r(pts)
    p_plus_g, p_minus_g = float(p_all.max()), float(p_all.min())
    if p_plus_g >= n:
        raise ValueError("necessity trace requires sup p < n")
    eta_global = 1.0 / n + 1.0 / p_plus_g - 1.0 / p_minus_g
    r_plus_g = float(r_all.max())
    radii = [float(r0)]
    measures = []
    eta_r = []
    r_plus_a = []
    bound_checks = []
    plain = []
    logged = []
    flags = []
    truncated = False
    a_sup = float(f.a(pts).max())
    c2 = None if c1 is None else 2.0 * c1
    for i in range(levels):
        r_i = radii[-1]
        if r_i < 8.0 * domain.h:
            truncated = True
            flags.append(f"level {i}: radius below 8 cells, stopping")
            break
        m_i, low_conf = domain.ball_measure(x, r_i)
        if m_i <= 0:
            truncated = True
            flags.append(f"level {i}: measure vanished, stopping")
            break
        measures.append(m_i)
        d = np.sqrt(((pts - x[None, :]) ** 2).sum(axis=1))
        in_ball = d <= r_i
        if in_ball.any():
            pa = p_all[in_ball]
            ra = r_all[in_ball]
            eta_here = 1.0 / n + 1.0 / float(pa.max()) - 1.0 / float(pa.min())
            rpa = float(ra.max())
        else:
            eta_here = 1.0 / n
            rpa = 0.0
        eta_r.append(eta_here)
        r_plus_a.append(rpa)
        eta_for_ratio = eta_global if eta_global > 0 else 1.0 / n
        denom_plain = r_i**n
        log_corr = math.log(math.e + 1.0 / r_i) ** (-r_plus_g / eta_for_ratio)
        plain.append(m_i / denom_plain)
        logged.append(m_i / (denom_plain * log_corr))
        r_next = halving_radius(domain, x, r_i)
        gap = r_i - r_next
        if c2 is not None:
            bound = radius_gap_bound(
                _r_sign_regime(r_all[in_ball] if in_ball.any() else r_all),
                c2, a_sup, p_minus_g, n, m_i,
                float(p_all[in_ball].max()) if in_ball.any() else p_plus_g,
                float(p_all[in_ball].min()) if in_ball.any() else p_minus_g,
                rpa,
            )
            bound_checks.append(bound - gap)
        else:
            # implied chain constant: gap / closed-form core, exposed only
            core = radius_gap_bound("nonneg", 1.0, a_sup, p_minus_g, n, m_i,
                                    float(p_all[in_ball].max()) if in_ball.any() else p_plus_g,
                                    float(p_all[in_ball].min()) if in_ball.any() else p_minus_g,
                                    rpa)
            bound_checks.append(gap / core if core > 0 else math.inf)
        radii.append(r_next)
    total = math.fsum(radii[i] - radii[i + 1] for i in range(len(radii) - 1))
    telescoping = abs(total + radii[-1] - radii[0])
    return NecessityTrace(
        x=x,
        r0=float(r0),
        radii=radii,
        measures=measures,
        eta_r=eta_r,
        r_plus_a=r_plus_a,
        bound_checks=bound_checks,
        density_ratio_plain=plain,
        density_ratio_log=logged,
        telescoping_error=float(telescoping),
        truncated=truncated,
        flags=flags,
    )
