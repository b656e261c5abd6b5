"""Scenario configs, the built-in gallery and the task dispatcher.

A scenario is a single JSON document (schema below).  Runs are fully
deterministic: the same config and seed produce byte-identical report
payloads, and the report embeds the config hash, grid resolution, seed
and library version so archived runs stay diffable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import __version__
from .conditions import (
    a1_qholder_constant,
    verify_A0,
    verify_A1_equivalent,
    verify_A2_prime,
)
from .embedding import (
    certify_sufficiency,
    check_indicator_norm_bounds,
    compute_r0_threshold,
    make_cutoff,
    run_embedding_trials,
    run_necessity_trace,
)
from .fields import (
    ExponentField,
    SampleRegion,
    estimate_holder,
    estimate_log_holder,
    scalar_field_from_spec,
)
from .geometry import gallery_domain, halving_radius, scan_measure_density, GALLERY
from .norms import SampledFunction, luxemburg_norm, sobolev_norm
from .phi import PhiFunction, check_inc_dec, make_target_psi
from .reports import SCHEMA_VERSION, config_hash, table

__all__ = ["Scenario", "FIELD_GALLERY", "CONFIG_SCHEMA", "validate_config", "run_scenario", "build_field", "build_domain"]


FIELD_GALLERY = {
    # plain variable-exponent shapes (r >= 0 unless noted)
    "const_p2": {
        "n": 2,
        "p": {"kind": "constant", "value": 2.0},
        "q": {"kind": "constant", "value": 2.0},
        "r": {"kind": "constant", "value": 0.0},
        "a": {"kind": "constant", "value": 0.0},
    },
    "equal_log": {
        "n": 2,
        "p": {"kind": "constant", "value": 1.5},
        "q": {"kind": "constant", "value": 1.5},
        "r": {"kind": "constant", "value": 1.0},
        "a": {"kind": "constant", "value": 1.0},
    },
    "affine_dp": {
        "n": 2,
        "p": {"kind": "affine", "c0": 1.8, "coeffs": [0.2, 0.0]},
        "q": {"kind": "constant", "value": 2.0},
        "r": {"kind": "constant", "value": 1.0},
        "a": {"kind": "radial", "center": [0.5, 0.5], "c0": 0.0, "c1": 0.5, "power": 2.0},
    },
    "sine_dp": {
        "n": 2,
        "p": {"kind": "expr", "text": "2 + 0.2*sin(pi*x1)"},
        "q": {"kind": "constant", "value": 2.2},
        "r": {"kind": "constant", "value": 0.5},
        "a": {"kind": "bump", "center": [0.5, 0.5], "radius": 0.4, "amplitude": 1.0, "c0": 0.0},
    },
    "heavy_log": {
        "n": 2,
        "p": {"kind": "constant", "value": 3.0},
        "q": {"kind": "constant", "value": 3.0},
        "r": {"kind": "constant", "value": 2.0},
        "a": {"kind": "constant", "value": 5.0},
    },
    "neg_r": {
        "n": 2,
        "p": {"kind": "constant", "value": 2.0},
        "q": {"kind": "constant", "value": 2.0},
        "r": {"kind": "constant", "value": -1.0},
        "a": {"kind": "constant", "value": 1.0},
    },
    "mixed_r": {
        "n": 2,
        "p": {"kind": "constant", "value": 2.0},
        "q": {"kind": "constant", "value": 2.0},
        "r": {"kind": "step", "lo": -1.0, "hi": 1.0, "axis": 0, "threshold": 0.5},
        "a": {"kind": "constant", "value": 0.5},
    },
    "lipschitz_a_q1": {
        "n": 2,
        "p": {"kind": "constant", "value": 1.0},
        "q": {"kind": "constant", "value": 1.0},
        "r": {"kind": "constant", "value": 0.0},
        "a": {"kind": "expr", "text": "abs(x1 - 0.4)"},
    },
    "step_a": {
        "n": 2,
        "p": {"kind": "constant", "value": 1.0},
        "q": {"kind": "constant", "value": 1.0},
        "r": {"kind": "constant", "value": 0.0},
        "a": {"kind": "step", "lo": 0.0, "hi": 1.0, "axis": 0, "threshold": 0.5},
    },
    "cube_p2": {
        "n": 3,
        "p": {"kind": "constant", "value": 2.0},
        "q": {"kind": "constant", "value": 2.0},
        "r": {"kind": "constant", "value": 0.0},
        "a": {"kind": "constant", "value": 0.0},
    },
    "holder3d": {
        "n": 3,
        "p": {"kind": "affine", "c0": 1.7, "coeffs": [0.1, 0.0, 0.0]},
        "q": {"kind": "expr", "text": "1.1*(1.7 + 0.1*x1)"},
        "r": {"kind": "constant", "value": 0.8},
        "a": {"kind": "expr", "text": "0.5*pow(abs(x3 - 0.5), 0.75)"},
    },
    "cusp_equal": {
        "n": 2,
        "p": {"kind": "constant", "value": 1.5},
        "q": {"kind": "constant", "value": 1.5},
        "r": {"kind": "constant", "value": 1.0},
        "a": {"kind": "constant", "value": 1.0},
    },
}


_FIELD_COMPONENT = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["constant", "affine", "radial", "bump", "step", "expr"]},
    },
    "required": ["kind"],
}

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "domain": {
            "type": "object",
            "properties": {
                "gallery": {"enum": sorted(GALLERY)},
                "resolution": {"type": "integer", "minimum": 8},
                "params": {"type": "object"},
                "boundary_subsamples": {"type": "integer", "minimum": 16},
            },
            "required": ["gallery"],
        },
        "field": {
            "type": "object",
            "oneOf": [
                {"properties": {"gallery": {"enum": sorted(FIELD_GALLERY)}}, "required": ["gallery"]},
                {
                    "properties": {
                        "n": {"enum": [2, 3]},
                        "p": _FIELD_COMPONENT,
                        "q": _FIELD_COMPONENT,
                        "r": _FIELD_COMPONENT,
                        "a": _FIELD_COMPONENT,
                    },
                    "required": ["n", "p", "q", "r", "a"],
                },
            ],
        },
        "phi_mode": {"enum": ["general", "equal"]},
        "task": {
            "type": "object",
            "properties": {
                "kind": {
                    "enum": ["norm", "conditions", "indicator-bounds", "density-scan", "embed", "necessity"]
                }
            },
            "required": ["kind"],
        },
        "emit_csv": {"type": "boolean"},
    },
    "required": ["schema_version", "name", "seed", "domain", "field", "phi_mode", "task"],
}


@dataclass
class Scenario:
    name: str
    field_spec: dict
    domain_spec: dict
    phi_mode: str
    task: dict
    seed: int

    @classmethod
    def from_config(cls, config: dict) -> "Scenario":
        return cls(
            name=config["name"],
            field_spec=config["field"],
            domain_spec=config["domain"],
            phi_mode=config["phi_mode"],
            task=config["task"],
            seed=int(config["seed"]),
        )


def validate_config(config: dict) -> list[str]:
    import jsonschema

    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    return [f"{'/'.join(str(p) for p in e.path) or '<root>'}: {e.message}" for e in validator.iter_errors(config)]


def build_field(spec: dict) -> ExponentField:
    if "gallery" in spec:
        spec = FIELD_GALLERY[spec["gallery"]]
    theorem_mode = True
    return ExponentField.from_spec(spec, theorem_mode=theorem_mode)


def build_domain(spec: dict, resolution_override: int | None = None):
    resolution = resolution_override or spec.get("resolution")
    return gallery_domain(
        spec["gallery"],
        resolution=resolution,
        params=spec.get("params"),
        boundary_subsamples=spec.get("boundary_subsamples", 1024),
    )


def run_scenario(config: dict, overrides: dict | None = None) -> dict:
    """Execute one scenario; returns the report document."""
    overrides = dict(overrides or {})
    effective = dict(config)
    if "seed" in overrides:
        effective = {**effective, "seed": overrides["seed"]}
    if "resolution" in overrides:
        dom = dict(effective["domain"])
        dom["resolution"] = overrides["resolution"]
        effective = {**effective, "domain": dom}
    errors = validate_config(effective)
    if errors:
        raise ValueError("config validation failed: " + "; ".join(errors))
    scenario = Scenario.from_config(effective)

    domain = build_domain(scenario.domain_spec)
    field = build_field(scenario.field_spec)
    if field.n != domain.n:
        raise ValueError("field dimension does not match the domain")
    phi = PhiFunction(field=field, mode=scenario.phi_mode)
    region = SampleRegion.from_domain(domain)
    rng = np.random.default_rng(scenario.seed)

    sub_reports = []
    tables = {}
    kind = scenario.task["kind"]
    runner = {
        "norm": _task_norm,
        "conditions": _task_conditions,
        "indicator-bounds": _task_indicator,
        "density-scan": _task_density,
        "embed": _task_embed,
        "necessity": _task_necessity,
    }[kind]
    runner(scenario, phi, domain, region, rng, sub_reports, tables)

    status = "pass" if all(s.get("passed", True) for s in sub_reports) else "fail"
    report = {
        "schema_version": SCHEMA_VERSION,
        "library_version": __version__,
        "config_hash": config_hash(effective),
        "name": scenario.name,
        "seed": scenario.seed,
        "task": kind,
        "resolution": domain.resolution,
        "overrides": overrides,
        "status": status,
        "sub_reports": sub_reports,
        "tables": tables,
    }
    return report


# ---------------------------------------------------------------------------
# task runners


def _as_dict(report) -> dict:
    return report.to_dict() if hasattr(report, "to_dict") else dict(report)


def _task_norm(scenario, phi, domain, region, rng, sub_reports, tables):
    task = scenario.task
    u_field = scalar_field_from_spec(task["u"], domain.n)
    grad_spec = task.get("grad")
    values = u_field(domain.active_centers)
    grad = None
    if grad_spec is not None:
        grad = scalar_field_from_spec(grad_spec, domain.n)(domain.active_centers)
    u = SampledFunction(domain=domain, values=values, grad_norm=grad)
    res = luxemburg_norm(phi, u)
    rows = [["luxemburg", res.value, res.modular_at_value, res.iterations]]
    if grad is not None:
        res_w = sobolev_norm(phi, u)
        rows.append(["sobolev", res_w.value, res_w.modular_at_value, res_w.iterations])
    tables["norms"] = table(["which", "value", "modular_at_value", "iterations"], rows)
    ok = res.value == 0.0 or abs(res.modular_at_value - 1.0) <= 1e-8
    sub_reports.append(
        {"name": "norm", "passed": bool(ok), "value": res.value, "modular_at_value": res.modular_at_value}
    )


def _task_conditions(scenario, phi, domain, region, rng, sub_reports, tables):
    task = scenario.task
    f = phi.field
    pts = region.points
    sub_reports.append(_as_dict(verify_A0(phi, region)))
    p_minus = float(f.p(pts).min())
    q_plus = float(f.q(pts).max())
    r_plus = float(f.r(pts).max())
    sub_reports.append(_as_dict(check_inc_dec(phi, region, exponents=(p_minus, q_plus + r_plus))))
    sub_reports.append(_as_dict(verify_A2_prime(phi, region, mode="bounded", domain=domain)))
    beta = task.get("a1_beta")
    if beta is None:
        c_a = estimate_holder(f, region, min(q_plus, 1.0), "a").constant
        c_q = estimate_log_holder(f, region, "q").constant
        big_c = a1_qholder_constant(float(f.q(pts).min()), q_plus, float(f.a(pts).max()), c_a, c_q)
        beta = min(1.0, 1.0 / big_c) if big_c > 0 else 1.0
    sub_reports.append(_as_dict(verify_A1_equivalent(f, region, beta)))


def _random_cell_union(domain, rng, max_measure: float, pieces: int = 3) -> np.ndarray:
    """Union of random index-space boxes, trimmed under max_measure."""
    centers = domain.active_centers
    box = domain.bounding_box
    mask = np.zeros(centers.shape[0], dtype=bool)
    for _ in range(pieces):
        lo = box[:, 0] + rng.random(domain.n) * 0.8 * (box[:, 1] - box[:, 0])
        width = 0.05 + 0.25 * rng.random(domain.n)
        hi = lo + width * (box[:, 1] - box[:, 0])
        mask |= np.all((centers >= lo) & (centers <= hi), axis=1)
    while float(domain.quad_weights[mask].sum()) > max_measure and mask.any():
        idx = np.flatnonzero(mask)
        mask[idx[: max(1, idx.size // 4)]] = False
    return mask


def _task_indicator(scenario, phi, domain, region, rng, sub_reports, tables):
    task = scenario.task
    regime = task.get("regime", "nonneg")
    count = int(task.get("count", 100))
    cap = 0.45 if regime == "mixed" else 0.9
    masks = []
    while len(masks) < count:
        m = _random_cell_union(domain, rng, cap)
        if m.any():
            masks.append(m)
    rep = check_indicator_norm_bounds(phi, domain, masks, regime)
    sub_reports.append(_as_dict(rep))


def _task_density(scenario, phi, domain, region, rng, sub_reports, tables):
    task = scenario.task
    s = float(task.get("s", domain.n))
    alpha = float(task.get("alpha", 0.0))
    r_min = float(task.get("r_min", 1e-3))
    r_max = float(task.get("r_max", 0.5))
    r_count = int(task.get("r_count", 10))
    scan = scan_measure_density(domain, s, alpha, np.geomspace(r_min, r_max, r_count))
    tables["density_scan"] = scan.table
    sub_reports.append(
        {
            "name": "density_scan",
            "passed": bool(scan.c_hat > 0),
            "c_hat": scan.c_hat,
            "fitted_decay": scan.fitted_decay,
            "monotone_in_r": scan.monotone_in_r,
            "low_confidence_rows": scan.low_confidence_rows,
        }
    )


def _task_embed(scenario, phi, domain, region, rng, sub_reports, tables):
    task = scenario.task
    case = task.get("case", "i")
    gamma = task.get("gamma")
    count = int(task.get("count", 50))
    cert = certify_sufficiency(phi, domain, case=case, gamma=gamma)
    for key in ("A0", "A1", "A2", "inc_dec"):
        sub_reports.append(_as_dict(cert[key]))
    sub_reports.append({"name": "field_hypotheses", "passed": bool(cert["certified"]), **cert["field_checks"]})
    trials = run_embedding_trials(phi, domain, count=count, certification=cert, case=case, gamma=gamma)
    rows = [[t.name, t.lhs, t.rhs, t.ratio] for t in trials]
    tables["embedding_trials"] = table(["name", "lhs_psi", "rhs_w1phi", "ratio"], rows)
    max_ratio = max((t.ratio for t in trials), default=0.0)
    sub_reports.append(
        {
            "name": "embedding_trials",
            "passed": bool(math.isfinite(max_ratio) and trials),
            "max_ratio": max_ratio,
            "count": len(trials),
        }
    )


def _task_necessity(scenario, phi, domain, region, rng, sub_reports, tables):
    task = scenario.task
    x = np.asarray(task.get("x", domain.boundary_samples[0]), dtype=float)
    r0 = float(task.get("r0", 0.25))
    levels = int(task.get("levels", 10))
    psi = make_target_psi(phi)
    c_log = estimate_log_holder(phi.field, region, "p").constant
    thresholds = compute_r0_threshold(c_log, domain.n)
    trace = run_necessity_trace(phi, psi, domain, x, r0, levels=levels)
    rows = []
    for i in range(len(trace.measures)):
        rows.append(
            [
                i,
                trace.radii[i],
                trace.measures[i],
                trace.eta_r[i],
                trace.r_plus_a[i],
                trace.density_ratio_plain[i],
                trace.density_ratio_log[i],
                trace.bound_checks[i],
            ]
        )
    tables["necessity_trace"] = table(
        ["level", "R", "measure", "eta_R", "r_plus_A", "density_ratio_plain", "density_ratio_log", "bound_check"],
        rows,
    )
    sub_reports.append(
        {
            "name": "necessity_trace",
            "passed": bool(trace.telescoping_error < 1e-6),
            "telescoping_error": trace.telescoping_error,
            "truncated": trace.truncated,
            "flags": trace.flags,
            "r0_threshold": thresholds,
        }
    )
    if task.get("embed_sweep", False):
        rows = []
        sweep = np.geomspace(r0, 1e-3, int(task.get("sweep_count", 9)))
        for radius in sweep:
            try:
                r_tilde = halving_radius(domain, x, float(radius))
            except ValueError:
                rows.append([float(radius), 0.0, 0.0, 0.0, 0.0])
                continue
            u = make_cutoff(domain, x, float(radius), r_tilde)
            lhs = luxemburg_norm(psi, u).value
            rhs = sobolev_norm(phi, u).value
            ratio = lhs / rhs if rhs > 0 else 0.0
            rows.append([float(radius), r_tilde, lhs, rhs, ratio])
        tables["cutoff_embedding_sweep"] = table(["R", "R_tilde", "lhs_psi", "rhs_w1phi", "ratio"], rows)
        ratios = [r[4] for r in rows if r[4] > 0]
        sub_reports.append(
            {
                "name": "cutoff_embedding_sweep",
                "passed": bool(ratios),
                "max_ratio": max(ratios, default=0.0),
                "first_ratio": ratios[0] if ratios else 0.0,
            }
        )
