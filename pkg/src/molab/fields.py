"""Variable exponents p, q, r and weight a, with regularity estimation.

A field bundles four scalar functions on R^n.  Regularity moduli
(log-Holder, log-log-Holder, Holder(gamma)) are estimated as suprema of
the defining two-point ratio over all pairs from a quasi-uniform sample,
optionally densified near flagged singular points; the estimates are
lower bounds of the true modulus constants and are monotone under sample
refinement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .expressions import eval_expression, parse_expression, print_expression
from .reports import VerificationReport

__all__ = [
    "ScalarField",
    "constant",
    "affine",
    "radial",
    "bump",
    "step",
    "from_expression",
    "ExponentField",
    "SampleRegion",
    "RegularityEstimate",
    "infsup_over",
    "estimate_log_holder",
    "estimate_loglog_holder",
    "estimate_holder",
    "check_nekvinda",
    "check_ball_oscillation_lemma",
]

MAX_PAIRS = 1_000_000  # cap on estimator pair count
PAIR_SEED = 0x5EED


class ScalarField:
    """A scalar function R^n -> R with a serializable spec.

    ``fn`` maps an (M, n) array to (M,).  ``singular_points`` flags
    locations the regularity estimators should densify around.
    """

    def __init__(self, fn, spec: dict, singular_points=()):
        self._fn = fn
        self.spec = spec
        self.singular_points = [np.asarray(s, dtype=float) for s in singular_points]

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.asarray(self._fn(points), dtype=float)
        if out.shape != (points.shape[0],):
            out = np.broadcast_to(out, (points.shape[0],)).astype(float)
        return out

    def at(self, point) -> float:
        return float(self(np.atleast_2d(point))[0])


def constant(value: float) -> ScalarField:
    v = float(value)
    return ScalarField(lambda pts: np.full(pts.shape[0], v), {"kind": "constant", "value": v})


def affine(c0: float, coeffs) -> ScalarField:
    c0 = float(c0)
    coeffs = np.asarray(coeffs, dtype=float)
    return ScalarField(
        lambda pts: c0 + pts @ coeffs,
        {"kind": "affine", "c0": c0, "coeffs": coeffs.tolist()},
    )


def radial(center, c0: float, c1: float, power: float = 1.0) -> ScalarField:
    """c0 + c1 * |x - center|^power."""
    center = np.asarray(center, dtype=float)
    c0, c1, power = float(c0), float(c1), float(power)

    def fn(pts):
        d = np.sqrt(((pts - center[None, :]) ** 2).sum(axis=1))
        return c0 + c1 * d**power

    spec = {"kind": "radial", "center": center.tolist(), "c0": c0, "c1": c1, "power": power}
    sing = [center] if 0 < power < 1 else []
    return ScalarField(fn, spec, singular_points=sing)


def bump(center, radius: float, amplitude: float, c0: float = 0.0) -> ScalarField:
    """Smooth bump: c0 + amplitude * exp(1 - 1/(1 - (d/radius)^2)) inside d < radius."""
    center = np.asarray(center, dtype=float)
    radius, amplitude, c0 = float(radius), float(amplitude), float(c0)

    def fn(pts):
        d2 = ((pts - center[None, :]) ** 2).sum(axis=1) / radius**2
        out = np.full(pts.shape[0], c0)
        inside = d2 < 1.0
        if inside.any():
            out[inside] += amplitude * np.exp(1.0 - 1.0 / (1.0 - d2[inside]))
        return out

    spec = {"kind": "bump", "center": center.tolist(), "radius": radius, "amplitude": amplitude, "c0": c0}
    return ScalarField(fn, spec)


def step(lo: float, hi: float, axis: int = 0, threshold: float = 0.5) -> ScalarField:
    lo, hi, threshold = float(lo), float(hi), float(threshold)
    return ScalarField(
        lambda pts: np.where(pts[:, axis] > threshold, hi, lo),
        {"kind": "step", "lo": lo, "hi": hi, "axis": axis, "threshold": threshold},
    )


def from_expression(text: str, n: int, singular_points=()) -> ScalarField:
    ast = parse_expression(text, n_coords=n)
    return ScalarField(
        lambda pts: eval_expression(ast, pts),
        {"kind": "expr", "text": print_expression(ast)},
        singular_points=singular_points,
    )


def scalar_field_from_spec(spec: dict, n: int) -> ScalarField:
    kind = spec["kind"]
    if kind == "constant":
        return constant(spec["value"])
    if kind == "affine":
        return affine(spec["c0"], spec["coeffs"])
    if kind == "radial":
        return radial(spec["center"], spec["c0"], spec["c1"], spec.get("power", 1.0))
    if kind == "bump":
        return bump(spec["center"], spec["radius"], spec["amplitude"], spec.get("c0", 0.0))
    if kind == "step":
        return step(spec["lo"], spec["hi"], spec.get("axis", 0), spec.get("threshold", 0.5))
    if kind == "expr":
        return from_expression(spec["text"], n)
    raise ValueError(f"unknown field kind {kind!r}")


def _as_field(f) -> ScalarField:
    if isinstance(f, ScalarField):
        return f
    if isinstance(f, (int, float)):
        return constant(f)
    raise TypeError("exponent must be a ScalarField or a number")


class SampleRegion:
    """A finite point sample standing in for a region of R^n.

    Estimators are sample-based: every inf/sup below is taken over
    ``points`` and results state the sample size.
    """

    def __init__(self, points: np.ndarray):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[0] == 0:
            raise ValueError("empty sample set")
        self.points = points

    @property
    def n(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    @classmethod
    def box_grid(cls, bounds, per_axis: int, graded_at=(), graded_levels: int = 12) -> "SampleRegion":
        """Quasi-uniform grid on a box, densified geometrically near
        each point of ``graded_at`` (radii 2^-1 .. 2^-graded_levels)."""
        bounds = np.asarray(bounds, dtype=float)
        axes = [np.linspace(lo, hi, per_axis) for lo, hi in bounds]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        extra = []
        n = bounds.shape[0]
        rng = np.random.default_rng(PAIR_SEED)
        for center in graded_at:
            center = np.asarray(center, dtype=float)
            for level in range(1, graded_levels + 1):
                radius = 2.0 ** (-level)
                shell = rng.standard_normal((8, n))
                shell /= np.linalg.norm(shell, axis=1, keepdims=True)
                cand = center[None, :] + radius * shell
                keep = np.all((cand >= bounds[:, 0]) & (cand <= bounds[:, 1]), axis=1)
                extra.append(cand[keep])
            extra.append(center[None, :])
        if extra:
            pts = np.concatenate([pts] + extra, axis=0)
        return cls(pts)

    @classmethod
    def from_domain(cls, domain, max_points: int = 1400) -> "SampleRegion":
        pts = domain.active_centers
        if pts.shape[0] > max_points:
            stride = int(np.ceil(pts.shape[0] / max_points))
            pts = pts[::stride]
        return cls(pts)


@dataclass
class ExponentField:
    """The exponent tuple (p, q, r, a) with validity checks.

    ``theorem_mode`` enforces 1 <= p <= q and a >= 0 on every probe
    sample; r may take either sign (each consumer states its own sign
    requirement).
    """

    n: int
    p: ScalarField
    q: ScalarField
    r: ScalarField
    a: ScalarField
    theorem_mode: bool = True
    _bounds_cache: dict = dc_field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.p = _as_field(self.p)
        self.q = _as_field(self.q)
        self.r = _as_field(self.r)
        self.a = _as_field(self.a)

    def validate_on(self, points: np.ndarray) -> None:
        p, q, r, a = self.p(points), self.q(points), self.r(points), self.a(points)
        for name, vals in (("p", p), ("q", q), ("r", r), ("a", a)):
            if not np.all(np.isfinite(vals)):
                raise ValueError(f"exponent {name} is not finite on the probe sample")
        if np.any(a < 0):
            raise ValueError("weight a must be nonnegative")
        if self.theorem_mode:
            if np.any(p < 1):
                raise ValueError("theorem-mode field requires p >= 1")
            if np.any(q < p - 1e-12):
                raise ValueError("theorem-mode field requires p <= q pointwise")

    def which(self, name: str) -> ScalarField:
        try:
            return {"p": self.p, "q": self.q, "r": self.r, "a": self.a}[name]
        except KeyError:
            raise ValueError(f"unknown component {name!r}") from None

    def bounds(self, region: SampleRegion) -> dict:
        """Cached sample inf/sup of every component over the region."""
        key = id(region)
        if key not in self._bounds_cache:
            entry = {"sample_size": len(region), "_region": region}
            for name in ("p", "q", "r", "a"):
                vals = self.which(name)(region.points)
                entry[name] = (float(vals.min()), float(vals.max()))
            self._bounds_cache[key] = entry
        return self._bounds_cache[key]

    def to_spec(self) -> dict:
        return {
            "n": self.n,
            "p": self.p.spec,
            "q": self.q.spec,
            "r": self.r.spec,
            "a": self.a.spec,
        }

    @classmethod
    def from_spec(cls, spec: dict, theorem_mode: bool = True) -> "ExponentField":
        n = int(spec["n"])
        return cls(
            n=n,
            p=scalar_field_from_spec(spec["p"], n),
            q=scalar_field_from_spec(spec["q"], n),
            r=scalar_field_from_spec(spec["r"], n),
            a=scalar_field_from_spec(spec["a"], n),
            theorem_mode=theorem_mode,
        )


@dataclass
class RegularityEstimate:
    kind: str  # "log-Holder" | "log-log-Holder" | "Holder" | "Nekvinda"
    constant: float
    witness_pair: tuple  # (x, y) attaining the sample supremum
    gamma: float | None = None
    sample_size: int = 0


def infsup_over(field: ExponentField, region: SampleRegion, which: str) -> tuple[float, float]:
    """Sample infimum and supremum of one component over the region."""
    if len(region) < 1:
        raise ValueError("empty sample set")
    vals = field.which(which)(region.points)
    return float(vals.min()), float(vals.max())


def _pair_indices(m: int, cap: int = MAX_PAIRS) -> tuple[np.ndarray, np.ndarray]:
    """All index pairs i<j, subsampled deterministically past the cap."""
    total = m * (m - 1) // 2
    if total <= cap:
        ii, jj = np.triu_indices(m, k=1)
        return ii, jj
    rng = np.random.default_rng(PAIR_SEED)
    ii = rng.integers(0, m, size=cap)
    jj = rng.integers(0, m, size=cap)
    keep = ii != jj
    return ii[keep], jj[keep]


def _estimate_modulus(field, region, which, weight_fn, kind, gamma=None):
    if len(region) < 2:
        raise ValueError("need at least 2 sample points")
    pts = region.points
    vals = field.which(which)(pts)
    ii, jj = _pair_indices(pts.shape[0])
    dist = np.sqrt(((pts[ii] - pts[jj]) ** 2).sum(axis=1))
    keep = dist > 0
    ii, jj, dist = ii[keep], jj[keep], dist[keep]
    ratio = np.abs(vals[ii] - vals[jj]) * weight_fn(dist)
    k = int(np.argmax(ratio))
    return RegularityEstimate(
        kind=kind,
        constant=float(ratio[k]),
        witness_pair=(pts[ii[k]].copy(), pts[jj[k]].copy()),
        gamma=gamma,
        sample_size=pts.shape[0],
    )


def estimate_log_holder(field: ExponentField, region: SampleRegion, which: str) -> RegularityEstimate:
    """sup |f(x)-f(y)| * log(e + 1/|x-y|) over sampled pairs."""
    return _estimate_modulus(
        field, region, which, lambda d: np.log(np.e + 1.0 / d), "log-Holder"
    )


def estimate_loglog_holder(field: ExponentField, region: SampleRegion, which: str = "r") -> RegularityEstimate:
    """sup |f(x)-f(y)| * log(e + log(e + 1/|x-y|)) over sampled pairs."""
    return _estimate_modulus(
        field, region, which, lambda d: np.log(np.e + np.log(np.e + 1.0 / d)), "log-log-Holder"
    )


def estimate_holder(field: ExponentField, region: SampleRegion, gamma: float, which: str = "a") -> RegularityEstimate:
    """sup |f(x)-f(y)| / |x-y|^gamma over sampled pairs, 0 < gamma <= 1."""
    if not 0 < gamma <= 1:
        raise ValueError("gamma must lie in (0, 1]")
    return _estimate_modulus(
        field, region, which, lambda d: d ** (-gamma), "Holder", gamma=gamma
    )


def check_nekvinda(
    field: ExponentField,
    p_infty: float,
    c: float,
    which: str = "p",
    initial_radius: float = 1.0,
    max_doublings: int = 16,
    cells_per_axis: int = 96,
    rel_tol: float = 1e-8,
) -> tuple[bool, float]:
    """Decay-at-infinity integral test for an exponent on R^n.

    Integrates c^(1/|1/p_infty - 1/p(x)|) over {p != p_infty} on boxes
    [-L, L]^n with L doubling; declares convergence when three
    successive doublings change the value by < rel_tol relative, and
    divergence when shell increments grow instead.
    """
    if not 0 < c < 1:
        raise ValueError("c must lie in (0, 1)")
    n = field.n
    f = field.which(which)
    log_c = math.log(c)

    def box_integral(L, per_axis):
        axes = [np.linspace(-L, L, per_axis, endpoint=False) + L / per_axis for _ in range(n)]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        h = 2 * L / per_axis
        gap = np.abs(1.0 / p_infty - 1.0 / f(pts))
        with np.errstate(divide="ignore"):
            integrand = np.where(gap > 0, np.exp(log_c / np.where(gap > 0, gap, 1.0)), 0.0)
        return float(integrand.sum() * h**n)

    L = initial_radius
    values = [box_integral(L, cells_per_axis)]
    increments = []
    stable = 0
    for _ in range(max_doublings):
        L *= 2
        values.append(box_integral(L, cells_per_axis))
        inc = values[-1] - values[-2]
        increments.append(inc)
        denom = max(abs(values[-1]), 1e-300)
        if abs(inc) / denom < rel_tol:
            stable += 1
            if stable >= 3:
                return True, values[-1]
        else:
            stable = 0
        if len(increments) >= 3 and increments[-1] > increments[-2] > 0 and increments[-2] >= increments[-3] > 0:
            return False, values[-1]
    return False, values[-1]


def ball_oscillation_bound(n: int, c_log: float, p_minus: float) -> float:
    """Upper bound exp(n * C_log * adjustment) for the ball oscillation
    value |B|^(-|1/p(x)-1/p(y)|) on balls with |B| <= 1.

    Derivation: |1/p(x)-1/p(y)| <= (C_log/p_minus^2)/log(e+1/d) with
    d <= 2R, and log(1/|B|) <= n log(1/R) + log⁺(1/omega_n), while
    log(1/R) <= (1+log 2) log(e+1/(2R)) whenever omega_n R^n <= 1.
    """
    omega = unit_ball_volume(n)
    adjustment = (1.0 + math.log(2.0) + max(0.0, math.log(1.0 / omega)) / n) / p_minus**2
    return math.exp(n * c_log * adjustment)


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def check_ball_oscillation_lemma(
    field: ExponentField,
    region: SampleRegion,
    trials: int = 1000,
    c_log: float | None = None,
    seed: int = PAIR_SEED,
    which: str = "p",
) -> VerificationReport:
    """Oscillation of |B|^(1/p) across random small balls.

    For random balls B with |B| <= 1 and sampled x, y in B, records
    sup |B|^(-|1/p(x)-1/p(y)|) and compares it against the log-Holder
    bound from ``ball_oscillation_bound``.  A growing value as balls
    shrink across a discontinuity is the failure signal.
    """
    pts = region.points
    n = field.n
    f = field.which(which)
    vals = f(pts)
    p_minus = float(vals.min())
    if c_log is None:
        c_log = estimate_log_holder(field, region, which).constant
    bound = ball_oscillation_bound(n, c_log, max(p_minus, 1.0))
    omega = unit_ball_volume(n)
    r_max = (1.0 / omega) ** (1.0 / n)
    rng = np.random.default_rng(seed)
    worst = 1.0
    worst_witness = None
    for _ in range(trials):
        center = pts[rng.integers(0, pts.shape[0])]
        radius = r_max * 2.0 ** (-rng.uniform(0.0, 13.0))
        d = np.sqrt(((pts - center[None, :]) ** 2).sum(axis=1))
        inside = np.flatnonzero(d <= radius)
        if inside.shape[0] < 2:
            continue
        sel = inside if inside.shape[0] <= 64 else rng.choice(inside, size=64, replace=False)
        pv = vals[sel]
        gap = float(np.abs(1.0 / pv[:, None] - 1.0 / pv[None, :]).max())
        vol = omega * radius**n
        value = vol ** (-gap)
        if value > worst:
            worst = value
            worst_witness = {"center": center.tolist(), "radius": radius, "gap": gap}
    passed = worst <= bound * (1 + 1e-9)
    return VerificationReport(
        name="ball_oscillation",
        passed=bool(passed),
        worst_margin=float(bound - worst),
        witness=worst_witness or {},
        details={"max_value": worst, "bound": bound, "c_log": c_log, "trials": trials},
        items_checked=trials,
    )
