"""Inequality verdicts, proof tracing, and extremal-quotient search.

Every check evaluates both sides of one inequality on concrete grid data
and returns a :class:`Report` whose holds-flag allows the frozen
discretization tolerance.  Boundary integrals inside checks use calibrated
weights: the raw face weights are rescaled so that their total matches the
covering estimate of the boundary measure (the factor is recorded in the
report metadata).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import calculus as calc
from .constants import TRACE_STEP_TOLERANCES, holds_tolerance
from .domains import BoundaryCloud, GridDomain, extract_boundary, volume
from .errors import (
    DegenerateStartError,
    InvalidArgumentError,
    NoModulusError,
    ResolutionError,
    SupportError,
)
from .hausdorff import build_partition, estimate_hm_detail, partition_defect, unit_ball_volume

__all__ = [
    "Report",
    "TraceStep",
    "TraceReport",
    "iso_constant",
    "paper_boundary_factor",
    "check_isoperimetric",
    "check_sobolev",
    "check_mazya",
    "check_mazya_l2",
    "check_bv_bound",
    "check_brunn_minkowski",
    "check_extended_sobolev",
    "check_perimeter_iso",
    "proof_trace",
    "quotient_search",
    "INEQUALITY_IDS",
]

INEQUALITY_IDS = (
    "mazya",
    "mazya_l2",
    "isoperimetric",
    "sobolev",
    "sobolev_extended",
    "brunn_minkowski",
    "bv_bound",
    "perimeter_iso",
)


@dataclass
class Report:
    """Two sides of one inequality with a tolerance-aware verdict."""

    inequality_id: str
    lhs: float
    rhs: float
    constant_mode: str
    constant_value: float
    tol: float
    holds: bool = field(init=False)
    ratio: float = field(init=False)
    metadata: dict = field(default_factory=dict)
    flipped: bool = False  # true when the verdict checks rhs >= lhs * (1 - tol)

    def __post_init__(self):
        if self.flipped:
            self.holds = self.rhs >= self.lhs * (1.0 - self.tol)
        else:
            self.holds = self.lhs <= self.rhs * (1.0 + self.tol)
        if self.rhs > 0:
            self.ratio = self.lhs / self.rhs
        else:
            self.ratio = 0.0 if self.lhs == 0 else math.inf

    def to_dict(self) -> dict:
        return {
            "inequality_id": self.inequality_id,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "constant_mode": self.constant_mode,
            "constant_value": self.constant_value,
            "ratio": self.ratio,
            "holds": bool(self.holds),
            "tol": self.tol,
            "metadata": self.metadata,
        }


@dataclass
class TraceStep:
    label: str
    lhs: float
    rhs: float
    holds: bool


_TRACE_ORDER = ("main4", "main5", "main6", "prelim_est", "hm_sum_estimate", "main3")


@dataclass
class TraceReport:
    steps: list
    parameters: dict

    def __post_init__(self):
        labels = [s.label for s in self.steps]
        if labels != list(_TRACE_ORDER):
            raise InvalidArgumentError(f"trace steps must be {_TRACE_ORDER}, got {labels}")

    @property
    def all_hold(self) -> bool:
        return all(s.holds for s in self.steps)

    def step(self, label: str) -> TraceStep:
        return next(s for s in self.steps if s.label == label)

    def to_dict(self) -> dict:
        return {
            "parameters": self.parameters,
            "steps": [
                {"label": s.label, "lhs": s.lhs, "rhs": s.rhs, "holds": bool(s.holds)}
                for s in self.steps
            ],
            "all_hold": self.all_hold,
        }


# ---------------------------------------------------------------------------
# constants


def iso_constant(n: int) -> float:
    """Sharp constant 1 / (n * omega_n^(1/n)) of the volume-boundary inequalities.

    Both closed forms are evaluated and must agree to 1e-12 relative.
    """
    if n < 1:
        raise InvalidArgumentError("dimension must be at least 1")
    omega = unit_ball_volume(n)
    value = 1.0 / (n * omega ** (1.0 / n))
    alt = math.gamma(n / 2.0 + 1.0) ** (1.0 / n) / (n * math.sqrt(math.pi))
    if not math.isclose(value, alt, rel_tol=1e-12):
        raise ArithmeticError("closed forms of the sharp constant disagree")
    return value


def paper_boundary_factor(n: int) -> float:
    """Boundary-term factor 2^(n-1) * n * omega_n / omega_(n-1)."""
    if n < 2:
        raise InvalidArgumentError("the boundary factor needs dimension >= 2")
    return 2.0 ** (n - 1) * n * unit_ball_volume(n) / unit_ball_volume(n - 1)


# ---------------------------------------------------------------------------
# calibration helpers

# below this sample count the covering estimator cannot resolve a closed
# boundary at scale 8h; fall back to the exact face-count measure
_MIN_RESOLVED_POINTS_FACTOR = 4


def _boundary_measure(domain: GridDomain, cloud: BoundaryCloud) -> tuple[float, dict]:
    n = domain.dim
    delta = 8.0 * domain.spacing
    meta = {"delta_auto": delta}
    if len(cloud) <= _MIN_RESOLVED_POINTS_FACTOR * n * 2:
        meta["method"] = "face-count fallback (cloud too small to cover)"
        meta["upper_bound"] = False
        return cloud.total_weight, meta
    est = estimate_hm_detail(cloud, n - 1, delta)
    meta.update({"method": est.method, "upper_bound": est.upper_bound, "n_cells": est.n_cells})
    return est.value, meta


def _calibration(domain: GridDomain, cloud: BoundaryCloud) -> tuple[float, dict]:
    measure, meta = _boundary_measure(domain, cloud)
    raw = cloud.total_weight
    factor = measure / raw if raw > 0 else 1.0
    meta = dict(meta)
    meta.update({"boundary_measure": measure, "raw_weight": raw, "calibration_factor": factor})
    return factor, meta


def _tol(inequality_id: str, h: float, tol: float | None) -> float:
    return holds_tolerance(inequality_id, h) if tol is None else float(tol)


# ---------------------------------------------------------------------------
# checks


def check_isoperimetric(domain: GridDomain, tol: float | None = None) -> Report:
    """vol^{(n-1)/n} against c(n) times the boundary measure."""
    n = domain.dim
    vol = volume(domain)
    if vol == 0:
        raise InvalidArgumentError("isoperimetric check needs a nonempty domain")
    cloud = extract_boundary(domain)
    measure, meta = _boundary_measure(domain, cloud)
    c = iso_constant(n)
    lhs = vol ** ((n - 1) / n)
    rhs = c * measure
    meta["h"] = domain.spacing
    return Report("isoperimetric", lhs, rhs, "optimal", c,
                  _tol("isoperimetric", domain.spacing, tol), metadata=meta)


def _require_vanishing_outer_layer(u: calc.GridFunction):
    mask = np.zeros(u.domain.shape, dtype=bool)
    for axis in range(u.domain.dim):
        sl = [slice(None)] * u.domain.dim
        sl[axis] = 0
        mask[tuple(sl)] = True
        sl[axis] = -1
        mask[tuple(sl)] = True
    if np.any(u.values[mask] != 0):
        raise SupportError("function must vanish on the outer grid layer")


def check_sobolev(u: calc.GridFunction, tol: float | None = None) -> Report:
    """L_q norm against c(n) times the gradient mass of the zero extension."""
    _require_vanishing_outer_layer(u)
    n = u.domain.dim
    q = n / (n - 1)
    c = iso_constant(n)
    lhs = calc.lq_norm(u, q)
    rhs = c * calc.total_variation(u)
    meta = {"h": u.domain.spacing, "q": q}
    return Report("sobolev", lhs, rhs, "optimal", c,
                  _tol("sobolev", u.domain.spacing, tol), metadata=meta)


def check_mazya(
    domain: GridDomain,
    u: calc.GridFunction,
    mode: str = "paper_factor",
    tol: float | None = None,
) -> Report:
    """L_q norm against gradient mass plus (factored) boundary-trace mass."""
    if mode not in ("optimal", "paper_factor"):
        raise InvalidArgumentError(f"unknown constant mode {mode!r}")
    n = domain.dim
    q = n / (n - 1)
    c = iso_constant(n)
    factor = 1.0 if mode == "optimal" else paper_boundary_factor(n)
    cal, meta = _calibration(domain, u.cloud if u.cloud is not None else extract_boundary(domain))
    lhs = calc.lq_norm(u, q)
    rhs = c * (calc.grad_l1(u) + factor * calc.boundary_integral(u, calibration=cal))
    meta.update({"h": domain.spacing, "q": q, "boundary_factor": factor})
    return Report("mazya", lhs, rhs, mode, c, _tol("mazya", domain.spacing, tol), metadata=meta)


_AUTO_C1_EXPRS = ("1", "x", "y", "x*y", "x*x+y*y")


def _auto_c1(domain: GridDomain, cloud: BoundaryCloud, cal: float) -> float:
    """Calibrate the L1 bound constant on a fixed small function family."""
    worst = 0.0
    for expr in _AUTO_C1_EXPRS:
        try:
            f = calc.from_expression(domain, expr, cloud)
        except Exception:
            continue
        lhs = calc.lq_norm(f, 1.0)
        rhs = calc.grad_l1(f) + calc.boundary_integral(f, calibration=cal)
        if rhs > 0:
            worst = max(worst, lhs / rhs)
    return max(worst, 1e-6)


def check_mazya_l2(
    domain: GridDomain,
    u: calc.GridFunction,
    c1,
    tol: float | None = None,
) -> Report:
    """Squared L2 norm against 2 c1 (2 c1 |grad u|_2^2 + squared trace mass)."""
    cloud = u.cloud if u.cloud is not None else extract_boundary(domain)
    cal, meta = _calibration(domain, cloud)
    auto = isinstance(c1, str)
    if auto:
        if c1 != "auto":
            raise InvalidArgumentError("c1 must be a positive number or 'auto'")
        c1_val = _auto_c1(domain, cloud, cal)
    else:
        c1_val = float(c1)
    if c1_val <= 0:
        raise InvalidArgumentError("c1 must be positive")
    if u.trace is None:
        raise InvalidArgumentError("the squared-trace term needs a boundary trace")
    lhs = calc.lq_norm(u, 2.0) ** 2
    grad_sq = calc.grad_l2_squared(u)
    trace_sq = float(np.sum(u.trace ** 2 * cloud.weights)) * cal
    rhs = 2.0 * c1_val * (2.0 * c1_val * grad_sq + trace_sq)
    # intermediate bound: int |u| |grad u| <= ||u||_2 * (int |grad u|^2)^(1/2)
    absu = calc.abs_value(u)
    mixed = calc._gradient_mag_squared(absu)
    cauchy_lhs = float(
        np.sum(np.abs(u.values[domain.mask]) * np.sqrt(mixed[domain.mask]))
    ) * domain.spacing ** domain.dim
    cauchy_rhs = calc.lq_norm(u, 2.0) * math.sqrt(grad_sq)
    meta.update(
        {
            "h": domain.spacing,
            "c1": c1_val,
            "c1_auto": auto,
            "cauchy_lhs": cauchy_lhs,
            "cauchy_rhs": cauchy_rhs,
        }
    )
    return Report("mazya_l2", lhs, rhs, "supplied", c1_val,
                  _tol("mazya_l2", domain.spacing, tol), metadata=meta)


def check_bv_bound(domain: GridDomain, u: calc.GridFunction, tol: float | None = None) -> Report:
    """Total variation of the zero extension against interior plus boundary mass."""
    n = domain.dim
    factor = paper_boundary_factor(n)
    cal, meta = _calibration(domain, u.cloud if u.cloud is not None else extract_boundary(domain))
    lhs = calc.total_variation(u)
    rhs = calc.grad_l1(u) + factor * calc.boundary_integral(u, calibration=cal)
    meta.update({"h": domain.spacing, "boundary_factor": factor})
    return Report("bv_bound", lhs, rhs, "paper_factor", factor,
                  _tol("bv_bound", domain.spacing, tol), metadata=meta)


def _minkowski_sum(a: GridDomain, b: GridDomain) -> GridDomain:
    from scipy.signal import fftconvolve

    h = a.spacing
    conv = fftconvolve(a.mask.astype(float), b.mask.astype(float))
    mask = conv > 0.5  # counts are integers >= 1 on the support
    mask = np.pad(mask, 1)
    origin = a.origin + b.origin + 0.5 * h - h
    return GridDomain(h, origin, mask)


def check_brunn_minkowski(a: GridDomain, b: GridDomain, tol: float | None = None) -> Report:
    """Volume-root superadditivity under Minkowski sums (flipped verdict)."""
    if a.dim != b.dim:
        raise InvalidArgumentError("domains must share a dimension")
    if abs(a.spacing - b.spacing) > 1e-12 * a.spacing:
        raise InvalidArgumentError("domains must share the grid spacing")
    n = a.dim
    lhs = volume(a) ** (1.0 / n) + volume(b) ** (1.0 / n)
    vol_sum = volume(_minkowski_sum(a, b))
    rhs = vol_sum ** (1.0 / n)
    meta = {"h": a.spacing, "sum_volume": vol_sum}
    return Report("brunn_minkowski", lhs, rhs, "optimal", 1.0,
                  _tol("brunn_minkowski", a.spacing, tol), metadata=meta, flipped=True)


def check_extended_sobolev(
    u: calc.GridFunction,
    k_list=(4, 8, 16),
    tol: float | None = None,
) -> Report:
    """L_q norm against c(n) times total variation, with a mollified chain.

    For each mollifier index k the report records that the smoothed function
    still satisfies the same bound with the unsmoothed right side, realizing
    the smoothing-limit argument numerically.
    """
    n = u.domain.dim
    q = n / (n - 1)
    c = iso_constant(n)
    tv = calc.total_variation(u)
    lhs = calc.lq_norm(u, q)
    rhs = c * tv
    tol_val = _tol("sobolev_extended", u.domain.spacing, tol)
    chain = []
    for k in k_list:
        try:
            mk = calc.mollify(u, k)
        except Exception as exc:
            chain.append({"k": int(k), "error": str(exc)})
            continue
        lq_k = calc.lq_norm(mk, q)
        chain.append(
            {
                "k": int(k),
                "lq": lq_k,
                "tv_bound": c * tv,
                "holds": bool(lq_k <= c * tv * (1.0 + tol_val)),
            }
        )
    meta = {"h": u.domain.spacing, "tv": tv, "mollified_chain": chain,
            "tv_scheme": "forward-difference l2 magnitude"}
    return Report("sobolev_extended", lhs, rhs, "optimal", c, tol_val, metadata=meta)


def check_perimeter_iso(
    domain: GridDomain,
    eps_list=None,
    tol: float | None = None,
) -> Report:
    """vol^{(n-1)/n} against c(n) times the volume-growth perimeter."""
    n = domain.dim
    h = domain.spacing
    if eps_list is None:
        eps_list = [32 * h, 16 * h, 8 * h]
    steiner = calc.minkowski_steiner(domain, eps_list)
    c = iso_constant(n)
    lhs = volume(domain) ** ((n - 1) / n)
    rhs = c * steiner.perimeter_estimate
    meta = {
        "h": h,
        "quotients": [[e, qv] for e, qv in steiner.quotients],
        "perimeter": steiner.perimeter_estimate,
    }
    return Report("perimeter_iso", lhs, rhs, "optimal", c,
                  _tol("perimeter_iso", h, tol), metadata=meta)


# ---------------------------------------------------------------------------
# proof trace


def proof_trace(
    domain: GridDomain,
    u: calc.GridFunction,
    eps: float,
    s: float | None = None,
) -> TraceReport:
    """Numerically walk the truncation proof of the trace inequality.

    Builds the boundary partition at scale derived from the declared
    modulus of continuity, forms the barrier truncation, and records both
    sides of each labeled step.  The final step reuses the exact code path
    of :func:`check_mazya` in paper-factor mode.
    """
    if u.trace is None or u.cloud is None:
        raise InvalidArgumentError("proof trace needs a function with a boundary trace")
    if (u.values[domain.mask] < 0).any() or (u.trace < 0).any():
        raise InvalidArgumentError("proof trace expects a nonnegative function")
    if u.lipschitz is None:
        raise NoModulusError("proof trace needs a declared modulus of continuity")
    h = domain.spacing
    if eps <= 0:
        raise InvalidArgumentError("eps must be positive")
    if eps < 16 * h:
        raise InvalidArgumentError("eps must be at least 16 grid spacings")
    n = domain.dim
    q = n / (n - 1)
    lips = u.lipschitz
    # scale on which u oscillates less than eps, shrunk so that barrier
    # supports (radius <= 1.5 delta plus sampling slack) stay inside the
    # eps-neighborhood of the boundary
    delta = 0.6 * min(eps, eps / lips if lips > 0 else eps)
    if delta < 6 * h:
        raise ResolutionError(
            "the continuity scale derived from eps and the declared modulus "
            "is below six grid spacings; barrier shells would be unresolvable"
        )
    if s is None:
        s = delta / 4.0
    if not 0 < s < delta / 2:
        raise InvalidArgumentError("need 0 < s < delta/2 for the derived delta")
    part = build_partition(u.cloud, n - 1, delta)
    u_t = calc.truncate(u, part, eps, s)

    heights = np.array([u.trace[c.x_index] + eps for c in part.cells])
    diams = np.array([2.0 * c.rd for c in part.cells])
    rds = np.array([c.rd for c in part.cells])

    # shell masses: discrete on the grid versus the closed formula
    main5_lhs = float(
        np.sum(
            [
                calc.shell_gradient_discrete(c.x_c, d, s, ht, domain)
                for c, d, ht in zip(part.cells, diams, heights)
            ]
        )
    )
    main5_rhs = float(np.sum([calc.shell_mass(d, s, ht, n) for d, ht in zip(diams, heights)]))

    grad_u = calc.grad_l1(u)
    main4_lhs = calc.grad_l1(u_t)
    main4_rhs = grad_u + main5_rhs

    main6_lhs = calc.lq_norm(u_t, q)
    main6_rhs = iso_constant(n) * calc.total_variation(u_t)

    # zero-width limit of the shells
    limit_sum = float(np.sum([calc.shell_mass_limit(d, ht, n) for d, ht in zip(diams, heights)]))
    inner = calc.interior_region(domain, eps)
    restricted = np.where(inner & domain.mask, u.values, 0.0)
    prelim_lhs = float(np.sum(np.abs(restricted) ** q) * h ** n) ** (1.0 / q)
    prelim_rhs = iso_constant(n) * (grad_u + limit_sum)

    # partition certificate bounding the shell sum by boundary mass
    omega = unit_ball_volume(n - 1)
    hs_lhs = float(np.sum(heights * omega * rds ** (n - 1)))
    defect = partition_defect(part, n - 1)
    sup_u = float(np.max(u.trace, initial=0.0))
    hs_rhs = (sup_u + eps) * defect + float(
        np.sum((np.abs(u.trace) + 2.0 * eps) * u.cloud.weights)
    )

    mazya = check_mazya(domain, u, mode="paper_factor")

    def step(label, lhs, rhs, two_sided=False):
        t = TRACE_STEP_TOLERANCES[label]
        if two_sided:
            ok = abs(lhs - rhs) <= t * max(abs(rhs), 1e-300)
        else:
            ok = lhs <= rhs * (1.0 + t)
        return TraceStep(label, lhs, rhs, bool(ok))

    steps = [
        step("main4", main4_lhs, main4_rhs),
        step("main5", main5_lhs, main5_rhs, two_sided=True),
        step("main6", main6_lhs, main6_rhs),
        step("prelim_est", prelim_lhs, prelim_rhs),
        step("hm_sum_estimate", hs_lhs, hs_rhs),
        step("main3", mazya.lhs, mazya.rhs),
    ]
    params = {
        "eps": eps,
        "delta": delta,
        "s": s,
        "partition_cells": len(part),
        "partition_rd_max": part.rd_max,
        "partition_defect": defect,
        "mazya_report": mazya.to_dict(),
    }
    return TraceReport(steps=steps, parameters=params)


# ---------------------------------------------------------------------------
# extremal-quotient search


def _env_seed() -> int:
    try:
        return int(os.environ.get("GMT_SEED", "0"))
    except ValueError:
        return 0


def quotient_search(
    domain: GridDomain,
    u0: calc.GridFunction,
    iters: int,
    step: float,
    seed: int | None = None,
):
    """Coordinate ascent on the trace-inequality quotient.

    Maximizes Q(u) = |u|_q / (grad mass + factor * boundary mass) by
    perturbing one cell or trace value at a time, keeping improvements, and
    renormalizing after every sweep.  Returns (best function, best Q) with
    the per-sweep history in the function metadata.  The quotient may never
    exceed the sharp constant by more than five percent.
    """
    if iters < 1 or step < 0:
        raise InvalidArgumentError("need iters >= 1 and step >= 0")
    if u0.trace is None or u0.cloud is None:
        raise InvalidArgumentError("quotient search needs a boundary trace")
    mask = domain.mask
    if (u0.values[mask] < 0).any() or (u0.trace < 0).any():
        raise InvalidArgumentError("quotient search expects a nonnegative start")
    if u0.max_abs() == 0:
        raise DegenerateStartError("all-zero start function")
    rng = np.random.default_rng(_env_seed() if seed is None else seed)
    n = domain.dim
    h = domain.spacing
    q = n / (n - 1)
    factor = paper_boundary_factor(n)
    cal, _ = _calibration(domain, u0.cloud)
    c_bound = iso_constant(n) * 1.05

    cloud = u0.cloud
    cell_idx = np.argwhere(mask)
    n_cells = len(cell_idx)
    flat_of = {tuple(ix): i for i, ix in enumerate(map(tuple, cell_idx))}
    vals = u0.values[mask].astype(float).copy()
    trace = u0.trace.astype(float).copy()
    w_cal = cloud.weights * cal

    # neighbor tables: forward cell or trace per axis, backward cell or trace
    fwd_cell = np.full((n_cells, n), -1, dtype=np.int64)
    fwd_trace = np.full((n_cells, n), -1, dtype=np.int64)
    bwd_cell = np.full((n_cells, n), -1, dtype=np.int64)
    bwd_trace = np.full((n_cells, n), -1, dtype=np.int64)
    for i, ix in enumerate(cell_idx):
        for a in range(n):
            nxt = tuple(ix + np.eye(n, dtype=int)[a])
            prv = tuple(ix - np.eye(n, dtype=int)[a])
            if nxt in flat_of:
                fwd_cell[i, a] = flat_of[nxt]
            if prv in flat_of:
                bwd_cell[i, a] = flat_of[prv]
    trace_owner = np.full(len(cloud), -1, dtype=np.int64)
    if cloud.face_cells is not None:
        for j in range(len(cloud)):
            owner = flat_of.get(tuple(cloud.face_cells[j]))
            if owner is None:
                continue
            trace_owner[j] = owner
            if cloud.face_signs[j] == 1:
                fwd_trace[owner, cloud.face_axes[j]] = j
            else:
                bwd_trace[owner, cloud.face_axes[j]] = j

    hn = h ** n

    def cell_grad(i) -> float:
        acc = 0.0
        for a in range(n):
            fc = fwd_cell[i, a]
            if fc >= 0:
                d = (vals[fc] - vals[i]) / h
            else:
                ft = fwd_trace[i, a]
                d = (trace[ft] - vals[i]) / (h / 2.0) if ft >= 0 else 0.0
            acc += d * d
            if bwd_cell[i, a] < 0:
                bt = bwd_trace[i, a]
                if bt >= 0:
                    e = (vals[i] - trace[bt]) / (h / 2.0)
                    acc += e * e
        return math.sqrt(acc)

    grad_mag = np.array([cell_grad(i) for i in range(n_cells)])

    def full_sums():
        g = float(np.sum(grad_mag)) * hn
        b = float(np.sum(np.abs(trace) * w_cal))
        num = float(np.sum(np.abs(vals) ** q)) * hn
        return g, b, num

    def q_of(g, b, num) -> float:
        den = g + factor * b
        if den <= 0:
            return math.inf if num > 0 else 0.0
        return num ** (1.0 / q) / den

    g_sum, b_sum, num_sum = full_sums()
    q_cur = q_of(g_sum, b_sum, num_sum)
    history = [q_cur]

    def touched_by_cell(i):
        out = [i]
        for a in range(n):
            bc = bwd_cell[i, a]
            if bc >= 0:
                out.append(int(bc))
        return out

    for sweep in range(iters):
        scale = max(float(np.max(vals, initial=0.0)), float(np.max(trace, initial=0.0)), 1e-12)
        order = rng.permutation(n_cells + len(trace))
        for coord in order:
            if coord < n_cells:
                i = int(coord)
                affected = touched_by_cell(i)
                old_val = vals[i]
                old_mags = [grad_mag[j] for j in affected]
                for sgn in (1.0, -1.0):
                    cand = max(0.0, old_val + sgn * step * scale)
                    if cand == old_val:
                        continue
                    vals[i] = cand
                    new_num = num_sum + (abs(cand) ** q - abs(old_val) ** q) * hn
                    new_g = g_sum
                    new_mags = []
                    for j in affected:
                        mg = cell_grad(j)
                        new_mags.append(mg)
                        new_g += (mg - grad_mag[j]) * hn
                    if q_of(new_g, b_sum, new_num) > q_cur:
                        num_sum, g_sum = new_num, new_g
                        for j, mg in zip(affected, new_mags):
                            grad_mag[j] = mg
                        q_cur = q_of(g_sum, b_sum, num_sum)
                        break
                    vals[i] = old_val
                    for j, mg in zip(affected, old_mags):
                        grad_mag[j] = mg
            else:
                j = int(coord - n_cells)
                old_val = trace[j]
                owner = trace_owner[j]
                old_mag = grad_mag[owner] if owner >= 0 else 0.0
                for sgn in (1.0, -1.0):
                    cand = max(0.0, old_val + sgn * step * scale)
                    if cand == old_val:
                        continue
                    trace[j] = cand
                    new_b = b_sum + (abs(cand) - abs(old_val)) * w_cal[j]
                    new_g = g_sum
                    new_mag = old_mag
                    if owner >= 0:
                        new_mag = cell_grad(owner)
                        new_g += (new_mag - old_mag) * hn
                    if q_of(new_g, new_b, num_sum) > q_cur:
                        b_sum, g_sum = new_b, new_g
                        if owner >= 0:
                            grad_mag[owner] = new_mag
                        q_cur = q_of(g_sum, b_sum, num_sum)
                        break
                    trace[j] = old_val
                    if owner >= 0:
                        grad_mag[owner] = old_mag
        # renormalize the q-norm to one (the quotient is scale invariant)
        norm = num_sum ** (1.0 / q)
        if norm > 0:
            vals /= norm
            trace /= norm
        grad_mag = np.array([cell_grad(i) for i in range(n_cells)])
        g_sum, b_sum, num_sum = full_sums()
        q_new = q_of(g_sum, b_sum, num_sum)
        if q_new < q_cur * (1.0 - 1e-9):
            raise ArithmeticError("quotient decreased across a sweep")
        q_cur = q_new
        if q_cur > c_bound:
            raise ArithmeticError(
                f"quotient {q_cur} exceeded the sharp bound {c_bound}; discretization broke"
            )
        history.append(q_cur)

    out_values = np.zeros(domain.shape)
    out_values[mask] = vals
    best = calc.GridFunction(domain, out_values, cloud, trace)
    best.metadata.update({"sweep_history": history, "calibration_factor": cal})
    return best, q_cur
