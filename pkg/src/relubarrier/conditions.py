"""Deciding the certificate conditions region by region.

Every per-region question is phrased as "is min g(x) over the region's
level-set patch >= -tol_margin?":

* invariance: g = w . f   (the piece's gradient against the field)
* initial set:  g = -h_I  (the set function must stay <= 0 on the patch)
* unsafe set:   g = -h_U

Affine objectives are decided exactly by one LP.  Nonlinear ones run a
derivative-free falsification search first (cheap witnesses), then an
interval branch-and-bound over the patch's bounding box for verification.
Set conditions additionally probe one sample of the set against the sign
of h (membership side of the containment/disjointness arguments).
"""

from __future__ import annotations

import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_CONFIG, VerifierConfig
from .errors import NoRegions, SamplerExhausted, SearchExhausted
from .expressions import (DynamicsSystem, Expr, evaluate, interval_evaluate,
                          is_affine, _linear_form)
from .geometry import bounding_box
from .linprog import LpProblem, lp_solve, INFEASIBLE, OPTIMAL, UNBOUNDED
from .regions import (EnumerationResult, ValidRegion, boundary_propagation,
                      find_initial_region, set_guided_sampler)

VERIFIED = "verified"
FALSIFIED = "falsified"
UNKNOWN = "unknown"


@dataclass
class RegionVerdict:
    indicator: object
    status: str
    method: str
    bound: float | None = None
    witness: np.ndarray | None = None
    witness_value: float | None = None
    vacuous: bool = False
    domain_restricted: bool = False
    note: str = ""


@dataclass
class MembershipProbe:
    point: np.ndarray
    set_value: float
    h_value: float
    ok: bool
    samples: int


@dataclass
class ConditionResult:
    status: str
    region_verdicts: list[RegionVerdict]
    probe: MembershipProbe | None = None
    note: str = ""


@dataclass
class CertificateVerdict:
    invariance: str
    initial_condition: str
    unsafe_condition: str
    overall: str
    invariance_result: ConditionResult | None = None
    initial_result: ConditionResult | None = None
    unsafe_result: ConditionResult | None = None
    enumeration: EnumerationResult | None = None
    search_meta: dict = field(default_factory=dict)
    caveats: list[str] = field(default_factory=list)
    failure: dict | None = None
    timings: dict = field(default_factory=dict)


# -- objective plumbing ----------------------------------------------------------

def _weighted_objective(coefs, exprs):
    """g(x) = sum_i coefs[i] * exprs[i](x) as point and interval callables."""
    coefs = np.asarray(coefs, dtype=float)

    def g_point(x):
        return float(sum(c * evaluate(e, x) for c, e in zip(coefs, exprs) if c != 0.0))

    def g_interval(box):
        lo = hi = 0.0
        for c, e in zip(coefs, exprs):
            if c == 0.0:
                continue
            iv = interval_evaluate(e, box)
            lo += min(c * iv.lo, c * iv.hi)
            hi += max(c * iv.lo, c * iv.hi)
        return lo, hi

    return g_point, g_interval


def _status_from_value(value, cfg):
    """Margin semantics shared by every route."""
    if value >= -cfg.tol_margin:
        return VERIFIED
    if value < -max(cfg.tol_margin, cfg.falsify_gate):
        return FALSIFIED
    return UNKNOWN  # inside the float-noise band


# -- LP route (affine objectives) --------------------------------------------------

def _decide_affine(region: ValidRegion, coeffs, const, cfg) -> RegionVerdict:
    """Exact decision of min (coeffs.x + const) over the slice by one LP."""
    sl = region.slice
    outcome = sl.minimize(np.asarray(coeffs, dtype=float), cfg.tol_feas)
    if outcome.status == INFEASIBLE:
        return RegionVerdict(region.indicator, VERIFIED, "lp", vacuous=True,
                             note="slice empty")
    if outcome.status == UNBOUNDED:
        # objective decreases without bound along the slice; exhibit a point
        big = 1e6
        boxed = LpProblem(np.asarray(coeffs, dtype=float),
                          np.vstack([sl.base.A, np.eye(sl.base.dim), -np.eye(sl.base.dim)]),
                          np.concatenate([sl.base.d, np.full(sl.base.dim, big),
                                          np.full(sl.base.dim, big)]),
                          sl.w[None, :], np.array([-sl.b]))
        inner = lp_solve(boxed, tol_feas=cfg.tol_feas)
        witness = inner.point if inner.optimal else None
        value = (float(np.asarray(coeffs) @ witness) + const) if witness is not None else None
        return RegionVerdict(region.indicator, FALSIFIED, "lp", witness=witness,
                             witness_value=value, note="objective unbounded below")
    value = outcome.value + const
    status = _status_from_value(value, cfg)
    verdict = RegionVerdict(region.indicator, status, "lp", bound=value)
    if status == FALSIFIED:
        verdict.witness = outcome.point
        verdict.witness_value = value
    elif status == UNKNOWN:
        verdict.note = "optimum inside the float-noise band"
    return verdict


def check_region_affine(region: ValidRegion, F, c,
                        cfg: VerifierConfig = DEFAULT_CONFIG) -> RegionVerdict:
    """Invariance of one region for affine dynamics f(x) = F x + c."""
    w = region.affine.w
    return _decide_affine(region, np.asarray(F, dtype=float).T @ w,
                          float(w @ np.asarray(c, dtype=float)), cfg)


# -- falsification search ----------------------------------------------------------

def _repair_onto_slice(sl, target, cfg):
    """Closest (Chebyshev) slice point to target, via one LP."""
    n = sl.base.dim
    m = sl.base.num_rows
    a_ub = np.zeros((m + 2 * n, n + 1))
    a_ub[:m, :n] = sl.base.A
    a_ub[m:m + n, :n] = np.eye(n)
    a_ub[m:m + n, n] = -1.0
    a_ub[m + n:, :n] = -np.eye(n)
    a_ub[m + n:, n] = -1.0
    b_ub = np.concatenate([sl.base.d, target, -target])
    a_eq = np.zeros((1, n + 1))
    a_eq[0, :n] = sl.w
    c = np.zeros(n + 1)
    c[n] = 1.0
    out = lp_solve(LpProblem(c, a_ub, b_ub, a_eq, np.array([-sl.b])), tol_feas=cfg.tol_feas)
    return out.point[:n] if out.optimal else None


def _falsify(region: ValidRegion, g_point, cfg, rng, budget) -> tuple | None:
    """Hunt for a slice point with g < -max(tol_margin, falsify_gate).

    Three stages: vertices of the patch from random-objective LPs, random
    convex combinations of those, and a coordinate pattern search projected
    back onto the hyperplane (with an LP repair step when a move leaves the
    region).  Returns (witness, value) or None.
    """
    sl = region.slice
    n = sl.base.dim
    w, b = sl.w, sl.b
    wnorm2 = float(w @ w)
    threshold = -max(cfg.tol_margin, cfg.falsify_gate)

    best = {"x": None, "val": np.inf}

    def consider(x):
        if x is None or not sl.contains(x, cfg.tol_feas):
            return None
        v = g_point(x)
        if v < best["val"]:
            best["x"], best["val"] = np.array(x), v
        return (np.array(x), v) if v < threshold else None

    base = sl.feasible_point(cfg.tol_feas)
    if base is None:
        return None
    hit = consider(base)
    if hit:
        return hit

    points = [base]
    for _ in range(max(4, budget // 5)):
        direction = rng.standard_normal(n)
        out = sl.minimize(direction, cfg.tol_feas)
        if out.optimal:
            points.append(out.point)
            hit = consider(out.point)
            if hit:
                return hit

    arr = np.array(points)
    for _ in range(max(4, budget // 3)):
        weights = rng.random(len(points))
        weights /= weights.sum()
        hit = consider(weights @ arr)
        if hit:
            return hit

    if best["x"] is None:
        return None
    x = best["x"].copy()
    spread = float(np.max(np.ptp(arr, axis=0))) if len(points) > 1 else 1.0
    step = max(spread / 4.0, 1e-3)
    for _ in range(budget):
        improved = False
        for i in range(n):
            for sign in (1.0, -1.0):
                d = np.zeros(n)
                d[i] = sign
                if wnorm2 > 0.0:
                    d -= w * (w @ d) / wnorm2      # move within the hyperplane
                if not d.any():
                    continue
                y = x + step * d
                if wnorm2 > 0.0:
                    y = y - w * ((w @ y) + b) / wnorm2   # exact projection back
                if not sl.base.contains(y, cfg.tol_feas):
                    y = _repair_onto_slice(sl, y, cfg)
                    if y is None:
                        continue
                hit = consider(y)
                if hit:
                    return hit
                if g_point(y) < g_point(x) - 1e-15 and sl.contains(y, cfg.tol_feas):
                    x = np.array(y)
                    improved = True
        if not improved:
            step /= 2.0
            if step < 1e-9:
                break
    return None


def falsify_region(region: ValidRegion, sys: DynamicsSystem,
                   cfg: VerifierConfig = DEFAULT_CONFIG,
                   rng: np.random.Generator | None = None,
                   budget: int | None = None) -> RegionVerdict | None:
    """Search for an invariance counterexample on one region.

    Returns a falsified RegionVerdict with a re-validated witness, or None
    when the search found nothing (which proves nothing).
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    g_point, _ = _weighted_objective(region.affine.w, sys.exprs)
    hit = _falsify(region, g_point, cfg, rng, budget or cfg.falsify_budget)
    if hit is None:
        return None
    x, v = hit
    return RegionVerdict(region.indicator, FALSIFIED, "search",
                         witness=x, witness_value=v)


# -- interval branch-and-bound ------------------------------------------------------

def _bab(region: ValidRegion, g_point, g_interval, cfg, domain) -> RegionVerdict:
    """Certify min g >= -tol_margin over the patch, or find a witness.

    Boxes are contracted to the patch's bounding box (2n LPs) before the
    interval enclosure is taken; boxes without slice points are pruned.
    """
    sl = region.slice
    n = sl.base.dim
    threshold = -max(cfg.tol_margin, cfg.falsify_gate)

    root = bounding_box(sl.base.A, sl.base.d, sl.w[None, :], np.array([-sl.b]),
                        dim=n, domain=domain, tol_feas=cfg.tol_feas)
    if root is None:
        return RegionVerdict(region.indicator, VERIFIED, "interval", vacuous=True,
                             note="slice empty")
    box0, seeds, restricted = root
    if np.any(box0[:, 0] > box0[:, 1]):
        return RegionVerdict(region.indicator, VERIFIED, "interval", vacuous=True,
                             domain_restricted=True,
                             note="slice leaves the domain box entirely")

    def witness_check(x):
        if x is None or not sl.contains(x, cfg.tol_feas):
            return None
        v = g_point(x)
        return (x, v) if v < threshold else None

    for x in seeds:
        hit = witness_check(x)
        if hit:
            return RegionVerdict(region.indicator, FALSIFIED, "interval",
                                 witness=hit[0], witness_value=hit[1],
                                 domain_restricted=restricted)

    queue = deque([box0])
    certified = np.inf
    stalled = False
    processed = 0
    while queue:
        processed += 1
        if processed > cfg.bab_max_boxes:
            return RegionVerdict(region.indicator, UNKNOWN, "interval",
                                 domain_restricted=restricted,
                                 note=f"box budget {cfg.bab_max_boxes} exhausted")
        box = queue.popleft()
        sub = bounding_box(
            np.vstack([sl.base.A, np.eye(n), -np.eye(n)]),
            np.concatenate([sl.base.d, box[:, 1], -box[:, 0]]),
            sl.w[None, :], np.array([-sl.b]),
            dim=n, domain=None, tol_feas=cfg.tol_feas)
        if sub is None:
            continue  # the patch does not enter this box
        cbox, cpts, _ = sub
        for x in cpts:
            hit = witness_check(x)
            if hit:
                return RegionVerdict(region.indicator, FALSIFIED, "interval",
                                     witness=hit[0], witness_value=hit[1],
                                     domain_restricted=restricted)
        lo, _ = g_interval(cbox)
        if lo >= -cfg.tol_margin:
            certified = min(certified, lo)
            continue
        widths = cbox[:, 1] - cbox[:, 0]
        widest = int(np.argmax(widths))
        if widths[widest] < cfg.bab_min_width:
            stalled = True
            continue
        mid = 0.5 * (cbox[widest, 0] + cbox[widest, 1])
        left = cbox.copy()
        left[widest, 1] = mid
        right = cbox.copy()
        right[widest, 0] = mid
        queue.append(left)
        queue.append(right)

    if stalled:
        return RegionVerdict(region.indicator, UNKNOWN, "interval",
                             domain_restricted=restricted,
                             note="interval refinement stalled at the width floor")
    bound = None if not np.isfinite(certified) else float(certified)
    return RegionVerdict(region.indicator, VERIFIED, "interval", bound=bound,
                         domain_restricted=restricted)


def verify_region_bab(region: ValidRegion, sys: DynamicsSystem,
                      cfg: VerifierConfig = DEFAULT_CONFIG) -> RegionVerdict:
    """Interval branch-and-bound for the invariance objective w.f."""
    g_point, g_interval = _weighted_objective(region.affine.w, sys.exprs)
    domain = cfg.domain(region.constraints.dim)
    return _bab(region, g_point, g_interval, cfg, domain)


# -- assembling the three conditions -------------------------------------------------

def _map_regions(fn, regions, threads):
    items = list(enumerate(regions))
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(it) for it in items]


def _aggregate(verdicts, extra_falsified=False, extra_ok=True):
    statuses = [v.status for v in verdicts]
    if extra_falsified or FALSIFIED in statuses:
        return FALSIFIED
    if all(s == VERIFIED for s in statuses) and extra_ok:
        return VERIFIED
    return UNKNOWN


def check_invariance(net, regions, sys: DynamicsSystem,
                     cfg: VerifierConfig = DEFAULT_CONFIG) -> ConditionResult:
    """Positive invariance over every enumerated region."""
    if not regions:
        raise NoRegions("invariance check over an empty region list")
    aff = is_affine(sys)
    domain = cfg.domain(net.input_dim)

    def decide(item):
        i, region = item
        rng = np.random.default_rng([cfg.seed, 101, i])
        if aff is not None:
            return check_region_affine(region, aff[0], aff[1], cfg)
        g_point, g_interval = _weighted_objective(region.affine.w, sys.exprs)
        hit = _falsify(region, g_point, cfg, rng, cfg.falsify_budget)
        if hit is not None:
            return RegionVerdict(region.indicator, FALSIFIED, "search",
                                 witness=hit[0], witness_value=hit[1])
        return _bab(region, g_point, g_interval, cfg, domain)

    verdicts = _map_regions(decide, regions, cfg.threads)
    return ConditionResult(_aggregate(verdicts), verdicts)


def _eval_positive_mask(expr, xs):
    """Boolean mask of rows where expr > 0, tolerating domain errors."""
    try:
        return np.asarray(evaluate(expr, xs)) > 0.0
    except Exception:
        mask = np.zeros(len(xs), dtype=bool)
        for i, x in enumerate(xs):
            try:
                mask[i] = evaluate(expr, x) > 0.0
            except Exception:
                mask[i] = False
        return mask


def _membership_probe(net, set_expr, cfg, rng, want_inside: bool) -> MembershipProbe:
    """One rejection-sampled point of {set_expr > 0}, checked against sign(h).

    want_inside demands h > 0 strictly at the sample; otherwise h < 0
    strictly.  Equality with zero never passes: a sample on the boundary is
    evidence against the condition, not for it.
    """
    domain = cfg.domain(net.input_dim)
    n = net.input_dim
    batch = 2048
    seen = 0
    while seen < cfg.membership_samples:
        k = min(batch, cfg.membership_samples - seen)
        xs = rng.uniform(domain[:, 0], domain[:, 1], size=(k, n))
        mask = _eval_positive_mask(set_expr, xs)
        idx = np.flatnonzero(mask)
        if idx.size:
            x = xs[idx[0]]
            h = net.forward(x)
            ok = h > 0.0 if want_inside else h < 0.0
            return MembershipProbe(point=x, set_value=float(evaluate(set_expr, x)),
                                   h_value=h, ok=ok, samples=seen + int(idx[0]) + 1)
        seen += k
    raise SamplerExhausted(
        f"no point with a positive set function in {cfg.membership_samples} draws; "
        "the set may be empty or outside the domain box")


def _check_set_condition(net, regions, set_expr: Expr, cfg, want_inside: bool,
                         salt: int) -> ConditionResult:
    """Shared body of the initial-set and unsafe-set conditions.

    Part one: the set must not meet any level-set patch (sup of the set
    function over each patch <= 0, decided like an invariance objective
    with g = -set_expr).  Part two: one sampled set point must land
    strictly inside (initial) or strictly outside (unsafe) the sublevel
    region of h.
    """
    if not regions:
        raise NoRegions("set condition over an empty region list")
    domain = cfg.domain(net.input_dim)
    lin = _linear_form(set_expr, net.input_dim)

    def decide(item):
        i, region = item
        rng = np.random.default_rng([cfg.seed, salt, i])
        if lin is not None:
            return _decide_affine(region, -lin[0], -lin[1], cfg)
        g_point, g_interval = _weighted_objective([-1.0], [set_expr])
        hit = _falsify(region, g_point, cfg, rng, cfg.falsify_budget)
        if hit is not None:
            return RegionVerdict(region.indicator, FALSIFIED, "search",
                                 witness=hit[0], witness_value=hit[1])
        return _bab(region, g_point, g_interval, cfg, domain)

    verdicts = _map_regions(decide, regions, cfg.threads)
    rng = np.random.default_rng([cfg.seed, salt, 7919])
    probe = _membership_probe(net, set_expr, cfg, rng, want_inside)
    status = _aggregate(verdicts, extra_falsified=not probe.ok, extra_ok=probe.ok)
    return ConditionResult(status, verdicts, probe=probe)


def check_initial_condition(net, regions, h_init: Expr,
                            cfg: VerifierConfig = DEFAULT_CONFIG) -> ConditionResult:
    """S_I must sit inside the h > 0 side: no patch contact plus an inside
    sample."""
    return _check_set_condition(net, regions, h_init, cfg, want_inside=True, salt=211)


def check_unsafe_condition(net, regions, h_unsafe: Expr,
                           cfg: VerifierConfig = DEFAULT_CONFIG) -> ConditionResult:
    """S_U must avoid the closed h >= 0 side: no patch contact plus an
    outside sample."""
    return _check_set_condition(net, regions, h_unsafe, cfg, want_inside=False, salt=223)


# -- end-to-end -----------------------------------------------------------------------

def verify_certificate(net, sys: DynamicsSystem, h_init: Expr, h_unsafe: Expr,
                       cfg: VerifierConfig = DEFAULT_CONFIG) -> CertificateVerdict:
    """Enumerate the level-set component and decide all three conditions."""
    timings = {}
    caveats = [
        "verdicts concern the enumerated level-set component only",
        "enumeration is complete only if the level set is connected (assumed, not verified)",
    ]
    t0 = time.perf_counter()
    sampler = set_guided_sampler(net, h_init, h_unsafe, cfg.domain(net.input_dim))
    try:
        seed_region, search_meta = find_initial_region(
            net, sampler, cfg, np.random.default_rng(cfg.seed))
    except SearchExhausted as exc:
        timings["search_s"] = time.perf_counter() - t0
        timings["total_s"] = timings["search_s"]
        return CertificateVerdict(
            invariance=UNKNOWN, initial_condition=UNKNOWN, unsafe_condition=UNKNOWN,
            overall=UNKNOWN, caveats=caveats,
            failure={"kind": "search-exhausted", "detail": str(exc)}, timings=timings)
    timings["search_s"] = time.perf_counter() - t0

    t1 = time.perf_counter()
    enum = boundary_propagation(net, seed_region, cfg)
    timings["enumeration_s"] = time.perf_counter() - t1
    if enum.partial:
        caveats.append("enumeration returned partial results: " + "; ".join(enum.errors))

    t2 = time.perf_counter()
    inv = check_invariance(net, enum.regions, sys, cfg)
    timings["invariance_s"] = time.perf_counter() - t2

    t3 = time.perf_counter()
    if h_init is None:
        init_res = ConditionResult(VERIFIED, [],
                                   note="no initial set given; condition vacuous")
    else:
        try:
            init_res = check_initial_condition(net, enum.regions, h_init, cfg)
        except SamplerExhausted as exc:
            init_res = ConditionResult(UNKNOWN, [], note=str(exc))
            caveats.append(f"initial-set sampling exhausted: {exc}")
    timings["initial_s"] = time.perf_counter() - t3

    t4 = time.perf_counter()
    if h_unsafe is None:
        unsafe_res = ConditionResult(VERIFIED, [],
                                     note="no unsafe set given; condition vacuous")
    else:
        try:
            unsafe_res = check_unsafe_condition(net, enum.regions, h_unsafe, cfg)
        except SamplerExhausted as exc:
            unsafe_res = ConditionResult(UNKNOWN, [], note=str(exc))
            caveats.append(f"unsafe-set sampling exhausted: {exc}")
    timings["unsafe_s"] = time.perf_counter() - t4
    timings["total_s"] = time.perf_counter() - t0

    for res in (inv, init_res, unsafe_res):
        if any(v.domain_restricted for v in res.region_verdicts):
            caveats.append("some patches were analyzed within the domain box only")
            break
    for res in (inv, init_res, unsafe_res):
        if any(v.bound is not None and abs(v.bound) <= 10 * cfg.tol_feas
               for v in res.region_verdicts):
            caveats.append("a certified bound lies within tolerance noise of zero")
            break
    if init_res.probe is not None or unsafe_res.probe is not None:
        caveats.append("set membership is probed at one sample point; full-set "
                       "containment in this component is not separately certified")

    statuses = (inv.status, init_res.status, unsafe_res.status)
    overall = (FALSIFIED if FALSIFIED in statuses
               else VERIFIED if all(s == VERIFIED for s in statuses)
               else UNKNOWN)
    return CertificateVerdict(
        invariance=inv.status, initial_condition=init_res.status,
        unsafe_condition=unsafe_res.status, overall=overall,
        invariance_result=inv, initial_result=init_res, unsafe_result=unsafe_res,
        enumeration=enum, search_meta=search_meta, caveats=caveats, timings=timings)
