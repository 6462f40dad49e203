"""Enumerating the linear regions that carry the zero level set.

A region is *valid* when it is full-dimensional and its intersection with
the hyperplane of its own affine piece has dimension n-1 (the intersection
actually carries a patch of the level set, rather than grazing a corner).

Enumeration starts from one valid region found by sampling/bisection and
propagates across facets: wherever the level set meets a facet of a known
region, the indicators feasible at that point name the neighbours.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_CONFIG, VerifierConfig
from .errors import CombinatorialBlowup, NumericalFailure, OracleTooLarge, SearchExhausted
from .geometry import (Polyhedron, SlicePolyhedron, hyperplane_slice,
                       implicit_equalities, remove_redundant)
from .linprog import lp_feasible, matrix_rank
from .network import (ActivationIndicator, RegionAffine, ReluNetwork,
                      expand_candidate)


@dataclass(frozen=True)
class RegionValidity:
    valid: bool
    degenerate: bool = False  # the piece is identically zero on the region

    def __bool__(self):
        return self.valid


@dataclass
class ValidRegion:
    """A valid region with its affine piece and reduced constraint system."""

    indicator: ActivationIndicator
    affine: RegionAffine
    constraints: Polyhedron        # irredundant region inequalities
    slice: SlicePolyhedron         # constraints meet {w.x + b = 0}
    degenerate: bool = False

    def key(self):
        return self.indicator.key()


@dataclass
class EnumerationResult:
    regions: list[ValidRegion]
    visited_count: int
    connectivity_assumed: bool = True
    partial: bool = False
    errors: list[str] = field(default_factory=list)
    seed_indicator: ActivationIndicator | None = None

    @property
    def indicators(self) -> list[ActivationIndicator]:
        return [r.indicator for r in self.regions]


def valid_test(net: ReluNetwork, ind: ActivationIndicator,
               cfg: VerifierConfig = DEFAULT_CONFIG) -> RegionValidity:
    """Decide whether ind names a valid region.

    Checks, in order: the region is nonempty and full-dimensional; the
    affine piece is not identically zero (w = 0, b = 0 counts as valid but
    degenerate, w = 0 with b != 0 has an empty slice); the sliced system's
    implicit equalities have rank exactly one, i.e. the only equality
    forced on the slice is the hyperplane itself.
    """
    region = net.region_constraints(ind)
    x0 = region.feasible_point(cfg.tol_feas)
    if x0 is None:
        return RegionValidity(False)
    region_implicit = implicit_equalities(region, tol_eq=cfg.tol_eq,
                                          tol_feas=cfg.tol_feas, witnesses=[x0])
    if region_implicit and matrix_rank(region.A[region_implicit], cfg.tol_rank) > 0:
        return RegionValidity(False)  # not full-dimensional

    aff = net.affine_map(ind)
    if not aff.w.any():
        return RegionValidity(aff.b == 0.0, degenerate=aff.b == 0.0)

    sliced = hyperplane_slice(region, aff.w, aff.b).full()
    x1 = sliced.feasible_point(cfg.tol_feas)
    if x1 is None:
        return RegionValidity(False)
    slice_implicit = implicit_equalities(sliced, tol_eq=cfg.tol_eq,
                                         tol_feas=cfg.tol_feas, witnesses=[x1])
    rank = matrix_rank(sliced.A[slice_implicit], cfg.tol_rank)
    return RegionValidity(rank == 1)


def build_valid_region(net: ReluNetwork, ind: ActivationIndicator,
                       cfg: VerifierConfig = DEFAULT_CONFIG,
                       validity: RegionValidity | None = None):
    """Construct the ValidRegion for ind, or None when it is not valid."""
    if validity is None:
        validity = valid_test(net, ind, cfg)
    if not validity:
        return None
    aff = net.affine_map(ind)
    reduced = remove_redundant(net.region_constraints(ind), tol_feas=cfg.tol_feas)
    return ValidRegion(indicator=ind, affine=aff, constraints=reduced,
                       slice=hyperplane_slice(reduced, aff.w, aff.b),
                       degenerate=validity.degenerate)


# -- initial region search -------------------------------------------------------

def set_guided_sampler(net: ReluNetwork, h_init=None, h_unsafe=None,
                       domain: np.ndarray | None = None):
    """Point source for the initial search.

    Draws uniformly from the domain box and tags each point by the first
    set whose describing function is positive there, so the search can
    report whether the seeding pair came from the given sets or from plain
    domain sampling.
    """
    from .expressions import evaluate  # local import to avoid a cycle at import time

    if domain is None:
        domain = DEFAULT_CONFIG.domain(net.input_dim)

    def draw(rng):
        x = rng.uniform(domain[:, 0], domain[:, 1])
        tag = "domain"
        try:
            if h_init is not None and evaluate(h_init, x) > 0.0:
                tag = "initial-set"
            elif h_unsafe is not None and evaluate(h_unsafe, x) > 0.0:
                tag = "unsafe-set"
        except Exception:
            tag = "domain"
        return x, tag

    return draw


def _bisect_to(net, x_neg, x_pos, eps):
    """Shrink a sign-bracketing pair to distance <= eps by midpoint steps."""
    x_neg = np.array(x_neg, dtype=float)
    x_pos = np.array(x_pos, dtype=float)
    while float(np.linalg.norm(x_neg - x_pos)) > eps:
        mid = 0.5 * (x_neg + x_pos)
        if net.forward(mid) < 0.0:
            x_neg = mid
        else:
            x_pos = mid
    return x_neg, x_pos


def find_initial_region(net: ReluNetwork, sampler, cfg: VerifierConfig = DEFAULT_CONFIG,
                        rng: np.random.Generator | None = None):
    """Locate one valid region by sampling a sign change and bisecting.

    Returns (ValidRegion, metadata).  Each attempt samples a pair with
    h(x1)h(x2) < 0, bisects until the pair is eps-close, wraps it in its
    interval hull, propagates bounds to get a candidate indicator, and runs
    the validity test over the candidate's completions.  If interval
    propagation leaves too many neurons undetermined, eps shrinks tenfold
    and the bisection continues.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    draw_budget = 2000
    for attempt in range(1, cfg.max_attempts + 1):
        x_neg = x_pos = None
        tag_neg = tag_pos = None
        for _ in range(draw_budget):
            x, tag = sampler(rng)
            h = net.forward(x)
            if h < 0.0 and x_neg is None:
                x_neg, tag_neg = x, tag
            elif h > 0.0 and x_pos is None:
                x_pos, tag_pos = x, tag
            if x_neg is not None and x_pos is not None:
                break
        if x_neg is None or x_pos is None:
            continue  # no sign change found this attempt

        eps = cfg.bisect_eps
        while eps > 1e-13:
            a, b = _bisect_to(net, x_neg, x_pos, eps)
            hull = np.stack([np.minimum(a, b), np.maximum(a, b)], axis=1)
            cand = net.ibp_candidate(hull)
            if cand.num_unknown > cfg.branch_cap:
                eps /= 10.0
                continue
            for ind in expand_candidate(cand, cfg.branch_cap):
                validity = valid_test(net, ind, cfg)
                if validity:
                    region = build_valid_region(net, ind, cfg, validity)
                    meta = {"attempts": attempt, "eps": eps,
                            "pair_tags": (tag_neg, tag_pos),
                            "mode": ("set-guided" if "domain" not in (tag_neg, tag_pos)
                                     else "domain-uniform")}
                    return region, meta
            break  # candidates all invalid: resample a fresh pair
    raise SearchExhausted(f"no valid region found in {cfg.max_attempts} attempts")


# -- boundary propagation ---------------------------------------------------------

def boundary_propagation(net: ReluNetwork, seed: ValidRegion,
                         cfg: VerifierConfig = DEFAULT_CONFIG) -> EnumerationResult:
    """Grow the set of valid regions across shared facets from a seed.

    FIFO worklist; every facet of a known region that meets the level set
    yields a point whose feasible indicators are validity-tested.  Output
    is sorted by indicator key, so the result does not depend on worklist
    scheduling.  Completeness rests on the level set being connected,
    which is assumed, not verified.
    """
    regions: dict[tuple, ValidRegion] = {seed.key(): seed}
    rejected: set[tuple] = set()
    queue: deque[tuple] = deque([seed.key()])
    visited: set[tuple] = set()
    errors: list[str] = []
    partial = False

    while queue:
        key = queue.popleft()
        if key in visited:
            continue
        visited.add(key)
        region = regions[key]
        if region.degenerate:
            errors.append(f"region {region.indicator.compact()}: degenerate piece, "
                          "facet propagation skipped")
            partial = True
            continue
        A, d = region.constraints.A, region.constraints.d
        w, b = region.affine.w, region.affine.b
        facet_hits = 0
        for j in range(region.constraints.num_rows):
            if net.input_dim == 2 and facet_hits >= 4:
                break  # a line meets at most 4 facet-bearing edges in the plane
            others = [k for k in range(region.constraints.num_rows) if k != j]
            point = lp_feasible(A[others], d[others],
                                np.vstack([w[None, :], A[j][None, :]]),
                                np.array([-b, d[j]]),
                                num_vars=net.input_dim, tol_feas=cfg.tol_feas)
            if point is None:
                continue
            facet_hits += 1
            try:
                neighbours = net.feasible_indicators(point, cfg.tol_zero, cfg.branch_cap)
            except CombinatorialBlowup as exc:
                errors.append(f"region {region.indicator.compact()} facet {j}: {exc}")
                partial = True
                continue
            cap_hit = False
            for ind in neighbours:
                k = ind.key()
                if k in regions or k in rejected:
                    continue
                if cfg.max_regions is not None and len(regions) >= cfg.max_regions:
                    cap_hit = True
                    break
                try:
                    validity = valid_test(net, ind, cfg)
                except NumericalFailure as exc:
                    errors.append(f"candidate {ind.compact()}: {exc}")
                    partial = True
                    rejected.add(k)
                    continue
                if validity:
                    regions[k] = build_valid_region(net, ind, cfg, validity)
                    queue.append(k)
                else:
                    rejected.add(k)
            if cap_hit:
                errors.append(f"region cap {cfg.max_regions} reached; enumeration stopped")
                partial = True
                queue.clear()
                break

    ordered = [regions[k] for k in sorted(regions)]
    return EnumerationResult(regions=ordered, visited_count=len(visited),
                             connectivity_assumed=True, partial=partial,
                             errors=errors, seed_indicator=seed.indicator)


# -- exhaustive oracle ------------------------------------------------------------

def brute_force_valid_regions(net: ReluNetwork,
                              cfg: VerifierConfig = DEFAULT_CONFIG
                              ) -> list[ActivationIndicator]:
    """Every valid indicator by exhaustive enumeration, in canonical order.

    Exponential in the neuron count; refuses networks above cfg.oracle_cap.
    """
    total = net.num_neurons
    if total > cfg.oracle_cap:
        raise OracleTooLarge(f"{total} neurons exceed the oracle cap {cfg.oracle_cap}")
    sizes = net.layer_sizes
    out = []
    for flat in itertools.product((0, 1), repeat=total):
        layers = []
        pos = 0
        for m in sizes:
            layers.append(tuple(flat[pos:pos + m]))
            pos += m
        ind = ActivationIndicator(tuple(layers))
        if valid_test(net, ind, cfg):
            out.append(ind)
    return out


def slices_intersect(r1: ValidRegion, r2: ValidRegion, tol_feas: float = 1e-7) -> bool:
    """Do two regions' level-set patches share a point?"""
    a_ub = np.vstack([r1.constraints.A, r2.constraints.A])
    b_ub = np.concatenate([r1.constraints.d, r2.constraints.d])
    a_eq = np.vstack([r1.affine.w[None, :], r2.affine.w[None, :]])
    b_eq = np.array([-r1.affine.b, -r2.affine.b])
    return lp_feasible(a_ub, b_ub, a_eq, b_eq, num_vars=r1.constraints.dim,
                       tol_feas=tol_feas) is not None


def boundary_is_connected(regions: list[ValidRegion], tol_feas: float = 1e-7) -> bool:
    """Connectivity of the region-adjacency graph (shared slice points)."""
    if len(regions) <= 1:
        return True
    n = len(regions)
    seen = {0}
    frontier = [0]
    while frontier:
        i = frontier.pop()
        for j in range(n):
            if j not in seen and slices_intersect(regions[i], regions[j], tol_feas):
                seen.add(j)
                frontier.append(j)
    return len(seen) == n
