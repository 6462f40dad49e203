"""Shared fixtures and independent oracles for the test suite.

The oracles here deliberately avoid the library's own LP/geometry code
paths: vertex enumeration goes through numpy.linalg, grid oracles through
direct evaluation, so agreement is meaningful.
"""

from __future__ import annotations

import itertools
import json
import os

import numpy as np

from relubarrier import UNBOUNDED, LpProblem, lp_solve, network_to_json
from relubarrier.network import ReluNetwork


# -- hand-built fixture networks ---------------------------------------------------

def diamond_net() -> ReluNetwork:
    """h(x) = 1 - |x1| - |x2| built from four rectifier units."""
    w1 = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    b1 = np.zeros(4)
    return ReluNetwork([w1], [b1], np.array([-1.0, -1.0, -1.0, -1.0]), 1.0)


def strip_net() -> ReluNetwork:
    """h(x) = 1 - |x1|; its zero set is two disconnected vertical lines."""
    w1 = np.array([[1.0, 0.0], [-1.0, 0.0]])
    b1 = np.zeros(2)
    return ReluNetwork([w1], [b1], np.array([-1.0, -1.0]), 1.0)


def shifted_relu_net() -> ReluNetwork:
    """h(x) = relu(x1 - 1) + 1 >= 1 everywhere: no zero level set."""
    return ReluNetwork([np.array([[1.0]])], [np.array([-1.0])],
                       np.array([1.0]), 1.0)


def one_d_ramp_net() -> ReluNetwork:
    """h(x) = 1 - relu(x1) on the line; single valid region x1 >= 0."""
    return ReluNetwork([np.array([[1.0]])], [np.array([0.0])],
                       np.array([-1.0]), 1.0)


def all_dead_net() -> ReluNetwork:
    """h identically 1: zero weights everywhere, so no boundary exists."""
    w1 = np.zeros((2, 2))
    return ReluNetwork([w1], [np.zeros(2)], np.zeros(2), 1.0)


def deep_branching_net(gain: float = 1e12, offset: float = 50.0) -> ReluNetwork:
    """Two-layer net where masking a zero first-layer unit flips layer two.

    At x = (d, 1) with d below the zero tolerance, the first unit's
    pre-activation is d; keeping it active feeds gain*d - offset > 0 into
    the second layer while masking it feeds -offset < 0.
    """
    w1 = np.array([[1.0, 0.0], [0.0, 1.0]])
    b1 = np.zeros(2)
    w2 = np.array([[gain, 0.0]])
    b2 = np.array([-offset])
    return ReluNetwork([w1, w2], [b1, b2], np.array([1.0]), 0.0)


def random_hidden_net(rng: np.random.Generator, n_in: int = 2,
                      neurons: int | None = None) -> ReluNetwork:
    """One-hidden-layer net with standard normal weights and biases."""
    if neurons is None:
        neurons = int(rng.integers(4, 9))
    w1 = rng.normal(size=(neurons, n_in))
    b1 = rng.normal(size=neurons)
    omega = rng.normal(size=neurons)
    phi = float(rng.normal())
    return ReluNetwork([w1], [b1], omega, phi)


def scaled_output(net: ReluNetwork, k: float) -> ReluNetwork:
    """Same network with the output layer scaled by k."""
    return ReluNetwork([w.copy() for w in net.weights],
                       [b.copy() for b in net.biases],
                       k * net.output_weights, k * net.output_bias)


# -- independent oracles ------------------------------------------------------------

def vertex_minimum(c, a_ub, b_ub, a_eq=None, b_eq=None, tol=1e-9):
    """Brute-force LP oracle: enumerate basic points via numpy.linalg.

    Only for small bounded-feasible problems (n <= 3, m <= 10).  Returns
    (value, point) over all vertices, or None when no vertex is feasible.
    """
    c = np.asarray(c, dtype=float)
    a_ub = np.asarray(a_ub, dtype=float)
    b_ub = np.asarray(b_ub, dtype=float)
    n = c.size
    rows = [(a_ub[i], b_ub[i], False) for i in range(a_ub.shape[0])]
    if a_eq is not None:
        a_eq = np.asarray(a_eq, dtype=float)
        b_eq = np.asarray(b_eq, dtype=float)
        rows += [(a_eq[i], b_eq[i], True) for i in range(a_eq.shape[0])]
    best = None
    eq_idx = [i for i, r in enumerate(rows) if r[2]]
    for combo in itertools.combinations(range(len(rows)), n):
        if any(i not in combo for i in eq_idx):
            continue
        mat = np.array([rows[i][0] for i in combo])
        rhs = np.array([rows[i][1] for i in combo])
        if abs(np.linalg.det(mat)) < 1e-12:
            continue
        x = np.linalg.solve(mat, rhs)
        ok = all((abs(a @ x - d) <= tol) if is_eq else (a @ x <= d + tol)
                 for a, d, is_eq in rows)
        if not ok:
            continue
        v = float(c @ x)
        if best is None or v < best[0]:
            best = (v, x)
    return best


def slice_grid(region, k: int = 10_000) -> np.ndarray:
    """k points densely covering a 2-D region's level-set segment.

    Endpoint extraction uses the library LP (the only way to touch the
    polytope), but the grid itself and any evaluation on it are
    library-free.
    """
    w, b = region.affine.w, region.affine.b
    t = np.array([-w[1], w[0]])
    a_rows, d_vals = region.constraints.A, region.constraints.d
    ends = []
    for sense in ("min", "max"):
        out = lp_solve(LpProblem(t, a_rows, d_vals, w[None, :],
                                 np.array([-b]), sense=sense))
        if out.status == UNBOUNDED:
            # clamp an unbounded slice with the standard domain box (or a
            # big box when the slice misses it); the grid then covers a
            # finite stretch of the segment
            for half in (3.0, 1e6):
                boxed_a = np.vstack([a_rows, np.eye(2), -np.eye(2)])
                boxed_d = np.concatenate([d_vals, np.full(2, half),
                                          np.full(2, half)])
                out = lp_solve(LpProblem(t, boxed_a, boxed_d, w[None, :],
                                         np.array([-b]), sense=sense))
                if out.optimal:
                    break
        assert out.optimal, f"segment endpoint LP came back {out.status}"
        ends.append(out.point)
    ts = np.linspace(0.0, 1.0, k)[:, None]
    return ends[0][None, :] * (1 - ts) + ends[1][None, :] * ts


def write_problem(dirpath, net: ReluNetwork, dynamics, initial_set, unsafe_set,
                  domain=((-3.0, 3.0), (-3.0, 3.0)), seed: int = 0,
                  tolerances=None, budgets=None, name: str = "problem"):
    """Write a network + problem JSON pair; returns the problem path."""
    os.makedirs(dirpath, exist_ok=True)
    net_path = os.path.join(dirpath, f"{name}_net.json")
    with open(net_path, "w") as fh:
        json.dump(network_to_json(net), fh)
    spec = {
        "network_path": f"{name}_net.json",
        "dynamics": list(dynamics),
        "initial_set": initial_set,
        "unsafe_set": unsafe_set,
        "domain_box": [list(pair) for pair in domain],
        "seed": seed,
    }
    if tolerances:
        spec["tolerances"] = tolerances
    if budgets:
        spec["budgets"] = budgets
    problem_path = os.path.join(dirpath, f"{name}.json")
    with open(problem_path, "w") as fh:
        json.dump(spec, fh, indent=2)
    return problem_path


# -- dynamics strings for the four reference systems --------------------------------

CUBIC2D = ["x1 - x1^3 + x2 - x1*x2^2",
           "-x1 + x2 - x1^2*x2 - x2^3"]

TRANSCENDENTAL3D = ["-x1*(1 + sin(x2)^2 + exp(-x3^2))",
                    "-x2*(1 + cos(x3)^2 + tanh(x1^2))",
                    "-x3*(1 + ln(1 + x1^2 + x2^2))"]

CASCADE4D = ["-x1",
             "x1 - 2*x2",
             "x1 - 4*x3",
             "x1 - 3*x4"]

DECAY6D = [f"-x{i}*(1 + x1^2 + x2^2 + x3^2 + x4^2 + x5^2 + x6^2)"
           for i in range(1, 7)]

ALL_SYSTEMS = {2: CUBIC2D, 3: TRANSCENDENTAL3D, 4: CASCADE4D, 6: DECAY6D}
