"""Handing the per-region questions to an external SMT solver, and drawing
the certificate.

Every region verdict the toolkit produces can be re-stated as a small
SMT-LIB satisfiability question: "is there a point on this patch where the
flow crosses outward?"  unsat answers from a trusted solver then confirm
the LP/interval verdicts independently.  This script writes the queries for
the diamond certificate into demos/out/, prints one of them, and renders
the certificate as an SVG.

The same functionality is available from the command line:

    relubarrier export-smt --problem problem.json --out-dir out/
    relubarrier plot --problem problem.json --out picture.svg

Run:  python3 demos/04_smt_export_and_plot.py
"""

import os

import numpy as np

from relubarrier import (ActivationIndicator, DynamicsSystem,
                         boundary_propagation, build_valid_region,
                         export_invariance, export_set_condition,
                         parse_expression)
from relubarrier.network import ReluNetwork
from relubarrier.svgplot import render_plot


def main():
    w1 = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    net = ReluNetwork([w1], [np.zeros(4)], -np.ones(4), 1.0)
    seed = build_valid_region(net, ActivationIndicator(((1, 0, 1, 0),)))
    regions = boundary_propagation(net, seed).regions

    out_dir = os.path.join(os.path.dirname(__file__), "out")
    os.makedirs(out_dir, exist_ok=True)

    sys = DynamicsSystem.parse(["-x1", "-x2"], dim=2)
    h_init = parse_expression("0.04 - x1^2 - x2^2", 2)
    h_unsafe = parse_expression("1 - (x1 - 3)^2 - (x2 - 3)^2", 2)

    queries = (export_invariance(regions, sys)
               + export_set_condition(regions, h_init, "initial", 2)
               + export_set_condition(regions, h_unsafe, "unsafe", 2))
    for q in queries:
        with open(os.path.join(out_dir, q.filename), "w") as fh:
            fh.write(q.text)
    print(f"wrote {len(queries)} queries to {out_dir}/")
    print("\nfirst invariance query:")
    print(queries[0].text)

    # one monolithic alternative: a single disjunction over all regions
    mono = export_invariance(regions, sys, mode="monolithic")[0]
    print(f"monolithic variant covers regions {mono.region_ids} "
          f"in {mono.filename}")

    svg = render_plot(net, regions, h_init, h_unsafe, witnesses=[])
    svg_path = os.path.join(out_dir, "diamond.svg")
    with open(svg_path, "w") as fh:
        fh.write(svg)
    print(f"certificate picture written to {svg_path}")


if __name__ == "__main__":
    main()
