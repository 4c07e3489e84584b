#!/usr/bin/env python3
"""Refinement ladders for the trajectory solver.

Spatial: the closed-form benchmark with sampled (non-analytic) initial
data, so the density-derivative stencils set the error floor; expect
fourth-order decay in the label spacing.

Temporal: self-convergence of a breathing packet in a harmonic trap
against a fine-dt reference; expect the integrator's fourth order.
"""

import argparse

from qflow.model import PhysicsParams
from qflow.pipeline import spatial_convergence, temporal_convergence


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sigma0", type=float, default=1.0)
    args = ap.parse_args()

    params = PhysicsParams()
    spatial = spatial_convergence(params, args.sigma0)
    print("spatial ladder (labels -> max normalized trajectory error):")
    for n, e in zip(spatial["sizes"], spatial["errors"]):
        print(f"   N = {n:4d}   error = {e:.3e}")
    print("   observed orders:", ["%.2f" % o for o in spatial["orders"]])

    temporal = temporal_convergence(params, args.sigma0)
    print("temporal ladder (dt -> self-convergence error):")
    for dt, e in zip(temporal["dts"], temporal["errors"]):
        print(f"   dt = {dt:7.4f}  error = {e:.3e}")
    print("   observed orders:", ["%.2f" % o for o in temporal["orders"]])


if __name__ == "__main__":
    main()
