"""Fixed clock-momentum channel: where the evanescent part of the packet sits.

Propagates the truncated sine through the p = 2 step to t = 10 and prints
the scattering, evanescent and interference densities at a few points, plus
how much probability each part carries.

    python demos/channel_densities.py [--p 2] [--t 10]
"""
import argparse

import numpy as np

from qclock import ChannelSpec, Grid1D, WavepacketSpec, propagate_channel
from qclock.core import trapezoid_weights


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=float, default=2.0)
    ap.add_argument("--t", type=float, default=10.0)
    args = ap.parse_args()

    wp = WavepacketSpec(-2.01, -0.01)
    grid = Grid1D(-40.0, 40.0, 2001)
    st = propagate_channel(wp, ChannelSpec(args.p), args.t, grid)
    tot, sc, ev = (np.abs(st[c]) ** 2 for c in ("total", "scattering", "evanescent"))
    w = trapezoid_weights(grid)

    print(f"p = {args.p:g}, t = {args.t:g}, contour nodes = {st.meta['n_nodes']}, tails = {st.meta['tails']}")
    print(f"probability in window: total {w @ tot:.5f}  scattering {w @ sc:.5f}  evanescent {w @ ev:.5f}")
    print(f"{'x':>8} {'total':>12} {'scattering':>12} {'evanescent':>12} {'interference':>13}")
    for x in (-30, -10, -2, 0, 2, 5, 10, 20, 30):
        j = grid.index_of(float(x))
        print(f"{x:8.1f} {tot[j]:12.4e} {sc[j]:12.4e} {ev[j]:12.4e} {tot[j] - sc[j] - ev[j]:13.4e}")
    j = int(np.argmax(ev))
    print(f"evanescent density peaks at x = {grid.nodes[j]:.2f}")


if __name__ == "__main__":
    main()
