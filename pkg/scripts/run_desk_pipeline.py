#!/usr/bin/env python3
"""Run the laptop-sized end-to-end experiment.

Generates the coupling matrix, simulates 20 assets on 32x32 lattices for
1000 + 10000 sweeps, then writes the ACF/moments/volatility files and the
correlation-spectrum trajectories into ./out_desk. Takes around half a
minute. Rerunning reproduces every data file byte for byte.
"""

import sys

from spinmarket.cli import main

if __name__ == "__main__":
    sys.exit(main(["pipeline", "--preset", "desk", "--out", "out_desk", "--seed", "9"]))
