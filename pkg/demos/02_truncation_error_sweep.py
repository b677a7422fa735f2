#!/usr/bin/env python3
"""Watch the lift truncation error fall (or refuse to fall) with the order k.

Three systems, three behaviors:
  * a dissipative scalar model, where the error drops geometrically;
  * a certified oscillator point, same story in two dimensions;
  * a bounded but strongly nonlinear damped rotation, where the lift
    error grows with k even though the trajectory itself is tame --
    truncation order buys nothing without a certificate.

Run:  python3 demos/02_truncation_error_sweep.py
"""

import numpy as np

from carleman_lab.carleman import convergence_sweep
from carleman_lab.fixtures import damped_oscillator
from carleman_lab.stability import r_mu
from carleman_lab.system import QuadraticSystem


def show(label, sys, x0, t=3.0, ks=range(2, 9)):
    sweep = convergence_sweep(sys, x0, ks, t)
    print(label)
    print(f"  R_mu = {r_mu(sys, x0):.3g}")
    for k in ks:
        print(f"    k={k}:  |eta_1({t})| = {sweep['errors'][k]:.3e}")
    ratio = sweep["fitted_ratio"]
    print(f"  fitted ratio per unit k: {ratio if ratio is None else round(ratio, 4)}")
    print()


def main():
    show(
        "dissipative scalar (a=-1, b=0.1, x0=0.5)",
        QuadraticSystem(f0=[0.0], f1=[[-1.0]], f2=[[0.1]]),
        np.array([0.5]),
    )
    fx = damped_oscillator(r=1.5, n=0.2)
    show("damped oscillator (r=1.5, n=0.2, q0=v0=1/2)", fx.system, fx.x0)
    show(
        "bounded damped rotation, strong nonlinearity (a=-0.1+3i, b=3, x0=0.8)",
        QuadraticSystem(f0=[0.0], f1=[[-0.1 + 3j]], f2=[[3.0]]),
        np.array([0.8]),
    )


if __name__ == "__main__":
    main()
