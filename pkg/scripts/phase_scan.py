"""Argmin of the total micro-mass rate across t, next to the threshold root."""

import argparse

import numpy as np

from erldp.ratefn import beta_t, minimize_micro_mass


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--t-min", type=float, default=0.2)
    ap.add_argument("--t-max", type=float, default=4.0)
    ap.add_argument("--points", type=int, default=39)
    args = ap.parse_args()
    print("t,c_argmin,J_mi_min,phase,beta_t")
    for t in np.linspace(args.t_min, args.t_max, args.points):
        res = minimize_micro_mass(float(t))
        print(f"{t:.17g},{res.c:.17g},{res.value:.17g},{res.phase},{beta_t(float(t)):.17g}")


if __name__ == "__main__":
    main()
