"""Compare exact connectivity of a macroscopic block with its large-N approximation.

Prints exact/asymptotic ratios for k = xN under two edge-probability
conventions, p = t/N and p = 1 - exp(-t/N).
"""

import argparse
import math

from erldp.connectivity import PrecisionConfig, log_mu_exact, mu_macro_asymptotic


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--x", type=float, default=0.5)
    ap.add_argument("--t", type=float, default=2.0)
    ap.add_argument("--n-list", default="50,100,200,400,800")
    ap.add_argument("--bits", type=int, default=512)
    args = ap.parse_args()
    prec = PrecisionConfig(args.bits)
    print("N,k,ratio_linear_p,ratio_exponential_p")
    for N in (int(s) for s in args.n_list.split(",")):
        k = round(args.x * N)
        asym = mu_macro_asymptotic(args.x, args.t, N)
        lin = float(log_mu_exact(k, args.t / N, prec)) - asym
        expo = float(log_mu_exact(k, -math.expm1(-args.t / N), prec)) - asym
        print(f"{N},{k},{math.exp(lin):.6f},{math.exp(expo):.6f}")


if __name__ == "__main__":
    main()
