"""Distance from KMS values to critical values as r -> 1/2 for A = (2).

Prints max |phi_r(x) - phi_c(x)| over a monomial panel and C = error / (1/2 - r).
"""

import argparse
import json
from fractions import Fraction

from kmslat import algebra as alg
from kmslat.lattice import DilationSystem
from kmslat.measures import Haar, parse_measure
from kmslat.states import StateSpec, eval_state


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--measure", default=None, help='measure literal as JSON, e.g. {"atoms": [["1", ["1/3"]]]}')
    ap.add_argument("--t", type=int, nargs="+", default=[8, 16, 32])
    ap.add_argument("--kmax", type=int, default=2)
    ap.add_argument("--bound", type=int, default=3)
    args = ap.parse_args()

    mu = Haar(1) if args.measure is None else parse_measure(json.loads(args.measure))
    sys = DilationSystem.from_matrix([[2]])
    panel = alg.monomial_panel(sys, args.kmax, args.bound)
    critical = {x: complex(eval_state(sys, StateSpec.critical(), x).value) for x in panel}

    print(f"measure {mu}, {len(panel)} monomials")
    print(f"{'t':>4} {'r':>8} {'max error':>12} {'C':>8}")
    for t in args.t:
        r = Fraction(1, 2) - Fraction(1, t)
        spec = StateSpec.kms(r, mu)
        err = max(abs(complex(eval_state(sys, spec, x).value) - critical[x]) for x in panel)
        print(f"{t:>4} {str(r):>8} {err:>12.6g} {err * t:>8.4f}")


if __name__ == "__main__":
    main()
