"""Compare the truncated vector-state sum on the induced representation with the series.

Prints, per system and measure, the representation size, the largest gap
between the two values over a monomial panel and the gap relative to the
combined error bound.
"""

import argparse
import time
from fractions import Fraction

from kmslat import algebra as alg
from kmslat import oracle
from kmslat.lattice import DilationSystem
from kmslat.measures import Atomic
from kmslat.states import StateSpec, eval_state

F = Fraction
CASES = [([[2]], F(1, 3), 8), ([[2, 0], [0, 3]], F(1, 12), 4), ([[0, -2], [1, 0]], F(1, 3), 8)]


def measures(d):
    yield "point", Atomic.point((F(0),) * d)
    yield "two atoms", Atomic(((F(1, 3), (F(1, 3),) * d), (F(2, 3), tuple(F(1, 4 if i % 2 == 0 else 2) for i in range(d)))))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kmax", type=int, default=2)
    ap.add_argument("--bound", type=int, default=3)
    args = ap.parse_args()

    print(f"{'matrix':<16}{'r':>6}{'J':>3}  {'measure':<10}{'dim':>6}{'max gap':>12}{'gap/bound':>11}{'secs':>7}")
    for A, r, J in CASES:
        sys = DilationSystem.from_matrix(A)
        panel = alg.monomial_panel(sys, args.kmax, args.bound)
        for label, mu in measures(sys.d):
            t0 = time.perf_counter()
            rep = oracle.build(sys, mu, J)
            spec = StateSpec.kms(r, mu)
            gap, ratio = 0.0, 0.0
            for x in panel:
                a = oracle.vector_state_sum(rep, r, x)
                b = eval_state(sys, spec, x)
                g = abs(complex(a.value) - complex(b.value))
                gap, ratio = max(gap, g), max(ratio, g / float(a.error_bound + b.error_bound))
            dt = time.perf_counter() - t0
            print(f"{str(A):<16}{str(r):>6}{J:>3}  {label:<10}{rep.dim:>6}{gap:>12.3g}{ratio:>11.3f}{dt:>7.2f}")


if __name__ == "__main__":
    main()
