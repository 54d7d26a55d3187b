"""Which r admit KMS states, for a few dilation matrices.

For each matrix and r the table shows N r and whether a KMS state exists
(N r < 1), sits at the critical point (N r = 1) or is ruled out (N r > 1).
"""

import argparse
from fractions import Fraction

from kmslat.lattice import DilationSystem
from kmslat.states import beta_feasibility

MATRICES = {"(2)": [[2]], "(3)": [[3]], "diag(2,3)": [[2, 0], [0, 3]],
            "[[0,-2],[1,0]]": [[0, -2], [1, 0]], "[[1,1],[0,1]]": [[1, 1], [0, 1]]}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--r", nargs="+", default=["1/12", "1/6", "1/5", "1/3", "1/2", "2/3"])
    args = ap.parse_args()
    rs = [Fraction(x) for x in args.r]

    print(f"{'matrix':<16}{'N':>3}  " + "  ".join(f"{str(r):>14}" for r in rs))
    for name, A in MATRICES.items():
        sys = DilationSystem.from_matrix(A)
        cells = []
        for r in rs:
            Nr = sys.N * r
            tag = "critical" if Nr == 1 else ("kms" if beta_feasibility(sys, r) else "none")
            cells.append(f"{str(Nr) + ' ' + tag:>14}")
        print(f"{name:<16}{sys.N:>3}  " + "  ".join(cells))


if __name__ == "__main__":
    main()
