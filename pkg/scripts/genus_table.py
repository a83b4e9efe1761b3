"""Print the genus of the configuration space for a range of arm counts.

Each row shows the closed formula next to the cell and Morse routes so a
disagreement is visible at a glance.
"""

import argparse

from spiderspace.cells import build_complex, euler_characteristic, genus_formula
from spiderspace.model import SpiderParams, critical_radius
from spiderspace.morse import morse_euler


def rows(n_max):
    for n in range(2, n_max + 1):
        Rn = critical_radius(n)
        for regime, R in (("small", Rn / 2), ("large", (Rn + 2) / 2)):
            p = SpiderParams(n, R)
            yield (n, regime, round(R, 6), genus_formula(p),
                   1 - euler_characteristic(build_complex(p)) // 2, 1 - morse_euler(p) // 2)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n-max", type=int, default=12)
    args = parser.parse_args()
    print(f"{'n':>3} {'regime':>6} {'R':>9} {'formula':>8} {'cells':>8} {'morse':>8}")
    for n, regime, R, g, gc, gm in rows(args.n_max):
        flag = "" if g == gc == gm else "  MISMATCH"
        print(f"{n:>3} {regime:>6} {R:>9} {g:>8} {gc:>8} {gm:>8}{flag}")


if __name__ == "__main__":
    main()
