"""Tabulate critical points of the body height by kind and index.

Also prints the closed-form counts, so the extra extrema that appear when
an anchor lies on the y axis (n divisible by 4) stand out.
"""

import argparse
from collections import Counter

from spiderspace.model import SpiderParams, critical_radius
from spiderspace.morse import critical_sites


def closed_form_rows(n, small):
    if not small:
        return (2 ** (n - 2), (n - 2) * 2 ** (n - 2), 2 ** (n - 2))
    if n % 2 == 0:
        return (2 ** (n - 2), (n - 2) * 2 ** (n - 2) + n * 2 ** n, 2 ** (n - 2))
    return (2 ** (n - 1), n * 2 ** (n - 2) + n * 2 ** n, 2 ** (n - 1))


def census(params):
    c = Counter()
    for s in critical_sites(params):
        c[(s.kind.value, s.morse_index)] += s.multiplicity
    return c


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n-max", type=int, default=12)
    args = parser.parse_args()
    for n in range(2, args.n_max + 1):
        Rn = critical_radius(n)
        for regime, R in (("small", Rn / 2), ("large", (Rn + 2) / 2)):
            c = census(SpiderParams(n, R))
            counts = tuple(sum(v for (_, i), v in c.items() if i == idx) for idx in range(3))
            rows = closed_form_rows(n, regime == "small")
            detail = ", ".join(f"{k}/{i}:{v}" for (k, i), v in sorted(c.items()))
            mark = "" if counts == rows else f"  differs from {rows}"
            print(f"n={n:<2} {regime:<5} counts={counts}{mark}\n        {detail}")


if __name__ == "__main__":
    main()
