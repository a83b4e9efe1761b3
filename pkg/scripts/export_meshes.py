"""Write OBJ meshes of the configuration space for R_n < R < 2."""

import argparse
from pathlib import Path

from spiderspace.mesh import build_mesh, check_orientation, euler_characteristic, export_obj
from spiderspace.model import SpiderParams


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("meshes"))
    parser.add_argument("--r", type=float, default=1.5)
    parser.add_argument("--resolution", type=int, default=8)
    parser.add_argument("--n", type=int, nargs="+", default=[2, 3, 4, 5, 6])
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for n in args.n:
        m = build_mesh(SpiderParams(n, args.r), args.resolution)
        path = export_obj(m, args.out / f"spider_n{n}_R{args.r:g}.obj")
        report = check_orientation(m)
        print(f"{path}: V={m.n_verts} F={m.n_tris} chi={euler_characteristic(m)} "
              f"orientable={report.orientable}")


if __name__ == "__main__":
    main()
