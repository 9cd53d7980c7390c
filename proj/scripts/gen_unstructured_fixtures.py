#!/usr/bin/env python3
"""Generate the committed unstructured mesh fixtures data/uu_l*.msh and
data/nu_l*.msh.

Two parent meshes of the unit square are built with scipy's Delaunay
triangulation and then refined uniformly (edge-midpoint quadrisection), one
file per refinement level:

  uu  quasi-uniform, target spacing ~0.5 on the parent
  nu  graded, ~3x finer within distance 0.2 of the interface {x = 0}

Vertices on the square boundary are kept exactly on the boundary so that the
library's coordinate-predicate tagging (gamma = {x = 0}) applies unchanged.
The output format matches read_mesh: `mesh2d 1`, counts, vertices, cells.

Deterministic (fixed RNG seed); rerunning reproduces the files byte-for-byte.
"""

import argparse
import pathlib

import numpy as np
from scipy.spatial import Delaunay


def boundary_points(xs, ys):
    """Points along the square boundary at the given column/row stations."""
    pts = []
    for x in xs:
        pts.append((x, 0.0))
        pts.append((x, 1.0))
    for y in ys[1:-1]:
        pts.append((0.0, y))
        pts.append((1.0, y))
    return pts


def parent_uu(rng):
    xs = np.array([0.0, 0.34, 0.67, 1.0])
    ys = np.array([0.0, 0.34, 0.67, 1.0])
    pts = boundary_points(xs, ys)
    for x in xs[1:-1]:
        for y in ys[1:-1]:
            jx = rng.uniform(-0.07, 0.07)
            jy = rng.uniform(-0.07, 0.07)
            pts.append((x + jx, y + jy))
    return np.array(pts)


def parent_nu(rng):
    # Column stations: ~3x finer than the far field while x < 0.2.
    xs = np.array([0.0, 0.065, 0.13, 0.2, 0.42, 0.66, 1.0])
    ys_coarse = np.array([0.0, 0.34, 0.67, 1.0])
    pts = []
    # Bottom/top boundary at every column station.
    for x in xs:
        pts.append((x, 0.0))
        pts.append((x, 1.0))
    # Left boundary (the interface): fine spacing.
    ys_fine = np.linspace(0.0, 1.0, 9)
    for y in ys_fine[1:-1]:
        pts.append((0.0, y))
    # Right boundary: coarse spacing.
    for y in ys_coarse[1:-1]:
        pts.append((1.0, y))
    # Interior columns: local vertical spacing tied to the column spacing.
    for x in xs[1:-1]:
        n = 8 if x < 0.2 else 3
        for y in np.linspace(0.0, 1.0, n + 1)[1:-1]:
            amp = 0.25 / n
            jx = rng.uniform(-amp, amp)
            jy = rng.uniform(-amp, amp)
            pts.append((x + jx, y + jy))
    return np.array(pts)


def triangulate(pts):
    tri = Delaunay(pts)
    cells = []
    for simplex in tri.simplices:
        i, j, k = (int(v) for v in simplex)
        a, b, c = pts[i], pts[j], pts[k]
        area2 = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if abs(area2) < 1e-14:
            raise RuntimeError("degenerate triangle in Delaunay output")
        if area2 < 0:
            j, k = k, j
        cells.append((i, j, k))
    return cells


def refine(pts, cells):
    pts = [tuple(p) for p in pts]
    midpoint = {}

    def mid(i, j):
        key = (min(i, j), max(i, j))
        if key not in midpoint:
            a, b = pts[key[0]], pts[key[1]]
            pts.append(((a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0))
            midpoint[key] = len(pts) - 1
        return midpoint[key]

    out = []
    for i, j, k in cells:
        ij, jk, ki = mid(i, j), mid(j, k), mid(k, i)
        out.extend([(i, ij, ki), (ij, j, jk), (ki, jk, k), (ij, jk, ki)])
    return np.array(pts), out


def write_mesh(path, pts, cells):
    lines = ["mesh2d 1", f"{len(pts)} {len(cells)} 0"]
    for x, y in pts:
        lines.append(f"{float(x)!r} {float(y)!r}")
    for i, j, k in cells:
        lines.append(f"{i} {j} {k}")
    path.write_text("\n".join(lines) + "\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="data")
    ap.add_argument("--levels", type=int, default=5)
    args = ap.parse_args()
    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    for family, builder, seed in [("uu", parent_uu, 20240601), ("nu", parent_nu, 20240602)]:
        rng = np.random.default_rng(seed)
        pts = builder(rng)
        cells = triangulate(pts)
        for level in range(1, args.levels + 1):
            if level > 1:
                pts, cells = refine(pts, cells)
            path = out / f"{family}_l{level}.msh"
            write_mesh(path, pts, cells)
            print(f"{path}: {len(pts)} vertices, {len(cells)} cells")


if __name__ == "__main__":
    main()
