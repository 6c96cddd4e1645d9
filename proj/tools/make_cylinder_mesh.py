#!/usr/bin/env python3
"""Writes the bundled cylinder-in-channel mesh (latinflow-mesh v1, Q2 quads).

Channel [0, 2.2] x [0, 0.41] with a cylinder of radius 0.05 centred at
(0.2, 0.2). An O-grid fills the box [0, 0.41]^2 around the cylinder and a
structured block covers the downstream part.
"""
import argparse
import math

import numpy as np

LENGTH, HEIGHT = 2.2, 0.41
CENTER = np.array([0.2, 0.2])
RADIUS = 0.05
BOX = 0.41


def o_grid_block(side, n_t, n_r, grading):
    """Q2 node lattice (2 n_t + 1) x (2 n_r + 1) between one box side and its arc."""
    corners = [np.array(p) for p in ((0.0, 0.0), (BOX, 0.0), (BOX, BOX), (0.0, BOX))]
    a, b = corners[side], corners[(side + 1) % 4]
    ang_a = math.atan2(*(a - CENTER)[::-1])
    ang_b = math.atan2(*(b - CENTER)[::-1])
    if ang_b < ang_a:
        ang_b += 2.0 * math.pi
    s = np.linspace(0.0, 1.0, 2 * n_t + 1)
    # geometric radial spacing, finest at the cylinder
    widths = grading ** np.arange(n_r)
    r_el = np.concatenate([[0.0], np.cumsum(widths) / widths.sum()])
    r = np.empty(2 * n_r + 1)
    r[0::2] = r_el
    r[1::2] = 0.5 * (r_el[:-1] + r_el[1:])
    lattice = np.empty((2 * n_r + 1, 2 * n_t + 1, 2))
    for j, rj in enumerate(r):
        for i, si in enumerate(s):
            ang = ang_a + si * (ang_b - ang_a)
            inner = CENTER + RADIUS * np.array([math.cos(ang), math.sin(ang)])
            outer = a + si * (b - a)
            lattice[j, i] = (1.0 - rj) * inner + rj * outer
    return lattice


def rect_block(x0, x1, y0, y1, nx, ny):
    xs = np.linspace(x0, x1, 2 * nx + 1)
    ys = np.linspace(y0, y1, 2 * ny + 1)
    lattice = np.empty((2 * ny + 1, 2 * nx + 1, 2))
    for j, y in enumerate(ys):
        for i, x in enumerate(xs):
            lattice[j, i] = (x, y)
    return lattice


class Builder:
    def __init__(self):
        self.nodes = []
        self.index = {}
        self.elements = []

    def node(self, p):
        key = (round(p[0], 10), round(p[1], 10))
        if key not in self.index:
            self.index[key] = len(self.nodes)
            self.nodes.append((float(p[0]), float(p[1])))
        return self.index[key]

    def add_lattice(self, lat):
        rows, cols = lat.shape[0], lat.shape[1]
        ids = [[self.node(lat[j, i]) for i in range(cols)] for j in range(rows)]
        for ej in range((rows - 1) // 2):
            for ei in range((cols - 1) // 2):
                j, i = 2 * ej, 2 * ei
                el = [ids[j][i], ids[j][i + 2], ids[j + 2][i + 2], ids[j + 2][i],
                      ids[j][i + 1], ids[j + 1][i + 2], ids[j + 2][i + 1], ids[j + 1][i],
                      ids[j + 1][i + 1]]
                if signed_area(self.nodes, el) < 0.0:
                    el = [el[0], el[3], el[2], el[1], el[7], el[6], el[5], el[4], el[8]]
                self.elements.append(el)


def signed_area(nodes, el):
    p = [np.array(nodes[k]) for k in el[:4]]
    area = 0.0
    for k in range(4):
        area += p[k][0] * p[(k + 1) % 4][1] - p[(k + 1) % 4][0] * p[k][1]
    return 0.5 * area


def classify(p):
    x, y = p
    tol = 1e-9
    if abs(x) < tol:
        return "inflow"
    if abs(x - LENGTH) < tol:
        return "outflow"
    if abs(y) < tol or abs(y - HEIGHT) < tol:
        return "walls"
    if abs(math.hypot(x - CENTER[0], y - CENTER[1]) - RADIUS) < 1e-7:
        return "cylinder"
    raise ValueError(f"unclassified boundary edge at {p}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("output")
    ap.add_argument("--tangential", type=int, default=16, help="elements per box side")
    ap.add_argument("--radial", type=int, default=12, help="element layers around the cylinder")
    ap.add_argument("--grading", type=float, default=1.15, help="radial growth ratio")
    ap.add_argument("--downstream", type=int, default=100, help="elements along the downstream block")
    args = ap.parse_args()

    b = Builder()
    for side in range(4):
        b.add_lattice(o_grid_block(side, args.tangential, args.radial, args.grading))
    b.add_lattice(rect_block(BOX, LENGTH, 0.0, HEIGHT, args.downstream, args.tangential))

    edge_count = {}
    for e, el in enumerate(b.elements):
        for k in range(4):
            key = tuple(sorted((el[k], el[(k + 1) % 4])))
            edge_count.setdefault(key, []).append((e, k))
    boundary = {}
    for key, uses in edge_count.items():
        if len(uses) == 1:
            e, k = uses[0]
            mid = b.nodes[b.elements[e][4 + k]]
            boundary.setdefault(classify(mid), []).append((e, k))

    with open(args.output, "w") as f:
        f.write("latinflow-mesh v1 dim 2\n")
        f.write(f"# channel {LENGTH} x {HEIGHT}, cylinder r = {RADIUS} at ({CENTER[0]}, {CENTER[1]})\n")
        f.write(f"nodes {len(b.nodes)}\n")
        for x, y in b.nodes:
            f.write(f"{x:.17g} {y:.17g}\n")
        f.write(f"elements {len(b.elements)}\n")
        for el in b.elements:
            f.write(" ".join(map(str, el)) + "\n")
        for name in sorted(boundary):
            edges = sorted(boundary[name])
            f.write(f"boundary {name} {len(edges)}\n")
            for e, k in edges:
                f.write(f"{e} {k}\n")


if __name__ == "__main__":
    main()
