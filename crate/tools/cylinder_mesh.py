"""Write the bundled coarse cylinder mesh (Gmsh MSH 2.2 ASCII).

Polar grid around a unit-diameter cylinder at the origin, geometrically
stretched towards the outer circle, each quad split into two triangles with
alternating diagonals.

    python3 tools/cylinder_mesh.py crates/dgviv/data/cylinder_coarse.msh
"""

import argparse
import math


def build(n_theta, n_r, r_wall, r_far):
    # First radial spacing equal to the wall edge length; solve for the ratio.
    h0 = 2 * math.pi * r_wall / n_theta
    lo, hi = 1.0 + 1e-9, 2.0
    for _ in range(200):
        q = 0.5 * (lo + hi)
        if h0 * (q**n_r - 1) / (q - 1) > r_far - r_wall:
            hi = q
        else:
            lo = q
    radii = [r_wall]
    for j in range(n_r):
        radii.append(radii[-1] + h0 * q**j)
    radii[-1] = r_far

    def node(i, j):
        return 1 + j * n_theta + (i % n_theta)

    nodes = []
    for j, r in enumerate(radii):
        for i in range(n_theta):
            a = 2 * math.pi * i / n_theta
            nodes.append((node(i, j), r * math.cos(a), r * math.sin(a)))

    tris = []
    for j in range(n_r):
        for i in range(n_theta):
            a, b = node(i, j), node(i + 1, j)
            c, d = node(i + 1, j + 1), node(i, j + 1)
            if (i + j) % 2 == 0:
                tris += [(a, b, c), (a, c, d)]
            else:
                tris += [(a, b, d), (b, c, d)]

    # Wall lines run clockwise so the fluid lies on their left.
    wall = [(node(i + 1, 0), node(i, 0)) for i in range(n_theta)]
    far = [(node(i, n_r), node(i + 1, n_r)) for i in range(n_theta)]
    return nodes, tris, wall, far


def write(path, nodes, tris, wall, far):
    with open(path, "w") as f:
        f.write("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n")
        f.write('$PhysicalNames\n3\n1 1 "wall"\n1 2 "farfield"\n2 3 "fluid"\n')
        f.write("$EndPhysicalNames\n")
        f.write(f"$Nodes\n{len(nodes)}\n")
        for i, x, y in nodes:
            f.write(f"{i} {x:.16g} {y:.16g} 0\n")
        f.write("$EndNodes\n")
        f.write(f"$Elements\n{len(wall) + len(far) + len(tris)}\n")
        k = 1
        for tag, lines in ((1, wall), (2, far)):
            for a, b in lines:
                f.write(f"{k} 1 2 {tag} {tag} {a} {b}\n")
                k += 1
        for a, b, c in tris:
            f.write(f"{k} 2 2 3 3 {a} {b} {c}\n")
            k += 1
        f.write("$EndElements\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("output")
    ap.add_argument("--n-theta", type=int, default=64)
    ap.add_argument("--n-r", type=int, default=30)
    ap.add_argument("--r-far", type=float, default=15.0)
    args = ap.parse_args()
    nodes, tris, wall, far = build(args.n_theta, args.n_r, 0.5, args.r_far)
    write(args.output, nodes, tris, wall, far)
    print(f"{len(nodes)} nodes, {len(tris)} triangles")


if __name__ == "__main__":
    main()
