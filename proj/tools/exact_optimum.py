#!/usr/bin/env python3
"""Exact optimum of small/medium symmetric TSPLIB instances.

Solves the edge formulation with degree constraints and adds subtour
elimination cuts lazily (re-solving with HiGHS through scipy.optimize.milp)
until the integer solution is a single Hamiltonian cycle. Prints
`name,optimum` rows suitable for the optima registry.
"""
import argparse
import itertools
import math
import pathlib
import sys

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import lil_matrix


def parse(path):
    hdr, coords, weights = {}, [], []
    section = None
    for raw in pathlib.Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line == "EOF":
            continue
        if line in ("NODE_COORD_SECTION", "EDGE_WEIGHT_SECTION"):
            section = line
            continue
        if section is None or ":" in line:
            k, v = line.split(":", 1)
            hdr[k.strip()] = v.strip()
            section = None
            continue
        toks = line.split()
        if section == "NODE_COORD_SECTION":
            coords.append((float(toks[1]), float(toks[2])))
        else:
            weights.extend(int(t) for t in toks)
    n = int(hdr["DIMENSION"])
    kind = hdr["EDGE_WEIGHT_TYPE"]
    w = np.zeros((n, n), dtype=np.int64)
    if kind in ("EUC_2D", "CEIL_2D"):
        for i, j in itertools.combinations(range(n), 2):
            d = math.hypot(coords[i][0] - coords[j][0], coords[i][1] - coords[j][1])
            w[i, j] = w[j, i] = int(d + 0.5) if kind == "EUC_2D" else math.ceil(d)
    else:
        fmt = hdr["EDGE_WEIGHT_FORMAT"]
        it = iter(weights)
        if fmt == "FULL_MATRIX":
            w = np.array(weights, dtype=np.int64).reshape(n, n)
        elif fmt == "LOWER_DIAG_ROW":
            for i in range(n):
                for j in range(i + 1):
                    w[i, j] = w[j, i] = next(it)
        elif fmt == "UPPER_ROW":
            for i in range(n):
                for j in range(i + 1, n):
                    w[i, j] = w[j, i] = next(it)
        else:
            sys.exit(f"unsupported format {fmt}")
    return hdr["NAME"], n, w


def components(n, edges):
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in edges:
        parent[find(i)] = find(j)
    groups = {}
    for v in range(n):
        groups.setdefault(find(v), []).append(v)
    return list(groups.values())


def solve(n, w):
    pairs = list(itertools.combinations(range(n), 2))
    index = {p: k for k, p in enumerate(pairs)}
    cost = np.array([w[i, j] for i, j in pairs], dtype=float)
    deg = lil_matrix((n, len(pairs)))
    for k, (i, j) in enumerate(pairs):
        deg[i, k] = 1
        deg[j, k] = 1
    cons = [LinearConstraint(deg.tocsr(), 2, 2)]
    while True:
        res = milp(cost, constraints=cons, integrality=np.ones(len(pairs)),
                   bounds=Bounds(0, 1))
        if res.x is None:
            sys.exit("milp failed: " + res.message)
        chosen = [pairs[k] for k in range(len(pairs)) if res.x[k] > 0.5]
        comps = components(n, chosen)
        if len(comps) == 1:
            return int(round(res.fun))
        for comp in comps:
            row = lil_matrix((1, len(pairs)))
            for i, j in itertools.combinations(sorted(comp), 2):
                row[0, index[(i, j)]] = 1
            cons.append(LinearConstraint(row.tocsr(), -np.inf, len(comp) - 1))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("files", nargs="+")
    args = ap.parse_args()
    print("name,optimum")
    for f in args.files:
        name, n, w = parse(f)
        print(f"{name},{solve(n, w)}", flush=True)


if __name__ == "__main__":
    main()
