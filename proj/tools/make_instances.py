#!/usr/bin/env python3
"""Generate the seeded synthetic EUC_2D benchmark instances under data/bench/.

Uniform instances draw integer coordinates in [0, 1000)^2; clustered ones
place points around a handful of Gaussian centres. Output is TSPLIB text.
"""
import argparse
import json
import pathlib

import numpy as np

SPECS = [
    # name, n, kind, seed
    ("rnd30", 30, "uniform", 30),
    ("clu40", 40, "clustered", 40),
    ("rnd60", 60, "uniform", 60),
    ("clu76", 76, "clustered", 76),
    ("rnd100", 100, "uniform", 100),
]


def coords(n, kind, seed):
    rng = np.random.default_rng(seed)
    if kind == "uniform":
        return rng.integers(0, 1000, size=(n, 2))
    centres = rng.uniform(100, 900, size=(max(3, n // 12), 2))
    pick = rng.integers(0, len(centres), size=n)
    pts = centres[pick] + rng.normal(0, 45, size=(n, 2))
    return np.clip(np.rint(pts), 0, 1000).astype(int)


def write_euc(path, name, comment, pts):
    lines = [f"NAME: {name}", "TYPE: TSP", f"COMMENT: {comment}",
             f"DIMENSION: {len(pts)}", "EDGE_WEIGHT_TYPE: EUC_2D", "NODE_COORD_SECTION"]
    lines += [f"{i + 1} {x} {y}" for i, (x, y) in enumerate(pts)]
    lines.append("EOF")
    path.write_text("\n".join(lines) + "\n")


def write_gr24(path, deap_json):
    data = json.loads(pathlib.Path(deap_json).read_text())
    m = data["DistanceMatrix"]
    lines = ["NAME: gr24", "TYPE: TSP", "COMMENT: 24-city problem (Groetschel)",
             f"DIMENSION: {len(m)}", "EDGE_WEIGHT_TYPE: EXPLICIT",
             "EDGE_WEIGHT_FORMAT: FULL_MATRIX", "EDGE_WEIGHT_SECTION"]
    lines += [" ".join(str(v) for v in row) for row in m]
    lines.append("EOF")
    path.write_text("\n".join(lines) + "\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data/bench")
    ap.add_argument("--small-out", default="data/small")
    ap.add_argument("--gr24-json", help="DEAP examples/ga/tsp/gr24.json to convert")
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, n, kind, seed in SPECS:
        write_euc(out / f"{name}.tsp", name,
                  f"synthetic {kind} EUC_2D, numpy seed {seed}", coords(n, kind, seed))
    if args.gr24_json:
        small = pathlib.Path(args.small_out)
        small.mkdir(parents=True, exist_ok=True)
        write_gr24(small / "gr24.tsp", args.gr24_json)


if __name__ == "__main__":
    main()
