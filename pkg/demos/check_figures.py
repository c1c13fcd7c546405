"""Validate a finished figure run: curve counts, orderings, monotonicity."""

import json
import re
import sys

import numpy as np


def read_csv(path):
    lines = open(path).read().splitlines()
    return lines[0].split(","), np.array(
        [[float(v) for v in line.split(",")] for line in lines[1:]])


def main(out_dir: str) -> int:
    failures = []

    _, curve = read_csv(f"{out_dir}/fig2/curve.csv")
    if not np.all(np.diff(curve[:, 1]) < 0):
        failures.append("fig2: endowment column is not strictly decreasing")

    for fig in (3, 4, 5, 6, 7):
        index = json.load(open(f"{out_dir}/fig{fig}/index.json"))
        payoffs = []
        for run in index["runs"]:
            if not run["ok"]:
                failures.append(f"fig{fig}: run {run['value']} failed")
                continue
            _, data = read_csv(f"{out_dir}/fig{fig}/" + run["files"]["profile"])
            payoffs.append(data[:, 1])
            if not np.all(np.diff(data[:, 1]) <= 1e-10):
                failures.append(f"fig{fig}: payoff for {run['value']} not non-increasing")
        if len(payoffs) != 3:
            failures.append(f"fig{fig}: expected 3 curves, got {len(payoffs)}")
        if fig == 3 and len(payoffs) == 3:
            lo, mid, hi = payoffs
            if not (np.all(lo <= mid + 1e-9) and np.all(mid <= hi + 1e-9)):
                failures.append("fig3: profiles not ordered by endowment")

    expected_polylines = {1: 3, 2: 1, 3: 3, 4: 3, 5: 3, 6: 3, 7: 3}
    for fig, count in expected_polylines.items():
        svg = open(f"{out_dir}/fig{fig}.svg").read()
        found = len(re.findall("<polyline", svg))
        if found != count:
            failures.append(f"fig{fig}.svg: {found} curves, expected {count}")

    for failure in failures:
        print("FAIL:", failure, file=sys.stderr)
    if not failures:
        print("figure checks passed: 7 figures, curve counts and shapes as expected")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1] if len(sys.argv) > 1 else "demos/out"))
