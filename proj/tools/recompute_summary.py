#!/usr/bin/env python3
"""Recompute the step deltas of summary.json from footprints.csv and compare.

Width is measured across the previous footstep's nominal heading, timing is
nominal minus adapted step duration. Exit status 0 when everything agrees.
"""
import argparse
import csv
import json
import math
import sys


def deltas(rows):
    out = []
    for k in range(1, len(rows)):
        cur, prev = rows[k], rows[k - 1]
        if cur["was_adapted"] != "1":
            continue
        yaw = float(prev["nominal_yaw"])
        lx, ly = -math.sin(yaw), math.cos(yaw)

        def width(tag):
            dx = float(cur[tag + "_x"]) - float(prev[tag + "_x"])
            dy = float(cur[tag + "_y"]) - float(prev[tag + "_y"])
            return abs(lx * dx + ly * dy)

        nominal_T = float(cur["nominal_impact_t"]) - float(prev["nominal_impact_t"])
        adapted_T = float(cur["adapted_impact_t"]) - float(prev["adapted_impact_t"])
        out.append((int(cur["index"]), width("adapted") - width("nominal"), nominal_T - adapted_T))
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("footprints")
    ap.add_argument("summary")
    ap.add_argument("--tol", type=float, default=1e-12)
    args = ap.parse_args()

    with open(args.footprints, newline="") as f:
        rows = list(csv.DictReader(f))
    with open(args.summary) as f:
        summary = json.load(f)

    mine = deltas(rows)
    theirs = summary["adapted_steps"]
    errors = []
    if len(mine) != len(theirs):
        errors.append(f"adapted step count {len(mine)} vs {len(theirs)}")
    else:
        for (idx, w, t), s in zip(mine, theirs):
            if idx != s["index"]:
                errors.append(f"index {idx} vs {s['index']}")
            if abs(w - s["width_delta"]) > args.tol:
                errors.append(f"step {idx}: width {w!r} vs {s['width_delta']!r}")
            if abs(t - s["timing_delta"]) > args.tol:
                errors.append(f"step {idx}: timing {t!r} vs {s['timing_delta']!r}")

    if mine:
        mean_w = sum(d[1] for d in mine) / len(mine)
        mean_t = sum(d[2] for d in mine) / len(mine)
    else:
        mean_w = mean_t = 0.0
    if abs(mean_w - summary["mean_width_delta"]) > args.tol:
        errors.append(f"mean width {mean_w!r} vs {summary['mean_width_delta']!r}")
    if abs(mean_t - summary["mean_timing_delta"]) > args.tol:
        errors.append(f"mean timing {mean_t!r} vs {summary['mean_timing_delta']!r}")

    for e in errors:
        print(e, file=sys.stderr)
    print(f"{len(mine)} adapted steps, mean width {mean_w:.6f} m, mean timing {mean_t:.6f} s: "
          + ("match" if not errors else "MISMATCH"))
    return 1 if errors else 0


if __name__ == "__main__":
    sys.exit(main())
