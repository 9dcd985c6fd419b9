#!/usr/bin/env python3
"""Regenerates the msnbc-augment block of data/scenario_constants.json.

The rate sets and the 17-category repeat-allowing mixture used to synthesize
MSNBC-style streams are drawn once from a fixed seed and then frozen in the
constants file; this script documents how they were produced.
"""
import json
import sys

import numpy as np

CATEGORIES = ["frontpage", "news", "tech", "local", "opinion", "on-air", "misc",
              "weather", "msn-news", "health", "living", "business",
              "msn-sports", "sports", "summary", "bbs", "travel"]
MEAN_BANDS = [1.0, 5.0, 20.0, 60.0]
STICKINESS = [0.25, 0.45, 0.65]


def main(path):
    rng = np.random.default_rng(20170117)
    J = len(CATEGORIES)
    rate_sets = []
    for base in MEAN_BANDS:
        means = base * rng.uniform(0.75, 1.33, size=J)
        rate_sets.append([float(f"{1.0 / m:.6g}") for m in means])

    popularity = rng.dirichlet(np.full(J, 2.0))
    popularity[0] += 0.3
    popularity /= popularity.sum()
    initial = [float(f"{p:.6g}") for p in popularity]
    initial[0] = float(f"{1.0 - sum(initial[1:]):.12g}")

    jump = np.zeros((J, J))
    for j in range(J):
        row = rng.dirichlet(4.0 * np.delete(popularity, j) * (J - 1))
        jump[j, np.arange(J) != j] = row

    transitions = []
    for s in STICKINESS:
        m = (1.0 - s) * jump
        np.fill_diagonal(m, s)
        rows = []
        for j in range(J):
            r = [float(f"{x:.6g}") for x in m[j]]
            k = (j + 1) % J if j != 0 else 1
            r[k] = float(f"{1.0 - (sum(r) - r[k]):.12g}")
            rows.append(r)
        transitions.append(rows)

    with open(path) as f:
        doc = json.load(f)
    doc["msnbc"] = {
        "categories": CATEGORIES,
        "rate_sets": rate_sets,
        "stream_model": {
            "weights": [1.0 / 3, 1.0 / 3, 1.0 / 3],
            "initial_probs": [initial] * len(STICKINESS),
            "transitions": transitions,
        },
    }
    with open(path, "w") as f:
        json.dump(doc, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/scenario_constants.json")
