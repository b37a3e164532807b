# Copyright 2026 The bal Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes the small synthetic CSV datasets shipped in data/."""

import argparse
import pathlib

import numpy as np


def regression(rng, n=300, d=8):
    x = rng.normal(size=(n, d))
    coef = rng.normal(size=d)
    y = np.sin(x[:, 0]) + 0.5 * x[:, 1] ** 2 + x @ coef * 0.3 + 0.1 * rng.normal(size=n)
    return x, y


def classification(rng, per_class=100, k=4, d=6):
    centres = rng.normal(scale=1.5, size=(k, d))
    x = np.concatenate([c + rng.normal(size=(per_class, d)) for c in centres])
    y = np.repeat(np.arange(k), per_class)
    order = rng.permutation(len(y))
    return x[order], y[order]


def write(path, x, y, target, fmt):
    names = [f"x{i}" for i in range(x.shape[1])]
    with open(path, "w", newline="\n") as f:
        f.write(",".join(names + [target]) + "\n")
        for row, label in zip(x, y):
            f.write(",".join(f"{v:.6f}" for v in row) + "," + fmt.format(label) + "\n")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=pathlib.Path(__file__).resolve().parent.parent / "data", type=pathlib.Path)
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(20260)
    write(args.out / "regression_demo.csv", *regression(rng), "y", "{:.6f}")
    write(args.out / "classification_demo.csv", *classification(rng), "label", "{:d}")


if __name__ == "__main__":
    main()
