#!/usr/bin/env python3
# Copyright 2026 The PathMPNN Authors.
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

"""Converts V2000 SD files into the one-molecule-per-line dataset format.

Only the connection table and one numeric property are read. Coordinates are
dropped unless --coords is given (2D depictions are not real geometry).
"""

import argparse
import json
import random
import sys

BOND_ORDERS = {1: "single", 2: "double", 3: "triple", 4: "aromatic"}


def read_blocks(path):
    with open(path, encoding="utf-8") as handle:
        block = []
        for line in handle:
            line = line.rstrip("\n")
            if line == "$$$$":
                yield block
                block = []
            else:
                block.append(line)
        if any(l.strip() for l in block):
            raise ValueError(f"{path}: trailing record without $$$$")


def parse_block(block, prop):
    counts = block[3]
    if "V2000" not in counts:
        raise ValueError(f"record '{block[0]}' is not V2000")
    n_atoms, n_bonds = int(counts[0:3]), int(counts[3:6])
    elements, coords = [], []
    for line in block[4:4 + n_atoms]:
        coords.append([float(line[0:10]), float(line[10:20]), float(line[20:30])])
        elements.append(line[31:34].strip())
    bonds = []
    for line in block[4 + n_atoms:4 + n_atoms + n_bonds]:
        i, j, kind = int(line[0:3]) - 1, int(line[3:6]) - 1, int(line[6:9])
        if kind not in BOND_ORDERS:
            raise ValueError(f"record '{block[0]}': unsupported bond type {kind}")
        bonds.append([i, j, BOND_ORDERS[kind]])
    value = None
    for k, line in enumerate(block):
        if line.startswith(">") and f"<{prop}>" in line:
            value = float(block[k + 1])
    if value is None:
        raise ValueError(f"record '{block[0]}' has no <{prop}> field")
    return {"id": block[0].strip(), "elements": elements, "coords": coords,
            "bonds": bonds, "targets": [value]}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("inputs", nargs="+")
    parser.add_argument("--property", required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--subset", type=int, default=0)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--coords", action="store_true")
    args = parser.parse_args()

    records = []
    for path in args.inputs:
        records.extend(parse_block(b, args.property) for b in read_blocks(path))
    if args.subset:
        records = random.Random(args.seed).sample(records, args.subset)
    vocabulary = sorted({e for r in records for e in r["elements"]})
    with open(args.out, "w", encoding="utf-8") as out:
        out.write(json.dumps({"header": {"elements": vocabulary,
                                         "targets": [args.property]}}) + "\n")
        for r in records:
            if not args.coords:
                del r["coords"]
            out.write(json.dumps(r) + "\n")
    print(f"wrote {len(records)} molecules, {len(vocabulary)} elements", file=sys.stderr)


if __name__ == "__main__":
    main()
