#!/usr/bin/env python3
"""Convert Planetoid pickle bundles (ind.<name>.*) into the plain-text
dataset layout this repo consumes:

    meta.json     {"name", "num_nodes", "num_features", "num_classes"}
    edges.tsv     src<TAB>dst, one undirected edge per line, deduped, no self-loops
    features.tsv  node<TAB>dim<TAB>value sparse triplets
    labels.tsv    line k = integer label of node k
    splits.json   {"train": [...], "val": [...], "test": [...]}

Usage: convert_planetoid.py <planetoid-data-dir> <name> <out-dir>

where <planetoid-data-dir> holds ind.<name>.{x,y,tx,ty,allx,ally,graph,test.index}
(the standard citation-benchmark distribution) and <name> is one of
cora, citeseer, pubmed. Node ordering and the fixed train/val/test split
match the standard transductive protocol: train = first 20 per class,
val = the following 500 nodes, test = the 1000 designated test nodes.
"""

import json
import pickle
import sys
from pathlib import Path

import numpy as np
import scipy.sparse as sp


def load_pickles(data_dir: Path, name: str):
    objs = {}
    for part in ["x", "y", "tx", "ty", "allx", "ally", "graph"]:
        with open(data_dir / f"ind.{name}.{part}", "rb") as f:
            objs[part] = pickle.load(f, encoding="latin1")
    test_idx = [int(line) for line in open(data_dir / f"ind.{name}.test.index")]
    return objs, test_idx


def main():
    if len(sys.argv) != 4:
        sys.exit(__doc__)
    data_dir, name, out_dir = Path(sys.argv[1]), sys.argv[2], Path(sys.argv[3])
    objs, test_idx_reorder = load_pickles(data_dir, name)
    test_idx_range = np.sort(test_idx_reorder)

    tx, ty = objs["tx"], objs["ty"]
    if name == "citeseer":
        # Some citeseer test nodes are isolated and absent from tx/ty;
        # insert zero rows at their positions, as the standard loaders do.
        full = range(min(test_idx_reorder), max(test_idx_reorder) + 1)
        tx_ext = sp.lil_matrix((len(full), objs["x"].shape[1]))
        tx_ext[test_idx_range - min(test_idx_range), :] = tx
        tx = tx_ext
        ty_ext = np.zeros((len(full), objs["y"].shape[1]))
        ty_ext[test_idx_range - min(test_idx_range), :] = ty
        ty = ty_ext

    features = sp.vstack((objs["allx"], tx)).tolil()
    features[test_idx_reorder, :] = features[test_idx_range, :]
    features = features.tocoo()

    labels = np.vstack((objs["ally"], ty))
    labels[test_idx_reorder, :] = labels[test_idx_range, :]
    int_labels = labels.argmax(axis=1)  # zero rows (unlabeled fillers) map to 0

    n = labels.shape[0]
    edges = set()
    self_loops = 0
    for u, nbrs in objs["graph"].items():
        for v in nbrs:
            if u == v:
                self_loops += 1
                continue
            edges.add((min(u, v), max(u, v)))
    edges = sorted(edges)

    out_dir.mkdir(parents=True, exist_ok=True)
    meta = {
        "name": name,
        "num_nodes": int(n),
        "num_features": int(features.shape[1]),
        "num_classes": int(labels.shape[1]),
    }
    (out_dir / "meta.json").write_text(json.dumps(meta) + "\n")

    with open(out_dir / "edges.tsv", "w") as f:
        for u, v in edges:
            f.write(f"{u}\t{v}\n")

    with open(out_dir / "features.tsv", "w") as f:
        order = np.lexsort((features.col, features.row))
        for k in order:
            r, c, val = features.row[k], features.col[k], features.data[k]
            v = int(val) if float(val) == int(val) else float(val)
            f.write(f"{r}\t{c}\t{v}\n")

    with open(out_dir / "labels.tsv", "w") as f:
        for lab in int_labels:
            f.write(f"{int(lab)}\n")

    splits = {
        "train": list(range(len(objs["y"]))),
        "val": list(range(len(objs["y"]), len(objs["y"]) + 500)),
        "test": [int(i) for i in test_idx_range],
    }
    (out_dir / "splits.json").write_text(json.dumps(splits) + "\n")

    deg = np.zeros(n, dtype=int)
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    print(
        f"{name}: nodes={n} features={features.shape[1]} classes={labels.shape[1]} "
        f"undirected_edges={len(edges)} dropped_self_loops={self_loops} "
        f"isolated={int((deg == 0).sum())} "
        f"train={len(splits['train'])} val={len(splits['val'])} test={len(splits['test'])}"
    )


if __name__ == "__main__":
    main()
