#!/usr/bin/env python3
"""Download the real-world graphs into a data directory in the formats the
`aca` registry reads.

    python3 scripts/fetch_datasets.py [--dest DIR] [--asg FILE] [NAME ...]

DIR defaults to $ACA_DATA_DIR, then ./data. NAME is any of football,
netsci, email, grid, cora, citeseer, asg (default: all that can be fetched).

The ASG network is published as a UCINET file behind a web page, not a
direct link. Download it by hand and pass it with --asg; DL edge lists,
full-matrix DL files and plain CSV adjacency matrices are accepted.

Cora and CiteSeer come as scipy sparse `.npz` archives and need numpy.
"""

import argparse
import gzip
import io
import os
import sys
import urllib.request
import zipfile
from pathlib import Path

NEWMAN = "http://websites.umich.edu/~mejn/netdata/"
SNAP = "https://snap.stanford.edu/data/"
NPZ = "https://raw.githubusercontent.com/abojchevski/node_embedding_attack/master/data/"


def fetch(url):
    print(f"  fetching {url}")
    with urllib.request.urlopen(url, timeout=120) as r:
        return r.read()


def from_zip(url, member, dest):
    with zipfile.ZipFile(io.BytesIO(fetch(url))) as z:
        (dest / member).write_bytes(z.read(member))


def newman(name, member):
    return lambda dest: from_zip(NEWMAN + name, member, dest)


def email(dest):
    for f in ["email-Eu-core.txt", "email-Eu-core-department-labels.txt"]:
        (dest / f).write_bytes(gzip.decompress(fetch(SNAP + f + ".gz")))


def npz(name):
    def run(dest):
        import numpy as np

        data = np.load(io.BytesIO(fetch(NPZ + name + ".npz")), allow_pickle=True)
        indptr, indices = data["adj_indptr"], data["adj_indices"]
        n = int(data["adj_shape"][0])
        with open(dest / f"{name}.edges", "w") as out:
            out.write(f"# {name}: {n} nodes, directed citations read as undirected\n")
            for u in range(n):
                for v in indices[indptr[u] : indptr[u + 1]]:
                    if u < v or not _has(indptr, indices, v, u):
                        out.write(f"{u} {v}\n")
        with open(dest / f"{name}.labels.csv", "w") as out:
            out.write("node,label\n")
            for u, label in enumerate(data["labels"]):
                out.write(f"{u},{label}\n")

    return run


def _has(indptr, indices, u, v):
    row = indices[indptr[u] : indptr[u + 1]]
    return v in row


def ucinet_to_edges(src, dest):
    """Convert a UCINET DL file or a CSV adjacency matrix to asg.edges."""
    text = Path(src).read_text(errors="replace")
    lines = [l.strip() for l in text.splitlines() if l.strip()]
    edges = set()
    if lines[0].lower().startswith("dl"):
        lower = [l.lower() for l in lines]
        start = next(i for i, l in enumerate(lower) if l.startswith("data:")) + 1
        header = " ".join(lower[:start])
        labels = []
        if "labels:" in header:
            i = next(i for i, l in enumerate(lower) if l.startswith("labels:")) + 1
            while i < start - 1:
                parts = lines[i].split(",") if "," in lines[i] else lines[i].split()
                labels += [t.strip().strip('"') for t in parts]
                i += 1
        rows = lines[start:]
        if "edgelist" in header:
            for row in rows:
                toks = row.replace(",", " ").split()
                for other in toks[1:]:
                    if toks[0] != other:
                        edges.add(tuple(sorted((toks[0], other))))
        else:
            matrix = [row.replace(",", " ").split() for row in rows]
            names = labels or [str(i) for i in range(len(matrix))]
            for i, row in enumerate(matrix):
                for j, cell in enumerate(row):
                    if i != j and float(cell) != 0:
                        edges.add(tuple(sorted((names[i], names[j]))))
    else:
        rows = [l.split(",") for l in lines]
        names = [c.strip().strip('"') for c in rows[0][1:]]
        for r in rows[1:]:
            a = r[0].strip().strip('"')
            for name, cell in zip(names, r[1:]):
                if a != name and cell.strip() and float(cell) != 0:
                    edges.add(tuple(sorted((a, name))))
    with open(dest / "asg.edges", "w") as out:
        out.write(f"# converted from {Path(src).name}\n")
        for a, b in sorted(edges):
            out.write(f"{a.replace(' ', '_')} {b.replace(' ', '_')}\n")


SOURCES = {
    "football": newman("football.zip", "football.gml"),
    "netsci": newman("netscience.zip", "netscience.gml"),
    "grid": newman("power.zip", "power.gml"),
    "email": email,
    "cora": npz("cora"),
    "citeseer": npz("citeseer"),
}


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("names", nargs="*", help="datasets to fetch (default: all)")
    p.add_argument("--dest", default=os.environ.get("ACA_DATA_DIR", "data"))
    p.add_argument("--asg", help="hand-downloaded UCINET or CSV file for the ASG network")
    args = p.parse_args()
    dest = Path(args.dest)
    dest.mkdir(parents=True, exist_ok=True)
    wanted = args.names or list(SOURCES) + (["asg"] if args.asg else [])
    failed = []
    for name in wanted:
        print(name)
        try:
            if name == "asg":
                if not args.asg:
                    raise RuntimeError("pass the downloaded file with --asg")
                ucinet_to_edges(args.asg, dest)
            elif name in SOURCES:
                SOURCES[name](dest)
            else:
                raise RuntimeError(f"unknown dataset (known: {', '.join(list(SOURCES) + ['asg'])})")
        except Exception as e:  # keep going so one dead link does not block the rest
            print(f"  failed: {e}", file=sys.stderr)
            failed.append(name)
    print(f"data directory: {dest.resolve()}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
