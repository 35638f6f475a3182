#!/usr/bin/env python3
"""Brute-force search for minimal fertile constraint graphs.

A graph is fertile when it admits several simple invariant Gibbs measures on
some tree; the local characterization (a looped node missing a neighbor, or a
loop-deleted graph that is not complete multipartite) makes the test cheap.
This enumerates all small connected graphs and keeps the fertile ones none of
whose proper connected induced subgraphs are fertile.

The output is whatever the search finds at this size bound; no claim is made
beyond the enumeration itself.

Usage:
    python scripts/fertile_search.py [--max-nodes 4]
"""

import argparse
from itertools import combinations

from homgibbs.classify import is_fertile
from homgibbs.graphs import ConstraintGraph
from homgibbs.smallgraphs import canonical_key, graph_classes


def induced(h, keep):
    relabel = {x: k for k, x in enumerate(keep)}
    edges = [(relabel[a], relabel[b]) for a, b in h.edges
             if a in relabel and b in relabel]
    return ConstraintGraph(len(keep), edges)


def has_fertile_proper_subgraph(h):
    for size in range(2, h.q):
        for keep in combinations(range(h.q), size):
            sub = induced(h, keep)
            if not sub.is_connected():
                continue
            if is_fertile(sub)[0]:
                return True
    return False


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-nodes", type=int, default=4)
    args = ap.parse_args()

    minimal = []
    seen = set()
    for h in graph_classes(args.max_nodes):
        if not is_fertile(h)[0]:
            continue
        if has_fertile_proper_subgraph(h):
            continue
        key = canonical_key(h)
        if key in seen:
            continue
        seen.add(key)
        minimal.append(h)

    print(f"minimal fertile graphs on <= {args.max_nodes} nodes: {len(minimal)}")
    for h in minimal:
        loops = [i for i, j in h.edges if i == j]
        plain = [(i, j) for i, j in h.edges if i != j]
        print(f"  q={h.q}  loops={loops}  edges={plain}")


if __name__ == "__main__":
    main()
