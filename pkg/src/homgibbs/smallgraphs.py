"""Exhaustive small-graph corpora and canonical forms.

Used by the classification cross-checks: enumerate every connected constraint
graph (loops allowed) on up to a handful of nodes, one representative per
isomorphism class, and generate random connected graphs for property tests.
"""

from __future__ import annotations

from itertools import combinations, permutations

from .graphs import ConstraintGraph


def canonical_key(h):
    """Isomorphism-invariant key: the lexicographically least edge encoding
    over all node permutations.  Intended for small graphs (q <= 8)."""
    if h.q > 8:
        raise ValueError("canonical_key is brute force; q <= 8 only")
    best = None
    for perm in permutations(range(h.q)):
        mapped = tuple(sorted(
            (perm[i], perm[j]) if perm[i] <= perm[j] else (perm[j], perm[i])
            for i, j in h.edges))
        if best is None or mapped < best:
            best = mapped
    return (h.q, best)


def _bit_layout(n):
    """Bit positions: loops occupy bits 0..n-1, then pairs in combination order."""
    pairs = list(combinations(range(n), 2))
    pair_bit = {p: n + k for k, p in enumerate(pairs)}
    return pairs, pair_bit


def _perm_bit_maps(n):
    pairs, pair_bit = _bit_layout(n)
    maps = []
    for perm in permutations(range(n)):
        m = [0] * (n + len(pairs))
        for i in range(n):
            m[i] = perm[i]
        for (i, j), src in pair_bit.items():
            a, b = perm[i], perm[j]
            m[src] = pair_bit[(a, b) if a < b else (b, a)]
        maps.append(m)
    return pairs, maps


def _apply_bit_map(mask, bit_map):
    out = 0
    m = mask
    while m:
        low = m & -m
        out |= 1 << bit_map[low.bit_length() - 1]
        m ^= low
    return out


def _mask_connected(n, mask, pairs):
    if n == 1:
        return True
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    comps = n
    for k, (i, j) in enumerate(pairs):
        if (mask >> (n + k)) & 1:
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[ri] = rj
                comps -= 1
    return comps == 1


def _mask_to_graph(n, mask, pairs):
    edges = [(i, i) for i in range(n) if (mask >> i) & 1]
    edges += [p for k, p in enumerate(pairs) if (mask >> (n + k)) & 1]
    return ConstraintGraph(n, edges)


def graph_classes(max_nodes, *, connected=True, require_edge=True):
    """Yield one representative per isomorphism class of constraint graphs on
    1..max_nodes nodes, all loop patterns included.

    Deduplication expands the isomorphism orbit of each new representative, so
    the representative is the least mask in its class under the bit encoding.
    """
    for n in range(1, max_nodes + 1):
        pairs, perm_maps = _perm_bit_maps(n)
        nbits = n + len(pairs)
        seen = set()
        for mask in range(1 << nbits):
            if mask in seen:
                continue
            seen.update(_apply_bit_map(mask, m) for m in perm_maps)
            if require_edge and mask == 0:
                continue
            if connected and not _mask_connected(n, mask, pairs):
                continue
            yield _mask_to_graph(n, mask, pairs)


def random_connected_graph(rng, q, *, edge_prob=0.4, loop_prob=0.4, force_loop=False):
    """Random connected constraint graph: a random spanning tree plus Bernoulli
    extra edges and loops.  ``force_loop`` guarantees at least one loop (and
    hence a non-bipartite graph)."""
    if q < 1:
        raise ValueError("need q >= 1")
    edges = set()
    order = list(rng.permutation(q))
    for k in range(1, q):
        attach = order[int(rng.integers(0, k))]
        u, v = order[k], attach
        edges.add((min(u, v), max(u, v)))
    for i in range(q):
        for j in range(i + 1, q):
            if rng.random() < edge_prob:
                edges.add((i, j))
        if rng.random() < loop_prob:
            edges.add((i, i))
    if force_loop and not any(i == j for i, j in edges):
        i = int(rng.integers(0, q))
        edges.add((i, i))
    return ConstraintGraph(q, sorted(edges))
