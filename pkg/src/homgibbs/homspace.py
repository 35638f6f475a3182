"""Exact small-instance machinery over hom(G, H).

Enumerates all homomorphisms from a board into a constraint graph by
backtracking with forward checking, equips the result with flip adjacency
(maps differing at exactly one site), and evaluates finite activity measures
and conditional laws by brute force.  Tree boards additionally get an exact
leaf-to-root dynamic program so conditionals stay feasible at depths where
enumeration is not.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import product
from math import prod

from .graphs import Board, ConstraintGraph, vector_values

EXACT_MEASURE_MAX_MAPS = 10_000
DEFAULT_NODE_CAP = 10**8


class HomSpaceCapExceeded(RuntimeError):
    """Backtracking explored more partial assignments than the cap allows."""


class InconsistentBoundaryError(ValueError):
    """A pinned partial assignment admits no homomorphism at all."""


class UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]


def _bfs_site_order(board):
    n = board.n_sites
    nbrs = board.neighbor_lists
    order = []
    seen = [False] * n
    for s in range(n):
        if seen[s]:
            continue
        seen[s] = True
        queue = [s]
        head = 0
        while head < len(queue):
            u = queue[head]
            head += 1
            order.append(u)
            for v in nbrs[u]:
                if not seen[v]:
                    seen[v] = True
                    queue.append(v)
    return order


def enumerate_homs(board, h, *, cap=DEFAULT_NODE_CAP, fixed=None):
    """All homomorphisms board -> h, duplicate-free, as a HomSpace.

    ``fixed`` pins sites to spins (boundary conditions).  ``cap`` bounds the
    number of partial assignments explored by the backtracking search.
    """
    n = board.n_sites
    q = h.q
    full = (1 << q) - 1
    masks = [full] * n
    if fixed:
        for u, s in fixed.items():
            u, s = int(u), int(s)
            if not 0 <= u < n:
                raise ValueError(f"pinned site {u} out of range")
            if not 0 <= s < q:
                raise ValueError(f"pinned spin {s} out of range")
            masks[u] &= 1 << s
    order = _bfs_site_order(board)
    nbrs = board.neighbor_lists
    hmasks = h.neighbor_masks
    spins = [-1] * n
    out = []
    explored = 0

    limit = max(sys.getrecursionlimit(), n + 200)
    sys.setrecursionlimit(limit)

    def place(k):
        nonlocal explored
        if k == n:
            out.append(tuple(spins))
            return
        u = order[k]
        avail = masks[u]
        while avail:
            low = avail & -avail
            avail ^= low
            s = low.bit_length() - 1
            explored += 1
            if explored > cap:
                raise HomSpaceCapExceeded(
                    f"backtracking cap {cap} exceeded enumerating hom(G,H)")
            undo = []
            ok = True
            for v in nbrs[u]:
                if spins[v] == -1:
                    nm = masks[v] & hmasks[s]
                    if nm != masks[v]:
                        undo.append((v, masks[v]))
                        masks[v] = nm
                    if nm == 0:
                        ok = False
                        break
            if ok:
                spins[u] = s
                place(k + 1)
                spins[u] = -1
            for v, old in undo:
                masks[v] = old

    place(0)
    return HomSpace(board=board, cgraph=h, maps=tuple(out), fixed=dict(fixed) if fixed else None)


def brute_force_homs(board, h):
    """Oracle enumeration: filter all q^n functions.  Test-scale instances only."""
    n = board.n_sites
    valid = []
    for cand in product(range(h.q), repeat=n):
        if all(h.adjacent(cand[u], cand[v]) for u, v in board.edges):
            valid.append(cand)
    return valid


@dataclass
class HomSpace:
    """hom(G, H) with flip adjacency: two maps are adjacent iff they differ at
    exactly one site."""

    board: Board
    cgraph: ConstraintGraph
    maps: tuple
    fixed: dict | None = None

    def __len__(self):
        return len(self.maps)

    @property
    def is_empty(self):
        return not self.maps

    @cached_property
    def _index(self):
        return {m: k for k, m in enumerate(self.maps)}

    def index(self, spins):
        return self._index[tuple(spins)]

    @cached_property
    def _structure(self):
        """(component labels, flip degrees) computed in one hash-join pass."""
        m = len(self.maps)
        uf = UnionFind(m)
        degrees = [0] * m
        n = self.board.n_sites
        for u in range(n):
            groups = {}
            for k, spins in enumerate(self.maps):
                key = spins[:u] + spins[u + 1:]
                groups.setdefault(key, []).append(k)
            for g in groups.values():
                if len(g) > 1:
                    for k in g:
                        degrees[k] += len(g) - 1
                    for a, b in zip(g, g[1:]):
                        uf.union(a, b)
        labels = [uf.find(k) for k in range(m)]
        return labels, degrees

    def components(self):
        labels, _ = self._structure
        comps = {}
        for k, lab in enumerate(labels):
            comps.setdefault(lab, []).append(k)
        return sorted(comps.values())

    def is_connected(self):
        """Empty spaces count as connected by convention (see .is_empty)."""
        return len(self.components()) <= 1

    def isolated_maps(self):
        _, degrees = self._structure
        return [k for k, d in enumerate(degrees) if d == 0]

    def flip_edges(self):
        """Explicit flip-edge list; quadratic in groups, for small spaces."""
        edges = []
        n = self.board.n_sites
        for u in range(n):
            groups = {}
            for k, spins in enumerate(self.maps):
                key = spins[:u] + spins[u + 1:]
                groups.setdefault(key, []).append(k)
            for g in groups.values():
                for a_i in range(len(g)):
                    for b_i in range(a_i + 1, len(g)):
                        edges.append((g[a_i], g[b_i]))
        return sorted(edges)


def _want_exact(activity_values, n_items):
    return n_items <= EXACT_MEASURE_MAX_MAPS and all(
        not isinstance(x, float) for x in activity_values)


def lambda_measure(hs, activities):
    """The finite activity measure on hom(G,H): Pr(phi) proportional to the
    product of per-site activities.  Exact rationals on small spaces when the
    activities are rational; floats otherwise."""
    if hs.is_empty:
        raise ValueError("the activity measure needs a non-empty space")
    vals = vector_values(activities)
    if len(vals) != hs.cgraph.q:
        raise ValueError("activity vector length must equal q")
    if _want_exact(vals, len(hs.maps)):
        vals = tuple(Fraction(x) for x in vals)
        weights = [prod((vals[s] for s in m), start=Fraction(1)) for m in hs.maps]
        total = sum(weights)
        return [w / total for w in weights]
    fvals = tuple(float(x) for x in vals)
    weights = [prod((fvals[s] for s in m), start=1.0) for m in hs.maps]
    total = sum(weights)
    return [w / total for w in weights]


def legal_spin_mask(board, h, spins, u):
    mask = (1 << h.q) - 1
    for v in board.neighbor_lists[u]:
        mask &= h.neighbor_masks[spins[v]]
    return mask


def is_isolated_map(board, h, spins):
    """Whether ``spins`` has no flip neighbor in hom(board, h): at every site,
    the current spin is the only legal one given the rest of the map."""
    spins = tuple(spins)
    for u in range(board.n_sites):
        mask = legal_spin_mask(board, h, spins, u)
        if mask & ~(1 << spins[u]):
            return False
    return True


@dataclass(frozen=True)
class OneSiteReport:
    max_violation: float
    worst_map: int | None
    worst_site: int | None
    checked: int


def one_site_gibbs_report(hs, activities, mu, sites=None):
    """Check the one-site condition for a measure ``mu`` on the space.

    For every map of positive probability and every site in ``sites`` (default
    all), the conditional law of that site's spin given all other sites must be
    the activity vector restricted to the legal spins.  Returns the largest
    absolute violation found.

    Sites pinned by the space's boundary conditions are skipped: they are part
    of the conditioning, not of any one-site patch.
    """
    vals = vector_values(activities)
    q = hs.cgraph.q
    if len(vals) != q:
        raise ValueError("activity vector length must equal q")
    exact = _want_exact(vals, len(hs.maps)) and all(not isinstance(p, float) for p in mu)
    if exact:
        vals = tuple(Fraction(x) for x in vals)
    sites = range(hs.board.n_sites) if sites is None else list(sites)
    if hs.fixed:
        sites = [u for u in sites if u not in hs.fixed]
    board, h = hs.board, hs.cgraph
    worst = 0 if exact else 0.0
    worst_map = worst_site = None
    checked = 0
    for k, spins in enumerate(hs.maps):
        if not mu[k] > 0:
            continue
        for u in sites:
            mask = legal_spin_mask(board, h, spins, u)
            legal = [s for s in range(q) if (mask >> s) & 1]
            lam_tot = sum(vals[s] for s in legal)
            alt_idx = {s: hs.index(spins[:u] + (s,) + spins[u + 1:]) for s in legal}
            mu_tot = sum(mu[alt_idx[s]] for s in legal)
            for s in legal:
                expected = vals[s] / lam_tot
                actual = mu[alt_idx[s]] / mu_tot
                v = abs(actual - expected)
                checked += 1
                if v > worst:
                    worst, worst_map, worst_site = v, k, u
    return OneSiteReport(float(worst), worst_map, worst_site, checked)


# ---------------------------------------------------------------------------
# exact dynamic programming on tree boards


def _rooted_order(board, root):
    if not board.is_tree():
        raise ValueError("tree DP needs a connected acyclic board")
    n = board.n_sites
    parent = [-2] * n
    parent[root] = -1
    order = [root]
    head = 0
    while head < len(order):
        u = order[head]
        head += 1
        for v in board.neighbor_lists[u]:
            if parent[v] == -2:
                parent[v] = u
                order.append(v)
    return order, parent


def tree_spin_weights(board, h, activities, pinned, root):
    """Unnormalized weight of each root spin over all homomorphisms consistent
    with ``pinned``, by leaf-to-root message passing.  Exact for rational
    activities (pass ints/Fractions; pass 1s for pure counting)."""
    vals = vector_values(activities)
    q = h.q
    if len(vals) != q:
        raise ValueError("activity vector length must equal q")
    if all(not isinstance(x, float) for x in vals):
        vals = tuple(Fraction(x) if not isinstance(x, int) else x for x in vals)
        zero = 0
    else:
        vals = tuple(float(x) for x in vals)
        zero = 0.0
    pinned = {int(u): int(s) for u, s in (pinned or {}).items()}
    order, parent = _rooted_order(board, root)
    nbrs = board.neighbor_lists
    hadj = h.neighbor_lists
    msg = [None] * board.n_sites
    for u in reversed(order):
        base = list(vals)
        if u in pinned:
            base = [vals[s] if s == pinned[u] else zero for s in range(q)]
        for v in nbrs[u]:
            if parent[v] == u:
                child = msg[v]
                base = [b * sum(child[j] for j in hadj[s]) if b else zero
                        for s, b in enumerate(base)]
        msg[u] = base
    return msg[root]


def tree_spin_distribution(board, h, activities, pinned, target):
    weights = tree_spin_weights(board, h, activities, pinned, target)
    total = sum(weights)
    if not total > 0:
        raise InconsistentBoundaryError("no homomorphism is consistent with the boundary")
    return [w / total for w in weights]


def count_tree_extensions(board, h, pinned, root=0):
    """Number of homomorphisms consistent with the pinned sites (exact int)."""
    ones = (1,) * h.q
    return sum(tree_spin_weights(board, h, ones, pinned, root))


def tree_root_support(board, h, pinned, root=0):
    """Spins achievable at ``root`` over homomorphisms consistent with ``pinned``."""
    ones = (1,) * h.q
    counts = tree_spin_weights(board, h, ones, pinned, root)
    return tuple(s for s, c in enumerate(counts) if c > 0)


def boundary_influence(board, h, activities, boundary, target, *, method="auto"):
    """Exact conditional law of the target site's spin given a pinned boundary.

    Tree boards use the message-passing DP; anything else falls back to
    constrained enumeration of the full space.
    """
    boundary = dict(boundary or {})
    if method == "auto":
        method = "tree" if board.is_tree() else "enumerate"
    if method == "tree":
        return tree_spin_distribution(board, h, activities, boundary, target)
    if method != "enumerate":
        raise ValueError(f"unknown method {method!r}")
    hs = enumerate_homs(board, h, fixed=boundary)
    if hs.is_empty:
        raise InconsistentBoundaryError("no homomorphism is consistent with the boundary")
    mu = lambda_measure(hs, activities)
    q = h.q
    out = [0 * mu[0]] * q
    for k, spins in enumerate(hs.maps):
        out[spins[target]] += mu[k]
    return out
