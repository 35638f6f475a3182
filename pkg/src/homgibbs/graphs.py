"""Constraint graphs, boards, and the derived constructions built from them.

Two graph kinds appear everywhere in this package:

* ``ConstraintGraph`` -- a small graph whose nodes are spins; an edge says the
  two spins may sit on adjacent sites, and a loop says a spin may repeat across
  an edge of the board.
* ``Board`` -- a finite loopless graph of sites.  Legal configurations are the
  edge-preserving maps from the board into the constraint graph.

Everything is index-based (dense integers), with an optional label table on
constraint graphs for presentation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations, product
from math import gcd, lcm
from pathlib import Path

DEFAULT_SITE_CAP = 10**7


class GraphFormatError(ValueError):
    """Malformed graph data: bad file, asymmetric adjacency, bad indices."""


def _canonical_edges(n, edges, *, allow_loops, what):
    out = set()
    for e in edges:
        try:
            i, j = int(e[0]), int(e[1])
        except (TypeError, ValueError, IndexError) as exc:
            raise GraphFormatError(f"bad edge entry {e!r}") from exc
        if not (0 <= i < n and 0 <= j < n):
            raise GraphFormatError(f"edge ({i},{j}) out of range for {what} on {n} nodes")
        if i == j and not allow_loops:
            raise GraphFormatError("boards may not carry loops")
        out.add((j, i) if j < i else (i, j))
    return tuple(sorted(out))


def _neighbor_lists(n, edges):
    nbrs = [set() for _ in range(n)]
    for i, j in edges:
        nbrs[i].add(j)
        nbrs[j].add(i)
    return tuple(tuple(sorted(s)) for s in nbrs)


def _count_components(n, neighbor_lists):
    seen = [False] * n
    comps = 0
    for s in range(n):
        if seen[s]:
            continue
        comps += 1
        seen[s] = True
        stack = [s]
        while stack:
            u = stack.pop()
            for v in neighbor_lists[u]:
                if not seen[v]:
                    seen[v] = True
                    stack.append(v)
    return comps


@dataclass(frozen=True)
class ConstraintGraph:
    """Finite spin graph with loops allowed.

    ``edges`` is canonicalized to sorted ``(i, j)`` pairs with ``i <= j``;
    a pair ``(i, i)`` is a loop.  Adjacency is symmetric by construction.
    """

    q: int
    edges: tuple = ()
    labels: tuple | None = None

    def __post_init__(self):
        if self.q < 1:
            raise GraphFormatError("a constraint graph needs at least one node")
        object.__setattr__(
            self, "edges",
            _canonical_edges(self.q, self.edges, allow_loops=True, what="constraint graph"))
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != self.q:
                raise GraphFormatError("label count must equal q")
            object.__setattr__(self, "labels", labels)

    @cached_property
    def neighbor_lists(self):
        return _neighbor_lists(self.q, self.edges)

    @cached_property
    def neighbor_masks(self):
        """Bitmask rows of the adjacency relation; bit i of row i is the loop."""
        masks = [0] * self.q
        for i, j in self.edges:
            masks[i] |= 1 << j
            masks[j] |= 1 << i
        return tuple(masks)

    def neighbors(self, i):
        return self.neighbor_lists[i]

    def adjacent(self, i, j):
        return (self.neighbor_masks[i] >> j) & 1 == 1

    def is_looped(self, i):
        return self.adjacent(i, i)

    @cached_property
    def loops(self):
        return tuple(i for i in range(self.q) if self.is_looped(i))

    def degree(self, i):
        return len(self.neighbor_lists[i])

    def is_connected(self):
        return _count_components(self.q, self.neighbor_lists) <= 1

    def has_edge(self):
        return bool(self.edges)

    def is_loopless(self):
        return not self.loops

    def node_name(self, i):
        return self.labels[i] if self.labels else str(i)

    def relabel(self, perm):
        """Apply a node permutation: node i of the result is node perm.index(i)... i.e.
        perm[i] is the new index of old node i."""
        perm = tuple(perm)
        if sorted(perm) != list(range(self.q)):
            raise ValueError("not a permutation")
        edges = [(perm[i], perm[j]) for i, j in self.edges]
        labels = None
        if self.labels is not None:
            new = [None] * self.q
            for i, name in enumerate(self.labels):
                new[perm[i]] = name
            labels = tuple(new)
        return ConstraintGraph(self.q, edges, labels)


@dataclass(frozen=True)
class Board:
    """Finite loopless site graph.  ``coords`` and ``parents`` are optional
    metadata (grid coordinates / tree parent indices) and do not take part in
    equality."""

    n_sites: int
    edges: tuple = ()
    coords: tuple | None = field(default=None, compare=False)
    parents: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.n_sites < 1:
            raise GraphFormatError("a board needs at least one site")
        object.__setattr__(
            self, "edges",
            _canonical_edges(self.n_sites, self.edges, allow_loops=False, what="board"))
        if self.coords is not None:
            coords = tuple(tuple(c) for c in self.coords)
            if len(coords) != self.n_sites:
                raise GraphFormatError("coords length must equal n_sites")
            object.__setattr__(self, "coords", coords)
        if self.parents is not None:
            parents = tuple(int(p) for p in self.parents)
            if len(parents) != self.n_sites:
                raise GraphFormatError("parents length must equal n_sites")
            object.__setattr__(self, "parents", parents)

    @cached_property
    def neighbor_lists(self):
        return _neighbor_lists(self.n_sites, self.edges)

    def neighbors(self, u):
        return self.neighbor_lists[u]

    def degree(self, u):
        return len(self.neighbor_lists[u])

    def adjacent(self, u, v):
        return v in self.neighbor_lists[u]

    def is_connected(self):
        return _count_components(self.n_sites, self.neighbor_lists) <= 1

    def is_tree(self):
        return self.is_connected() and len(self.edges) == self.n_sites - 1

    @cached_property
    def site_depths(self):
        """Distance from the root for boards built with parent metadata."""
        if self.parents is None:
            return None
        depths = [0] * self.n_sites
        for u, p in enumerate(self.parents):
            if p >= 0:
                depths[u] = depths[p] + 1
        return tuple(depths)

    @cached_property
    def site_parity(self):
        """Per-site 0/1 parity for bipartite boards, None otherwise.

        The parity is the BFS 2-coloring; when grid coordinates are present the
        classes are oriented so that parity 0 means even coordinate sum.
        """
        ok, parts = is_bipartite(self)
        if not ok:
            return None
        parity = [0] * self.n_sites
        for u in parts[1]:
            parity[u] = 1
        if self.coords is not None:
            # re-orient each component so parity matches coordinate-sum parity
            seen = [False] * self.n_sites
            for s in range(self.n_sites):
                if seen[s]:
                    continue
                comp = [s]
                seen[s] = True
                stack = [s]
                while stack:
                    u = stack.pop()
                    for v in self.neighbor_lists[u]:
                        if not seen[v]:
                            seen[v] = True
                            comp.append(v)
                            stack.append(v)
                if (sum(self.coords[s]) % 2) != parity[s]:
                    for u in comp:
                        parity[u] ^= 1
        return tuple(parity)


# ---------------------------------------------------------------------------
# positive vectors


def _positive_tuple(values):
    t = tuple(values)
    if not t:
        raise ValueError("empty vector")
    for x in t:
        if not x > 0:
            raise ValueError(f"entries must be strictly positive, got {x!r}")
    return t


@dataclass(frozen=True)
class WeightVector:
    """Strictly positive node weights for a branching random walk."""

    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", _positive_tuple(self.values))

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def normalized(self):
        s = sum(self.values)
        return WeightVector(tuple(x / s for x in self.values))


@dataclass(frozen=True)
class ActivityVector:
    """Strictly positive per-spin activities."""

    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", _positive_tuple(self.values))

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def normalized(self):
        s = sum(self.values)
        return ActivityVector(tuple(x / s for x in self.values))

    def as_integers(self):
        """Smallest integer vector proportional to the activities (rational only)."""
        fracs = []
        for x in self.values:
            if isinstance(x, float):
                raise ValueError("integer normalization needs exact rational entries")
            fracs.append(Fraction(x))
        mult = lcm(*(f.denominator for f in fracs)) if len(fracs) > 1 else fracs[0].denominator
        ints = [int(f * mult) for f in fracs]
        g = 0
        for v in ints:
            g = gcd(g, v)
        return tuple(v // g for v in ints)


def vector_values(x):
    """Unwrap WeightVector/ActivityVector or coerce a plain sequence to a tuple."""
    if isinstance(x, (WeightVector, ActivityVector)):
        return x.values
    return _positive_tuple(x)


def proportional(a, b, *, rel_tol=0.0):
    """Whether two positive vectors are proportional.

    Exact (cross-product) test when ``rel_tol`` is 0; useful with Fractions.
    """
    a = vector_values(a)
    b = vector_values(b)
    if len(a) != len(b):
        return False
    if rel_tol == 0.0:
        return all(a[i] * b[0] == a[0] * b[i] for i in range(len(a)))
    scale = max(abs(a[i] * b[0]) for i in range(len(a)))
    return all(abs(a[i] * b[0] - a[0] * b[i]) <= rel_tol * scale for i in range(len(a)))


# ---------------------------------------------------------------------------
# named constraint graphs


def hard_core():
    """Two adjacent spins, only the 'empty' one looped: random independent sets."""
    return ConstraintGraph(2, [(0, 1), (1, 1)], labels=("occupied", "empty"))


def hinge():
    """Green, yellow, red, all looped; green-red is the one missing edge.

    This is the constraint graph of the discrete Widom-Rowlinson model: two
    gases that may not occupy adjacent sites, with yellow playing 'vacant'.
    """
    return ConstraintGraph(
        3, [(0, 0), (1, 1), (2, 2), (0, 1), (1, 2)], labels=("green", "yellow", "red"))


def single_looped_node():
    return ConstraintGraph(1, [(0, 0)])


def complete_graph(k, looped=False):
    if k < 1:
        raise ValueError("need k >= 1")
    edges = list(combinations(range(k), 2))
    if looped:
        edges += [(i, i) for i in range(k)]
    return ConstraintGraph(k, edges)


def cycle_graph(k, looped=False):
    if k < 3:
        raise ValueError("cycles need k >= 3")
    edges = [(i, (i + 1) % k) for i in range(k)]
    if looped:
        edges += [(i, i) for i in range(k)]
    return ConstraintGraph(k, edges)


def path_graph(k, looped=False):
    if k < 1:
        raise ValueError("need k >= 1")
    edges = [(i, i + 1) for i in range(k - 1)]
    if looped:
        edges += [(i, i) for i in range(k)]
    return ConstraintGraph(k, edges)


_STANDARD_GRAPHS = {
    "hard_core": hard_core,
    "hinge": hinge,
    "single_looped_node": single_looped_node,
    "complete": complete_graph,
    "K": complete_graph,
    "cycle": cycle_graph,
    "path": path_graph,
}


def standard_graph(name, *args, **kwargs):
    """Construct one of the named constraint graphs, e.g. standard_graph('hinge')."""
    try:
        ctor = _STANDARD_GRAPHS[name]
    except KeyError:
        raise ValueError(f"unknown constraint graph {name!r}; "
                         f"known: {sorted(_STANDARD_GRAPHS)}") from None
    return ctor(*args, **kwargs)


# ---------------------------------------------------------------------------
# boards


def _check_cap(n_sites, cap):
    if n_sites > cap:
        raise ValueError(f"board would have {n_sites} sites, above the cap {cap}")


def grid_box(n, d=2, cap=DEFAULT_SITE_CAP):
    """The box {-n..n}^d with nearest-neighbor bonds, d in {1,2,3}."""
    if d not in (1, 2, 3):
        raise ValueError("d must be 1, 2 or 3")
    if n < 0:
        raise ValueError("need n >= 0")
    side = 2 * n + 1
    _check_cap(side**d, cap)
    coords = list(product(range(-n, n + 1), repeat=d))
    index = {c: k for k, c in enumerate(coords)}
    edges = []
    for c in coords:
        for axis in range(d):
            nxt = list(c)
            nxt[axis] += 1
            nxt = tuple(nxt)
            if nxt in index:
                edges.append((index[c], index[nxt]))
    return Board(side**d, edges, coords=tuple(coords))


def tree_board(r, depth, cap=DEFAULT_SITE_CAP):
    """Rooted truncation of the r-branching Cayley tree to the given depth.

    The root has r+1 children; every other internal site has r children.
    Sites are numbered in BFS order, so the first sites of a deeper truncation
    form exactly the shallower one.
    """
    if r < 1:
        raise ValueError("need r >= 1")
    if depth < 0:
        raise ValueError("need depth >= 0")
    if r >= 2:
        total = 1 + (r + 1) * (r**depth - 1) // (r - 1)
    else:
        total = 1 + 2 * depth
    _check_cap(total, cap)
    parents = [-1]
    edges = []
    frontier = [0]
    for level in range(1, depth + 1):
        nxt = []
        kids = r + 1 if level == 1 else r
        for p in frontier:
            for _ in range(kids):
                u = len(parents)
                parents.append(p)
                edges.append((p, u))
                nxt.append(u)
        frontier = nxt
    return Board(len(parents), edges, parents=tuple(parents))


def path_board(n_sites, cap=DEFAULT_SITE_CAP):
    if n_sites < 1:
        raise ValueError("need n_sites >= 1")
    _check_cap(n_sites, cap)
    return Board(n_sites, [(i, i + 1) for i in range(n_sites - 1)],
                 coords=tuple((i,) for i in range(n_sites)))


def complete_board(k, cap=DEFAULT_SITE_CAP):
    if k < 1:
        raise ValueError("need k >= 1")
    _check_cap(k, cap)
    return Board(k, list(combinations(range(k), 2)))


def board_from_file(path):
    g = load_graph(path)
    if not isinstance(g, Board):
        raise GraphFormatError(f"{path}: expected a board, found a constraint graph")
    return g


_STANDARD_BOARDS = {
    "grid_box": grid_box,
    "tree": tree_board,
    "path": path_board,
    "complete": complete_board,
    "from_file": board_from_file,
}


def standard_board(name, *args, **kwargs):
    try:
        ctor = _STANDARD_BOARDS[name]
    except KeyError:
        raise ValueError(f"unknown board {name!r}; known: {sorted(_STANDARD_BOARDS)}") from None
    return ctor(*args, **kwargs)


# ---------------------------------------------------------------------------
# derived constructions


def weak_square(h):
    """Board on ordered node pairs of ``h``: (i1,i2) ~ (j1,j2) iff i1~j1 and i2~j2.

    Self-pairs arising from loops are dropped; boards stay loopless.
    """
    q = h.q
    edges = []
    for i1 in range(q):
        for i2 in range(q):
            a = i1 * q + i2
            for j1 in h.neighbors(i1):
                for j2 in h.neighbors(i2):
                    b = j1 * q + j2
                    if a < b:
                        edges.append((a, b))
    return Board(q * q, edges, coords=tuple(product(range(q), repeat=2)))


def weak_square_projections(h):
    """The two coordinate projections of weak_square(h), as spin vectors."""
    q = h.q
    pi1 = tuple(a // q for a in range(q * q))
    pi2 = tuple(a % q for a in range(q * q))
    return pi1, pi2


def bipartite_double(h):
    """The signed double 2H: nodes +1..+q and -1..-q, with +i ~ -j iff i ~ j.

    Always loopless and bipartite; a loop at i becomes the edge {+i, -i}.
    Node k < q is +(k+1); node q + k is -(k+1).
    """
    q = h.q
    edges = [(i, q + j) for i in range(q) for j in h.neighbors(i)]
    labels = tuple(f"+{h.node_name(i)}" for i in range(q)) + \
        tuple(f"-{h.node_name(i)}" for i in range(q))
    return ConstraintGraph(2 * q, edges, labels=labels)


def is_bipartite(g):
    """BFS 2-coloring. Returns (flag, (part0, part1)) with parts sorted, or (False, None).

    Works for constraint graphs (a loop forces False) and boards alike.
    """
    n = g.q if isinstance(g, ConstraintGraph) else g.n_sites
    nbrs = g.neighbor_lists
    color = [-1] * n
    for s in range(n):
        if color[s] != -1:
            continue
        color[s] = 0
        queue = [s]
        while queue:
            u = queue.pop()
            for v in nbrs[u]:
                if v == u:
                    return False, None
                if color[v] == -1:
                    color[v] = 1 - color[u]
                    queue.append(v)
                elif color[v] == color[u]:
                    return False, None
    part0 = tuple(i for i in range(n) if color[i] == 0)
    part1 = tuple(i for i in range(n) if color[i] == 1)
    return True, (part0, part1)


# ---------------------------------------------------------------------------
# serialization

_JSON_KEYS = {"type", "q", "edges", "loops", "labels", "adjacency", "coords", "parents"}


def graph_to_json_dict(g):
    if isinstance(g, ConstraintGraph):
        d = {
            "type": "constraint",
            "q": g.q,
            "edges": [[i, j] for i, j in g.edges if i != j],
            "loops": list(g.loops),
        }
        if g.labels is not None:
            d["labels"] = {str(i): name for i, name in enumerate(g.labels)}
        return d
    if isinstance(g, Board):
        d = {"type": "board", "q": g.n_sites, "edges": [[i, j] for i, j in g.edges]}
        if g.coords is not None:
            d["coords"] = [list(c) for c in g.coords]
        if g.parents is not None:
            d["parents"] = list(g.parents)
        return d
    raise TypeError(f"not a graph object: {g!r}")


def _edges_from_adjacency(mat, *, allow_loops):
    n = len(mat)
    edges = []
    for i in range(n):
        if len(mat[i]) != n:
            raise GraphFormatError("adjacency matrix is not square")
        for j in range(n):
            if bool(mat[i][j]) != bool(mat[j][i]):
                raise GraphFormatError(f"asymmetric adjacency at ({i},{j})")
            if mat[i][j] and j >= i:
                if i == j and not allow_loops:
                    raise GraphFormatError("boards may not carry loops")
                edges.append((i, j))
    return n, edges


def graph_from_json_dict(d):
    if not isinstance(d, dict) or "type" not in d:
        raise GraphFormatError("graph JSON must be an object with a 'type' key")
    kind = d["type"]
    unknown = set(d) - _JSON_KEYS
    if unknown:
        raise GraphFormatError(f"unknown keys in graph JSON: {sorted(unknown)}")
    if "adjacency" in d:
        n, edges = _edges_from_adjacency(d["adjacency"], allow_loops=(kind == "constraint"))
        if "q" in d and d["q"] != n:
            raise GraphFormatError("q does not match adjacency size")
    else:
        try:
            n = int(d["q"])
        except (KeyError, TypeError, ValueError) as exc:
            raise GraphFormatError("missing or bad 'q'") from exc
        edges = [tuple(e) for e in d.get("edges", [])]
    if kind == "constraint":
        edges = list(edges) + [(int(i), int(i)) for i in d.get("loops", [])]
        labels = None
        if "labels" in d:
            table = d["labels"]
            labels = [str(i) for i in range(n)]
            for k, name in table.items():
                idx = int(k)
                if not 0 <= idx < n:
                    raise GraphFormatError(f"label index {idx} out of range")
                labels[idx] = str(name)
        return ConstraintGraph(n, edges, labels=tuple(labels) if labels else None)
    if kind == "board":
        if d.get("loops"):
            raise GraphFormatError("loops are only legal for constraint graphs")
        return Board(n, edges, coords=d.get("coords"), parents=d.get("parents"))
    raise GraphFormatError(f"unknown graph type {kind!r}")


def save_graph(g, path):
    Path(path).write_text(json.dumps(graph_to_json_dict(g), indent=2, sort_keys=True) + "\n")


def load_graph(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise GraphFormatError(f"cannot read {path}: {exc}") from exc
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"{path} is not valid JSON: {exc}") from exc
    return graph_from_json_dict(d)


def export_dot(g, name="G"):
    lines = [f"graph {name} {{"]
    if isinstance(g, ConstraintGraph):
        for i in range(g.q):
            lines.append(f'  {i} [label="{g.node_name(i)}"];')
        for i, j in g.edges:
            lines.append(f"  {i} -- {j};")
    else:
        for u in range(g.n_sites):
            lines.append(f"  {u};")
        for i, j in g.edges:
            lines.append(f"  {i} -- {j};")
    lines.append("}")
    return "\n".join(lines) + "\n"
