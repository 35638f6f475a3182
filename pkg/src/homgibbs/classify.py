"""Structural dichotomies of a constraint graph.

Three binary classifications, each decided exactly:

* dismantlable / not -- greedy fold elimination (``N(i) subseteq N(j)``);
* cop-win / robber-win -- backward induction on the pursuit game, an
  independent oracle for dismantlability;
* fertile / sterile -- whether some activity vector admits several simple
  invariant Gibbs measures on a Cayley tree, decided by two local conditions:
  (a) every looped node is adjacent to all other nodes, and (b) the
  loop-deleted graph is complete multipartite.  Sterile means both hold.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class FoldSequence:
    """Ordered (folded_node, absorbing_node) pairs reducing a graph to one
    looped node."""

    steps: tuple
    final_node: int

    def replay(self, h):
        """Re-run the folds on ``h``, checking each containment; returns the
        final node and raises if any step is not a legal fold."""
        alive = (1 << h.q) - 1
        masks = list(h.neighbor_masks)
        for i, j in self.steps:
            if i == j or not (alive >> i) & 1 or not (alive >> j) & 1:
                raise ValueError(f"fold ({i},{j}) references a dead or equal node")
            mi = masks[i] & alive
            mj = masks[j] & alive
            if mi & ~mj:
                raise ValueError(f"fold ({i},{j}) is illegal: N({i}) not within N({j})")
            alive &= ~(1 << i)
        if alive != (1 << self.final_node):
            raise ValueError("folds do not end at the recorded final node")
        if not (masks[self.final_node] >> self.final_node) & 1:
            raise ValueError("final node is not looped")
        return self.final_node


def find_fold(h, alive=None):
    """Lexicographically least pair (i, j), i != j, with N(i) contained in N(j),
    or None.  ``alive`` may restrict to a node bitmask (used while dismantling).
    A node belongs to its own neighborhood exactly when it is looped."""
    if alive is None:
        alive = (1 << h.q) - 1
    masks = h.neighbor_masks
    for i in range(h.q):
        if not (alive >> i) & 1:
            continue
        mi = masks[i] & alive
        for j in range(h.q):
            if j == i or not (alive >> j) & 1:
                continue
            if mi & ~(masks[j] & alive) == 0:
                return (i, j)
    return None


def dismantle(h):
    """Greedy fold elimination; a FoldSequence on success, None when stuck.

    Greedy order is correct here because folding never destroys
    dismantlability; the cop-win game solver serves as an independent check of
    that in the test suite rather than an assumption in the code.
    """
    if h.q == 1:
        return FoldSequence((), 0) if h.is_looped(0) else None
    alive = (1 << h.q) - 1
    n_alive = h.q
    steps = []
    while n_alive > 1:
        pair = find_fold(h, alive)
        if pair is None:
            return None
        steps.append(pair)
        alive &= ~(1 << pair[0])
        n_alive -= 1
    last = alive.bit_length() - 1
    if not h.is_looped(last):
        return None
    return FoldSequence(tuple(steps), last)


def is_dismantlable(h):
    return dismantle(h) is not None


def cop_win(h):
    """Exact solve of the pursuit game on ``h``.

    The cop places first, then the robber (sharing a node is allowed); the
    players then alternate, cop first, each moving along an edge (staying put
    needs a loop).  The cop wins by moving onto the robber; the robber wins by
    surviving forever.  Solved as the least fixed point of the one-step
    winning-position operator, i.e. the cop's attractor set.
    """
    if not h.has_edge():
        raise ValueError("the game needs a graph with at least one edge")
    if not h.is_connected():
        raise ValueError("the game is defined on connected graphs")
    q = h.q
    nbrs = h.neighbor_lists
    # win_cop[c][r]: cop to move from (c, r) and she wins
    # win_rob[c][r]: robber to move from (c, r) and the cop still wins
    win_cop = [[False] * q for _ in range(q)]
    win_rob = [[False] * q for _ in range(q)]
    changed = True
    while changed:
        changed = False
        for c in range(q):
            for r in range(q):
                if not win_cop[c][r]:
                    if any(c2 == r or win_rob[c2][r] for c2 in nbrs[c]):
                        win_cop[c][r] = True
                        changed = True
                if not win_rob[c][r]:
                    if all(win_cop[c][r2] for r2 in nbrs[r]):
                        win_rob[c][r] = True
                        changed = True
    return any(all(win_cop[c][r] for r in range(q)) for c in range(q))


def is_fertile(h):
    """(fertile, witness): fails of the sterility conditions with a witness.

    Sterile means (a) every looped node is universal and (b) the loop-deleted
    graph is complete multipartite.  Condition (b) is tested as transitivity of
    non-adjacency, which is equivalent and yields a witness triple.
    """
    if not h.is_connected():
        raise ValueError("fertility is defined for connected graphs")
    q = h.q
    for i in h.loops:
        for j in range(q):
            if j != i and not h.adjacent(i, j):
                return True, {"condition": "a", "looped_node": i, "non_neighbor": j}
    # loop-deleted non-adjacency must be an equivalence relation
    non_adj = [[(x != y and not h.adjacent(x, y)) for y in range(q)] for x in range(q)]
    for y in range(q):
        for x in range(q):
            if x == y or not non_adj[x][y]:
                continue
            for z in range(q):
                if z == x or z == y or not non_adj[y][z]:
                    continue
                if not non_adj[x][z]:
                    return True, {"condition": "b", "triple": (x, y, z)}
    return False, None


@dataclass(frozen=True)
class ClassificationReport:
    dismantlable: bool
    fold_sequence: FoldSequence | None
    cop_win: bool
    fertile: bool
    fertility_witness: dict | None

    def as_dict(self):
        return {
            "dismantlable": self.dismantlable,
            "fold_sequence": list(self.fold_sequence.steps) if self.fold_sequence else None,
            "cop_win": self.cop_win,
            "fertile": self.fertile,
            "witness": self.fertility_witness,
        }


def classify_graph(h):
    """Full report for a connected constraint graph with at least one edge."""
    folds = dismantle(h)
    fertile, witness = is_fertile(h)
    return ClassificationReport(
        dismantlable=folds is not None,
        fold_sequence=folds,
        cop_win=cop_win(h),
        fertile=fertile,
        fertility_witness=witness,
    )
