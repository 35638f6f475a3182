"""Gibbs measures on Cayley trees via node-weighted branching random walks.

The r-branching walk on a constraint graph H with positive node weights w
steps from node i to a neighbor j with probability w_j / z_i, where z_i is the
total weight of i's neighbors (including i itself when looped).  Run down the
tree from a root drawn from the stationary law (pi_i proportional to w_i z_i),
it induces a parity-invariant Gibbs measure whose activity vector is
lambda_i = w_i / z_i^r.

Conversely, the simple parity-respecting Gibbs measures for a given activity
vector correspond to positive solutions (u, v) of the fundamental equations

    lambda_i = u_i / (sum_{j~i} v_j)^r = v_i / (sum_{j~i} u_j)^r

with u = v exactly for the fully invariant ones.  ``solve_fundamental`` hunts
those solutions with a damped fixed-point pass followed by Newton polishing
from many starts.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .graphs import (ActivityVector, Board, ConstraintGraph, bipartite_double,
                     is_bipartite, proportional, tree_board, vector_values)
from .homspace import tree_root_support
from .rng import spawn_generator


def _is_rational(values):
    return all(not isinstance(x, float) for x in values)


def _neighbor_weight_sums(h, weights):
    sums = []
    for i in range(h.q):
        sums.append(sum(weights[j] for j in h.neighbors(i)))
    return tuple(sums)


def weights_to_activities(h, r, weights):
    """The activity vector lambda_i = w_i / z_i^r induced by node weights.

    Exact (Fraction) arithmetic when the weights are ints or Fractions.
    """
    if r < 1:
        raise ValueError("need r >= 1")
    w = vector_values(weights)
    if len(w) != h.q:
        raise ValueError("weight vector length must equal q")
    if _is_rational(w):
        w = tuple(Fraction(x) for x in w)
    z = _neighbor_weight_sums(h, w)
    for i, zi in enumerate(z):
        if not zi > 0:
            raise ValueError(f"isolated node {i}: no neighbors carry weight")
    return ActivityVector(tuple(w[i] / z[i]**r for i in range(h.q)))


@dataclass(frozen=True)
class BranchingWalk:
    """An r-branching node-weighted random walk on a constraint graph."""

    h: ConstraintGraph
    r: int
    weights: tuple

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("need r >= 1")
        w = vector_values(self.weights)
        if len(w) != self.h.q:
            raise ValueError("weight vector length must equal q")
        if _is_rational(w):
            w = tuple(Fraction(x) for x in w)
        object.__setattr__(self, "weights", w)
        for i in range(self.h.q):
            if not self.h.neighbors(i):
                raise ValueError(f"isolated node {i}")

    @cached_property
    def neighbor_weight_sums(self):
        return _neighbor_weight_sums(self.h, self.weights)

    @cached_property
    def transition(self):
        """Row-stochastic matrix p_ij = w_j / z_i on edges, 0 elsewhere."""
        q = self.h.q
        z = self.neighbor_weight_sums
        zero = 0 if _is_rational(self.weights) else 0.0
        rows = []
        for i in range(q):
            row = [zero] * q
            for j in self.h.neighbors(i):
                row[j] = self.weights[j] / z[i]
            rows.append(tuple(row))
        return tuple(rows)

    @cached_property
    def stationary(self):
        """pi_i proportional to w_i z_i, normalized to sum 1."""
        raw = [self.weights[i] * self.neighbor_weight_sums[i] for i in range(self.h.q)]
        total = sum(raw)
        return tuple(x / total for x in raw)

    def step_probability(self, i, j):
        return self.transition[i][j]

    def activities(self):
        return weights_to_activities(self.h, self.r, self.weights)


@dataclass(frozen=True)
class TreeConfig:
    """A spin assignment on a finite Cayley-tree truncation."""

    board: Board
    r: int
    spins: tuple
    root_source: str

    def depth(self):
        return max(self.board.site_depths)

    def validate(self, h):
        for u, v in self.board.edges:
            if not h.adjacent(self.spins[u], self.spins[v]):
                raise ValueError(f"edge ({u},{v}) maps to non-adjacent spins")
        return True


def sample_walk_config(walk, depth, seed):
    """Draw a configuration of the depth-truncated tree from the walk.

    Root spin from the stationary law; every other site steps from its parent.
    Requires a connected non-bipartite graph so the stationary law is the
    unique walk equilibrium; route bipartite graphs through their double 2H.
    """
    if not walk.h.is_connected():
        raise ValueError("sampling needs a connected constraint graph")
    if is_bipartite(walk.h)[0]:
        raise ValueError(
            "bipartite constraint graph: the walk has no unique equilibrium; "
            "sample on the bipartite double 2H instead")
    board = tree_board(walk.r, depth)
    gen = spawn_generator(seed, "walk-sample")
    draws = gen.random(board.n_sites)
    pi_cum = np.cumsum([float(p) for p in walk.stationary])
    trans_cum = np.cumsum([[float(p) for p in row] for row in walk.transition], axis=1)
    spins = [0] * board.n_sites
    spins[0] = int(np.searchsorted(pi_cum, draws[0] * pi_cum[-1], side="right"))
    for u in range(1, board.n_sites):
        p = board.parents[u]
        row = trans_cum[spins[p]]
        spins[u] = int(np.searchsorted(row, draws[u] * row[-1], side="right"))
    return TreeConfig(board=board, r=walk.r, spins=tuple(spins),
                      root_source="sampled:stationary")


def conditional_spin_distributions(walk, neighbor_spins):
    """Conditional law of a site's spin given all r+1 neighbor spins, computed
    two ways: from the walk (parent step in, children steps out) and from the
    activity restriction.  The two agree; both are returned for checking.

    The first listed neighbor is treated as the parent, but the result does
    not depend on that choice.
    """
    spins = [int(s) for s in neighbor_spins]
    if len(spins) != walk.r + 1:
        raise ValueError(f"an interior site has r+1 = {walk.r + 1} neighbors")
    h = walk.h
    parent, children = spins[0], spins[1:]
    P = walk.transition
    lam = weights_to_activities(h, walk.r, walk.weights).values
    legal = [i for i in range(h.q) if all(h.adjacent(i, s) for s in spins)]
    if not legal:
        raise ValueError("context has probability zero: no legal spin")
    zero = 0 * lam[0]
    walk_w = [zero] * h.q
    gibbs_w = [zero] * h.q
    for i in legal:
        ww = P[parent][i]
        for s in children:
            ww = ww * P[i][s]
        walk_w[i] = ww
        gibbs_w[i] = lam[i]
    tw, tg = sum(walk_w), sum(gibbs_w)
    return tuple(x / tw for x in walk_w), tuple(x / tg for x in gibbs_w)


# ---------------------------------------------------------------------------
# the fundamental-equation solver


class SolverBudgetError(RuntimeError):
    """The multi-start search found no solution at all.  Solutions exist for
    every connected constraint graph and activity vector, so an empty result
    means the search failed, not that there is nothing to find."""


@dataclass(frozen=True)
class GibbsSolution:
    """A positive solution of the fundamental equations, normalized so the two
    weight vectors sum to 2 jointly.

    ``even_weights``/``odd_weights`` are the walk weights carried by the two
    parity classes of the tree.  Equal vectors mean a fully invariant measure;
    unequal vectors mean a parity-chiral pair, and this object stands for both
    orientations (the swapped pair solves the same equations).
    """

    even_weights: tuple
    odd_weights: tuple
    r: int
    activities: tuple
    residual: float
    invariant: bool

    @property
    def weight_profile(self):
        """Even-side weights normalized to sum 1 (the walk weights on H for
        invariant solutions)."""
        s = sum(self.even_weights)
        return tuple(x / s for x in self.even_weights)

    def as_dict(self):
        return {
            "even_weights": list(self.even_weights),
            "odd_weights": list(self.odd_weights),
            "r": self.r,
            "activities": list(self.activities),
            "residual": self.residual,
            "invariant": self.invariant,
            "weight_profile": list(self.weight_profile),
        }


def _normalized_lambda(h, activities):
    lam = [float(x) for x in vector_values(activities)]
    if len(lam) != h.q:
        raise ValueError("activity vector length must equal q")
    s = sum(lam)
    return np.array([x / s for x in lam])


def _adjacency_matrix(h):
    A = np.zeros((h.q, h.q))
    for i, j in h.edges:
        A[i, j] = 1.0
        A[j, i] = 1.0
    return A


def fundamental_residual(h, r, activities, even_weights, odd_weights):
    """Independent check of a candidate solution: induce the activity vector
    from each side, sum-normalize, and return the largest deviation from the
    (sum-normalized) target.  Deliberately plain evaluation, sharing no code
    with the solver."""
    lam = vector_values(activities)
    total = sum(float(x) for x in lam)
    lam = [float(x) / total for x in lam]
    u = [float(x) for x in even_weights]
    v = [float(x) for x in odd_weights]
    a = []
    b = []
    for i in range(h.q):
        sv = sum(v[j] for j in h.neighbors(i))
        su = sum(u[j] for j in h.neighbors(i))
        a.append(u[i] / sv**r)
        b.append(v[i] / su**r)
    na, nb = sum(a), sum(b)
    return max(
        max(abs(a[i] / na - lam[i]) for i in range(h.q)),
        max(abs(b[i] / nb - lam[i]) for i in range(h.q)),
    )


def _validate_solver_input(h, r, lam_values):
    if r < 1:
        raise ValueError("need r >= 1")
    if not h.is_connected():
        raise ValueError("the solver needs a connected constraint graph")
    for i in range(h.q):
        if not h.neighbors(i):
            raise ValueError(f"isolated node {i}")


def _start_pairs(q, n_starts, lam, rng):
    """Deterministic structured seeds plus log-uniform random fills, each pair
    normalized so u and v jointly sum to 2."""
    pairs = [(lam.copy(), lam.copy()), (np.full(q, 1.0 / q), np.full(q, 1.0 / q))]
    for i in range(q):
        w = np.ones(q)
        w[i] = 100.0
        pairs.append((w, w.copy()))
    for i in range(q):
        for j in range(q):
            if i != j:
                wu = np.ones(q)
                wu[i] = 100.0
                wv = np.ones(q)
                wv[j] = 100.0
                pairs.append((wu, wv))
    pairs = pairs[:n_starts]
    while len(pairs) < n_starts:
        wu = np.exp(rng.uniform(np.log(1e-3), np.log(1e3), size=q))
        wv = np.exp(rng.uniform(np.log(1e-3), np.log(1e3), size=q))
        pairs.append((wu, wv))
    U = np.array([p[0] for p in pairs])
    V = np.array([p[1] for p in pairs])
    scale = (U.sum(1) + V.sum(1)) / 2.0
    return U / scale[:, None], V / scale[:, None]


def _fixed_point_pass(A, lam, r, U, V, sweeps, damping):
    for _ in range(sweeps):
        SU = U @ A
        SV = V @ A
        Ut = lam * SV**r
        Vt = lam * SU**r
        scale = (Ut.sum(1) + Vt.sum(1)) / 2.0
        Ut /= scale[:, None]
        Vt /= scale[:, None]
        U = (1.0 - damping) * U + damping * Ut
        V = (1.0 - damping) * V + damping * Vt
        np.clip(U, 1e-12, None, out=U)
        np.clip(V, 1e-12, None, out=V)
    return U, V


def _newton_f(A, lam, r, X, C):
    q = lam.size
    U, V = X[:, :q], X[:, q:]
    SU = U @ A
    SV = V @ A
    F = np.empty((X.shape[0], 2 * q + 1))
    F[:, :q] = U - C[:, None] * lam * SV**r
    F[:, q:2 * q] = V - C[:, None] * lam * SU**r
    F[:, 2 * q] = U.sum(1) + V.sum(1) - 2.0
    return F, SU, SV


def _newton_solve_batch(A, lam, r, U, V, *, iters, target):
    """Damped Newton on (u, v, c): the fundamental equations scaled by c plus
    the joint normalization row.  Returns candidate rows that reached the
    target infinity-norm."""
    q = lam.size
    S = U.shape[0]
    X = np.concatenate([U, V], axis=1)
    SV0 = V @ A
    pred = lam * SV0**r
    C = (U * pred).sum(1) / np.maximum((pred * pred).sum(1), 1e-300)
    C = np.maximum(C, 1e-12)
    alive = np.ones(S, dtype=bool)
    eye = np.eye(2 * q + 1)

    for _ in range(iters):
        if not alive.any():
            break
        idx = np.nonzero(alive)[0]
        Xa, Ca = X[idx], C[idx]
        F, SU, SV = _newton_f(A, lam, r, Xa, Ca)
        fnorm = np.abs(F).max(1)
        done = fnorm < target
        if done.any():
            alive[idx[done]] = False
            keep = ~done
            idx, Xa, Ca, F = idx[keep], Xa[keep], Ca[keep], F[keep]
            SU, SV, fnorm = SU[keep], SV[keep], fnorm[keep]
            if idx.size == 0:
                continue
        J = np.zeros((idx.size, 2 * q + 1, 2 * q + 1))
        J[:, :q, :q] = np.eye(q)
        J[:, q:2 * q, q:2 * q] = np.eye(q)
        cu = Ca[:, None] * lam * r * SV**(r - 1)
        cv = Ca[:, None] * lam * r * SU**(r - 1)
        J[:, :q, q:2 * q] = -cu[:, :, None] * A[None, :, :]
        J[:, q:2 * q, :q] = -cv[:, :, None] * A[None, :, :]
        J[:, :q, 2 * q] = -lam * SV**r
        J[:, q:2 * q, 2 * q] = -lam * SU**r
        J[:, 2 * q, :2 * q] = 1.0
        try:
            delta = np.linalg.solve(J, F[..., None])[..., 0]
        except np.linalg.LinAlgError:
            delta = np.linalg.solve(J + 1e-12 * eye, F[..., None])[..., 0]
        # backtracking line search, vectorized over rows
        alpha = np.ones(idx.size)
        settled = np.zeros(idx.size, dtype=bool)
        for _bt in range(45):
            rem = ~settled
            if not rem.any():
                break
            Xt = Xa[rem] - alpha[rem, None] * delta[rem, :2 * q]
            Ct = Ca[rem] - alpha[rem] * delta[rem, 2 * q]
            Ft, _, _ = _newton_f(A, lam, r, np.maximum(Xt, 1e-300), np.maximum(Ct, 1e-300))
            ok = (Xt > 0).all(1) & (Ct > 0) & (np.abs(Ft).max(1) < fnorm[rem])
            rows = np.nonzero(rem)[0]
            good = rows[ok]
            Xa[good] = Xt[ok]
            Ca[good] = Ct[ok]
            settled[good] = True
            bad = rows[~ok]
            alpha[bad] *= 0.5
            stuck = bad[alpha[bad] < 1e-13]
            settled[stuck] = True
            alive[idx[stuck]] = False  # stalled; drop the start
        X[idx] = Xa
        C[idx] = Ca

    F, _, _ = _newton_f(A, lam, r, X, C)
    fnorm = np.abs(F).max(1)
    hit = fnorm < target
    return X[hit, :q], X[hit, q:], C[hit]


def _diag_newton_batch(A, lam, r, W, *, iters, target):
    """Newton on the invariant system w_i = c lambda_i (A w)_i^r, sum w = 1."""
    q = lam.size
    S = W.shape[0]
    C = np.ones(S)
    SW = W @ A
    pred = lam * SW**r
    C = (W * pred).sum(1) / np.maximum((pred * pred).sum(1), 1e-300)
    C = np.maximum(C, 1e-12)
    for _ in range(iters):
        SW = W @ A
        F = np.empty((S, q + 1))
        F[:, :q] = W - C[:, None] * lam * SW**r
        F[:, q] = W.sum(1) - 1.0
        if (np.abs(F).max(1) < target).all():
            break
        J = np.zeros((S, q + 1, q + 1))
        J[:, :q, :q] = np.eye(q) - (C[:, None] * lam * r * SW**(r - 1))[:, :, None] * A
        J[:, :q, q] = -lam * SW**r
        J[:, q, :q] = 1.0
        try:
            delta = np.linalg.solve(J, F[..., None])[..., 0]
        except np.linalg.LinAlgError:
            delta = np.linalg.solve(J + 1e-12 * np.eye(q + 1), F[..., None])[..., 0]
        alpha = np.ones(S)
        for _bt in range(45):
            Wt = W - alpha[:, None] * delta[:, :q]
            Ct = C - alpha * delta[:, q]
            SWt = np.maximum(Wt, 1e-300) @ A
            Ft = np.empty_like(F)
            Ft[:, :q] = Wt - Ct[:, None] * lam * SWt**r
            Ft[:, q] = Wt.sum(1) - 1.0
            ok = (Wt > 0).all(1) & (Ct > 0) & (np.abs(Ft).max(1) <= np.abs(F).max(1))
            if ok.all():
                W, C = Wt, Ct
                break
            alpha = np.where(ok, alpha, alpha * 0.5)
            if (alpha < 1e-13).all():
                break
        else:
            break
    SW = W @ A
    F = np.abs(np.concatenate(
        [W - C[:, None] * lam * SW**r, (W.sum(1) - 1.0)[:, None]], axis=1)).max(1)
    hit = F < target
    return W[hit], C[hit]


def solve_invariant_weights(h, r, activities, *, starts=80, seed=0, tol=1e-9,
                            dedup_tol=1e-6, fp_sweeps=150, damping=0.6,
                            newton_iters=60):
    """Positive weight vectors w (sum 1) with w_i / z_i^r proportional to the
    given activities.  Multi-start; completeness is only as good as the start
    coverage."""
    lam_vals = vector_values(activities)
    _validate_solver_input(h, r, lam_vals)
    lam = _normalized_lambda(h, activities)
    A = _adjacency_matrix(h)
    rng = spawn_generator(seed, "solver-diag")
    q = h.q
    W = [lam.copy(), np.full(q, 1.0 / q)]
    for i in range(q):
        w = np.ones(q)
        w[i] = 100.0
        W.append(w)
    W = W[:starts]
    while len(W) < starts:
        W.append(np.exp(rng.uniform(np.log(1e-3), np.log(1e3), size=q)))
    W = np.array(W)
    W /= W.sum(1)[:, None]
    # damped fixed point: w <- lam * (A w)^r, renormalized
    for _ in range(fp_sweeps):
        Wt = lam * (W @ A)**r
        Wt /= Wt.sum(1)[:, None]
        W = (1.0 - damping) * W + damping * Wt
        np.clip(W, 1e-12, None, out=W)
        W /= W.sum(1)[:, None]
    Wh, _ = _diag_newton_batch(A, lam, r, W, iters=newton_iters, target=1e-13)
    found = []
    for w in Wh:
        w = tuple(float(x) for x in w)
        if fundamental_residual(h, r, lam, w, w) >= tol:
            continue
        if any(max(abs(a - b) for a, b in zip(w, other)) < dedup_tol for other in found):
            continue
        found.append(w)
    found.sort(key=lambda w: tuple(round(x, 9) for x in w))
    return found


def _orient_pair(u, v, tol=1e-9):
    for a, b in zip(u, v):
        if a - b > tol:
            return u, v
        if b - a > tol:
            return v, u
    return u, v


def solve_fundamental(h, r, activities, *, starts=200, seed=0, tol=1e-9,
                      dedup_tol=1e-6, fp_sweeps=150, damping=0.6,
                      newton_iters=80, snap_tol=1e-5):
    """All solutions of the fundamental equations found under the start budget,
    deduplicated up to ``dedup_tol`` and up to the parity swap (u,v) -> (v,u).

    The activity vector is treated projectively (sum-normalized first): a
    common rescaling of u and v rescales the activities without changing the
    measure.  Bipartite graphs are rejected; their parity structure lives on
    the components of the double 2H, handled by ``semi_invariant_measures``.

    Candidates whose two sides agree to within ``snap_tol`` are re-polished on
    the invariant subsystem, which is well conditioned even at critical points
    where the full system is degenerate.  A genuinely chiral pair closer to
    the diagonal than ``snap_tol`` would be folded into the invariant
    solution; at default tolerances that is below the resolution promised by
    ``dedup_tol`` anyway.

    Absence of further solutions is evidence, not proof: multi-start search is
    incomplete by nature.
    """
    lam_vals = vector_values(activities)
    _validate_solver_input(h, r, lam_vals)
    if starts < 1:
        raise ValueError("need starts >= 1")
    if is_bipartite(h)[0]:
        raise ValueError(
            "bipartite constraint graph: solve on the double 2H "
            "(see semi_invariant_measures)")
    lam = _normalized_lambda(h, activities)
    A = _adjacency_matrix(h)
    q = h.q
    rng = spawn_generator(seed, "solver")
    U, V = _start_pairs(q, starts, lam, rng)
    U, V = _fixed_point_pass(A, lam, r, U, V, fp_sweeps, damping)
    Uh, Vh, _ = _newton_solve_batch(A, lam, r, U, V, iters=newton_iters, target=1e-13)

    candidates = []
    for u, v in zip(Uh, Vh):
        u = tuple(float(x) for x in u)
        v = tuple(float(x) for x in v)
        candidates.append((u, v))
    # invariant solutions via the diagonal system, scaled to the joint gauge
    for w in solve_invariant_weights(h, r, activities, starts=max(starts // 2, 40),
                                     seed=seed, tol=tol, dedup_tol=dedup_tol,
                                     fp_sweeps=fp_sweeps, damping=damping):
        candidates.append((w, w))

    solutions = []
    for u, v in candidates:
        if max(abs(a - b) for a, b in zip(u, v)) < snap_tol and u != v:
            w0 = np.array([(a + b) / 2.0 for a, b in zip(u, v)])
            w0 /= w0.sum()
            Wh, _ = _diag_newton_batch(A, lam, r, w0[None, :], iters=40, target=1e-13)
            if len(Wh):
                w = tuple(float(x) for x in Wh[0])
                if max(abs(a - b) for a, b in zip(w, w0)) < 1e-3:
                    u = v = w
        u, v = _orient_pair(u, v)
        resid = fundamental_residual(h, r, lam, u, v)
        if resid >= tol:
            continue
        invariant = u == v or max(abs(a - b) for a, b in zip(u, v)) < dedup_tol
        merged = False
        for k, sol in enumerate(solutions):
            du = max(abs(a - b) for a, b in zip(u, sol.even_weights))
            dv = max(abs(a - b) for a, b in zip(v, sol.odd_weights))
            if max(du, dv) < dedup_tol:
                if resid < sol.residual:
                    solutions[k] = _make_solution(h, r, lam, u, v, resid, invariant)
                merged = True
                break
        if not merged:
            solutions.append(_make_solution(h, r, lam, u, v, resid, invariant))
    if not solutions:
        raise SolverBudgetError(
            "no fundamental-equation solution found under the start budget; "
            "increase starts (existence is guaranteed, so the search failed)")
    solutions.sort(key=lambda s: (not s.invariant,
                                  tuple(round(x, 8) for x in s.even_weights)))
    return solutions


def _make_solution(h, r, lam, u, v, resid, invariant):
    a = []
    b = []
    for i in range(h.q):
        sv = sum(v[j] for j in h.neighbors(i))
        su = sum(u[j] for j in h.neighbors(i))
        a.append(u[i] / sv**r)
        b.append(v[i] / su**r)
    na, nb = sum(a), sum(b)
    acts = tuple((a[i] / na + b[i] / nb) / 2.0 for i in range(h.q))
    return GibbsSolution(even_weights=tuple(u), odd_weights=tuple(v), r=r,
                         activities=acts, residual=float(resid), invariant=invariant)


@dataclass(frozen=True)
class SolutionFamily:
    """Simple parity-respecting Gibbs solutions for (H, r, activities).

    Non-bipartite graphs report fundamental-equation solutions directly.  For
    a bipartite graph the double 2H splits into two components, each a copy of
    H; every invariant weight solution then yields one measure per component
    (even sites on one part or the other), so ``count`` is twice the number of
    weight solutions and multiplicity is automatic.
    """

    r: int
    activities: tuple
    bipartite: bool
    solutions: tuple = ()
    component_weights: tuple = ()

    @property
    def count(self):
        if self.bipartite:
            return 2 * len(self.component_weights)
        return len(self.solutions)

    @property
    def multiple(self):
        return self.count > 1


def semi_invariant_measures(h, r, activities, **solver_opts):
    """Count and describe the simple parity-respecting Gibbs measures,
    routing bipartite constraint graphs through their double."""
    lam_vals = vector_values(activities)
    _validate_solver_input(h, r, lam_vals)
    acts = tuple(float(x) for x in lam_vals)
    if is_bipartite(h)[0]:
        weights = solve_invariant_weights(h, r, activities, **solver_opts)
        if not weights:
            raise SolverBudgetError(
                "no component weighting found under the start budget")
        return SolutionFamily(r=r, activities=acts, bipartite=True,
                              component_weights=tuple(weights))
    sols = solve_fundamental(h, r, activities, **solver_opts)
    return SolutionFamily(r=r, activities=acts, bipartite=False, solutions=tuple(sols))


@dataclass(frozen=True)
class TransitionReport:
    ts: tuple
    counts_invariant: tuple
    counts_total: tuple
    brackets: tuple  # (t_low, t_high, count_low, count_high) on the chosen metric
    metric: str


def count_transition(h, r, family, ts, *, metric="invariant", bisect_tol=None,
                     **solver_opts):
    """Sweep a one-parameter activity family and report solution counts.

    ``family`` maps t to an activity sequence.  Count changes are bracketed
    between grid points; with ``bisect_tol`` the brackets are narrowed by
    bisection on the count itself.
    """
    if metric not in ("invariant", "total"):
        raise ValueError("metric must be 'invariant' or 'total'")

    def counts_at(t):
        sols = solve_fundamental(h, r, family(t), **solver_opts)
        inv = sum(1 for s in sols if s.invariant)
        return inv, len(sols)

    pick = (lambda c: c[0]) if metric == "invariant" else (lambda c: c[1])
    ts = tuple(float(t) for t in ts)
    counts = [counts_at(t) for t in ts]
    brackets = []
    for k in range(len(ts) - 1):
        lo, hi = ts[k], ts[k + 1]
        clo, chi = pick(counts[k]), pick(counts[k + 1])
        if clo == chi:
            continue
        if bisect_tol:
            # counts right at the change point can be inflated by merging
            # branches, so the reported end counts stay the stable grid values
            while hi - lo > bisect_tol:
                mid = (lo + hi) / 2.0
                if pick(counts_at(mid)) == clo:
                    lo = mid
                else:
                    hi = mid
        brackets.append((lo, hi, clo, chi))
    return TransitionReport(
        ts=ts,
        counts_invariant=tuple(c[0] for c in counts),
        counts_total=tuple(c[1] for c in counts),
        brackets=tuple(brackets),
        metric=metric,
    )


@dataclass(frozen=True)
class DoubleProjection:
    """Activities induced on the double 2H by a weighting of its nodes, and
    whether they project to a Gibbs measure on H-configurations."""

    double: ConstraintGraph
    activities: ActivityVector
    activity_proportional: bool
    weight_proportional: bool
    h_activities: ActivityVector | None


def semi_invariant_from_double(h, r, weights_on_double, *, rel_tol=1e-9):
    """Weight the nodes of 2H and test the projection conditions: the measure
    projects to H-colorings iff the +/- activities are proportional; it is
    merely invariant (nothing new) iff the weights themselves are."""
    w2 = vector_values(weights_on_double)
    q = h.q
    if len(w2) != 2 * q:
        raise ValueError("need weights for all 2q nodes of the double")
    dh = bipartite_double(h)
    acts = weights_to_activities(dh, r, w2)
    pos, neg = acts.values[:q], acts.values[q:]
    exact = _is_rational(w2)
    tol = 0.0 if exact else rel_tol
    act_prop = proportional(pos, neg, rel_tol=tol)
    w_prop = proportional(w2[:q], w2[q:], rel_tol=tol)
    h_acts = ActivityVector(pos) if act_prop else None
    return DoubleProjection(double=dh, activities=acts,
                            activity_proportional=act_prop,
                            weight_proportional=w_prop,
                            h_activities=h_acts)


# ---------------------------------------------------------------------------
# frozen configurations and long range action


def frozen_coloring(r, depth, seed=0, q=None):
    """A rigid proper coloring of the depth-truncated tree for q = r+1 colors:
    the children of every site exhibit all colors other than the site's own.

    The root has r+1 children for only r other colors, so one of them repeats;
    that choice and all child orderings are drawn from the seed.
    """
    if q is None:
        q = r + 1
    if q != r + 1:
        raise ValueError("the rigid construction needs q = r + 1")
    board = tree_board(r, depth)
    gen = spawn_generator(seed, "frozen")
    children = [[] for _ in range(board.n_sites)]
    for u, p in enumerate(board.parents):
        if p >= 0:
            children[p].append(u)
    spins = [0] * board.n_sites
    spins[0] = int(gen.integers(0, q))
    for u in range(board.n_sites):
        kids = children[u]
        if not kids:
            continue
        others = [c for c in range(q) if c != spins[u]]
        palette = list(others)
        if len(kids) == len(others) + 1:  # the root
            palette.append(int(others[int(gen.integers(0, len(others)))]))
        assign = [palette[k] for k in gen.permutation(len(palette))]
        for site, color in zip(kids, assign):
            spins[site] = color
    return TreeConfig(board=board, r=r, spins=tuple(spins), root_source="frozen")


@dataclass(frozen=True)
class LongRangeActionReport:
    depths: tuple
    achievable: tuple  # per depth, tuple of spins achievable at the root
    excluded: tuple    # per depth, tuple of spins excluded at the root
    always_excluded: tuple

    @property
    def has_long_range_action(self):
        return bool(self.always_excluded)


def long_range_action_probe(h, r, depth, config=None, seed=0):
    """Test a configuration for long range action, up to a finite depth.

    For each n <= depth, pins the configuration's values on the radius-n
    sphere and computes exactly (tree DP) which root spins some homomorphism
    agreeing there can take.  A spin excluded at every tested n witnesses long
    range action up to this depth; the probe can never certify its absence.

    Without an explicit configuration, a frozen coloring is used when the
    graph is the loopless complete graph on r+1 nodes.
    """
    if depth < 1:
        raise ValueError("need depth >= 1")
    if config is None:
        if h.q == r + 1 and h.is_loopless() and \
                len(h.edges) == h.q * (h.q - 1) // 2:
            config = frozen_coloring(r, depth, seed)
        else:
            raise ValueError("supply a reference configuration for this graph")
    if config.r != r:
        raise ValueError("configuration branching factor does not match r")
    depths_avail = config.board.site_depths
    if max(depths_avail) < depth:
        raise ValueError("configuration is too shallow for the requested depth")
    rows_ach = []
    rows_exc = []
    all_spins = set(range(h.q))
    for n in range(1, depth + 1):
        ball = tree_board(r, n)
        # BFS numbering makes the depth-n truncation a prefix of any deeper one
        pinned = {u: config.spins[u] for u in range(ball.n_sites)
                  if depths_avail[u] == n}
        support = tree_root_support(ball, h, pinned)
        rows_ach.append(tuple(support))
        rows_exc.append(tuple(sorted(all_spins - set(support))))
    always = set(rows_exc[0])
    for row in rows_exc[1:]:
        always &= set(row)
    return LongRangeActionReport(
        depths=tuple(range(1, depth + 1)),
        achievable=tuple(rows_ach),
        excluded=tuple(rows_exc),
        always_excluded=tuple(sorted(always)),
    )
