"""Single-site dynamics on finite boards.

The point process: pick a site uniformly at random and refresh its spin,
choosing each legal spin with probability proportional to its activity.  The
finite activity measure is stationary for this chain by construction.  One
sweep means n_sites single-site updates.

Two engines produce bit-identical trajectories from the same seed: a plain
Python chain (small boards, stepwise inspection) and a numpy kernel vectorized
across replicas (phase-transition phenomenology at scale).  Each replica k of
a run with seed s draws from the substream (s, k), so results never depend on
how replicas are batched or parallelized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import hinge, vector_values
from .rng import spawn_generator

try:
    from . import _kernels
except ImportError:  # numba not installed; numpy fallback below is identical
    _kernels = None


def _legal_weight_tables(h, activities):
    """For each legal-spin bitmask, the cumulative activity weights.

    Returns (cum, q) where cum[mask] is the length-q cumulative weight row of
    the activities restricted to the mask.
    """
    q = h.q
    if q > 16:
        raise ValueError("the chain's legal-spin tables support q <= 16")
    lam = np.array([float(x) for x in vector_values(activities)])
    if lam.size != q:
        raise ValueError("activity vector length must equal q")
    masks = np.arange(1 << q)
    allowed = ((masks[:, None] >> np.arange(q)[None, :]) & 1).astype(float)
    return np.cumsum(allowed * lam[None, :], axis=1)


def _neighbor_arrays(board):
    """Padded neighbor table: (n, max_deg) int32, padding points at a dummy
    site n whose spin never constrains anything."""
    n = board.n_sites
    deg = max((board.degree(u) for u in range(n)), default=0)
    deg = max(deg, 1)
    nbr = np.full((n, deg), n, dtype=np.int32)
    for u in range(n):
        for k, v in enumerate(board.neighbor_lists[u]):
            nbr[u, k] = v
    return nbr


def _check_hom(board, h, spins):
    for u, v in board.edges:
        if not h.adjacent(int(spins[u]), int(spins[v])):
            return False
    return True


# ---------------------------------------------------------------------------
# initial configurations


def constant_config(board, h, spin):
    """All sites at one spin; legal iff the spin is looped or the board has no
    edges."""
    spins = np.full(board.n_sites, spin, dtype=np.int8)
    if not _check_hom(board, h, spins):
        raise ValueError(f"constant spin {spin} is not legal on this board")
    return spins


def parity_config(board, h, occupied_spin, empty_spin, *, even=True):
    """One parity class at ``occupied_spin``, the rest at ``empty_spin``; the
    standard extreme starts for the hard-core model (even or odd sublattice
    fully occupied)."""
    parity = board.site_parity
    if parity is None:
        raise ValueError("parity initial conditions need a bipartite board")
    want = 0 if even else 1
    spins = np.where(np.array(parity) == want, occupied_spin, empty_spin).astype(np.int8)
    if not _check_hom(board, h, spins):
        raise ValueError("parity configuration is not a homomorphism for this graph")
    return spins


def random_config(board, h, seed):
    """A homomorphism found by randomized backtracking (uniform site order,
    shuffled spin choices); raises if hom(G,H) is empty."""
    gen = spawn_generator(seed, "init")
    n, q = board.n_sites, h.q
    full = (1 << q) - 1
    masks = [full] * n
    order = list(gen.permutation(n))
    nbrs = board.neighbor_lists
    hmasks = h.neighbor_masks
    spins = [-1] * n

    def place(k):
        if k == n:
            return True
        u = order[k]
        choices = [s for s in range(q) if (masks[u] >> s) & 1]
        for s in (choices[i] for i in gen.permutation(len(choices))):
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
                if place(k + 1):
                    return True
                spins[u] = -1
            for v, old in undo:
                masks[v] = old
        return False

    if not place(0):
        raise ValueError("hom(G,H) is empty; no initial configuration exists")
    return np.array(spins, dtype=np.int8)


# ---------------------------------------------------------------------------
# run statistics


@dataclass
class RunStats:
    """Per-sweep observables of one chain."""

    sweeps: int
    record_every: int
    seed: int
    replica: int
    activities: tuple
    color_counts: np.ndarray               # (records, q)
    parity_color_counts: np.ndarray | None  # (records, 2, q) on bipartite boards
    changed: np.ndarray                    # updates that altered a spin, per record period
    final_spins: np.ndarray

    @property
    def n_records(self):
        return self.color_counts.shape[0]


def occupied_series(stats, occupied_spins):
    spins = list(occupied_spins)
    return stats.color_counts[:, spins].sum(axis=1)


def parity_ratio_series(stats, occupied_spins):
    """rho_t = even occupied / total occupied, 1/2 when nothing is occupied."""
    if stats.parity_color_counts is None:
        raise ValueError("parity statistics need a bipartite board")
    spins = list(occupied_spins)
    even = stats.parity_color_counts[:, 0, spins].sum(axis=1).astype(float)
    odd = stats.parity_color_counts[:, 1, spins].sum(axis=1).astype(float)
    tot = even + odd
    return np.where(tot > 0, even / np.maximum(tot, 1.0), 0.5)


def equilibrium_records(stats, burn_in=0.2):
    """Record indices after burn-in; by convention the first 20% of sweeps are
    discarded for time-averaged observables (statistics of the final state
    alone never need this)."""
    if not 0 <= burn_in < 1:
        raise ValueError("burn_in must lie in [0, 1)")
    skip = int(round(stats.n_records * burn_in))
    return slice(min(skip, max(stats.n_records - 1, 0)), stats.n_records)


def mean_color_fractions(stats, burn_in=0.2):
    """Time-averaged per-spin occupation fractions over the post-burn-in
    records."""
    window = stats.color_counts[equilibrium_records(stats, burn_in)]
    totals = window.sum(axis=1, keepdims=True).astype(float)
    return (window / totals).mean(axis=0)


def bimodality_report(stats_list, occupied_spins, *, window=(0.4, 0.6)):
    """Final parity ratios across replicas and the fraction landing inside the
    central window: near 1 in the mixed phase, near 0 once one parity class
    dominates."""
    finals = np.array([parity_ratio_series(s, occupied_spins)[-1] for s in stats_list])
    lo, hi = window
    dip = float(((finals >= lo) & (finals <= hi)).mean())
    hist, edges = np.histogram(finals, bins=20, range=(0.0, 1.0))
    return {
        "final_ratios": finals,
        "dip_fraction": dip,
        "window": (lo, hi),
        "histogram": hist,
        "bin_edges": edges,
    }


# ---------------------------------------------------------------------------
# engines


class ChainState:
    """One chain, stepwise.  Draws per-sweep batches of (site, coin) pairs so
    its trajectory matches the vectorized kernel draw for draw."""

    def __init__(self, board, h, activities, spins, seed, *, replica=0, pinned=None):
        self.board = board
        self.h = h
        self.activities = tuple(float(x) for x in vector_values(activities))
        spins = np.asarray(spins, dtype=np.int8)
        if not _check_hom(board, h, spins):
            raise ValueError("initial configuration is not a homomorphism")
        self.spins = spins.copy()
        self.gen = spawn_generator(seed, replica)
        self.steps = 0
        self.pinned = frozenset(int(u) for u in pinned) if pinned else frozenset()
        self._cum = _legal_weight_tables(h, activities)
        self._nbrs = board.neighbor_lists
        self._hmasks = h.neighbor_masks
        self._buf_sites = None
        self._buf_coins = None
        self._buf_pos = 0

    def _refill(self):
        n = self.board.n_sites
        self._buf_sites = self.gen.integers(0, n, size=n)
        self._buf_coins = self.gen.random(n)
        self._buf_pos = 0

    def step(self):
        """One single-site heat-bath update; returns True if the spin changed."""
        if self._buf_sites is None or self._buf_pos >= len(self._buf_sites):
            self._refill()
        u = int(self._buf_sites[self._buf_pos])
        coin = float(self._buf_coins[self._buf_pos])
        self._buf_pos += 1
        self.steps += 1
        mask = (1 << self.h.q) - 1
        for v in self._nbrs[u]:
            mask &= self._hmasks[self.spins[v]]
        row = self._cum[mask]
        total = row[-1]
        if total <= 0:
            raise RuntimeError("no legal spin at a site; state was not a homomorphism")
        new = int(np.searchsorted(row, coin * total, side="right"))
        if u in self.pinned:
            return False
        old = int(self.spins[u])
        self.spins[u] = new
        return new != old

    def sweep(self):
        changed = 0
        for _ in range(self.board.n_sites):
            changed += self.step()
        return changed


def _record_counts(spins_block, q, parity):
    """spins_block: (R, n). Returns (R, q) color counts and (R, 2, q) parity
    split when a parity vector is given."""
    R = spins_block.shape[0]
    counts = np.empty((R, q), dtype=np.int32)
    pcounts = None
    if parity is not None:
        pcounts = np.empty((R, 2, q), dtype=np.int32)
        even = parity == 0
    for s in range(q):
        hit = spins_block == s
        counts[:, s] = hit.sum(axis=1)
        if parity is not None:
            pcounts[:, 0, s] = (hit & even).sum(axis=1)
            pcounts[:, 1, s] = hit[:, ~even].sum(axis=1)
    return counts, pcounts


def run_replicas(board, h, activities, inits, sweeps, seed, *, record_every=1,
                 pinned=None, engine="vector", replica_ids=None,
                 debug_validate=False):
    """Run independent replicas; replica k uses substream (seed, k).

    ``inits`` is an (R, n) array or list of initial spin vectors.  Returns one
    RunStats per replica.  Engines: 'vector' (compiled kernel when numba is
    present, else the numpy loop), 'numpy' (force the numpy loop), 'python'
    (stepwise ChainState chains).  All three produce identical trajectories
    from the same seed.

    ``replica_ids`` overrides the substream indices, so a run sharded across
    workers (each worker handling a slice of the ids) reproduces the
    single-worker result exactly.  ``debug_validate`` re-checks every replica
    state at each record point; the dynamics preserve validity, so this is a
    development guard only.
    """
    inits = np.array([np.asarray(x, dtype=np.int8) for x in inits])
    R, n = inits.shape
    if replica_ids is None:
        replica_ids = list(range(R))
    if len(replica_ids) != R:
        raise ValueError("need one replica id per initial configuration")
    if n != board.n_sites:
        raise ValueError("initial configurations have the wrong number of sites")
    for k in range(R):
        if not _check_hom(board, h, inits[k]):
            raise ValueError(f"initial configuration {k} is not a homomorphism")
    if engine == "python":
        return [_run_python(board, h, activities, inits[k], sweeps, seed,
                            replica_ids[k], record_every, pinned) for k in range(R)]
    if engine == "vector":
        use_numba = _kernels is not None
    elif engine == "numpy":
        use_numba = False
    else:
        raise ValueError(f"unknown engine {engine!r}")

    q = h.q
    lam = tuple(float(x) for x in vector_values(activities))
    cum = _legal_weight_tables(h, activities)        # (2^q, q)
    nbr = _neighbor_arrays(board)                    # (n, D)
    hmask_by_spin = np.array(list(h.neighbor_masks) + [(1 << q) - 1], dtype=np.int64)
    parity = np.array(board.site_parity, dtype=np.int8) if board.site_parity else None
    pin_mask = np.zeros(n + 1, dtype=bool)
    if pinned:
        pin_mask[list(pinned)] = True

    spins = np.concatenate([inits, np.full((R, 1), q, dtype=np.int8)], axis=1)
    gens = [spawn_generator(seed, k) for k in replica_ids]
    rows = np.arange(R)
    n_records = sweeps // record_every
    color_counts = np.empty((R, n_records, q), dtype=np.int32)
    parity_counts = np.empty((R, n_records, 2, q), dtype=np.int32) if parity is not None else None
    changed_acc = np.zeros(R, dtype=np.int64)
    changed_out = np.empty((R, n_records), dtype=np.int64)
    rec = 0

    for sweep in range(sweeps):
        sites = np.stack([g.integers(0, n, size=n) for g in gens])   # (R, n)
        coins = np.stack([g.random(n) for g in gens])
        if use_numba:
            _kernels.run_sweep(spins, sites, coins, nbr, hmask_by_spin, cum,
                               pin_mask, changed_acc)
        else:
            for t in range(n):
                u = sites[:, t]
                nb = nbr[u]                               # (R, D)
                mask = np.bitwise_and.reduce(hmask_by_spin[spins[rows[:, None], nb]], axis=1)
                row = cum[mask]                            # (R, q)
                draw = coins[:, t] * row[:, -1]
                new = (row <= draw[:, None]).sum(axis=1).astype(np.int8)
                old = spins[rows, u]
                new = np.where(pin_mask[u], old, new)
                changed_acc += new != old
                spins[rows, u] = new
        if (sweep + 1) % record_every == 0:
            if debug_validate:
                for k in range(R):
                    if not _check_hom(board, h, spins[k, :n]):
                        raise RuntimeError(
                            f"replica {replica_ids[k]} left the homomorphism "
                            f"space at sweep {sweep + 1}")
            cc, pc = _record_counts(spins[:, :n], q, parity)
            color_counts[:, rec] = cc
            if parity is not None:
                parity_counts[:, rec] = pc
            changed_out[:, rec] = changed_acc
            changed_acc[:] = 0
            rec += 1

    out = []
    for k in range(R):
        out.append(RunStats(
            sweeps=sweeps, record_every=record_every, seed=seed,
            replica=replica_ids[k],
            activities=lam,
            color_counts=color_counts[k],
            parity_color_counts=parity_counts[k] if parity is not None else None,
            changed=changed_out[k],
            final_spins=spins[k, :n].copy(),
        ))
    return out


def _run_python(board, h, activities, init, sweeps, seed, replica, record_every, pinned):
    chain = ChainState(board, h, activities, init, seed, replica=replica, pinned=pinned)
    q = h.q
    parity = np.array(board.site_parity, dtype=np.int8) if board.site_parity else None
    n_records = sweeps // record_every
    color_counts = np.empty((n_records, q), dtype=np.int32)
    parity_counts = np.empty((n_records, 2, q), dtype=np.int32) if parity is not None else None
    changed_out = np.empty(n_records, dtype=np.int64)
    changed_acc = 0
    rec = 0
    for sweep in range(sweeps):
        changed_acc += chain.sweep()
        if (sweep + 1) % record_every == 0:
            cc, pc = _record_counts(chain.spins[None, :], q, parity)
            color_counts[rec] = cc[0]
            if parity is not None:
                parity_counts[rec] = pc[0]
            changed_out[rec] = changed_acc
            changed_acc = 0
            rec += 1
    return RunStats(
        sweeps=sweeps, record_every=record_every, seed=seed, replica=replica,
        activities=tuple(float(x) for x in vector_values(activities)),
        color_counts=color_counts,
        parity_color_counts=parity_counts,
        changed=changed_out,
        final_spins=chain.spins.copy(),
    )


def run_chain(board, h, activities, init, sweeps, seed, *, replica=0,
              record_every=1, pinned=None, engine="auto"):
    """One chain.  ``auto`` picks the python engine for small workloads."""
    if engine == "auto":
        engine = "python" if board.n_sites * sweeps < 2_000_000 else "vector"
    return run_replicas(board, h, activities, [init], sweeps, seed,
                        record_every=record_every, pinned=pinned, engine=engine)[0]


# ---------------------------------------------------------------------------
# experiments


def hardcore_parity_runs(board, h, lam_occupied, replicas, sweeps, seed, *,
                         record_every=50):
    """Standard bimodality protocol: half the replicas start even-full, half
    odd-full, activity (lam, 1) with spin 0 occupied."""
    inits = [parity_config(board, h, 0, 1, even=(k % 2 == 0)) for k in range(replicas)]
    return run_replicas(board, h, (lam_occupied, 1.0), inits, sweeps, seed,
                        record_every=record_every)


def wr_dominance(board, t_values, replicas, sweeps, seed, *, record_every=50,
                 threshold=0.5):
    """Widom-Rowlinson symmetry breaking on the hinge: for each t run chains at
    activities (t, 1, t) and collect the green-red imbalance
    (green - red) / (green + red) at the end of each run.

    Reports per-t summaries and the onset window where the runs first break
    symmetry (majority of |imbalance| above ``threshold``).
    """
    h = hinge()
    rows = []
    for ti, t in enumerate(t_values):
        inits = [constant_config(board, h, 1) for _ in range(replicas)]
        stats = run_replicas(board, h, (t, 1.0, t), inits, sweeps,
                             seed + ti, record_every=record_every)
        finals = []
        for s in stats:
            green = float(s.color_counts[-1, 0])
            red = float(s.color_counts[-1, 2])
            tot = green + red
            finals.append((green - red) / tot if tot > 0 else 0.0)
        finals = np.array(finals)
        rows.append({
            "t": float(t),
            "imbalance": finals,
            "mean_abs": float(np.abs(finals).mean()),
            "broken_fraction": float((np.abs(finals) > threshold).mean()),
        })
    onset = None
    for k, row in enumerate(rows):
        if row["broken_fraction"] > 0.5:
            onset = (rows[k - 1]["t"] if k else None, row["t"])
            break
    return {"rows": rows, "onset_window": onset, "threshold": threshold}


# ---------------------------------------------------------------------------
# rendering

_DEFAULT_COLORS = [
    (0, 140, 60),     # green
    (240, 210, 60),   # yellow
    (200, 40, 40),    # red
    (60, 90, 220),    # blue
    (150, 150, 150),
    (240, 140, 30),
    (120, 60, 160),
    (40, 200, 200),
]


def render_ppm(board, spins, path, *, cell=6, palette=None, parity_spin=None,
               blank_spins=(), background=(255, 255, 255)):
    """Write a binary PPM raster of a grid-board configuration, one cell per
    site.  ``parity_spin`` renders that spin in two shades by site parity
    (even darker); ``blank_spins`` render as background."""
    if board.coords is None or len(board.coords[0]) != 2:
        raise ValueError("rendering needs a 2-d grid board")
    xs = [c[0] for c in board.coords]
    ys = [c[1] for c in board.coords]
    x0, y0 = min(xs), min(ys)
    w = (max(xs) - x0 + 1)
    hgt = (max(ys) - y0 + 1)
    img = np.empty((hgt * cell, w * cell, 3), dtype=np.uint8)
    img[:, :] = background
    palette = palette or _DEFAULT_COLORS
    parity = board.site_parity
    blank = set(blank_spins)
    for u, (x, y) in enumerate(board.coords):
        s = int(spins[u])
        if s in blank:
            continue
        color = palette[s % len(palette)]
        if parity_spin is not None and s == parity_spin and parity is not None:
            if parity[u] == 0:
                color = tuple(int(c * 0.55) for c in color)
        px = (x - x0) * cell
        py = (hgt - 1 - (y - y0)) * cell
        img[py:py + cell, px:px + cell] = color
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (w * cell, hgt * cell))
        fh.write(img.tobytes())
    return path
