"""Compiled inner loop for the single-site chain (optional accelerator).

Importing this module requires numba; ``mcmc`` falls back to a pure-numpy
update loop with bit-identical trajectories when it is unavailable.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def run_sweep(spins, sites, coins, nbr, hmask_by_spin, cum, pin, changed):
    """Apply one sweep of pre-drawn (site, coin) updates to every replica.

    spins: (R, n+1) int8, last column is the dummy site; sites/coins: (R, n);
    nbr: (n, D) padded with n; cum: (2^q, q) cumulative activity table.
    """
    n_replicas = spins.shape[0]
    steps = sites.shape[1]
    deg = nbr.shape[1]
    q = cum.shape[1]
    for k in range(n_replicas):
        ch = 0
        for t in range(steps):
            u = sites[k, t]
            m = hmask_by_spin[spins[k, nbr[u, 0]]]
            for d in range(1, deg):
                m &= hmask_by_spin[spins[k, nbr[u, d]]]
            row = cum[m]
            draw = coins[k, t] * row[q - 1]
            new = 0
            for j in range(q):
                if row[j] <= draw:
                    new += 1
            old = spins[k, u]
            if pin[u]:
                new = old
            spins[k, u] = np.int8(new)
            if new != old:
                ch += 1
        changed[k] += ch
