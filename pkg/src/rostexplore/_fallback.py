"""Pure-Python versions of the compiled kernels.

Same signatures, same uniform consumption order and same floating-point
expression order as ``_kernels.pyx``; the two are interchangeable bit for bit.
"""

import numpy as np


def gibbs_obs(obs_ids, obs_start, obs_cell, tokens, z, nwk, nk, hist,
              nbr_ptr, nbr_idx, alpha, beta, u, update_nwk):
    K = nwk.shape[0]
    vbeta = nwk.shape[1] * beta
    j = 0
    for o in obs_ids:
        c = int(obs_cell[o])
        ng = hist[nbr_idx[nbr_ptr[c]:nbr_ptr[c + 1]]].sum(axis=0)
        for i in range(int(obs_start[o]), int(obs_start[o + 1])):
            v = int(tokens[i])
            old = int(z[i])
            if old >= 0:
                hist[c, old] -= 1
                ng[old] -= 1
                if update_nwk:
                    nwk[old, v] -= 1
                    nk[old] -= 1
            p = ((nwk[:, v].astype(np.float64) + beta) / (nk.astype(np.float64) + vbeta)
                 * (ng.astype(np.float64) + alpha))
            cdf = np.cumsum(p)
            new = min(int(np.searchsorted(cdf, u[j] * cdf[-1], side="right")), K - 1)
            j += 1
            z[i] = new
            hist[c, new] += 1
            ng[new] += 1
            if update_nwk:
                nwk[new, v] += 1
                nk[new] += 1
    return j


def polya_cells(order, per_cell, hist, labels, nbr_ptr, nbr_idx, alpha, u):
    K = hist.shape[1]
    j = 0
    for c in order:
        c = int(c)
        ng = hist[nbr_idx[nbr_ptr[c]:nbr_ptr[c + 1]]].sum(axis=0)
        for s in range(per_cell):
            cdf = np.cumsum(ng.astype(np.float64) + alpha)
            new = min(int(np.searchsorted(cdf, u[j] * cdf[-1], side="right")), K - 1)
            j += 1
            labels[c * per_cell + s] = new
            hist[c, new] += 1
            ng[new] += 1
    return j
