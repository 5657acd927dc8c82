# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops for the collapsed Gibbs sampler and the Polya-urn generator.

Both functions consume caller-supplied uniforms in a fixed order and use the
same floating-point expression order as ``_fallback`` so results match bit
for bit.
"""

from libc.stdint cimport int32_t, int64_t
from libc.stdlib cimport malloc, free


def gibbs_obs(const int64_t[:] obs_ids,
              const int64_t[:] obs_start,
              const int64_t[:] obs_cell,
              const int32_t[:] tokens,
              int32_t[:] z,
              int64_t[:, :] nwk,
              int64_t[:] nk,
              int64_t[:, :] hist,
              const int64_t[:] nbr_ptr,
              const int64_t[:] nbr_idx,
              double alpha,
              double beta,
              const double[:] u,
              bint update_nwk):
    cdef Py_ssize_t K = nwk.shape[0]
    cdef double vbeta = nwk.shape[1] * beta
    cdef Py_ssize_t j = 0, n_obs = obs_ids.shape[0]
    cdef Py_ssize_t a, o, i, g, k, c
    cdef int32_t v, old, new
    cdef double acc, x
    cdef int64_t *ng = <int64_t *> malloc(K * sizeof(int64_t))
    cdef double *cdf = <double *> malloc(K * sizeof(double))
    if ng == NULL or cdf == NULL:
        free(ng)
        free(cdf)
        raise MemoryError()
    try:
        for a in range(n_obs):
            o = obs_ids[a]
            c = obs_cell[o]
            for k in range(K):
                ng[k] = 0
            for g in range(nbr_ptr[c], nbr_ptr[c + 1]):
                for k in range(K):
                    ng[k] += hist[nbr_idx[g], k]
            for i in range(obs_start[o], obs_start[o + 1]):
                v = tokens[i]
                old = z[i]
                if old >= 0:
                    hist[c, old] -= 1
                    ng[old] -= 1
                    if update_nwk:
                        nwk[old, v] -= 1
                        nk[old] -= 1
                acc = 0.0
                for k in range(K):
                    acc += ((<double> nwk[k, v] + beta) / (<double> nk[k] + vbeta)
                            * (<double> ng[k] + alpha))
                    cdf[k] = acc
                x = u[j] * acc
                j += 1
                new = <int32_t> (K - 1)
                for k in range(K):
                    if x < cdf[k]:
                        new = <int32_t> k
                        break
                z[i] = new
                hist[c, new] += 1
                ng[new] += 1
                if update_nwk:
                    nwk[new, v] += 1
                    nk[new] += 1
    finally:
        free(ng)
        free(cdf)
    return j


def polya_cells(const int64_t[:] order,
                Py_ssize_t per_cell,
                int64_t[:, :] hist,
                int32_t[:] labels,
                const int64_t[:] nbr_ptr,
                const int64_t[:] nbr_idx,
                double alpha,
                const double[:] u):
    cdef Py_ssize_t K = hist.shape[1]
    cdef Py_ssize_t j = 0, a, c, g, k, s
    cdef double acc, x
    cdef int32_t new
    cdef int64_t *ng = <int64_t *> malloc(K * sizeof(int64_t))
    cdef double *cdf = <double *> malloc(K * sizeof(double))
    if ng == NULL or cdf == NULL:
        free(ng)
        free(cdf)
        raise MemoryError()
    try:
        for a in range(order.shape[0]):
            c = order[a]
            for k in range(K):
                ng[k] = 0
            for g in range(nbr_ptr[c], nbr_ptr[c + 1]):
                for k in range(K):
                    ng[k] += hist[nbr_idx[g], k]
            for s in range(per_cell):
                acc = 0.0
                for k in range(K):
                    acc += <double> ng[k] + alpha
                    cdf[k] = acc
                x = u[j] * acc
                j += 1
                new = <int32_t> (K - 1)
                for k in range(K):
                    if x < cdf[k]:
                        new = <int32_t> k
                        break
                labels[c * per_cell + s] = new
                hist[c, new] += 1
                ng[new] += 1
    finally:
        free(ng)
        free(cdf)
    return j
