# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled equal-capacity CRP district assignment.

Must stay draw-for-draw identical to :func:`electsim._crp_py.crp_assign`.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def crp_assign(const cnp.int64_t[::1] community, Py_ssize_t n_districts,
               Py_ssize_t n_communities, double alpha,
               const double[::1] u_branch, const double[::1] u_pick,
               bint share_weighting=False):
    cdef Py_ssize_t n = community.shape[0]
    cdef Py_ssize_t cap = n // n_districts
    cdef Py_ssize_t i, j, s, c, cc, n_open = n_districts
    cdef cnp.int64_t total, r, cum
    cdef double rest = 1.0 - alpha

    out_arr = np.empty(n, dtype=np.int64)
    counts_arr = np.zeros((n_districts, n_communities), dtype=np.int64)
    fill_arr = np.zeros(n_districts, dtype=np.int64)
    open_arr = np.arange(n_districts, dtype=np.int64)
    tot_arr = np.zeros(n_communities, dtype=np.int64)
    cdef cnp.int64_t[::1] out = out_arr
    cdef cnp.int64_t[:, ::1] counts = counts_arr
    cdef cnp.int64_t[::1] fill = fill_arr
    cdef cnp.int64_t[::1] open_list = open_arr
    cdef cnp.int64_t[::1] open_tot = tot_arr

    with nogil:
        for i in range(n):
            c = community[i]
            total = open_tot[c]
            if n_open == 1:
                s = open_list[0]
            elif total == 0 or (
                u_branch[i] < rest if share_weighting
                else u_branch[i] * (alpha * <double>total + rest) < rest
            ):
                j = <Py_ssize_t>(u_pick[i] * <double>n_open)
                if j >= n_open:
                    j = n_open - 1
                s = open_list[j]
            else:
                r = <cnp.int64_t>(u_pick[i] * <double>total)
                if r >= total:
                    r = total - 1
                cum = 0
                s = open_list[n_open - 1]
                for j in range(n_open):
                    cum = cum + counts[open_list[j], c]
                    if cum > r:
                        s = open_list[j]
                        break
            out[i] = s
            counts[s, c] += 1
            fill[s] += 1
            open_tot[c] += 1
            if fill[s] == cap:
                for j in range(n_open):
                    if open_list[j] == s:
                        break
                while j < n_open - 1:
                    open_list[j] = open_list[j + 1]
                    j += 1
                n_open -= 1
                for cc in range(n_communities):
                    open_tot[cc] -= counts[s, cc]
    return out_arr
