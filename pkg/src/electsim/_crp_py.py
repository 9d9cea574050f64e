"""Pure-Python equal-capacity CRP district assignment.

Reference twin of the compiled kernel in ``_crp.pyx``; both consume the same
pre-drawn uniforms and must return identical assignments.
"""
import numpy as np


def crp_assign(community, n_districts, n_communities, alpha, u_branch, u_pick, share_weighting=False):
    community = np.asarray(community, dtype=np.int64).tolist()
    u_branch = np.asarray(u_branch, dtype=np.float64).tolist()
    u_pick = np.asarray(u_pick, dtype=np.float64).tolist()
    n = len(community)
    cap = n // n_districts
    rest = 1.0 - alpha

    counts = [[0] * n_districts for _ in range(n_communities)]
    fill = [0] * n_districts
    open_list = list(range(n_districts))
    open_tot = [0] * n_communities
    out = [0] * n

    for i in range(n):
        c = community[i]
        total = open_tot[c]
        n_open = len(open_list)
        if n_open == 1:
            s = open_list[0]
        elif total == 0 or (
            u_branch[i] < rest if share_weighting else u_branch[i] * (alpha * float(total) + rest) < rest
        ):
            j = int(u_pick[i] * float(n_open))
            if j >= n_open:
                j = n_open - 1
            s = open_list[j]
        else:
            r = int(u_pick[i] * float(total))
            if r >= total:
                r = total - 1
            row = counts[c]
            cum = 0
            s = open_list[-1]
            for d in open_list:
                cum += row[d]
                if cum > r:
                    s = d
                    break
        out[i] = s
        counts[c][s] += 1
        fill[s] += 1
        open_tot[c] += 1
        if fill[s] == cap:
            open_list.remove(s)
            for cc in range(n_communities):
                open_tot[cc] -= counts[cc][s]

    return np.asarray(out, dtype=np.int64)
