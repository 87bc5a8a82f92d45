"""Compiled coordinate-descent kernel for the complex l1-penalised least squares."""

import numba
import numpy as np


@numba.njit(cache=True, nogil=True)
def lasso_cd(at, col_sq, lam, s, r, tol, max_sweeps):
    """Minimise ``0.5 ||y - A s||^2 + lam ||s||_1`` in place.

    `at` holds the columns of ``A`` as rows (``A.T``, C-contiguous), `r` is
    the current residual ``y - A s`` and is kept consistent with `s`.
    Sweeps alternate between the full coordinate set and the current
    support; the loop ends after a full sweep whose largest update (in
    units of ``|ds| * ||a_i||``) is at most `tol`. Returns the sweep count.
    """
    n_cols, m = at.shape
    sweeps = 0
    full = True
    while sweeps < max_sweeps:
        sweeps += 1
        max_delta = 0.0
        for i in range(n_cols):
            si = s[i]
            if not full and si == 0:
                continue
            c = col_sq[i]
            if c == 0.0:
                continue
            acc = 0j
            for k in range(m):
                acc += np.conj(at[i, k]) * r[k]
            rho = acc + c * si
            mag = abs(rho)
            if mag > lam:
                new = rho * ((1.0 - lam / mag) / c)
            else:
                new = 0j
            d = new - si
            if d != 0:
                for k in range(m):
                    r[k] -= at[i, k] * d
                s[i] = new
                ad = abs(d) * np.sqrt(c)
                if ad > max_delta:
                    max_delta = ad
        if full:
            if max_delta <= tol:
                break
            full = False
        elif max_delta <= tol:
            full = True
    return sweeps
