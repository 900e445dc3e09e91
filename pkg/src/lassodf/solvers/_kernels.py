"""Compiled inner loops for coordinate and block coordinate descent.

Both kernels work on the Gram matrix and keep ``grad = X^T y - G beta`` in
sync with ``beta`` so a sweep costs O(p^2) regardless of n.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def lasso_objective(gram, xty, thresh, beta):
    quad = 0.0
    p = beta.shape[0]
    for j in range(p):
        acc = 0.0
        for k in range(p):
            acc += gram[j, k] * beta[k]
        quad += beta[j] * (0.5 * acc - xty[j]) + thresh[j] * abs(beta[j])
    return quad


@njit(cache=True)
def cd_lasso(gram, xty, thresh, beta, grad, max_sweeps, tol, trace):
    """Cyclic coordinate descent; returns the number of sweeps performed.

    ``tol`` bounds the largest change of a fitted-value contribution
    ``|delta_j| * ||x_j||`` in a sweep.  When ``trace`` has positive length the
    objective is recorded after every sweep.
    """
    p = beta.shape[0]
    record = trace.shape[0] > 0
    for sweep in range(max_sweeps):
        max_step = 0.0
        for j in range(p):
            gjj = gram[j, j]
            old = beta[j]
            z = grad[j] + gjj * old
            t = thresh[j]
            if z > t:
                new = (z - t) / gjj
            elif z < -t:
                new = (z + t) / gjj
            else:
                new = 0.0
            if new != old:
                d = new - old
                beta[j] = new
                for k in range(p):
                    grad[k] -= gram[k, j] * d
                step = abs(d) * np.sqrt(gjj)
                if step > max_step:
                    max_step = step
        if record and sweep < trace.shape[0]:
            trace[sweep] = lasso_objective(gram, xty, thresh, beta)
        if max_step <= tol:
            return sweep + 1
    return max_sweeps


@njit(cache=True)
def _norm_root(q, d, lam):
    """Solve sum_i q_i^2 / (d_i t + lam)^2 = 1 for t > 0.

    Newton on phi(t) = S(t)^(-1/2) - 1, which is exactly linear when all d_i
    coincide; a bisection bracket guards the iteration.
    """
    qn = np.sqrt(np.sum(q * q))
    dmax = np.max(d)
    dmin = np.min(d)
    lo = (qn - lam) / dmax
    hi = (qn - lam) / dmin
    t = lo
    for _ in range(100):
        den = d * t + lam
        s = np.sum(q * q / (den * den))
        ds = np.sum(q * q * d / (den * den * den))
        phi = 1.0 / np.sqrt(s) - 1.0
        if phi < 0.0:
            lo = t
        else:
            hi = t
        dphi = ds / (s * np.sqrt(s))
        if dphi > 0.0:
            t_new = t - phi / dphi
        else:
            t_new = 0.5 * (lo + hi)
        if not (lo <= t_new <= hi):
            t_new = 0.5 * (lo + hi)
        if abs(t_new - t) <= 1e-15 * max(t_new, 1e-300):
            return t_new
        t = t_new
    return t


@njit(cache=True)
def _block_prox_gradient(Ggg, z, lam, b, iters):
    """Fallback block solver: proximal gradient on 0.5 b'Gb - z'b + lam||b||."""
    m = z.shape[0]
    L = 0.0
    for a in range(m):
        row = 0.0
        for c in range(m):
            row += abs(Ggg[a, c])
        if row > L:
            L = row
    for _ in range(iters):
        v = b - (Ggg @ b - z) / L
        nv = np.sqrt(np.sum(v * v))
        if nv <= lam / L:
            b[:] = 0.0
            return
        b[:] = (1.0 - lam / (L * nv)) * v
    return


@njit(cache=True)
def group_objective(gram, xty, order, starts, thresh, beta):
    p = beta.shape[0]
    val = 0.0
    for j in range(p):
        acc = 0.0
        for k in range(p):
            acc += gram[j, k] * beta[k]
        val += beta[j] * (0.5 * acc - xty[j])
    for g in range(starts.shape[0] - 1):
        s2 = 0.0
        for a in range(starts[g], starts[g + 1]):
            s2 += beta[order[a]] ** 2
        val += thresh[g] * np.sqrt(s2)
    return val


@njit(cache=True)
def bcd_group(gram, xty, order, starts, eigvals, eigvecs, thresh, beta, grad,
              max_sweeps, tol, trace):
    """Block coordinate descent for the group penalty.

    Group ``g`` owns variables ``order[starts[g]:starts[g+1]]``; ``eigvals`` and
    ``eigvecs`` hold the padded eigendecomposition of each diagonal Gram
    block.  Each block subproblem is solved exactly through a scalar root
    find on the block norm.
    """
    n_groups = starts.shape[0] - 1
    record = trace.shape[0] > 0
    for sweep in range(max_sweeps):
        max_step = 0.0
        for g in range(n_groups):
            s = starts[g]
            m = starts[g + 1] - s
            idx = order[s:s + m]
            z = np.empty(m)
            old = np.empty(m)
            for a in range(m):
                ja = idx[a]
                old[a] = beta[ja]
                acc = grad[ja]
                for c in range(m):
                    acc += gram[ja, idx[c]] * beta[idx[c]]
                z[a] = acc
            lam = thresh[g]
            zn = np.sqrt(np.sum(z * z))
            new = np.zeros(m)
            if zn > lam:
                d = eigvals[g, :m]
                if np.min(d) > 1e-10 * np.max(d):
                    V = eigvecs[g, :m, :m]
                    q = np.ascontiguousarray(V.T) @ z
                    # the rotated norm decides: near the threshold it can
                    # round to or below lam even when zn does not
                    if np.sqrt(np.sum(q * q)) > lam:
                        t = _norm_root(q, d, lam)
                        coef = q / (d + lam / t)
                        new = np.ascontiguousarray(V) @ coef
                else:
                    Ggg = np.empty((m, m))
                    for a in range(m):
                        for c in range(m):
                            Ggg[a, c] = gram[idx[a], idx[c]]
                    new = old.copy()
                    _block_prox_gradient(Ggg, z, lam, new, 500)
            for a in range(m):
                delta = new[a] - old[a]
                if delta != 0.0:
                    ja = idx[a]
                    beta[ja] = new[a]
                    for k in range(gram.shape[0]):
                        grad[k] -= gram[k, ja] * delta
                    step = abs(delta) * np.sqrt(gram[ja, ja])
                    if step > max_step:
                        max_step = step
        if record and sweep < trace.shape[0]:
            trace[sweep] = group_objective(gram, xty, order, starts, thresh, beta)
        if max_step <= tol:
            return sweep + 1
    return max_sweeps
