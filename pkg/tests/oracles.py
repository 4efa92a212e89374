"""Brute-force references kept independent of the package's prefix sums and
unrolled recursions."""

import numpy as np


def enumerate_stage(beta_a, b):
    """Enumerate every (sampled backoff x, first AP attempt slot i) pair.

    Returns (X, Y, Z, Z1, Z2, P_success) for a window of size ``b``.
    """
    q = 1.0 - beta_a
    xs = np.arange(b)[:, None]
    iv = np.arange(b)[None, :]
    before = iv < xs
    p_int = np.where(before, q**iv * beta_a, 0.0) / b
    p_col = q**xs[:, 0] * beta_a / b
    p_suc = q ** (xs[:, 0] + 1) / b
    x_col = xs[:, 0]
    X = p_int.sum()
    Y = p_col.sum()
    Z = (p_int * iv).sum() + (p_col * x_col).sum() + (p_suc * x_col).sum()
    Z1 = (p_int * (xs - iv)).sum()
    Z2 = p_int.sum()
    return X, Y, Z, Z1, Z2, p_suc.sum()


def enumerate_stage_loops(beta_a, b):
    """Same as :func:`enumerate_stage` with plain loops (small windows only)."""
    q = 1.0 - beta_a
    X = Y = Z = Z1 = Z2 = P = 0.0
    for x in range(b):
        for i in range(x):
            w = q**i * beta_a / b
            X += w
            Z += w * i
            Z1 += w * (x - i)
            Z2 += w
        Y += q**x * beta_a / b
        Z += q**x * beta_a * x / b
        P += q ** (x + 1) / b
        Z += q ** (x + 1) * x / b
    return X, Y, Z, Z1, Z2, P


def solve_recursion(windows, beta_a, which):
    """Solve v_k = X_k v_0 + Y_k v_{k+1} + R_k (v_{K+1} = 0) as a linear system.

    ``which`` selects the reward: 2 -> data slots, 3 -> PS-POLL slots,
    4 -> AP successes.
    """
    n = len(windows)
    coef = [enumerate_stage(beta_a, b) for b in windows]
    A = np.eye(n)
    r = np.zeros(n)
    for k, c in enumerate(coef):
        A[k, 0] -= c[0]
        if k + 1 < n:
            A[k, k + 1] -= c[1]
        r[k] = c[which]
    return np.linalg.solve(A, r)[0]


def ap_rate(beta_s, windows):
    k = np.arange(len(windows))
    return np.sum(beta_s**k) / np.sum((np.asarray(windows) - 1) / 2 * beta_s**k)


def sta_rate(beta_a, windows):
    k = np.arange(len(windows))
    return np.sum(beta_a**k) / solve_recursion(windows, beta_a, 2)
