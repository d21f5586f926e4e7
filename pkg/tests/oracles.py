"""Independent reference computations used by the tests."""

import numpy as np
from scipy.special import roots_jacobi


def _jacobi_prob(M, a):
    t, w = roots_jacobi(M, a, a)
    return t, w / w.sum()


def direct_convolution(Vfun, ffun, n, theta, M=160):
    """``∫ V(<x, y>) f(<p, y>) dσ(y)`` with ``<x, p> = cos θ``, by tensor quadrature over the sphere.

    ``y = t p + sqrt(1 - t^2) (s e + ...)`` where ``x = cos θ p + sin θ e``;
    ``t`` carries the weight ``(1-t^2)^{(n-3)/2}`` and ``s`` (first coordinate
    on ``S^{n-2}``) the weight ``(1-s^2)^{(n-4)/2}``.  On the circle the
    integral is a plain trapezoid rule in the angle of ``y``.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if n == 2:
        phi = 2 * np.pi * np.arange(4 * M) / (4 * M)
        return np.array([np.mean(Vfun(np.cos(phi - th)) * ffun(np.cos(phi))) for th in theta])
    t, wt = _jacobi_prob(M, (n - 3) / 2)
    s, ws = _jacobi_prob(M, (n - 4) / 2)
    T, S = np.meshgrid(t, s, indexing="ij")
    W = np.outer(wt, ws)
    out = []
    for th in theta:
        ip = T * np.cos(th) + np.sqrt(1 - T**2) * S * np.sin(th)
        out.append(np.sum(W * Vfun(np.clip(ip, -1, 1)) * ffun(T)))
    return np.array(out)


def rotation_matrix(axis, angle):
    """Rodrigues rotation about the unit ``axis``."""
    k = axis / np.linalg.norm(axis)
    Kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + np.sin(angle) * Kx + (1 - np.cos(angle)) * Kx @ Kx


def bessel_i_series(nu, x, dps=50):
    """Modified Bessel ``I_nu(x)`` from its power series in arbitrary precision."""
    import mpmath

    with mpmath.workdps(dps):
        x = mpmath.mpf(x)
        nu = mpmath.mpf(nu)
        half = x / 2
        term = half**nu / mpmath.gamma(nu + 1)
        total = term
        k = 0
        while True:
            k += 1
            term *= half * half / (k * (k + nu))
            total += term
            if abs(term) < abs(total) * mpmath.mpf(10) ** (-dps + 5):
                break
        return total


def transport_lp(x, a, y, b, p):
    """Discrete OT on the circle with geodesic cost ``d^p`` via linear programming."""
    from scipy.optimize import linprog

    D = np.abs(x[:, None] - y[None, :])
    D = np.minimum(D, 2 * np.pi - D) ** p
    n, m = len(a), len(b)
    A = np.zeros((n + m, n * m))
    for i in range(n):
        A[i, i * m : (i + 1) * m] = 1
    for j in range(m):
        A[n + j, j::m] = 1
    res = linprog(D.ravel(), A_eq=A, b_eq=np.concatenate([a, b]), bounds=(0, None), method="highs")
    return res.fun
