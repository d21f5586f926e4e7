r"""Riemannian primitives on the unit sphere :math:`S^{n-1} \subset \mathbb{R}^n`.

Points are plain numpy arrays whose last axis holds the ambient coordinates,
so every function broadcasts over leading axes.  Tangent vectors at ``x`` are
ambient vectors orthogonal to ``x``; the metric is the ambient dot product.
"""

import numpy as np

from .errors import CutLocusError

#: tolerance on ``1 + <x, y>`` below which a pair counts as antipodal
ANTIPODAL_TOL = 1e-8
#: largest norm drift tolerated before renormalizing
DRIFT_TOL = 1e-6


def _check_pair(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != y.shape[-1]:
        raise ValueError(f"dimension mismatch: {x.shape[-1]} vs {y.shape[-1]}")
    return x, y


def _dot(a, b):
    return np.sum(a * b, axis=-1)


def project_to_sphere(x, check_drift=False):
    """Return ``x / |x|`` along the last axis.

    Parameters
    ----------
    x : array_like, shape (..., n)
    check_drift : bool
        If True, assert that every input norm was within ``DRIFT_TOL`` of 1,
        which guards against silently repairing a broken integrator.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] < 2:
        raise ValueError("sphere points need n >= 2 coordinates")
    nrm = np.linalg.norm(x, axis=-1, keepdims=True)
    if np.any(nrm == 0) or not np.all(np.isfinite(nrm)):
        raise ValueError("cannot project zero or non-finite vector to the sphere")
    if check_drift:
        drift = np.max(np.abs(nrm - 1.0))
        assert drift <= DRIFT_TOL, f"norm drift {drift:.3e} exceeds {DRIFT_TOL}"
    return x / nrm


def geodesic_distance(x, y):
    """Great-circle distance ``arccos <x, y>`` in radians.

    The half-chord formulas ``2 arcsin(|x - y| / 2)`` and
    ``pi - 2 arcsin(|x + y| / 2)`` are used instead of ``arccos`` so that
    distances near 0 and near pi keep full relative precision.  Both agree
    with the clamped ``arccos`` on unit vectors.
    """
    x, y = _check_pair(x, y)
    ip = _dot(x, y)
    near = 2.0 * np.arcsin(np.clip(np.linalg.norm(x - y, axis=-1) / 2.0, 0.0, 1.0))
    far = np.pi - 2.0 * np.arcsin(np.clip(np.linalg.norm(x + y, axis=-1) / 2.0, 0.0, 1.0))
    return np.where(ip >= 0.0, near, far)


def tangent_project(x, w):
    """Orthogonal projection of ``w`` onto the tangent plane at ``x``."""
    x, w = _check_pair(x, w)
    return w - _dot(w, x)[..., None] * x


def exp_map(x, v):
    """Exponential map ``cos|v| x + sin|v| v/|v|``; returns ``x`` when ``|v| < 1e-14``."""
    x, v = _check_pair(x, v)
    nv = np.linalg.norm(v, axis=-1, keepdims=True)
    small = nv < 1e-14
    safe = np.where(small, 1.0, nv)
    out = np.cos(nv) * x + np.sin(nv) * v / safe
    out = np.where(small, x, out)
    return project_to_sphere(out)


def log_map(x, y):
    """Inverse of :func:`exp_map`: the tangent vector at ``x`` pointing to ``y``.

    Raises
    ------
    CutLocusError
        If ``1 + <x, y> < ANTIPODAL_TOL`` for any pair.
    """
    x, y = _check_pair(x, y)
    ip = _dot(x, y)
    if np.any(1.0 + ip < ANTIPODAL_TOL):
        raise CutLocusError("log map undefined at antipodal points")
    u = y - ip[..., None] * x
    nu = np.linalg.norm(u, axis=-1, keepdims=True)
    d = geodesic_distance(x, y)[..., None]
    small = nu < 1e-300
    return np.where(small, 0.0, d * u / np.where(small, 1.0, nu))


def parallel_transport(x, y, v):
    """Transport ``v`` in ``T_x`` to ``T_y`` along the minimizing geodesic.

    Uses the closed form ``v - <v, y> / (1 + <x, y>) (x + y)``, which is the
    rotation in the plane spanned by ``x`` and ``y`` restricted to tangents.

    Raises
    ------
    CutLocusError
        If ``x`` and ``y`` are antipodal within ``ANTIPODAL_TOL``.
    """
    x, y = _check_pair(x, y)
    v = np.asarray(v, dtype=float)
    denom = 1.0 + _dot(x, y)
    if np.any(denom < ANTIPODAL_TOL):
        raise CutLocusError("parallel transport undefined at antipodal points")
    return v - (_dot(v, y) / denom)[..., None] * (x + y)


def geodesic_divergence_ratio(x, y, v, t):
    """Ratio ``d(exp_x(t v), exp_y(t P v)) / d(x, y)``.

    ``P`` is :func:`parallel_transport` from ``x`` to ``y``.  ``v`` should be a
    unit tangent at ``x``; ``t`` broadcasts against the leading axes.

    Raises
    ------
    ZeroDivisionError
        If any pair has ``x == y``.
    """
    x, y = _check_pair(x, y)
    d0 = geodesic_distance(x, y)
    if np.any(d0 == 0.0):
        raise ZeroDivisionError("geodesic divergence ratio needs x != y")
    t = np.asarray(t, dtype=float)[..., None]
    vy = parallel_transport(x, y, v)
    return geodesic_distance(exp_map(x, t * v), exp_map(y, t * vy)) / d0


def random_points(rng, n, size):
    """Uniform samples on ``S^{n-1}``, shape ``(size, n)``."""
    return project_to_sphere(rng.standard_normal((size, n)))


def random_unit_tangents(rng, x):
    """Uniform unit tangent vectors at each row of ``x``."""
    w = tangent_project(x, rng.standard_normal(np.shape(x)))
    return w / np.linalg.norm(w, axis=-1, keepdims=True)


def divergence_sample(rng, n, size, t_max=np.pi, min_gap=1e-6):
    """Monte-Carlo sample of :func:`geodesic_divergence_ratio` on ``S^{n-1}``.

    Pairs closer than ``min_gap`` or nearly antipodal are redrawn.  Returns
    the ratios and the parallel-direction ratios (``v`` along ``log_x y``).
    """
    x = random_points(rng, n, size)
    y = random_points(rng, n, size)
    ip = _dot(x, y)
    bad = (1.0 + ip < 1e-4) | (geodesic_distance(x, y) < min_gap)
    while np.any(bad):
        y[bad] = random_points(rng, n, int(bad.sum()))
        ip = _dot(x, y)
        bad = (1.0 + ip < 1e-4) | (geodesic_distance(x, y) < min_gap)
    v = random_unit_tangents(rng, x)
    t = rng.uniform(0.0, t_max, size)
    ratios = geodesic_divergence_ratio(x, y, v, t)
    lv = log_map(x, y)
    lv /= np.linalg.norm(lv, axis=-1, keepdims=True)
    sign = rng.choice([-1.0, 1.0], size)[:, None]
    parallel = geodesic_divergence_ratio(x, y, sign * lv, t)
    return ratios, parallel
