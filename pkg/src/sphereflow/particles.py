r"""Multi-head attention dynamics of tokens on the sphere.

Tokens ``x_i`` move by

.. math:: \dot x_i = P_{x_i}\Big(\frac1d \sum_m \alpha_m \sum_j e^{\beta_m\langle x_i,x_j\rangle}x_j\Big),

which is ``-d`` times the Riemannian gradient of the discrete energy
``E = (1/2d^2) Σ_{i,j} Σ_m α_m W_{β_m}(<x_i, x_j>)``, ``W_β(t) = -e^{βt}/β``.
"""

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import SolverInstabilityError
from .geom import project_to_sphere, random_points, tangent_project
from .kernels import exp_normalization_log
from .spectral import ZonalCoefficients, check_sqrt_positivity, reconstruct_kernel, sqrt_kernel

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class HeadConfig:
    """Attention heads as ``(alpha_m, beta_m)`` pairs with ``beta_m > 0``."""

    heads: tuple = ()

    def __post_init__(self):
        hs = tuple((float(a), float(b)) for a, b in self.heads)
        for a, b in hs:
            if not b > 0 or not math.isfinite(a):
                raise ValueError(f"invalid head (alpha={a}, beta={b})")
        object.__setattr__(self, "heads", hs)

    def __len__(self):
        return len(self.heads)

    @classmethod
    def attraction(cls, beta=1.0, alpha=1.0):
        return cls(((alpha, beta),))

    @classmethod
    def with_repulsion(cls, n, eps, beta=1.0, alpha=1.0):
        """Attractive head plus the repulsive head ``(-α_eps, 1/eps)``.

        ``α_eps = (∫ e^{<x0, x>/eps} dσ)^{-1}``, so the repulsive head's
        pair kernel is ``α_eps e^{t/eps} eps``: the normalized exponential
        kernel scaled by ``eps``.
        """
        b = 1.0 / eps
        a_eps = math.exp(-exp_normalization_log(n, b))
        return cls(((alpha, beta), (-a_eps, b)))


class ParticleEnsemble:
    """``d`` unit vectors in ``R^n`` (rows of ``points``), renormalized on construction."""

    def __init__(self, points):
        X = np.array(points, dtype=float)
        if X.ndim != 2 or X.shape[0] < 1:
            raise ValueError("points must be a nonempty (d, n) array")
        self.points = project_to_sphere(X)
        self.points.setflags(write=False)

    @property
    def d(self):
        return self.points.shape[0]

    @property
    def n(self):
        return self.points.shape[1]

    @classmethod
    def random(cls, rng, d, n, hemisphere=False):
        X = random_points(rng, n, d)
        if hemisphere:
            X[:, -1] = np.abs(X[:, -1])
        return cls(X)


def _as_array(X):
    return X.points if isinstance(X, ParticleEnsemble) else np.asarray(X, dtype=float)


def multihead_rhs(X, heads: HeadConfig):
    """Velocities ``v_i = P_{x_i}((1/d) Σ_m α_m Σ_j exp(β_m <x_i, x_j>) x_j)``; shape ``(d, n)``."""
    X = _as_array(X)
    d = X.shape[0]
    G = X @ X.T
    A = np.zeros_like(G)
    for a, b in heads.heads:
        A += a * np.exp(b * G)
    return tangent_project(X, (A @ X) / d)


def pair_energy(X, heads: HeadConfig):
    """``(1/2d^2) Σ_{i,j} Σ_m α_m W_{β_m}(<x_i, x_j>)``."""
    X = _as_array(X)
    d = X.shape[0]
    G = X @ X.T
    return float(sum(-(a / b) * np.exp(b * G).sum() for a, b in heads.heads) / (2.0 * d * d))


def clustering_metrics(X, heads: HeadConfig = HeadConfig()):
    """Smallest and largest off-diagonal inner product and the energy of each head."""
    X = _as_array(X)
    d = X.shape[0]
    if d < 2:
        raise ValueError("clustering metrics need at least two particles")
    G = np.clip(X @ X.T, -1.0, 1.0)
    off = G[~np.eye(d, dtype=bool)]
    per_head = [pair_energy(X, HeadConfig(((a, b),))) for a, b in heads.heads]
    return {
        "min_pair_inner": float(off.min()),
        "max_pair_inner": float(off.max()),
        "energy": float(sum(per_head)),
        "energy_per_head": per_head,
    }


@dataclass
class ParticleTrajectory:
    times: np.ndarray
    points: np.ndarray  # (samples, d, n)
    min_inner: np.ndarray
    max_inner: np.ndarray
    energy: np.ndarray

    def energy_nonincreasing(self, rtol=1e-6):
        E = self.energy
        return bool(np.all(np.diff(E) <= rtol * (1.0 + np.abs(E[:-1]))))

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        n = self.points.shape[2]
        w.writerow(["time", "particle_index"] + [f"x{k + 1}" for k in range(n)])
        for t, P in zip(self.times, self.points):
            for i, p in enumerate(P):
                w.writerow([format(float(t), ".17g"), i] + [format(float(v), ".17g") for v in p])
        return buf.getvalue()

    def metrics_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["time", "min_inner", "max_inner", "energy"])
        for row in zip(self.times, self.min_inner, self.max_inner, self.energy):
            w.writerow([format(float(v), ".17g") for v in row])
        return buf.getvalue()


def simulate(X0, heads: HeadConfig, T, dt, renormalize=True, sample_every=None):
    """RK4 integration with renormalization to the sphere after every step.

    Returns a :class:`ParticleTrajectory` sampled every ``sample_every``
    steps (about 100 samples by default) plus the final time.

    Raises
    ------
    SolverInstabilityError
        On non-finite positions.
    """
    if not dt > 0 or not T > 0:
        raise ValueError("dt and T must be positive")
    X = _as_array(X0).copy()
    steps = max(1, math.ceil(T / dt - 1e-9))
    h = T / steps
    every = sample_every or max(1, steps // 100)
    f = lambda Y: multihead_rhs(Y, heads)
    out_t, out_x, mins, maxs, ens = [], [], [], [], []

    def record(t, Y):
        out_t.append(t)
        out_x.append(Y.copy())
        if Y.shape[0] >= 2:
            m = clustering_metrics(Y, heads)
            mins.append(m["min_pair_inner"])
            maxs.append(m["max_pair_inner"])
        else:
            mins.append(1.0)
            maxs.append(1.0)
        ens.append(pair_energy(Y, heads))

    record(0.0, X)
    for k in range(1, steps + 1):
        k1 = f(X)
        k2 = f(X + 0.5 * h * k1)
        k3 = f(X + 0.5 * h * k2)
        k4 = f(X + h * k3)
        X = X + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(X)):
            raise SolverInstabilityError(f"non-finite particle positions at t={k * h:.6g}", (k - 1) * h)
        if renormalize:
            X = project_to_sphere(X, check_drift=True)
        if k % every == 0 or k == steps:
            record(k * h, X)
    return ParticleTrajectory(np.array(out_t), np.array(out_x), np.array(mins), np.array(maxs), np.array(ens))


class SqrtKernelProfile:
    """Tabulated ``t -> √V(t)`` with cubic-spline interpolation.

    Evaluating the zonal series costs ``O(L)`` per inner product; the
    table makes repeated smoothing of long trajectories cheap.  The spline
    error is checked against the series at the midpoints of the table.
    """

    def __init__(self, V: ZonalCoefficients, size=8001):
        s = sqrt_kernel(V)
        self.dim = V.dim
        # nodes cluster near t = 1 where localized kernels vary fastest
        u = np.linspace(0.0, np.pi, int(size))
        t = -np.cos(u)
        self.spline = CubicSpline(t, reconstruct_kernel(s, t))
        mid = -np.cos(0.5 * (u[1:] + u[:-1]))
        self.max_error = float(np.max(np.abs(self.spline(mid) - reconstruct_kernel(s, mid))))
        self.min_value = float(np.min(self.spline(np.linspace(-1, 1, 4001))))

    def __call__(self, t):
        return self.spline(t)


def smoothed_density(X, V, points, check_positivity=True):
    """``(1/d) Σ_j √V(<y, x_j>)`` at each row ``y`` of ``points``.

    ``V`` is a :class:`ZonalCoefficients` (exact series) or a
    :class:`SqrtKernelProfile` (tabulated square root).
    """
    X = _as_array(X)
    if V.dim != X.shape[1]:
        raise ValueError("kernel dimension differs from particle dimension")
    if isinstance(V, SqrtKernelProfile):
        prof, smin = V, V.min_value
    else:
        s = sqrt_kernel(V)
        prof = lambda t: reconstruct_kernel(s, t)
        smin = check_sqrt_positivity(V) if check_positivity else 0.0
    if smin < -1e-6:
        log.warning("smoothed_density: sqrt kernel dips to %.3e", smin)
    t = np.clip(np.asarray(points, dtype=float) @ X.T, -1.0, 1.0)
    return prof(t).mean(axis=-1)


def fibonacci_sphere(count):
    """Nearly uniform points on ``S^2``."""
    i = np.arange(count) + 0.5
    z = 1.0 - 2.0 * i / count
    r = np.sqrt(1.0 - z * z)
    phi = math.pi * (3.0 - math.sqrt(5.0)) * i
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
