r"""Optimal transport on the circle and the minimizing-movement (JKO) scheme.

A distribution on :math:`S^1 = [0, 2\pi)` is a finite union of segments, each
carrying mass spread uniformly over ``[a_j, b_j]`` (``a_j = b_j`` for an atom).
Its quantile function is then piecewise linear, and the optimal transport
cost between ``μ`` and ``ν`` is

.. math:: W_p^p(\mu,\nu) = \min_\theta \int_0^1 |Q_\mu(q) - \tilde Q_\nu(q+\theta)|^p dq,

where ``Q̃_ν(s + 1) = Q̃_ν(s) + 2π`` is the lifted quantile.  The objective is
convex in the cut parameter ``θ`` and is integrated exactly on the merged
breakpoints.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import EntropyUndefinedError
from .spectral import ZonalCoefficients

log = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class CircularDistribution:
    """Probability distribution on the circle given by atoms or by cell densities.

    Use :meth:`from_atoms` or :meth:`from_grid` to build one.  Grid densities
    are taken with respect to the uniform probability measure: cell ``i``
    covers ``[2πi/N, 2π(i+1)/N)`` with constant value ``values[i]`` and the
    values average to 1.
    """

    def __init__(self, starts, ends, masses, kind, values=None):
        self.starts = np.asarray(starts, dtype=float)
        self.ends = np.asarray(ends, dtype=float)
        self.masses = np.asarray(masses, dtype=float)
        self.kind = kind
        self.values = values
        cum = np.concatenate([[0.0], np.cumsum(self.masses)])
        cum[-1] = 1.0
        self.cum = cum
        for a in (self.starts, self.ends, self.masses, self.cum):
            a.setflags(write=False)

    # construction ----------------------------------------------------------

    @classmethod
    def from_atoms(cls, angles, weights, normalize=False):
        """Atoms at ``angles`` (reduced mod 2π) with nonnegative ``weights`` summing to 1."""
        ang = np.mod(np.asarray(angles, dtype=float).reshape(-1), TWO_PI)
        w = np.asarray(weights, dtype=float).reshape(-1)
        if ang.size != w.size or ang.size == 0:
            raise ValueError("angles and weights must be nonempty and of equal length")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and nonnegative")
        total = w.sum()
        if normalize:
            w = w / total
        elif abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {total:.15g}, not 1")
        ang[ang >= TWO_PI] = 0.0
        order = np.argsort(ang, kind="stable")
        ang, w = ang[order], w[order]
        keep = w > 0
        ang, w = ang[keep], w[keep]
        # merge coincident atoms
        uniq, idx = np.unique(ang, return_inverse=True)
        wm = np.bincount(idx, weights=w)
        return cls(uniq, uniq, wm / wm.sum(), "atoms")

    @classmethod
    def from_grid(cls, values, normalize=False):
        """Piecewise-constant density with cell values ``values`` (mean must be 1)."""
        v = np.asarray(values, dtype=float).reshape(-1)
        if v.size == 0 or np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("grid values must be finite and nonnegative")
        mean = v.mean()
        if normalize:
            v = v / mean
        elif abs(mean - 1.0) > 1e-10:
            raise ValueError(f"grid density has mass {mean:.15g}, not 1")
        N = v.size
        edges = TWO_PI * np.arange(N + 1) / N
        m = v / v.sum()
        keep = m > 0
        out = cls(edges[:-1][keep], edges[1:][keep], m[keep], "grid", values=v.copy())
        out.N = N
        return out

    @classmethod
    def uniform(cls, N):
        return cls.from_grid(np.ones(N))

    # evaluation ------------------------------------------------------------

    def __repr__(self):
        return f"CircularDistribution(kind={self.kind!r}, segments={self.masses.size})"

    @property
    def cell_masses(self):
        if self.kind != "grid":
            raise ValueError("cell masses only exist for grid distributions")
        return self.values / self.values.sum()

    def cdf(self, x):
        """``μ([0, x])`` for ``x`` in ``[0, 2π]`` (right-continuous at atoms)."""
        x = np.asarray(x, dtype=float)
        j = np.searchsorted(self.starts, x, side="right") - 1
        jj = np.clip(j, 0, None)
        a, b, m = self.starts[jj], self.ends[jj], self.masses[jj]
        width = b - a
        frac = np.where(width > 0, np.clip((x - a) / np.where(width > 0, width, 1.0), 0.0, 1.0), 1.0)
        return np.where(j < 0, 0.0, self.cum[jj] + m * frac)

    def cdf_lifted(self, x):
        """CDF extended by ``F(x + 2π) = F(x) + 1``."""
        x = np.asarray(x, dtype=float)
        k = np.floor(x / TWO_PI)
        r = x - k * TWO_PI
        return self.cdf(r) + k

    def quantile(self, q):
        """Left-continuous quantile for ``q`` in ``[0, 1]``."""
        q = np.asarray(q, dtype=float)
        j = np.clip(np.searchsorted(self.cum, q, side="left") - 1, 0, self.masses.size - 1)
        return self._seg_value(j, q)

    def quantile_lifted(self, s):
        s = np.asarray(s, dtype=float)
        k = np.floor(s)
        return self.quantile(s - k) + TWO_PI * k

    def _seg_value(self, j, q):
        a, b, m = self.starts[j], self.ends[j], self.masses[j]
        return a + (q - self.cum[j]) / m * (b - a)

    def mean_resultant(self):
        """``∫ e^{iθ} dμ``."""
        a, b, m = self.starts, self.ends, self.masses
        w = b - a
        with np.errstate(invalid="ignore", divide="ignore"):
            seg = np.where(w > 0, (np.exp(1j * b) - np.exp(1j * a)) / (1j * np.where(w > 0, w, 1.0)),
                           np.exp(1j * a))
        return complex(np.sum(m * seg))


# --------------------------------------------------------------------------
# exact W_p
# --------------------------------------------------------------------------


def _abs_power_integral(d0, d1, h, p):
    """``∫_0^h |linear from d0 to d1|^p`` for p in {1, 2}."""
    if p == 2:
        return h * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0
    a0, a1 = np.abs(d0), np.abs(d1)
    same = d0 * d1 >= 0
    s = a0 + a1
    cross = np.where(s > 0, (d0 * d0 + d1 * d1) / (2.0 * np.where(s > 0, s, 1.0)), 0.0)
    return h * np.where(same, 0.5 * s, cross)


def shifted_cost(mu: CircularDistribution, nu: CircularDistribution, theta, p=2):
    """``∫_0^1 |Q_μ(q) - Q̃_ν(q + θ)|^p dq`` integrated exactly, ``θ`` in [-1, 1]."""
    bq = [mu.cum]
    for k in (-1.0, 0.0, 1.0, 2.0):
        bq.append(nu.cum + k - theta)
    q = np.unique(np.clip(np.concatenate(bq), 0.0, 1.0))
    q0, q1 = q[:-1], q[1:]
    h = q1 - q0
    keep = h > 0
    q0, q1, h = q0[keep], q1[keep], h[keep]
    mid = 0.5 * (q0 + q1)
    jm = np.clip(np.searchsorted(mu.cum, mid, side="right") - 1, 0, mu.masses.size - 1)
    s = mid + theta
    k = np.floor(s)
    jn = np.clip(np.searchsorted(nu.cum, s - k, side="right") - 1, 0, nu.masses.size - 1)

    def x_mu(qq):
        return mu._seg_value(jm, qq)

    def y_nu(qq):
        return nu._seg_value(jn, qq + theta - k) + TWO_PI * k

    d0 = x_mu(q0) - y_nu(q0)
    d1 = x_mu(q1) - y_nu(q1)
    return float(np.sum(_abs_power_integral(d0, d1, h, p)))


@dataclass(frozen=True)
class CircleOTResult:
    cost: float
    theta: float
    p: int

    @property
    def distance(self):
        return self.cost ** (1.0 / self.p)


def _golden(f, lo, hi, tol):
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def circle_ot(mu: CircularDistribution, nu: CircularDistribution, p=2, tol=1e-13) -> CircleOTResult:
    """Optimal cut parameter and cost of the shifted quantile coupling.

    The convex objective is minimized by golden-section search.  The result
    is certified by probing ``θ* ± δ``; if a probe is lower the search is
    restarted around the best point of a coarse scan.
    """
    if p not in (1, 2):
        raise ValueError("only p = 1 and p = 2 are supported")
    for d in (mu, nu):
        if abs(d.cum[-1] - 1.0) > 1e-12 or abs(d.masses.sum() - 1.0) > 1e-12:
            raise ValueError("distributions must be normalized")
    f = lambda th: shifted_cost(mu, nu, th, p)
    th, val = _golden(f, -1.0, 1.0, tol)
    delta = 1e-7
    slack = 1e-12 * (1.0 + val)
    if f(th - delta) < val - slack or f(th + delta) < val - slack:
        log.warning("circle_ot: certificate failed at theta=%.6g, rescanning", th)
        grid = np.linspace(-1.0, 1.0, 2001)
        vals = np.array([f(g) for g in grid])
        i = int(np.argmin(vals))
        th, val = _golden(f, grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)], tol)
        if f(th - delta) < val - slack or f(th + delta) < val - slack:
            raise RuntimeError("circle_ot: convexity certificate failed")
    th, val = _snap_to_kink(f, mu, nu, th, val)
    return CircleOTResult(max(val, 0.0), th, p)


def _snap_to_kink(f, mu, nu, th, val, radius=1e-9):
    """Refine ``θ`` to the best breakpoint or endpoint within ``radius``.

    Between breakpoints ``θ = F_μ,i - F_ν,j + k`` the cost of atomic parts is
    affine, so the exact minimizer of a piecewise-linear cost lies on one.
    """
    kinks = (mu.cum[:, None] - nu.cum[None, :]).ravel()
    cand = np.concatenate([kinks - 1.0, kinks, kinks + 1.0, [-1.0, 1.0]])
    cand = cand[(np.abs(cand - th) <= radius) & (np.abs(cand) <= 1.0)]
    for c in np.unique(cand):
        v = f(c)
        if v < val:
            th, val = float(c), v
    return th, val


def wasserstein_circle(mu: CircularDistribution, nu: CircularDistribution, p=2) -> float:
    """Exact ``W_p`` between two distributions on the circle with geodesic cost."""
    return circle_ot(mu, nu, p).distance


def transport_map(mu, nu, x, res: Optional[CircleOTResult] = None):
    """Optimal map ``T(x) = Q̃_ν(F_μ(x) + θ*)`` lifted to the real line."""
    res = res or circle_ot(mu, nu, 2)
    return nu.quantile_lifted(mu.cdf(x) + res.theta)


# --------------------------------------------------------------------------
# grid energies
# --------------------------------------------------------------------------


class GridEnergy:
    """Interaction energy ``½∫∫U ρρ`` of piecewise-constant densities on ``N`` cells.

    ``U`` is given by zonal coefficients on the circle (``Z_l = 2cos lθ``),
    for instance ``W + V``.  Fourier coefficients of a cell density are
    exact: cell ``i`` contributes ``m_i e^{-ilθ_i} sinc(lh/2)``.
    """

    def __init__(self, U: ZonalCoefficients, N):
        if U.dim != 2:
            raise ValueError("grid energies live on the circle (n = 2)")
        self.U = np.asarray(U.coeffs)
        self.N = int(N)
        L = U.L
        h = TWO_PI / self.N
        self.h = h
        self.centers = h * (np.arange(self.N) + 0.5)
        l = np.arange(L + 1)
        self.l = l
        self.sinc = np.sinc(l * h / 2.0 / np.pi)
        self.E = np.exp(-1j * np.outer(l, self.centers)) * self.sinc[:, None]

    @classmethod
    def from_kernels(cls, N, *kernels):
        L = max(k.L for k in kernels)
        c = np.zeros(L + 1)
        for k in kernels:
            c[: k.L + 1] += k.coeffs
        return cls(ZonalCoefficients(2, c), N)

    def modes(self, m):
        return self.E @ m

    def value(self, m):
        c = self.modes(m)
        w = np.where(self.l == 0, 1.0, 2.0)
        return 0.5 * float(np.sum(self.U * w * np.abs(c) ** 2))

    def gradient(self, m):
        """``∂F/∂m_i``: the cell average of ``ξ = U * ρ``."""
        c = self.modes(m)
        coef = self.U * c
        g = coef[0].real + 2.0 * np.real((coef[1:] * self.sinc[1:]) @ np.exp(1j * np.outer(self.l[1:], self.centers)))
        return g

    def dxi(self, m, x):
        """``ξ'(x)`` at arbitrary angles."""
        c = self.modes(m)
        x = np.asarray(x, dtype=float)
        ph = np.exp(1j * np.outer(self.l[1:], x))
        return 2.0 * np.real((1j * self.l[1:] * self.U[1:] * c[1:]) @ ph)


def cell_average_values(rho, N):
    """Cell averages of a spectral circle density (``pde.DensityState``) on ``N`` cells."""
    if rho.n != 2:
        raise ValueError("cell averages are defined for circle densities")
    L = rho.L
    h = TWO_PI / N
    centers = h * (np.arange(N) + 0.5)
    l = np.arange(1, L + 1)
    s = np.sinc(l * h / 2.0 / np.pi)
    a = rho.coeffs.coeffs
    b = rho.sin_coeffs if rho.sin_coeffs is not None else np.zeros(L)
    return a[0] + 2.0 * ((a[1:] * s) @ np.cos(np.outer(l, centers)) + (b * s) @ np.sin(np.outer(l, centers)))


# --------------------------------------------------------------------------
# JKO
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class JkoConfig:
    """Parameters of the minimizing-movement scheme.

    ``tol`` bounds the stationarity gap ``max_i |g_i - Σ_j m_j g_j|`` of
    the inner objective, where ``g`` is its gradient in the cell masses.
    """

    tau: float
    K: int
    N: int = 128
    tol: float = 1e-5
    max_iter: int = 200
    polish_iter: int = 20

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be > 0")
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if self.N < 4:
            raise ValueError("grid needs at least 4 cells")


@dataclass
class JkoStepResult:
    dist: CircularDistribution
    objective: float
    energy: float
    w2: float
    stationarity: float
    iterations: int
    converged: bool


def _potential_cell_means(new, prev, res, sub=16):
    """Cell averages of the Kantorovich potential with ``φ' = x - T(x)``."""
    N = new.N
    h = TWO_PI / N
    x = h * (np.arange(N * sub + 1) / sub)
    dphi = x - transport_map(new, prev, x, res)
    # cumulative trapezoid, then the average over each cell
    phi = np.concatenate([[0.0], np.cumsum(0.5 * (dphi[1:] + dphi[:-1]) * (h / sub))])
    cells = phi[:-1].reshape(N, sub)
    right = phi[sub::sub]
    mean = (0.5 * cells[:, 0] + cells[:, 1:].sum(axis=1) + 0.5 * right) / sub
    return mean - mean.mean()


def _objective(F, m, prev, tau):
    d = CircularDistribution.from_grid(m * m.size, normalize=True)
    res = circle_ot(d, prev, 2)
    return F.value(m) + res.cost / (2.0 * tau), d, res


def jko_step(prev: CircularDistribution, tau, F: GridEnergy, config: Optional[JkoConfig] = None) -> JkoStepResult:
    """One minimizing-movement step ``argmin F(ρ) + W_2^2(ρ, prev) / 2τ`` over cell densities.

    The optimality condition ``T(x) = x + τ ξ'(x)`` (``T`` the optimal map to
    ``prev``) is first solved by fixed-point iteration on the cell masses,
    which conserves mass exactly.  The result is then polished with the
    envelope gradient ``g_i = ξ̄_i + φ̄_i / τ`` (``φ`` the Kantorovich
    potential): each iteration tries a step preconditioned by the
    Wasserstein metric (boundary flux ``-τ ρ ∇g``) and falls back to an
    entropic mirror-descent step on the simplex.  Only iterates that lower
    the objective are accepted, so the objective never exceeds ``F(prev)``.
    """
    if prev.kind != "grid":
        raise ValueError("JKO steps operate on grid densities")
    cfg = config or JkoConfig(tau=tau, K=1, N=prev.N)
    N = prev.N
    if F.N != N:
        raise ValueError("energy grid and distribution grid differ")
    m_prev = prev.cell_masses
    edges = TWO_PI * np.arange(N + 1) / N
    m = m_prev.copy()
    it = 0
    for it in range(1, cfg.max_iter + 1):
        T = edges + tau * F.dxi(m, edges)
        G = prev.cdf_lifted(T)
        m_new = np.diff(G)
        if np.any(m_new < 0):
            # map not monotone: step too large for the fixed point
            break
        m_new /= m_new.sum()
        change = np.max(np.abs(m_new - m)) * N
        m = m_new
        if change < 1e-14:
            break
    m = np.clip(m, 0.0, None)
    m /= m.sum()

    J0 = F.value(m_prev)
    J, dist, res = _objective(F, m, prev, tau)
    if J > J0:
        m, J, dist, res = m_prev.copy(), J0, prev, circle_ot(prev, prev, 2)

    def grad_gap(m, dist, res):
        g = F.gradient(m) + _potential_cell_means(dist, prev, res) / tau
        gbar = float(m @ g)
        return g, float(np.max(np.abs(g - gbar)[m > 0]))

    def try_direction(m, dm_fn, J):
        a = 1.0
        for _ in range(30):
            trial = dm_fn(a)
            if trial is not None:
                Jt, dt_, rt = _objective(F, trial, prev, tau)
                if Jt < J:
                    return trial, Jt, dt_, rt
            a *= 0.5
        return None

    g, gap = grad_gap(m, dist, res)
    for _ in range(cfg.polish_iter):
        if gap <= cfg.tol:
            break
        # W2-preconditioned step: mass flux -τ ρ ∇g across each cell boundary
        rho_b = 0.5 * (m + np.roll(m, -1)) * N
        flux = -tau * rho_b / TWO_PI * (np.roll(g, -1) - g) / (TWO_PI / N)
        dm = np.roll(flux, 1) - flux

        def pre(a, m=m, dm=dm):
            t = m + a * dm
            return t / t.sum() if t.min() > 0 else None

        def mirror(a, m=m, g=g):
            t = m * np.exp(-a * (g - m @ g))
            return t / t.sum()

        step = try_direction(m, pre, J) or try_direction(m, mirror, J)
        if step is None:
            break
        m, J, dist, res = step
        g, gap = grad_gap(m, dist, res)
    return JkoStepResult(dist, J, F.value(m), math.sqrt(res.cost), gap, it, gap <= cfg.tol)


@dataclass
class JkoTrajectory:
    """Piecewise-constant-in-time interpolant ``ρ_τ(s) = ρ_k`` for ``s ∈ [kτ, (k+1)τ)``."""

    tau: float
    states: list
    energies: np.ndarray
    increments: np.ndarray
    stationarity: np.ndarray
    converged: np.ndarray
    energy_lower_bound: float
    summability_lhs: float = 0.0
    summability_rhs: float = 0.0
    holder_ok: bool = True
    holder_constant: float = 0.0
    holder_worst: float = 0.0

    @property
    def times(self):
        return self.tau * np.arange(len(self.states))

    @property
    def summability_ok(self):
        return self.summability_lhs <= self.summability_rhs

    @property
    def summability_slack(self):
        return self.summability_rhs - self.summability_lhs

    def to_csv(self):
        N = self.states[0].N
        h = TWO_PI / N
        header = ["time"] + [f"theta_{format(h * (i + 0.5), '.17g')}" for i in range(N)]
        rows = [",".join(header)]
        for t, s in zip(self.times, self.states):
            rows.append(",".join(format(float(v), ".17g") for v in np.concatenate([[t], s.values])))
        return "\n".join(rows) + "\n"


def jko_trajectory(rho0: CircularDistribution, config: JkoConfig, F: GridEnergy,
                   W_linf: Optional[float] = None, holder_stride: Optional[int] = None) -> JkoTrajectory:
    """Run ``K`` JKO steps and verify the discrete energy estimates.

    ``W_linf`` (``||W||_∞`` of the fixed interaction) gives the lower bound
    ``inf F >= -W_linf / 2``; by default the bound is ``min U / 2`` with
    ``min U`` bounded below from the coefficients.
    The summability check is ``Σ_k W_2^2(ρ_k, ρ_{k-1}) / 2τ <= F(ρ_0) - inf F``.
    The Hölder check compares ``W_2(ρ_τ(s), ρ_τ(t))`` with
    ``c (√τ + √(t - s))``, ``c = sqrt(2 (F(ρ_0) - inf F))``, over all pairs
    with ``s`` on a stride of step indices.
    """
    states = [rho0]
    energies = [F.value(rho0.cell_masses)]
    incs, gaps, conv = [], [], []
    cur = rho0
    for _ in range(config.K):
        r = jko_step(cur, config.tau, F, config)
        if r.energy > energies[-1] + 1e-12 * (1 + abs(energies[-1])):
            log.warning("JKO energy increased by %.3e", r.energy - energies[-1])
        states.append(r.dist)
        energies.append(r.energy)
        incs.append(r.w2)
        gaps.append(r.stationarity)
        conv.append(r.converged)
        cur = r.dist
    if W_linf is None:
        # |Z_l| <= 2 on the circle, so U(t) >= U_0 - 2 Σ_{l>=1} |U_l| and F >= min U / 2
        lower = 0.5 * min(0.0, float(F.U[0] - 2.0 * np.sum(np.abs(F.U[1:]))))
    else:
        lower = -0.5 * W_linf
    traj = JkoTrajectory(config.tau, states, np.array(energies), np.array(incs), np.array(gaps),
                         np.array(conv), lower)
    traj.summability_lhs = float(np.sum(np.array(incs) ** 2) / (2.0 * config.tau))
    traj.summability_rhs = float(energies[0] - lower)
    c = math.sqrt(2.0 * max(energies[0] - lower, 0.0))
    traj.holder_constant = c
    stride = holder_stride or max(1, config.K // 10)
    worst = 0.0
    for i in range(0, config.K + 1, stride):
        for j in range(i + 1, config.K + 1):
            d = wasserstein_circle(states[i], states[j])
            bound = c * (math.sqrt(config.tau) + math.sqrt((j - i) * config.tau))
            worst = max(worst, d / bound if bound > 0 else (0.0 if d == 0 else math.inf))
    traj.holder_worst = worst
    traj.holder_ok = worst <= 1.0
    return traj


# --------------------------------------------------------------------------
# heat-flow diagnostics and the contraction check
# --------------------------------------------------------------------------


def heat_flow_grid(values, s):
    """Heat semigroup at time ``s`` applied to periodic samples (multiplier ``e^{-s k^2}``)."""
    v = np.asarray(values, dtype=float)
    F = np.fft.rfft(v)
    k = np.arange(F.size)
    return np.fft.irfft(F * np.exp(-s * k**2), n=v.size)


def grid_entropy(values):
    v = np.asarray(values, dtype=float)
    if np.any(v <= 0):
        raise EntropyUndefinedError("density has nonpositive cells")
    return float(np.mean(v * np.log(v)))


def evi_check(rho0: CircularDistribution, nu: CircularDistribution, times, h=1e-3):
    """Largest violation of the EVI for the heat flow on the circle.

    For each ``t`` the quantity
    ``(W_2^2(S^{t+h}ρ_0, ν) - W_2^2(S^t ρ_0, ν)) / 2h - E(ν) + E(S^t ρ_0)``
    is computed (curvature term zero for ``n = 2``); the EVI asserts it is
    ``<= 0``.  Both inputs must be grid distributions on the same cells.
    """
    if rho0.kind != "grid" or nu.kind != "grid":
        raise ValueError("evi_check needs grid distributions")
    Enu = grid_entropy(nu.values)
    worst = -math.inf
    for t in times:
        a = CircularDistribution.from_grid(heat_flow_grid(rho0.values, t), normalize=True)
        b = CircularDistribution.from_grid(heat_flow_grid(rho0.values, t + h), normalize=True)
        lhs = (circle_ot(b, nu).cost - circle_ot(a, nu).cost) / (2.0 * h)
        viol = lhs - (Enu - grid_entropy(a.values))
        worst = max(worst, viol)
    return worst


def random_bump_density(rng, N, kappa_range=(1.0, 8.0), max_bumps=4):
    """Mixture of 1-4 von-Mises-like bumps sampled on ``N`` cell centers, normalized."""
    th = TWO_PI * (np.arange(N) + 0.5) / N
    k = rng.integers(1, max_bumps + 1)
    vals = np.zeros(N)
    for _ in range(k):
        mu = rng.uniform(0.0, TWO_PI)
        kappa = rng.uniform(*kappa_range)
        vals += rng.uniform(0.2, 1.0) * np.exp(kappa * (np.cos(th - mu) - 1.0))
    return vals / vals.mean()


def convolve_grid(values, V: ZonalCoefficients):
    """``V * ρ`` for periodic samples (multiplier ``V_|k|``, zero beyond ``V.L``)."""
    v = np.asarray(values, dtype=float)
    F = np.fft.rfft(v)
    m = np.zeros(F.size)
    top = min(F.size, V.L + 1)
    m[:top] = V.coeffs[:top]
    return np.fft.irfft(F * m, n=v.size)


@dataclass
class CheckReport:
    name: str
    max_ratio: float
    samples: int
    seed: int
    extra: dict = field(default_factory=dict)

    def to_json(self):
        d = {"name": self.name, "max_ratio": self.max_ratio, "samples": self.samples, "seed": self.seed}
        d.update(self.extra)
        return json.dumps(d, sort_keys=True)


def convolution_contraction_check(V: ZonalCoefficients, pairs=100, p=2, seed=0, N=256) -> CheckReport:
    """Largest ``W_p(V*μ, V*ν) / W_p(μ, ν)`` over random pairs of bump mixtures.

    Pair ``i`` uses its own generator seeded by ``(seed, i)``.  Pairs with
    ``W_p(μ, ν) < 1e-12`` are skipped.
    """
    if V.dim != 2:
        raise ValueError("contraction check runs on the circle")
    ratios = []
    for i in range(pairs):
        rng = np.random.default_rng([seed, i])
        a = random_bump_density(rng, N)
        b = random_bump_density(rng, N)
        mu, nu = CircularDistribution.from_grid(a), CircularDistribution.from_grid(b)
        d = wasserstein_circle(mu, nu, p)
        if d < 1e-12:
            continue
        ca = np.clip(convolve_grid(a, V), 0.0, None)
        cb = np.clip(convolve_grid(b, V), 0.0, None)
        dv = wasserstein_circle(CircularDistribution.from_grid(ca, normalize=True),
                                CircularDistribution.from_grid(cb, normalize=True), p)
        ratios.append(dv / d)
    mx = float(max(ratios)) if ratios else 0.0
    return CheckReport("convolution_contraction", mx, len(ratios), seed, {"p": p})
