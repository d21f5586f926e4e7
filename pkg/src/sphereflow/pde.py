r"""Method-of-lines solvers for the aggregation (AE) and aggregation-diffusion (ADE) equations.

Densities are zonal for ``n >= 3`` (coefficients in the ``Z_l`` basis on a
Gauss-Jacobi grid) and carry a full Fourier description on the circle
(``n = 2``): a cosine part stored as :class:`ZonalCoefficients` and a sine
part with the same ``2 sin(lθ)`` normalization.

The right-hand side is the Galerkin projection of the weak form

.. math:: \frac{d}{dt}\langle \rho, b_k\rangle = -\int \rho\, \nabla\xi\cdot\nabla b_k \, d\sigma,
          \qquad \xi = U * \rho,

with ``U = W + V`` for AE and ``ξ = W * ρ + ρ`` for ADE.  Quadrature is exact
for the cubic integrand, so mass is conserved exactly and the semi-discrete
energy satisfies ``dF/dt = -∫ ρ |∇ξ|^2 ≤ 0``.
"""

import csv
import functools
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import EntropyUndefinedError, SolverInstabilityError, UnsupportedDimensionError
from .kernels import Kernel, linf_norm
from .spectral import (
    ZonalCoefficients,
    build_quadrature,
    default_grid_size,
    laplacian_eigenvalue,
    zonal_derivative_table,
    zonal_norms,
    zonal_table,
)

log = logging.getLogger(__name__)

ENTROPY_FLOOR = 1e-14


# --------------------------------------------------------------------------
# Galerkin basis
# --------------------------------------------------------------------------


class _Basis:
    """Basis functions with their polar derivatives on a quadrature rule.

    Attributes
    ----------
    B, G : ndarray, shape (K, N)
        Basis values and polar-angle derivatives at the nodes.
    w : ndarray, shape (N,)
        Probability weights.
    norms : ndarray, shape (K,)
        Squared ``L^2(σ)`` norms of the basis functions.
    degree : ndarray, shape (K,)
        Harmonic degree of each basis function (selects kernel multipliers).
    theta : ndarray, shape (N,)
        Node angles.
    """

    def __init__(self, n, L, M):
        self.n, self.L = n, L
        if n == 2:
            N = max(M, 3 * L + 2)
            th = 2.0 * np.pi * np.arange(N) / N
            l = np.arange(1, L + 1)[:, None]
            c, s = np.cos(l * th), np.sin(l * th)
            self.B = np.vstack([np.ones((1, N)), 2 * c, 2 * s])
            self.G = np.vstack([np.zeros((1, N)), -2 * l * s, 2 * l * c])
            self.w = np.full(N, 1.0 / N)
            self.norms = np.concatenate([[1.0], np.full(2 * L, 2.0)])
            self.degree = np.concatenate([np.arange(L + 1), np.arange(1, L + 1)])
            self.theta = th
        else:
            grid = build_quadrature(n, M)
            t = grid.nodes
            self.B = zonal_table(n, L, t)
            # d/dθ Z_l(cos θ) = -sin θ Z_l'(t)
            self.G = -np.sqrt(1.0 - t**2) * zonal_derivative_table(n, L, t)
            self.w = np.asarray(grid.weights)
            self.norms = np.asarray(zonal_norms(n, L), dtype=float)
            self.degree = np.arange(L + 1)
            self.theta = grid.theta
        self.K = self.norms.size
        self.lam = laplacian_eigenvalue(n, self.degree).astype(float)

    def multiplier(self, c: Optional[ZonalCoefficients]):
        if c is None:
            return np.zeros(self.K)
        if c.dim != self.n:
            raise ValueError(f"kernel dimension {c.dim} does not match density dimension {self.n}")
        return c.truncate(self.L).coeffs[self.degree]

    def values(self, vec):
        return vec @ self.B

    def eval_at(self, vec, theta):
        theta = np.asarray(theta, dtype=float)
        L = self.L
        if self.n == 2:
            l = np.arange(1, L + 1)[:, None]
            th = theta.reshape(1, -1)
            out = vec[0] + 2 * vec[1 : L + 1] @ np.cos(l * th) + 2 * vec[L + 1 :] @ np.sin(l * th)
        else:
            out = vec @ zonal_table(self.n, L, np.cos(theta.reshape(-1)))
        return out.reshape(theta.shape)

    def project(self, f_theta):
        """Galerkin coefficients of ``θ -> f(θ)`` using the basis quadrature."""
        vals = np.asarray(f_theta(self.theta), dtype=float)
        return (self.B @ (self.w * vals)) / self.norms


@functools.lru_cache(maxsize=32)
def _basis(n, L, M):
    return _Basis(n, L, M)


def _coeffs_of(k):
    if k is None:
        return None
    if isinstance(k, Kernel):
        return k.coeffs
    return k


# --------------------------------------------------------------------------
# state
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DensityState:
    """Probability density on ``S^{n-1}`` (w.r.t. the uniform probability measure).

    Parameters
    ----------
    coeffs : ZonalCoefficients
        Zonal (``n >= 3``) or cosine (``n = 2``) coefficients; ``coeffs[0]`` is the mass.
    sin_coeffs : ndarray, optional
        Circle only: coefficients of ``2 sin(lθ)`` for ``l = 1..L``.
    time : float
    M : int, optional
        Quadrature size for grid values (default ``2L + 8``).
    """

    coeffs: ZonalCoefficients
    sin_coeffs: Optional[np.ndarray] = None
    time: float = 0.0
    M: Optional[int] = None

    def __post_init__(self):
        n, L = self.coeffs.dim, self.coeffs.L
        if self.sin_coeffs is not None:
            if n != 2:
                raise UnsupportedDimensionError("sine coefficients only exist on the circle")
            s = np.array(self.sin_coeffs, dtype=float).reshape(-1)
            if s.size != L:
                raise ValueError(f"expected {L} sine coefficients, got {s.size}")
            s.setflags(write=False)
            object.__setattr__(self, "sin_coeffs", s)
        M = self.M or default_grid_size(L)
        if M < 2 * L + 8:
            raise ValueError(f"quadrature size M={M} below 2L+8={2 * L + 8}")
        object.__setattr__(self, "M", int(M))
        if self.time < 0:
            raise ValueError("time must be nonnegative")

    @property
    def n(self):
        return self.coeffs.dim

    @property
    def L(self):
        return self.coeffs.L

    @property
    def mass(self):
        return float(self.coeffs.coeffs[0])

    @property
    def basis(self) -> _Basis:
        return _basis(self.n, self.L, self.M)

    @property
    def vector(self):
        """Coefficients packed as ``[a_0..a_L, b_1..b_L]`` (circle) or ``[a_0..a_L]``."""
        if self.n == 2:
            s = self.sin_coeffs if self.sin_coeffs is not None else np.zeros(self.L)
            return np.concatenate([self.coeffs.coeffs, s])
        return np.array(self.coeffs.coeffs)

    @property
    def values(self):
        """Density at the basis nodes (``basis.theta``)."""
        return self.basis.values(self.vector)

    @property
    def theta(self):
        return self.basis.theta

    def __call__(self, theta):
        return self.basis.eval_at(self.vector, theta)

    @classmethod
    def from_vector(cls, n, L, vec, time=0.0, M=None):
        vec = np.asarray(vec, dtype=float)
        if n == 2:
            return cls(ZonalCoefficients(2, vec[: L + 1]), vec[L + 1 :], time, M)
        return cls(ZonalCoefficients(n, vec), None, time, M)

    @classmethod
    def from_function(cls, f, n, L, M=None, time=0.0):
        """Project ``θ -> f(θ)`` (polar angle, or circle angle when ``n = 2``)."""
        M = M or default_grid_size(L)
        vec = _basis(n, L, M).project(f)
        return cls.from_vector(n, L, vec, time, M)

    @classmethod
    def uniform(cls, n, L, M=None):
        c = np.zeros(L + 1)
        c[0] = 1.0
        return cls(ZonalCoefficients(n, c), np.zeros(L) if n == 2 else None, 0.0, M)

    def with_vector(self, vec, time=None):
        return DensityState.from_vector(self.n, self.L, vec, self.time if time is None else time, self.M)

    def convolved(self, K: ZonalCoefficients):
        """``K * ρ`` as a state (mass ``K_0`` times the mass of ``ρ``)."""
        return self.with_vector(self.basis.multiplier(_coeffs_of(K)) * self.vector)

    def l2_norm_squared(self):
        return float(np.sum(self.vector**2 * self.basis.norms))


# --------------------------------------------------------------------------
# energies
# --------------------------------------------------------------------------


def _spectral_energy(b, vec, U):
    return 0.5 * float(np.sum(U * vec**2 * b.norms))


def energy(rho: DensityState, W, V=None):
    """Free energy in the double-integral and square-root forms.

    ``F = ½∫∫W ρρ + ½∫∫V ρρ``.  The first return value uses the coefficient
    identity ``∫∫K ρρ = Σ K_l |ρ_l|^2 Z_l(1)``; the second evaluates
    ``½||√V * ρ||^2`` by quadrature of the reconstructed ``√V * ρ``.  With
    ``V = None`` the local term ``½||ρ||^2`` is used (the ADE energy).
    """
    b = rho.basis
    vec = rho.vector
    Wm = b.multiplier(_coeffs_of(W))
    V = _coeffs_of(V)
    Vm = np.ones(b.K) if V is None else b.multiplier(V)
    f_double = _spectral_energy(b, vec, Wm + Vm)
    if np.any(Vm < -1e-12):
        raise ValueError("square-root form needs a kernel with nonnegative coefficients")
    g = b.values(np.sqrt(np.clip(Vm, 0.0, None)) * vec)
    f_sqrt = 0.5 * float(b.w @ g**2) + _spectral_energy(b, vec, Wm)
    return f_double, f_sqrt


def entropy(rho: DensityState, clip=False):
    """``∫ ρ log ρ dσ`` by quadrature on the basis nodes.

    Raises
    ------
    EntropyUndefinedError
        If some node value is nonpositive and ``clip`` is False.  With
        ``clip`` the values are floored at ``1e-14``.
    """
    v = rho.values
    if np.min(v) <= 0:
        if not clip:
            raise EntropyUndefinedError(f"density minimum {np.min(v):.3e} is not positive")
        v = np.maximum(v, ENTROPY_FLOOR)
    return float(rho.basis.w @ (v * np.log(v)))


# --------------------------------------------------------------------------
# right-hand sides
# --------------------------------------------------------------------------


def _weak_rhs(b, vec, U, local):
    rho = vec @ b.B
    dxi = (U * vec) @ b.G
    if local:
        dxi = dxi + vec @ b.G
    flux = b.w * rho * dxi
    out = -(b.G @ flux) / b.norms
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("non-finite flux")
    return out


def rhs_aggregation(rho: DensityState, W, V):
    """Time derivative of the packed coefficients under AE with ``U = W + V``."""
    b = rho.basis
    U = b.multiplier(_coeffs_of(W)) + b.multiplier(_coeffs_of(V))
    return _weak_rhs(b, rho.vector, U, local=False)


def rhs_ade(rho: DensityState, W):
    """Time derivative of the packed coefficients under ADE (``ξ = W * ρ + ρ``)."""
    b = rho.basis
    return _weak_rhs(b, rho.vector, b.multiplier(_coeffs_of(W)), local=True)


# --------------------------------------------------------------------------
# time stepping
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SolverConfig:
    """Discretization and time-stepping parameters.

    ``dt = None`` selects ``0.25 / (max_l |λ_l U_l| max(||ρ_0||_∞, 2))``, the
    explicit stability scale of the linearized operator (``U_l = 1 + W_l`` for
    ADE).  ``diagnostics_every = None`` gives about 100 samples.
    """

    L: int = 32
    M: Optional[int] = None
    dt: Optional[float] = None
    T: float = 1.0
    scheme: str = "rk4"
    clip_negative: bool = True
    diagnostics_every: Optional[int] = None
    max_halvings: int = 6

    def __post_init__(self):
        M = self.M or default_grid_size(self.L)
        object.__setattr__(self, "M", int(M))
        errs = []
        if self.L < 0:
            errs.append("L must be >= 0")
        if M < 2 * self.L + 8:
            errs.append(f"M={M} must be >= 2L+8={2 * self.L + 8}")
        if self.dt is not None and not self.dt > 0:
            errs.append("dt must be > 0")
        if not self.T > 0:
            errs.append("T must be > 0")
        if self.scheme not in ("rk4", "heun"):
            errs.append(f"scheme must be 'rk4' or 'heun', got {self.scheme!r}")
        if self.diagnostics_every is not None and self.diagnostics_every < 1:
            errs.append("diagnostics_every must be >= 1")
        if errs:
            raise ValueError("; ".join(errs))


ENERGY_COLUMNS = ("time", "F_double", "F_sqrt", "entropy", "mass", "min_density", "conv_l2")


@dataclass
class EnergyReport:
    """Diagnostic time series sampled along a solve."""

    time: list = field(default_factory=list)
    F_double: list = field(default_factory=list)
    F_sqrt: list = field(default_factory=list)
    entropy: list = field(default_factory=list)
    mass: list = field(default_factory=list)
    min_density: list = field(default_factory=list)
    conv_l2: list = field(default_factory=list)
    entropy_clipped: int = 0

    def append(self, rho, W, V, clip):
        fd, fs = energy(rho, W, V)
        vals = rho.values
        if np.min(vals) <= 0:
            if clip:
                self.entropy_clipped += 1
                log.info("entropy diagnostic clipped at t=%.6g (min %.3e)", rho.time, np.min(vals))
                e = entropy(rho, clip=True)
            else:
                e = math.nan
        else:
            e = entropy(rho)
        b = rho.basis
        Vm = np.ones(b.K) if V is None else b.multiplier(_coeffs_of(V))
        self.time.append(rho.time)
        self.F_double.append(fd)
        self.F_sqrt.append(fs)
        self.entropy.append(e)
        self.mass.append(rho.mass)
        self.min_density.append(float(np.min(vals)))
        self.conv_l2.append(float(np.sum(Vm * rho.vector**2 * b.norms)))

    def as_array(self):
        return np.column_stack([getattr(self, c) for c in ENERGY_COLUMNS])

    def to_csv(self):
        return _csv(ENERGY_COLUMNS, self.as_array())


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([format(float(x), ".17g") for x in r])
    return buf.getvalue()


@dataclass
class Trajectory:
    """Sampled solution: packed coefficient vectors at increasing times."""

    n: int
    L: int
    M: int
    times: np.ndarray
    vectors: np.ndarray
    report: EnergyReport
    dt: float
    halvings: int = 0

    def __len__(self):
        return len(self.times)

    def state(self, i) -> DensityState:
        return DensityState.from_vector(self.n, self.L, self.vectors[i], float(self.times[i]), self.M)

    @property
    def final(self):
        return self.state(-1)

    def coeff_header(self):
        h = ["time"] + [f"l{l}" for l in range(self.L + 1)]
        if self.n == 2:
            h += [f"s{l}" for l in range(1, self.L + 1)]
        return h

    def to_csv(self):
        return _csv(self.coeff_header(), np.column_stack([self.times, self.vectors]))

    def grid_csv(self):
        b = _basis(self.n, self.L, self.M)
        header = ["time"] + [f"theta_{format(t, '.17g')}" for t in b.theta]
        return _csv(header, np.column_stack([self.times, self.vectors @ b.B]))


def default_dt(rho0: DensityState, W, V, T=None):
    b = rho0.basis
    U = b.multiplier(_coeffs_of(W)) + (np.ones(b.K) if V is None else b.multiplier(_coeffs_of(V)))
    stiff = float(np.max(np.abs(b.lam * U)))
    sup = max(float(np.max(np.abs(rho0.values))), 2.0)
    dt = 0.25 / (max(stiff, 1e-12) * sup)
    return dt if T is None else min(dt, T)


def _step(f, y, dt, scheme):
    if scheme == "rk4":
        k1 = f(y)
        k2 = f(y + 0.5 * dt * k1)
        k3 = f(y + 0.5 * dt * k2)
        k4 = f(y + dt * k3)
        return y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    k1 = f(y)
    k2 = f(y + dt * k1)
    return y + 0.5 * dt * (k1 + k2)


def solve(initial: DensityState, W, V, config: SolverConfig) -> Trajectory:
    """Integrate AE (``V`` given) or ADE (``V is None``) from ``initial``.

    Each base step of size ``dt`` is taken as ``2^k`` substeps.  A base step
    whose result is non-finite or raises the energy beyond round-off is
    retried with ``k + 1`` (at most ``config.max_halvings`` times).

    Raises
    ------
    SolverInstabilityError
        When the halving budget is exhausted; ``.partial`` holds the
        trajectory up to the last accepted sample.
    """
    if initial.L != config.L or initial.M != config.M:
        initial = _reproject(initial, config.L, config.M)
    if abs(initial.mass - 1.0) > 1e-10:
        raise ValueError(f"initial mass {initial.mass:.12g} differs from 1")
    b = initial.basis
    Wc, Vc = _coeffs_of(W), _coeffs_of(V)
    Wm = b.multiplier(Wc)
    local = Vc is None
    U = Wm if local else Wm + b.multiplier(Vc)
    Ue = Wm + 1.0 if local else U
    f = lambda y: _weak_rhs(b, y, U, local)
    F = lambda y: _spectral_energy(b, y, Ue)

    dt0 = config.dt or default_dt(initial, Wc, Vc)
    nsteps = max(1, math.ceil(config.T / dt0 - 1e-9))
    dt0 = config.T / nsteps
    every = config.diagnostics_every or max(1, nsteps // 100)

    y = initial.vector
    times, vecs = [0.0], [y.copy()]
    report = EnergyReport()
    report.append(initial.with_vector(y, 0.0), Wc, Vc, config.clip_negative)
    k = 0

    def partial_traj():
        return Trajectory(initial.n, initial.L, initial.M, np.array(times), np.array(vecs), report, dt0, k)

    for step in range(1, nsteps + 1):
        F0 = F(y)
        while True:
            sub = 2**k
            h = dt0 / sub
            try:
                z = y
                with np.errstate(over="raise", invalid="raise"):
                    for _ in range(sub):
                        z = _step(f, z, h, config.scheme)
                    ok = np.all(np.isfinite(z)) and F(z) <= F0 + 1e-9 * (1.0 + abs(F0))
            except FloatingPointError:
                ok = False
            if ok:
                break
            if k >= config.max_halvings:
                t_last = (step - 1) * dt0
                raise SolverInstabilityError(
                    f"unstable after {k} halvings at t={t_last:.6g}", t_last, partial_traj())
            k += 1
            log.warning("instability at t=%.6g: halving dt to %.3e", (step - 1) * dt0, dt0 / 2**k)
        y = z
        if step % every == 0 or step == nsteps:
            t = step * dt0
            times.append(t)
            vecs.append(y.copy())
            report.append(initial.with_vector(y, t), Wc, Vc, config.clip_negative)
    return partial_traj()


def _reproject(rho: DensityState, L, M):
    vec = rho.vector
    n = rho.n
    out = np.zeros(_basis(n, L, M).K)
    m = min(L, rho.L)
    out[: m + 1] = vec[: m + 1]
    if n == 2:
        out[L + 1 : L + 1 + m] = vec[rho.L + 1 : rho.L + 1 + m]
    return DensityState.from_vector(n, L, out, rho.time, M)


# --------------------------------------------------------------------------
# residual and the ε-sweep
# --------------------------------------------------------------------------


def _fourier_multiplier(vals, mult):
    """Apply the even multiplier ``mult[|k|]`` (zero beyond its length) to periodic samples."""
    N = vals.size
    F = np.fft.rfft(vals)
    m = np.zeros(F.size)
    top = min(F.size, mult.size)
    m[:top] = mult[:top]
    return np.fft.irfft(F * m, n=N)


def residual_norm(rho: DensityState, V, phi: Callable = np.cos, oversample=8):
    """``∫ |√V * (ρ φ') - (√V * ρ) φ'| dσ`` on the circle.

    ``φ'`` is obtained spectrally from samples of ``φ``; all products are
    formed on a uniform grid of ``oversample * (L + 8)`` points.

    Raises
    ------
    UnsupportedDimensionError
        Unless ``n = 2``.
    """
    if rho.n != 2:
        raise UnsupportedDimensionError("the residual is only implemented on the circle")
    V = _coeffs_of(V)
    N = int(oversample * (rho.L + 8))
    th = 2.0 * np.pi * np.arange(N) / N
    r = rho(th)
    p = np.fft.rfft(np.asarray(phi(th), dtype=float) * np.ones(N))
    dphi = np.fft.irfft(1j * np.arange(p.size) * p, n=N)
    if N % 2 == 0:
        # Nyquist mode carries no derivative information
        p[-1] = 0
        dphi = np.fft.irfft(1j * np.arange(p.size) * p, n=N)
    s = np.sqrt(np.clip(V.coeffs, 0.0, None))
    res = _fourier_multiplier(r * dphi, s) - _fourier_multiplier(r, s) * dphi
    return float(np.mean(np.abs(res)))


@dataclass
class ConvergenceRow:
    eps: float
    error: float
    sup_gap: float
    residual: float
    failed: bool = False
    message: str = ""


@dataclass
class ConvergenceTable:
    rows: list
    reference: Optional[Trajectory] = None

    COLUMNS = ("eps", "error", "sup_gap", "residual", "failed")

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    def to_csv(self):
        return _csv(self.COLUMNS, [[getattr(r, c) for c in self.COLUMNS] for r in self.rows])

    def strictly_decreasing(self, name="error"):
        vals = self.column(name)
        return bool(np.all(np.diff(vals) < 0)) and not any(r.failed for r in self.rows)


def _run_ae(args):
    eps, initial, W, family, config = args
    V = family(eps, config.L + 16)
    return eps, V, solve(initial, W, V.truncate(config.L), config)


def convergence_study(eps_list, W, family, initial: DensityState, config: SolverConfig,
                      phi=np.cos, jobs=1) -> ConvergenceTable:
    """Solve AE for each ``eps`` and compare ``v = √V_eps * ρ^eps`` with the ADE solution.

    Parameters
    ----------
    eps_list : sequence of float
    W : ZonalCoefficients or Kernel
        Fixed interaction.
    family : callable
        ``(eps, L) -> ZonalCoefficients`` of the localized repulsion.
    initial : DensityState
    config : SolverConfig
        Shared by every solve.  ``dt`` defaults to the ADE stability scale so
        that all runs are sampled at the same times.
    phi : callable
        Test function for the residual (circle only).
    jobs : int
        Number of worker processes for the AE solves.

    Returns
    -------
    ConvergenceTable
        ``error`` is ``||v - ρ||_{L^2(0,T;L^2)}`` (trapezoid in time),
        ``sup_gap`` the largest ``L^2`` gap over samples and ``residual``
        the largest residual over samples.
    """
    if len(eps_list) == 0:
        raise ValueError("empty eps list")
    if initial.L != config.L or initial.M != config.M:
        initial = _reproject(initial, config.L, config.M)
    if config.dt is None:
        from dataclasses import replace
        config = replace(config, dt=default_dt(initial, _coeffs_of(W), None))
    ref = solve(initial, W, None, config)
    tasks = [(eps, initial, _coeffs_of(W), family, config) for eps in eps_list]
    results = {}
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            futs = {ex.submit(_run_ae, t): t[0] for t in tasks}
            for fut, eps in futs.items():
                try:
                    results[eps] = fut.result()[1:]
                except Exception as exc:  # noqa: BLE001 - reported in the table
                    results[eps] = exc
    else:
        for t in tasks:
            try:
                results[t[0]] = _run_ae(t)[1:]
            except Exception as exc:  # noqa: BLE001
                results[t[0]] = exc
    b = initial.basis
    rows = []
    for eps in eps_list:
        res = results[eps]
        if isinstance(res, Exception):
            rows.append(ConvergenceRow(eps, math.nan, math.nan, math.nan, True, str(res)))
            continue
        V, traj = res
        if len(traj) != len(ref) or not np.allclose(traj.times, ref.times):
            rows.append(ConvergenceRow(eps, math.nan, math.nan, math.nan, True, "sample times differ"))
            continue
        s = np.sqrt(b.multiplier(V))
        diff = traj.vectors * s - ref.vectors
        gap2 = diff**2 @ b.norms
        err = math.sqrt(float(np.trapezoid(gap2, traj.times)))
        res_sup = math.nan
        if initial.n == 2:
            res_sup = max(residual_norm(traj.state(i), V, phi) for i in range(len(traj)))
        rows.append(ConvergenceRow(float(eps), err, float(np.sqrt(gap2.max())), res_sup))
    return ConvergenceTable(rows, ref)


def apriori_bound(rho0: DensityState, W, V):
    """Right side of ``||√V * ρ(t)||^2 <= ||√V * ρ_0||^2 + 2||W||_∞``."""
    b = rho0.basis
    conv0 = float(np.sum(b.multiplier(_coeffs_of(V)) * rho0.vector**2 * b.norms))
    Wn = linf_norm(W) if isinstance(W, Kernel) else linf_norm(_coeffs_of(W))
    return conv0 + 2.0 * Wn
