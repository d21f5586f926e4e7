r"""Zonal harmonic calculus on :math:`S^{n-1}`.

A zonal function ``f(<p, x>)`` is stored through its coefficients in the
basis of zonal harmonics ``Z_l``,

.. math:: f(t) = \sum_{l \le L} \hat f_l Z_l(t),

with ``Z_l = (2l+n-2)/(n-2) C_l^{(n-2)/2}`` for ``n >= 3`` and
``Z_0 = 1, Z_l(cos θ) = 2 cos(lθ)`` on the circle.  In this normalization the
spherical convolution of a kernel with a function is an elementwise product
of coefficient sequences, the mass of a density is its ``l = 0`` coefficient,
and ``||f||^2 = Σ f_l^2 Z_l(1)``.

Integrals against the uniform probability measure are pushed forward to
``[-1, 1]``, where they become integrals against the normalized weight
``(1 - t^2)^{(n-3)/2}`` and are evaluated by Gauss-Jacobi quadrature.
"""

import csv
import functools
import io
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import roots_jacobi

from .errors import NotPositiveSemidefiniteError

MAX_DEGREE = 256
#: coefficients above this negative level are treated as round-off in ``sqrt_kernel``
NEG_CLAMP = -1e-12


def _check_dim(n):
    if int(n) != n or n < 2:
        raise ValueError(f"sphere dimension parameter must be an integer >= 2, got {n}")
    return int(n)


def _check_degree(L):
    if int(L) != L or L < 0:
        raise ValueError(f"degree must be a nonnegative integer, got {L}")
    if L > MAX_DEGREE:
        raise ValueError(f"degree {L} exceeds the supported maximum {MAX_DEGREE}")
    return int(L)


# --------------------------------------------------------------------------
# coefficient container
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ZonalCoefficients:
    """Coefficients of a zonal kernel or function in the ``Z_l`` basis.

    Parameters
    ----------
    dim : int
        Ambient dimension ``n`` of the sphere ``S^{n-1}``.
    coeffs : array_like, shape (L+1,)
        Coefficients for degrees ``0..L``.
    """

    dim: int
    coeffs: np.ndarray

    def __post_init__(self):
        _check_dim(self.dim)
        c = np.array(self.coeffs, dtype=float).reshape(-1)
        if c.size == 0:
            raise ValueError("need at least the degree-0 coefficient")
        _check_degree(c.size - 1)
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "coeffs", c)

    @property
    def L(self) -> int:
        return self.coeffs.size - 1

    def __len__(self):
        return self.coeffs.size

    def truncate(self, L):
        """Coefficients up to degree ``L`` (zero padded if ``L`` exceeds the stored degree)."""
        L = _check_degree(L)
        c = np.zeros(L + 1)
        m = min(L, self.L) + 1
        c[:m] = self.coeffs[:m]
        return ZonalCoefficients(self.dim, c)

    def __eq__(self, other):
        if not isinstance(other, ZonalCoefficients):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self.coeffs, other.coeffs)

    __hash__ = None

    def to_csv(self) -> str:
        """Serialize as CSV: ``n,L`` header line, its values, then ``l,value`` rows."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "L"])
        w.writerow([self.dim, self.L])
        w.writerow(["l", "value"])
        for l, v in enumerate(self.coeffs):
            w.writerow([l, format(float(v), ".17g")])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ZonalCoefficients":
        rows = [r for r in csv.reader(io.StringIO(text)) if r]
        if len(rows) < 3 or [s.strip() for s in rows[0]] != ["n", "L"]:
            raise ValueError("coefficient CSV must start with an 'n,L' header")
        n, L = int(rows[1][0]), int(rows[1][1])
        if [s.strip() for s in rows[2]] != ["l", "value"]:
            raise ValueError("coefficient CSV: expected 'l,value' header on line 3")
        body = rows[3:]
        if len(body) != L + 1:
            raise ValueError(f"coefficient CSV declares L={L} but has {len(body)} rows")
        c = np.empty(L + 1)
        for lineno, r in enumerate(body, start=4):
            l = int(r[0])
            if l != lineno - 4:
                raise ValueError(f"line {lineno}: expected degree {lineno - 4}, got {l}")
            c[l] = float(r[1])
        return cls(n, c)


# --------------------------------------------------------------------------
# polynomials
# --------------------------------------------------------------------------


def gegenbauer_table(lam, L, t):
    """Values ``C_l^lam(t)`` for ``l = 0..L``; shape ``(L+1,) + t.shape``."""
    if lam <= 0:
        raise ValueError("Gegenbauer parameter must be positive; use zonal_table for n = 2")
    t = np.asarray(t, dtype=float)
    out = np.empty((L + 1,) + t.shape)
    out[0] = 1.0
    if L >= 1:
        out[1] = 2.0 * lam * t
    for k in range(L - 1):
        # (k+2) C_{k+2} = 2(lam+k+1) t C_{k+1} - (2 lam + k) C_k
        out[k + 2] = (2.0 * (lam + k + 1) * t * out[k + 1] - (2.0 * lam + k) * out[k]) / (k + 2)
    return out


def gegenbauer_eval(lam, l, t):
    """Gegenbauer polynomial ``C_l^lam(t)`` by the three-term recursion."""
    if l < 0:
        raise ValueError("degree must be nonnegative")
    return gegenbauer_table(lam, int(l), t)[int(l)]


def _chebyshev_tables(L, t):
    T = np.empty((L + 1,) + t.shape)
    U = np.empty((L + 1,) + t.shape)
    T[0] = 1.0
    U[0] = 1.0
    if L >= 1:
        T[1] = t
        U[1] = 2.0 * t
    for k in range(1, L):
        T[k + 1] = 2.0 * t * T[k] - T[k - 1]
        U[k + 1] = 2.0 * t * U[k] - U[k - 1]
    return T, U


def zonal_table(n, L, t):
    """Zonal harmonics ``Z_l(t)`` for ``l = 0..L``; shape ``(L+1,) + t.shape``."""
    n = _check_dim(n)
    t = np.asarray(t, dtype=float)
    if n == 2:
        T, _ = _chebyshev_tables(L, t)
        Z = 2.0 * T
        Z[0] = 1.0
        return Z
    lam = (n - 2) / 2.0
    C = gegenbauer_table(lam, L, t)
    l = np.arange(L + 1).reshape((-1,) + (1,) * t.ndim)
    return (2 * l + n - 2) / (n - 2) * C


def zonal_derivative_table(n, L, t):
    """Derivatives ``Z_l'(t)`` for ``l = 0..L``.

    Uses ``d/dt C_l^lam = 2 lam C_{l-1}^{lam+1}`` and, on the circle,
    ``d/dt 2 T_l = 2 l U_{l-1}``.
    """
    n = _check_dim(n)
    t = np.asarray(t, dtype=float)
    out = np.zeros((L + 1,) + t.shape)
    if L == 0:
        return out
    if n == 2:
        _, U = _chebyshev_tables(L - 1, t)
        l = np.arange(1, L + 1).reshape((-1,) + (1,) * t.ndim)
        out[1:] = 2.0 * l * U
        return out
    lam = (n - 2) / 2.0
    C = gegenbauer_table(lam + 1.0, L - 1, t)
    l = np.arange(1, L + 1).reshape((-1,) + (1,) * t.ndim)
    out[1:] = (2 * l + n - 2) * C
    return out


def zonal_harmonic_eval(n, l, t):
    """Zonal harmonic ``Z_l(t)`` on ``S^{n-1}`` (Chebyshev form when ``n = 2``)."""
    return zonal_table(n, int(l), t)[int(l)]


@functools.lru_cache(maxsize=64)
def _zonal_norms(n, L):
    z = zonal_table(n, L, np.array(1.0))
    z.setflags(write=False)
    return z


def zonal_norms(n, L):
    """``Z_l(1) = ||Z_l||^2``, the dimension of the degree-``l`` harmonic space."""
    return _zonal_norms(_check_dim(n), _check_degree(L))


def laplacian_eigenvalue(n, l):
    """Laplace-Beltrami eigenvalue ``-l(n-2+l)`` (works elementwise on arrays)."""
    l = np.asarray(l)
    return -l * (n - 2 + l)


# --------------------------------------------------------------------------
# quadrature
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Gauss-Jacobi rule for the pushforward of the uniform measure under ``x -> <p, x>``."""

    dim: int
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def M(self) -> int:
        return self.nodes.size

    @functools.cached_property
    def theta(self):
        """Polar angles ``arccos t_i``."""
        return np.arccos(self.nodes)

    def integrate(self, values):
        """``Σ w_i values_i`` along the last axis."""
        return np.asarray(values) @ self.weights


@functools.lru_cache(maxsize=64)
def build_quadrature(n, M) -> QuadratureGrid:
    """Gauss-Jacobi nodes and weights for ``(1-t^2)^{(n-3)/2}``, weights normalized to sum 1.

    Parameters
    ----------
    n : int
        Ambient dimension, ``n >= 2``.
    M : int
        Number of nodes, ``M >= 2``; polynomials up to degree ``2M-1`` are
        integrated exactly.
    """
    n = _check_dim(n)
    if int(M) != M or M < 2:
        raise ValueError("need at least 2 quadrature nodes")
    a = (n - 3) / 2.0
    t, w = roots_jacobi(int(M), a, a)
    w = w / w.sum()
    t.setflags(write=False)
    w.setflags(write=False)
    return QuadratureGrid(n, t, w)


def default_grid_size(L):
    """Node count ``2L + 8`` used when the caller does not choose one."""
    return 2 * int(L) + 8


@dataclass(frozen=True, eq=False)
class ZonalFunction:
    """Samples of a zonal function at the nodes of a :class:`QuadratureGrid`."""

    grid: QuadratureGrid
    values: np.ndarray
    coeffs: Optional[ZonalCoefficients] = field(default=None)

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(-1)
        if v.size != self.grid.M:
            raise ValueError("values must match the number of grid nodes")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.coeffs is not None:
            if self.coeffs.dim != self.grid.dim:
                raise ValueError("coefficient and grid dimensions differ")
            rec = reconstruct_kernel(self.coeffs, self.grid.nodes)
            scale = max(1.0, float(np.max(np.abs(v))))
            if np.max(np.abs(rec - v)) > 1e-8 * scale:
                raise ValueError("values and coefficients disagree after reconstruction")

    @classmethod
    def from_callable(cls, f, grid):
        return cls(grid, f(grid.nodes))

    @classmethod
    def from_coeffs(cls, c: ZonalCoefficients, grid=None):
        grid = grid or build_quadrature(c.dim, default_grid_size(c.L))
        return cls(grid, reconstruct_kernel(c, grid.nodes), c)


# --------------------------------------------------------------------------
# transforms
# --------------------------------------------------------------------------


def decompose_kernel(W, n, L, M=None) -> ZonalCoefficients:
    """Coefficients ``Ŵ_l = Z_l(1)^{-1} Σ_i w_i W(t_i) Z_l(t_i)``.

    Parameters
    ----------
    W : ZonalFunction or callable
        Kernel profile.  A callable is sampled on a fresh grid of ``M`` nodes
        (default ``2L + 8``); a :class:`ZonalFunction` brings its own grid.
    n : int
        Ambient dimension.
    L : int
        Truncation degree.
    M : int, optional
        Node count for callables.
    """
    n = _check_dim(n)
    L = _check_degree(L)
    if isinstance(W, ZonalFunction):
        grid, vals = W.grid, W.values
        if grid.dim != n:
            raise ValueError("kernel grid dimension does not match n")
    else:
        grid = build_quadrature(n, M or default_grid_size(L))
        vals = np.asarray(W(grid.nodes), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ValueError("kernel has non-finite values at quadrature nodes")
    Z = zonal_table(n, L, grid.nodes)
    return ZonalCoefficients(n, (Z @ (grid.weights * vals)) / zonal_norms(n, L))


def reconstruct_kernel(c: ZonalCoefficients, t):
    """Evaluate ``Σ_l c_l Z_l(t)``."""
    t = np.asarray(t, dtype=float)
    Z = zonal_table(c.dim, c.L, t)
    return np.tensordot(c.coeffs, Z, axes=1)


def reconstruct_derivative(c: ZonalCoefficients, t):
    """Evaluate ``Σ_l c_l Z_l'(t)``."""
    t = np.asarray(t, dtype=float)
    return np.tensordot(c.coeffs, zonal_derivative_table(c.dim, c.L, t), axes=1)


def convolve(kernel: ZonalCoefficients, f: ZonalCoefficients) -> ZonalCoefficients:
    """Spherical convolution as an elementwise coefficient product (truncated to the shorter input)."""
    if kernel.dim != f.dim:
        raise ValueError(f"dimension mismatch: {kernel.dim} vs {f.dim}")
    m = min(len(kernel), len(f))
    return ZonalCoefficients(f.dim, kernel.coeffs[:m] * f.coeffs[:m])


def sqrt_kernel(V: ZonalCoefficients) -> ZonalCoefficients:
    """Convolution square root: coefficients ``sqrt(V_l)``.

    Raises
    ------
    NotPositiveSemidefiniteError
        If some coefficient is below ``-1e-12``.
    """
    c = V.coeffs
    bad = np.flatnonzero(c < NEG_CLAMP)
    if bad.size:
        l = int(bad[0])
        raise NotPositiveSemidefiniteError(f"coefficient at l={l} is {c[l]:.3e} < 0")
    return ZonalCoefficients(V.dim, np.sqrt(np.clip(c, 0.0, None)))


def heat_semigroup_apply(f: ZonalCoefficients, s) -> ZonalCoefficients:
    """Heat semigroup ``f_l -> exp(-s l (n-2+l)) f_l``."""
    if s < 0:
        raise ValueError("heat semigroup time must be nonnegative")
    l = np.arange(f.L + 1)
    return ZonalCoefficients(f.dim, np.exp(s * laplacian_eigenvalue(f.dim, l)) * f.coeffs)


# --------------------------------------------------------------------------
# estimates
# --------------------------------------------------------------------------


def l2_norm_squared(f: ZonalCoefficients):
    """``||f||^2_{L^2(σ)} = Σ f_l^2 Z_l(1)``."""
    return float(np.sum(f.coeffs**2 * zonal_norms(f.dim, f.L)))


def dirichlet_identity_check(u: ZonalCoefficients, V: ZonalCoefficients, M=None):
    """Two evaluations of ``||∇ (√V * u)||^2``.

    Returns
    -------
    lhs : float
        ``-Σ_l λ_l V_l u_l^2 Z_l(1)``, the spectral value of ``-<V*u, Δu>``.
    rhs : float
        Quadrature of ``sin^2θ (d/dt g)^2`` where ``g = √V * u`` is
        reconstructed on the grid; ``sin θ d/dt`` is the polar derivative.
    """
    if u.dim != V.dim:
        raise ValueError("dimension mismatch")
    L = min(u.L, V.L)
    u = u.truncate(L)
    lam = laplacian_eigenvalue(u.dim, np.arange(L + 1))
    lhs = float(-np.sum(lam * V.coeffs[: L + 1] * u.coeffs**2 * zonal_norms(u.dim, L)))
    g = convolve(sqrt_kernel(V.truncate(L)), u)
    grid = build_quadrature(u.dim, M or default_grid_size(L))
    t = grid.nodes
    dg = reconstruct_derivative(g, t)
    rhs = float(grid.integrate((1.0 - t**2) * dg**2))
    return lhs, rhs


def delta_approx_error(u: ZonalCoefficients, V: ZonalCoefficients):
    """``||u - √V * u||_{L^2}`` evaluated in coefficients."""
    if u.dim != V.dim:
        raise ValueError("dimension mismatch")
    s = sqrt_kernel(V.truncate(u.L)).coeffs
    return float(np.sqrt(np.sum((1.0 - s) ** 2 * u.coeffs**2 * zonal_norms(u.dim, u.L))))


def check_sqrt_positivity(V: ZonalCoefficients, samples=2001):
    """Minimum of the reconstructed ``√V`` over ``samples`` equispaced ``t`` in [-1, 1]."""
    t = np.linspace(-1.0, 1.0, int(samples))
    return float(np.min(reconstruct_kernel(sqrt_kernel(V), t)))


@dataclass(frozen=True)
class UniformApproxResult:
    error: float
    sqrt_min: float
    positivity_ok: bool


def uniform_approx_error(u: ZonalFunction, V: ZonalCoefficients, L=None, tol=-1e-6):
    """``max_i |u(t_i) - (√V * u)(t_i)|`` over the grid nodes of ``u``.

    ``u`` is decomposed to degree ``L`` (default: ``V.L``) if it carries no
    coefficients.  The result records whether ``√V`` passed the pointwise
    positivity check at level ``tol``.
    """
    grid = u.grid
    if grid.dim != V.dim:
        raise ValueError("dimension mismatch")
    c = u.coeffs if u.coeffs is not None else decompose_kernel(u, grid.dim, L if L is not None else V.L)
    g = convolve(sqrt_kernel(V.truncate(c.L)), c)
    err = float(np.max(np.abs(u.values - reconstruct_kernel(g, grid.nodes))))
    smin = check_sqrt_positivity(V)
    return UniformApproxResult(err, smin, smin >= tol)


@dataclass
class AdmissibilityRow:
    eps: float
    nonnegative: bool
    normalized: bool
    bounded: bool
    tail_sum: float
    tail_rate: float
    summable: bool

    @property
    def passed(self):
        return self.nonnegative and self.normalized and self.bounded and self.summable


@dataclass
class AdmissibilityReport:
    rows: list
    monotone: bool
    C: float

    @property
    def passed(self):
        return self.monotone and all(r.passed for r in self.rows)

    def failures(self):
        out = []
        for r in self.rows:
            for name in ("nonnegative", "normalized", "bounded", "summable"):
                if not getattr(r, name):
                    out.append(f"eps={r.eps:g}: {name}")
        if not self.monotone:
            out.append("coefficients do not increase toward 1 as eps decreases")
        return out


def _tail_fit(c, n):
    """Sum ``Σ l^n c_l`` and the fitted log-decay rate of ``l^n c_l`` over the last decade."""
    L = c.size - 1
    l = np.arange(L + 1, dtype=float)
    terms = l**n * c
    total = float(np.sum(terms))
    lo = max(1, L - max(2, L // 10))
    tail = terms[lo:]
    if np.all(tail == 0.0):
        return total, -np.inf
    tiny = np.finfo(float).tiny
    if np.any(tail <= tiny):
        # underflowed before the end of the table: decays faster than any power
        return total, -np.inf
    slope = np.polyfit(l[lo:], np.log(tail), 1)[0]
    return total, float(slope)


def check_admissibility(family: Callable[[float], ZonalCoefficients], eps_list: Sequence[float], L,
                        C=1.0, rate_tol=-1e-3):
    """Check the localized-repulsion assumptions on a kernel family.

    Parameters
    ----------
    family : callable
        ``eps -> ZonalCoefficients``; truncated or padded to degree ``L``.
    eps_list : sequence of float
        Scales to test.
    L : int
        Degree of the test.
    C : float
        Uniform bound on the coefficients.
    rate_tol : float
        The weighted tail ``l^n V_l`` must decay at a fitted log-rate below
        this value to count as summable.

    Returns
    -------
    AdmissibilityReport
        Per-scale flags for nonnegativity, ``V_0 = 1``, ``max V_l <= C`` and
        the tail-decay proxy, plus whether each ``V_l`` moves toward 1 as the
        scale decreases.
    """
    if len(eps_list) == 0:
        raise ValueError("empty eps list")
    rows, tables = [], {}
    for eps in eps_list:
        V = family(eps).truncate(L)
        c = V.coeffs
        tables[eps] = c
        total, rate = _tail_fit(c, V.dim)
        rows.append(AdmissibilityRow(
            eps=float(eps),
            nonnegative=bool(np.all(c >= 0.0)),
            normalized=abs(c[0] - 1.0) <= 1e-10,
            bounded=bool(np.max(c) <= C + 1e-12),
            tail_sum=total,
            tail_rate=rate,
            summable=bool(np.isfinite(total) and rate < rate_tol),
        ))
    order = sorted(eps_list, reverse=True)
    monotone = True
    for a, b in zip(order, order[1:]):
        ca, cb = tables[a], tables[b]
        # smaller eps: each coefficient at least as close to 1
        if np.any(np.abs(1.0 - cb) > np.abs(1.0 - ca) + 1e-14):
            monotone = False
    return AdmissibilityReport(rows, monotone, float(C))
