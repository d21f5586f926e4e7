"""Kernel families for localized repulsion (heat and exponential) and for exponential attraction.

Every family is exposed as :class:`~sphereflow.spectral.ZonalCoefficients`
plus a pointwise profile ``t -> K(t)`` of the inner product ``t = <x, y>``.
"""

import logging
import math
import re
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.special import gammaln, ive

from .errors import ParameterRangeError
from .spectral import (
    ZonalCoefficients,
    decompose_kernel,
    laplacian_eigenvalue,
    reconstruct_kernel,
    zonal_norms,
)

log = logging.getLogger(__name__)

#: largest supported inverse scale ``1/eps`` for the Bessel-ratio family
MAX_INVERSE_SCALE = 1e6


@dataclass(frozen=True)
class Kernel:
    """A zonal kernel: spectral coefficients and an optional exact profile."""

    kind: str
    coeffs: ZonalCoefficients
    profile: Optional[Callable] = field(default=None, compare=False)
    params: tuple = ()

    @property
    def dim(self):
        return self.coeffs.dim

    def __call__(self, t):
        if self.profile is not None:
            return self.profile(np.asarray(t, dtype=float))
        return reconstruct_kernel(self.coeffs, t)


def heat_kernel_coeffs(n, eps, L) -> ZonalCoefficients:
    """Heat kernel at time ``eps``: ``V_l = exp(-l (l+n-2) eps)``, ``V_0 = 1``."""
    if eps <= 0:
        raise ParameterRangeError("heat kernel scale must be positive")
    l = np.arange(L + 1)
    return ZonalCoefficients(n, np.exp(eps * laplacian_eigenvalue(n, l)))


def _bessel_ratio_cf(mu, x, tol=1e-16, max_iter=100000):
    """``I_mu(x) / I_{mu-1}(x)`` from its continued fraction (modified Lentz)."""
    # I_mu / I_{mu-1} = 1 / g,  g = b_0 + 1/(b_1 + 1/(b_2 + ...)),  b_k = 2(mu+k)/x
    tiny = 1e-300
    g = C = 2.0 * mu / x
    D = 0.0
    for k in range(1, max_iter):
        b = 2.0 * (mu + k) / x
        D = b + D
        C = b + 1.0 / C
        D = 1.0 / (D if D != 0 else tiny)
        delta = C * D
        g *= delta
        if abs(delta - 1.0) < tol:
            return 1.0 / g
    raise RuntimeError("continued fraction for Bessel ratio did not converge")


def bessel_ratios(nu, x, L, pad=20):
    """``I_{l+nu}(x) / I_nu(x)`` for ``l = 0..L`` without forming any ``I``.

    The ratios ``r_m = I_{m}/I_{m-1}`` obey ``r_m = 1 / (2m/x + r_{m+1})``,
    which is stable downward.  The recursion is seeded at ``m = L + pad + nu``
    by a continued fraction.
    """
    if x <= 0:
        raise ParameterRangeError("Bessel argument must be positive")
    if x > MAX_INVERSE_SCALE:
        raise ParameterRangeError(f"1/eps = {x:g} exceeds the supported maximum {MAX_INVERSE_SCALE:g}")
    top = L + pad
    r = _bessel_ratio_cf(top + nu, x)
    ratios = np.empty(top + 1)
    ratios[top] = r
    for m in range(top - 1, 0, -1):
        ratios[m] = 1.0 / (2.0 * (m + nu) / x + ratios[m + 1])
    out = np.ones(L + 1)
    out[1:] = np.cumprod(ratios[1 : L + 1])
    return out


def exponential_kernel_coeffs(n, eps, L) -> ZonalCoefficients:
    """Coefficients ``I_{l+nu}(1/eps) / I_nu(1/eps)`` of the normalized kernel ``α_eps exp(t/eps)``."""
    if eps <= 0:
        raise ParameterRangeError("exponential kernel scale must be positive")
    return ZonalCoefficients(n, bessel_ratios((n - 2) / 2.0, 1.0 / eps, L))


def exp_normalization_log(n, beta):
    """``log ∫ exp(beta <x0, x>) dσ(x) = log Γ(n/2) + nu log(2/beta) + log I_nu(beta)``."""
    nu = (n - 2) / 2.0
    return gammaln(n / 2.0) + nu * math.log(2.0 / beta) + math.log(ive(nu, beta)) + beta


def exponential_profile(n, eps, t):
    """Pointwise ``α_eps exp(t/eps)`` with ``α_eps`` making it a probability kernel."""
    beta = 1.0 / eps
    return np.exp(beta * np.asarray(t, dtype=float) - exp_normalization_log(n, beta))


def attraction_profile(beta, alpha, t):
    """``alpha * W_beta(t) = -(alpha/beta) exp(beta t)``."""
    return -(alpha / beta) * np.exp(beta * np.asarray(t, dtype=float))


def heat_kernel(n, eps, L) -> Kernel:
    return Kernel("heat", heat_kernel_coeffs(n, eps, L), None, (("eps", eps),))


def exponential_kernel(n, eps, L) -> Kernel:
    return Kernel("exp", exponential_kernel_coeffs(n, eps, L), partial(exponential_profile, n, eps),
                  (("eps", eps),))


def attraction_kernel(n, beta, L, alpha=1.0, M=None) -> Kernel:
    """Attraction kernel ``alpha * W_beta`` with ``W_beta(t) = -exp(beta t)/beta``.

    Coefficients come from quadrature (:func:`decompose_kernel`); with
    ``alpha > 0`` every coefficient is negative.
    """
    if beta <= 0:
        raise ParameterRangeError("attraction parameter beta must be positive")
    prof = partial(attraction_profile, beta, alpha)
    M = M or max(2 * L + 8, int(2 * beta) + 40)
    return Kernel("attract", decompose_kernel(prof, n, L, M=M), prof, (("beta", beta), ("alpha", alpha)))


def table_kernel(path, L=None) -> Kernel:
    """Kernel read from a coefficient CSV."""
    c = ZonalCoefficients.from_csv(Path(path).read_text())
    if L is not None:
        c = c.truncate(L)
    return Kernel("table", c, None, (("path", str(path)),))


def heat_family(n):
    """``(eps, L) -> coefficients`` for the heat family."""
    return partial(heat_kernel_coeffs, n)


def exponential_family(n):
    return partial(exponential_kernel_coeffs, n)


def linf_norm(kernel, samples=4001):
    """``max |K(t)|`` over ``samples`` equispaced ``t`` in [-1, 1]."""
    t = np.linspace(-1.0, 1.0, int(samples))
    vals = kernel(t) if callable(kernel) else reconstruct_kernel(kernel, t)
    return float(np.max(np.abs(vals)))


def laplacian_coeffs(c: ZonalCoefficients) -> ZonalCoefficients:
    """Coefficients of ``Δ_x K(<x0, x>)``: ``λ_l K_l``."""
    return ZonalCoefficients(c.dim, laplacian_eigenvalue(c.dim, np.arange(c.L + 1)) * c.coeffs)


def laplacian_linf(kernel, samples=4001):
    """``max |ΔK|`` from the spectral Laplacian; warns when the tail is not resolved."""
    c = kernel.coeffs if isinstance(kernel, Kernel) else kernel
    lap = laplacian_coeffs(c)
    t = np.linspace(-1.0, 1.0, int(samples))
    val = float(np.max(np.abs(reconstruct_kernel(lap, t))))
    tail = abs(lap.coeffs[-1] * zonal_norms(c.dim, c.L)[-1])
    if tail > 1e-8 * max(val, 1e-300):
        log.warning("laplacian_linf: spectral tail %.3e not converged (result %.3e)", tail, val)
    return val


_SPEC_RE = re.compile(r"^\s*([a-z]+)((?::[a-z]+=[^:]+)*)\s*$")


@dataclass(frozen=True)
class KernelFamilySpec:
    """Parsed kernel string such as ``heat:eps=0.1`` or ``attract:beta=1:alpha=1``."""

    kind: str
    params: tuple

    KINDS = {"heat": ("eps",), "exp": ("eps",), "attract": ("beta", "alpha"), "table": ("path",)}

    def get(self, key, default=None):
        return dict(self.params).get(key, default)

    @classmethod
    def parse(cls, text):
        m = _SPEC_RE.match(text or "")
        if not m:
            raise ValueError(f"malformed kernel spec {text!r}")
        kind = m.group(1)
        if kind == "exponential":
            kind = "exp"
        if kind == "attraction":
            kind = "attract"
        if kind not in cls.KINDS:
            raise ValueError(f"unknown kernel kind {kind!r} in {text!r}")
        params = {}
        for item in filter(None, m.group(2).split(":")):
            key, val = item.split("=", 1)
            if key not in cls.KINDS[kind]:
                raise ValueError(f"kernel {kind!r} has no parameter {key!r}")
            if key == "path":
                params[key] = val
                continue
            try:
                params[key] = float(val)
            except ValueError:
                raise ValueError(f"kernel parameter {key}={val!r} is not a number") from None
        if kind in ("heat", "exp") and not params.get("eps", 0) > 0:
            raise ValueError(f"kernel {text!r}: eps must be given and positive")
        if kind == "attract":
            if not params.get("beta", 0) > 0:
                raise ValueError(f"kernel {text!r}: beta must be given and positive")
            params.setdefault("alpha", 1.0)
        if kind == "table" and "path" not in params:
            raise ValueError(f"kernel {text!r}: path is required")
        return cls(kind, tuple(sorted(params.items())))

    def __str__(self):
        def fmt(v):
            return v if isinstance(v, str) else format(v, "g")
        return ":".join([self.kind] + [f"{k}={fmt(v)}" for k, v in self.params])

    def build(self, n, L) -> Kernel:
        p = dict(self.params)
        if self.kind == "heat":
            return heat_kernel(n, p["eps"], L)
        if self.kind == "exp":
            return exponential_kernel(n, p["eps"], L)
        if self.kind == "attract":
            return attraction_kernel(n, p["beta"], L, alpha=p["alpha"])
        k = table_kernel(p["path"], L)
        if k.dim != n:
            raise ValueError(f"table kernel has n={k.dim}, expected {n}")
        return k


def build_kernel(spec, n, L) -> Kernel:
    """Parse ``spec`` (string or :class:`KernelFamilySpec`) and build it at ``(n, L)``."""
    if isinstance(spec, str):
        spec = KernelFamilySpec.parse(spec)
    return spec.build(n, L)


__all__ = [
    "Kernel", "KernelFamilySpec", "attraction_kernel", "bessel_ratios", "build_kernel",
    "exponential_family", "exponential_kernel", "exponential_kernel_coeffs", "exponential_profile",
    "heat_family", "heat_kernel", "heat_kernel_coeffs", "laplacian_coeffs", "laplacian_linf",
    "linf_norm", "table_kernel",
]
