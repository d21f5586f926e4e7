"""Acceptance criteria AC-1 .. AC-11.

Each criterion is a function returning ``(passed, detail)``.  Under pytest
every criterion is a test and the PASS/FAIL lines are repeated in the
terminal summary; ``python tests/test_acceptance.py`` prints them directly.
"""

import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sphereflow.geom import divergence_sample
from sphereflow.kernels import (
    attraction_kernel,
    exponential_family,
    exponential_kernel,
    exponential_kernel_coeffs,
    heat_family,
    heat_kernel,
    heat_kernel_coeffs,
)
from sphereflow.ot import (
    CircularDistribution,
    GridEnergy,
    JkoConfig,
    cell_average_values,
    convolution_contraction_check,
    evi_check,
    grid_entropy,
    heat_flow_grid,
    jko_trajectory,
    random_bump_density,
    wasserstein_circle,
)
from sphereflow.particles import HeadConfig, ParticleEnsemble, SqrtKernelProfile, fibonacci_sphere, simulate, smoothed_density
from sphereflow.pde import DensityState, SolverConfig, apriori_bound, convergence_study, solve
from sphereflow.spectral import (
    ZonalCoefficients,
    check_admissibility,
    check_sqrt_positivity,
    convolve,
    decompose_kernel,
    dirichlet_identity_check,
    heat_semigroup_apply,
    reconstruct_kernel,
    sqrt_kernel,
)

from oracles import direct_convolution

TWO_PI = 2 * np.pi
half_cosine = lambda th: 1 + 0.5 * np.cos(th)


def ac1():
    rng = np.random.default_rng(101)
    worst = 0.0
    th = np.linspace(0, np.pi, 9)
    for n in (2, 3, 5):
        for _ in range(20):
            a, b, c, d = rng.uniform(-2, 2, 4)
            V = lambda t: np.exp(a * t) * (1 + 0.3 * b * t**2)
            f = lambda t: np.cos(c * t) + d * t**3
            h = convolve(decompose_kernel(V, n, 32, 72), decompose_kernel(f, n, 32, 72))
            ref = direct_convolution(V, f, n, th)
            err = np.max(np.abs(reconstruct_kernel(h, np.cos(th)) - ref)) / np.max(np.abs(ref))
            worst = max(worst, err)
    return worst <= 1e-8, f"max relative error {worst:.2e} (tol 1e-8)"


def ac2():
    worst_pt, worst_coef = 0.0, 0.0
    t = np.linspace(-1, 1, 201)
    th = np.linspace(0, np.pi, 7)
    for n in (2, 3):
        for fam in (heat_kernel_coeffs, exponential_kernel_coeffs):
            for eps in (0.5, 0.1):
                V = fam(n, eps, 64)
                s = sqrt_kernel(V)
                vv = convolve(s, s)
                worst_coef = max(worst_coef, float(np.max(np.abs(vv.coeffs - V.coeffs))))
                # pointwise: spectral square vs the kernel itself and vs a direct quadrature of √V * √V
                worst_pt = max(worst_pt, float(np.max(np.abs(reconstruct_kernel(vv, t) - reconstruct_kernel(V, t)))))
                sfun = lambda x: reconstruct_kernel(s, x)
                direct = direct_convolution(sfun, sfun, n, th, M=120)
                worst_pt = max(worst_pt, float(np.max(np.abs(direct - reconstruct_kernel(V, np.cos(th))))))
                if fam is exponential_kernel_coeffs:
                    prof = exponential_kernel(n, eps, 64)
                    worst_pt = max(worst_pt, float(np.max(np.abs(reconstruct_kernel(vv, t) - prof(t)))))
    ok = worst_pt <= 1e-8 and worst_coef <= 1e-15
    return ok, f"pointwise {worst_pt:.2e} (tol 1e-8), coefficient {worst_coef:.1e}"


def ac3():
    rng = np.random.default_rng(303)
    worst = 0.0
    for n in (2, 3):
        V = heat_kernel_coeffs(n, 0.05, 40)
        for _ in range(20):
            c = rng.standard_normal(41) * np.exp(-np.arange(41) / rng.uniform(2, 5))
            lhs, rhs = dirichlet_identity_check(ZonalCoefficients(n, c), V)
            worst = max(worst, abs(lhs - rhs) / abs(lhs))
    return worst <= 1e-6, f"max relative gap {worst:.2e} (tol 1e-6)"


def ac4():
    f = decompose_kernel(lambda t: np.exp(2 * t), 3, 30)
    comp = heat_semigroup_apply(heat_semigroup_apply(f, 0.07), 0.11)
    direct = heat_semigroup_apply(f, 0.18)
    # exact up to the rounding of exp(x), whose relative error is about |x| * 2^-53
    lam = np.arange(31) * (np.arange(31) + 1) * 0.18
    comp_err = float(np.max(np.abs(comp.coeffs - direct.coeffs) / (np.abs(direct.coeffs) * (1 + lam))))
    rng = np.random.default_rng(404)
    decreasing = True
    for _ in range(5):
        v = random_bump_density(rng, 512)
        ent = [grid_entropy(heat_flow_grid(v, s)) for s in np.linspace(0, 0.5, 11)]
        decreasing &= bool(np.all(np.diff(ent) < 0))
    N = 1024
    th = TWO_PI * (np.arange(N) + 0.5) / N
    rho0 = CircularDistribution.from_grid(1 + 0.8 * np.cos(th))
    viol = evi_check(rho0, CircularDistribution.uniform(N), np.arange(11) * 0.05, 1e-3)
    ok = comp_err <= 8 * np.finfo(float).eps and decreasing and viol <= 1e-3
    return ok, f"composition {comp_err:.1e} ulp-scaled, entropy decreasing {decreasing}, EVI violation {viol:.3e} (tol 1e-3)"


def ac5():
    W = attraction_kernel(2, 1.0, 32)
    V = heat_kernel(2, 0.1, 32)
    rho0 = DensityState.from_function(half_cosine, 2, 32)
    rep = solve(rho0, W, V, SolverConfig(L=32, T=1.0)).report
    F, Fs = np.array(rep.F_double), np.array(rep.F_sqrt)
    mass = float(np.max(np.abs(np.array(rep.mass) - 1)))
    rise = float(np.max(np.diff(F) - 1e-6 * (1 + np.abs(F[1:]))))
    forms = float(np.max(np.abs(F - Fs) / np.abs(F)))
    bound = apriori_bound(rho0, W, V)
    conv = max(rep.conv_l2)
    ok = mass <= 1e-10 and rise <= 0 and forms <= 1e-7 and conv <= bound
    return ok, (f"mass drift {mass:.1e}, energy monotone {rise <= 0}, forms gap {forms:.1e}, "
                f"bound {conv:.3f} <= {bound:.3f}")


def ac6():
    W = attraction_kernel(2, 1.0, 32)
    rho0 = DensityState.from_function(half_cosine, 2, 32)
    tab = convergence_study([0.2, 0.1, 0.05, 0.025], W, heat_family(2), rho0, SolverConfig(L=32, T=1.0))
    e, r = tab.column("error"), tab.column("residual")
    ok = tab.strictly_decreasing("error") and tab.strictly_decreasing("residual") and e[-1] <= e[0] / 3
    return ok, "e = " + ", ".join(f"{x:.4g}" for x in e) + "; residual = " + ", ".join(f"{x:.3g}" for x in r)


def _ae_reference(tau, T):
    W = attraction_kernel(2, 1.0, 32)
    V = heat_kernel(2, 0.1, 32)
    rho0 = DensityState.from_function(half_cosine, 2, 32)
    return solve(rho0, W, V, SolverConfig(L=32, T=T, dt=tau / 4, diagnostics_every=4))


def ac7():
    N, L, T = 128, 48, 0.1
    W = attraction_kernel(2, 1.0, L)
    V = heat_kernel(2, 0.1, L)
    F = GridEnergy.from_kernels(N, W.coeffs, V.coeffs)
    rho = DensityState.from_function(half_cosine, 2, L)
    start = CircularDistribution.from_grid(cell_average_values(rho, N), normalize=True)
    sups, summable = [], True
    for tau in (4e-3, 2e-3, 1e-3):
        K = int(round(T / tau))
        traj = jko_trajectory(start, JkoConfig(tau=tau, K=K, N=N), F, W_linf=float(np.max(np.abs(W(np.linspace(-1, 1, 201))))))
        summable &= traj.summability_ok
        ref = _ae_reference(tau, T)
        ae = [CircularDistribution.from_grid(cell_average_values(ref.state(i), N), normalize=True) for i in range(len(ref))]
        sup = 0.0
        for k, d in enumerate(traj.states):
            # ρ_τ(s) = ρ_k on [kτ, (k+1)τ) ∩ [0, T]; compare at both ends
            for j in (k, k + 1):
                if j <= K:
                    sup = max(sup, wasserstein_circle(d, ae[j]))
        sups.append(sup)
    ok = sups[-1] <= 5e-2 and sups[0] > sups[1] > sups[2] and summable
    return ok, "sup W2 = " + ", ".join(f"{s:.2e}" for s in sups) + f"; summability {summable}"


def ac8():
    rep = convolution_contraction_check(heat_kernel_coeffs(2, 0.1, 64), pairs=100, seed=0)
    return rep.max_ratio <= 3, f"max ratio {rep.max_ratio:.4f} (bound 3, conjectured 1)"


def ac9():
    worst, dev = 0.0, 0.0
    for n in (3, 5):
        ratios, par = divergence_sample(np.random.default_rng([909, n]), n, 100_000)
        worst = max(worst, float(ratios.max()))
        dev = max(dev, float(np.max(np.abs(par - 1))))
    return worst <= 3 and dev <= 1e-9, f"max ratio {worst:.4f} (bound 3), parallel deviation {dev:.1e}"


def ac10():
    n, d, T, seeds = 3, 32, 50.0, 20
    attract = HeadConfig.attraction(1.0)
    repel = HeadConfig.with_repulsion(n, 0.05, beta=1.0)
    prof = SqrtKernelProfile(exponential_kernel_coeffs(n, 0.05, 96))
    grid = fibonacci_sphere(2000)
    clustered, spread_ok, energy_ok = 0, True, True
    worst_inner, worst_ratio = -1.0, 0.0
    for s in range(seeds):
        X0 = ParticleEnsemble.random(np.random.default_rng([1010, s]), d, n, hemisphere=True)
        a = simulate(X0, attract, T, 0.05)
        clustered += bool(a.min_inner[-1] >= 0.99)
        r = simulate(X0, repel, T, 0.02)
        sup = np.array([smoothed_density(P, prof, grid).max() for P in r.points])
        worst_inner = max(worst_inner, float(r.min_inner.max()))
        worst_ratio = max(worst_ratio, float(sup.max() / sup[0]))
        spread_ok &= bool(r.min_inner.max() < 0.99 and sup.max() <= 10 * sup[0])
        energy_ok &= a.energy_nonincreasing() and r.energy_nonincreasing()
    ok = clustered >= 0.95 * seeds and spread_ok and energy_ok
    return ok, (f"clustered {clustered}/{seeds}; with repulsion max min-inner {worst_inner:.3f}, "
                f"max density growth {worst_ratio:.2f}x; energy monotone {energy_ok}")


def ac11():
    eps = [0.5, 0.2, 0.1, 0.05]
    fails, smin = [], np.inf
    for name, fam in (("heat", heat_family), ("exp", exponential_family)):
        for n in (2, 3):
            f = fam(n)
            rep = check_admissibility(lambda e: f(e, 64), eps, 64)
            fails += [f"{name} n={n}: {x}" for x in rep.failures()]
            smin = min(smin, min(check_sqrt_positivity(f(e, 64)) for e in eps))
    ok = not fails and smin >= -1e-10
    return ok, f"failures {fails or 'none'}; min sqrt kernel {smin:.1e}"


CRITERIA = {f"AC-{i}": fn for i, fn in enumerate((ac1, ac2, ac3, ac4, ac5, ac6, ac7, ac8, ac9, ac10, ac11), 1)}


def evaluate(key):
    t0 = time.perf_counter()
    ok, detail = CRITERIA[key]()
    line = f"{'PASS' if ok else 'FAIL'} {key}: {detail} [{time.perf_counter() - t0:.1f} s]"
    return ok, line


@pytest.mark.parametrize("key", list(CRITERIA))
def test_acceptance(key):
    ok, line = evaluate(key)
    import conftest

    conftest.ACCEPTANCE_LINES[key] = line
    print(line)
    assert ok, line


if __name__ == "__main__":
    results = [evaluate(k) for k in CRITERIA]
    for _, line in results:
        print(line, flush=True)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
