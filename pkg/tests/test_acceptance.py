"""Acceptance criteria, one test per criterion, each printing a pass/fail line.

Monte-Carlo configurations are pinned (seeded) and were sized against the
closed-form Gaussian statistics of the linear model, so every tolerance below
is the stated one, not a calibrated afterthought.
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad, quad_vec

from spdelab.cli import main
from spdelab.models import AdditiveDiagonalDiffusion, ModelSpec, ZeroDrift
from spdelab.noise import burkholder_constant, example_covariance
from spdelab.probes import (
    continuity_modulus,
    estimate_lp_norm,
    example_series_partial_sum,
    spatial_sweep,
    temporal_probe,
)
from spdelab.solver import (
    EXACT_GAUSSIAN,
    EXPONENTIAL_EULER,
    SolverConfig,
    ensemble_snapshots,
    map_paths,
)
from spdelab.spectrum import (
    SpectralCoeffs,
    deterministic_convolution_norm,
    dirichlet_laplacian_1d,
    hdot_norm,
    smoothing_constant,
    stochastic_convolution_energy,
)


def report(criterion: str, passed: bool, detail: str) -> None:
    print(f"\nacceptance {criterion}: {'PASS' if passed else 'FAIL'} - {detail}")
    assert passed, f"acceptance {criterion}: {detail}"


def borderline_model(n, r=0.0):
    return ModelSpec(
        operator=dirichlet_laplacian_1d(n),
        covariance=example_covariance(n),
        drift=ZeroDrift(),
        diffusion=AdditiveDiagonalDiffusion(np.ones(n)),
        initial=SpectralCoeffs(np.zeros(n)),
        r=r,
    )


def test_criterion_01_convolution_exactness():
    """Closed-form convolution quantities agree with adaptive quadrature to 1e-8."""
    rng = np.random.default_rng(101)
    op = dirichlet_laplacian_1d(64)
    lam = op.eigenvalues
    worst = 0.0
    for _ in range(100):
        x = SpectralCoeffs(rng.standard_normal(64))
        rho = rng.uniform(0.0, 1.0)
        tau1 = rng.uniform(0.0, 0.5)
        tau2 = tau1 + math.exp(rng.uniform(math.log(1e-3), math.log(0.5)))
        delta = tau2 - tau1

        weights = x.values**2 * lam**rho
        energy_oracle, _ = quad(
            lambda u: float(np.sum(weights * np.exp(-2.0 * lam * u))),
            0.0, delta, epsabs=0.0, epsrel=1e-12, limit=800,
        )
        flow_vec, _ = quad_vec(
            lambda u: np.exp(-lam * u) * x.values, 0.0, delta, epsrel=1e-12, limit=800
        )
        flow_oracle = float(np.sqrt(np.sum((lam**rho * flow_vec) ** 2)))

        energy = stochastic_convolution_energy(op, rho, tau1, tau2, x)
        flow = deterministic_convolution_norm(op, rho, tau1, tau2, x)
        worst = max(
            worst,
            abs(energy - energy_oracle) / energy_oracle,
            abs(flow - flow_oracle) / flow_oracle,
        )
    report(
        "1 (convolution exactness)",
        worst <= 1e-8,
        f"worst relative error {worst:.3e} over 100 draws at N=64 (tolerance 1e-8)",
    )


def test_criterion_02_smoothing_bounds():
    """Semigroup smoothing estimates hold with the derived sharp constants."""
    rng = np.random.default_rng(202)
    slack = 1.0 + 1e-12
    op = dirichlet_laplacian_1d(64)
    violations = 0
    draws = 1000
    for _ in range(draws):
        lam = math.exp(rng.uniform(math.log(1e-2), math.log(1e6)))
        t = math.exp(rng.uniform(math.log(1e-6), math.log(10.0)))
        mu = rng.uniform(0.0, 2.0)
        nu = rng.uniform(0.0, 1.0)
        if lam**mu * math.exp(-lam * t) > smoothing_constant("power", mu) * t**-mu * slack:
            violations += 1
        if lam**-nu * -math.expm1(-lam * t) > smoothing_constant("difference", nu) * t**nu * slack:
            violations += 1

        x = SpectralCoeffs(rng.standard_normal(64))
        rho = rng.uniform(0.0, 1.0)
        tau1 = rng.uniform(0.0, 0.5)
        delta = math.exp(rng.uniform(math.log(1e-4), math.log(0.5)))
        norm = hdot_norm(op, 0.0, x)
        energy = stochastic_convolution_energy(op, rho, tau1, tau1 + delta, x)
        if energy > 0.5 * smoothing_constant("integral", rho) * delta ** (1.0 - rho) * norm**2 * slack:
            violations += 1
        flow = deterministic_convolution_norm(op, rho, tau1, tau1 + delta, x)
        if flow > smoothing_constant("convolution", rho) * delta ** (1.0 - rho) * norm * slack:
            violations += 1
    report(
        "2 (smoothing bounds)",
        violations == 0,
        f"{violations} violations over 4 x {draws} random draws with sharp constants",
    )


def test_criterion_03_ito_isometry():
    """Second moment of the exactly sampled noise response matches its series."""
    n, t = 256, 0.1
    model = borderline_model(n)
    config = SolverConfig(T=t, steps=100, paths=10_000, master_seed=303, snapshot_times=(t,))
    squared = map_paths(
        model, config, lambda rows: np.sum(rows[:, 0, :] ** 2, axis=1), method=EXACT_GAUSSIAN
    )
    mc = float(np.mean(squared))
    se = float(np.std(squared, ddof=1) / math.sqrt(squared.size))
    exact = stochastic_convolution_energy(
        model.operator, 0.0, 0.0, t, SpectralCoeffs(np.sqrt(model.covariance.variances))
    )
    deviation = abs(mc - exact)
    report(
        "3 (Ito isometry)",
        deviation <= 3.0 * se,
        f"MC {mc:.6f} vs series {exact:.6f}, |dev| {deviation:.2e} <= 3 SE {3 * se:.2e} "
        f"(N=256, h=1e-3, 10^4 paths)",
    )


def test_criterion_04_integrator_oracle():
    """Exponential-Euler mode variances track the exact transition law, bias shrinking in h."""
    n, T, paths = 16, 0.2, 4000
    model = borderline_model(n)
    lam = model.operator.eigenvalues
    q = model.covariance.variances
    exact = q * -np.expm1(-2.0 * lam * T) / (2.0 * lam)
    results = {}
    for h in (1e-2, 1e-3):
        config = SolverConfig(
            T=T, steps=int(round(T / h)), paths=paths, master_seed=404, snapshot_times=(T,)
        )
        rows = ensemble_snapshots(model, config, method=EXPONENTIAL_EULER)
        mc_var = rows[:, 0, :].var(axis=0)
        y = 2.0 * lam * h
        bias = 1.0 - y / np.expm1(y)  # exact relative variance deficit of the scheme
        se = exact * math.sqrt(2.0 / paths)
        allowed = np.maximum(3.0 * se, 2.0 * bias * exact)
        ok = np.all(np.abs(mc_var - exact) <= allowed + 1e-15)
        results[h] = (ok, mc_var)
    with np.errstate(invalid="ignore"):
        dev_coarse = np.abs(results[1e-2][1] / exact - 1.0)
        dev_fine = np.abs(results[1e-3][1] / exact - 1.0)
    # mode 3 has a large, well-resolved scheme bias at h=1e-2 (~64%) vs ~9% at 1e-3
    shrinks = dev_coarse[2] > dev_fine[2] and dev_coarse[1] > dev_fine[1]
    passed = results[1e-2][0] and results[1e-3][0] and shrinks
    report(
        "4 (integrator oracle)",
        passed,
        f"mode variances within max(3 SE, 2 bias) at h=1e-2 and 1e-3; "
        f"mode-3 deviation {dev_coarse[2]:.3f} -> {dev_fine[2]:.3f}",
    )


def test_criterion_05_temporal_exponents():
    """Fitted temporal exponents match min(1/2, (1+r-s)/2) within 0.1 at s in {0, 0.5}."""
    mults = [1, 2, 3, 5, 8, 13, 22, 36, 60, 100]
    # s = 0: lag window far below the slowest active mode's relaxation time
    model0 = borderline_model(64)
    h0 = 2e-5
    config0 = SolverConfig(T=200 * h0, steps=200, paths=10_000, master_seed=505)
    fit0, _ = temporal_probe(
        model0, config0, s=0.0, anchor=100 * h0, lags=[m * h0 for m in mults],
        method=EXPONENTIAL_EULER,
    )
    # s = 0.5: window spanning the scaling range of the smoothness-weighted norm
    model5 = borderline_model(256)
    h5 = 1.2e-3
    config5 = SolverConfig(T=164 * h5, steps=164, paths=10_000, master_seed=506)
    fit5, _ = temporal_probe(
        model5, config5, s=0.5, anchor=64 * h5, lags=[m * h5 for m in mults],
        method=EXPONENTIAL_EULER,
    )
    ok0 = abs(fit0.slope - 0.5) <= 0.1
    ok5 = abs(fit5.slope - 0.25) <= 0.1
    report(
        "5 (temporal exponents)",
        ok0 and ok5,
        f"s=0: slope {fit0.slope:.3f} (predicted {fit0.predicted}); "
        f"s=0.5: slope {fit5.slope:.3f} (predicted {fit5.predicted}); tolerance 0.1, "
        f"10 lags over 2 decades, 10^4 paths",
    )


def test_criterion_06_spatial_regularity_sweep():
    """Truncation sweep of the top-norm estimate is Cauchy for the admissible model."""
    model = borderline_model(512, r=0.0)
    config = SolverConfig(T=0.1, steps=100, paths=2000, master_seed=606, snapshot_times=(0.1,))
    sweep = spatial_sweep(model, config, s=1.0, n_values=[64, 128, 256, 512],
                          method=EXACT_GAUSSIAN)
    values = [v for _, v in sweep]
    gaps = [b - a for a, b in zip(values, values[1:])]
    decreasing = all(g2 < g1 for g1, g2 in zip(gaps, gaps[1:]))
    final_rel = gaps[-1] / values[-1]
    report(
        "6 (spatial regularity)",
        decreasing and final_rel < 0.02,
        f"sweep {[f'{v:.4f}' for v in values]}, gaps {[f'{g:.5f}' for g in gaps]}, "
        f"final relative gap {final_rel:.3%} (< 2% required)",
    )


def test_criterion_07_series_sharpness():
    """Divergence signature above the admissible regularity, convergence at it."""
    t = 0.1
    sums_div = [example_series_partial_sum(0.25, t, n) for n in (10**3, 10**4, 10**5)]
    inc_div = [b - a for a, b in zip(sums_div, sums_div[1:])]
    sums_conv = [example_series_partial_sum(0.0, t, n) for n in (10**3, 10**4, 10**5)]
    inc_conv = [b - a for a, b in zip(sums_conv, sums_conv[1:])]

    strictly_increasing = sums_div[0] < sums_div[1] < sums_div[2]
    positive_floor = inc_div[1] > inc_div[0] > 0.0
    conv_decays = inc_conv[1] < inc_conv[0]
    conv_below_threshold = inc_conv[-1] < 1e-3

    passed = strictly_increasing and positive_floor and conv_decays and conv_below_threshold
    report(
        "7 (series sharpness)",
        passed,
        f"divergent increments {inc_div[0]:.4f} -> {inc_div[1]:.4f} (positive, growing); "
        f"convergent increments {inc_conv[0]:.6f} -> {inc_conv[1]:.6f} "
        f"(decaying; final-below-1e-3 clause "
        f"{'met' if conv_below_threshold else f'NOT met: {inc_conv[-1]:.4e} > 1e-3'})",
    )


def test_criterion_08_top_norm_continuity():
    """Top-norm modulus decreases across four dyadic lag reductions to below half."""
    n = 16
    model = borderline_model(n)
    config = SolverConfig(T=0.2, steps=800, paths=4000, master_seed=808)
    h = config.h
    lags = [2 * h, 4 * h, 8 * h, 16 * h, 32 * h]
    modulus = continuity_modulus(model, config, anchor=0.1, lags=lags,
                                 method=EXPONENTIAL_EULER)
    values = [v for _, v in modulus]  # ascending lags
    decreasing = all(a < b for a, b in zip(values, values[1:]))
    below_half = values[0] < 0.5 * values[-1]
    report(
        "8 (top-norm continuity)",
        decreasing and below_half,
        f"modulus over dyadic lags {[f'{v:.4f}' for v in values]}; "
        f"smallest-lag value {values[0]:.4f} < half of largest {values[-1]:.4f}",
    )


def test_criterion_09_moment_inequality():
    """Monte-Carlo p-th moments respect the moment-inequality constant at p in {2, 4}."""
    n, t = 64, 0.1
    model = borderline_model(n)
    config = SolverConfig(T=t, steps=100, paths=10_000, master_seed=909, snapshot_times=(t,))
    norms = map_paths(
        model, config, lambda rows: np.sqrt(np.sum(rows[:, 0, :] ** 2, axis=1)),
        method=EXACT_GAUSSIAN,
    )
    energy = stochastic_convolution_energy(
        model.operator, 0.0, 0.0, t, SpectralCoeffs(np.sqrt(model.covariance.variances))
    )
    details = []
    violations = 0
    for p in (2.0, 4.0):
        powered = norms**p
        moment = float(np.mean(powered))
        se = float(np.std(powered, ddof=1) / math.sqrt(powered.size))
        bound = burkholder_constant(p) * energy ** (p / 2.0)
        if moment > bound + 3.0 * se:
            violations += 1
        details.append(f"p={p:g}: moment {moment:.3e} <= C(p) bound {bound:.3e} + 3 SE")
    report("9 (moment inequality)", violations == 0, "; ".join(details))


def test_criterion_10_reproducibility(tmp_path):
    """Identical configs give byte-identical CSVs across runs and worker counts."""
    config_text = (
        "kind = probe-temporal\n"
        "model.N = 16\nmodel.covariance = example5\nmodel.drift = zero\n"
        "model.diffusion = additive\nmodel.r = 0\nmodel.p = 2\n"
        "solver.T = 0.004\nsolver.steps = 200\nsolver.paths = 400\nsolver.seed = 42\n"
        "probe.s = 0,0.5\nprobe.anchor = 0.002\n"
        "probe.lags = 2e-5,4e-5,6e-5,1e-4,1.6e-4,2.6e-4,4.4e-4,7.2e-4,1.2e-3,2e-3\n"
    )
    config_path = tmp_path / "exp.cfg"
    config_path.write_text(config_text)
    outputs = {}
    for label, workers in (("a", 1), ("b", 1), ("c", 4)):
        out = tmp_path / label
        code = main(["run", str(config_path), "--output-dir", str(out), "--workers", str(workers)])
        assert code == 0
        outputs[label] = {
            name: (out / name).read_bytes()
            for name in ("temporal_s0.csv", "temporal_s1.csv", "holder_fits.csv")
        }
    identical_runs = outputs["a"] == outputs["b"]
    identical_workers = outputs["a"] == outputs["c"]
    report(
        "10 (reproducibility)",
        identical_runs and identical_workers,
        f"byte-identical across repeated runs: {identical_runs}; "
        f"across worker counts {{1, 4}}: {identical_workers}",
    )
