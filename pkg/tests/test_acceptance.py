"""Acceptance gate: every numbered criterion at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS/FAIL line
per criterion (sub-cases print one line each).  The quantum transport
criteria evolve large grids for thousands of kicks and dominate the runtime;
expect the full gate to take tens of minutes on one core.

Some sub-cases are expected to fail and are left failing deliberately; the
measured values are reproducible properties of the model as defined:

* criterion 2 at (K, k_p) = (0.6, 256): the tangent-map exponent converges
  to 4.429 +/- 0.001 (stable from 2e3 to 1e5 kicks, confirmed by Jacobian
  products and by two-trajectory divergence), outside the required
  4.24 +/- 0.1.
* criterion 4 at (K, k_p) = (0.6, 2): at 5e3 kicks the energy is still
  climbing onto its localization plateau (knee near t ~ 1e3, then bounded
  factor-3 oscillations), so the log-log fit over [500, 5000] reports
  beta ~ 0.5 rather than the asymptotic 0.00; its regime sub-case inherits
  this.  Reaching beta ~ 0 needs far longer runs than the stated recipe.
* criterion 5a at the same point: the entropy does saturate (window means
  drift-free out to 3e3 kicks) but fluctuates by ~15% on 125-kick windows,
  so the drift between [250, 375] and [375, 500] measures ~17-22%, beyond
  the 5% band.
"""

import math
import time

import numpy as np
import pytest

from mlkr import (
    MomentumGrid,
    QuantumState,
    ScaledState,
    classify_regime,
    energy_slope,
    entanglement_series,
    evolve,
    evolve_ensemble,
    fit_beta,
    fixed_points,
    initial_state,
    jacobian,
    lyapunov_jacobian_product,
    lyapunov_tangent,
    make_params,
    map_step,
    scale_state,
    scaled_map_step,
    schmidt_spectrum,
    sweep_phase_diagram,
    uniform_angle_ensemble,
    von_neumann_entropy,
)
from mlkr.quantum import Propagator

from conftest import random_quantum_amps
from test_quantum import oracle_floquet_matrix

TWO_PI = 2 * math.pi


def report(cid: str, ok: bool, detail: str):
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {cid}: {detail}")
    assert ok, f"criterion {cid}: {detail}"


# -- criterion 6: symplecticity ---------------------------------------------


def test_criterion_06_symplecticity():
    p = make_params(3.0, 2.0)
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(100):
        theta = ScaledState(*rng.uniform(0, TWO_PI, 2), *rng.uniform(-10, 10, 2))
        worst = max(worst, abs(jacobian(theta, p).determinant() - 1.0))
    report("6", worst < 1e-10, f"max |det J - 1| = {worst:.2e} at 100 random points (< 1e-10)")


# -- criterion 8: dense-operator oracle --------------------------------------


@pytest.mark.parametrize("n,K,kp", [(8, 1.3, 2.7), (16, 0.9, 1.8), (16, 2.0, 2.0)])
def test_criterion_08_dense_operator_oracle(n, K, kp):
    p = make_params(K, kp)
    grid = MomentumGrid(n, n)
    prop = Propagator(grid, p)
    F = oracle_floquet_matrix(K, kp, n)
    rng = np.random.default_rng(n)
    worst = 0.0
    for init in (initial_state(grid).amps, random_quantum_amps(rng, n, n)):
        a = init.copy()
        v = init.ravel().copy()
        for _ in range(50):
            a = prop.step(a)
            v = F @ v
            worst = max(worst, float(np.abs(a.ravel() - v).max()))
    report(
        "8",
        worst < 1e-8,
        f"{n}x{n} grid (K={K}, k_p={kp}): max split-step vs dense deviation {worst:.2e} over 50 steps (< 1e-8)",
    )


# -- criterion 9: fixed point -------------------------------------------------


def test_criterion_09_fixed_point_invariance():
    p = make_params(0.6, 2.0)
    fp = fixed_points(p)
    after = scaled_map_step(fp, p)
    dev = max(
        abs(after.x1 - fp.x1),
        abs(after.x2 - fp.x2),
        abs(after.P1 - fp.P1),
        abs(after.P2 - fp.P2),
    )
    report("9", dev < 1e-12, f"period-1 point moves by {dev:.2e} under the scaled map (< 1e-12)")


# -- criterion 10: entropy oracles -------------------------------------------


def test_criterion_10_entropy_oracles():
    rng = np.random.default_rng(5)
    phi = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    chi = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    prod = np.outer(phi, chi)
    prod /= np.linalg.norm(prod)
    s_prod = von_neumann_entropy(schmidt_spectrum(QuantumState(MomentumGrid(32, 32), prod)))

    r = 7
    amps = np.zeros((32, 32), complex)
    amps[np.arange(r), np.arange(r)] = 1 / math.sqrt(r)
    s_rank = von_neumann_entropy(schmidt_spectrum(QuantumState(MomentumGrid(32, 32), amps)))

    samples = [
        von_neumann_entropy(
            schmidt_spectrum(QuantumState(MomentumGrid(32, 32), random_quantum_amps(rng, 32, 32)))
        )
        for _ in range(200)
    ]
    mean = float(np.mean(samples))
    page = math.log(32) - 0.5

    ok = s_prod < 1e-12 and abs(s_rank - math.log(r)) < 1e-12 and abs(mean - page) < 0.05
    report(
        "10",
        ok,
        f"product S={s_prod:.1e} (<1e-12); rank-{r} |S - ln {r}|={abs(s_rank - math.log(r)):.1e} "
        f"(<1e-12); Haar 32x32 mean S={mean:.4f} vs {page:.4f} (+/- 0.05)",
    )


# -- criterion 11: beta-fit exactness -----------------------------------------


def test_criterion_11_beta_fit_exactness():
    from mlkr import EnergySeries

    t = np.arange(10, 5001, 10)
    worst = 0.0
    for beta_true, scale in ((1.0, 3.0), (0.0, 7.5), (0.48, 0.2), (2.0, 1.0)):
        series = EnergySeries(times=t, values=scale * t.astype(float) ** beta_true)
        fit = fit_beta(series, window=(10, 5000))
        worst = max(worst, abs(fit.beta - beta_true))
    report("11", worst < 1e-6, f"max |beta - true| = {worst:.2e} on synthetic power laws (< 1e-6)")


# -- criterion 12: scaling equivalence ----------------------------------------


@pytest.mark.parametrize("K,kp", [(0.6, 2.0), (0.6, 256.0)])
def test_criterion_12_scaling_equivalence(K, kp):
    from mlkr import ClassicalState

    p = make_params(K, kp)
    rng = np.random.default_rng(12)
    state = ClassicalState(*rng.uniform(0, TWO_PI, 2), 0.0, 0.0)
    scaled = scale_state(state, p)
    worst = 0.0
    for _ in range(1000):
        state = map_step(state, p)
        scaled = scaled_map_step(scaled, p)
        for d in (abs(state.x1 - scaled.x1), abs(state.x2 - scaled.x2)):
            worst = max(worst, min(d, TWO_PI - d))
    report(
        "12",
        worst < 1e-9,
        f"(K={K}, k_p={kp}): max angle deviation {worst:.2e} between scaled/unscaled over 1e3 kicks (< 1e-9)",
    )


# -- criterion 1: classical diffusion -----------------------------------------


@pytest.mark.parametrize("K,kp", [(2.0, 2.0), (3.0, 2.0), (0.6, 256.0)])
def test_criterion_01_classical_diffusion(K, kp):
    p = make_params(K, kp)
    t0 = time.perf_counter()
    series, _ = evolve_ensemble(
        uniform_angle_ensemble(1000, seed=11), p, 5000, record_every=10
    )
    slope = energy_slope(series)
    elapsed = time.perf_counter() - t0
    ok = abs(slope - K ** 2) <= 0.2 * K ** 2
    report(
        "1",
        ok,
        f"(K={K}, k_p={kp}): fitted slope {slope:.4f} vs K^2={K ** 2} (+/- 20%), {elapsed:.0f}s",
    )


# -- criterion 2: Lyapunov values ---------------------------------------------

LYAPUNOV_REFERENCES = [
    (0.2, 1.0, 0.00, 0.02),
    (0.6, 2.0, 0.38, 0.10),
    (2.0, 2.0, 1.06, 0.10),
    (3.0, 2.0, 1.37, 0.10),
    (0.6, 256.0, 4.24, 0.10),
]


@pytest.mark.parametrize("K,kp,ref,tol", LYAPUNOV_REFERENCES)
def test_criterion_02_lyapunov_values(K, kp, ref, tol):
    est = lyapunov_tangent(make_params(K, kp), n_kicks=5000, n_samples=100, seed=0)
    ok = abs(est.value - ref) <= tol
    report(
        "2",
        ok,
        f"(K={K}, k_p={kp}): tangent lambda = {est.value:.4f} +/- {est.stderr:.4f} "
        f"vs reference {ref} (+/- {tol})",
    )


def test_criterion_02b_methods_agree():
    # supporting invariant: both estimators see the same exponent
    worst = None
    for Ks in (4.0, 6.0, 153.6):
        p = make_params(Ks, 1.0)
        a = lyapunov_tangent(p, n_kicks=5000, n_samples=100, seed=0)
        b = lyapunov_jacobian_product(p, n_kicks=5000, n_samples=100, seed=0)
        gap = abs(a.value - b.value)
        limit = 2 * math.hypot(a.stderr, b.stderr)
        if worst is None or gap / limit > worst[0] / worst[1]:
            worst = (gap, limit, Ks)
    ok = worst[0] < worst[1]
    report(
        "2b",
        ok,
        f"tangent vs Jacobian-product gap {worst[0]:.2e} < 2 combined SE {worst[1]:.2e} (worst at Ks={worst[2]})",
    )


# -- criterion 3: lambda ~ ln Ks ----------------------------------------------


def test_criterion_03_log_scaling_slope():
    ks_values = np.geomspace(10, 1000, 9)
    lams = [
        lyapunov_tangent(make_params(float(k), 1.0), n_kicks=4000, n_samples=60, seed=1).value
        for k in ks_values
    ]
    slope = float(np.polyfit(np.log(ks_values), lams, 1)[0])
    report("3", abs(slope - 1.0) <= 0.1, f"lambda vs ln Ks regression slope = {slope:.4f} (1 +/- 0.1)")


# -- criterion 5: entanglement regimes ----------------------------------------


@pytest.fixture(scope="module")
def entanglement_runs():
    cache = {}

    def get(K, kp, grid_n, record_every):
        key = (K, kp)
        if key not in cache:
            cache[key] = entanglement_series(
                make_params(K, kp),
                n_kicks=500,
                record_every=record_every,
                grid=MomentumGrid(grid_n, grid_n),
            )
        return cache[key]

    return get


def _entropy_log_rate(series, t_lo=50, t_hi=500):
    mask = (series.times >= t_lo) & (series.times <= t_hi)
    return float(np.polyfit(np.log(series.times[mask]), series.S[mask], 1)[0])


def test_criterion_05a_localized_entropy_saturates(entanglement_runs):
    series = entanglement_runs(0.6, 2.0, 512, 5)
    w1 = series.S[(series.times >= 250) & (series.times <= 375)].mean()
    w2 = series.S[(series.times >= 375) & (series.times <= 500)].mean()
    drift = abs(w2 - w1) / w1
    report(
        "5a",
        drift < 0.05,
        f"(0.6, 2): windowed mean S {w1:.4f} -> {w2:.4f}, relative drift {drift * 100:.2f}% (< 5%)",
    )


def test_criterion_05b_logarithmic_growth_rates(entanglement_runs):
    sub = entanglement_runs(2.0, 2.0, 512, 5)
    dif = entanglement_runs(7.5, 7.5, 2048, 25)
    g_sub = _entropy_log_rate(sub)
    g_dif = _entropy_log_rate(dif)
    ok = g_sub > 0 and g_dif > g_sub
    report(
        "5b",
        ok,
        f"dS/d(ln t) over [50, 500]: (2,2) -> {g_sub:.4f} (> 0), (7.5,7.5) -> {g_dif:.4f} (strictly larger)",
    )


# -- criterion 7: unitarity ----------------------------------------------------


def test_criterion_07_unitarity_long_run():
    p = make_params(0.6, 2.0)
    t0 = time.perf_counter()
    _, final = evolve(initial_state(MomentumGrid(512, 512)), p, 10_000, record_every=1000)
    drift = abs(final.norm() - 1.0)
    report(
        "7",
        drift < 1e-9,
        f"norm drift {drift:.2e} over 1e4 kicks on a 2^9 x 2^9 grid (< 1e-9), {time.perf_counter() - t0:.0f}s",
    )


# -- criterion 4: quantum transport exponents ----------------------------------

# grid sizes: smallest power of two keeping the edge band below 1e-8 for the
# full 5e3 kicks; (3, 2) genuinely needs 2^11 (2^10 trips the band at t=1775)
BETA_CASES = [
    (0.2, 1.0, 512, 0.00),
    (0.6, 2.0, 512, 0.00),
    (2.0, 2.0, 1024, 0.48),
    (3.0, 2.0, 2048, 0.88),
    (0.6, 256.0, 512, 0.00),
]
EXPECTED_REGIMES = {
    (0.2, 1.0): ("I",),
    (0.6, 2.0): ("II",),
    (2.0, 2.0): ("III",),
    (3.0, 2.0): ("III", "IV"),
    (0.6, 256.0): ("II",),
}


@pytest.fixture(scope="module")
def quantum_runs():
    cache = {}

    def get(K, kp, grid_n):
        key = (K, kp)
        if key not in cache:
            series, _ = evolve(
                initial_state(MomentumGrid(grid_n, grid_n)),
                make_params(K, kp),
                5000,
                record_every=10,
            )
            cache[key] = series
        return cache[key]

    return get


@pytest.mark.parametrize("K,kp,grid_n,ref", BETA_CASES)
def test_criterion_04_quantum_beta(quantum_runs, K, kp, grid_n, ref):
    t0 = time.perf_counter()
    series = quantum_runs(K, kp, grid_n)
    fit = fit_beta(series)
    elapsed = time.perf_counter() - t0
    ok = abs(fit.beta - ref) <= 0.12
    report(
        "4",
        ok,
        f"(K={K}, k_p={kp}, grid {grid_n}): beta = {fit.beta:.3f} vs reference {ref} "
        f"(+/- 0.12), window {fit.window}, {elapsed:.0f}s",
    )


@pytest.mark.parametrize("K,kp,grid_n,ref", BETA_CASES)
def test_criterion_04b_regime_placement(quantum_runs, K, kp, grid_n, ref):
    series = quantum_runs(K, kp, grid_n)
    fit = fit_beta(series)
    regime = classify_regime(fit.beta, make_params(K, kp))
    expected = EXPECTED_REGIMES[(K, kp)]
    report(
        "4b",
        regime in expected,
        f"(K={K}, k_p={kp}): beta {fit.beta:.3f} classifies as {regime}, expected {'/'.join(expected)}",
    )


def test_criterion_04c_coarse_sweep_structure():
    # 8x8 desk-scale sweep: completes deterministically, labels only valid
    # cells, and the classically regular corner comes out as region I
    diagram = sweep_phase_diagram(
        K_range=(0.1, 10.0),
        kp_range=(0.1, 10.0),
        resolution=8,
        n_kicks=300,
        grid_size=128,
        record_every=10,
    )
    labelled = diagram.valid & (diagram.regime != "")
    ok = (
        diagram.beta.shape == (8, 8)
        and bool((labelled == diagram.valid).all())
        and bool(diagram.valid.any())
        and diagram.regime[0, 0] == "I"  # (K, k_p) = (0.1, 0.1)
    )
    n_valid = int(diagram.valid.sum())
    report(
        "4c",
        ok,
        f"8x8 sweep: {n_valid}/64 cells valid, invalid cells unlabelled, low-Ks corner is region I",
    )
