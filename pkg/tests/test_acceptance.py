"""One test per acceptance criterion; each records a PASS/FAIL line for the terminal summary."""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from linsense import analytic as an
from linsense import scenarios
from linsense import stochastic as sto
from linsense.model import DriveSpec, ModeParams, build_network, stability

from conftest import random_drive, random_network, record_acceptance
from test_analytic import fd_response


def finish(label, ok, detail, elapsed, budget):
    fast = elapsed < budget
    record_acceptance(label, ok and fast, f"{detail}  [{elapsed:.1f}s / {budget:.0f}s]")
    assert ok, detail
    assert fast, f"runtime {elapsed:.1f}s over budget {budget}s"


def mc_config(net, drive, tau, windows, n_traj, seed, shift=0.0):
    """dt divides the unit record block; burn-in covers 10 decay times.

    ``shift`` widens the rate scale for a perturbed copy of the network.
    """
    dt = 1.0 / math.ceil((sto.rate_scale(net, drive.w_in) + abs(shift)) / sto.DT_FACTOR)
    burn = math.ceil(sto.BURN_IN_FACTOR / stability(net).decay_margin)
    return sto.SimConfig(dt=dt, t_total=burn + windows * tau, burn_in=burn, n_traj=n_traj, seed=seed)


def test_c01_passive_noise_is_vacuum():
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(50):
        net = build_network([ModeParams(rng.uniform(-2, 2), rng.uniform(0.05, 5), rng.uniform(0.05, 5))])
        pair = an.output_noise_pair(net, 0, rng.uniform(-10, 10))
        worst = max(worst, abs(pair.s_plus - 1), abs(pair.s_minus))
    finish("C1 passive NSD = (1, 0)", worst <= 1e-12, f"max deviation {worst:.2e}", time.perf_counter() - t0, 1)


def test_c02_commutator_sum_rule_with_gain():
    t0 = time.perf_counter()
    kex, k0 = 0.8, 1.2
    kappa = kex + k0
    worst = 0.0
    for frac in (0.0, 0.3, 0.9):
        net = build_network([ModeParams(0.0, kex, k0, frac * kappa)])
        for w in np.linspace(-20, 20, 401):
            worst = max(worst, abs(an.commutator_gap(net, 0, w)))
    finish("C2 s_plus - s_minus = 1 with gain", worst <= 1e-12, f"max gap {worst:.2e}", time.perf_counter() - t0, 1)


def test_c03_optimal_passive_coupling():
    t0 = time.perf_counter()
    k0, n, tau = 1.0, 100.0, 1e4
    net = build_network([ModeParams(0.0, 1.0, k0)])
    drive = DriveSpec(0.0, [1.0])
    grid = np.geomspace(0.1, 10.0, 200)
    best_kex, _ = an.optimize_coupling(net, drive, tau, grid, n_target=n)
    cell = grid[1] / grid[0]
    near = 1 / cell <= best_kex / k0 <= cell
    exact = an.sensing_limit(net, an.normalize_drive(net, drive, 0, n), 0, 0, tau).limit
    rel = abs(exact - 5e-4) / 5e-4
    ok = near and rel <= 1e-9 and abs(an.fundamental_bound(k0, n, tau) - 5e-4) <= 1e-9 * 5e-4
    detail = f"argmin kappa_ex={best_kex:.5g}, limit at kappa_ex=kappa_0 {exact:.12g} (rel {rel:.1e})"
    finish("C3 optimal passive limit", ok, detail, time.perf_counter() - t0, 5)


def test_c04_gain_bound():
    t0 = time.perf_counter()
    rng = np.random.default_rng(104)
    k0 = 1.0
    worst = math.inf
    for _ in range(100):
        kex = 10 ** rng.uniform(-1.5, 1)
        g = rng.uniform(0, 0.99) * (kex + k0)
        net = build_network([ModeParams(0.0, kex, k0, g)])
        drive = DriveSpec(rng.uniform(-2, 2), [rng.uniform(0.5, 20)])
        tau = 2 * an.min_averaging_time(net)
        rep = an.sensing_limit(net, drive, 0, 0, tau)
        floor = math.sqrt(k0 + g) / (2 * math.sqrt(rep.n_photons[0] * tau))
        worst = min(worst, (rep.limit - floor) / floor)
    finish("C4 gain bound", worst >= -1e-9, f"min relative margin {worst:.3e}", time.perf_counter() - t0, 5)


def _suite(kind, seed):
    checks = scenarios.verify_bounds(seed, 500, kind)
    margins = [c.relative_margin for c in checks if not c.skipped]
    skipped = sum(c.skipped for c in checks)
    nonrec = sum(not c.instance.network.reciprocal for c in checks)
    sizes = sorted({c.instance.network.n for c in checks})
    return checks, min(margins), skipped, nonrec, sizes


def test_c05_frequency_bound_random_networks():
    t0 = time.perf_counter()
    checks, worst, skipped, nonrec, sizes = _suite("frequency", 1)
    ok = all(c.passed for c in checks) and skipped == 0 and worst >= -1e-9 and max(sizes) == 8
    detail = f"500 instances, sizes {sizes[0]}..{sizes[-1]}, {nonrec} non-reciprocal, min rel margin {worst:.2e}"
    finish("C5 frequency-shift bound", ok, detail, time.perf_counter() - t0, 60)


def test_c06_coupling_bound_random_networks():
    t0 = time.perf_counter()
    checks, worst, skipped, nonrec, sizes = _suite("coupling", 1)
    # symmetric corollary: identical modes, equal occupations
    m = ModeParams(0.0, 1.0, 1.0)
    net = build_network([m, m], [[0, 0.3], [0.3, 0]])
    rep = an.sensing_limit(net, DriveSpec(0.0, [10.0, 10.0]), 0, (0, 1), 1e4)
    n = rep.n_photons[0]
    sym = 1.0 / (4 * math.sqrt(n * 1e4))
    sym_ok = rep.n_photons[1] == pytest.approx(n, rel=1e-12) and abs(rep.bound - sym) <= 1e-9 * sym
    ok = all(c.passed for c in checks) and skipped == 0 and worst >= -1e-9 and sym_ok and rep.margin >= 0
    detail = f"500 instances, {nonrec} non-reciprocal, min rel margin {worst:.2e}; symmetric bound {rep.bound:.12g}"
    finish("C6 coupling-shift bound", ok, detail, time.perf_counter() - t0, 60)


def test_c07_cofactor_responses_vs_finite_differences():
    t0 = time.perf_counter()
    rng = np.random.default_rng(107)
    worst = 0.0
    for i in range(100):
        n = int(rng.integers(2, 7)) if i % 2 else int(rng.integers(1, 7))
        net = random_network(rng, n)
        drive = random_drive(rng, n)
        if i % 2:
            a, b = rng.choice(n, 2, replace=False)
            target = (int(a), int(b))
        else:
            target = int(rng.integers(n))
        got = an.response(net, drive, target).per_port
        ref = fd_response(net, drive, target)
        worst = max(worst, np.linalg.norm(got - ref) / np.linalg.norm(ref))
    finish("C7 cofactor responses", worst <= 1e-6, f"max relative error {worst:.2e}", time.perf_counter() - t0, 10)


MC_PRESETS = [
    ("single_passive", {}),
    ("single_active", {"g": 0.5}),
    ("two_mode_ep", {}),
    ("two_mode_nonreciprocal", {}),
]


@pytest.mark.slow
@pytest.mark.parametrize("name, params", MC_PRESETS, ids=[m[0] for m in MC_PRESETS])
def test_c08_monte_carlo_homodyne_variance(name, params):
    t0 = time.perf_counter()
    p = scenarios.preset(name, **params)
    net, drive = p.network, p.drive
    tau = float(math.ceil(an.min_averaging_time(net)))
    cfg = mc_config(net, drive, tau, windows=1, n_traj=2000, seed=8)
    ens = sto.simulate(net, drive, cfg)
    est = sto.homodyne_estimate(ens, 0.4, tau, port=p.target)
    expected = an.output_noise_pair(net, p.target, drive.w_in).total / tau
    z = (est.variance - expected) / est.stderr_of_variance
    detail = f"{name}: var {est.variance:.5g} vs {expected:.5g} (z={z:+.2f}, N={est.n_samples})"
    finish(f"C8 MC variance {name}", abs(z) <= 3, detail, time.perf_counter() - t0, 300)


@pytest.mark.slow
def test_c09_monte_carlo_snr():
    t0 = time.perf_counter()
    p = scenarios.preset("single_passive")
    tau = 100.0
    delta = an.fundamental_bound(1.0, 100.0, tau)
    cfg = mc_config(p.network, p.drive, tau, windows=1, n_traj=2000, seed=9, shift=delta)
    r = sto.mc_snr(p.network, p.drive, 0, delta, cfg, tau)
    rel = abs(r.snr - r.analytic_snr) / r.analytic_snr
    detail = f"empirical SNR {r.snr:.4f} vs analytic {r.analytic_snr:.4f} (rel {rel:.3f}, N={r.n_samples})"
    finish("C9 empirical SNR", rel <= 0.10 and abs(r.analytic_snr - 1) < 1e-9, detail, time.perf_counter() - t0, 300)


def test_c10_schawlow_townes():
    t0 = time.perf_counter()
    kappa, n, tau = 1.0, 100.0, 200.0
    r = sto.phase_diffusion(kappa, kappa, n, tau, 10_000, seed=10)
    var_ok = abs(r.var_phase - 1.0) <= 0.03
    std_ok = abs(r.freq_std - 5e-3) / 5e-3 <= 0.03
    linear = an.fundamental_bound(kappa, n, tau)
    analytic_ratio = sto.above_threshold_frequency_error(kappa, n, tau) / linear
    ratio_ok = abs(analytic_ratio - math.sqrt(2)) <= 1e-12 * math.sqrt(2)
    emp_ratio = r.freq_std / linear
    emp_ok = abs(emp_ratio / math.sqrt(2) - 1) <= 0.02
    detail = f"var_phase {r.var_phase:.4f}, freq_std {r.freq_std:.4e}, ratio {analytic_ratio:.15f} (empirical {emp_ratio:.4f})"
    finish("C10 Schawlow-Townes", var_ok and std_ok and ratio_ok and emp_ok, detail, time.perf_counter() - t0, 120)


def test_c11_verify_is_deterministic(tmp_path):
    t0 = time.perf_counter()
    outs = []
    for name in ("a", "b"):
        res = subprocess.run(
            [sys.executable, "-m", "linsense", "verify", "--seed", "1", "--out", str(tmp_path / name)],
            capture_output=True,
            text=True,
        )
        assert res.returncode == 0, res.stderr
        outs.append((tmp_path / name / "report.csv").read_bytes())
    elapsed = time.perf_counter() - t0
    finish("C11 verify determinism", outs[0] == outs[1], f"{len(outs[0])} bytes, identical={outs[0] == outs[1]}", elapsed, 60)
