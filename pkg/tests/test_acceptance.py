"""Acceptance suite: each test prints one PASS/FAIL line and asserts it."""
import math

import numpy as np
from scipy import stats

from elaa_channel.harness import SimulationConfig, run_monte_carlo
from elaa_channel.los_state import generate_states, los_probability, window_length_pmf
from elaa_channel.metrics import capacity
from elaa_channel.normalization import expected_link_power
from elaa_channel.fading import complex_gaussian
from elaa_channel.scenario import ScenarioParams, build_ula
from oracles import leibniz_det, monte_carlo_link_power

LAM = 0.0857
D_COR = 5.0


def spread(values):
    lo, hi = np.percentile(values, [10, 90], method="inverted_cdf")
    return float(hi - lo)


def test_1_los_probability_values(report):
    at_d1 = float(los_probability(18.0, 18.0, 36.0))
    at_d2 = float(los_probability(36.0, 18.0, 36.0))
    ref = 0.5 * (1 - math.exp(-1)) + math.exp(-1)
    ok = at_d1 == 1.0 and abs(at_d2 - 0.683940) <= 1e-6 and abs(at_d2 - ref) <= 1e-15
    assert report(1, "LoS probability unit values", ok, f"P(18)={at_d1!r}, P(36)={at_d2:.7f}")


def test_2_window_length_law(report):
    g = build_ula(100_000, LAM / 2)
    params = ScenarioParams(wavelength=LAM, d_cor=D_COR)
    rng = np.random.default_rng(2024)
    # the last window of every array is censored by the array end
    lengths = np.concatenate([generate_states(g, (0.0, 40.0, 1.5), params, rng).window_lengths[:-1]
                              for _ in range(10)])
    L_max = int(lengths.max())
    support = np.arange(1, L_max + 1)
    pmf = window_length_pmf(support, LAM, D_COR)
    counts = np.bincount(lengths, minlength=L_max + 1)[1:]
    tv = 0.5 * (np.abs(counts / lengths.size - pmf).sum() + (1.0 - pmf.sum()))

    # merge bins so every expected count is at least 5; the tail bin absorbs P(L > L_max)
    expected = pmf * lengths.size
    expected[-1] += (1.0 - pmf.sum()) * lengths.size
    obs_bins, exp_bins, acc_o, acc_e = [], [], 0.0, 0.0
    for o, e in zip(counts, expected):
        acc_o, acc_e = acc_o + o, acc_e + e
        if acc_e >= 5:
            obs_bins.append(acc_o)
            exp_bins.append(acc_e)
            acc_o = acc_e = 0.0
    obs_bins[-1] += acc_o
    exp_bins[-1] += acc_e
    p_value = stats.chisquare(obs_bins, exp_bins).pvalue

    ok = lengths.size >= 10_000 and tv < 0.02 and p_value > 0.01
    assert report(2, "window-length law", ok,
                  f"{lengths.size} windows, TV={tv:.4f}, chi2 p={p_value:.3f}")


def test_3_pmf_partial_sums(report):
    partial = np.cumsum(window_length_pmf(np.arange(1, 5001), LAM, D_COR))
    ok = partial[-1] >= 1 - 1e-12 and partial.max() <= 1 + 1e-12
    assert report(3, "PMF partial sums", ok, f"final={partial[-1]:.15f}, max={partial.max():.15f}")


def test_4_normalization_consistency(report):
    cfg = SimulationConfig(preset="I", M=200, trials=10_000, fixed_layout=True, seed=0)
    mean = float(run_monte_carlo(cfg, workers=2).frobenius_sq.mean())
    ok = 0.95 <= mean <= 1.05
    assert report(4, "normalization consistency", ok, f"mean |H|^2 = {mean:.4f}")


def test_5_channel_hardening(report):
    cv = {}
    for M in (64, 1024):
        cfg = SimulationConfig(preset="II", M=M, K=1, n_per_user=4, trials=5000, seed=5)
        fsq = run_monte_carlo(cfg, workers=2).frobenius_sq
        cv[M] = float(fsq.std() / fsq.mean())
    ratio = cv[1024] / cv[64]
    ok = abs(ratio - 0.25) <= 0.3 * 0.25
    assert report(5, "channel hardening", ok,
                  f"CV64={cv[64]:.4f}, CV1024={cv[1024]:.4f}, ratio={ratio:.3f}")


def test_6_norm_spread_ordering(report):
    base = SimulationConfig(M=200, trials=2000, density="high", seed=6)
    s = {
        "I": spread(run_monte_carlo(base, workers=2).frobenius_sq),
        "I-noshadow": spread(run_monte_carlo(base.replace(shadowing=False), workers=2).frobenius_sq),
        "II": spread(run_monte_carlo(base.replace(preset="II"), workers=2).frobenius_sq),
        "V": spread(run_monte_carlo(base.replace(preset="V"), workers=2).frobenius_sq),
    }
    ok = (s["I"] >= 1.2 * s["I-noshadow"] and s["I-noshadow"] >= 1.2 * s["II"]
          and s["V"] > s["II"])
    detail = ", ".join(f"{k}={v:.3f}" for k, v in s.items())
    assert report(6, "P90-P10 spread ordering", ok, detail)


def test_7_density_capacity(report):
    base = SimulationConfig(M=200, trials=2000, snr_db=10.0, seed=7)
    med = {d: float(np.median(run_monte_carlo(base.replace(density=d), workers=2).capacities))
           for d in ("low", "high")}
    ok = med["low"] >= 1.05 * med["high"]
    assert report(7, "low density capacity above high density", ok,
                  f"low={med['low']:.4f}, high={med['high']:.4f} bit/s/Hz")


def test_8_capacity_oracle(report):
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(20):
        H = complex_gaussian(rng, (4, 4))
        ref = math.log2(leibniz_det(np.eye(4) + 10.0 / 4 * H.conj().T @ H).real)
        worst = max(worst, abs(capacity(H, 10.0, 4) - ref) / abs(ref))
    scalar_err = abs(capacity(np.array([[1.0]]), 10.0, 1) - math.log2(11.0))
    ok = worst <= 1e-9 and scalar_err <= 1e-12
    assert report(8, "capacity oracle", ok, f"max rel err={worst:.1e}, scalar err={scalar_err:.1e}")


def test_9_link_power_oracle(report):
    params = ScenarioParams()
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(5):
        p, d = float(rng.random()), float(rng.uniform(5.0, 80.0))
        mc = monte_carlo_link_power(p, d, params, 10_000_000, rng)
        worst = max(worst, abs(mc / expected_link_power(p, d, params) - 1))
    ok = worst < 0.02
    assert report(9, "per-link power oracle", ok, f"max rel err={worst:.4f}")


def test_10_determinism(report, tmp_path):
    cfg = SimulationConfig(M=64, K=3, n_per_user=2, trials=40, seed=10, rss_trials=2)
    run_monte_carlo(cfg, workers=1, output_dir=tmp_path / "a")
    run_monte_carlo(cfg, workers=1, output_dir=tmp_path / "b")
    run_monte_carlo(cfg, workers=2, output_dir=tmp_path / "c")

    def snapshot(path):
        return {p.name: p.read_bytes() for p in sorted(path.iterdir())}

    a, b, c = (snapshot(tmp_path / x) for x in "abc")
    ok = len(a) > 0 and a == b == c
    assert report(10, "byte-identical outputs", ok, f"{len(a)} files, workers 1 and 2")
