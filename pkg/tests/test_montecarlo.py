import numpy as np
import pytest
from scipy import integrate

from levygreen import green, models, montecarlo as mc, stable
from levygreen.geometry import interval_union
from levygreen.kato import constant_drift, sin_drift

ALPHA = 1.5


def test_increment_symmetry_and_scale():
    rng = np.random.default_rng(0)
    z = mc.sample_stable_increment(ALPHA, 1.0, rng, 10 ** 6)
    med = np.median(z)
    assert abs(med) < 3.0 * 1.3 / np.sqrt(10 ** 6)   # median se of a unit-scale law


def test_increment_self_similarity():
    z2 = mc.sample_stable_increment(ALPHA, 2.0, np.random.default_rng(1), 10 ** 5)
    z1 = mc.sample_stable_increment(ALPHA, 1.0, np.random.default_rng(2), 10 ** 5)
    scaled = 2.0 ** (1.0 / ALPHA) * z1
    from scipy.stats import ks_2samp
    assert ks_2samp(z2, scaled).statistic < 0.01


def test_increment_tail_exponent():
    z = np.abs(mc.sample_stable_increment(ALPHA, 1.0, np.random.default_rng(3), 10 ** 7))
    ts = np.geomspace(10.0, 1000.0, 5)
    surv = np.array([(z > t).mean() for t in ts])
    slope = np.polyfit(np.log(ts), np.log(surv), 1)[0]
    assert slope == pytest.approx(-ALPHA, rel=0.05)


def test_increment_rejects_bad_index():
    with pytest.raises(ValueError):
        mc.sample_stable_increment(2.5, 1.0, np.random.default_rng(0), 10)


def test_bins_cover_domain_exactly(two_interval):
    bins = mc.make_bins(two_interval, 0.05)
    assert bins.widths.sum() == pytest.approx(two_interval.total_length, rel=1e-12)
    assert np.all(two_interval.contains(bins.centers))
    x = np.array([-0.999, -0.201, 0.201, 0.999])
    idx = bins.index(x)
    assert np.all((idx >= 0) & (idx < bins.n_bins))


def test_exit_probability_symmetric(stable15, unit_interval):
    s = mc.simulate_exit(stable15, constant_drift(0.0), unit_interval, 0.0,
                         mc.PathConfig(dt=2e-3, n_paths=20000, seed=42),
                         track_occupation=False)
    p = np.mean(s.exit_pos > 0)
    assert abs(p - 0.5) <= 3.0 * 0.5 / np.sqrt(s.n_paths)


def test_exit_never_on_boundary(stable15, unit_interval):
    s = mc.simulate_exit(stable15, constant_drift(0.0), unit_interval, 0.0,
                         mc.PathConfig(dt=2e-3, n_paths=5000, seed=1),
                         track_occupation=False)
    assert not np.any(np.abs(s.exit_pos) == 1.0)
    assert np.all(np.abs(s.exit_pos) > 1.0)


def test_drift_shifts_exit_law(stable15, unit_interval):
    cfg = mc.PathConfig(dt=2e-3, n_paths=20000, seed=7)
    s0 = mc.simulate_exit(stable15, constant_drift(0.0), unit_interval, 0.0, cfg,
                          track_occupation=False)
    s1 = mc.simulate_exit(stable15, constant_drift(1.0), unit_interval, 0.0, cfg,
                          track_occupation=False)
    p0, p1 = np.mean(s0.exit_pos > 0), np.mean(s1.exit_pos > 0)
    assert p1 > p0 + 10.0 * 0.5 / np.sqrt(cfg.n_paths)


def test_mean_exit_time_against_closed_form(stable15, unit_interval):
    cfg = mc.PathConfig(dt=1e-3, n_paths=50000, seed=11)
    est = mc.mc_mean_exit_time(stable15, constant_drift(0.0), unit_interval, 0.0, cfg)
    closed = stable.mean_exit_time(ALPHA, (-1, 1), 0.0)
    assert est.agrees_with(closed, n_se=3.0)
    assert est.se == pytest.approx(np.std(
        mc.simulate_exit(stable15, constant_drift(0.0), unit_interval, 0.0, cfg,
                         track_occupation=False).tau, ddof=1) / np.sqrt(cfg.n_paths))


def test_mean_exit_time_step_halving_within_se(stable15, unit_interval):
    e1 = mc.mc_mean_exit_time(stable15, constant_drift(0.0), unit_interval, 0.0,
                              mc.PathConfig(dt=2e-3, n_paths=20000, seed=13))
    e2 = mc.mc_mean_exit_time(stable15, constant_drift(0.0), unit_interval, 0.0,
                              mc.PathConfig(dt=1e-3, n_paths=20000, seed=14))
    assert abs(e1.value - e2.value) < np.hypot(e1.se, e2.se) + e1.se


def test_mean_exit_vanishes_at_boundary(stable15, unit_interval):
    est = mc.mc_mean_exit_time(stable15, constant_drift(0.0), unit_interval, 0.995,
                               mc.PathConfig(dt=1e-3, n_paths=4000, seed=3))
    closed0 = stable.mean_exit_time(ALPHA, (-1, 1), 0.0)
    assert est.value < 0.05 * closed0


def test_green_histogram_matches_oracle(stable15, unit_interval):
    bins, val, se, s = mc.mc_green(stable15, constant_drift(0.0), unit_interval, 0.0,
                                   mc.PathConfig(dt=2e-3, n_paths=30000, seed=9,
                                                 bin_width=0.1))
    for k, (e0, e1) in enumerate(zip(bins.edges[0][:-1], bins.edges[0][1:])):
        ref, _ = integrate.quad(lambda y: stable.green_interval(ALPHA, (-1, 1), 0.0, y),
                                e0, e1, points=[0.0] if e0 < 0.0 < e1 else None, limit=200)
        ref /= e1 - e0
        assert abs(val[k] - ref) <= 3.0 * se[k] + 0.01 * ref


def test_occupation_identity(stable15, unit_interval):
    bins, val, se, s = mc.mc_green(stable15, sin_drift(1.0, 5.0), unit_interval, 0.3,
                                   mc.PathConfig(dt=2e-3, n_paths=10000, seed=21,
                                                 bin_width=0.05))
    total = float(np.sum(val * bins.widths))
    tau_mean = float(np.mean(s.tau))
    tau_se = float(np.std(s.tau, ddof=1) / np.sqrt(s.n_paths))
    assert abs(total - tau_mean) <= max(tau_se, 2e-3 * tau_mean)


def test_se_scales_with_paths(stable15, unit_interval):
    e1 = mc.mc_mean_exit_time(stable15, constant_drift(0.0), unit_interval, 0.0,
                              mc.PathConfig(dt=4e-3, n_paths=10000, seed=31))
    e2 = mc.mc_mean_exit_time(stable15, constant_drift(0.0), unit_interval, 0.0,
                              mc.PathConfig(dt=4e-3, n_paths=40000, seed=32))
    assert e2.se == pytest.approx(0.5 * e1.se, rel=0.2)


def test_bitwise_reproducibility(stable15, unit_interval):
    cfg = mc.PathConfig(dt=2e-3, n_paths=4000, seed=123)
    a = mc.simulate_exit(stable15, sin_drift(1.0, 5.0), unit_interval, 0.2, cfg)
    b = mc.simulate_exit(stable15, sin_drift(1.0, 5.0), unit_interval, 0.2, cfg)
    assert np.array_equal(a.tau, b.tau)
    assert np.array_equal(a.exit_pos, b.exit_pos)
    assert np.array_equal(a.occupation, b.occupation)


def test_exit_law_ks_zero_drift(stable15, oracle15, unit_interval):
    cdf = green.exit_law_cdf(lambda z: green.poisson_kernel(oracle15, 0.0, z),
                             unit_interval)
    law = mc.mc_exit_law(stable15, constant_drift(0.0), unit_interval, 0.0,
                         mc.PathConfig(dt=2e-3, n_paths=30000, seed=5), cdf=cdf)
    assert law["ks"] < 0.015
    assert law["boundary_hits"] == 0
    # mirror symmetry of the histogram within multinomial noise
    counts = law["counts"]
    diff = np.abs(counts - counts[::-1])
    assert np.all(diff <= 5.0 * np.sqrt(np.maximum(counts + counts[::-1], 1.0)))


def _bin_averages(G, x0, bins, order=8):
    gl_x, gl_w = np.polynomial.legendre.leggauss(order)
    out = []
    for e in bins.edges:
        for lo, hi in zip(e[:-1], e[1:]):
            pts = 0.5 * (hi - lo) * gl_x + 0.5 * (hi + lo)
            out.append(float(np.asarray(G.value(x0, pts)) @ gl_w) * 0.5)
    return np.array(out)


def test_two_interval_green_matches_numeric(stable15, two_interval, numeric15):
    # MC occupation in a union of intervals against the coupled solver; the
    # step must be small enough that the kink at the source stays unbiased
    bins, val, se, s = mc.mc_green(stable15, constant_drift(0.0), two_interval, 0.5,
                                   mc.PathConfig(dt=5e-4, n_paths=30000, seed=17,
                                                 bin_width=0.1))
    ref = _bin_averages(numeric15, 0.5, bins)
    z = np.abs(val - ref) / np.maximum(se, 1e-12)
    assert np.all(z < 3.5)


def test_censoring_reported(stable15, unit_interval):
    cfg = mc.PathConfig(dt=1e-3, n_paths=200, seed=2, time_cap=0.05)
    s = mc.simulate_exit(stable15, constant_drift(0.0), unit_interval, 0.0, cfg,
                         track_occupation=False)
    assert s.censored > 0
    assert np.all(s.tau <= 0.05 + 1e-12) | np.any(s.tau > 0)


def test_approximate_model_route():
    # truncated-stable uses the compound-Poisson + Gaussian approximation
    m = models.truncated_stable_model(ALPHA, 2.0)
    D = interval_union((-1.0, 1.0))
    s = mc.simulate_exit(m, constant_drift(0.0), D, 0.0,
                         mc.PathConfig(dt=2e-3, n_paths=4000, seed=19,
                                       small_jump_cutoff=0.05))
    assert s.approximate_noise
    p = np.mean(s.exit_pos > 0)
    assert abs(p - 0.5) <= 4.0 * 0.5 / np.sqrt(s.n_paths)
    total = s.occupation.sum() / s.n_paths
    assert total == pytest.approx(np.mean(s.tau), rel=0.05)


def test_start_outside_rejected(stable15, unit_interval):
    with pytest.raises(ValueError):
        mc.simulate_exit(stable15, constant_drift(0.0), unit_interval, 1.5,
                         mc.PathConfig(dt=1e-3, n_paths=10, seed=0))


def test_nonfinite_drift_aborts(stable15, unit_interval):
    def hostile(z):
        z = np.asarray(z, dtype=float)
        return np.where(np.abs(z) < 0.02, np.nan, 0.0)
    with pytest.raises(FloatingPointError):
        mc.simulate_exit(stable15, hostile, unit_interval, 0.0,
                         mc.PathConfig(dt=1e-3, n_paths=50, seed=0),
                         track_occupation=False)
