import numpy as np
import pytest

from levygreen import kernels, models, stable

ALPHA = 1.5
K1 = stable.kernel_at_one(ALPHA)            # = sqrt(2/pi) for this index
A = stable.h_constant(ALPHA)


def test_h_closed_form():
    m = models.stable_model(ALPHA)
    for r in (1e-4, 0.3, 1.0, 50.0):
        assert kernels.compute_h(m, r) == pytest.approx(A * r ** -ALPHA, rel=1e-10)


def test_h_dilation_bracket():
    m = models.stable_model(ALPHA)
    for r in (0.1, 1.0, 10.0):
        h1, h2 = kernels.compute_h(m, r), kernels.compute_h(m, 2 * r)
        assert h2 <= h1 <= 4.0 * h2


def test_h_psi_bracket():
    m = models.stable_model(ALPHA)
    for r in (1e-3, 1.0, 1e2):
        h = kernels.compute_h(m, r)
        psi = float(m.psi(1.0 / r))
        assert 0.5 * psi <= h <= kernels.C_PSI_BRACKET * psi


def test_h_truncated_vanishes_at_infinity():
    # beyond the cutoff only the second-moment head remains, so h ~ r^-2
    m = models.truncated_stable_model(ALPHA, 1.0)
    vals = [kernels.compute_h(m, r) for r in (10.0, 100.0, 1000.0)]
    assert vals[0] > vals[1] > vals[2] > 0
    assert vals[2] / vals[0] == pytest.approx(1e-4, rel=1e-6)


def test_V_closed_form_and_zero():
    m = models.stable_model(ALPHA)
    assert kernels.compute_V(m, 0.0) == 0.0
    for r in (0.2, 1.7):
        assert kernels.compute_V(m, r) == pytest.approx(A ** -0.5 * r ** (ALPHA / 2), rel=1e-10)


def test_K_at_origin_and_symmetry(table15):
    assert table15.K_at(0.0) == 0.0
    assert table15.K_at(-0.7) == table15.K_at(0.7)


def test_K_quadrature_against_gamma_closed_form():
    m = models.stable_model(ALPHA)
    assert kernels.compute_K(m, 1.0) == pytest.approx(np.sqrt(2.0 / np.pi), rel=1e-9)
    for a in (1.2, 1.9):
        mm = models.stable_model(a)
        closed = stable.kernel_at_one(a)
        assert kernels.compute_K(mm, 1.0) == pytest.approx(closed, rel=1e-9)


def test_K_dilation_homogeneity():
    m = models.stable_model(ALPHA)
    for x in (0.05, 0.8, 12.0):
        assert kernels.compute_K(m, 2 * x) == pytest.approx(
            2 ** (ALPHA - 1) * kernels.compute_K(m, x), rel=1e-8)


def test_dK_is_odd_and_matches_homogeneous_form():
    m = models.stable_model(ALPHA)
    v = kernels.compute_dK(m, 1.0)
    assert v == pytest.approx(0.5 * K1, rel=1e-9)
    assert kernels.compute_dK(m, -1.0) == pytest.approx(-v, rel=1e-12)
    with pytest.raises(ValueError):
        kernels.compute_dK(m, 0.0)


def test_dK_finite_difference_consistency():
    m = models.stable_model(ALPHA)
    x = 0.7
    d = kernels.compute_dK(m, x)
    for eps in (1e-2, 1e-3, 1e-4):
        fd = (kernels.compute_K(m, x + eps) - kernels.compute_K(m, x - eps)) / (2 * eps)
        assert abs(fd - d) <= 2.0 * eps   # second-order one-sided curvature bound
    # the finite-difference error must shrink with eps
    errs = [abs((kernels.compute_K(m, x + e) - kernels.compute_K(m, x - e)) / (2 * e) - d)
            for e in (1e-2, 1e-3, 1e-4)]
    assert errs[0] > errs[1] > errs[2]


def test_M_power_law_and_ratio(table15):
    assert table15.M_at(1.0) == pytest.approx(1.0 / A, rel=1e-9)
    assert table15.M_at(1.0) / table15.M_at(4.0) == pytest.approx(2.0, rel=1e-9)
    r = table15.r
    assert np.all(np.diff(table15.M) < 0)


def test_V_inverse_roundtrip(table15):
    for r in (1e-3, 0.077, 1.0, 42.0):
        assert table15.V_inverse(table15.V_at(r)) == pytest.approx(r, rel=1e-8)


def test_V_inverse_refuses_extrapolation(table15):
    with pytest.raises(ValueError, match="outside"):
        table15.V_inverse(table15.V[-1] * 10.0)


def test_V_dilation_bracket_from_scaling(table15, stable15):
    rep = models.estimate_scaling(stable15, 1e-2, 1e2)
    lam = 2.0
    lo = np.sqrt(rep.c_low / (2 * kernels.C_PSI_BRACKET)) * lam ** (rep.alpha_low / 2)
    hi = np.sqrt(2 * rep.C_high * kernels.C_PSI_BRACKET) * lam ** (rep.alpha_high / 2)
    for r in (0.01, 0.5, 20.0):
        ratio = table15.V_at(lam * r) / table15.V_at(r)
        assert lo <= ratio <= hi


def test_table_invariants_stable(table15):
    rep = kernels.check_table_invariants(table15)
    assert rep["all_pass"], rep
    assert np.isfinite(rep["dK_through_M_constant"])


def test_table_K_matches_homogeneous_form(table15):
    xs = np.geomspace(1e-5, 1e2, 40)
    closed = K1 * xs ** (ALPHA - 1)
    assert np.max(np.abs(table15.K_at(xs) - closed) / closed) < 1e-6


def test_K_comparable_to_V_squared_over_r(table15):
    # K(x) x / V(x)^2 stays within a finite bracket below the table diameter
    xs = np.geomspace(1e-4, table15.diam, 30)
    ratio = table15.K_at(xs) * xs / table15.V_at(xs) ** 2
    assert np.all(np.isfinite(ratio)) and ratio.min() > 0
    assert ratio.max() / ratio.min() < 10.0


def test_exact_subadditivity_check(table15):
    small = kernels.build_table(table15.model, diam=1.0, points_per_decade=8,
                                span=(1e-3, 1e1))
    assert kernels.check_K_subadditivity_exact(small, n_cross=64)


def test_heat_kernel_envelope_branches(table15):
    # at the origin the time branch is active
    v0, lo, hi = kernels.heat_kernel_envelope(table15, 1.0, 0.0)
    assert v0 == pytest.approx(1.0 / table15.V_inverse(1.0), rel=1e-9)
    assert lo < v0 < hi
    # far in space the tail branch is active
    v1, _, _ = kernels.heat_kernel_envelope(table15, 1.0, 10.0)
    assert v1 == pytest.approx(1.0 / (table15.V_at(10.0) ** 2 * 10.0), rel=1e-9)


def test_heat_kernel_envelope_scaling(table15):
    # stable self-similarity: f(t, x) = lam f(lam^alpha t, lam x)
    lam = 2.0
    t, x = 0.5, 0.3
    v, _, _ = kernels.heat_kernel_envelope(table15, t, x)
    vs, _, _ = kernels.heat_kernel_envelope(table15, lam ** ALPHA * t, lam * x)
    assert v == pytest.approx(lam * vs, rel=1e-8)


def test_csv_export(tmp_path, table15):
    path = tmp_path / "k.csv"
    table15.export_csv(path, header_lines=("config=abc",))
    lines = path.read_text().splitlines()
    assert lines[0] == "# config=abc"
    assert lines[1] == "r,h,V,M,K,dK"
    assert len(lines) == 2 + len(table15.r)


def test_quadrature_failure_reports_tolerance():
    # a symbol that grows too slowly makes the compensated kernel diverge
    bad = models.custom_model(nu=lambda r: np.asarray(r) ** -1.5,
                              psi=lambda x: np.abs(np.asarray(x, dtype=float)) ** 0.5)
    with pytest.raises((kernels.KernelQuadratureError, ValueError)):
        kernels.compute_K(bad, 1.0)
