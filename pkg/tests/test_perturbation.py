import numpy as np
import pytest

from levygreen import green, perturbation as pert, stable
from levygreen.geometry import interval_union
from levygreen.kato import DriftField, constant_drift, sin_drift

ALPHA = 1.5


@pytest.fixture(scope="module")
def grid200(unit_interval):
    return pert.build_grid(unit_interval, 200, ALPHA)


@pytest.fixture(scope="module")
def disc200(oracle15, grid200):
    return pert.discretize_green(oracle15, grid200)


def test_grid_invariants(grid200, unit_interval):
    assert np.all(grid200.weights > 0)
    assert grid200.weights.sum() == pytest.approx(unit_interval.total_length, rel=1e-12)
    assert np.all(unit_interval.contains(grid200.nodes))
    assert len(np.unique(grid200.nodes)) == grid200.n


def test_grid_two_interval(two_interval):
    g = pert.build_grid(two_interval, 120, ALPHA)
    assert g.weights.sum() == pytest.approx(two_interval.total_length, rel=1e-12)
    assert np.all(two_interval.contains(g.nodes))


def test_green_matrix_symmetric(disc200):
    Gmat, _ = disc200
    assert np.max(np.abs(Gmat - Gmat.T)) == 0.0


def test_row_sums_equal_exit_time(oracle15, unit_interval):
    # quadrature of every Green row reproduces the mean exit time; the
    # acceptance-size grid is what reaches the stated tolerance
    grid = pert.build_grid(unit_interval, 400, ALPHA)
    Gmat, _ = pert.discretize_green(oracle15, grid)
    rows = Gmat @ grid.weights
    closed = stable.mean_exit_time(ALPHA, (-1, 1), grid.nodes)
    assert np.max(np.abs(rows - closed) / closed) < 1e-3


def test_derivative_matrix_reflection_antisymmetry(grid200, disc200):
    # under the mirror map the derivative kernel flips sign
    _, dG = disc200
    flipped = -dG[::-1, ::-1]
    off = ~np.eye(grid200.n, dtype=bool)
    assert np.max(np.abs(dG - flipped)[off]) < 1e-10


def test_zero_drift_returns_unperturbed(oracle15, grid200):
    pg = pert.solve_perturbed(oracle15, constant_drift(0.0), grid200)
    assert np.array_equal(pg.matrix, pg.unperturbed)
    rep = pert.comparability_report(pg)
    assert rep.constant == 1.0


def test_modes_agree(oracle15):
    D = interval_union((-0.15, 0.15))
    G = green.stable_oracle(ALPHA, D)
    grid = pert.build_grid(D, 160, ALPHA)
    b = constant_drift(1.0)
    pgd = pert.solve_perturbed(G, b, grid, mode="direct")
    pgf = pert.solve_perturbed(G, b, grid, mode="fixed_point")
    assert pgf.converged
    assert np.max(np.abs(pgd.matrix - pgf.matrix)) < 1e-8
    assert pgd.residual < 1e-8 and pgf.residual < 1e-6


def test_fixed_point_trace_contracts(oracle15):
    D = interval_union((-0.15, 0.15))
    G = green.stable_oracle(ALPHA, D)
    grid = pert.build_grid(D, 120, ALPHA)
    pg = pert.solve_perturbed(G, constant_drift(1.0), grid, mode="fixed_point")
    assert pg.kappa_disc < 1.0
    tr = pg.trace
    assert all(t2 <= pg.kappa_disc * t1 * (1 + 1e-9)
               for t1, t2 in zip(tr, tr[1:]))


def test_fixed_point_refuses_strong_interaction(oracle15, grid200):
    pg = pert.solve_perturbed(oracle15, constant_drift(1.0), grid200, mode="direct")
    assert pg.kappa_disc >= 1.0
    with pytest.raises(ValueError, match="refused"):
        pert.solve_perturbed(oracle15, constant_drift(1.0), grid200, mode="fixed_point")


def test_reflection_equivariance_even_drift(oracle15, grid200):
    # mirror symmetry maps an even drift to its negative
    bev = DriftField(lambda z: np.cos(3.0 * np.asarray(z, dtype=float)), "bounded-smooth")
    bneg = DriftField(lambda z: -np.cos(3.0 * np.asarray(z, dtype=float)), "bounded-smooth")
    p1 = pert.solve_perturbed(oracle15, bev, grid200)
    p2 = pert.solve_perturbed(oracle15, bneg, grid200)
    assert np.max(np.abs(p1.matrix - p2.matrix[::-1, ::-1])) < 1e-8


def test_reflection_self_symmetry_odd_drift(oracle15, grid200):
    pg = pert.solve_perturbed(oracle15, sin_drift(1.0, 5.0), grid200)
    assert np.max(np.abs(pg.matrix - pg.matrix[::-1, ::-1])) < 1e-8


def test_solution_refines_at_quadrature_order(oracle15, unit_interval):
    b = sin_drift(1.0, 5.0)
    probes = np.array([-0.61, -0.13, 0.27, 0.55])
    sols = {}
    for n in (100, 200, 400):
        grid = pert.build_grid(unit_interval, n, ALPHA)
        pg = pert.solve_perturbed(oracle15, b, grid)
        row = pg.row(0.31)
        sols[n] = np.interp(probes, grid.nodes, row)
    e1 = np.max(np.abs(sols[100] - sols[400]))
    e2 = np.max(np.abs(sols[200] - sols[400]))
    assert e2 < e1 / 1.5


def test_row_solve_matches_matrix(oracle15, grid200):
    pg = pert.solve_perturbed(oracle15, sin_drift(1.0, 5.0), grid200)
    k = 57
    row = pg.row(float(grid200.nodes[k]))
    assert np.max(np.abs(row - pg.matrix[k])) < 1e-10


def test_comparability_report_fields(oracle15, grid200):
    pg = pert.solve_perturbed(oracle15, sin_drift(1.0, 5.0), grid200)
    rep = pert.comparability_report(pg)
    assert rep.inf <= 1.0 <= rep.sup or rep.inf > 0
    assert rep.constant >= max(rep.sup, 1.0 / rep.inf) - 1e-12
    assert sum(rep.hist_counts) == grid200.n ** 2
    d = rep.to_dict()
    assert set(d) >= {"sup", "inf", "constant", "kappa_disc", "mode"}


def test_find_epsilon_zero_drift_returns_max(oracle15):
    eps = pert.find_epsilon(lambda s: interval_union((-s / 2, s / 2)),
                            constant_drift(0.0),
                            lambda dom: green.stable_oracle(ALPHA, dom),
                            s_max=0.8)
    assert eps == 0.8


def test_find_epsilon_bisection_and_drift_monotonicity():
    builder = lambda dom: green.stable_oracle(ALPHA, dom)
    family = lambda s: interval_union((-s / 2, s / 2))
    e1 = pert.find_epsilon(family, constant_drift(1.0), builder, n_grid=8)
    e2 = pert.find_epsilon(family, constant_drift(2.0), builder, n_grid=8)
    assert 0 < e2 <= 0.5 * e1
    # the located scale keeps the interaction bound under the threshold
    k = green.kappa_sup(builder(family(e1)), constant_drift(1.0), n_grid=8)
    assert k < 1.0 / 3.0


def test_find_epsilon_unreachable_reports_failure():
    builder = lambda dom: green.stable_oracle(ALPHA, dom)
    family = lambda s: interval_union((-s / 2, s / 2))
    with pytest.raises(ValueError, match="above"):
        pert.find_epsilon(family, constant_drift(200.0), builder,
                          s_min=0.5, s_max=1.0, n_grid=6)


def test_small_domain_two_sided_bounds():
    # interaction bound below 1/3 forces ratios into [1/2, 3/2]
    builder = lambda dom: green.stable_oracle(ALPHA, dom)
    family = lambda s: interval_union((-s / 2, s / 2))
    b = constant_drift(1.0)
    eps = pert.find_epsilon(family, b, builder, n_grid=8)
    D = family(eps)
    grid = pert.build_grid(D, 200, ALPHA)
    pg = pert.solve_perturbed(builder(D), b, grid)
    rep = pert.comparability_report(pg)
    assert rep.inf >= 0.5 + 1e-3
    assert rep.sup <= 1.5 - 1e-3


def test_perturbed_poisson_zero_drift_matches(oracle15, grid200):
    pg = pert.solve_perturbed(oracle15, constant_drift(0.0), grid200)
    for z in (1.2, -1.7, 3.0):
        assert pert.perturbed_poisson(pg, 0.3, z) == pytest.approx(
            green.poisson_kernel(oracle15, 0.3, z), rel=2e-3)


def test_perturbed_poisson_mass_and_positivity(oracle15, grid200):
    pg = pert.solve_perturbed(oracle15, sin_drift(1.0, 5.0), grid200)
    zs = np.array([1.05, 1.5, 3.0, -1.2, -6.0])
    assert np.all(pert.perturbed_poisson(pg, 0.0, zs) > 0)
    assert pert.perturbed_poisson_mass(pg, 0.0) == pytest.approx(1.0, abs=1e-2)
    with pytest.raises(ValueError):
        pert.perturbed_poisson(pg, 0.0, 0.5)


def test_perturbed_poisson_small_domain_comparable():
    # in the small-domain regime the perturbed exit density stays within the
    # two-sided Green bracket of the unperturbed one
    D = interval_union((-0.02, 0.02))
    G = green.stable_oracle(ALPHA, D)
    grid = pert.build_grid(D, 160, ALPHA)
    pg = pert.solve_perturbed(G, constant_drift(1.0), grid)
    assert pg.kappa_disc < 1.0 / 3.0
    for z in (0.03, 0.1, -0.5):
        ratio = pert.perturbed_poisson(pg, 0.0, z) / green.poisson_kernel(G, 0.0, z)
        assert 0.5 - 1e-3 <= ratio <= 1.5 + 1e-3
