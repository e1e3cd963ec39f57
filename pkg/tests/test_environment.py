import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qpperc.environment import (GOLDEN, DegenerateFieldError, EnvironmentSpec, SamplingFunction, TorusPoint,
                                admissibility_ratios, bond_rate, death_rate, diophantine_certificate,
                                field_spec, golden_environment, local_density, scan_resonances, shift,
                                torus_distance, uniform_environment)
from qpperc.lattice import l1_ball

unit = st.floats(0, 1, exclude_max=True, allow_nan=False)


def one_d(h0, h1, theta0=0.0, theta1=0.0, kappa=1.0):
    return EnvironmentSpec(1, (field_spec([[GOLDEN]], theta0, h0), field_spec([[GOLDEN]], theta1, h1)), kappa)


DIST_HALF = SamplingFunction.power_product([((0.5,), 1.0)])


# -- torus ------------------------------------------------------------------

def test_torus_distance_examples():
    assert torus_distance(TorusPoint((0.2,)), TorusPoint((0.9,))) == pytest.approx(0.3)
    assert torus_distance(TorusPoint((0.37,)), TorusPoint((0.37,))) == 0.0
    assert torus_distance(TorusPoint((0.1, 0.5)), TorusPoint((0.9, 0.6))) == pytest.approx(0.2)


def test_torus_distance_rejects_dimension_mismatch():
    with pytest.raises(ValueError):
        torus_distance(TorusPoint((0.1,)), TorusPoint((0.1, 0.2)))


def test_torus_point_reduces_mod_one():
    assert TorusPoint((1.25, -0.25)).coords == (0.25, 0.75)
    assert TorusPoint((-1e-18,)).coords == (0.0,)


@given(st.lists(unit, min_size=2, max_size=2), st.lists(unit, min_size=2, max_size=2),
       st.lists(unit, min_size=2, max_size=2))
def test_torus_metric_axioms(a, b, c):
    dab = torus_distance(a, b)
    assert dab == torus_distance(b, a)
    assert 0 <= dab <= 0.5
    assert dab <= torus_distance(a, c) + torus_distance(c, b) + 1e-12


# -- fields -----------------------------------------------------------------

def test_shift_examples():
    spec = one_d(DIST_HALF, DIST_HALF)
    assert shift(spec, 0, [1]).coords[0] == pytest.approx(0.6180339887, abs=1e-10)
    assert shift(spec, 0, [0]).coords == (0.0,)
    assert shift(spec, 0, [2]).coords[0] == pytest.approx(0.2360679775, abs=1e-10)
    with pytest.raises(IndexError):
        shift(spec, 2, [0])


def test_death_rate_examples():
    spec = one_d(DIST_HALF, DIST_HALF)
    assert death_rate(spec, [0]) == 0.5
    assert death_rate(spec, [1]) == pytest.approx(0.1180339887, abs=1e-10)
    const = one_d(SamplingFunction.constant(3.5), DIST_HALF)
    assert {death_rate(const, [x]) for x in range(-5, 6)} == {3.5}


def test_bond_rate_examples():
    assert bond_rate(one_d(DIST_HALF, SamplingFunction.constant(2.0)), [7.5]) == 0.5
    spec = one_d(DIST_HALF, DIST_HALF)
    assert bond_rate(spec, [0.5]) == pytest.approx(2.0)
    assert bond_rate(spec, [1.5]) == pytest.approx(8.472136, abs=1e-6)


def test_exact_zero_is_reported():
    spec = one_d(SamplingFunction.power_product([((0.0,), 1.0)]), DIST_HALF)
    with pytest.raises(DegenerateFieldError):
        death_rate(spec, [0])
    spec = one_d(DIST_HALF, SamplingFunction.power_product([((0.0,), 1.0)]))
    with pytest.raises(DegenerateFieldError):
        bond_rate(spec, [0.5])


def test_field_evaluation_is_bitwise_deterministic():
    spec = golden_environment(theta0=0.123, theta1=0.456)
    a = [death_rate(spec, [x]) for x in range(-50, 50)]
    b = [death_rate(spec, [x]) for x in range(-50, 50)]
    assert a == b


def test_zero_counts_and_R():
    spec = golden_environment()
    assert (spec.R_v, spec.R_e, spec.R) == (1, 1, 2)
    assert uniform_environment(2, 1.0, 1.0).R == 2
    h = SamplingFunction.power_product([((0.1,), 0.5), ((0.7,), 0.5)])
    spec = one_d(h, h)
    assert (spec.R_v, spec.R_e, spec.R) == (2, 2, 4)


def test_uniform_lambda_zero_switches_bonds_off():
    spec = uniform_environment(1, 1.0, 0.0)
    assert bond_rate(spec, [0.5]) == 0.0


def test_local_density_examples():
    assert local_density(uniform_environment(1, 1.0, 1.0), [0]) == (1.0, 1.0)
    assert local_density(uniform_environment(2, 2.0, 1.0, kappa=2.0), [0, 0]) == (2.0, 2.0)
    # delta_0 = 0.5, incident lambdas 2.0 (edge 1/2) and 1/d(-phi, 1/2) = 8.472136 (edge -1/2)
    spec = one_d(DIST_HALF, DIST_HALF, kappa=0.1)
    hi, lo = local_density(spec, [0])
    assert hi == pytest.approx(0.16944272, rel=1e-7)
    assert lo == pytest.approx(0.04, rel=1e-12)


def test_admissibility():
    h = SamplingFunction.power_product([((0.3,), 0.7)])
    assert h.admissible(1.0)
    assert not h.admissible(0.7)
    assert SamplingFunction.constant(2.0).admissible(0.1)


@pytest.mark.parametrize("sigma_j", [0.3, 0.9, 2.5])
def test_log_ratio_converges_to_zero_exponent(sigma_j):
    h = SamplingFunction.power_product([((0.25,), sigma_j), ((0.8,), 1.3)], level=1.7)
    ratios = admissibility_ratios(h, 0, 10.0 ** -np.arange(1, 9))
    # the other factor and the level contribute O(1 / |log d|)
    other = abs(math.log(1.7 * torus_distance((0.8,), (0.25,)) ** 1.3))
    assert abs(ratios[-1] - sigma_j) <= other / (8 * math.log(10)) + 1e-3
    assert np.all(np.diff(np.abs(ratios - sigma_j)) <= 1e-12)


def test_sampling_function_validation():
    with pytest.raises(ValueError):
        SamplingFunction("gaussian", 1.0)
    with pytest.raises(ValueError):
        SamplingFunction.constant(0.0)
    with pytest.raises(ValueError):
        SamplingFunction.power_product([((0.1,), -1.0)])


# -- Diophantine certificate ------------------------------------------------

def test_rational_matrix_has_zero_certificate():
    c, w = diophantine_certificate([[0.5]], 1.0, 5)
    assert c == 0.0 and w == (2,)


@pytest.mark.parametrize("zeta", [1.0, 2.0])
def test_golden_certificate(zeta):
    c, w = diophantine_certificate([[GOLDEN]], zeta, 100)
    assert c == pytest.approx(0.3819660113, abs=1e-10)
    assert w == (1,)


def test_certificate_matches_brute_force():
    M = np.array([[0.3217, 0.7713], [0.1414, 0.5291]])
    best = math.inf
    for x in l1_ball((0, 0), 6).tolist():
        n = sum(map(abs, x))
        if n == 0:
            continue
        y = M @ np.array(x)
        dist = max(min(v % 1.0, 1 - v % 1.0) for v in y)
        best = min(best, dist * n ** 1.5)
    assert diophantine_certificate(M, 1.5, 6).c_hat == pytest.approx(best, rel=1e-12)


@given(st.floats(0.01, 0.99), st.floats(0.5, 3.0))
def test_certificate_non_increasing_in_radius(a, zeta):
    vals = [diophantine_certificate([[a]], zeta, n).c_hat for n in range(1, 30, 4)]
    assert all(x >= y for x, y in zip(vals, vals[1:]))


# -- resonance scan ---------------------------------------------------------

def naive_scan(spec, center, L, eps):
    sites, edges = [], []
    for x in range(center - L, center + L + 1):
        if death_rate(spec, [x]) < eps:
            sites.append((x,))
        if abs(x + 0.5 - center) <= L and bond_rate(spec, [x + 0.5]) > 1 / eps:
            edges.append((x + 0.5,))
    return sites, edges


def test_uniform_field_is_never_resonant():
    rep = scan_resonances(uniform_environment(2, 0.5, 1 / 0.7), (0, 0), 5, 0.4)
    assert not rep.is_resonant and rep.rows() == []


def test_golden_block_without_resonance():
    rep = scan_resonances(one_d(DIST_HALF, DIST_HALF), (0,), 10, 0.001)
    assert rep.resonant_sites == []


@given(st.integers(-1000, 1000), st.integers(1, 40), st.floats(0.01, 0.5))
def test_scan_equals_naive_filter(center, L, eps):
    spec = golden_environment(theta0=0.17, theta1=0.61)
    rep = scan_resonances(spec, (center,), L, eps)
    sites, edges = naive_scan(spec, center, L, eps)
    assert rep.resonant_sites == sites
    assert rep.resonant_edges == edges
    assert all(abs(s[0] - center) <= L for s in rep.resonant_sites)
    assert all(abs(u[0] - center) <= L for u in rep.resonant_edges)


def test_scan_rows_layout():
    spec = golden_environment()
    rep = scan_resonances(spec, (0,), 30, 0.2)
    rows = rep.rows()
    assert rows and all(r[0] in ("site", "edge") and r[-1] == 0.2 for r in rows)
    assert len(rows) == len(rep.resonant_sites) + len(rep.resonant_edges)


def test_scan_two_dimensional():
    fields = (field_spec([[GOLDEN, 0.4142135623730951]], 0.1, DIST_HALF),
              field_spec([[0.7320508075688772, GOLDEN]], 0.2, DIST_HALF),
              field_spec([[0.2360679774997898, 0.3166247903554]], 0.3, DIST_HALF))
    spec = EnvironmentSpec(2, fields, 1.0)
    rep = scan_resonances(spec, (1, -1), 6, 0.05)
    for s, rate in zip(rep.resonant_sites, rep.site_rates):
        assert rate == death_rate(spec, s) < 0.05
    for u, rate in zip(rep.resonant_edges, rep.edge_rates):
        assert rate == bond_rate(spec, u) > 20
    n_sites = sum(death_rate(spec, v) < 0.05 for v in l1_ball((1, -1), 6).tolist())
    assert len(rep.resonant_sites) == n_sites


def test_scan_validates_arguments():
    spec = golden_environment()
    with pytest.raises(ValueError):
        scan_resonances(spec, (0,), 5, 1.5)
    with pytest.raises(ValueError):
        scan_resonances(spec, (0,), -1, 0.1)


def test_environment_validation():
    h = SamplingFunction.constant(1.0)
    with pytest.raises(ValueError):
        EnvironmentSpec(1, (field_spec([[GOLDEN]], 0, h),), 1.0)
    with pytest.raises(ValueError):
        EnvironmentSpec(1, (field_spec([[GOLDEN]], 0, h), field_spec([[GOLDEN]], 0, h)), 0.0)
