import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from qpperc.environment import golden_environment, uniform_environment
from qpperc.realization import (SpaceTimeBox, add_bond, add_death, dump_realization, empty_realization,
                                from_lines, load_realization, sample_realization)

from strategies import small_realizations

SINGLE = SpaceTimeBox((0,), 0, 0.0, 5.0)


def counts(spec, box, n, seed=3):
    out = np.empty((n, box.geometry.n_vertices), dtype=np.int64)
    for s in range(n):
        r = sample_realization(spec, box, seed, s)
        out[s] = np.diff(r.d_off)
    return out


def test_zero_length_window_is_empty():
    box = SpaceTimeBox((0, 0), 2, 1.5, 1.5)
    r = sample_realization(uniform_environment(2, 5.0, 5.0), box, 1, 1)
    assert r.n_deaths == 0 and r.n_bonds == 0


def test_determinism():
    spec = golden_environment(theta0=0.3)
    box = SpaceTimeBox.around((4,), 6, 3.0)
    assert sample_realization(spec, box, 42, 7) == sample_realization(spec, box, 42, 7)
    assert sample_realization(spec, box, 42, 7) != sample_realization(spec, box, 42, 8)
    assert sample_realization(spec, box, 42, 7) != sample_realization(spec, box, 43, 7)


def test_line_streams_do_not_depend_on_the_box():
    # the same line sampled inside two different boxes gets the same arrivals
    spec = uniform_environment(1, 1.0, 1.0)
    small = sample_realization(spec, SpaceTimeBox((0,), 1, 0.0, 4.0), 9, 2)
    big = sample_realization(spec, SpaceTimeBox((1,), 3, 0.0, 4.0), 9, 2)
    assert np.array_equal(small.deaths_at((0,)), big.deaths_at((0,)))
    assert np.array_equal(small.bonds_at((0.5,)), big.bonds_at((0.5,)))


def test_mean_count_long_window():
    box = SpaceTimeBox((0,), 0, 0.0, 1e4)
    c = counts(uniform_environment(1, 1.0, 0.0), box, 1000)[:, 0]
    se = np.sqrt(1e4 / 1000)
    assert abs(c.mean() - 1e4) < 4 * se


def test_counts_are_poisson_chi_square():
    rate, width, n = 1.3, 5.0, 10_000
    c = counts(uniform_environment(1, rate, 0.0), SINGLE, n)[:, 0]
    mu = rate * width
    edges = list(range(0, 14))
    obs = np.array([np.sum(c == k) for k in edges[:-1]] + [np.sum(c >= edges[-1])])
    pk = stats.poisson.pmf(edges[:-1], mu)
    exp = n * np.append(pk, 1 - pk.sum())
    assert stats.chisquare(obs, exp).pvalue > 1e-3


def test_gaps_are_exponential_ks():
    rate = 2.0
    r = sample_realization(uniform_environment(1, rate, 0.0), SpaceTimeBox((0,), 0, 0.0, 5200.0), 11, 0)
    gaps = np.diff(np.concatenate([[0.0], r.deaths_at((0,))]))[:10_000]
    assert gaps.size == 10_000
    assert stats.kstest(gaps, "expon", args=(0, 1 / rate)).pvalue > 1e-3


def test_lines_are_independent():
    box = SpaceTimeBox((0,), 1, 0.0, 3.0)
    c = counts(uniform_environment(1, 1.0, 0.0), box, 10_000, seed=5)
    a, b = c[:, 0].astype(float), c[:, 1].astype(float)
    cov = np.mean((a - a.mean()) * (b - b.mean()))
    se = np.std((a - a.mean()) * (b - b.mean())) / np.sqrt(len(a))
    assert abs(cov) < 4 * se


def test_rates_follow_kappa():
    # deaths at delta / kappa, bonds at kappa * lambda
    spec = uniform_environment(1, 2.0, 3.0, kappa=0.5)
    box = SpaceTimeBox((0,), 1, 0.0, 200.0)
    n_d = n_b = 0
    for s in range(50):
        r = sample_realization(spec, box, 1, s)
        n_d += r.n_deaths
        n_b += r.n_bonds
    assert abs(n_d / (50 * 3 * 200) - 4.0) < 4 * np.sqrt(4.0 / (50 * 3 * 200))
    assert abs(n_b / (50 * 2 * 200) - 1.5) < 4 * np.sqrt(1.5 / (50 * 2 * 200))


def test_arrivals_inside_open_window_and_sorted():
    spec = uniform_environment(2, 3.0, 3.0)
    box = SpaceTimeBox.around((0, 0), 2, 1.0)
    for s in range(20):
        r = sample_realization(spec, box, 0, s)
        for times, off in ((r.d_times, r.d_off), (r.b_times, r.b_off)):
            assert np.all((times > box.t_lo) & (times < box.t_hi))
            for k in range(len(off) - 1):
                assert np.all(np.diff(times[off[k]:off[k + 1]]) > 0)


# -- mutations ----------------------------------------------------------------

def test_add_bond_examples():
    box = SpaceTimeBox((0,), 1, 0.0, 1.0)
    r = empty_realization(box)
    r1 = add_bond(r, (0.5,), 0.3)
    assert r1.bonds_at((0.5,)).tolist() == [0.3]
    assert r.n_bonds == 0
    r2 = from_lines(box, bonds={(0.5,): [0.2, 0.9]})
    assert add_bond(r2, (0.5,), 0.5).bonds_at((0.5,)).tolist() == [0.2, 0.5, 0.9]
    assert add_bond(r2, ((0,), 0), 0.5) == add_bond(r2, (0.5,), 0.5)


def test_add_death_examples():
    box = SpaceTimeBox((0,), 1, 0.0, 1.0)
    assert add_death(empty_realization(box), (1,), 0.4).deaths_at((1,)).tolist() == [0.4]
    r = from_lines(box, deaths={(1,): [0.2, 0.9]})
    assert add_death(r, (1,), 0.5).deaths_at((1,)).tolist() == [0.2, 0.5, 0.9]


def test_mutation_errors():
    box = SpaceTimeBox((0,), 1, 0.0, 1.0)
    r = from_lines(box, deaths={(0,): [0.2]}, bonds={(0.5,): [0.7]})
    for bad in (0.2, 0.7, 0.0, 1.0, 1.5):
        with pytest.raises(ValueError):
            add_bond(r, (-0.5,), bad)
        with pytest.raises(ValueError):
            add_death(r, (1,), bad)
    with pytest.raises(ValueError):
        add_bond(r, (1.5,), 0.5)
    with pytest.raises(ValueError):
        add_death(r, (2,), 0.5)


def test_invalid_realizations_rejected():
    box = SpaceTimeBox((0,), 1, 0.0, 1.0)
    with pytest.raises(ValueError):
        from_lines(box, deaths={(0,): [0.5, 0.5]})
    with pytest.raises(ValueError):
        from_lines(box, deaths={(0,): [1.0]})
    with pytest.raises(ValueError):
        from_lines(box, deaths={(0,): [0.5]}, bonds={(0.5,): [0.5]})
    with pytest.raises(ValueError):
        SpaceTimeBox((0,), 1, 1.0, 0.0)
    with pytest.raises(ValueError):
        SpaceTimeBox((0,), -1, 0.0, 1.0)


def test_realizations_are_read_only():
    r = sample_realization(uniform_environment(1, 1.0, 1.0), SpaceTimeBox((0,), 1, 0.0, 5.0), 0, 0)
    with pytest.raises(ValueError):
        r.d_times[:] = 0.0


# -- dump format ----------------------------------------------------------------

@settings(max_examples=40)
@given(small_realizations())
def test_dump_round_trip(r):
    text = dump_realization(r)
    assert text.startswith("# qpperc realization v1\n")
    assert load_realization(text) == r


def test_dump_round_trip_sampled(tmp_path):
    spec = golden_environment(theta0=0.2)
    r = sample_realization(spec, SpaceTimeBox.around((3,), 4, 2.5, t=1.0), 123, 4)
    path = tmp_path / "r.txt"
    dump_realization(r, path)
    assert load_realization(path) == r
    lines = path.read_text().splitlines()
    assert sum(line.startswith("D ") for line in lines) == r.n_deaths
    assert sum(line.startswith("B ") for line in lines) == r.n_bonds


def test_load_rejects_garbage():
    with pytest.raises(ValueError):
        load_realization("# qpperc realization v1\nX 0 0.5\n")
    with pytest.raises(ValueError):
        load_realization("D 0 0.5\n")


@given(st.integers(0, 2 ** 64 - 1), st.integers(0, 2 ** 64 - 1))
@settings(max_examples=20)
def test_any_unsigned_seed_and_trial(seed, trial):
    r = sample_realization(uniform_environment(1, 1.0, 1.0), SpaceTimeBox((0,), 1, 0.0, 2.0), seed, trial)
    assert r == sample_realization(uniform_environment(1, 1.0, 1.0), SpaceTimeBox((0,), 1, 0.0, 2.0), seed, trial)
