import math

import numpy as np
import pytest

from qwalk3.limit import LimitDensityModel
from qwalk3.measurement import default_peak_cutoff, distribution, gap_mass, moment, windowed_average
from qwalk3.walk import GROVER_THETA, CoinParameters, InitialState, Schedule, evolve, initial_walk_state

GAP_THETA = 5 * math.pi / 6


def test_distribution_at_time_zero():
    d = distribution(initial_walk_state(InitialState(0.6, 0.8j, 0)))
    assert d.time == 0
    assert d.as_dict() == pytest.approx({0: 1.0})


def test_distribution_after_one_step():
    p = CoinParameters(2.0)
    d = distribution(evolve(InitialState(0, 1, 0), p, Schedule.SKIP_AT_2, 1))
    assert d.as_dict() == pytest.approx({-1: p.s**2 / 2, 0: p.c**2, 1: p.s**2 / 2}, abs=1e-15)


@pytest.mark.parametrize("schedule", list(Schedule))
def test_probabilities_valid(schedule):
    d = distribution(evolve(InitialState(0.6, -0.48j, 0.64), CoinParameters(4.0), schedule, 200))
    assert np.all(d.probs >= 0) and np.all(d.probs <= 1)
    assert abs(d.total() - 1) < 1e-10
    assert 0.0 not in d.as_dict().values()


def test_moment_zero_is_one():
    d = distribution(evolve(InitialState.uniform(), CoinParameters(1.0), Schedule.SKIP_AT_2, 40))
    assert moment(d, 0) == pytest.approx(1, abs=1e-12)
    assert moment(d, 0, rescaled=True) == pytest.approx(1, abs=1e-12)


def test_rescaled_moment_at_time_zero():
    d = distribution(initial_walk_state(InitialState.uniform()))
    assert moment(d, 0, rescaled=True) == 1.0
    assert moment(d, 1, rescaled=True) == 0.0
    assert moment(d, 2, rescaled=True) == 0.0


def test_rescaled_moment_matches_brute_force():
    d = distribution(evolve(InitialState.uniform(), CoinParameters(2.4), Schedule.SKIP_AT_2, 60))
    brute = sum((x / 60) ** 3 * p for x, p in d.as_dict().items())
    assert moment(d, 3, rescaled=True) == pytest.approx(brute, rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("theta", [GROVER_THETA, GAP_THETA, 0.9, 4.4])
def test_mirror_symmetry_for_coin_zero_start(theta):
    p = CoinParameters(theta)
    for t in (1, 2, 3, 17, 100):
        d = distribution(evolve(InitialState(0, 1, 0), p, Schedule.SKIP_AT_2, t))
        for x in range(1, t + 1):
            assert abs(d[x] - d[-x]) < 1e-12
        for r in (1, 3, 5):
            assert abs(moment(d, r, rescaled=True)) < 1e-10


def test_second_moment_near_limit():
    p = CoinParameters.grover()
    init = InitialState.uniform()
    d = distribution(evolve(init, p, Schedule.SKIP_AT_2, 3000))
    limit = LimitDensityModel(p, init).continuous_moment(2)
    assert abs(moment(d, 2, rescaled=True) - limit) < 2e-2


class TestGapMass:
    def test_window_interior_is_empty(self):
        p = CoinParameters(GAP_THETA)
        d = distribution(evolve(InitialState.uniform(), p, Schedule.SKIP_AT_2, 500))
        rep = gap_mass(d, p, x_min=50)
        edge = -(1 + 2 * p.c) / 3
        assert rep.window == pytest.approx((-edge, edge))
        assert rep.window[1] == pytest.approx(0.2440169, abs=1e-7)
        # whatever sits in the full window is the edge tail of the ballistic peak
        interior = gap_mass(d, p, x_min=50, edge_margin=0.2)
        assert interior.mass < 1e-3
        edge_layer = sum(d[x] for x in range(-500, 501) if 0.8 * edge * 500 <= abs(x) < edge * 500)
        assert rep.mass == pytest.approx(interior.mass + edge_layer, abs=1e-15)

    def test_mass_is_brute_force_sum(self):
        p = CoinParameters(2.3)
        d = distribution(evolve(InitialState(0, 1, 0), p, Schedule.SKIP_AT_2, 90))
        edge = -(1 + 2 * p.c) / 3
        brute = sum(d[x] for x in range(-90, 91) if abs(x) >= 5 and abs(x) / 90 < edge)
        assert gap_mass(d, p, x_min=5).mass == pytest.approx(brute, rel=1e-12, abs=1e-300)

    def test_empty_window_without_gap(self):
        p = CoinParameters.grover()
        d = distribution(evolve(InitialState.uniform(), p, Schedule.SKIP_AT_2, 300))
        rep = gap_mass(d, p, x_min=20)
        assert rep.mass == 0.0

    def test_rejects_time_zero(self):
        p = CoinParameters(GAP_THETA)
        with pytest.raises(ValueError):
            gap_mass(distribution(initial_walk_state(InitialState.uniform())), p, x_min=1)

    def test_rejects_small_time(self):
        p = CoinParameters(GAP_THETA)
        d = distribution(evolve(InitialState.uniform(), p, Schedule.SKIP_AT_2, 20))
        with pytest.raises(ValueError):
            gap_mass(d, p, x_min=10)

    @pytest.mark.parametrize("theta", [GAP_THETA, 2.3, 3.6])
    def test_gap_emerges(self, theta):
        p = CoinParameters(theta)
        masses = []
        for t in (150, 300, 600):
            d = distribution(evolve(InitialState.uniform(), p, Schedule.SKIP_AT_2, t))
            masses.append(gap_mass(d, p, x_min=default_peak_cutoff(t), edge_margin=0.2).mass)
        assert masses[1] <= masses[0] + 1e-4
        assert masses[2] <= masses[1] + 1e-4
        assert masses[2] < 1e-4

    def test_margin_validated(self):
        p = CoinParameters(GAP_THETA)
        d = distribution(evolve(InitialState.uniform(), p, Schedule.SKIP_AT_2, 300))
        with pytest.raises(ValueError):
            gap_mass(d, p, x_min=10, edge_margin=1.0)


def test_default_cutoff():
    assert default_peak_cutoff(500) == math.ceil(500**0.6)


def test_windowed_average():
    v = np.arange(15, dtype=float)
    w = windowed_average(v, 5)
    assert np.all(np.isnan(w[:2])) and np.all(np.isnan(w[-2:]))
    np.testing.assert_allclose(w[2:-2], v[2:-2])
    with pytest.raises(ValueError):
        windowed_average(v, 4)
