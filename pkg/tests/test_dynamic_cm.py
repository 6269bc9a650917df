"""Unit tests for the dynamical configuration model and its forecasts."""

import math

import numpy as np
import pytest

from cmgel import dynamic_cm, graphs
from cmgel.dynamic_cm import (
    Theta,
    activation_time_for_arms,
    gelation_predictions,
    rho_t_pgf,
    simulate_dcm,
)
from cmgel.measures import from_dict, point_mass, poisson


class TestSimulateDcm:
    def test_no_arms_no_events(self):
        run = simulate_dcm(Theta(5, point_mass(0)), 3, ("t_max", 2.0), np.random.default_rng(0))
        assert run.stop_reason == "time"
        assert run.activated_total == 0
        assert run.sigma is None

    def test_two_vertices_one_link(self):
        run = simulate_dcm(Theta(2, point_mass(1)), 10, ("t_max", 50.0), np.random.default_rng(0))
        assert len(run.raw.bind_u) == 1
        assert run.raw.labels[0] == run.raw.labels[1]

    def test_alpha_validation(self):
        with pytest.raises(ValueError):
            simulate_dcm(Theta(4, point_mass(1)), 1, "first_gel", np.random.default_rng(0))

    def test_unreachable_b_target(self):
        with pytest.raises(ValueError):
            simulate_dcm(Theta(2, point_mass(1)), 2, ("B_target", 5), np.random.default_rng(0))

    def test_gel_size_bound(self):
        for seed in range(5):
            run = simulate_dcm(
                Theta(3000, poisson(2.0)), 100, "first_gel", np.random.default_rng(seed)
            )
            assert run.stop_reason == "gel"
            assert 100 <= run.gel_component["size"] <= 199
            assert run.solution_after["S"] + run.gel_component["size"] == 3000

    def test_first_gel_time_near_limit(self):
        sigmas = []
        for seed in range(10):
            run = simulate_dcm(
                Theta(100_000, poisson(2.0)), 10_000, "first_gel", np.random.default_rng(seed)
            )
            sigmas.append(run.sigma)
        pred = gelation_predictions(Theta(100_000, poisson(2.0)), 10_000)["sigma"]
        # Prop-style band: limit .. limit + 3x the first-order correction
        lo = math.log(2)
        hi = math.log(2) + 3 * (pred - math.log(2))
        inside = sum(lo <= s <= hi for s in sigmas)
        assert inside >= 9

    def test_b_nondecreasing_in_t(self):
        theta = Theta(2000, poisson(2.0))
        prev = -1
        for t in (0.2, 0.5, 1.0, 2.0):
            run = simulate_dcm(theta, 10**6, ("t_max", t), np.random.default_rng(9))
            b = int(run.raw.k_act.sum())
            assert b >= prev
            prev = b

    def test_matches_percolation_in_distribution(self):
        # at fixed t the DCM graph is a percolated CM with p = 1 - e^{-t};
        # compare component-size histograms on a tiny instance
        degrees = [1, 2, 2, 1]
        t = 0.8
        p = 1 - math.exp(-t)
        n_rep = 20_000
        mu = from_dict({1: 0.5, 2: 0.5})
        rng = np.random.default_rng(5)
        dcm_counts = np.zeros(5)
        perc_counts = np.zeros(5)
        theta = Theta(4, mu)
        for _ in range(n_rep):
            run = simulate_dcm(theta, 10, ("t_max", t), rng)
            labels = run.raw.labels
            comp_sizes = np.bincount(labels)
            comp_sizes = comp_sizes[comp_sizes > 0]
            sizes = np.bincount(comp_sizes)
            dcm_counts[: len(sizes)] += sizes
            stats = graphs.components(graphs.sample_percolated(degrees, p, rng))
            for s in stats.sizes:
                perc_counts[s] += 1
        tot = dcm_counts[1:].sum()
        for s in range(1, 5):
            frac = perc_counts[s] / perc_counts[1:].sum()
            sigma = math.sqrt(max(tot * frac * (1 - frac), 1.0))
            assert abs(dcm_counts[s] - tot * frac) <= 4 * sigma, s

    def test_gel_degree_census(self):
        # degree profile of the first large component tracks alpha k mu(k)/m1
        theta = Theta(1_000_000, poisson(2.0))
        alpha = 100_000
        run = simulate_dcm(theta, alpha, "first_gel", np.random.default_rng(12))
        pred = gelation_predictions(theta, alpha)["gel_degree_gf"]
        v_k = {}
        for (k, r), c in run.gel_component["v_kr"].items():
            v_k[r] = v_k.get(r, 0) + c
        # the leading-order profile carries an O(alpha/n) = 0.1 composition
        # correction, so a 10% band is the honest tolerance here
        for r in range(1, 7):
            assert v_k.get(r, 0) == pytest.approx(pred[r], rel=0.10), r

    def test_post_gel_resample_has_no_large_component(self):
        # re-pairing the post-gel solution state rarely recreates a large cluster
        theta = Theta(20_000, poisson(2.0))
        alpha = 2_000
        big = 0
        for seed in range(20):
            run = simulate_dcm(theta, alpha, "first_gel", np.random.default_rng(seed))
            sol = run.solution_after
            degrees = graphs.realize_degrees(sol["S"], sol["mu_bar"])
            b = min(sol["B"], int(degrees.sum()))
            pairing = graphs.sample_arm_subset_pairing(degrees, b, np.random.default_rng(seed + 999))
            if graphs.components(pairing).sizes[0] >= alpha:
                big += 1
        assert big <= 1


class TestForecasts:
    def test_activation_time_examples(self):
        theta = Theta(1000, point_mass(2))
        assert activation_time_for_arms(theta, 0) == 0.0
        assert activation_time_for_arms(theta, 1000) == pytest.approx(math.log(2), abs=1e-12)
        with pytest.raises(ValueError):
            activation_time_for_arms(theta, 2000)

    def test_activation_time_empirical(self):
        theta = Theta(1_000_000, poisson(2.0))
        target = activation_time_for_arms(theta, 1_000_000)
        hits = []
        for seed in range(10):
            run = simulate_dcm(theta, 10**7, ("B_target", 1_000_000), np.random.default_rng(seed))
            hits.append(run.stop_time)
        assert abs(np.median(hits) - target) < 0.01

    def test_rho_pgf(self):
        assert rho_t_pgf(poisson(2.0), 0.0, 0.3) == pytest.approx(1.0)
        assert rho_t_pgf(point_mass(2), math.log(2), 0.0) == pytest.approx(0.25)
        assert rho_t_pgf(poisson(2.0), 50.0, 0.4) == pytest.approx(poisson(2.0).pgf(0.4), abs=1e-9)
        with pytest.raises(ValueError):
            rho_t_pgf(poisson(2.0), -1.0, 0.5)
        with pytest.raises(ValueError):
            rho_t_pgf(poisson(2.0), 1.0, 1.5)

    def test_gelation_predictions_poisson2(self):
        theta = Theta(100_000, poisson(2.0))
        alpha = 10_000
        pred = gelation_predictions(theta, alpha)
        a_over_n = alpha / theta.n
        assert pred["sigma"] == pytest.approx(math.log(2) + a_over_n / 2, rel=1e-6)
        assert pred["gel_arm_count"] == 2 * alpha
        assert pred["intergel_gap"] == pytest.approx(a_over_n, rel=1e-6)
        # mean degree in the gel: sum k * (alpha k mu(k)/m1) / alpha = 1 + m2/m1
        gel = pred["gel_degree_gf"]
        k = np.arange(len(gel))
        assert (k @ gel) / gel.sum() == pytest.approx(3.0, rel=1e-6)

    def test_subcritical_rejected(self):
        with pytest.raises(ValueError):
            gelation_predictions(Theta(1000, poisson(0.5)), 100)
