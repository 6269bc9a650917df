"""Unit tests for the frozen coagulation simulator."""

import math

import numpy as np
import pytest

from cmgel import _engine, frozen_sim, graphs
from cmgel.frozen_sim import (
    FrozenConfig,
    cluster_census,
    run_frozen,
    tail_mass,
    typical_cluster,
)
from cmgel.measures import from_dict, point_mass, poisson


def small_run(**kw):
    defaults = dict(n=2000, mu=poisson(2.0), alpha=100, t_max=1.5, seed=3)
    defaults.update(kw)
    return run_frozen(FrozenConfig(**defaults))


class TestConfig:
    def test_alpha_bounds(self):
        with pytest.raises(ValueError):
            FrozenConfig(n=10, mu=poisson(1.0), alpha=1, t_max=1.0)
        with pytest.raises(ValueError):
            FrozenConfig(n=10, mu=poisson(1.0), alpha=12, t_max=1.0)
        # alpha = n + 1 disables freezing and is legal
        FrozenConfig(n=10, mu=poisson(1.0), alpha=11, t_max=1.0)

    def test_tmax_positive(self):
        with pytest.raises(ValueError):
            FrozenConfig(n=10, mu=poisson(1.0), alpha=5, t_max=0.0)

    def test_snapshots_validated(self):
        with pytest.raises(ValueError):
            FrozenConfig(n=10, mu=poisson(1.0), alpha=5, t_max=1.0, snapshot_times=(0.5, 2.0))
        with pytest.raises(ValueError):
            FrozenConfig(n=10, mu=poisson(1.0), alpha=5, t_max=1.0, snapshot_times=(0.9, 0.1))


class TestTrivialDynamics:
    def test_no_arms(self):
        traj = small_run(n=50, mu=point_mass(0), alpha=5, t_max=2.0)
        assert np.all(traj.n_t == 50)
        assert traj.gel_events == []
        assert traj.census_dict(len(traj.times) - 1) == {(0, 1): 1.0}

    def test_two_monomers_bind(self):
        traj = small_run(n=2, mu=point_mass(1), alpha=3, t_max=200.0)
        final = traj.census_dict(len(traj.times) - 1)
        assert final == {(0, 2): 0.5}

    def test_determinism(self):
        a = small_run()
        b = small_run()
        assert np.array_equal(a.times, b.times)
        assert np.array_equal(a.n_t, b.n_t)
        assert np.array_equal(a.p_tables, b.p_tables)
        for ca, cb in zip(a.censuses, b.censuses):
            assert np.array_equal(ca, cb)
        assert a.gel_events == b.gel_events


class TestInvariants:
    def test_particle_conservation(self):
        traj = small_run()
        n = traj.config.n
        for i, t in enumerate(traj.times):
            gel_mass = sum(
                e["size"] for e in traj.gel_events if e["tau"] <= t + 1e-12
            )
            assert traj.n_t[i] + gel_mass == n

    def test_n_t_nonincreasing(self):
        traj = small_run()
        assert np.all(np.diff(traj.n_t) <= 0)

    def test_p_table_sums_to_n_t(self):
        traj = small_run()
        for i in range(len(traj.times)):
            assert traj.p_tables[i].sum() == traj.n_t[i]

    def test_census_mass_equals_n_t(self):
        traj = small_run()
        for i in range(len(traj.times)):
            mass = sum(int(m) * int(c) for _, m, c in traj.censuses[i])
            assert mass == traj.n_t[i]

    def test_activated_arm_identity(self):
        # activated arms in solution = 2 * solution bonds + pending arm
        traj = small_run(t_max=0.9)
        st = traj.final_state
        b_sol = int(st.k_act[st.in_solution].sum())
        bonds = int((~st.frozen[st.bind_u]).sum())
        assert b_sol - 2 * bonds in (0, 1)

    def test_gel_sizes_in_band(self):
        traj = small_run(n=20_000, alpha=500, t_max=2.5)
        assert traj.gel_events, "expected at least one gel event"
        for e in traj.gel_events:
            assert 500 <= e["size"] <= 999

    def test_census_cross_check(self):
        traj = small_run(n=20_000, alpha=500, t_max=2.5)
        incremental = traj.census_dict(len(traj.times) - 1)
        recomputed = cluster_census(traj.final_state)
        assert set(incremental) == set(recomputed)
        for key in incremental:
            assert incremental[key] == pytest.approx(recomputed[key], abs=1e-9)

    def test_snapshot_after_each_gel_event(self):
        traj = small_run(n=20_000, alpha=500, t_max=2.5)
        for e in traj.gel_events:
            i = int(np.searchsorted(traj.times, e["tau"]))
            assert traj.times[i] == pytest.approx(e["tau"], abs=1e-12)

    def test_self_loops_forbidden_switch(self):
        traj = small_run(n=500, mu=point_mass(2), alpha=501, t_max=50.0, allow_self_loops=False)
        st = traj.final_state
        assert np.all(st.bind_u != st.bind_v)


class TestFrozenMatchesDcmWithoutFreezing:
    def test_statistical_agreement(self):
        # with alpha = n + 1 nothing freezes: the trajectory law is the plain
        # dynamical pairing; compare cluster-size histograms at t = 1
        from cmgel.dynamic_cm import Theta, simulate_dcm

        n = 10_000
        mu = poisson(1.0)
        reps = 20
        froz = np.zeros(8)
        dcm = np.zeros(8)
        for seed in range(reps):
            traj = run_frozen(FrozenConfig(n=n, mu=mu, alpha=n + 1, t_max=1.0, seed=seed))
            for a, m, c in traj.censuses[-1]:
                if m < 8:
                    froz[m] += c
            run = simulate_dcm(Theta(n, mu), n + 1, ("t_max", 1.0), np.random.default_rng(seed))
            sizes = np.bincount(run.raw.labels)
            hist = np.bincount(sizes[sizes > 0])
            dcm[: min(8, len(hist))] += hist[:8]
        for m in range(1, 8):
            tot = froz[1:].sum()
            p = dcm[m] / dcm[1:].sum()
            sigma = math.sqrt(max(tot * p * (1 - p), 1.0))
            assert abs(froz[m] - tot * p) <= 4 * sigma, m


class TestPostGelResampling:
    def test_conditional_pairing_reproduces_census(self):
        # after the first gel event the solution is a uniform pairing of its
        # activated arms; regenerate one and compare size histograms
        n = 10_000
        traj = run_frozen(
            FrozenConfig(n=n, mu=poisson(2.0), alpha=1000, t_max=2.0,
                         snapshot_times=(), seed=21)
        )
        assert traj.gel_events
        st = traj.final_state
        sol = st.in_solution
        sol_degrees = st.degrees[sol]
        b = int(st.k_act[sol].sum())
        sim_hist = np.zeros(12)
        for a, m, c in traj.censuses[-1]:
            if m < 12:
                sim_hist[m] += c
        reps = 200
        resampled = np.zeros(12)
        for seed in range(reps):
            rng = np.random.default_rng(10_000 + seed)
            pairing = graphs.sample_arm_subset_pairing(sol_degrees, b, rng)
            stats = graphs.components(pairing)
            if stats.sizes[0] >= traj.config.alpha:
                continue  # conditioned on no large component
            for s in stats.sizes:
                if s < 12:
                    resampled[s] += 1
        resampled /= resampled[1:].sum()
        sim_frac = sim_hist / sim_hist[1:].sum()
        for m in range(1, 12):
            tot = sim_hist[1:].sum()
            sigma = math.sqrt(max(tot * resampled[m] * (1 - resampled[m]), 1.0)) / tot
            assert abs(sim_frac[m] - resampled[m]) <= 4 * max(sigma, 1e-3), m


class TestCensusHelpers:
    def test_tail_mass_trivia(self):
        census = {(0, 2): 0.1, (1, 3): 0.2, (0, 10): 0.01}
        assert tail_mass(census, 1) == pytest.approx(0.2 + 0.6 + 0.1)
        assert tail_mass(census, 11) == 0.0
        with pytest.raises(ValueError):
            tail_mass(census, 0)


class TestTypicalCluster:
    def test_all_singletons(self):
        traj = small_run(n=30, mu=point_mass(0), alpha=5, t_max=1.0)
        s = typical_cluster(traj.final_state, np.random.default_rng(0))
        assert s.size == 1 and s.tree is not None and not s.cyclic

    def test_size_bias(self):
        # one bound pair plus one singleton: pair sampled with prob 2/3
        traj = small_run(n=3, mu=from_dict({0: 1 / 3, 1: 2 / 3}), alpha=4, t_max=100.0)
        rng = np.random.default_rng(1)
        hits = sum(typical_cluster(traj.final_state, rng).size == 2 for _ in range(3000))
        assert abs(hits / 3000 - 2 / 3) < 0.03

    def test_node_cap_truncates(self):
        traj = small_run(n=2000, alpha=300, t_max=1.0)
        rng = np.random.default_rng(2)
        saw_trunc = False
        for _ in range(500):
            s = typical_cluster(traj.final_state, rng, node_cap=2)
            assert s.truncated or s.size <= 2
            saw_trunc = saw_trunc or s.truncated
        assert saw_trunc

    def test_cycle_detection(self):
        # a single degree-2 particle binds to itself: flagged cyclic
        traj = small_run(n=1000, mu=point_mass(2), alpha=1001, t_max=100.0, seed=5)
        rng = np.random.default_rng(3)
        flags = [typical_cluster(traj.final_state, rng) for _ in range(300)]
        assert any(s.cyclic for s in flags)
        for s in flags:
            if not s.cyclic and not s.truncated:
                assert s.tree is not None
