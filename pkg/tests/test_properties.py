"""Standalone property suites (hypothesis-driven).

Each class is one suite: pmf algebra, branching-process size laws, and the
conservation/equivalence properties of the coagulation integrators.
"""

import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from cmgel import smoluchowski as sm
from cmgel.gw_local import progeny_pmf, sample_delayed_gw
from cmgel.measures import Pmf, borel_pmf, poisson

# raw nonnegative weight vectors with some mass, convertible to a Pmf
weight_lists = st.lists(
    st.floats(min_value=0.0, max_value=10.0, allow_nan=False),
    min_size=1,
    max_size=12,
).filter(lambda w: sum(w) > 1e-6)

positive_mean_pmfs = weight_lists.map(Pmf).filter(lambda p: p.m1 > 1e-6)


class TestPmfProperties:
    @given(weight_lists)
    def test_normalization(self, w):
        p = Pmf(w)
        assert abs(p.total_mass - 1.0) <= 1e-12
        assert all(x >= 0 for x in p.weights)

    @given(positive_mean_pmfs)
    def test_size_bias_sums_to_one(self, p):
        q = p.size_biased_shift()
        assert abs(q.total_mass - 1.0) <= 1e-12

    @given(positive_mean_pmfs)
    def test_size_bias_mean_identity(self, p):
        q = p.size_biased_shift()
        assert q.m1 == pytest.approx(p.m2 / p.m1, abs=1e-10, rel=1e-10)

    @given(positive_mean_pmfs, st.integers(min_value=1, max_value=4),
           st.integers(min_value=1, max_value=4))
    def test_convolution_additivity(self, p, a, b):
        lhs = p.convolve_power(a + b).weights
        rhs = np.convolve(p.convolve_power(a).weights, p.convolve_power(b).weights)
        n = min(len(lhs), len(rhs))
        assert np.max(np.abs(np.asarray(lhs[:n]) - rhs[:n])) <= 1e-12

    @given(st.floats(min_value=0.05, max_value=1.0), st.integers(min_value=1, max_value=50))
    def test_borel_termwise_bounded(self, lam, m):
        v = borel_pmf(lam, m)
        assert 0.0 <= v <= 1.0


class TestBranchingSizeLaws:
    @given(st.floats(min_value=0.1, max_value=1.0))
    @settings(max_examples=20, deadline=None)
    def test_borel_dwass_equality(self, lam):
        pi = poisson(lam)
        for m in range(1, 25):
            assert abs(progeny_pmf(pi, m) - borel_pmf(lam, m)) <= 1e-10

    def test_dwass_vs_empirical_sizes(self):
        # 3-sigma agreement of the sampler with the convolution formula
        rng = np.random.default_rng(17)
        pi = poisson(0.8)
        n = 30_000
        sizes = Counter()
        for _ in range(n):
            t = sample_delayed_gw(pi, 64, rng)
            sizes[t.size if t is not None else -1] += 1
        for m in range(1, 9):
            p = progeny_pmf(pi, m)
            sigma = math.sqrt(max(n * p * (1 - p), 1.0))
            assert abs(sizes[m] - n * p) <= 3.5 * sigma


def ode_initial_states():
    return weight_lists.map(
        lambda w: Pmf(w)
    ).filter(lambda p: p.m1 > 0.05).map(
        lambda p: sm.monodisperse_state(p, a_max=12, m_max=40)
    )


class TestOdeProperties:
    @given(ode_initial_states())
    @settings(max_examples=8, deadline=None)
    def test_mass_monotone_and_conserved(self, c0):
        traj = sm.integrate_modified(c0, t_max=0.2, dt=2e-3, record_dt=1e-2)
        m0 = sm.OdeState(c=traj.states[0]).window_mass
        prev_window = math.inf
        for i in range(len(traj.times)):
            window = sm.OdeState(c=traj.states[i]).window_mass
            # window mass only ever leaks outward ...
            assert window <= prev_window + 1e-12
            prev_window = window
            # ... and the leak is fully accounted for
            assert window + traj.overflow[i] == pytest.approx(m0, abs=1e-6)

    @given(ode_initial_states())
    @settings(max_examples=5, deadline=None)
    def test_time_change_equivalence(self, c0):
        assume(c0.arm_count > 0.1)
        modified = sm.integrate_modified(c0, t_max=1.0, dt=2e-3, record_dt=4e-3)
        unmodified = sm.integrate_unmodified(c0, t_max=0.25, dt=2e-3, record_dt=4e-3)
        tc = sm.time_change(modified, dt=2e-3)
        for t in (0.1, 0.2):
            if t > tc.times[-1]:
                continue
            diff = np.max(np.abs(tc.state_at(t).c - unmodified.state_at(t).c))
            assert diff <= 1e-4
