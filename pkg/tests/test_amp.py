import csv

import numpy as np
import pytest

from rankone.amp import amp_run, initial_estimate, state_evolution_run, write_log
from rankone.bounds import ModelPoint, i_bethe_prime, state_evolution_step
from rankone.channel import BernoulliLinearChannel, GaussianChannel
from rankone.errors import DivergenceError, DomainError
from rankone.oracle import Instance, generate_instance
from rankone.prior import make_sparse_rademacher

RADEMACHER = make_sparse_rademacher(1.0)


def _mean_final_overlap(p, delta, n, seeds, **kw):
    finals = []
    for s in seeds:
        inst = generate_instance(p, GaussianChannel(delta), n, seed=s)
        finals.append(amp_run(p, inst, seed=10_000 + s, **kw).overlap)
    return float(np.mean(finals))


class TestAmp:
    def test_trivial_phase(self):
        assert _mean_final_overlap(RADEMACHER, 2.0, 2000, range(3), max_iter=100) < 0.05

    def test_matches_state_evolution(self):
        se = state_evolution_run(ModelPoint(RADEMACHER, 0.5), 0.01).fixed_point
        assert abs(_mean_final_overlap(RADEMACHER, 0.5, 2000, range(3)) - se) < 0.05

    def test_sparse_above_threshold(self):
        p = make_sparse_rademacher(0.6)
        assert _mean_final_overlap(p, 0.9, 2000, range(2)) < 0.05

    def test_trajectory_follows_state_evolution(self):
        histories = []
        for s in range(8):
            inst = generate_instance(RADEMACHER, GaussianChannel(0.5), 4000, seed=100 + s)
            histories.append(amp_run(RADEMACHER, inst, max_iter=10, seed=200 + s).overlap_history)
        amp_mean = np.mean(histories, axis=0)
        se = state_evolution_run(ModelPoint(RADEMACHER, 0.5), amp_mean[0], max_iter=10, tol=0.0, damping=0.0)
        np.testing.assert_allclose(amp_mean, se.m_values, atol=0.05)

    def test_sign_symmetry(self):
        inst = generate_instance(RADEMACHER, GaussianChannel(0.7), 500, seed=4)
        f0 = initial_estimate(RADEMACHER, inst, "random", seed=5)
        a = amp_run(RADEMACHER, inst, max_iter=15, init=f0)
        b = amp_run(RADEMACHER, inst, max_iter=15, init=-f0)
        np.testing.assert_allclose(a.estimate, -b.estimate, atol=1e-12)
        np.testing.assert_allclose(a.overlap_history, b.overlap_history, atol=1e-12)

    def test_spectral_init(self):
        inst = generate_instance(RADEMACHER, GaussianChannel(0.5), 1500, seed=6)
        state = amp_run(RADEMACHER, inst, init="spectral", seed=7)
        se = state_evolution_run(ModelPoint(RADEMACHER, 0.5), 0.01).fixed_point
        assert abs(state.overlap - se) < 0.1

    def test_random_init_overlap(self):
        inst = generate_instance(RADEMACHER, GaussianChannel(1.0), 4000, seed=8)
        f0 = initial_estimate(RADEMACHER, inst, "random", eps=0.05, seed=9)
        assert abs(f0 @ inst.x_star / 4000 - 0.05) < 0.02

    def test_stops_on_convergence(self):
        inst = generate_instance(RADEMACHER, GaussianChannel(2.0), 500, seed=1)
        state = amp_run(RADEMACHER, inst, max_iter=500, seed=2)
        assert state.converged
        assert state.distance_history[-1] < 1e-8
        assert len(state.overlap_history) == state.iteration + 1

    def test_damping_reaches_same_fixed_point(self):
        inst = generate_instance(RADEMACHER, GaussianChannel(0.5), 1000, seed=3)
        plain = amp_run(RADEMACHER, inst, max_iter=300, seed=4)
        damped = amp_run(RADEMACHER, inst, max_iter=300, damping=0.5, seed=4)
        assert abs(plain.overlap - damped.overlap) < 0.02

    def test_divergence_reports_iteration(self):
        y = np.full((50, 50), np.nan)
        inst = Instance(n=50, x_star=np.ones(50), y=y, channel=GaussianChannel(1.0), seed=None)
        with pytest.raises(DivergenceError) as info:
            amp_run(RADEMACHER, inst, max_iter=5, seed=0)
        assert info.value.iteration == 1

    def test_validation(self):
        inst = generate_instance(RADEMACHER, BernoulliLinearChannel(0.5, 1.0), 100, seed=0)
        with pytest.raises(DomainError):
            amp_run(RADEMACHER, inst)
        g = generate_instance(RADEMACHER, GaussianChannel(1.0), 100, seed=0)
        with pytest.raises(DomainError):
            amp_run(RADEMACHER, g, damping=1.0)
        with pytest.raises(DomainError):
            amp_run(RADEMACHER, g, init="warm")
        with pytest.raises(DomainError):
            amp_run(RADEMACHER, g, init=np.zeros(3))

    def test_log(self, tmp_path):
        inst = generate_instance(RADEMACHER, GaussianChannel(1.5), 200, seed=0)
        state = amp_run(RADEMACHER, inst, max_iter=5, seed=1)
        path = tmp_path / "run.csv"
        write_log(state, path, header_lines=["test"])
        lines = path.read_text().splitlines()
        assert lines[0] == "# test"
        rows = list(csv.reader(lines[1:]))
        assert rows[0] == ["iteration", "overlap", "iterate_distance"]
        assert len(rows) == state.iteration + 2


class TestStateEvolution:
    def test_zero_stays_zero(self):
        trace = state_evolution_run(ModelPoint(RADEMACHER, 0.5), 0.0, max_iter=50)
        assert trace.converged
        assert all(m == 0.0 for m in trace.m_values)

    def test_trivial_phase(self):
        assert state_evolution_run(ModelPoint(RADEMACHER, 2.0), 1e-3).fixed_point < 1e-9

    def test_nontrivial_fixed_point_is_stationary(self):
        mp = ModelPoint(RADEMACHER, 0.5)
        trace = state_evolution_run(mp, 1e-3)
        assert trace.converged
        assert trace.fixed_point > 0.5
        assert abs(i_bethe_prime(mp, trace.fixed_point)) < 1e-6
        assert abs(state_evolution_step(mp, trace.fixed_point) - trace.fixed_point) < 1e-9

    def test_values_stay_in_range(self):
        mp = ModelPoint(make_sparse_rademacher(0.3), 0.02)
        trace = state_evolution_run(mp, 0.3)
        assert all(0 <= m <= 0.3 for m in trace.m_values)

    def test_not_converged_flag(self):
        trace = state_evolution_run(ModelPoint(RADEMACHER, 0.99), 0.5, max_iter=3)
        assert not trace.converged
        assert len(trace.m_values) == 4

    def test_validation(self):
        with pytest.raises(DomainError):
            state_evolution_run(ModelPoint(RADEMACHER, 0.5), 1.5)
        with pytest.raises(DomainError):
            state_evolution_run(ModelPoint(RADEMACHER, 0.5), 0.1, damping=1.0)
