import math

import pytest

from pamlab import (
    EnvKind,
    Params,
    Torus,
    annealed_lambda,
    heat_kernel,
    kappa_sweep,
    quenched_lambda,
)


class TestQuenched:
    def test_preconditions(self, ring16):
        params = Params(0.5, 1.0, 1.0)
        with pytest.raises(ValueError):
            quenched_lambda(EnvKind.ISRW, params, ring16, 5.0, 8, 1)
        with pytest.raises(ValueError):
            quenched_lambda(EnvKind.ISRW, params, ring16, 20.0, 2, 1)

    def test_constant_env_closed_form(self, ring8):
        # Lambda(t) = gamma*c + (1/t) log p_t(0) exactly, any kappa.
        gamma, c, kappa, t_end = 1.0, 1.0, 0.5, 12.0
        est = quenched_lambda(
            EnvKind.CONSTANT, Params(kappa, gamma, c), ring8, t_end, 4, 33
        )
        closed = gamma * c + math.log(
            heat_kernel(ring8, kappa, t_end).values[0]
        ) / t_end
        assert est.value == pytest.approx(closed, abs=1e-6)
        assert est.std_error == pytest.approx(0.0, abs=1e-9)
        for t, lam in est.t_grid:
            want = gamma * c + math.log(
                heat_kernel(ring8, kappa, t).values[0]
            ) / t
            assert lam == pytest.approx(want, abs=1e-6)

    def test_tgrid_structure(self, ring16):
        est = quenched_lambda(
            EnvKind.ISRW, Params(0.0, 1.0, 1.0), ring16, 16.0, 4, 34
        )
        times = [t for t, _ in est.t_grid]
        assert times == [2.0, 4.0, 8.0, 16.0]
        assert est.replicas == 4
        assert len(est.t_std_errors) == 4
        assert est.p == 0

    def test_replica_spread_shrinks_when_horizon_doubles(self):
        # Concentration of the per-environment estimate: the torus must be
        # large enough that the conserved-density floor is not yet binding.
        torus = Torus(1, 64)
        params = Params(0.0, 1.0, 1.0)
        short = quenched_lambda(EnvKind.ISRW, params, torus, 10.0, 48, 35)
        long = quenched_lambda(EnvKind.ISRW, params, torus, 20.0, 48, 35)
        assert long.std_error < short.std_error

    def test_determinism(self, ring16):
        params = Params(0.5, 1.0, 1.0)
        a = quenched_lambda(EnvKind.ISRW, params, ring16, 12.0, 4, 36)
        b = quenched_lambda(EnvKind.ISRW, params, ring16, 12.0, 4, 36)
        assert a.value == b.value and a.t_grid == b.t_grid

    def test_worker_count_does_not_change_results(self, ring16):
        params = Params(0.5, 1.0, 1.0)
        a = quenched_lambda(EnvKind.ISRW, params, ring16, 12.0, 6, 48,
                            workers=1)
        b = quenched_lambda(EnvKind.ISRW, params, ring16, 12.0, 6, 48,
                            workers=2)
        assert a.value == b.value
        assert a.t_grid == b.t_grid
        assert a.std_error == b.std_error

    def test_fails_when_most_replicas_fail(self, ring16, monkeypatch):
        import pamlab.lyapunov as mod
        from pamlab import SolverError

        def broken(*args, **kwargs):
            raise SolverError("synthetic failure")

        monkeypatch.setattr(mod, "solve_direct", broken)
        with pytest.raises(SolverError, match="replicas failed"):
            quenched_lambda(
                EnvKind.ISRW, Params(0.5, 1.0, 1.0), ring16, 12.0, 4, 37
            )


class TestAnnealed:
    def test_preconditions(self, ring16):
        params = Params(0.5, 1.0, 1.0)
        with pytest.raises(ValueError):
            annealed_lambda(EnvKind.ISRW, params, ring16, 12.0, 0, 100, 1)
        with pytest.raises(ValueError):
            annealed_lambda(EnvKind.ISRW, params, ring16, 12.0, 1, 50, 1)
        with pytest.raises(ValueError, match="capped"):
            annealed_lambda(EnvKind.ISRW, params, ring16, 12.0, 3, 100, 1)

    def test_constant_env_equals_quenched_all_p(self, ring8):
        gamma, c, kappa, t_end = 0.7, 1.0, 0.3, 12.0
        params = Params(kappa, gamma, c)
        closed = gamma * c + math.log(
            heat_kernel(ring8, kappa, t_end).values[0]
        ) / t_end
        for p in (1, 2):
            est = annealed_lambda(
                EnvKind.CONSTANT, params, ring8, t_end, p, 100, 37
            )
            assert est.value == pytest.approx(closed, abs=1e-6)
            assert not est.heavy_tail

    def test_jensen_ordering_vs_quenched(self, ring16):
        # log-mean >= mean-log, so annealed >= quenched on matched seeds.
        params = Params(0.5, 1.0, 1.0)
        q = quenched_lambda(EnvKind.ISRW, params, ring16, 12.0, 120, 38)
        a = annealed_lambda(EnvKind.ISRW, params, ring16, 12.0, 1, 120, 38)
        assert a.value >= q.value - 2 * math.hypot(a.std_error, q.std_error)

    def test_moment_order_monotone(self, ring16):
        params = Params(0.5, 1.0, 1.0)
        a1 = annealed_lambda(EnvKind.ISRW, params, ring16, 12.0, 1, 120, 39)
        a2 = annealed_lambda(EnvKind.ISRW, params, ring16, 12.0, 2, 120, 39)
        assert a2.value >= a1.value - 2 * math.hypot(a1.std_error,
                                                     a2.std_error)

    def test_heavy_tail_flag_in_catalytic_regime(self, ring16):
        # d=1 independent-walk catalyst: moments diverge, one environment
        # should dominate the empirical moment.
        params = Params(0.5, 1.0, 1.0)
        est = annealed_lambda(EnvKind.ISRW, params, ring16, 16.0, 2, 120, 40)
        assert est.heavy_tail
        assert est.max_share > 0.5


class TestSweep:
    def test_grid_validation(self, ring16):
        params = Params(0.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            kappa_sweep(EnvKind.ISRW, params, ring16, [], 12.0, [], 4, 41)
        with pytest.raises(ValueError):
            kappa_sweep(EnvKind.ISRW, params, ring16, [2.0, 1.0], 12.0, [],
                        4, 41)

    def test_single_point_grid_matches_quenched(self, ring16):
        params = Params(0.0, 1.0, 1.0)
        sweep = kappa_sweep(
            EnvKind.ISRW, params, ring16, [0.0], 12.0, [], 4, 42
        )
        direct = quenched_lambda(EnvKind.ISRW, params, ring16, 12.0, 4, 42)
        assert sweep.estimates[(0.0, 0)].value == direct.value

    def test_constant_env_curve_closed_form(self, ring8):
        gamma, c = 1.0, 1.0
        params = Params(0.0, gamma, c)
        grid = [0.1, 1.0]
        sweep = kappa_sweep(
            EnvKind.CONSTANT, params, ring8, grid, 12.0, [], 4, 43
        )
        for kappa in grid:
            want = gamma * c + math.log(
                heat_kernel(ring8, kappa, 12.0).values[0]
            ) / 12.0
            assert sweep.estimates[(kappa, 0)].value == pytest.approx(
                want, abs=1e-6
            )

    def test_common_random_numbers_share_environments(self, ring16):
        # Same seed at every kappa: the kappa=0 cell of a sweep equals a
        # standalone kappa=0 run seed for seed.
        params = Params(0.0, 1.0, 1.0)
        sweep = kappa_sweep(
            EnvKind.ISRW, params, ring16, [0.0, 0.5], 12.0, [], 4, 44
        )
        solo = quenched_lambda(EnvKind.ISRW, params, ring16, 12.0, 4, 44)
        assert sweep.estimates[(0.0, 0)].value == solo.value

    def test_rows_schema(self, ring16):
        params = Params(0.0, 1.0, 1.0)
        sweep = kappa_sweep(
            EnvKind.ISRW, params, ring16, [0.0, 0.5], 12.0, [], 4, 45
        )
        rows = sweep.rows()
        assert len(rows) == 2 * 4  # two kappas, four checkpoints
        for row in rows:
            assert len(row) == 7
        assert [r[0] for r in rows[:4]] == [0.0] * 4

    def test_per_cell_failures_recorded_and_sweep_continues(self):
        # Voter runs beyond the consensus cap fail per cell; the sweep
        # records the failure and keeps going.
        torus = Torus(1, 8)
        params = Params(0.0, 1.0, 0.5)
        sweep = kappa_sweep(
            EnvKind.SVM, params, torus, [0.0, 0.5], 12.0, [], 4, 47
        )
        assert sweep.estimates == {}
        assert set(sweep.failures) == {(0.0, 0), (0.5, 0)}
        assert "L^2/8" in sweep.failures[(0.0, 0)]

    def test_quenched_floor_with_return_correction(self, ring16):
        # lambda_hat >= rho*gamma + (1/t) log p_t(0) - 2 se at finite t.
        params = Params(0.5, 1.0, 1.0)
        t_end = 20.0
        est = quenched_lambda(EnvKind.ISRW, params, ring16, t_end, 8, 46)
        floor = 1.0 + math.log(
            heat_kernel(ring16, 0.5, t_end).values[0]
        ) / t_end
        assert est.value >= floor - 2 * est.std_error
