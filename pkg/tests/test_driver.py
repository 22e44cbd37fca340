import numpy as np
import pytest

from acdg.assembly import discrete_energy
from acdg.config import build_config, initial_coefficients, model_config
from acdg.dg_core import DGSpace, l2_project
from acdg.driver import (AdaptiveSettings, ModelConfig, RunTrace,
                         detect_ripening, estimate_error, propose_step,
                         run_adaptive)
from acdg.mesh import build_mesh_1d
from acdg.physics import CONSTANT, DOUBLE_WELL, MobilitySpec, PotentialSpec


def settings(**kw):
    base = dict(delta_tol=1e-4, t_end=1.0)
    base.update(kw)
    return AdaptiveSettings(**base)


def small_model(eps=0.5):
    return ModelConfig(epsilon=eps, potential=PotentialSpec(DOUBLE_WELL),
                       mobility=MobilitySpec(CONSTANT, beta=1.0), sigma=10.0)


def synthetic_trace(t, min_u, max_u):
    n = len(t)
    return RunTrace(t=np.asarray(t, float), dt=np.zeros(n), energy=np.zeros(n),
                    min_u=np.asarray(min_u, float), max_u=np.asarray(max_u, float),
                    newton_iterations=np.zeros(n, dtype=int),
                    accepted=n - 1, rejected=0, solver_calls=2 * (n - 1))


# -- estimator ------------------------------------------------------------------

def test_estimate_error_trivia():
    a = np.array([1.0, 2.0, 3.0])
    assert estimate_error(a, a) == 0.0
    b = a.copy()
    b[1] += -0.25
    assert estimate_error(a, b) == pytest.approx(0.25)


def test_estimate_error_matches_elementwise_oracle():
    rng = np.random.default_rng(2)
    a, b = rng.standard_normal(37), rng.standard_normal(37)
    oracle = np.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))
    assert abs(estimate_error(a, b) - oracle) < 1e-14


# -- controller -----------------------------------------------------------------

def test_propose_step_fixed_point():
    s = settings(rho=0.9)
    tau = 0.3
    assert propose_step(tau, 0.9 * s.delta_tol, s) == pytest.approx(tau, rel=1e-12)


def test_propose_step_formula_values():
    s = settings(rho=0.9)
    assert propose_step(1.0, s.delta_tol, s) == pytest.approx(np.sqrt(0.9), rel=1e-12)
    assert propose_step(1.0, 4 * s.delta_tol, s) == pytest.approx(np.sqrt(0.225), rel=1e-12)


def test_propose_step_growth_clamps():
    s = settings()
    assert propose_step(1.0, 1e-30, s) == pytest.approx(5.0)       # growth capped
    assert propose_step(1.0, 1e10, s) == pytest.approx(0.1)        # shrink capped
    assert propose_step(1.0, 0.0, s) == pytest.approx(5.0)         # estimator floor


def test_propose_step_respects_remaining_time():
    s = settings()
    assert propose_step(1.0, 1e-30, s, remaining=0.7) == pytest.approx(0.7)


def test_settings_validation():
    with pytest.raises(ValueError):
        settings(delta_tol=-1.0)
    with pytest.raises(ValueError):
        settings(rho=1.5)
    with pytest.raises(ValueError):
        settings(tau0=0.0)
    with pytest.raises(ValueError):
        settings(estimator="l7")


# -- ripening detection ------------------------------------------------------------

def test_ripening_linear_interpolation():
    trace = synthetic_trace([0.0, 10.0, 12.0], [-0.5, -0.1, 0.1], [1.0, 1.0, 1.0])
    assert detect_ripening(trace, mode="min") == pytest.approx(11.0)
    assert detect_ripening(trace, mode="auto") == pytest.approx(11.0)


def test_ripening_max_downcrossing():
    trace = synthetic_trace([0.0, 4.0, 6.0], [-1.0, -1.0, -1.0], [0.3, 0.1, -0.3])
    assert detect_ripening(trace, mode="max") == pytest.approx(4.5)
    assert detect_ripening(trace, mode="auto") == pytest.approx(4.5)


def test_ripening_none_without_crossing():
    trace = synthetic_trace([0.0, 1.0], [-0.9, -0.95], [0.9, 0.95])
    assert detect_ripening(trace) is None
    with pytest.raises(ValueError):
        detect_ripening(trace, mode="extremum")


# -- adaptive loop -----------------------------------------------------------------

def test_equilibrium_run_accepts_everything():
    space = DGSpace(build_mesh_1d(2 * np.pi, 8), 1)
    model = small_model()
    xi0 = np.ones(space.n_dofs)
    s = settings(t_end=50.0, tau0=0.05)
    trace = run_adaptive(xi0, space, model, s)
    assert trace.rejected == 0
    assert np.allclose(trace.energy, 0.0, atol=1e-12)
    # stationary state: the estimator vanishes and tau rides the growth clamp
    # (the final step is shortened to land exactly on t_end)
    dts = trace.dt[1:-1]
    ratios = dts[1:] / dts[:-1]
    assert np.allclose(ratios, 5.0, rtol=1e-12)
    assert trace.min_u[-1] == pytest.approx(1.0, abs=1e-10)


def test_bookkeeping_invariant_and_monotone_energy():
    space = DGSpace(build_mesh_1d(2 * np.pi, 12), 1)
    model = small_model(eps=0.3)
    xi0 = l2_project(space, lambda x: 0.2 + 0.4 * np.sin(x))
    s = settings(t_end=2.0, delta_tol=1e-5, tau0=0.5)  # large tau0 forces rejections
    trace = run_adaptive(xi0, space, model, s)
    assert trace.solver_calls == 2 * (trace.accepted + trace.rejected)
    assert trace.rejected >= 1
    assert np.all(np.diff(trace.t) > 0)
    tol = 1e-8 * (1 + np.abs(trace.energy[:-1]))
    assert np.all(np.diff(trace.energy) <= tol)


def test_snapshots_recorded_at_or_after_requested_times():
    space = DGSpace(build_mesh_1d(2 * np.pi, 8), 1)
    model = small_model()
    xi0 = l2_project(space, lambda x: 0.1 * np.sin(x))
    s = settings(t_end=1.0, tau0=0.05)
    trace = run_adaptive(xi0, space, model, s, snapshot_times=(0.0, 0.4, 1.0))
    assert [snap[0] for snap in trace.snapshots] == [0.0, 0.4, 1.0]
    for t_req, t_actual, xi in trace.snapshots:
        assert t_actual >= t_req - 1e-12
        assert xi.shape == (space.n_dofs,)
    # requested time 0 carries the initial state
    assert np.array_equal(trace.snapshots[0][2], xi0)


def test_steps_until():
    trace = synthetic_trace([0.0, 1.0, 2.0, 3.0], [0, 0, 0, 0], [1, 1, 1, 1])
    assert trace.steps_until(2.0) == 2
    assert trace.steps_until(10.0) == 3


def test_mass_weighted_estimator_accepts_more():
    # the L2 norm of the difference is smaller than the nodal Euclidean norm,
    # so the mass-weighted run takes fewer, larger steps
    space = DGSpace(build_mesh_1d(2 * np.pi, 16), 1)
    model = small_model(eps=0.3)
    xi0 = l2_project(space, lambda x: 0.2 + 0.4 * np.sin(x))
    t_e = run_adaptive(xi0, space, model, settings(t_end=1.0, estimator="euclidean"))
    t_m = run_adaptive(xi0, space, model, settings(t_end=1.0, estimator="mass_weighted"))
    assert t_m.accepted < t_e.accepted


def test_degenerate_mobility_runs_and_decreases_energy():
    space = DGSpace(build_mesh_1d(2 * np.pi, 12), 1)
    model = ModelConfig(epsilon=0.3, potential=PotentialSpec(DOUBLE_WELL),
                        mobility=MobilitySpec("degenerate", beta=2.0), sigma=10.0)
    xi0 = l2_project(space, lambda x: 0.5 * np.sin(x))
    trace = run_adaptive(xi0, space, model, settings(t_end=1.0))
    tol = 1e-8 * (1 + np.abs(trace.energy[:-1]))
    assert np.all(np.diff(trace.energy) <= tol)


def test_newton_failure_at_minimum_step_aborts_with_trace():
    from acdg.driver import AdaptiveStepError
    from acdg.integrators import NewtonSettings
    space = DGSpace(build_mesh_1d(2 * np.pi, 4), 1)
    model = small_model(eps=0.3)
    xi0 = l2_project(space, lambda x: 0.8 + np.sin(x))
    s = AdaptiveSettings(delta_tol=1e-4, t_end=1.0, tau0=0.05, tau_min=1e-3)
    # a one-iteration budget cannot converge from this state, so the driver
    # halves tau until it falls below tau_min and aborts
    with pytest.raises(AdaptiveStepError) as err:
        run_adaptive(xi0, space, model, s,
                     newton=NewtonSettings(max_iterations=1))
    assert err.value.trace is not None
    assert err.value.trace.accepted == 0
