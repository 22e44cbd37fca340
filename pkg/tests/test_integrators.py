import numpy as np
import pytest
from scipy.integrate import solve_ivp

from acdg.assembly import assemble_mass, assemble_stiffness, discrete_energy
from acdg.config import build_config
from acdg.dg_core import DGSpace, l2_project
from acdg.driver import AllenCahnSystem, ModelConfig
from acdg.integrators import (GradientFlowSystem, NewtonSettings, avf_residual,
                              avf_step, backward_euler_step)
from acdg.linalg import SparseMatrix
from acdg.mesh import build_mesh_1d
from acdg.physics import CONSTANT, DOUBLE_WELL, MobilitySpec, PotentialSpec


def scalar_system(a=0.0, reaction=None, reaction_jacobian=None):
    return GradientFlowSystem(
        SparseMatrix.identity(1),
        SparseMatrix.from_dense([[a]]),
        reaction=reaction,
        reaction_jacobian=reaction_jacobian,
    )


def cubic_system(a=0.0):
    # r(y) = y^3, the gradient of y^4/4
    return scalar_system(
        a=a,
        reaction=lambda y: y ** 3,
        reaction_jacobian=lambda y: SparseMatrix.from_dense([[3.0 * y[0] ** 2]]),
    )


def small_allen_cahn(n=6, degree=1):
    space = DGSpace(build_mesh_1d(2 * np.pi, n), degree)
    model = ModelConfig(epsilon=0.5, potential=PotentialSpec(DOUBLE_WELL),
                        mobility=MobilitySpec(CONSTANT, beta=1.0), sigma=10.0)
    xi = l2_project(space, lambda x: 0.4 + 0.3 * np.sin(x))
    mass = assemble_mass(space)
    stiff = assemble_stiffness(space, model.epsilon ** 2, model.sigma)
    return space, model, xi, AllenCahnSystem(space, model, xi, mass, stiff)


# -- residual -------------------------------------------------------------------

def test_avf_residual_zero_at_equilibrium():
    # u = 1 with the double well: A 1 = 0 and f(1) = 0
    space, model, _, _ = small_allen_cahn()
    xi1 = np.ones(space.n_dofs)
    mass = assemble_mass(space)
    stiff = assemble_stiffness(space, model.epsilon ** 2, model.sigma)
    system = AllenCahnSystem(space, model, xi1, mass, stiff)
    r = avf_residual(xi1, xi1, 0.7, system)
    assert np.max(np.abs(r)) < 1e-13


def test_avf_residual_scalar_cubic_closed_form():
    # M = 1, A = 0, r(y) = y^3 - y, y_n = y_next = 0.5, dt = 0.1:
    # R = 0.1 * int_0^1 (0.125 - 0.5) dtau = -0.0375
    sys_ = scalar_system(
        reaction=lambda y: y ** 3 - y,
        reaction_jacobian=lambda y: SparseMatrix.from_dense([[3.0 * y[0] ** 2 - 1.0]]),
    )
    r = avf_residual(np.array([0.5]), np.array([0.5]), 0.1, sys_)
    assert r[0] == pytest.approx(-0.0375, abs=1e-15)


def test_avf_residual_reduces_to_crank_nicolson_without_reaction():
    rng = np.random.default_rng(0)
    m = SparseMatrix.from_dense(np.diag([1.0, 2.0, 3.0]))
    a_dense = rng.standard_normal((3, 3))
    a_dense = a_dense + a_dense.T + 4 * np.eye(3)
    sys_ = GradientFlowSystem(m, SparseMatrix.from_dense(a_dense))
    xi_n, xi_1 = rng.standard_normal(3), rng.standard_normal(3)
    dt = 0.2
    r = avf_residual(xi_1, xi_n, dt, sys_)
    expected = (m.to_dense() @ (xi_1 - xi_n)
                + 0.5 * dt * a_dense @ (xi_n + xi_1))
    assert np.allclose(r, expected, atol=1e-14)


# -- single steps -----------------------------------------------------------------

def test_avf_step_matches_midpoint_for_linear_decay():
    # y' = -y: the averaged-gradient step is the implicit midpoint step
    res = avf_step(np.array([1.0]), 0.1, scalar_system(a=1.0))
    assert res.converged
    assert res.xi_next[0] == pytest.approx(0.95 / 1.05, abs=1e-13)


def test_backward_euler_step_linear_decay():
    res = backward_euler_step(np.array([1.0]), 0.1, scalar_system(a=1.0))
    assert res.converged
    assert res.xi_next[0] == pytest.approx(1.0 / 1.1, abs=1e-13)


def test_backward_euler_zero_reaction_is_linear_solve():
    rng = np.random.default_rng(8)
    m_dense = np.diag(1.0 + rng.random(4))
    a_dense = rng.standard_normal((4, 4))
    a_dense = a_dense @ a_dense.T + 2 * np.eye(4)
    sys_ = GradientFlowSystem(SparseMatrix.from_dense(m_dense),
                              SparseMatrix.from_dense(a_dense))
    xi_n = rng.standard_normal(4)
    dt = 0.05
    res = backward_euler_step(xi_n, dt, sys_)
    expected = np.linalg.solve(m_dense + dt * a_dense, m_dense @ xi_n)
    assert np.allclose(res.xi_next, expected, atol=1e-11)


def test_equilibrium_is_fixed_point_with_one_iteration():
    space, model, _, _ = small_allen_cahn()
    xi1 = np.ones(space.n_dofs)
    mass = assemble_mass(space)
    stiff = assemble_stiffness(space, model.epsilon ** 2, model.sigma)
    system = AllenCahnSystem(space, model, xi1, mass, stiff)
    for stepper in (avf_step, backward_euler_step):
        res = stepper(xi1, 5.0, system)
        assert res.converged
        assert res.newton_iterations <= 1
        assert np.max(np.abs(res.xi_next - xi1)) < 1e-12


def test_avf_equals_midpoint_for_quadratic_potential():
    # with r linear (quadratic potential) the tau-average collapses to the
    # midpoint evaluation; compare against a direct midpoint solve
    rng = np.random.default_rng(17)
    n = 5
    m_dense = np.diag(1.0 + rng.random(n))
    a_dense = rng.standard_normal((n, n))
    a_dense = a_dense @ a_dense.T + n * np.eye(n)
    b_dense = rng.standard_normal((n, n))
    b_dense = 0.5 * (b_dense + b_dense.T)
    c = rng.standard_normal(n)
    sys_ = GradientFlowSystem(
        SparseMatrix.from_dense(m_dense), SparseMatrix.from_dense(a_dense),
        reaction=lambda y: b_dense @ y + c,
        reaction_jacobian=lambda y: SparseMatrix.from_dense(b_dense),
    )
    xi_n = rng.standard_normal(n)
    dt = 0.11
    res = avf_step(xi_n, dt, sys_)
    assert res.converged
    lhs = m_dense + 0.5 * dt * (a_dense + b_dense)
    rhs = (m_dense - 0.5 * dt * (a_dense + b_dense)) @ xi_n - dt * c
    midpoint = np.linalg.solve(lhs, rhs)
    assert np.max(np.abs(res.xi_next - midpoint)) < 1e-12


def test_jacobian_matches_residual_finite_differences():
    space, model, xi, system = small_allen_cahn()
    from acdg.dg_core import gauss_legendre_01
    taus, weights = gauss_legendre_01(4)
    rng = np.random.default_rng(91)
    dt = 0.13
    for _ in range(10):
        x = xi + 0.3 * rng.standard_normal(space.n_dofs)
        pairs = [(w * t, t * x + (1 - t) * xi) for t, w in zip(taus, weights)]
        jac = (system.mass.to_dense() + 0.5 * dt * system.stiffness.to_dense()
               + dt * system.reaction_jacobian_mix(pairs).to_dense())
        d = rng.standard_normal(space.n_dofs)
        h = 1e-6
        fd = (avf_residual(x + h * d, xi, dt, system)
              - avf_residual(x - h * d, xi, dt, system)) / (2 * h)
        jd = jac @ d
        assert np.linalg.norm(jd - fd) / np.linalg.norm(jd) < 1e-6


def test_convergence_orders_on_toy_gradient_system():
    # y' = -y - y^3, y(0) = 1; reference from a tight DOP853 solve
    sys_ = cubic_system(a=1.0)
    t_end = 1.0
    ref = solve_ivp(lambda t, y: -y - y ** 3, (0.0, t_end), [1.0],
                    method="DOP853", rtol=1e-12, atol=1e-14).y[0, -1]
    errors = {"avf": [], "be": []}
    dts = [0.1, 0.05, 0.025, 0.0125]
    for dt in dts:
        n = round(t_end / dt)
        for name, stepper in (("avf", avf_step), ("be", backward_euler_step)):
            y = np.array([1.0])
            for _ in range(n):
                res = stepper(y, dt, sys_)
                assert res.converged
                y = res.xi_next
            errors[name].append(abs(y[0] - ref))
    slope_be = np.polyfit(np.log(dts), np.log(errors["be"]), 1)[0]
    slope_avf = np.polyfit(np.log(dts), np.log(errors["avf"]), 1)[0]
    assert slope_be == pytest.approx(1.0, abs=0.15)
    assert slope_avf == pytest.approx(2.0, abs=0.15)


def test_avf_energy_monotone_on_allen_cahn_steps():
    space, model, xi, system = small_allen_cahn()
    e_prev = discrete_energy(space, xi, model.epsilon, model.sigma, model.potential)
    for dt in (0.05, 0.2, 1.0, 5.0):
        res = avf_step(xi, dt, system)
        assert res.converged
        e_next = discrete_energy(space, res.xi_next, model.epsilon, model.sigma,
                                 model.potential)
        assert e_next <= e_prev + 1e-8 * (1 + abs(e_prev))


def test_nonconvergence_returns_failure_result():
    # an explosive reaction with a tiny iteration budget must not raise
    sys_ = scalar_system(
        reaction=lambda y: np.exp(y) * 1e6,
        reaction_jacobian=lambda y: SparseMatrix.from_dense([[1e6 * np.exp(y[0])]]),
    )
    res = avf_step(np.array([1.0]), 1.0, sys_,
                   NewtonSettings(max_iterations=2))
    assert not res.converged
    assert res.final_residual_norm > 0


def test_invalid_dt_rejected():
    with pytest.raises(ValueError):
        avf_step(np.array([1.0]), 0.0, scalar_system(a=1.0))
    with pytest.raises(ValueError):
        backward_euler_step(np.array([1.0]), -1.0, scalar_system(a=1.0))


def test_newton_settings_validation():
    with pytest.raises(ValueError):
        NewtonSettings(abs_tol=0.0)
    with pytest.raises(ValueError):
        NewtonSettings(max_iterations=0)
    with pytest.raises(ValueError):
        NewtonSettings(tau_nodes=0)
