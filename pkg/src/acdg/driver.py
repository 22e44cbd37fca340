"""Adaptive time loop with the backward-Euler / averaged-gradient pair.

Each attempt advances the same state with both integrators; the Euclidean
distance between the two coefficient vectors estimates the local error of
the first-order method.  A step is accepted when the estimate is at or
below the tolerance, in which case the second-order solution carries the
run forward; either way the next trial step comes from the classical
controller

    tau* = tau * (rho * tol / estimate)^(1/(p+1)),   p = 1,

clamped to [0.1 tau, 5 tau].  Rejected attempts repeat the same time with
the reduced step.  The trace records, per accepted step, the time, step
size, broken energy, nodal extrema, and Newton iteration count of the
advancing solve, plus any requested state snapshots.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import assembly, physics
from .dg_core import DGSpace
from .integrators import (GradientFlowSystem, NewtonSettings, avf_step,
                          backward_euler_step)

ESTIMATOR_FLOOR = 1e-300


class AdaptiveStepError(RuntimeError):
    """Raised when Newton fails at the smallest admissible step size."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class ModelConfig:
    """Physics of one run: interaction length, potential, mobility, penalty."""

    epsilon: float
    potential: physics.PotentialSpec
    mobility: physics.MobilitySpec
    sigma: float
    energy_edges: str = assembly.ALL_EDGES

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")


@dataclass(frozen=True)
class AdaptiveSettings:
    delta_tol: float
    t_end: float
    rho: float = 0.9
    tau0: float = 0.05
    order_low: int = 1
    growth_min: float = 0.1
    growth_max: float = 5.0
    tau_min: float = 1e-12
    estimator: str = "euclidean"   # or "mass_weighted"

    def __post_init__(self):
        if self.delta_tol <= 0:
            raise ValueError("delta_tol must be positive")
        if not 0.0 < self.rho < 1.0:
            raise ValueError("safety factor rho must lie in (0, 1)")
        if self.tau0 <= 0 or self.t_end <= 0:
            raise ValueError("tau0 and t_end must be positive")
        if self.estimator not in ("euclidean", "mass_weighted"):
            raise ValueError(f"unknown estimator {self.estimator!r}")


@dataclass
class RunTrace:
    """Accepted-step history of one adaptive run (row 0 is the initial state)."""

    t: np.ndarray
    dt: np.ndarray
    energy: np.ndarray
    min_u: np.ndarray
    max_u: np.ndarray
    newton_iterations: np.ndarray
    accepted: int
    rejected: int
    solver_calls: int
    snapshots: list = field(default_factory=list)  # (t_requested, t_actual, xi)
    ripening_time: float | None = None

    def steps_until(self, time) -> int:
        """Accepted steps taken to first reach the given time."""
        return int(np.sum(self.t[1:] <= time))


def estimate_error(xi_avf, xi_be) -> float:
    """Euclidean distance between the two embedded solutions."""
    return float(np.linalg.norm(np.asarray(xi_avf) - np.asarray(xi_be)))


def propose_step(current_tau: float, error_estimate: float,
                 settings: AdaptiveSettings, remaining: float | None = None) -> float:
    """Next trial step from the controller formula, growth-clamped.

    If `remaining` is given the proposal is additionally capped so the run
    cannot overshoot the end time.
    """
    est = max(error_estimate, ESTIMATOR_FLOOR)
    factor = (settings.rho * settings.delta_tol / est) ** (1.0 / (settings.order_low + 1))
    factor = min(max(factor, settings.growth_min), settings.growth_max)
    tau = current_tau * factor
    if remaining is not None and remaining > 0:
        tau = min(tau, remaining)
    return tau


class AllenCahnSystem(GradientFlowSystem):
    """Step operators with the mobility frozen at the previous accepted state."""

    def __init__(self, space: DGSpace, model: ModelConfig, xi_n,
                 mass: assembly.AssembledOperator,
                 stiffness: assembly.AssembledOperator):
        self.space = space
        self.model = model
        u_n = space.eval_volume(xi_n)
        self.mobility_qp = physics.mobility(model.mobility, u_n)
        super().__init__(mass.matrix, stiffness.matrix)

    def reaction(self, xi):
        return assembly.assemble_reaction(
            self.space, xi, self.model.potential, self.mobility_qp)

    def reaction_jacobian(self, xi):
        return assembly.assemble_reaction_jacobian(
            self.space, xi, self.model.potential, self.mobility_qp)

    def reaction_tau_average(self, xi_next, xi_n, taus, weights):
        # evaluation is linear in xi, so trace to quadrature points once per state
        space, pot = self.space, self.model.potential
        with np.errstate(invalid="ignore", over="ignore"):
            u_next = space.eval_volume(xi_next)
            u_n = space.eval_volume(xi_n)
            g = np.zeros_like(u_n)
            for t, w in zip(taus, weights):
                g += w * physics.reaction(pot, t * u_next + (1.0 - t) * u_n)
            g *= self.mobility_qp
        if not np.all(np.isfinite(g)):
            raise FloatingPointError("non-finite reaction values in tau average")
        return np.einsum("kq,iq->ki", space.wdetj * g, space.tab_vol).ravel()

    def reaction_jacobian_mix(self, pairs):
        space, pot = self.space, self.model.potential
        coeff = np.zeros((space.n_elements, space.n_vol_qp))
        for w, xi in pairs:
            coeff += w * physics.reaction_derivative(pot, space.eval_volume(xi))
        coeff *= self.mobility_qp
        return assembly.reaction_jacobian_from_coeff(space, coeff)


class _OperatorCache:
    """Reassembles the SIPG operator only when the frozen mobility changes."""

    def __init__(self, space, model):
        self.space = space
        self.model = model
        self.constant = model.mobility.kind == physics.CONSTANT
        self.operator = None

    def stiffness(self, xi_n) -> assembly.AssembledOperator:
        if self.constant and self.operator is not None:
            return self.operator
        kappa = assembly.KappaField.from_state(
            self.space, xi_n, self.model.mobility, self.model.epsilon)
        if self.operator is None or self.operator.fingerprint != kappa.fingerprint():
            self.operator = assembly.assemble_stiffness(
                self.space, kappa, self.model.sigma)
        return self.operator


def run_adaptive(xi0, space: DGSpace, model: ModelConfig,
                 settings: AdaptiveSettings,
                 newton: NewtonSettings = NewtonSettings(),
                 snapshot_times=()) -> RunTrace:
    """Advance the projected initial state to t_end with accept/reject control."""
    xi = np.array(xi0, dtype=float, copy=True)
    mass = assembly.assemble_mass(space)
    cache = _OperatorCache(space, model)
    # the energy operator uses the constant coefficient epsilon^2 and is fixed
    energy_op = assembly.assemble_stiffness(
        space, model.epsilon ** 2, model.sigma, edges=model.energy_edges)

    def energy(vec):
        return (0.5 * float(vec @ (energy_op.matrix.csr @ vec))
                + assembly.potential_integral(space, vec, model.potential))

    def weighted_error(a, b):
        if settings.estimator == "euclidean":
            return estimate_error(a, b)
        d = a - b
        return float(np.sqrt(d @ (mass.matrix.csr @ d)))

    t = 0.0
    tau = settings.tau0
    t_end = settings.t_end
    rows_t, rows_dt, rows_e = [0.0], [0.0], [energy(xi)]
    rows_min, rows_max, rows_it = [float(xi.min())], [float(xi.max())], [0]
    accepted = rejected = solver_calls = 0
    snapshots = []
    pending = sorted(float(s) for s in snapshot_times)
    while pending and pending[0] <= 0.0:
        snapshots.append((pending.pop(0), 0.0, xi.copy()))

    t_tol = 1e-12 * max(1.0, t_end)
    while t < t_end - t_tol:
        tau_try = min(tau, t_end - t)
        if tau_try < settings.tau_min:
            raise AdaptiveStepError(
                f"step size {tau_try:.3e} fell below the minimum at t={t:.6g}",
                trace=_build_trace(rows_t, rows_dt, rows_e, rows_min, rows_max,
                                   rows_it, accepted, rejected, solver_calls, snapshots))
        system = AllenCahnSystem(space, model, xi, mass, cache.stiffness(xi))
        res_avf = avf_step(xi, tau_try, system, newton)
        res_be = backward_euler_step(xi, tau_try, system, newton)
        solver_calls += 2
        if not (res_avf.converged and res_be.converged):
            rejected += 1
            tau = 0.5 * tau_try
            continue
        est = weighted_error(res_avf.xi_next, res_be.xi_next)
        if est <= settings.delta_tol:
            t += tau_try
            xi = res_avf.xi_next
            accepted += 1
            rows_t.append(t)
            rows_dt.append(tau_try)
            rows_e.append(energy(xi))
            rows_min.append(float(xi.min()))
            rows_max.append(float(xi.max()))
            rows_it.append(res_avf.newton_iterations)
            while pending and pending[0] <= t + t_tol:
                snapshots.append((pending.pop(0), t, xi.copy()))
            tau = propose_step(tau_try, est, settings, remaining=t_end - t)
        else:
            rejected += 1
            tau = propose_step(tau_try, est, settings)

    return _build_trace(rows_t, rows_dt, rows_e, rows_min, rows_max, rows_it,
                        accepted, rejected, solver_calls, snapshots)


def _build_trace(rows_t, rows_dt, rows_e, rows_min, rows_max, rows_it,
                 accepted, rejected, solver_calls, snapshots) -> RunTrace:
    return RunTrace(
        t=np.array(rows_t),
        dt=np.array(rows_dt),
        energy=np.array(rows_e),
        min_u=np.array(rows_min),
        max_u=np.array(rows_max),
        newton_iterations=np.array(rows_it, dtype=int),
        accepted=accepted,
        rejected=rejected,
        solver_calls=solver_calls,
        snapshots=snapshots,
    )


def _first_crossing(t, values, direction) -> float | None:
    """First time the sampled sequence crosses zero in the given direction."""
    v = np.asarray(values)
    for i in range(1, len(v)):
        a, b = v[i - 1], v[i]
        if direction == "up" and a < 0.0 <= b:
            pass
        elif direction == "down" and a > 0.0 >= b:
            pass
        else:
            continue
        if b == a:
            return float(t[i])
        return float(t[i - 1] + (0.0 - a) * (t[i] - t[i - 1]) / (b - a))
    return None


def detect_ripening(trace: RunTrace, mode: str = "auto") -> float | None:
    """Time at which the tracked spatial extremum changes sign.

    The minority phase disappearing drives the spatial minimum up through
    zero (1D example) or the maximum down through zero (2D shrinking
    bumps); the crossing is located by linear interpolation between the
    bracketing accepted steps.  Returns None when no crossing occurs.
    """
    if mode not in ("auto", "min", "max"):
        raise ValueError(f"unknown ripening mode {mode!r}")
    t_min = _first_crossing(trace.t, trace.min_u, "up")
    t_max = _first_crossing(trace.t, trace.max_u, "down")
    if mode == "min":
        return t_min
    if mode == "max":
        return t_max
    candidates = [c for c in (t_min, t_max) if c is not None]
    return min(candidates) if candidates else None
