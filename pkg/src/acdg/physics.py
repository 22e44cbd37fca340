"""Bulk free-energy densities, their derivatives, and mobility functions.

Two free energies are supported: the quartic double well
``F(u) = (1 - u^2)^2 / 4`` with minima at u = +-1, and the logarithmic
free energy

    F(u) = (theta/2) [(1+u) ln(1+u) + (1-u) ln(1-u)] - (theta_c/2) u^2

whose derivative is singular at u = +-1.  The log terms are evaluated on
arguments clamped into [-1 + delta_reg, 1 - delta_reg]; outside that
interval F, f = F', and f' continue as the second-order Taylor extension
about the clamp point.  Values grazing the pure phases therefore stay
finite, the three functions remain exact derivatives of one another, and
the steep extension slope pushes any transient overshoot back inside
(-1, 1) without breaking Newton's method.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DOUBLE_WELL = "double_well"
LOGARITHMIC = "logarithmic"
CONSTANT = "constant"
DEGENERATE = "degenerate"


@dataclass(frozen=True)
class PotentialSpec:
    """Choice of bulk free energy F(u); theta/theta_c only apply to the log form."""

    kind: str
    theta: float = 0.0
    theta_c: float = 0.0
    delta_reg: float = 1e-8

    def __post_init__(self):
        if self.kind not in (DOUBLE_WELL, LOGARITHMIC):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind == LOGARITHMIC:
            if not 0.0 < self.theta <= self.theta_c:
                raise ValueError("logarithmic potential requires 0 < theta <= theta_c")
            if not 0.0 < self.delta_reg <= 1e-4:
                raise ValueError("delta_reg must lie in (0, 1e-4]")


@dataclass(frozen=True)
class MobilitySpec:
    """Mobility mu(u): `constant` returns beta, `degenerate` is beta*(1-u^2) floored at 0."""

    kind: str
    beta: float = 1.0

    def __post_init__(self):
        if self.kind not in (CONSTANT, DEGENERATE):
            raise ValueError(f"unknown mobility kind {self.kind!r}")
        if self.beta <= 0.0:
            raise ValueError("mobility scale beta must be positive")


def _scalar_or_array(x, scalar_input):
    return float(x) if scalar_input else x


def _clamped(spec, u):
    return np.clip(u, -1.0 + spec.delta_reg, 1.0 - spec.delta_reg)


def _log_terms(spec, u):
    """Clamped entropic terms and the Taylor-extension offset u - v."""
    v = _clamped(spec, u)
    return v, u - v


def free_energy_density(spec: PotentialSpec, u):
    """F(u).  Accepts scalars or numpy arrays."""
    scalar = np.isscalar(u)
    u = np.asarray(u, dtype=float)
    if spec.kind == DOUBLE_WELL:
        out = 0.25 * (1.0 - u * u) ** 2
    else:
        v, d = _log_terms(spec, u)
        entropic = (1.0 + v) * np.log1p(v) + (1.0 - v) * np.log1p(-v)
        d_entropic = np.log1p(v) - np.log1p(-v)
        dd_entropic = 2.0 / (1.0 - v * v)
        entropic = entropic + d_entropic * d + 0.5 * dd_entropic * d * d
        out = 0.5 * spec.theta * entropic - 0.5 * spec.theta_c * u * u
    return _scalar_or_array(out, scalar)


def reaction(spec: PotentialSpec, u):
    """f(u) = F'(u): u^3 - u for the double well, the extended log form otherwise."""
    scalar = np.isscalar(u)
    u = np.asarray(u, dtype=float)
    if spec.kind == DOUBLE_WELL:
        out = u * u * u - u
    else:
        v, d = _log_terms(spec, u)
        entropic = np.log1p(v) - np.log1p(-v) + 2.0 / (1.0 - v * v) * d
        out = 0.5 * spec.theta * entropic - spec.theta_c * u
    return _scalar_or_array(out, scalar)


def reaction_derivative(spec: PotentialSpec, u):
    """f'(u): 3u^2 - 1 for the double well, theta/(1-u^2) - theta_c (clamped) otherwise."""
    scalar = np.isscalar(u)
    u = np.asarray(u, dtype=float)
    if spec.kind == DOUBLE_WELL:
        out = 3.0 * u * u - 1.0
    else:
        v = _clamped(spec, u)
        out = spec.theta / (1.0 - v * v) - spec.theta_c
    return _scalar_or_array(out, scalar)


def mobility(spec: MobilitySpec, u):
    """mu(u) >= 0 for any real u."""
    scalar = np.isscalar(u)
    u = np.asarray(u, dtype=float)
    if spec.kind == CONSTANT:
        out = np.full(u.shape, spec.beta)
    else:
        out = np.maximum(0.0, spec.beta * (1.0 - u * u))
    return _scalar_or_array(out, scalar)
