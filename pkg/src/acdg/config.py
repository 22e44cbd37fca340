"""Run configuration: flat key=value files, presets, and initial data.

The configuration format is a plain text file of `key = value` lines;
`#` starts a comment and blank lines are ignored.  Unknown keys are
rejected, and every diagnostic names the offending key (and line, when it
came from a file).  Numeric values may use `pi`, as in `2*pi` or `pi/50`.

Documented keys (see the shipped presets for complete examples):

    dimension      1 | 2
    length         domain length (1D)
    width, height  domain extents (2D)
    nx, ny         elements per direction (2D uses nx*ny squares -> 2*nx*ny triangles)
    degree         polynomial degree, 1 | 2
    epsilon        interaction length, > 0
    potential      double_well | logarithmic
    theta, theta_c temperatures for the logarithmic potential
    mobility       constant | degenerate
    beta           mobility scale (default 1.0)
    sigma          penalty parameter, or `auto` for the degree-based default
    initial        offset_sine | two_bumps | random | constant
    ic_mode        project | interpolate (default project; random data is
                   always interpolated so its amplitude bound is exact)
    amplitude      random-initial amplitude (default 0.05)
    seed           random-initial seed (default 2024)
    value          constant-initial value (default 0.0)
    t_end          final time
    delta_tol      error-estimator tolerance
    tau0           initial step size (default 0.05)
    rho            controller safety factor (default 0.9)
    estimator      euclidean | mass_weighted (default euclidean)
    energy_edges   all | interior_only (default all)
    ripening       auto | min | max (default auto)
    snapshot_times comma-separated times (default empty)
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from math import pi

import numpy as np

from . import assembly, driver, physics
from .dg_core import DGSpace, l2_project, nodal_interpolate
from .mesh import Mesh, build_mesh_1d, build_mesh_2d

PRESET_NAMES = ("ex_1d_dw", "ex_2d_dw", "ex_2d_log", "ex_2d_logdeg")


class ConfigError(ValueError):
    pass


_PI_FORM = re.compile(r"^(?:([-+0-9.eE]+)\s*\*\s*)?pi(?:\s*/\s*([-+0-9.eE]+))?$")


def parse_float(text: str) -> float:
    """Float literal, optionally written as `a*pi`, `pi/b`, `a*pi/b`, or `pi`."""
    text = text.strip()
    m = _PI_FORM.match(text)
    if m:
        value = pi
        if m.group(1):
            value *= float(m.group(1))
        if m.group(2):
            value /= float(m.group(2))
        return value
    return float(text)


@dataclass(frozen=True)
class RunConfig:
    dimension: int
    extents: tuple          # (length,) or (width, height)
    nx: int
    ny: int
    degree: int
    epsilon: float
    potential: physics.PotentialSpec
    mobility: physics.MobilitySpec
    sigma: float            # resolved numeric value
    initial: str
    ic_mode: str
    amplitude: float
    seed: int
    value: float
    t_end: float
    delta_tol: float
    tau0: float
    rho: float
    estimator: str
    energy_edges: str
    ripening: str
    snapshot_times: tuple = field(default_factory=tuple)


_CHOICES = {
    "dimension": ("1", "2"),
    "degree": ("1", "2"),
    "potential": (physics.DOUBLE_WELL, physics.LOGARITHMIC),
    "mobility": (physics.CONSTANT, physics.DEGENERATE),
    "initial": ("offset_sine", "two_bumps", "random", "constant"),
    "ic_mode": ("project", "interpolate"),
    "estimator": ("euclidean", "mass_weighted"),
    "energy_edges": (assembly.ALL_EDGES, assembly.INTERIOR_ONLY),
    "ripening": ("auto", "min", "max"),
}

_ALL_KEYS = {
    "dimension", "length", "width", "height", "nx", "ny", "degree",
    "epsilon", "potential", "theta", "theta_c", "mobility", "beta", "sigma",
    "initial", "ic_mode", "amplitude", "seed", "value",
    "t_end", "delta_tol", "tau0", "rho",
    "estimator", "energy_edges", "ripening", "snapshot_times",
}


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Raw `key -> (value, location)` pairs with duplicate/unknown-key checks."""
    pairs: dict[str, tuple[str, str]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if "=" not in line:
            raise ConfigError(f"{where}: expected `key = value`, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _ALL_KEYS:
            raise ConfigError(f"{where}: unknown key {key!r}")
        if key in pairs:
            raise ConfigError(f"{where}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"{where}: empty value for key {key!r}")
        pairs[key] = (value, where)
    return pairs


class _Reader:
    def __init__(self, pairs):
        self.pairs = dict(pairs)

    def take(self, key, default=None, required=False):
        if key in self.pairs:
            value, where = self.pairs.pop(key)
            return value, where
        if required:
            raise ConfigError(f"missing required key {key!r}")
        return default, None

    def number(self, key, default=None, required=False, positive=False):
        value, where = self.take(key, required=required)
        if value is None:
            return default
        try:
            out = parse_float(value)
        except ValueError:
            raise ConfigError(f"{where}: cannot parse {key} value {value!r} as a number")
        if positive and out <= 0:
            raise ConfigError(f"{where}: {key} must be positive, got {out}")
        return out

    def integer(self, key, default=None, required=False, minimum=None):
        value, where = self.take(key, required=required)
        if value is None:
            return default
        try:
            out = int(value)
        except ValueError:
            raise ConfigError(f"{where}: cannot parse {key} value {value!r} as an integer")
        if minimum is not None and out < minimum:
            raise ConfigError(f"{where}: {key} must be >= {minimum}, got {out}")
        return out

    def choice(self, key, default=None, required=False):
        value, where = self.take(key, required=required)
        if value is None:
            return default
        if value not in _CHOICES[key]:
            raise ConfigError(
                f"{where}: {key} must be one of {', '.join(_CHOICES[key])}; got {value!r}")
        return value


def build_config(pairs: dict) -> RunConfig:
    """Validate raw pairs into a RunConfig; every error names its key."""
    r = _Reader(pairs)
    dimension = int(r.choice("dimension", required=True))
    degree = int(r.choice("degree", required=True))
    if dimension == 1:
        length = r.number("length", required=True, positive=True)
        extents = (length,)
        nx = r.integer("nx", required=True, minimum=2)
        ny = 0
        for key in ("width", "height", "ny"):
            if key in r.pairs:
                _, where = r.pairs[key]
                raise ConfigError(f"{where}: key {key!r} does not apply to dimension 1")
    else:
        width = r.number("width", required=True, positive=True)
        height = r.number("height", required=True, positive=True)
        extents = (width, height)
        nx = r.integer("nx", required=True, minimum=2)
        ny = r.integer("ny", required=True, minimum=2)
        if "length" in r.pairs:
            _, where = r.pairs["length"]
            raise ConfigError(f"{where}: key 'length' does not apply to dimension 2")

    epsilon = r.number("epsilon", required=True, positive=True)
    pot_kind = r.choice("potential", required=True)
    theta = r.number("theta", default=0.0)
    theta_c = r.number("theta_c", default=0.0)
    if pot_kind == physics.LOGARITHMIC:
        if theta is None or theta_c is None or theta <= 0 or theta_c <= 0:
            raise ConfigError("logarithmic potential requires positive theta and theta_c")
        if theta > theta_c:
            raise ConfigError("logarithmic potential requires theta <= theta_c")
    try:
        potential = physics.PotentialSpec(pot_kind, theta=theta, theta_c=theta_c)
    except ValueError as exc:
        raise ConfigError(str(exc))

    mob_kind = r.choice("mobility", required=True)
    beta = r.number("beta", default=1.0, positive=True)
    mobility = physics.MobilitySpec(mob_kind, beta=beta)

    sigma_raw, sigma_where = r.take("sigma", default="auto")
    if sigma_raw == "auto" or sigma_raw is None:
        sigma = assembly.default_sigma(degree, dimension)
    else:
        try:
            sigma = parse_float(sigma_raw)
        except ValueError:
            raise ConfigError(f"{sigma_where}: cannot parse sigma value {sigma_raw!r}")
        if sigma <= 0:
            raise ConfigError(f"{sigma_where}: sigma must be positive, got {sigma}")

    initial = r.choice("initial", required=True)
    if initial == "two_bumps" and dimension != 2:
        raise ConfigError("initial two_bumps requires dimension = 2")
    if initial == "offset_sine" and dimension != 1:
        raise ConfigError("initial offset_sine requires dimension = 1")
    ic_mode = r.choice("ic_mode", default="project")
    amplitude = r.number("amplitude", default=0.05)
    if amplitude < 0:
        raise ConfigError("amplitude must be non-negative")
    seed = r.integer("seed", default=2024)
    value = r.number("value", default=0.0)

    t_end = r.number("t_end", required=True, positive=True)
    delta_tol = r.number("delta_tol", required=True, positive=True)
    tau0 = r.number("tau0", default=0.05, positive=True)
    rho = r.number("rho", default=0.9)
    if not 0.0 < rho < 1.0:
        raise ConfigError("rho must lie in (0, 1)")

    estimator = r.choice("estimator", default="euclidean")
    energy_edges = r.choice("energy_edges", default=assembly.ALL_EDGES)
    ripening = r.choice("ripening", default="auto")

    snap_raw, snap_where = r.take("snapshot_times", default=None)
    snapshot_times = ()
    if snap_raw:
        try:
            snapshot_times = tuple(parse_float(s) for s in snap_raw.split(",") if s.strip())
        except ValueError:
            raise ConfigError(f"{snap_where}: cannot parse snapshot_times {snap_raw!r}")
        bad = [s for s in snapshot_times if not 0.0 <= s <= t_end]
        if bad:
            raise ConfigError(
                f"{snap_where}: snapshot_times must lie in [0, t_end], got {bad}")

    return RunConfig(
        dimension=dimension, extents=extents, nx=nx, ny=ny, degree=degree,
        epsilon=epsilon, potential=potential, mobility=mobility, sigma=sigma,
        initial=initial, ic_mode=ic_mode, amplitude=amplitude, seed=seed, value=value,
        t_end=t_end, delta_tol=delta_tol, tau0=tau0, rho=rho,
        estimator=estimator, energy_edges=energy_edges, ripening=ripening,
        snapshot_times=snapshot_times,
    )


def load_config(path, overrides=None) -> RunConfig:
    """Parse a config file, apply `key=value` overrides, and validate."""
    with open(path, "r", encoding="utf-8") as f:
        pairs = parse_config_text(f.read(), source=str(path))
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} must have the form key=value")
        key, value = (part.strip() for part in item.split("=", 1))
        if key not in _ALL_KEYS:
            raise ConfigError(f"override: unknown key {key!r}")
        pairs[key] = (value, f"--set {key}")
    return build_config(pairs)


def preset_text(name: str) -> str:
    if name not in PRESET_NAMES:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}")
    return resources.files("acdg").joinpath(f"presets/{name}.cfg").read_text()


def load_preset(name: str, overrides=None) -> RunConfig:
    pairs = parse_config_text(preset_text(name), source=f"preset:{name}")
    for item in overrides or ():
        key, value = (part.strip() for part in item.split("=", 1))
        if key not in _ALL_KEYS:
            raise ConfigError(f"override: unknown key {key!r}")
        pairs[key] = (value, f"--set {key}")
    return build_config(pairs)


# ---------------------------------------------------------------------------
# initial data

def _splitmix64(z: np.ndarray) -> np.ndarray:
    z = (z + np.uint64(0x9E3779B97F4A7C15)).astype(np.uint64)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def random_initial_field(seed: int, amplitude: float):
    """Deterministic noise field: uniform values in [-amplitude, amplitude].

    The value at a point is a SplitMix64 hash of the seed and the IEEE bit
    patterns of the coordinates, so the field is a genuine function of
    position: the same seed always reproduces the same field, at any
    evaluation points.
    """
    seed64 = np.uint64(np.int64(seed).view(np.uint64) if seed < 0 else seed)

    def field_fn(x, y=None):
        with np.errstate(over="ignore"):
            bits = np.asarray(x, dtype=np.float64).view(np.uint64)
            z = _splitmix64(seed64 ^ bits)
            if y is not None:
                ybits = np.asarray(y, dtype=np.float64).view(np.uint64)
                z = _splitmix64(z ^ ybits)
        u01 = z.astype(np.float64) / 2.0**64
        return amplitude * (2.0 * u01 - 1.0)

    return field_fn


def initial_condition(cfg: RunConfig):
    """Callable initial field for the configured run."""
    if cfg.initial == "offset_sine":
        return lambda x: 0.8 + np.sin(x)
    if cfg.initial == "two_bumps":
        # two metastable positive regions on a u = -1 background
        return lambda x, y: (2.0 * np.exp(np.sin(x) + np.sin(y) - 2.0)
                             + 2.2 * np.exp(-np.sin(x) - np.sin(y) - 2.0) - 1.0)
    if cfg.initial == "constant":
        c = cfg.value
        if cfg.dimension == 1:
            return lambda x: np.full_like(np.asarray(x, dtype=float), c)
        return lambda x, y: np.full_like(np.asarray(x, dtype=float), c)
    return random_initial_field(cfg.seed, cfg.amplitude)


def build_mesh(cfg: RunConfig) -> Mesh:
    if cfg.dimension == 1:
        return build_mesh_1d(cfg.extents[0], cfg.nx)
    return build_mesh_2d(cfg.extents[0], cfg.extents[1], cfg.nx, cfg.ny)


def build_space(cfg: RunConfig) -> DGSpace:
    return DGSpace(build_mesh(cfg), cfg.degree)


def initial_coefficients(cfg: RunConfig, space: DGSpace) -> np.ndarray:
    """Projected (named) or interpolated (random) initial coefficient vector.

    Random data is interpolated at the nodes rather than L2-projected so
    the stated amplitude bound holds for the nodal values exactly.
    """
    f = initial_condition(cfg)
    if cfg.initial == "random" or cfg.ic_mode == "interpolate":
        return nodal_interpolate(space, f)
    return l2_project(space, f)


def model_config(cfg: RunConfig) -> driver.ModelConfig:
    return driver.ModelConfig(
        epsilon=cfg.epsilon, potential=cfg.potential, mobility=cfg.mobility,
        sigma=cfg.sigma, energy_edges=cfg.energy_edges)


def adaptive_settings(cfg: RunConfig) -> driver.AdaptiveSettings:
    return driver.AdaptiveSettings(
        delta_tol=cfg.delta_tol, t_end=cfg.t_end, tau0=cfg.tau0, rho=cfg.rho,
        estimator=cfg.estimator)


def run_from_config(cfg: RunConfig) -> tuple[driver.RunTrace, DGSpace]:
    """Build mesh/space/initial data and run the adaptive loop."""
    space = build_space(cfg)
    xi0 = initial_coefficients(cfg, space)
    trace = driver.run_adaptive(
        xi0, space, model_config(cfg), adaptive_settings(cfg),
        snapshot_times=cfg.snapshot_times)
    trace.ripening_time = driver.detect_ripening(trace, mode=cfg.ripening)
    return trace, space
