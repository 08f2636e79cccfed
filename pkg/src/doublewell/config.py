"""Plain-text run configuration: parsing, validation, canonical emission.

The format is flat ``key = value`` lines, UTF-8, with ``#`` comments and
blank lines ignored.  Unknown keys, duplicates, and type errors are
reported with their line number.  :func:`emit_config` writes every
resolved value back out in canonical order, so ``parse(emit(cfg))``
reproduces ``cfg`` exactly (floats round-trip through repr).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ensemble import EnsembleConfig
from .errors import ConfigError
from .nems import MATERIALS, BeamSpec, CircularSection, RectangularSection, tension_from_buckling_ratio
from .observables import GridSpec
from .operators import WELL_SIGNS, PhysicsParams
from .oracle import ORACLE_DIM_CAP
from .qsd import IntegratorConfig

MODES = ("qsd_ensemble", "master_oracle", "classical", "compare", "nems_map")
OUTPUT_FORMATS = ("csv", "json")
BEAM_SHAPES = ("rectangular", "circular")

# key -> python type used for parsing; order here is the emission order.
_SCHEMA = {
    "mode": str,
    "beta": float,
    "gamma": float,
    "g": float,
    "omega": float,
    "nbar": float,
    "well_sign": str,
    "dim": int,
    "dt": float,
    "t_transient": float,
    "sample_window": float,
    "renormalize": bool,
    "trajectories": int,
    "samples": int,
    "master_seed": int,
    "grid_min": float,
    "grid_max": float,
    "grid_bins": int,
    "output_format": str,
    "material": str,
    "beam_length": float,
    "beam_shape": str,
    "beam_thickness": float,
    "beam_width": float,
    "beam_radius": float,
    "beam_modulus": float,
    "beam_density": float,
    "beam_tension": float,
    "beam_buckling_ratio": float,
    "quality_factor": float,
}


@dataclass(frozen=True)
class SimConfig:
    """Fully resolved description of one run."""

    mode: str
    output_format: str = "csv"
    params: PhysicsParams | None = None
    dim: int = 0
    integrator: IntegratorConfig | None = None
    trajectories: int = 512
    samples: int = 64
    master_seed: int = 12345
    grid: GridSpec | None = None
    beam: BeamSpec | None = None
    quality_factor: float | None = None
    defaulted: tuple = field(default=(), compare=False)

    def ensemble_config(self) -> EnsembleConfig:
        return EnsembleConfig(
            trajectories=self.trajectories,
            grid=self.grid,
            samples=self.samples,
            master_seed=self.master_seed,
        )


def _parse_lines(text: str) -> dict:
    values: dict[str, tuple] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw_line.strip()!r}", line=lineno)
        key, _, raw_value = line.partition("=")
        key, raw_value = key.strip(), raw_value.strip()
        if key not in _SCHEMA:
            raise ConfigError(f"unknown key {key!r}", line=lineno, key=key)
        if key in values:
            raise ConfigError(
                f"duplicate key {key!r} (first set on line {values[key][1]})",
                line=lineno,
                key=key,
            )
        if not raw_value:
            raise ConfigError(f"key {key!r} has no value", line=lineno, key=key)
        values[key] = (raw_value, lineno)
    return values


def _convert(key: str, raw: str, lineno: int):
    kind = _SCHEMA[key]
    if kind is bool:
        if raw == "true":
            return True
        if raw == "false":
            return False
        raise ConfigError(f"{key} must be 'true' or 'false', got {raw!r}", line=lineno, key=key)
    try:
        return kind(raw)
    except ValueError:
        raise ConfigError(
            f"{key} must be {'an integer' if kind is int else 'a number'}, got {raw!r}",
            line=lineno,
            key=key,
        ) from None


def _build_beam(get, lineno_of) -> BeamSpec:
    def need(key):
        v = get(key)
        if v is None:
            raise ConfigError(f"nems_map requires {key}", key=key)
        return v

    shape = need("beam_shape")
    if shape not in BEAM_SHAPES:
        raise ConfigError(
            f"beam_shape must be one of {BEAM_SHAPES}, got {shape!r}",
            line=lineno_of("beam_shape"),
            key="beam_shape",
        )
    if shape == "rectangular":
        section = RectangularSection(need("beam_thickness"), need("beam_width"))
    else:
        section = CircularSection(need("beam_radius"))

    material = get("material")
    modulus, density = get("beam_modulus"), get("beam_density")
    if material is not None:
        if material not in MATERIALS:
            raise ConfigError(
                f"unknown material {material!r}; choose from {tuple(MATERIALS)}",
                line=lineno_of("material"),
                key="material",
            )
        modulus = modulus if modulus is not None else MATERIALS[material].modulus
        density = density if density is not None else MATERIALS[material].density
    if modulus is None or density is None:
        raise ConfigError(
            "nems_map needs beam_modulus and beam_density (or a material preset)",
            key="beam_modulus",
        )

    tension = get("beam_tension")
    ratio = get("beam_buckling_ratio")
    if (tension is None) == (ratio is None):
        raise ConfigError(
            "give exactly one of beam_tension or beam_buckling_ratio",
            key="beam_tension",
        )
    length = need("beam_length")
    if tension is None:
        tension = tension_from_buckling_ratio(
            section, length=length, lam=ratio, modulus=modulus
        )
    return BeamSpec(
        length=length, section=section, modulus=modulus, density=density, tension=tension
    )


def parse_config(text: str) -> SimConfig:
    """Parse and validate a configuration, applying documented defaults.

    Every key whose value was not given explicitly is listed in the
    returned config's `defaulted` tuple (recorded in run manifests).
    """
    values = _parse_lines(text)
    parsed = {k: _convert(k, raw, ln) for k, (raw, ln) in values.items()}

    def get(key, default=None):
        return parsed.get(key, default)

    def lineno_of(key):
        return values[key][1] if key in values else None

    mode = get("mode")
    if mode is None:
        raise ConfigError("config must set mode", key="mode")
    if mode not in MODES:
        raise ConfigError(
            f"mode must be one of {MODES}, got {mode!r}", line=lineno_of("mode"), key="mode"
        )

    defaulted = []
    output_format = get("output_format", "csv")
    if "output_format" not in parsed:
        defaulted.append("output_format")
    if output_format not in OUTPUT_FORMATS:
        raise ConfigError(
            f"output_format must be one of {OUTPUT_FORMATS}, got {output_format!r}",
            line=lineno_of("output_format"),
            key="output_format",
        )

    if mode == "nems_map":
        for key in parsed:
            if key not in (
                "mode", "output_format", "material", "quality_factor",
            ) and not key.startswith("beam_"):
                raise ConfigError(
                    f"key {key!r} does not apply to nems_map",
                    line=lineno_of(key),
                    key=key,
                )
        beam = _build_beam(get, lineno_of)
        return SimConfig(
            mode=mode,
            output_format=output_format,
            beam=beam,
            quality_factor=get("quality_factor"),
            defaulted=tuple(defaulted),
        )

    for key in parsed:
        if key.startswith("beam_") or key == "material":
            raise ConfigError(
                f"key {key!r} only applies to nems_map", line=lineno_of(key), key=key
            )
    if get("beta") is None or get("gamma") is None:
        raise ConfigError(f"mode {mode} requires beta and gamma", key="beta")

    simple_defaults = {
        "g": 0.3,
        "omega": 1.0,
        "nbar": 0.0,
        "well_sign": "double_well",
        "dim": 120,
        "dt": 1e-3,
        "renormalize": True,
        "trajectories": 512,
        "samples": 64,
        "master_seed": 12345,
        "grid_bins": 256,
    }
    resolved = {}
    for key, default in simple_defaults.items():
        if key in parsed:
            resolved[key] = parsed[key]
        else:
            resolved[key] = default
            defaulted.append(key)

    if resolved["well_sign"] not in WELL_SIGNS:
        raise ConfigError(
            f"well_sign must be one of {WELL_SIGNS}, got {resolved['well_sign']!r}",
            line=lineno_of("well_sign"),
            key="well_sign",
        )
    try:
        params = PhysicsParams(
            beta=get("beta"),
            gamma=get("gamma"),
            g=resolved["g"],
            omega=resolved["omega"],
            nbar=resolved["nbar"],
            well_sign=resolved["well_sign"],
        )
    except ConfigError as err:
        raise ConfigError(str(err), key=err.key) from None

    period = 2.0 * np.pi / params.omega
    t_transient = get("t_transient")
    if t_transient is None:
        t_transient = 20.0 * period
        defaulted.append("t_transient")
    sample_window = get("sample_window")
    if sample_window is None:
        sample_window = 2.0 * period
        defaulted.append("sample_window")
    try:
        integrator = IntegratorConfig(
            dt=resolved["dt"],
            t_transient=t_transient,
            t_sample_window=sample_window,
            renormalize_every_step=resolved["renormalize"],
        )
    except ValueError as err:
        raise ConfigError(str(err), line=lineno_of("dt"), key="dt") from None

    grid_min = get("grid_min")
    grid_max = get("grid_max")
    if grid_min is None:
        grid_min = -2.5 / params.beta
        defaulted.append("grid_min")
    if grid_max is None:
        grid_max = 2.5 / params.beta
        defaulted.append("grid_max")
    try:
        grid = GridSpec(grid_min, grid_max, resolved["grid_bins"])
    except ValueError as err:
        raise ConfigError(str(err), line=lineno_of("grid_min"), key="grid_min") from None

    if resolved["dim"] < 2:
        raise ConfigError("dim must be at least 2", line=lineno_of("dim"), key="dim")
    if mode in ("master_oracle", "compare") and resolved["dim"] > ORACLE_DIM_CAP:
        raise ConfigError(
            f"mode {mode} solves the dense master equation and is capped at "
            f"dim <= {ORACLE_DIM_CAP}, got {resolved['dim']}",
            line=lineno_of("dim"),
            key="dim",
        )
    if resolved["trajectories"] < 1:
        raise ConfigError("trajectories must be positive", line=lineno_of("trajectories"), key="trajectories")
    if resolved["samples"] < 1:
        raise ConfigError("samples must be positive", line=lineno_of("samples"), key="samples")

    return SimConfig(
        mode=mode,
        output_format=output_format,
        params=params,
        dim=resolved["dim"],
        integrator=integrator,
        trajectories=resolved["trajectories"],
        samples=resolved["samples"],
        master_seed=resolved["master_seed"],
        grid=grid,
        quality_factor=get("quality_factor"),
        defaulted=tuple(defaulted),
    )


def parse_config_file(path) -> SimConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        raise ConfigError(f"cannot read config file {path}: {err}") from None
    return parse_config(text)


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def config_items(cfg: SimConfig) -> list[tuple[str, object]]:
    """All resolved (key, value) pairs of a config, in canonical order."""
    items: dict[str, object] = {"mode": cfg.mode}
    if cfg.params is not None:
        p, icfg, grid = cfg.params, cfg.integrator, cfg.grid
        items.update(
            beta=p.beta, gamma=p.gamma, g=p.g, omega=p.omega, nbar=p.nbar,
            well_sign=p.well_sign, dim=cfg.dim, dt=icfg.dt,
            t_transient=icfg.t_transient, sample_window=icfg.t_sample_window,
            renormalize=icfg.renormalize_every_step, trajectories=cfg.trajectories,
            samples=cfg.samples, master_seed=cfg.master_seed,
            grid_min=grid.x_min, grid_max=grid.x_max, grid_bins=grid.bins,
        )
    items["output_format"] = cfg.output_format
    if cfg.beam is not None:
        b = cfg.beam
        items["beam_length"] = b.length
        if isinstance(b.section, RectangularSection):
            items["beam_shape"] = "rectangular"
            items["beam_thickness"] = b.section.thickness
            items["beam_width"] = b.section.width
        else:
            items["beam_shape"] = "circular"
            items["beam_radius"] = b.section.radius
        items["beam_modulus"] = b.modulus
        items["beam_density"] = b.density
        items["beam_tension"] = b.tension
    if cfg.quality_factor is not None:
        items["quality_factor"] = cfg.quality_factor
    return [(k, items[k]) for k in _SCHEMA if k in items]


def emit_config(cfg: SimConfig) -> str:
    """Canonical text form; parse_config(emit_config(cfg)) == cfg."""
    lines = [f"{key} = {_format_value(value)}" for key, value in config_items(cfg)]
    return "\n".join(lines) + "\n"


def _panel_config(mode, beta, gamma, nbar, dim, trajectories, master_seed) -> SimConfig:
    params = PhysicsParams(beta=beta, gamma=gamma, nbar=nbar)
    return SimConfig(
        mode=mode,
        params=params,
        dim=dim,
        integrator=IntegratorConfig.for_drive(params.omega),
        trajectories=trajectories,
        samples=64,
        master_seed=master_seed,
        grid=GridSpec(-2.5 / beta, 2.5 / beta, 256),
        defaulted=(),
    )


# Fock-space sizes that keep top-of-ladder occupation below the leakage
# threshold for each (beta, nbar) combination used by the presets.
_PRESET_DIMS = {
    (0.3, 0.0): 130,
    (1.0, 0.0): 64,
    (0.3, 4.0): 170,
    (1.0, 4.0): 100,
    (1.0, 0.5): 80,
    (0.3, 0.5): 140,
}


def fig1_preset(master_seed: int = 12345, trajectories: int = 512) -> list[tuple[str, SimConfig]]:
    """Averaged P(x) across the quantum-to-classical transition.

    Panels beta in {0.01, 0.3, 1.0} x Gamma in {0.125, 0.3}.  The beta =
    0.01 column is far beyond reachable Fock truncations (the wells sit at
    +-100), so it runs the classical limit, which beta-rescaling makes
    exact up to quantum corrections of order beta.
    """
    panels = []
    for gamma in (0.125, 0.3):
        for beta in (0.01, 0.3, 1.0):
            label = f"beta{beta:g}_gamma{gamma:g}"
            if beta == 0.01:
                cfg = _panel_config("classical", beta, gamma, 0.0, 2, 4096, master_seed)
            else:
                dim = _PRESET_DIMS[(beta, 0.0)]
                cfg = _panel_config("qsd_ensemble", beta, gamma, 0.0, dim, trajectories, master_seed)
            panels.append((label, cfg))
    return panels


def fig2_preset(master_seed: int = 12345, trajectories: int = 512) -> list[tuple[str, SimConfig]]:
    """Thermal-bath version: rows (nbar, Gamma), columns beta as in fig1."""
    rows = ((4.0, 0.03), (4.0, 0.125), (4.0, 0.3), (0.5, 0.3))
    panels = []
    for nbar, gamma in rows:
        for beta in (0.01, 0.3, 1.0):
            label = f"beta{beta:g}_gamma{gamma:g}_nbar{nbar:g}"
            if beta == 0.01:
                cfg = _panel_config("classical", beta, gamma, nbar, 2, 4096, master_seed)
            else:
                dim = _PRESET_DIMS[(beta, nbar)]
                cfg = _panel_config("qsd_ensemble", beta, gamma, nbar, dim, trajectories, master_seed)
            panels.append((label, cfg))
    return panels


PRESETS = {"fig1": fig1_preset, "fig2": fig2_preset}
