"""Run configuration: JSON schema with SI units in the key names, validated
with field-precise error messages.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import ValidationError
from .fields import AxisSpec, GridSpec
from .forward import ForwardOptions
from .heterodyne import DetectorConfig
from .physics import DecoherenceParams, PhysicsParams
from .reconstruct import CalibParams

_SCENARIO_KINDS = ("flat", "checkerboard", "bitmap", "two_pulse", "coil")

_REQUIRED = object()


def _get(d: dict, path: str, key: str, kind, default=_REQUIRED):
    where = f"{path}.{key}" if path else key
    if key not in d:
        if default is not _REQUIRED:
            return default
        raise ValidationError(f"{where}: missing required key")
    value = d[key]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(f"{where}: expected a number, got {value!r}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValidationError(f"{where}: expected an integer, got {value!r}")
        return value
    if kind is bool:
        if not isinstance(value, bool):
            raise ValidationError(f"{where}: expected a boolean, got {value!r}")
        return value
    if kind is str:
        if not isinstance(value, str):
            raise ValidationError(f"{where}: expected a string, got {value!r}")
        return value
    if kind is dict:
        if not isinstance(value, dict):
            raise ValidationError(f"{where}: expected an object, got {value!r}")
        return value
    if kind is list:
        if not isinstance(value, list):
            raise ValidationError(f"{where}: expected a list, got {value!r}")
        return value
    raise TypeError(kind)


def _floats(d: dict, path: str, key: str, n: int, default=None):
    if default is not None and key not in d:
        return tuple(default)
    raw = _get(d, path, key, list)
    if len(raw) != n or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw
    ):
        raise ValidationError(f"{path}.{key}: expected {n} numbers, got {raw!r}")
    return tuple(float(v) for v in raw)


@dataclass(frozen=True)
class RunConfig:
    grid: GridSpec
    times: AxisSpec
    physics: PhysicsParams
    calib: CalibParams
    scenario: dict
    forward: ForwardOptions
    detector: DetectorConfig | None = None
    decoherence: DecoherenceParams | None = None
    seed: int = 0
    signal_to_lo: float = 0.2
    wind_to_window: bool = True


def _parse_grid(d: dict) -> GridSpec:
    shape = _floats(d, "grid", "shape", 3)
    if any(int(s) != s or s < 1 for s in shape):
        raise ValidationError(f"grid.shape: expected positive integers, got {shape}")
    shape = tuple(int(s) for s in shape)
    steps = _floats(d, "grid", "step_m", 3)
    if any(s <= 0 for s in steps):
        raise ValidationError(f"grid.step_m: steps must be > 0, got {steps}")
    if "origin_m" in d:
        origin = _floats(d, "grid", "origin_m", 3)
        axes = [AxisSpec(n, s, o) for n, s, o in zip(shape, steps, origin)]
        return GridSpec(*axes)
    return GridSpec.centered(shape, steps)


def _parse_times(d: dict) -> AxisSpec:
    n = _get(d, "times", "n", int)
    dt = _get(d, "times", "dt_s", float)
    if n < 1:
        raise ValidationError(f"times.n: must be >= 1, got {n}")
    if dt <= 0:
        raise ValidationError(f"times.dt_s: must be > 0, got {dt}")
    t0 = _get(d, "times", "t0_s", float, default=0.5 * dt)
    return AxisSpec(n, dt, t0)


def _parse_physics(d: dict) -> PhysicsParams:
    g = _floats(d, "physics", "g_omega_c", 2, default=(1.0, 0.0))
    try:
        return PhysicsParams(
            beta0=_get(d, "physics", "beta0_hz_per_m", float),
            k0=_get(d, "physics", "k0_rad_per_m", float),
            xi=_get(d, "physics", "xi_hz_per_m_per_s", float, default=0.0),
            z_g=_get(d, "physics", "z_g_m", float, default=0.0),
            omega_L_bar=_get(d, "physics", "omega_l_bar_rad_per_s", float, default=0.0),
            g_omega_c=complex(g[0], g[1]),
        )
    except ValidationError as exc:
        raise ValidationError(f"physics: {exc}") from exc


def _parse_calib(d: dict) -> CalibParams:
    try:
        return CalibParams(
            z0=_get(d, "calib", "z0_m", float, default=0.0),
            zeta=_get(d, "calib", "zeta_rad_per_s2", float, default=0.0),
            omega_L_bar=_get(d, "calib", "omega_l_bar_rad_per_s", float, default=0.0),
            axis_scale=_floats(d, "calib", "axis_scale", 3, default=(1.0, 1.0, 1.0)),
            rotation_xy=_get(d, "calib", "rotation_xy_rad", float, default=0.0),
            eta_floor=_get(d, "calib", "eta_floor", float, default=0.1),
        )
    except ValidationError as exc:
        if str(exc).startswith("calib"):
            raise
        raise ValidationError(f"calib: {exc}") from exc


def _parse_detector(d: dict) -> DetectorConfig:
    try:
        return DetectorConfig(
            n_px_x=_get(d, "detector", "n_px_x", int),
            n_px_y=_get(d, "detector", "n_px_y", int),
            pixel_pitch=_get(d, "detector", "pixel_pitch_m", float),
            lo_amplitude=_get(d, "detector", "lo_amplitude", float),
            carrier_k=_floats(d, "detector", "carrier_k_rad_per_m", 2),
            filter_radius=_get(d, "detector", "filter_radius_rad_per_m", float),
            frames_per_delay=_get(d, "detector", "frames_per_delay", int, default=100),
            shot_noise=_get(d, "detector", "shot_noise", bool, default=True),
            rng_seed=_get(d, "detector", "rng_seed", int, default=0),
        )
    except ValidationError as exc:
        if str(exc).startswith("detector"):
            raise
        raise ValidationError(f"detector: {exc}") from exc


def _parse_decoherence(d: dict) -> DecoherenceParams:
    tau_beta = _get(d, "decoherence", "tau_beta_s", float, default=float("inf"))
    try:
        return DecoherenceParams(
            tau_k=_get(d, "decoherence", "tau_k_s", float), tau_beta=tau_beta
        )
    except ValidationError as exc:
        if str(exc).startswith("decoherence"):
            raise
        raise ValidationError(f"decoherence: {exc}") from exc


def _parse_scenario(d: dict) -> dict:
    kind = _get(d, "scenario", "kind", str)
    if kind not in _SCENARIO_KINDS:
        raise ValidationError(
            f"scenario.kind: expected one of {_SCENARIO_KINDS}, got {kind!r}"
        )
    cloud = _get(d, "scenario", "cloud", dict, default={})
    out = {"kind": kind, "cloud": dict(cloud)}
    path = "scenario"
    if kind == "checkerboard":
        out["tile_m"] = _get(d, path, "tile_m", float)
        out["amplitude_rad"] = _get(d, path, "amplitude_rad", float)
        out["plane"] = _get(d, path, "plane", str, default="zx")
        out["edge_sigma_m"] = _get(d, path, "edge_sigma_m", float, default=0.0)
    elif kind == "bitmap":
        out["path"] = _get(d, path, "path", str)
        out["scale_m_per_px"] = _get(d, path, "scale_m_per_px", float)
        out["amplitude_rad"] = _get(d, path, "amplitude_rad", float)
        out["plane"] = _get(d, path, "plane", str, default="zx")
        out["edge_sigma_m"] = _get(d, path, "edge_sigma_m", float, default=0.0)
    elif kind == "two_pulse":
        out["alpha"] = _get(d, path, "alpha", float, default=1.0)
        out["delta_t_s"] = _get(d, path, "delta_t_s", float, default=8e-6)
    elif kind == "coil":
        out["radius_m"] = _get(d, path, "radius_m", float)
        out["current_a"] = _get(d, path, "current_a", float)
        out["t_c_s"] = _get(d, path, "t_c_s", float)
        out["center_m"] = _floats(d, path, "center_m", 3, default=(0.0, 0.0, 0.0))
        out["axis"] = _floats(d, path, "axis", 3, default=(0.0, 0.0, 1.0))
        out["b0_t"] = _get(d, path, "b0_t", float, default=1e-4)
    return out


def _parse_forward(d: dict) -> ForwardOptions:
    try:
        return ForwardOptions(
            method=_get(d, "forward", "method", str, default="fft"),
            z_substeps_per_cell=_get(d, "forward", "z_substeps_per_cell", int, default=4),
            include_diffraction=_get(d, "forward", "include_diffraction", bool, default=True),
            include_decay=_get(d, "forward", "include_decay", bool, default=False),
        )
    except ValidationError as exc:
        if str(exc).startswith("forward"):
            raise
        raise ValidationError(f"forward: {exc}") from exc


def config_from_dict(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ValidationError("config root must be a JSON object")
    grid = _parse_grid(_get(raw, "", "grid", dict))
    times = _parse_times(_get(raw, "", "times", dict))
    physics = _parse_physics(_get(raw, "", "physics", dict))
    calib = _parse_calib(_get(raw, "", "calib", dict, default={}))
    scenario = _parse_scenario(_get(raw, "", "scenario", dict))
    fwd_dict = _get(raw, "", "forward", dict, default={})
    forward = _parse_forward(fwd_dict)
    detector = None
    if raw.get("detector") is not None:
        detector = _parse_detector(_get(raw, "", "detector", dict))
    decoherence = None
    if raw.get("decoherence") is not None:
        decoherence = _parse_decoherence(_get(raw, "", "decoherence", dict))
    if forward.include_decay:
        if decoherence is None:
            raise ValidationError(
                "forward.include_decay: requires a decoherence section"
            )
        forward = ForwardOptions(
            method=forward.method,
            z_substeps_per_cell=forward.z_substeps_per_cell,
            include_diffraction=forward.include_diffraction,
            include_decay=True,
            decoherence=decoherence,
        )
    seed = _get(raw, "", "seed", int, default=0)
    signal_to_lo = _get(raw, "", "signal_to_lo", float, default=0.2)
    if signal_to_lo <= 0:
        raise ValidationError(f"signal_to_lo: must be > 0, got {signal_to_lo}")
    wind = _get(raw, "", "wind_to_window", bool, default=True)
    return RunConfig(
        grid=grid,
        times=times,
        physics=physics,
        calib=calib,
        scenario=scenario,
        forward=forward,
        detector=detector,
        decoherence=decoherence,
        seed=seed,
        signal_to_lo=signal_to_lo,
        wind_to_window=wind,
    )


def config_to_dict(cfg: RunConfig) -> dict:
    out = {
        "grid": {
            "shape": list(cfg.grid.shape),
            "step_m": [ax.step for ax in cfg.grid.axes],
            "origin_m": [ax.origin for ax in cfg.grid.axes],
        },
        "times": {"n": cfg.times.n, "dt_s": cfg.times.step, "t0_s": cfg.times.origin},
        "physics": {
            "beta0_hz_per_m": cfg.physics.beta0,
            "k0_rad_per_m": cfg.physics.k0,
            "xi_hz_per_m_per_s": cfg.physics.xi,
            "z_g_m": cfg.physics.z_g,
            "omega_l_bar_rad_per_s": cfg.physics.omega_L_bar,
            "g_omega_c": [cfg.physics.g_omega_c.real, cfg.physics.g_omega_c.imag],
        },
        "calib": {
            "z0_m": cfg.calib.z0,
            "zeta_rad_per_s2": cfg.calib.zeta,
            "omega_l_bar_rad_per_s": cfg.calib.omega_L_bar,
            "axis_scale": list(cfg.calib.axis_scale),
            "rotation_xy_rad": cfg.calib.rotation_xy,
            "eta_floor": cfg.calib.eta_floor,
        },
        "scenario": dict(cfg.scenario),
        "forward": {
            "method": cfg.forward.method,
            "z_substeps_per_cell": cfg.forward.z_substeps_per_cell,
            "include_diffraction": cfg.forward.include_diffraction,
            "include_decay": cfg.forward.include_decay,
        },
        "seed": cfg.seed,
        "signal_to_lo": cfg.signal_to_lo,
        "wind_to_window": cfg.wind_to_window,
    }
    if cfg.detector is not None:
        out["detector"] = {
            "n_px_x": cfg.detector.n_px_x,
            "n_px_y": cfg.detector.n_px_y,
            "pixel_pitch_m": cfg.detector.pixel_pitch,
            "lo_amplitude": cfg.detector.lo_amplitude,
            "carrier_k_rad_per_m": list(cfg.detector.carrier_k),
            "filter_radius_rad_per_m": cfg.detector.filter_radius,
            "frames_per_delay": cfg.detector.frames_per_delay,
            "shot_noise": cfg.detector.shot_noise,
            "rng_seed": cfg.detector.rng_seed,
        }
    if cfg.decoherence is not None:
        out["decoherence"] = {
            "tau_k_s": cfg.decoherence.tau_k,
            "tau_beta_s": cfg.decoherence.tau_beta,
        }
    return out


def load_config(path) -> RunConfig:
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(
                f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from exc
    return config_from_dict(raw)


def save_config(path, cfg: RunConfig) -> None:
    with open(path, "w") as fh:
        json.dump(config_to_dict(cfg), fh, indent=2)
        fh.write("\n")
