"""Flat ``key = value`` configuration files.

The dialect is TOML restricted to top-level dotted keys, e.g.::

    preset = "obstructed"
    gnc.kappa = 1.4
    metrics.segment_lengths = [100, 200]

Every key has a default; unknown keys are rejected. A preset is applied
first and explicit keys override it.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from orora.core import Pose2
from orora.gnc import GncConfig
from orora.metrics import DEFAULT_SEGMENTS
from orora.pipeline import OdometryConfig
from orora.preprocess import DopplerConfig, VoxelConfig
from orora.synth import SceneSpec
from orora.uncertainty import NoiseParams


class ConfigError(ValueError):
    """A configuration file is unreadable, malformed or has bad values."""


@dataclass(frozen=True)
class Settings:
    odometry: OdometryConfig
    segment_lengths: tuple[float, ...] = DEFAULT_SEGMENTS


def _number(value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TypeError(f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise TypeError(f"expected a finite number, got {value!r}")
    return float(value)


def _integer(value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise TypeError(f"expected an integer, got {value!r}")
    return value


def _boolean(value) -> bool:
    if not isinstance(value, bool):
        raise TypeError(f"expected true or false, got {value!r}")
    return value


def _string(value) -> str:
    if not isinstance(value, str):
        raise TypeError(f"expected a string, got {value!r}")
    return value


def _numbers(value) -> tuple[float, ...]:
    if not isinstance(value, list) or not value:
        raise TypeError(f"expected a non-empty list of numbers, got {value!r}")
    return tuple(_number(v) for v in value)


ODOMETRY_KEYS: dict[str, Callable[[Any], Any]] = {
    "preset": _string,
    "noise.sigma_range": _number,
    "noise.sigma_azimuth": _number,
    "doppler.beta": _number,
    "doppler.scan_period": _number,
    "doppler.enabled": _boolean,
    "voxel.size": _number,
    "mcis.cbar": _number,
    "mcis.time_budget_ms": _number,
    "gnc.cbar": _number,
    "gnc.kappa": _number,
    "gnc.max_iterations": _integer,
    "gnc.convergence_tol": _number,
    "gnc.tim_chain": _string,
    "acote.sigma_floor": _number,
    "metrics.segment_lengths": _numbers,
}

SCENE_KEYS: dict[str, Callable[[Any], Any]] = {
    "scene.point_count": _integer,
    "scene.extent": _number,
    "scene.outlier_ratio": _number,
    "scene.sigma_range": _number,
    "scene.sigma_azimuth": _number,
    "scene.noise_model": _string,
    "scene.shape": _string,
    "scene.seed": _integer,
    "scene.max_rotation": _number,
    "scene.max_translation": _number,
    "scene.pose": _numbers,
    "scene.doppler_beta": _number,
    "scene.scan_period": _number,
}


def _flatten(table: Mapping[str, Any], prefix: str = "") -> dict[str, Any]:
    flat: dict[str, Any] = {}
    for key, value in table.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, name + "."))
        else:
            flat[name] = value
    return flat


def parse_keys(text: str, allowed: Mapping[str, Callable], source: str = "<string>") -> dict[str, Any]:
    """Parse ``text`` and type-check every key against ``allowed``."""
    try:
        flat = _flatten(tomllib.loads(text))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: config parse error: {exc}") from None
    out = {}
    for key, value in flat.items():
        if key not in allowed:
            raise ConfigError(f"{source}: unknown config key {key!r}")
        try:
            out[key] = allowed[key](value)
        except TypeError as exc:
            raise ConfigError(f"{source}: {key}: {exc}") from None
    return out


def read_text(path) -> str:
    path = Path(path)
    try:
        return path.read_text()
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None


def build_settings(values: Mapping[str, Any], preset: str | None = None, source: str = "<config>") -> Settings:
    """Preset (argument, else ``preset`` key, else open) then explicit keys."""
    v = dict(values)
    name = preset or v.get("preset", "open")
    try:
        base = OdometryConfig.from_preset(name)
        noise = NoiseParams(
            v.get("noise.sigma_range", base.noise.sigma_range),
            v.get("noise.sigma_azimuth", base.noise.sigma_azimuth),
        )
        doppler = DopplerConfig(
            v.get("doppler.beta", base.doppler.beta),
            v.get("doppler.scan_period", base.doppler.scan_period),
            v.get("doppler.enabled", base.doppler.enabled),
        )
        gnc = GncConfig(
            cbar=v.get("gnc.cbar", base.gnc.cbar),
            kappa=v.get("gnc.kappa", base.gnc.kappa),
            max_iterations=v.get("gnc.max_iterations", base.gnc.max_iterations),
            convergence_tol=v.get("gnc.convergence_tol", base.gnc.convergence_tol),
            tim_chain=v.get("gnc.tim_chain", base.gnc.tim_chain),
        )
        odometry = replace(
            base,
            noise=noise,
            doppler=doppler,
            voxel=VoxelConfig(v.get("voxel.size", base.voxel.size)),
            gnc=gnc,
            mcis_cbar=v.get("mcis.cbar", base.mcis_cbar),
            mcis_time_budget_ms=v.get("mcis.time_budget_ms", base.mcis_time_budget_ms),
            sigma_floor=v.get("acote.sigma_floor", base.sigma_floor),
        )
        segments = v.get("metrics.segment_lengths", DEFAULT_SEGMENTS)
        if min(segments) <= 0:
            raise ValueError("metrics.segment_lengths must be positive")
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return Settings(odometry, tuple(segments))


def load_settings(path=None, preset: str | None = None) -> Settings:
    if path is None:
        return build_settings({}, preset)
    return build_settings(parse_keys(read_text(path), ODOMETRY_KEYS, str(path)), preset, str(path))


def build_scene(values: Mapping[str, Any], source: str = "<spec>") -> SceneSpec:
    v = dict(values)
    base = SceneSpec()
    noise = None
    if "scene.sigma_range" in v or "scene.sigma_azimuth" in v:
        defaults = NoiseParams()
        try:
            noise = NoiseParams(
                v.get("scene.sigma_range", defaults.sigma_range),
                v.get("scene.sigma_azimuth", defaults.sigma_azimuth),
            )
        except ValueError as exc:
            raise ConfigError(f"{source}: {exc}") from None
    pose = None
    if "scene.pose" in v:
        if len(v["scene.pose"]) != 3:
            raise ConfigError(f"{source}: scene.pose takes [x, y, yaw]")
        x, y, yaw = v["scene.pose"]
        pose = Pose2(yaw, (x, y))
    fields = {k.removeprefix("scene."): val for k, val in v.items()}
    for name in ("sigma_range", "sigma_azimuth", "pose"):
        fields.pop(name, None)
    try:
        return replace(base, noise=noise, pose=pose, **fields)
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_scene(path=None) -> SceneSpec:
    """Scene recipe from a file (or defaults), with ``ORORA_SEED`` applied."""
    if path is None:
        return SceneSpec().with_env_seed()
    return build_scene(parse_keys(read_text(path), SCENE_KEYS, str(path)), str(path)).with_env_seed()


def format_scene(spec: SceneSpec) -> str:
    """Serialise ``spec`` in the same dialect ``load_scene`` reads."""
    lines = [
        f"scene.point_count = {spec.point_count}",
        f"scene.extent = {spec.extent!r}",
        f"scene.outlier_ratio = {spec.outlier_ratio!r}",
        f'scene.noise_model = "{spec.noise_model}"',
        f'scene.shape = "{spec.shape}"',
        f"scene.seed = {spec.seed}",
        f"scene.max_rotation = {spec.max_rotation!r}",
        f"scene.max_translation = {spec.max_translation!r}",
        f"scene.doppler_beta = {spec.doppler_beta!r}",
        f"scene.scan_period = {spec.scan_period!r}",
    ]
    if spec.noise is not None:
        lines.append(f"scene.sigma_range = {spec.noise.sigma_range!r}")
        lines.append(f"scene.sigma_azimuth = {spec.noise.sigma_azimuth!r}")
    if spec.pose is not None:
        lines.append(f"scene.pose = [{spec.pose.x!r}, {spec.pose.y!r}, {spec.pose.angle!r}]")
    return "\n".join(lines) + "\n"
