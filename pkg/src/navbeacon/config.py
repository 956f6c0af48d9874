"""Runtime configuration: JSON file plus NAVBEACON_* environment overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from .geometry import AnchorTransform, Quat, Vec3
from .intent import BackendConfig
from .robot_bridge import DEFAULT_PORT, SimParams
from .vad import VadConfig

ENV_PREFIX = "NAVBEACON_"


class ConfigError(Exception):
    pass


@dataclass
class AppConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    anchor: AnchorTransform = field(default_factory=AnchorTransform.identity)
    d_th: float = 0.15
    r_hit: float = 0.15
    vad: VadConfig = field(default_factory=lambda: VadConfig(threshold=0.01))
    backend: BackendConfig = field(default_factory=BackendConfig)
    bridge_host: str = "127.0.0.1"
    bridge_port: int = DEFAULT_PORT
    sim_embedded: bool = True
    sim: SimParams = field(default_factory=SimParams)
    store_dir: str = "store"
    session_dir: str = "sessions"

    def validate(self) -> "AppConfig":
        if self.d_th <= 0:
            raise ConfigError(f"d_th must be positive, got {self.d_th}")
        if self.r_hit <= 0:
            raise ConfigError(f"r_hit must be positive, got {self.r_hit}")
        if not (0 < self.port < 65536 and 0 < self.bridge_port < 65536):
            raise ConfigError("ports must be in 1..65535")
        return self


# env var name (without prefix) -> (attribute path, parser)
_ENV_FIELDS = {
    "HOST": ("host", str),
    "PORT": ("port", int),
    "D_TH": ("d_th", float),
    "R_HIT": ("r_hit", float),
    "BRIDGE_HOST": ("bridge_host", str),
    "BRIDGE_PORT": ("bridge_port", int),
    "SIM_EMBEDDED": ("sim_embedded", lambda v: v.lower() in ("1", "true", "yes")),
    "STORE_DIR": ("store_dir", str),
    "SESSION_DIR": ("session_dir", str),
    "STT_URL": ("backend.stt_url", str),
    "LLM_URL": ("backend.llm_url", str),
    "BACKEND_TIMEOUT": ("backend.timeout", float),
}


def load_config(path: str | None = None, env: dict | None = None) -> AppConfig:
    """Build an AppConfig from an optional JSON file and the environment."""
    raw: dict = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as f:
                raw = json.load(f)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"config {path} must be a JSON object")

    cfg = _from_dict(raw)
    _apply_env(cfg, os.environ if env is None else env)
    return cfg.validate()


def _from_dict(raw: dict) -> AppConfig:
    cfg = AppConfig()
    for key in ("host", "port", "d_th", "r_hit", "bridge_host", "bridge_port",
                "sim_embedded", "store_dir", "session_dir"):
        if key in raw:
            setattr(cfg, key, raw[key])
    if "anchor" in raw:
        a = raw["anchor"]
        try:
            cfg.anchor = AnchorTransform(
                Vec3.from_list(a["translation"]), Quat.from_list(a["rotation"])
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad anchor transform: {exc}") from exc
    if "vad" in raw:
        try:
            cfg.vad = VadConfig(**raw["vad"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad vad config: {exc}") from exc
    if "backend" in raw:
        try:
            cfg.backend = BackendConfig(**raw["backend"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad backend config: {exc}") from exc
    if "sim" in raw:
        try:
            cfg.sim = SimParams(**raw["sim"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad sim params: {exc}") from exc
    return cfg


def _apply_env(cfg: AppConfig, env) -> None:
    for name, (path, parse) in _ENV_FIELDS.items():
        value = env.get(ENV_PREFIX + name)
        if value is None:
            continue
        try:
            parsed = parse(value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {ENV_PREFIX + name}: {value!r}") from exc
        if "." in path:
            attr, sub = path.split(".", 1)
            current = getattr(cfg, attr)
            # BackendConfig is frozen: rebuild with the one field replaced
            fields = {k: getattr(current, k) for k in current.__dataclass_fields__}
            fields[sub] = parsed
            setattr(cfg, attr, type(current)(**fields))
        else:
            setattr(cfg, path, parsed)
