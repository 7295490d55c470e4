"""Run configuration: JSON schema checks with pointer-style errors."""
from __future__ import annotations

import copy
import difflib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .adapt import AdaptConfig
from .noise import MITIGATION_METHODS, NoiseModel, ZNEConfig
from .vqe import OptimizerConfig

METHODS = ("diag", "vqe", "adapt", "double-adapt", "tetris", "compare", "forge", "mitigation",
           "zne-experiment", "trex-experiment")
ENGINE_METHODS = ("vqe", "adapt", "double-adapt", "tetris")
# methods that need a block beyond the defaults
REQUIRED_BLOCKS = {"forge": ("forging",), "mitigation": ("noise",), "zne-experiment": ("noise",),
                   "trex-experiment": ("noise",)}
SOURCES = ("bundled", "fcidump", "pauli")


class ConfigError(ValueError):
    """Invalid configuration; ``pointer`` locates the offending field."""

    def __init__(self, pointer: str, message: str):
        self.pointer = pointer or "/"
        super().__init__(f"{self.pointer}: {message}")


# schema: key -> type spec, nested dicts for blocks; None means "any JSON value"
_SCHEMA = {
    "name": str,
    "description": str,
    "method": str,
    "seed": int,
    "hamiltonian": {
        "bundled": str, "fcidump": str, "pauli": str, "mapping": str,
        "active_space": {"frozen_occupied": list, "active": list, "n_active_electrons": int},
        "system": {"n_spatial": int, "n_up": int, "n_down": int, "mapping": str},
    },
    "ansatz": str,
    "optimizer": {k: None for k in OptimizerConfig.__dataclass_fields__},
    "adapt": {k: None for k in AdaptConfig.__dataclass_fields__ if k != "optimizer"},
    "compare": {"methods": list, "overrides": dict},
    "noise": {"p2": float, "p01": None, "p10": None},
    "zne": {"scale_factors": list, "extrapolator": str, "shots": int},
    "trex": {"calib_shots": int, "f_min": float},
    "mitigation": {"seeds": list, "n_seeds": int, "methods": list},
    "forging": {"k": int, "layers": int, "bitstrings": list, "schmidt_coeffs": list,
                "full_space": str, "fd_step": float},
    "output": {"dir": str, "timing": bool},
}


def _type_ok(value, spec) -> bool:
    if spec is None:
        return True
    if spec is float:
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if spec is int:
        return isinstance(value, int) and not isinstance(value, bool)
    return isinstance(value, spec)


def _walk(obj: dict, schema: dict, ptr: str, warnings: list) -> None:
    for key, value in list(obj.items()):
        here = f"{ptr}/{key}"
        if key not in schema:
            hint = difflib.get_close_matches(key, list(schema), n=1)
            msg = f"unknown key {here}" + (f"; did you mean {hint[0]!r}?" if hint else "")
            warnings.append(msg)
            del obj[key]   # ignored, so it cannot reach a constructor
            continue
        spec = schema[key]
        if isinstance(spec, dict):
            if not isinstance(value, dict):
                raise ConfigError(here, "expected an object")
            _walk(value, spec, here, warnings)
        elif not _type_ok(value, spec):
            raise ConfigError(here, f"expected {spec.__name__}, got {type(value).__name__}")


@dataclass
class RunConfig:
    method: str
    hamiltonian: dict
    seed: int = 0
    name: str = ""
    ansatz: str = "uccsd"
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    adapt: dict = field(default_factory=dict)
    compare: dict = field(default_factory=dict)
    noise: NoiseModel | None = None
    zne: ZNEConfig = field(default_factory=ZNEConfig)
    trex: dict = field(default_factory=dict)
    mitigation: dict = field(default_factory=dict)
    forging: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def adapt_config(self, method: str | None = None) -> AdaptConfig:
        kw = dict(self.adapt)
        if method is not None:
            kw.update(self.compare.get("overrides", {}).get(method, {}))
        return AdaptConfig(optimizer=self.optimizer, **kw)

    def mitigation_seeds(self) -> list[int]:
        m = self.mitigation
        if "seeds" in m:
            return list(m["seeds"])
        return [self.seed + i for i in range(m.get("n_seeds", 10))]

    def mitigation_methods(self) -> tuple:
        if self.method == "zne-experiment":
            return ("none", "zne")
        if self.method == "trex-experiment":
            return ("none", "trex")
        return tuple(self.mitigation.get("methods", MITIGATION_METHODS))

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("warnings")
        if self.noise is None:
            d.pop("noise")
        return d


def parse_config(raw: dict) -> RunConfig:
    """Validate a JSON-decoded config, raising ConfigError with a JSON pointer."""
    if not isinstance(raw, dict):
        raise ConfigError("/", "config must be a JSON object")
    raw = copy.deepcopy(raw)
    warnings: list = []
    _walk(raw, _SCHEMA, "", warnings)

    method = raw.get("method")
    if method is None:
        raise ConfigError("/method", "missing required field")
    if method not in METHODS:
        hint = difflib.get_close_matches(method, METHODS, n=1)
        raise ConfigError("/method", f"unknown method {method!r}"
                          + (f"; did you mean {hint[0]!r}?" if hint else ""))
    for block in REQUIRED_BLOCKS.get(method, ()):
        if block not in raw:
            raise ConfigError(f"/{block}", f"block required by method {method!r} is missing")

    ham = raw.get("hamiltonian")
    if ham is None:
        raise ConfigError("/hamiltonian", "missing required block")
    given = [s for s in SOURCES if s in ham]
    if len(given) != 1:
        raise ConfigError("/hamiltonian", f"exactly one of {SOURCES} is required, got {given or 'none'}")
    if "active_space" in ham and "fcidump" not in ham:
        raise ConfigError("/hamiltonian/active_space", "only valid with an fcidump source")
    mapping = ham.get("mapping", ham.get("system", {}).get("mapping", "parity"))
    if mapping not in ("jw", "parity"):
        raise ConfigError("/hamiltonian/mapping", f"unknown mapping {mapping!r}")
    if method == "forge" and "pauli" in ham:
        raise ConfigError("/hamiltonian", "forging needs integrals (bundled or fcidump source)")

    def build(ptr, fn, kw):
        try:
            return fn(**kw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(ptr, str(exc)) from None

    opt = build("/optimizer", OptimizerConfig, raw.get("optimizer", {}))
    adapt = raw.get("adapt", {})
    build("/adapt", AdaptConfig, adapt)
    cmp_ = raw.get("compare", {})
    for i, m in enumerate(cmp_.get("methods", [])):
        if m not in ENGINE_METHODS:
            raise ConfigError(f"/compare/methods/{i}", f"expected one of {ENGINE_METHODS}, got {m!r}")
    for m, ov in cmp_.get("overrides", {}).items():
        if m not in ENGINE_METHODS:
            raise ConfigError(f"/compare/overrides/{m}", "not an engine method")
        _walk(ov, _SCHEMA["adapt"], f"/compare/overrides/{m}", warnings)
        build(f"/compare/overrides/{m}", AdaptConfig, {**adapt, **ov})
    noise = build("/noise", NoiseModel, raw["noise"]) if "noise" in raw else None
    zne = build("/zne", ZNEConfig, raw.get("zne", {}))
    for i, m in enumerate(raw.get("mitigation", {}).get("methods", [])):
        if m not in MITIGATION_METHODS:
            raise ConfigError(f"/mitigation/methods/{i}", f"expected one of {MITIGATION_METHODS}")
    if raw.get("ansatz", "uccsd") not in ("uccsd", "none"):
        raise ConfigError("/ansatz", "expected 'uccsd' or 'none'")
    if "seed" in raw and raw["seed"] < 0:
        raise ConfigError("/seed", "must be non-negative")

    return RunConfig(method=method, hamiltonian=ham, seed=raw.get("seed", 0),
                     name=raw.get("name", ""), ansatz=raw.get("ansatz", "uccsd"), optimizer=opt,
                     adapt=adapt, compare=cmp_, noise=noise, zne=zne, trex=raw.get("trex", {}),
                     mitigation=raw.get("mitigation", {}), forging=raw.get("forging", {}),
                     output=raw.get("output", {}), warnings=warnings)


def load_config(path) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError("/", f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("/", f"invalid JSON at line {exc.lineno} column {exc.colno}") from None
    return parse_config(raw)
