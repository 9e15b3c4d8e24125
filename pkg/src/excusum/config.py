"""JSON experiment configuration: strict schema validation into dataclasses.

Violations are rejected before any computation, with the offending field
path in the error message.  Seeds must be explicit; nothing falls back to
the wall clock, so a config fully determines every output byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .models import SCHEDULE_KINDS, GaussianModel, MeanSchedule, gaussian_model
from .process import NO_CHANGE


class ConfigError(ValueError):
    def __init__(self, path: str, message: str) -> None:
        super().__init__(f"{path}: {message}")
        self.path = path


def _require_keys(obj: dict, path: str, required: set[str], optional: set[str] = frozenset()) -> None:
    if not isinstance(obj, dict):
        raise ConfigError(path, f"expected an object, got {type(obj).__name__}")
    missing = required - obj.keys()
    if missing:
        raise ConfigError(path, f"missing required field(s): {', '.join(sorted(missing))}")
    unknown = obj.keys() - required - optional
    if unknown:
        raise ConfigError(path, f"unknown field(s): {', '.join(sorted(unknown))}")


def _number(obj: dict, path: str, key: str, *, positive: bool = False) -> float:
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{path}.{key}", f"expected a finite number, got {v!r}")
    if positive and v <= 0:
        raise ConfigError(f"{path}.{key}", f"expected a positive number, got {v!r}")
    return float(v)


def _integer(obj: dict, path: str, key: str, *, minimum: int | None = None) -> int:
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{path}.{key}", f"expected an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise ConfigError(f"{path}.{key}", f"expected an integer >= {minimum}, got {v}")
    return v


@dataclass(frozen=True)
class ScheduleConfig:
    kind: str
    mu: float | None = None
    params: dict = field(default_factory=dict)
    table: tuple[float, ...] | None = None

    @classmethod
    def from_dict(cls, obj: dict, path: str) -> "ScheduleConfig":
        _require_keys(obj, path, {"kind"}, {"mu", "params", "table"})
        kind = obj["kind"]
        if kind not in SCHEDULE_KINDS:
            raise ConfigError(f"{path}.kind", f"expected one of {list(SCHEDULE_KINDS)}, got {kind!r}")
        mu = _number(obj, path, "mu") if "mu" in obj else None
        params = obj.get("params", {})
        if not isinstance(params, dict):
            raise ConfigError(f"{path}.params", "expected an object")
        table = None
        if "table" in obj:
            raw = obj["table"]
            if not isinstance(raw, list) or not raw or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw
            ):
                raise ConfigError(f"{path}.table", "expected a non-empty list of numbers")
            table = tuple(float(v) for v in raw)

        def need(keys: set[str], have_mu: bool, have_table: bool) -> None:
            if have_mu != ("mu" in obj):
                raise ConfigError(f"{path}.mu", "required for this kind" if have_mu else "not allowed for this kind")
            if have_table != ("table" in obj):
                raise ConfigError(f"{path}.table", "required for this kind" if have_table else "not allowed for this kind")
            if set(params) != keys:
                raise ConfigError(f"{path}.params", f"expected exactly {sorted(keys) or 'no'} parameter(s), got {sorted(params)}")

        if kind == "constant":
            need(set(), True, False)
        elif kind == "arctangent":
            need(set(), False, False)
        elif kind == "linear-saturating":
            need({"slope"}, True, False)
        elif kind == "geometric-approach":
            need({"ratio"}, True, False)
        else:  # explicit-table
            need(set(), False, True)
        return cls(kind=kind, mu=mu, params=dict(params), table=table)

    def build(self) -> MeanSchedule:
        try:
            if self.kind == "constant":
                return MeanSchedule.constant(self.mu)
            if self.kind == "arctangent":
                return MeanSchedule.arctangent()
            if self.kind == "linear-saturating":
                return MeanSchedule.linear_saturating(self.params["slope"], self.mu)
            if self.kind == "geometric-approach":
                return MeanSchedule.geometric_approach(self.mu, self.params["ratio"])
            return MeanSchedule.from_table(self.table)
        except ValueError as exc:
            raise ConfigError("model.schedule", str(exc)) from exc


@dataclass(frozen=True)
class ModelConfig:
    family: str
    schedule: ScheduleConfig

    @classmethod
    def from_dict(cls, obj: dict, path: str = "model") -> "ModelConfig":
        _require_keys(obj, path, {"family", "schedule"})
        if obj["family"] != "gaussian":
            raise ConfigError(f"{path}.family", f"only 'gaussian' is built in, got {obj['family']!r}")
        return cls(family="gaussian", schedule=ScheduleConfig.from_dict(obj["schedule"], f"{path}.schedule"))

    def build(self) -> GaussianModel:
        return gaussian_model(self.schedule.build())


@dataclass(frozen=True)
class DetectorConfig:
    kind: str
    threshold: float | None = None
    gamma: float | None = None
    window: int | None = None

    @classmethod
    def from_dict(cls, obj: dict, path: str = "detector") -> "DetectorConfig":
        _require_keys(obj, path, {"detector"}, {"threshold", "gamma", "window"})
        kind = obj["detector"]
        if kind not in ("ex-cusum", "sr", "cusum"):
            raise ConfigError(f"{path}.detector", f"expected one of ['ex-cusum', 'sr', 'cusum'], got {kind!r}")
        threshold = _number(obj, path, "threshold") if "threshold" in obj else None
        gamma = None
        if "gamma" in obj:
            gamma = _number(obj, path, "gamma", positive=True)
            if gamma <= 1.0:
                raise ConfigError(f"{path}.gamma", f"expected gamma > 1, got {gamma}")
        if (threshold is None) == (gamma is None):
            raise ConfigError(path, "give exactly one of 'threshold' or 'gamma'")
        window = _integer(obj, path, "window", minimum=1) if "window" in obj else None
        return cls(kind=kind, threshold=threshold, gamma=gamma, window=window)

    @property
    def threshold_value(self) -> float:
        """The log-scale threshold; derived as log(gamma) when gamma is given."""
        return self.threshold if self.threshold is not None else math.log(self.gamma)

    @property
    def gamma_value(self) -> float:
        """gamma, or exp(threshold) when only the threshold was given."""
        return self.gamma if self.gamma is not None else math.exp(self.threshold)


@dataclass(frozen=True)
class RunConfig:
    nu: int | float
    horizon: int
    seed: int
    trials: int

    @classmethod
    def from_dict(cls, obj: dict, path: str = "run") -> "RunConfig":
        _require_keys(obj, path, {"nu", "horizon", "seed", "trials"})
        nu_raw = obj["nu"]
        if nu_raw == "inf":
            nu: int | float = NO_CHANGE
        elif isinstance(nu_raw, int) and not isinstance(nu_raw, bool) and nu_raw >= 1:
            nu = nu_raw
        else:
            raise ConfigError(f"{path}.nu", f"expected an integer >= 1 or the string 'inf', got {nu_raw!r}")
        horizon = _integer(obj, path, "horizon", minimum=1)
        seed = _integer(obj, path, "seed", minimum=0)
        if seed >= 2**64:
            raise ConfigError(f"{path}.seed", "seed must fit in 64 bits")
        trials = _integer(obj, path, "trials", minimum=1)
        return cls(nu=nu, horizon=horizon, seed=seed, trials=trials)


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    formats: tuple[str, ...] = ("csv",)

    @classmethod
    def from_dict(cls, obj: dict, path: str = "output") -> "OutputConfig":
        _require_keys(obj, path, set(), {"directory", "formats"})
        directory = obj.get("directory", "out")
        if not isinstance(directory, str) or not directory:
            raise ConfigError(f"{path}.directory", "expected a non-empty string")
        formats = obj.get("formats", ["csv"])
        if not isinstance(formats, list) or not formats or any(f not in ("csv", "json") for f in formats):
            raise ConfigError(f"{path}.formats", "expected a non-empty list drawn from ['csv', 'json']")
        return cls(directory=directory, formats=tuple(formats))


@dataclass(frozen=True)
class TradeoffConfig:
    gammas: tuple[float, ...] = (10.0, 100.0)
    arl_trials: int | None = None

    @classmethod
    def from_dict(cls, obj: dict, path: str = "tradeoff") -> "TradeoffConfig":
        _require_keys(obj, path, set(), {"gammas", "arl_trials"})
        gammas = obj.get("gammas", [10.0, 100.0])
        if (
            not isinstance(gammas, list)
            or not gammas
            or any(isinstance(g, bool) or not isinstance(g, (int, float)) or g <= 1.0 for g in gammas)
            or any(b <= a for a, b in zip(gammas, gammas[1:]))
        ):
            raise ConfigError(f"{path}.gammas", "expected an increasing list of numbers > 1")
        arl_trials = _integer(obj, path, "arl_trials", minimum=1) if "arl_trials" in obj else None
        return cls(gammas=tuple(float(g) for g in gammas), arl_trials=arl_trials)


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelConfig
    detector: DetectorConfig
    run: RunConfig
    output: OutputConfig
    tradeoff: TradeoffConfig

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        _require_keys(obj, "<config>", {"model", "detector", "run"}, {"output", "tradeoff"})
        return cls(
            model=ModelConfig.from_dict(obj["model"]),
            detector=DetectorConfig.from_dict(obj["detector"]),
            run=RunConfig.from_dict(obj["run"]),
            output=OutputConfig.from_dict(obj.get("output", {})),
            tradeoff=TradeoffConfig.from_dict(obj.get("tradeoff", {})),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError("<config>", f"invalid JSON: {exc}") from exc
        return cls.from_dict(obj)


#: the built-in experiment: arctangent Gaussian growth, change at 80 of a
#: 200-step record, threshold log(1000)
DEFAULT_CONFIG: dict = {
    "model": {"family": "gaussian", "schedule": {"kind": "arctangent"}},
    "detector": {"detector": "ex-cusum", "gamma": 1000.0},
    "run": {"nu": 80, "horizon": 200, "seed": 20220914, "trials": 1000},
    "output": {"directory": "out", "formats": ["csv"]},
}


def default_config() -> ExperimentConfig:
    return ExperimentConfig.from_dict(json.loads(json.dumps(DEFAULT_CONFIG)))
