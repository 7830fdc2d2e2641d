"""Flat key=value experiment configuration files.

The format is one `key = value` pair per line, dotted section prefixes
(`model.N = 256`), `#` comments, and no nesting.  Values stay strings until a
typed accessor pulls them out; every parse or validation error reports the
offending key and line.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .models import (
    AdditiveDiagonalDiffusion,
    DiagonalLinearDrift,
    ModelSpec,
    NemytskiiDiffusion,
    NemytskiiDrift,
    ZeroDrift,
)
from .noise import CovarianceSpectrum, example_covariance
from .solver import EXACT_GAUSSIAN, EXPONENTIAL_EULER, SolverConfig
from .spectrum import SpectralCoeffs, dirichlet_laplacian_1d

KINDS = (
    "simulate",
    "probe-temporal",
    "probe-spatial",
    "verify-lemmas",
    "example-section5",
    "verify-assumptions",
)

# Keys that steer execution without changing any computed number; they are
# excluded from the resolved-config line embedded in output files.
EXECUTION_KEYS = ("output.dir", "solver.workers")


class ConfigError(ValueError):
    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        parts = []
        if key is not None:
            parts.append(f"key {key!r}")
        if line is not None:
            parts.append(f"line {line}")
        location = f" ({', '.join(parts)})" if parts else ""
        super().__init__(message + location)
        self.key = key
        self.line = line


@dataclass
class ExperimentConfig:
    """Parsed key=value pairs plus the line each key came from."""

    entries: dict[str, str]
    lines: dict[str, int]
    warnings: list[str]

    def __contains__(self, key: str) -> bool:
        return key in self.entries

    def _line(self, key: str) -> int | None:
        return self.lines.get(key)

    def get_str(self, key: str, default: str | None = None) -> str:
        if key not in self.entries:
            if default is None:
                raise ConfigError("missing required key", key=key)
            return default
        return self.entries[key]

    def get_choice(self, key: str, choices: tuple[str, ...], default: str | None = None) -> str:
        value = self.get_str(key, default)
        if value not in choices:
            raise ConfigError(
                f"value {value!r} not in {choices}", key=key, line=self._line(key)
            )
        return value

    def get_int(self, key: str, default: int | None = None) -> int:
        if key not in self.entries:
            if default is None:
                raise ConfigError("missing required key", key=key)
            return default
        try:
            return int(self.entries[key])
        except ValueError:
            raise ConfigError(
                f"expected an integer, got {self.entries[key]!r}",
                key=key,
                line=self._line(key),
            ) from None

    def get_float(self, key: str, default: float | None = None) -> float:
        if key not in self.entries:
            if default is None:
                raise ConfigError("missing required key", key=key)
            return default
        try:
            return float(self.entries[key])
        except ValueError:
            raise ConfigError(
                f"expected a number, got {self.entries[key]!r}",
                key=key,
                line=self._line(key),
            ) from None

    def get_floats(self, key: str, default: list[float] | None = None) -> list[float]:
        if key not in self.entries:
            if default is None:
                raise ConfigError("missing required key", key=key)
            return list(default)
        raw = self.entries[key]
        try:
            return [float(part) for part in raw.split(",") if part.strip() != ""]
        except ValueError:
            raise ConfigError(
                f"expected a comma-separated number list, got {raw!r}",
                key=key,
                line=self._line(key),
            ) from None

    def get_ints(self, key: str, default: list[int] | None = None) -> list[int]:
        values = self.get_floats(key, default)
        out = []
        for v in values:
            if v != int(v):
                raise ConfigError(
                    f"expected integers, got {v}", key=key, line=self._line(key)
                )
            out.append(int(v))
        return out

    @property
    def kind(self) -> str:
        return self.get_choice("kind", KINDS)

    def set(self, key: str, value) -> None:
        self.entries[key] = str(value)

    def resolved(self) -> str:
        """Deterministic one-line rendering of every result-affecting key."""
        pairs = [
            f"{key}={self.entries[key]}"
            for key in sorted(self.entries)
            if key not in EXECUTION_KEYS
        ]
        return " ".join(pairs)


def parse_config_text(text: str) -> ExperimentConfig:
    entries: dict[str, str] = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        key, value = (part.strip() for part in stripped.split("=", 1))
        if not key:
            raise ConfigError("empty key", line=lineno)
        if key in entries:
            raise ConfigError("duplicate key", key=key, line=lineno)
        entries[key] = value
        lines[key] = lineno
    cfg = ExperimentConfig(entries, lines, warnings=[])
    if "kind" in cfg.entries:
        cfg.kind  # validates the choice early
    return cfg


def parse_config_file(path: str | Path) -> ExperimentConfig:
    return parse_config_text(Path(path).read_text())


def build_model(cfg: ExperimentConfig) -> ModelSpec:
    n = cfg.get_int("model.N", 256)
    if n < 1:
        raise ConfigError(f"model.N must be >= 1, got {n}", key="model.N")
    operator = dirichlet_laplacian_1d(n)

    cov_kind = cfg.get_choice("model.covariance", ("example5", "constant", "custom"), "example5")
    if cov_kind == "example5":
        covariance = example_covariance(n)
    elif cov_kind == "constant":
        covariance = CovarianceSpectrum(
            np.full(n, cfg.get_float("model.covariance.value", 1.0))
        )
    else:
        values = cfg.get_floats("model.covariance.values")
        if len(values) != n:
            raise ConfigError(
                f"custom covariance needs {n} values, got {len(values)}",
                key="model.covariance.values",
            )
        covariance = CovarianceSpectrum(np.array(values))

    def broadcast(key: str, default: float) -> np.ndarray:
        values = cfg.get_floats(key, [default])
        if len(values) == 1:
            return np.full(n, values[0])
        if len(values) != n:
            raise ConfigError(f"need 1 or {n} values, got {len(values)}", key=key)
        return np.array(values)

    drift_kind = cfg.get_choice("model.drift", ("zero", "linear", "nemytskii"), "zero")
    if drift_kind == "zero":
        drift = ZeroDrift()
    elif drift_kind == "linear":
        drift = DiagonalLinearDrift(broadcast("model.drift.multipliers", 0.0))
    else:
        drift = NemytskiiDrift(
            cfg.get_str("model.drift.function"),
            cfg.get_int("model.drift.grid", 4 * n),
        )

    diff_kind = cfg.get_choice("model.diffusion", ("additive", "nemytskii"), "additive")
    if diff_kind == "additive":
        diffusion = AdditiveDiagonalDiffusion(broadcast("model.diffusion.multipliers", 1.0))
    else:
        diffusion = NemytskiiDiffusion(
            cfg.get_str("model.diffusion.function"),
            cfg.get_int("model.diffusion.grid", 4 * n),
        )

    initial_values = cfg.get_floats("model.initial", [0.0])
    if len(initial_values) > n:
        raise ConfigError(
            f"initial state has {len(initial_values)} coefficients for {n} modes",
            key="model.initial",
        )
    initial = np.zeros(n)
    initial[: len(initial_values)] = initial_values

    try:
        return ModelSpec(
            operator=operator,
            covariance=covariance,
            drift=drift,
            diffusion=diffusion,
            initial=SpectralCoeffs(initial),
            r=cfg.get_float("model.r", 0.0),
            p=cfg.get_float("model.p", 2.0),
        )
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"invalid model: {exc}") from exc


def build_solver(cfg: ExperimentConfig) -> SolverConfig:
    if "solver.seed" not in cfg:
        cfg.warnings.append("solver.seed not set; defaulting to 0")
    snapshots = None
    if "solver.snapshots" in cfg:
        snapshots = tuple(cfg.get_floats("solver.snapshots"))
    try:
        return SolverConfig(
            T=cfg.get_float("solver.T"),
            steps=cfg.get_int("solver.steps", 1),
            paths=cfg.get_int("solver.paths", 1000),
            master_seed=cfg.get_int("solver.seed", 0),
            snapshot_times=snapshots,
        )
    except ValueError as exc:
        raise ConfigError(f"invalid solver section: {exc}") from exc


def solver_method(cfg: ExperimentConfig) -> str:
    token = cfg.get_choice("solver.method", ("euler", "exact-gaussian"), "euler")
    return EXPONENTIAL_EULER if token == "euler" else EXACT_GAUSSIAN
