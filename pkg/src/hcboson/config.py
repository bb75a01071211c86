"""Scenario configuration: flat ``key = value`` files parsed as TOML."""

from __future__ import annotations

import dataclasses
import itertools
import math
import os
from dataclasses import dataclass
from fractions import Fraction

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import fock
from .errors import ConfigError
from .model import ModelParams

SCENARIOS = ("mi-expansion", "gs-quench", "sweep")
ENGINES = ("auto", "free-fermion", "exact", "mps")
SWEEP_AXES = ("sweep_W", "sweep_N", "sweep_L")
OUTPUT_ROOT_ENV = "HCBOSON_OUTPUT_ROOT"

DEFAULT_T_MAX = {"mi-expansion": 12.0, "gs-quench": 8.0}
DEFAULT_FIT_WINDOW = {"mi-expansion": (2.0, 10.0), "gs-quench": (0.5, 2.0)}


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    L: int
    N: int
    J: float = 1.0
    W: float = 0.0
    engine: str = "auto"
    box: tuple | None = None
    t_max: float | None = None
    dt: float = 0.1
    order: int = 2
    record_every: float = 0.5
    chi_max: int = 400
    svd_eps: float = 1e-8
    alarm_threshold: float = 1e-6
    fit_window: tuple | None = None
    melt_threshold: float = 0.5
    output_dir: str = "out"
    seed: int = 0
    exact_cap: int = fock.BASIS_CAP
    checkpoint_every: int = 4
    dmrg_tol: float = 1e-10
    dmrg_max_sweeps: int = 40
    # sweep only
    base: str = "mi-expansion"
    sweep_W: tuple = ()
    sweep_N: tuple = ()
    sweep_L: tuple = ()
    workers: int = 1

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        if self.engine not in ENGINES:
            raise ConfigError(f"engine must be one of {ENGINES}, got {self.engine!r}")
        for name in ("box", "fit_window", "sweep_W", "sweep_N", "sweep_L"):
            val = getattr(self, name)
            if isinstance(val, list):
                object.__setattr__(self, name, tuple(val))
        kind = self.kind
        if self.t_max is None:
            object.__setattr__(self, "t_max", DEFAULT_T_MAX[kind])
        if self.fit_window is None:
            object.__setattr__(self, "fit_window", DEFAULT_FIT_WINDOW[kind])
        self._validate()

    @property
    def kind(self) -> str:
        """The single-run scenario: ``base`` for sweeps, else ``scenario``."""
        return self.base if self.scenario == "sweep" else self.scenario

    @property
    def params(self) -> ModelParams:
        return ModelParams(L=self.L, J=self.J, W=self.W)

    @property
    def steps_per_record(self) -> int:
        return int(round(self.record_every / self.dt))

    @property
    def n_records(self) -> int:
        return int(round(self.t_max / self.record_every))

    @property
    def resolved_box(self) -> tuple:
        """Box (i1, i2); defaults to N sites centered on the chain."""
        if self.box is not None:
            return tuple(int(x) for x in self.box)
        i1 = (self.L - self.N) // 2 + 1
        return (i1, i1 + self.N - 1)

    def _validate(self):
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        need(self.base in ("mi-expansion", "gs-quench"), f"base must be mi-expansion or gs-quench, got {self.base!r}")
        try:
            self.params
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        need(0 <= self.N <= self.L, f"need 0 <= N <= L, got N={self.N}, L={self.L}")
        need(self.dt > 0 and self.record_every > 0 and self.t_max > 0, "dt, record_every and t_max must be positive")
        ratio = self.record_every / self.dt
        need(abs(ratio - round(ratio)) < 1e-9, f"record_every={self.record_every} is not a multiple of dt={self.dt}")
        ratio = self.t_max / self.record_every
        need(abs(ratio - round(ratio)) < 1e-9, f"t_max={self.t_max} is not a multiple of record_every={self.record_every}")
        need(self.order in (2, 4), f"order must be 2 or 4, got {self.order}")
        need(self.chi_max >= 1 and 0 <= self.svd_eps < 1, "need chi_max >= 1 and 0 <= svd_eps < 1")
        need(0 < self.melt_threshold < 1, "melt_threshold must lie in (0, 1)")
        need(len(self.fit_window) == 2 and self.fit_window[0] < self.fit_window[1], "fit_window must be [t_min, t_max]")
        need(self.workers >= 1, "workers must be >= 1")
        if self.engine == "free-fermion":
            need(self.W == 0, "engine=free-fermion requires W = 0")
        if self.scenario == "sweep":
            axes = self.sweep_axes
            need(1 <= len(axes) <= 2, f"a sweep needs one or two of {SWEEP_AXES}, got {len(axes)}")
            for name in axes:
                vals = getattr(self, name)
                need(len(vals) >= 2, f"{name} needs at least 2 points, got {len(vals)}")
                need(len(set(vals)) == len(vals), f"{name} has repeated values")
            return
        need(not self.sweep_axes, "sweep axes are only allowed with scenario = sweep")
        if self.kind == "mi-expansion":
            i1, i2 = self.resolved_box
            need(1 <= i1 <= i2 <= self.L, f"box [{i1}, {i2}] outside the chain 1..{self.L}")
            need(i2 - i1 + 1 == self.N, f"box width {i2 - i1 + 1} must equal N = {self.N}")
        else:
            need(Fraction(self.N, self.L) == Fraction(2, 3), f"gs-quench needs N/L = 2/3 exactly, got {self.N}/{self.L}")
            need(self.engine in ("auto", "exact", "mps"), "gs-quench runs on the exact or mps engine")
            need(self.L % 2 == 0, "gs-quench needs even L for a central pair")

    @property
    def sweep_axes(self) -> tuple:
        return tuple(name for name in SWEEP_AXES if getattr(self, name))

    def resolve_engine(self) -> str:
        """Engine actually used: free-fermion iff W = 0 (mi-expansion), exact
        iff the sector fits under ``exact_cap``, else mps."""
        if self.engine != "auto":
            return self.engine
        if self.kind == "mi-expansion" and self.W == 0:
            return "free-fermion"
        if math.comb(self.L, self.N) <= self.exact_cap:
            return "exact"
        return "mps"

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def points(self) -> list:
        """Single-run configs of a sweep, in axis order."""
        if self.scenario != "sweep":
            raise ConfigError("points() is only defined for sweeps")
        axes = self.sweep_axes
        out = []
        for values in itertools.product(*(getattr(self, a) for a in axes)):
            change = dict(zip((a[len("sweep_"):] for a in axes), values))
            L = int(change.get("L", self.L))
            N = change.get("N")
            if self.base == "gs-quench":
                if "L" in change and N is None:
                    N = 2 * L // 3
                elif N is not None and "L" not in change:
                    L = 3 * int(N) // 2
            N = int(self.N if N is None else N)
            tag = "_".join(f"{k}{v:g}" for k, v in change.items())
            out.append(
                self.replace(
                    scenario=self.base,
                    L=L,
                    N=N,
                    W=float(change.get("W", self.W)),
                    box=None if ("N" in change or "L" in change) else self.box,
                    sweep_W=(),
                    sweep_N=(),
                    sweep_L=(),
                    output_dir=os.path.join(self.output_dir, tag),
                )
            )
        return out


_FIELDS = {f.name: f for f in dataclasses.fields(ScenarioConfig)}
_INT_FIELDS = {"L", "N", "order", "chi_max", "seed", "exact_cap", "checkpoint_every", "dmrg_max_sweeps", "workers"}
_FLOAT_FIELDS = {"J", "W", "t_max", "dt", "record_every", "svd_eps", "alarm_threshold", "melt_threshold", "dmrg_tol"}


def from_mapping(data: dict) -> ScenarioConfig:
    unknown = sorted(set(data) - set(_FIELDS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    for key in ("scenario", "L", "N"):
        if key not in data:
            raise ConfigError(f"missing required key {key!r}")
    kw = {}
    for key, val in data.items():
        if key in _INT_FIELDS:
            if isinstance(val, bool) or not isinstance(val, int):
                raise ConfigError(f"{key} must be an integer, got {val!r}")
        elif key in _FLOAT_FIELDS:
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise ConfigError(f"{key} must be a number, got {val!r}")
            val = float(val)
        elif key in ("box", "fit_window") + SWEEP_AXES:
            if not isinstance(val, list):
                raise ConfigError(f"{key} must be a list, got {val!r}")
            val = tuple(int(v) if key in ("box", "sweep_N", "sweep_L") else float(v) for v in val)
        kw[key] = val
    return ScenarioConfig(**kw)


def loads(text: str) -> ScenarioConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config syntax: {exc}") from None
    nested = [k for k, v in data.items() if isinstance(v, dict)]
    if nested:
        raise ConfigError(f"config must be flat key = value lines; found tables {nested}")
    return from_mapping(data)


def load(path) -> ScenarioConfig:
    try:
        with open(path) as fh:
            return loads(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None


def _value(v) -> str:
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (tuple, list)):
        return "[" + ", ".join(_value(x) for x in v) + "]"
    return str(v)


def dump_lines(cfg: ScenarioConfig) -> list[str]:
    """Fully resolved config as ``key = value`` lines, loadable by ``loads``."""
    lines = []
    for name in _FIELDS:
        val = getattr(cfg, name)
        if val is None or (name in SWEEP_AXES and not val):
            continue
        lines.append(f"{name} = {_value(val)}")
    return lines


def dumps(cfg: ScenarioConfig) -> str:
    return "\n".join(dump_lines(cfg)) + "\n"


def output_dir(cfg: ScenarioConfig) -> str:
    """Output directory, placed under $HCBOSON_OUTPUT_ROOT when it is set."""
    root = os.environ.get(OUTPUT_ROOT_ENV)
    if root and not os.path.isabs(cfg.output_dir):
        return os.path.join(root, cfg.output_dir)
    return cfg.output_dir


def from_header(meta: dict) -> ScenarioConfig | None:
    """Rebuild the config embedded in a CSV header; None if it is absent."""
    lines = [f"{k} = {v}" for k, v in meta.items() if k in _FIELDS]
    if not lines:
        return None
    try:
        return loads("\n".join(lines))
    except ConfigError:
        return None
