"""Experiment runs, sweeps and their on-disk formats.

A run writes one ``<observable>.csv`` per requested observable plus a
``manifest.json`` that records every resolved and derived quantity, so the
run can be reproduced from the manifest alone.  Data files carry no
timestamps; the wall clock lives in the manifest.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
import subprocess
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, analytic, dispersive, hilbert, oracle
from . import observables as obs
from .errors import ConfigError, DJCMError, NumericError
from .hilbert import FockSpace
from .model import DrivenParams, InitialCondition, params_from_free, standard_params

CSV_HEADER = "# djcm-csv v1"
MANIFEST_SCHEMA = "djcm-manifest v1"
SWEEPABLE = ("zeta", "xi", "g", "beta")
MODES = ("driven", "standard", "dispersive")
ENGINES = ("analytic", "frame", "rk4")
_STATE_CHUNK = 2048


@dataclass
class RunConfig:
    mode: str = "driven"
    omega_c: float = 0.4
    omega_eg: float = 0.9
    g: float = 1.0
    zeta: float = 0.7
    xi: float = 0.2
    omega_0: float | None = None  # standard mode only; defaults to omega_c
    beta_re: float = math.sqrt(8.0)
    beta_im: float = 0.0
    phi: float = 0.0
    t_max: float = 50.0
    steps: int = 2000
    dim: int | None = None
    engine: str = "analytic"
    observables: list[str] = field(default_factory=lambda: ["inversion"])

    @classmethod
    def from_mapping(cls, data: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**data)

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a flat JSON object")
        return cls.from_mapping(data)

    @property
    def beta(self) -> complex:
        return complex(self.beta_re, self.beta_im)

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.engine not in ENGINES:
            raise ConfigError(f"engine must be one of {ENGINES}, got {self.engine!r}")
        if int(self.steps) != self.steps or self.steps < 2:
            raise ConfigError("steps must be ≥ 2")
        if not self.t_max > 0:
            raise ConfigError("t_max must be > 0")
        if self.dim is not None and (int(self.dim) != self.dim or self.dim < 2):
            raise ConfigError("dim must be an integer ≥ 2")
        if not self.g > 0:
            raise ConfigError("g must be > 0")
        if self.mode in ("driven", "dispersive") and not (self.zeta > 0 and self.xi > 0):
            raise ConfigError(f"{self.mode} mode requires zeta > 0 and xi > 0")
        if self.mode != "standard" and self.omega_0 is not None:
            raise ConfigError("omega_0 is derived in driven mode; set it only in standard mode")
        bad = [o for o in self.observables if o not in obs.OBSERVABLE_NAMES]
        if bad or not self.observables:
            raise ConfigError(f"observables must be a non-empty subset of {obs.OBSERVABLE_NAMES}")

    def params(self) -> DrivenParams:
        try:
            if self.mode == "standard":
                return standard_params(self.omega_c, self.omega_eg, self.g, self.omega_0)
            p = params_from_free(self.omega_c, self.omega_eg, self.g, self.zeta, self.xi)
            if self.mode == "dispersive":
                dispersive.DispersiveParams.from_params(p)
            return p
        except DJCMError as exc:
            raise ConfigError(str(exc)) from exc

    def initial_condition(self) -> InitialCondition:
        if self.mode == "dispersive":
            return InitialCondition(self.beta, "superposition", self.phi)
        return InitialCondition(self.beta, "excited")

    def space(self, p: DrivenParams) -> FockSpace:
        if self.dim is not None:
            return FockSpace(int(self.dim))
        return FockSpace(hilbert.truncation_dim(self.beta + p.alpha))

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, int(self.steps))


def version_string() -> str:
    """``git describe``-style identifier, falling back to the package version."""
    try:
        out = subprocess.run(
            ["git", "describe", "--tags", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
    except (OSError, subprocess.SubprocessError):
        return f"v{__version__}"
    desc = out.stdout.strip()
    if out.returncode != 0 or not desc:
        return f"v{__version__}"
    return desc if desc.startswith("v") else f"v{__version__}-g{desc}"


def write_csv(path: Path, times: np.ndarray, values: np.ndarray) -> None:
    lines = [CSV_HEADER, "t,value"]
    lines += [f"{t:.17g},{v:.17g}" for t, v in zip(times, values)]
    with open(path, "w", newline="\n", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path: str | os.PathLike) -> tuple[np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", comments="#", skiprows=2)
    return data[:, 0], data[:, 1]


def _state_observables(states_fn, times, names, p) -> dict[str, np.ndarray]:
    out = {name: [] for name in names}
    for lo in range(0, times.size, _STATE_CHUNK):
        tt = times[lo:lo + _STATE_CHUNK]
        psi = states_fn(tt)
        for name in names:
            out[name].append(obs.evaluate(name, psi, tt, p))
    return {k: np.concatenate(v) for k, v in out.items()}


def compute_observables(cfg: RunConfig, p: DrivenParams, space: FockSpace) -> dict[str, np.ndarray]:
    times = cfg.times()
    init = cfg.initial_condition()
    names = list(dict.fromkeys(cfg.observables))
    if cfg.engine == "frame":
        return oracle.evolve_frame_exact(init.state(space), times, p, space, names, store_states=False).observables
    if cfg.engine == "rk4":
        return oracle.evolve_rk4(init.state(space), times, p, space, observables=names, store_states=False).observables

    if cfg.mode == "dispersive":
        return _state_observables(
            lambda tt: dispersive.cat_state(tt, p, cfg.beta, cfg.phi, space), times, names, p)
    init.state(space)  # surfaces truncation problems before the series run
    series = {}
    if "inversion" in names:
        series["inversion"] = analytic.inversion_series(times, p, init)
    if "nphoton" in names:
        series["nphoton"] = analytic.mean_photon_series(times, p, init)
    rest = [n for n in names if n not in series]
    if rest:
        series.update(_state_observables(lambda tt: analytic.solve_state(tt, p, init, space), times, rest, p))
    return {name: series[name] for name in names}


def summarize(times: np.ndarray, results: dict[str, np.ndarray]) -> dict:
    summary = {}
    if "inversion" in results:
        summary["first_revival_time"] = obs.first_revival_time(times, results["inversion"])
    for name, values in results.items():
        summary[f"{name}_mean"] = float(np.mean(values))
    return summary


def execute(cfg: RunConfig, out_dir: str | os.PathLike) -> dict:
    """Run ``cfg``, write CSVs and the manifest into ``out_dir``; return the manifest."""
    started = time.perf_counter()
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    cfg.validate()
    p = cfg.params()
    space = cfg.space(p)
    results = compute_observables(cfg, p, space)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    times = cfg.times()
    for name, values in results.items():
        write_csv(out / f"{name}.csv", times, np.asarray(values, dtype=float))

    gamma = cfg.beta + p.alpha
    manifest = {
        "schema": MANIFEST_SCHEMA,
        "config": dataclasses.asdict(cfg),
        "params": {
            "mode": p.mode,
            "omega_c": p.omega_c,
            "omega_eg": p.omega_eg,
            "g": p.g,
            "zeta": p.zeta,
            "xi": p.xi,
            **p.derived(),
        },
        "beta": [cfg.beta.real, cfg.beta.imag],
        "gamma": [gamma.real, gamma.imag],
        "dim": space.dim,
        "dim_rule": "explicit" if cfg.dim is not None else "ceil(|gamma|^2 + 8|gamma| + 20)",
        "n_max": analytic.SeriesConfig().n_max(gamma),
        "series_tail_epsilon": analytic.SeriesConfig().tail_epsilon,
        "engine": cfg.engine,
        "time_grid": {"t_min": 0.0, "t_max": cfg.t_max, "steps": int(cfg.steps), "endpoints": "inclusive"},
        "files": [f"{name}.csv" for name in results],
        "summary": summarize(times, results),
        "version": version_string(),
        "started_utc": stamp,
        "wall_clock_seconds": time.perf_counter() - started,
    }
    if cfg.mode == "dispersive":
        manifest["params"]["mu"] = p.g / p.delta
        manifest["params"]["dispersive_shift"] = dispersive.dispersive_shift(p)
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, ConfigError):
        return 2
    if isinstance(exc, NumericError):
        return 3
    if isinstance(exc, DJCMError):
        return 2
    raise exc


def with_value(cfg: RunConfig, param: str, value: float) -> RunConfig:
    if param not in SWEEPABLE:
        raise ConfigError(f"parameter {param!r} is not sweepable; choose from {SWEEPABLE}")
    if param == "beta":
        phase = math.atan2(cfg.beta_im, cfg.beta_re)
        return dataclasses.replace(cfg, beta_re=value * math.cos(phase), beta_im=value * math.sin(phase))
    return dataclasses.replace(cfg, **{param: value})


def _sweep_point(args):
    cfg, out_dir, param, value = args
    entry = {"value": value, "directory": out_dir.name}
    try:
        manifest = execute(cfg, out_dir)
    except DJCMError as exc:
        entry.update(status="failed", exit_code=exit_code_for(exc), error=str(exc))
        return entry
    entry.update(
        status="ok",
        exit_code=0,
        omega_0=manifest["params"]["omega_0"],
        alpha=manifest["params"]["alpha"],
        summary=manifest["summary"],
    )
    return entry


def sweep(base: RunConfig, param: str, values, out_dir: str | os.PathLike, jobs: int = 1) -> dict:
    """Run ``base`` once per value of ``param``; failures are recorded, not raised."""
    values = [float(v) for v in values]
    if not values:
        raise ConfigError("sweep needs at least one value")
    if param not in SWEEPABLE:
        raise ConfigError(f"parameter {param!r} is not sweepable; choose from {SWEEPABLE}")
    base.validate()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tasks = [(with_value(base, param, v), out / f"{param}={v:g}", param, v) for v in values]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(_sweep_point, tasks))
    else:
        runs = [_sweep_point(t) for t in tasks]
    index = {"schema": MANIFEST_SCHEMA, "parameter": param, "values": values, "runs": runs}
    (out / "index.json").write_text(json.dumps(index, indent=2, sort_keys=True) + "\n")
    return index
