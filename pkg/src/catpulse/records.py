"""Run configuration and persistent run records for the CLI harness."""
from __future__ import annotations

import dataclasses
import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

EXPERIMENTS = ("simulate", "fig2", "fig3", "fig4a", "fig4b", "protocol", "wigner")


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


@dataclass
class RunConfig:
    """All parameters of one CLI run; file values are overridden by flags."""

    experiment: str = "simulate"
    g: list = field(default_factory=lambda: [6.0])
    gamma_s: float = 1.0
    kappa_t: list = field(default_factory=lambda: [210.0])
    alpha_sq: list = field(default_factory=lambda: [1.0])
    fock_cutoff: int = 15
    dt: Optional[float] = None
    grid_margin: float = 10.0
    out_dir: str = "runs"
    jobs: int = 1
    # protocol options
    protocol: str = "multidimensional"
    rounds: int = 2
    n_pulses: int = 2
    alpha: float = 1.0
    eta: float = 0.0
    xi0: float = 0.0
    xi1: float = 0.0
    postselect: str = "+"
    script: Optional[str] = None
    # wigner options
    parity: str = "even"
    mode: str = "p0"
    state_file: Optional[str] = None
    extent: float = 5.0
    points: int = 101
    # fig4b options
    alpha1_sq_targets: list = field(default_factory=lambda: [1.0, 3.0])

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        for name in ("g", "kappa_t", "alpha_sq", "alpha1_sq_targets"):
            values = getattr(self, name)
            if not values:
                raise ConfigError(f"parameter list {name!r} is empty")
            if sorted(values) != list(values):
                raise ConfigError(f"parameter list {name!r} must be sorted")
        if any(v < 0 for v in self.alpha_sq):
            raise ConfigError("alpha_sq values must be nonnegative")
        if self.gamma_s < 0:
            raise ConfigError("gamma_s must be nonnegative")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if self.parity not in ("even", "odd"):
            raise ConfigError("parity must be 'even' or 'odd'")
        if self.postselect not in ("+", "-"):
            raise ConfigError("postselect must be '+' or '-'")

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunRecord:
    """Persistent record of one run: config snapshot, results, diagnostics, files."""

    config: dict
    version: str
    results: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    files: dict = field(default_factory=dict)

    def add_file(self, path) -> None:
        path = Path(path)
        self.files[str(path)] = sha256_file(path)

    def write(self, path) -> None:
        for p in self.files:
            if not Path(p).exists():
                raise RuntimeError(f"recorded output file missing: {p}")
        doc = {
            "config": self.config,
            "version": self.version,
            "results": self.results,
            "diagnostics": self.diagnostics,
            "timings": self.timings,
            "files": self.files,
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)


class Stopwatch:
    """Accumulates named wall-clock timings."""

    def __init__(self):
        self.timings: dict = {}
        self._t0 = time.perf_counter()

    def lap(self, name: str) -> float:
        now = time.perf_counter()
        elapsed = now - self._t0
        self.timings[name] = self.timings.get(name, 0.0) + elapsed
        self._t0 = now
        return elapsed
