"""Scenario configuration: dataclass, JSON round trip, validation, fingerprint."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

SCHEMES = ("MEB", "MLB", "SLER", "SLER_TILT")
VARIANTS = ("P1", "UP")
DUAL_METHODS = ("bisection", "subgradient")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field(s)."""


@dataclass
class SystemConfig:
    """All scenario and solver parameters for one experiment.

    Powers are in watts. ``alpha`` may hold a full K x K matrix of link
    strength weights; when ``None`` it defaults to 1 on the diagonal and
    ``alpha_cross`` off the diagonal.
    """

    # scenario
    k: int = 2                      # transceiver pairs
    k1: int = 1                     # pairs operating in energy-harvesting mode
    m: int = 4                      # antennas per node
    p_max: float = 50e-3            # per-transmitter power budget
    noise_power: float = 1e-6       # receiver noise power sigma_n^2
    path_loss: float = 1e-3         # scalar power attenuation on every link
    alpha: Any = None               # K x K link weights in [0, 1], or None
    alpha_cross: float = 0.6        # off-diagonal weight used when alpha is None
    zeta: float = 1.0               # harvesting efficiency

    # strategy
    scheme: str = "SLER"            # one of SCHEMES
    tilt_decay: float = 0.9         # geometric decay of the tilt regularizer
    variant: str = "P1"             # inner solver: full interference or upper bound
    select_eh: bool = False         # enable harvester-set selection
    reselect_per_point: bool = False

    # sweep
    ebar_grid_size: int = 25
    trials: int = 100
    seed: int = 20240901
    parallelism: int = 1

    # solver knobs
    outer_iter_max: int = 50        # power-descent iterations
    outer_tol: float = 1e-6         # relative to p_max
    step_fraction: float = 1.0      # fraction of the maximum allowable step
    dual_method: str = "bisection"  # or "subgradient"
    dual_iter_max: int = 500
    kkt_tol: float = 1e-6
    energy_tol_rel: float = 1e-11   # inner energy-constraint tolerance
    feas_tol_rel: float = 1e-6      # frontier feasibility slack, relative
    pd_floor: float = 1e-9          # definiteness margin for dual prices
    gs_sweep_max: int = 300         # Gauss-Seidel sweeps per inner solve
    gs_tol: float = 1e-10           # covariance fixed-point tolerance, rel p_max

    # metric variations
    include_noise_energy: bool = False   # count thermal noise in harvested power
    count_eh_phase_rate: bool = True     # rate credit during the energy slot

    def __post_init__(self):
        self.validate()

    # -- derived quantities -------------------------------------------------

    def alpha_matrix(self) -> np.ndarray:
        if self.alpha is None:
            a = np.full((self.k, self.k), float(self.alpha_cross))
            np.fill_diagonal(a, 1.0)
            return a
        a = np.asarray(self.alpha, dtype=float)
        return a

    def fingerprint(self) -> str:
        """Stable hash of every field; identical configs hash identically."""
        payload = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]

    # -- validation ---------------------------------------------------------

    def validate(self):
        bad = []
        if self.k < 2:
            bad.append("k (need >= 2)")
        if not 0 <= self.k1 < self.k:
            bad.append("k1 (need 0 <= k1 < k)")
        if self.m < 1:
            bad.append("m (need >= 1)")
        if not self.p_max > 0:
            bad.append("p_max (need > 0)")
        if not self.noise_power > 0:
            bad.append("noise_power (need > 0)")
        if not self.path_loss > 0:
            bad.append("path_loss (need > 0)")
        if not 0 < self.zeta:
            bad.append("zeta (need > 0)")
        if self.scheme not in SCHEMES:
            bad.append(f"scheme (need one of {SCHEMES})")
        if not 0 < self.tilt_decay < 1:
            bad.append("tilt_decay (need in (0, 1))")
        if self.variant not in VARIANTS:
            bad.append(f"variant (need one of {VARIANTS})")
        if self.ebar_grid_size < 2:
            bad.append("ebar_grid_size (need >= 2)")
        if self.trials < 1:
            bad.append("trials (need >= 1)")
        if self.parallelism < 1:
            bad.append("parallelism (need >= 1)")
        if self.dual_method not in DUAL_METHODS:
            bad.append(f"dual_method (need one of {DUAL_METHODS})")
        if not 0 < self.step_fraction <= 1:
            bad.append("step_fraction (need in (0, 1])")
        if self.alpha is not None:
            a = np.asarray(self.alpha, dtype=float)
            if a.shape != (self.k, self.k):
                bad.append("alpha (need a k x k matrix)")
            elif not ((a >= 0) & (a <= 1)).all():
                bad.append("alpha (entries must lie in [0, 1])")
        if not 0 <= self.alpha_cross <= 1:
            bad.append("alpha_cross (need in [0, 1])")
        if bad:
            raise ConfigError("invalid configuration fields: " + "; ".join(bad))

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        if self.alpha is not None:
            d["alpha"] = np.asarray(self.alpha, dtype=float).tolist()
        return d

    def replace(self, **kwargs) -> "SystemConfig":
        return dataclasses.replace(self, **kwargs)


_FIELD_NAMES = {f.name for f in dataclasses.fields(SystemConfig)}


def config_from_dict(d: dict) -> SystemConfig:
    """Build a config from a plain dict, rejecting unknown keys."""
    unknown = sorted(set(d) - _FIELD_NAMES)
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
    return SystemConfig(**d)


def load_config(path) -> SystemConfig:
    """Load a JSON config file whose keys mirror SystemConfig field names."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a single JSON object")
    return config_from_dict(data)


def save_config(config: SystemConfig, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
