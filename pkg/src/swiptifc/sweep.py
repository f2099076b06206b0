"""Monte-Carlo frontier sweeps and CSV emission.

Each trial draws a channel realization, optionally selects the harvesting
set, sweeps a normalized energy grid through the boundary-point solver, and
also evaluates the time-sharing baseline. Trials are independent and may run
in a process pool; aggregation reduces them in trial order, so the output is
byte-identical for any parallelism degree.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import assemble_effective, generate_channels
from .config import SystemConfig
from .optimizer import (boundary_point, scheme_energy_capacity,
                        time_sharing_curve)
from .selection import select_eh_set

LN2 = float(np.log(2.0))


@dataclass
class TrialResult:
    """Raw per-trial frontier data on the normalized energy grid."""

    trial: int
    eh_set: tuple
    capacity: float            # scheme's deliverable-energy capacity (watts)
    info_only_energy: float    # delivered when the beams stay silent at e_bar=0
    fractions: np.ndarray      # normalized grid
    e_bar: np.ndarray          # grid in watts
    rate: np.ndarray           # nats
    energy: np.ndarray         # delivered watts
    powers: np.ndarray         # grid x K1
    converged: np.ndarray      # bool per point
    monotonicity_violations: int
    ts_tau: np.ndarray
    ts_rate: np.ndarray        # nats
    ts_energy: np.ndarray
    ts_powers: np.ndarray      # grid x K1 (mean beam power over the frame)


@dataclass
class RECurve:
    """Trial-averaged frontier for one scheme (or its time-sharing baseline)."""

    scheme: str
    fractions: np.ndarray
    e_bar_watts: np.ndarray
    rate_bits: np.ndarray
    energy_watts: np.ndarray
    powers: np.ndarray         # grid x K1
    trials: int
    seed: int
    fingerprint: str


def run_trial(cfg: SystemConfig, trial: int) -> TrialResult:
    """Evaluate the full frontier and baseline for one channel realization."""
    channels = generate_channels(cfg, trial)
    if cfg.select_eh and cfg.k1 >= 1:
        sel = select_eh_set(channels, cfg)
        eh_set, id_set = sel.eh_set, sel.id_set
    else:
        eh_set = tuple(range(cfg.k1))
        id_set = tuple(range(cfg.k1, cfg.k))
    effective = assemble_effective(channels, eh_set, id_set)

    cap = scheme_energy_capacity(channels, effective, cfg.scheme, cfg)
    fractions = np.linspace(0.0, 1.0, cfg.ebar_grid_size)
    n = fractions.size
    k1 = len(eh_set)
    rate = np.zeros(n)
    energy = np.zeros(n)
    powers = np.zeros((n, k1))
    converged = np.zeros(n, dtype=bool)
    violations = 0
    info_only = 0.0
    for g, frac in enumerate(fractions):
        point = boundary_point(channels, effective, cfg.scheme, frac * cap,
                               cfg.variant, cfg)
        rate[g] = point.rate
        energy[g] = point.energy
        powers[g] = point.powers
        converged[g] = point.converged
        hist = point.power_history
        if hist is not None and len(hist) > 1:
            steps = np.diff(hist, axis=0)
            violations += int((steps > 0).sum())
        if g == 0:
            info_only = point.energy

    ts = time_sharing_curve(channels, effective, cfg.scheme, fractions, cfg)
    ts_powers = np.outer(ts.tau, np.full(k1, cfg.p_max))
    return TrialResult(
        trial=trial, eh_set=eh_set, capacity=cap, info_only_energy=info_only,
        fractions=fractions, e_bar=fractions * cap, rate=rate, energy=energy,
        powers=powers, converged=converged, monotonicity_violations=violations,
        ts_tau=ts.tau, ts_rate=ts.rate, ts_energy=ts.energy, ts_powers=ts_powers,
    )


def sweep_trials(cfg: SystemConfig) -> list:
    """Run all trials, in a process pool when ``cfg.parallelism > 1``.

    Results come back ordered by trial index regardless of completion order.
    """
    indices = list(range(cfg.trials))
    if cfg.parallelism <= 1:
        return [run_trial(cfg, t) for t in indices]
    with ProcessPoolExecutor(max_workers=cfg.parallelism) as pool:
        return list(pool.map(run_trial, [cfg] * len(indices), indices))


def aggregate(trials: list, cfg: SystemConfig) -> list:
    """Average per-trial frontiers pointwise on the normalized grid."""
    if not trials:
        raise ValueError("no trials to aggregate")
    n_trials = len(trials)
    fractions = trials[0].fractions
    fp = cfg.fingerprint()

    def mean_over(attr):
        acc = np.zeros_like(np.asarray(getattr(trials[0], attr), dtype=float))
        for t in trials:  # fixed trial order: deterministic reduction
            acc = acc + np.asarray(getattr(t, attr), dtype=float)
        return acc / n_trials

    main = RECurve(
        scheme=cfg.scheme,
        fractions=fractions,
        e_bar_watts=mean_over("e_bar"),
        rate_bits=mean_over("rate") / LN2,
        energy_watts=mean_over("energy"),
        powers=mean_over("powers"),
        trials=n_trials,
        seed=cfg.seed,
        fingerprint=fp,
    )
    baseline = RECurve(
        scheme=cfg.scheme + "_TS",
        fractions=trials[0].ts_tau,
        e_bar_watts=mean_over("ts_energy"),
        rate_bits=mean_over("ts_rate") / LN2,
        energy_watts=mean_over("ts_energy"),
        powers=mean_over("ts_powers"),
        trials=n_trials,
        seed=cfg.seed,
        fingerprint=fp,
    )
    return [main, baseline]


def run_sweep(cfg: SystemConfig) -> list:
    """Full Monte-Carlo sweep: averaged frontier plus time-sharing baseline."""
    return aggregate(sweep_trials(cfg), cfg)


def emit_csv(curves: list, path):
    """Write curves as CSV with a fixed column contract.

    Columns: scheme, ebar_normalized, ebar_watts_mean, rate_bits_mean,
    energy_watts_mean, power_tx1_mean..power_txK1_mean, trials, seed. Floats
    use shortest round-trip decimal form, so parsing and re-emitting the file
    reproduces it byte for byte.
    """
    if not curves or any(c.fractions.size == 0 for c in curves):
        raise ValueError("refusing to emit an empty curve set")
    k1 = curves[0].powers.shape[1]
    power_cols = [f"power_tx{j + 1}_mean" for j in range(k1)]
    header = ["scheme", "ebar_normalized", "ebar_watts_mean", "rate_bits_mean",
              "energy_watts_mean", *power_cols, "trials", "seed"]
    lines = [",".join(header)]
    for curve in curves:
        for g in range(curve.fractions.size):
            row = [curve.scheme,
                   repr(float(curve.fractions[g])),
                   repr(float(curve.e_bar_watts[g])),
                   repr(float(curve.rate_bits[g])),
                   repr(float(curve.energy_watts[g]))]
            row += [repr(float(curve.powers[g, j])) for j in range(k1)]
            row += [str(curve.trials), str(curve.seed)]
            lines.append(",".join(row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
