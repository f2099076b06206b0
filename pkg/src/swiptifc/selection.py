"""Choice of which transceiver pairs operate in energy-harvesting mode.

Every size-K1 candidate set is scored by the sum, over its members, of the
maximal signal-to-leakage-and-harvested-energy ratio achievable by a unit
beam (the dominant generalized eigenvalue of the member's link-Gram pair).
The highest-scoring candidate wins; ties break to the lexicographically
smallest index set.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .beams import sler_regularizer
from .channel import ChannelSet, assemble_effective
from .config import SystemConfig
from .linalg import generalized_eigmax, hermitian_part


@dataclass(frozen=True)
class SelectionResult:
    eh_set: tuple
    id_set: tuple
    score: float
    per_candidate_scores: tuple   # ((candidate eh set, score), ...)


def candidate_score(channels: ChannelSet, eh_set, id_set, e_bar: float,
                    p_max: float) -> float:
    """Sum of the members' maximal ratio values for one candidate split."""
    eff = assemble_effective(channels, eh_set, id_set)
    k1 = len(eff.eh_set)
    total = 0.0
    for k in eff.eh_set:
        h11 = eff.h11[k]
        h21 = eff.h21[k]
        sig = hermitian_part(h11.conj().T @ h11)
        reg = sler_regularizer(h11, e_bar, p_max, k1)
        leak = hermitian_part(h21.conj().T @ h21) + reg * np.eye(channels.m)
        total += generalized_eigmax(sig, leak).value
    return total


def select_eh_set(channels: ChannelSet, config: SystemConfig,
                  e_bar: float | None = None) -> SelectionResult:
    """Pick the K1 harvesting pairs maximizing the summed ratio score.

    When ``e_bar`` is None each candidate is scored at half its own maximum
    deliverable energy under max-energy beams, a representative mid-frontier
    target that needs no sweep context.
    """
    k = config.k
    k1 = config.k1
    if not 1 <= k1 < k:
        raise ValueError("selection needs 1 <= k1 < k")
    all_idx = set(range(k))
    scored = []
    best = None
    for cand in itertools.combinations(range(k), k1):
        ids = tuple(sorted(all_idx - set(cand)))
        if e_bar is None:
            target = 0.5 * _max_energy_candidate(channels, cand, ids, config)
        else:
            target = e_bar
        score = candidate_score(channels, cand, ids, target, config.p_max)
        scored.append((cand, score))
        if best is None or score > best[1]:
            best = (cand, score)
    eh = best[0]
    ids = tuple(sorted(all_idx - set(eh)))
    return SelectionResult(eh_set=eh, id_set=ids, score=best[1],
                           per_candidate_scores=tuple(scored))


def _max_energy_candidate(channels: ChannelSet, eh_set, id_set,
                          config: SystemConfig) -> float:
    eff = assemble_effective(channels, eh_set, id_set)
    total = 0.0
    for kk in eff.eh_set:
        total += float(np.linalg.norm(eff.h11[kk], 2)) ** 2
    for j in eff.id_set:
        total += float(np.linalg.norm(eff.h12_blocks[j], 2)) ** 2
    return config.zeta * config.p_max * total
