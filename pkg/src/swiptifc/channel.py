"""Random channel generation, effective block channels, and link metrics.

Channels are stored as a K x K grid of M x M complex matrices, ``h[i, j]``
being the link from transmitter ``j`` to receiver ``i``. Every matrix is
normalized so its squared Frobenius norm equals ``path_loss * alpha_ij * M``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np
import scipy.linalg

from .config import SystemConfig
from .linalg import hermitian_part


class InvalidPartitionError(ValueError):
    """Harvester/decoder index sets do not partition the transceiver pairs."""


@dataclass(frozen=True)
class ChannelSet:
    """One realization of the K x K grid of M x M links."""

    h: np.ndarray   # shape (K, K, M, M), h[i, j] = Tx j -> Rx i
    seed: int
    trial: int

    def __post_init__(self):
        self.h.flags.writeable = False

    @property
    def k(self) -> int:
        return self.h.shape[0]

    @property
    def m(self) -> int:
        return self.h.shape[2]


@dataclass(frozen=True)
class EffectiveChannels:
    """Stacked/block channels reducing the K-user network to two-user form.

    For each energy transmitter ``k``: ``h11[k]`` stacks the links to every
    harvesting receiver (K1*M x M) and ``h21[k]`` the links to every decoding
    receiver ((K-K1)*M x M). ``h12_blocks[j]`` stacks the links from decoding
    transmitter ``j`` to every harvesting receiver; ``h12`` lays those blocks
    side by side. ``h22`` is the block diagonal of the direct decoding links.
    Row/column blocks follow ascending receiver/transmitter index.
    """

    eh_set: tuple
    id_set: tuple
    h11: dict
    h21: dict
    h12_blocks: dict
    h12: np.ndarray
    h22: np.ndarray


def _draw_link(seed: int, trial: int, i: int, j: int, attempt: int, m: int) -> np.ndarray:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(trial, i, j, attempt))
    rng = np.random.default_rng(ss)
    return (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / np.sqrt(2.0)


def generate_channels(config: SystemConfig, trial_index: int) -> ChannelSet:
    """Draw one normalized channel realization.

    Each link is an i.i.d. standard complex Gaussian matrix rescaled to
    squared Frobenius norm ``path_loss * alpha_ij * M``. The draw is a pure
    function of ``(seed, trial_index, i, j)``, so generation order and
    parallelism cannot change the result.
    """
    k, m = config.k, config.m
    alpha = config.alpha_matrix()
    h = np.zeros((k, k, m, m), dtype=np.complex128)
    for i in range(k):
        for j in range(k):
            if alpha[i, j] == 0.0:
                continue
            attempt = 0
            draw = _draw_link(config.seed, trial_index, i, j, attempt, m)
            norm = np.linalg.norm(draw)
            while norm == 0.0:  # probability zero, kept for determinism
                attempt += 1
                draw = _draw_link(config.seed, trial_index, i, j, attempt, m)
                norm = np.linalg.norm(draw)
            h[i, j] = np.sqrt(config.path_loss * alpha[i, j] * m) / norm * draw
    return ChannelSet(h=h, seed=config.seed, trial=trial_index)


def assemble_effective(channels: ChannelSet, eh_set: Iterable[int],
                       id_set: Iterable[int]) -> EffectiveChannels:
    """Assemble the stacked/block-diagonal effective channels for a mode split."""
    eh = tuple(sorted(int(i) for i in eh_set))
    ids = tuple(sorted(int(i) for i in id_set))
    k = channels.k
    if sorted(eh + ids) != list(range(k)) or len(eh) + len(ids) != k:
        raise InvalidPartitionError(
            f"eh_set {eh} and id_set {ids} must partition 0..{k - 1}"
        )
    if not ids:
        raise InvalidPartitionError("id_set must not be empty")
    h = channels.h
    h11 = {kk: np.vstack([h[i, kk] for i in eh]) for kk in eh}
    h21 = {kk: np.vstack([h[i, kk] for i in ids]) for kk in eh}
    h12_blocks = {j: np.vstack([h[i, j] for i in eh]) for j in ids}
    if eh:
        h12 = np.hstack([h12_blocks[j] for j in ids])
    else:
        h12 = np.zeros((0, len(ids) * channels.m), dtype=np.complex128)
    h22 = scipy.linalg.block_diag(*[h[i, i] for i in ids])
    return EffectiveChannels(eh_set=eh, id_set=ids, h11=h11, h21=h21,
                             h12_blocks=h12_blocks, h12=h12, h22=h22)


# -- metrics ------------------------------------------------------------------


def _covariances(strategy) -> Mapping[int, np.ndarray]:
    if hasattr(strategy, "covariances"):
        return strategy.covariances()
    return strategy


def interference_covariance(channels: ChannelSet, strategy, receiver: int,
                            noise_power: float) -> np.ndarray:
    """Noise-plus-interference covariance at ``receiver`` (Hermitian PD)."""
    covs = _covariances(strategy)
    r = noise_power * np.eye(channels.m, dtype=np.complex128)
    for j, q in covs.items():
        if j == receiver or q is None:
            continue
        hij = channels.h[receiver, j]
        r = r + hij @ q @ hij.conj().T
    return hermitian_part(r)


def achievable_rate(channels: ChannelSet, strategy, receiver: int,
                    noise_power: float) -> float:
    """Decoding rate at ``receiver`` in nats per channel use."""
    covs = _covariances(strategy)
    q = covs.get(receiver)
    if q is None:
        return 0.0
    w = np.linalg.eigvalsh(hermitian_part(q))
    if w[0] < -1e-10 * max(1.0, float(w[-1])):
        raise ValueError(f"covariance of transmitter {receiver} is not PSD")
    r = interference_covariance(channels, covs, receiver, noise_power)
    hii = channels.h[receiver, receiver]
    m = channels.m
    inner = np.eye(m, dtype=np.complex128) + hii.conj().T @ np.linalg.solve(r, hii) @ q
    sign, logdet = np.linalg.slogdet(inner)
    return max(float(logdet), 0.0)


def harvested_energy(channels: ChannelSet, strategy, receiver: int,
                     zeta: float = 1.0, noise_power: float | None = None) -> float:
    """Energy collected at ``receiver`` per symbol period (watts).

    Thermal noise is dropped unless ``noise_power`` is given, in which case
    its full ``M * noise_power`` contribution is added.
    """
    covs = _covariances(strategy)
    total = 0.0
    for j, q in covs.items():
        if q is None:
            continue
        hij = channels.h[receiver, j]
        total += float(np.trace(hij @ q @ hij.conj().T).real)
    if noise_power is not None:
        total += channels.m * noise_power
    return zeta * total


# -- persistence ---------------------------------------------------------------

_DUMP_VERSION = 1


def save_channels(path, channels: ChannelSet, k1: int):
    """Write a replayable channel dump (npz with a small header).

    Layout: ``version`` (int), ``header`` = [K, K1, M, seed, trial] (int64),
    ``h`` = complex128 array of shape (K, K, M, M).
    """
    header = np.array([channels.k, k1, channels.m, channels.seed, channels.trial],
                      dtype=np.int64)
    np.savez(path, version=np.int64(_DUMP_VERSION), header=header, h=channels.h)


def load_channels(path):
    """Read a channel dump; returns ``(ChannelSet, header_dict)``."""
    with np.load(path) as data:
        version = int(data["version"])
        if version != _DUMP_VERSION:
            raise ValueError(f"unsupported channel dump version {version}")
        header = data["header"]
        h = np.array(data["h"], dtype=np.complex128)
    k, k1, m, seed, trial = (int(x) for x in header)
    if h.shape != (k, k, m, m):
        raise ValueError("channel dump header is inconsistent with the payload")
    channels = ChannelSet(h=h, seed=seed, trial=trial)
    return channels, {"k": k, "k1": k1, "m": m, "seed": seed, "trial": trial}
