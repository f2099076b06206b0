"""Rank-one transmit directions for the energy transmitters.

Three distributed designs plus a tilted variant:

* max-energy: dominant right singular vector of the stacked harvesting link,
* min-leakage: weakest right singular vector of the stacked decoding link,
* ratio-maximizing: dominant generalized eigenvector of the pair formed by
  the harvesting-link Gram matrix and the (regularized) leakage Gram matrix,
  which interpolates between the two above as the energy target grows,
* tilted: same pair with the regularizer geometrically decayed so the beam
  rotates toward lower leakage without changing its power.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet, EffectiveChannels
from .linalg import fix_phase, generalized_eigmax, hermitian_part, svd


class UndefinedDirectionError(ValueError):
    """The requested beam direction is undefined (zero channel)."""


@dataclass(frozen=True)
class BeamPlan:
    """Unit directions and scalar powers of the energy transmitters."""

    directions: dict       # tx index -> unit complex M-vector
    powers: dict           # tx index -> power in [0, p_max]
    scheme: str

    def covariance(self, k: int) -> np.ndarray:
        v = self.directions[k]
        return self.powers[k] * np.outer(v, v.conj())

    def covariances(self) -> dict:
        return {k: self.covariance(k) for k in self.directions}


@dataclass(frozen=True)
class BeamStatistics:
    """Per-unit-power energy gains and interference shapes of a direction set.

    ``energy_gains[j]`` is the energy delivered to all harvesting receivers
    per watt spent by energy transmitter ``j``. ``leak_shapes[(i, j)]`` is the
    rank-one interference covariance per watt at decoding receiver ``i``.
    """

    energy_gains: dict     # eh tx -> float
    leak_shapes: dict      # (id rx, eh tx) -> M x M Hermitian PSD


def _check_nonzero(mat: np.ndarray, what: str):
    if not np.any(mat):
        raise UndefinedDirectionError(f"{what} is identically zero")


def meb_direction(h11_k: np.ndarray) -> np.ndarray:
    """Direction maximizing delivered energy: top right singular vector."""
    _check_nonzero(h11_k, "harvesting link")
    return svd(h11_k).right_vectors[:, 0]


def mlb_direction(h21_k: np.ndarray) -> np.ndarray:
    """Direction minimizing leakage: weakest right singular vector."""
    _check_nonzero(h21_k, "decoding-side link")
    return svd(h21_k).right_vectors[:, -1]


def sler_regularizer(h11_k: np.ndarray, e_bar: float, p_max: float, k1: int) -> float:
    """Energy-shortfall weight added to the leakage Gram matrix."""
    spectral_sq = float(np.linalg.norm(h11_k, 2)) ** 2
    return max(e_bar / (k1 * p_max) - spectral_sq, 0.0)


def sler_direction(h11_k: np.ndarray, h21_k: np.ndarray, e_bar: float,
                   p_max: float, k1: int, tilt_exponent: int = 0,
                   tilt_decay: float = 0.9) -> np.ndarray:
    """Direction maximizing the signal-to-leakage-and-harvested-energy ratio.

    ``tilt_exponent`` = 0 gives the plain ratio maximizer; larger exponents
    decay the energy regularizer by ``tilt_decay**tilt_exponent``, rotating
    the beam toward the minimum-leakage direction.
    """
    m = h11_k.shape[1]
    sig = hermitian_part(h11_k.conj().T @ h11_k)
    leak = hermitian_part(h21_k.conj().T @ h21_k)
    if not np.any(sig) and not np.any(leak):
        raise UndefinedDirectionError("both link Gram matrices are zero")
    reg = (tilt_decay**tilt_exponent) * sler_regularizer(h11_k, e_bar, p_max, k1)
    pair_b = leak + reg * np.eye(m)
    return generalized_eigmax(sig, pair_b).vector


def whitened_mlb_direction(h21_k: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Leakage-minimizing direction against a known interference covariance.

    Whitens the stacked decoding-side link by ``(I + C)^{-1/2}`` through the
    eigenbasis of ``C`` and returns the weakest eigenvector of the whitened
    Gram matrix. With ``C = 0`` this reduces to ``mlb_direction``.
    """
    _check_nonzero(h21_k, "decoding-side link")
    c = hermitian_part(np.asarray(c, dtype=np.complex128))
    w, u = np.linalg.eigh(c)
    proj = u.conj().T @ h21_k
    gram = hermitian_part(proj.conj().T @ ((1.0 / (1.0 + w))[:, None] * proj))
    vals, vecs = np.linalg.eigh(gram)
    vec = vecs[:, 0]
    return fix_phase(vec / np.linalg.norm(vec))


def beam_statistics(effective: EffectiveChannels, channels: ChannelSet,
                    directions: dict) -> BeamStatistics:
    """Energy gains and per-receiver interference shapes for unit directions."""
    gains = {}
    shapes = {}
    for j, v in directions.items():
        gains[j] = float(np.linalg.norm(effective.h11[j] @ v) ** 2)
        for i in effective.id_set:
            hv = channels.h[i, j] @ v
            shapes[(i, j)] = np.outer(hv, hv.conj())
    return BeamStatistics(energy_gains=gains, leak_shapes=shapes)


def directions_for_scheme(scheme: str, effective: EffectiveChannels,
                          e_bar: float, p_max: float, tilt_decay: float = 0.9,
                          tilt_exponent: int = 0) -> dict:
    """Compute all energy-transmitter directions for one scheme tag."""
    k1 = max(len(effective.eh_set), 1)
    out = {}
    for k in effective.eh_set:
        if scheme == "MEB":
            out[k] = meb_direction(effective.h11[k])
        elif scheme == "MLB":
            out[k] = mlb_direction(effective.h21[k])
        elif scheme in ("SLER", "SLER_TILT"):
            out[k] = sler_direction(effective.h11[k], effective.h21[k], e_bar,
                                    p_max, k1, tilt_exponent, tilt_decay)
        else:
            raise ValueError(f"unknown scheme {scheme!r}")
    return out
