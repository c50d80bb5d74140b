"""Zählerbasierte Zufallsströme für reproduzierbare Partikel-Rollouts.

Für jedes Paar (Strom, Zeitschritt) wird ein Philox-Generator mit einem aus
(seed, Strom, Zeitschritt) abgeleiteten Schlüssel erzeugt. Partikel i und
Dimension d belegen immer dieselben Zählerpositionen im Rohstrom; die Ziehung
eines Partikels hängt daher weder von der Partikelzahl noch von der
Reihenfolge der Auswertung ab.
"""
from enum import IntEnum
from typing import Sequence, Union

import numpy as np

_UINT53 = float(2 ** 53)


class StreamTag(IntEnum):
    INITIAL_STATE = 0
    TRANSITION = 1
    RESAMPLE = 2
    # Schlüssel für die Seed-Ableitung im Harness
    ROLLOUT = 10
    TRIAL = 11
    EVALUATION = 12
    POLICY_INIT = 13
    GP_RESTARTS = 14
    DIRECTION = 15
    GRADVAR = 16


def derive_seed(*keys: Union[int, StreamTag]) -> int:
    """Leitet aus einem Schlüsselpfad einen 63-Bit-Seed ab."""
    entropy = [int(k) for k in keys]
    if any(k < 0 for k in entropy):
        raise ValueError(f"Seed-Schlüssel müssen nicht-negativ sein: {entropy}")
    state = np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint32)
    return int((int(state[0]) << 31) ^ int(state[1]))


def _uniform_from_raw(raw: np.ndarray) -> np.ndarray:
    # 53 signifikante Bits, Wertebereich (0, 1)
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) / _UINT53


class ParticleStreams:
    """Standardnormal-Ziehungen, adressiert über (Strom, Schritt, Partikel, Dimension)."""

    def __init__(self, seed: int):
        self.seed = int(seed)

    def _bit_generator(self, tag: int, step: int) -> np.random.Philox:
        return np.random.Philox(np.random.SeedSequence([self.seed, int(tag), int(step)]))

    def normals(self, tag: int, step: int, particle_ids: Sequence[int], dim: int) -> np.ndarray:
        """Liefert ein (len(particle_ids), dim)-Array unabhängiger N(0,1)-Ziehungen."""
        ids = np.asarray(particle_ids, dtype=np.int64)
        if ids.size == 0:
            return np.zeros((0, dim))
        n_particles = int(ids.max()) + 1
        raw = self._bit_generator(tag, step).random_raw(2 * n_particles * dim)
        raw = np.asarray(raw, dtype=np.uint64).reshape(n_particles, dim, 2)
        u1 = _uniform_from_raw(raw[..., 0])
        u2 = _uniform_from_raw(raw[..., 1])
        z = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
        return z[ids]
