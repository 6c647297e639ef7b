# Copyright (C) 2025 cfcomm contributors
#
# This library is free software; you can redistribute it and/or
# modify it under the terms of the GNU Lesser General Public
# License as published by the Free Software Foundation; either
# version 2 of the License, or (at your option) any later version.
#
# This library is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the GNU
# Lesser General Public License for more details.
#
# SPDX-License-Identifier: LGPL-2.1-or-later

"""
Click sampling for a protocol run.

The input photons never interact, so each one follows the single-photon
amplitudes on its own. A shot draws the photon number, lets every
photon leak at each channel measurement with its conditional leak
probability, and places the survivors on Zone 0 or Zone 1 at the end.

Shots are drawn in batches of fixed size; batch ``b`` uses the stream
``SeedSequence(seed, spawn_key=(b,))``, so a tally depends only on
``(params, statistics, shots, seed)``.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Dict

import numpy as np

from cfcomm import config
from cfcomm.engine import ProtocolParams, RunOutcome, run
from cfcomm.states import PhotonStatistics

_logger = logging.getLogger("cfcomm.oracle")

OUTCOMES = ("only_d0", "only_d1", "channel_leak", "other")


@dataclass(frozen=True)
class ClickTally:
    """Counts of the four click patterns over ``shots`` runs."""

    shots: int
    seed: int
    only_d0: int
    only_d1: int
    channel_leak: int
    other: int

    def counts(self) -> Dict[str, int]:
        return {name: getattr(self, name) for name in OUTCOMES}

    def frequencies(self) -> Dict[str, float]:
        return {name: count / self.shots for name, count in self.counts().items()}

    def deviations(self, outcome: RunOutcome) -> Dict[str, float]:
        """Distance of each frequency from ``outcome`` in binomial standard deviations.

        An outcome with zero or unit probability gives 0 when the
        frequency matches it exactly and ``inf`` otherwise.
        """
        expected = expected_probabilities(outcome)
        result = {}
        for name, frequency in self.frequencies().items():
            p = expected[name]
            sigma = math.sqrt(p * (1.0 - p) / self.shots)
            if sigma == 0.0:
                result[name] = 0.0 if frequency == p else math.inf
            else:
                result[name] = abs(frequency - p) / sigma
        return result

    def as_dict(self) -> dict:
        return asdict(self)


def expected_probabilities(outcome: RunOutcome) -> Dict[str, float]:
    return {
        "only_d0": outcome.prob_only_d0,
        "only_d1": outcome.prob_only_d1,
        "channel_leak": outcome.prob_leak,
        "other": outcome.prob_other,
    }


def _sample_batch(
    rng: np.random.Generator,
    statistics: PhotonStatistics,
    size: int,
    thinning: np.ndarray,
    zone0_share: float,
) -> np.ndarray:
    """Counts of the four outcomes, in :data:`OUTCOMES` order."""
    photons = np.asarray(statistics.sample(rng, size), dtype=np.int64)
    leaked = np.zeros(size, dtype=bool)
    for q in thinning:
        lost = rng.binomial(photons, q)
        leaked |= lost > 0
        photons = photons - lost

    in_zone0 = rng.binomial(photons, zone0_share)
    in_zone1 = photons - in_zone0
    kept = ~leaked
    only_d0 = kept & (in_zone0 > 0) & (in_zone1 == 0)
    only_d1 = kept & (in_zone1 > 0) & (in_zone0 == 0)
    other = kept & ~only_d0 & ~only_d1
    return np.array([only_d0.sum(), only_d1.sum(), leaked.sum(), other.sum()], dtype=np.int64)


def monte_carlo_clicks(
    params: ProtocolParams,
    statistics: PhotonStatistics,
    shots: int,
    seed: int,
    batch_size: int = config.MONTE_CARLO_BATCH,
) -> ClickTally:
    """Sample ``shots`` runs of ``params`` and tally the click patterns.

    The per-photon leak probabilities and the final Zone 0 share come
    from the engine's single-photon amplitudes; the sampling itself
    knows nothing of generating functions.

    Raises:
        ValueError: ``shots`` or ``batch_size`` is not positive
    """
    if shots < 1:
        raise ValueError("Need at least one shot, not %r" % (shots,))
    if batch_size < 1:
        raise ValueError("Batch size must be positive, not %r" % (batch_size,))

    outcome = run(params, statistics)
    thinning = outcome.ledger.thinning_probabilities()  # type: ignore[union-attr]
    final = outcome.final_amplitudes
    norm2 = final.norm2()  # type: ignore[union-attr]
    zone0_share = min(1.0, final.beta0**2 / norm2) if norm2 > 0 else 0.0  # type: ignore[union-attr]

    totals = np.zeros(len(OUTCOMES), dtype=np.int64)
    batches = -(-shots // batch_size)
    for batch in range(batches):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(batch,)))
        size = min(batch_size, shots - batch * batch_size)
        totals += _sample_batch(rng, statistics, size, thinning, zone0_share)

    tally = ClickTally(shots, seed, *(int(c) for c in totals))
    _logger.debug("monte carlo %s seed=%d: %r", statistics.describe(), seed, tally.counts())
    return tally
