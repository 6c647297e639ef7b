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
Dense Fock-space simulation of a protocol run.

Every element of :func:`cfcomm.engine.optical_elements` is applied to
the full three-mode state. Beam splitters conserve the photon number,
so the state is kept as one sector per total photon number ``v``: an
array ``psi[n0, n1]`` with ``n2 = v - n0 - n1``. A channel detector
that stays silent zeroes every entry with ``n2 > 0``; the removed
weight is kept as the leak probability.

This is slow and only meant for small cutoffs. It shares no algebra
with the engine, which makes it a useful check of it.
"""

import functools
import logging
import math
from typing import Dict, List, Tuple

import numpy as np
from scipy import special, stats

from cfcomm import config
from cfcomm.engine import BEAM_SPLITTER, ProtocolParams, RunOutcome, optical_elements
from cfcomm.states import ArbitraryStatistics, CoherentStatistics, FockStatistics, PhotonStatistics

_logger = logging.getLogger("cfcomm.oracle")


class CutoffTooSmallError(ValueError):
    """
    The photon number cutoff cannot represent the source, because:
        * a Fock input has more photons than the cutoff, or
        * the weight beyond the cutoff exceeds the tolerance.

    ``required`` is the smallest cutoff that would be accepted.
    """

    def __init__(self, message: str, required: int):
        ValueError.__init__(self, message)
        self.required = required


@functools.lru_cache(maxsize=1024)
def beam_splitter_matrix(photons: int, theta: float) -> np.ndarray:
    """Action of a beam splitter on the ``photons`` photon sector of two modes.

    Column ``k`` is the image of ``|k, photons - k>``, row ``p`` the
    amplitude of ``|p, photons - p>``. The modes transform as
    ``a+ -> a+ cos + b+ sin`` and ``b+ -> b+ cos - a+ sin``.
    """
    c = math.cos(theta)
    s = math.sin(theta)
    u = np.zeros((photons + 1, photons + 1))
    for na in range(photons + 1):
        nb = photons - na
        norm_in = math.factorial(na) * math.factorial(nb)
        for j in range(na + 1):
            for k in range(nb + 1):
                p = na - j + k
                q = photons - p
                coeff = special.comb(na, j, exact=True) * special.comb(nb, k, exact=True)
                term = coeff * c ** (na - j + nb - k) * s ** (j + k) * (-1) ** k
                u[p, na] += term * math.sqrt(math.factorial(p) * math.factorial(q) / norm_in)
    u.setflags(write=False)
    return u


class FockSpaceState(object):
    """Sector-wise amplitudes of a three-mode state up to ``cutoff`` photons.

    Sectors are weighted pure states: the sources used here carry no
    coherence between photon numbers that a detector could see, so each
    sector ``v`` starts as ``|v, 0, 0>`` with probability ``weights[v]``.
    """

    def __init__(self, weights: np.ndarray, cutoff: int):
        self.cutoff = cutoff
        self.weights = np.asarray(weights, dtype=float)
        self.sectors: List[np.ndarray] = []
        self.leaked = np.zeros(self.weights.size)
        for v in range(self.weights.size):
            psi = np.zeros((v + 1, v + 1))
            psi[v, 0] = 1.0
            self.sectors.append(psi)

    def _pairs(self, v: int, pair: Tuple[int, int]) -> List[Tuple[np.ndarray, np.ndarray]]:
        """Index arrays of the ``(pair)`` subspaces of sector ``v``, one per spectator count."""
        spans = []
        for spectator in range(v + 1):
            photons = v - spectator
            first = np.arange(photons + 1)
            if pair == (0, 1):
                spans.append((first, photons - first))
            else:
                spans.append((np.full(photons + 1, spectator), first))
        return spans

    def apply_beam_splitter(self, pair: Tuple[int, int], theta: float) -> None:
        for v, psi in enumerate(self.sectors):
            for rows, cols in self._pairs(v, pair):
                u = beam_splitter_matrix(rows.size - 1, theta)
                psi[rows, cols] = u @ psi[rows, cols]

    def project_vacuum(self) -> float:
        """Silent channel detector; returns the probability it would have clicked."""
        total = 0.0
        for v, psi in enumerate(self.sectors):
            n0, n1 = np.indices(psi.shape)
            mask = n0 + n1 < v
            lost = float(np.sum(psi[mask] ** 2))
            psi[mask] = 0.0
            self.leaked[v] += lost
            total += self.weights[v] * lost
        return total

    def norm2(self) -> float:
        """Total squared norm, which never exceeds one."""
        return math.fsum(w * float(np.sum(psi**2)) for w, psi in zip(self.weights, self.sectors))

    def channel_photons(self) -> Tuple[float, float]:
        """Weighted ``<n2>`` and squared norm of the current state."""
        mean = []
        norm = []
        for v, (w, psi) in enumerate(zip(self.weights, self.sectors)):
            n0, n1 = np.indices(psi.shape)
            n2 = np.clip(v - n0 - n1, 0, None)
            mean.append(w * float(np.sum(n2 * psi**2)))
            norm.append(w * float(np.sum(psi**2)))
        return math.fsum(mean), math.fsum(norm)

    def readout(self) -> Dict[str, float]:
        """Output detector probabilities of the kept, channel-free part."""
        only_d0 = []
        only_d1 = []
        silent0 = []
        silent1 = []
        for v, (w, psi) in enumerate(zip(self.weights, self.sectors)):
            # entries with n0 + n1 = v are the channel-free ones
            n0 = np.arange(v + 1)
            kept = psi[n0, v - n0] ** 2
            only_d0.append(w * kept[v] if v else 0.0)
            only_d1.append(w * kept[0] if v else 0.0)
            silent1.append(w * kept[v])
            silent0.append(w * kept[0])
        return {
            "only_d0": math.fsum(only_d0),
            "only_d1": math.fsum(only_d1),
            "silent0": math.fsum(silent0),
            "silent1": math.fsum(silent1),
        }


def _source_weights(statistics: PhotonStatistics, cutoff: int, tolerance: float) -> Tuple[np.ndarray, float]:
    if isinstance(statistics, FockStatistics):
        if statistics.photons > cutoff:
            raise CutoffTooSmallError(
                "Fock input with %d photons needs a cutoff of at least %d" % (statistics.photons, statistics.photons),
                statistics.photons,
            )
        weights = np.zeros(statistics.photons + 1)
        weights[-1] = 1.0
        return weights, 0.0

    if isinstance(statistics, CoherentStatistics):
        mu = statistics.mean_photons
        tail = float(stats.poisson.sf(cutoff, mu))
        if tail > tolerance:
            required = cutoff
            while float(stats.poisson.sf(required, mu)) > tolerance:
                required += 1
            raise CutoffTooSmallError(
                "Mean photon number %g leaves %.3g beyond cutoff %d" % (mu, tail, cutoff), required
            )
        return stats.poisson.pmf(np.arange(cutoff + 1), mu), tail

    if isinstance(statistics, ArbitraryStatistics):
        w = statistics.weights
        tail = math.fsum(w[cutoff + 1 :])
        if tail > tolerance:
            # beyond[k] = sum_{v > k} w_v
            beyond = np.concatenate([np.cumsum(w[::-1])[::-1][1:], [0.0]])
            required = int(np.argmax(beyond <= tolerance))
            raise CutoffTooSmallError("Weight %.3g lies beyond cutoff %d" % (tail, cutoff), required)
        return w[: cutoff + 1].copy(), tail

    raise ValueError("Unsupported statistics %r" % (statistics,))


def fock_simulate(
    params: ProtocolParams,
    statistics: PhotonStatistics,
    cutoff: int = config.FOCK_CUTOFF,
    tolerance: float = config.FOCK_TRUNCATION_TOLERANCE,
) -> RunOutcome:
    """Run ``params`` on the dense Fock-space state.

    Photon numbers above ``cutoff`` are dropped; their probability is
    returned as ``truncation_error``, and the kept, leaked and truncated
    probabilities sum to one.

    Raises:
        :exc:`CutoffTooSmallError`: the source does not fit below ``cutoff``
            within ``tolerance``
    """
    weights, truncation = _source_weights(statistics, cutoff, tolerance)
    state = FockSpaceState(weights, cutoff)

    best: Tuple[int, int, float] = (0, 0, 0.0)
    for element in optical_elements(params):
        if element.kind == BEAM_SPLITTER:
            state.apply_beam_splitter(element.pair, element.theta)  # type: ignore[arg-type]
            if element.inner:
                mean, norm = state.channel_photons()
                value = mean / norm if norm > 0 else 0.0
                if value > best[2]:
                    best = (element.outer, element.inner, value)
        else:
            state.project_vacuum()

    kept = state.norm2()
    leak = math.fsum(state.weights * state.leaked)
    readout = state.readout()
    silent = readout["silent1"] if params.s == 1 else readout["silent0"]
    f_click = 1.0 - silent / kept if kept > 0 else 0.0
    other = kept - readout["only_d0"] - readout["only_d1"]

    _logger.debug(
        "fock %s M=%d N=%d s=%d cutoff=%d: kept=%.12g leak=%.12g tail=%.3g",
        params.scheme.value,
        params.M,
        params.N,
        params.s,
        cutoff,
        kept,
        leak,
        truncation,
    )
    return RunOutcome(
        params=params,
        prob_only_d0=readout["only_d0"],
        prob_only_d1=readout["only_d1"],
        prob_leak=leak,
        prob_other=max(0.0, other),
        log_p_counterfactual=math.log(kept) if kept > 0 else -math.inf,
        f_click=max(0.0, min(1.0, f_click)),
        max_channel_occupancy=best[2],
        max_channel_location=(best[0], best[1]),
        truncation_error=truncation,
    )
