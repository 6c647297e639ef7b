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
Amplitude-level description of the three optical zones.

Zone 0 is Alice's upper path, Zone 1 her lower path and Zone 2 the
public channel to Bob. Every photon of the source enters Zone 0 and
sees the same beam splitters and the same vacuum projections, so the
whole multiphoton state is fixed by one real amplitude triple
:class:`ModeAmplitudes`: a ``v`` photon Fock input evolves into
``(b0 a0+ + b1 a1+ + b2 a2+)^v / sqrt(v!) |0,0,0>``.

Amplitudes are never renormalized after a vacuum projection. The norm
``b0^2 + b1^2 + b2^2`` is the probability that a single photon was not
seen by any channel detector, and every photon-number resolved
probability of a run is the source's probability generating function
evaluated at a squared amplitude (see :class:`PhotonStatistics`).

    >>> from cfcomm.states import ModeAmplitudes, beam_splitter_apply
    >>> import math
    >>> beam_splitter_apply(ModeAmplitudes.input_state(), (0, 1), math.pi / 2)
    ModeAmplitudes(beta0=6.123233995736766e-17, beta1=1.0, beta2=0.0)
"""

import math
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np
from scipy import special, stats

from cfcomm import config

ZONES = (0, 1, 2)
MODE_PAIRS = ((0, 1), (1, 2))

# normalization slack accepted for user supplied weights
_WEIGHT_TOLERANCE = 1e-12

ArrayOrFloat = Union[float, np.ndarray]


def _unwrap(values: np.ndarray) -> ArrayOrFloat:
    return values if values.ndim else float(values)


class InvalidStatisticsError(ValueError):
    """
    A photon distribution cannot be used, because:
        * a photon count or mean photon number is negative or not finite,
        * the weights of an arbitrary distribution are negative or do not
          sum to one, or
        * a truncation tolerance is not positive.
    """

    pass


@dataclass(frozen=True)
class ModeAmplitudes:
    """Single-photon amplitudes in Zones 0, 1 and 2."""

    beta0: float
    beta1: float
    beta2: float

    @classmethod
    def input_state(cls) -> "ModeAmplitudes":
        """All photons in Zone 0."""
        return cls(1.0, 0.0, 0.0)

    def __getitem__(self, mode: int) -> float:
        return (self.beta0, self.beta1, self.beta2)[mode]

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.beta0, self.beta1, self.beta2)

    def norm2(self) -> float:
        return self.beta0 * self.beta0 + self.beta1 * self.beta1 + self.beta2 * self.beta2

    def replace(self, mode: int, value: float) -> "ModeAmplitudes":
        values = list(self.as_tuple())
        values[mode] = value
        return ModeAmplitudes(*values)


def beam_splitter_apply(
    state: ModeAmplitudes, pair: Tuple[int, int], theta: float
) -> ModeAmplitudes:
    """Mix two neighbouring zones on a beam splitter of angle ``theta``.

    The creation operators transform as
    ``a_a+ -> a_a+ cos(theta) + a_b+ sin(theta)`` and
    ``a_b+ -> a_b+ cos(theta) - a_a+ sin(theta)``, so the reflectivity
    is ``cos(theta)^2``. The third zone is untouched and the norm is
    preserved.

    Args:
        state: amplitudes before the beam splitter
        pair: ``(0, 1)`` for an outer splitter, ``(1, 2)`` for an inner one
        theta: beam splitter angle in radians

    Raises:
        ValueError: ``pair`` is not one of :data:`MODE_PAIRS`
    """
    if tuple(pair) not in MODE_PAIRS:
        raise ValueError("Beam splitters only mix zones (0, 1) or (1, 2), not %r" % (pair,))

    a, b = pair
    c = math.cos(theta)
    s = math.sin(theta)
    beta_a = state[a]
    beta_b = state[b]
    values = list(state.as_tuple())
    values[a] = beta_a * c - beta_b * s
    values[b] = beta_a * s + beta_b * c
    return ModeAmplitudes(*values)


def collapse_vacuum(state: ModeAmplitudes, mode: int) -> Tuple[ModeAmplitudes, float]:
    """Project ``mode`` onto the vacuum, as a silent detector does.

    Returns the projected amplitudes, unnormalized, together with the
    single-photon weight ``beta_mode^2`` that was removed.
    """
    if mode not in ZONES:
        raise ValueError("No zone %r" % (mode,))
    leaked = state[mode] * state[mode]
    return state.replace(mode, 0.0), leaked


class PhotonStatistics(object):
    """Photon-number distribution of Alice's source.

    This is an abstract base class. See :class:`FockStatistics`,
    :class:`CoherentStatistics` and :class:`ArbitraryStatistics`.

    Since every photon follows the same amplitudes, a run reduces to
    evaluations of the probability generating function
    ``G(x) = sum_v w_v x^v`` at squared amplitudes. Subclasses provide
    it in complement form, ``G(1 - u)``, because the arguments that
    matter are close to one and ``u`` is known more accurately than
    ``1 - u``.
    """

    kind = ""

    def mean(self) -> float:
        raise NotImplementedError

    def weight(self, v: int) -> float:
        raise NotImplementedError

    def log_pgf_complement(self, u: float) -> float:
        """``log G(1 - u)`` for ``0 <= u <= 1``; ``-inf`` when it vanishes."""
        raise NotImplementedError

    def pgf_complement(self, u: float) -> float:
        return math.exp(self.log_pgf_complement(u))

    def vacuum_weight(self) -> float:
        """``G(0)``, the weight of the empty input."""
        return self.pgf_complement(1.0)

    def photon_scale(self, norm2: ArrayOrFloat) -> ArrayOrFloat:
        """``G'(x) / G(x)`` at ``x = norm2``, elementwise for arrays.

        Multiplied by a squared zone amplitude this is the mean photon
        number in that zone, conditioned on no detector having clicked
        yet. Zero where ``norm2`` is zero.
        """
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError

    def describe(self) -> str:
        return self.kind


class FockStatistics(PhotonStatistics):
    """Exactly ``v`` photons."""

    kind = "fock"

    def __init__(self, photons: int):
        if int(photons) != photons or photons < 0:
            raise InvalidStatisticsError("Fock photon number must be a nonnegative integer, not %r" % (photons,))
        self.photons = int(photons)

    def mean(self) -> float:
        return float(self.photons)

    def weight(self, v: int) -> float:
        return 1.0 if v == self.photons else 0.0

    def log_pgf_complement(self, u: float) -> float:
        if self.photons == 0:
            return 0.0
        if u >= 1.0:
            return -math.inf
        return self.photons * math.log1p(-u)

    def photon_scale(self, norm2: ArrayOrFloat) -> ArrayOrFloat:
        x = np.asarray(norm2, dtype=float)
        live = x > 0.0
        scale = np.where(live, self.photons / np.where(live, x, 1.0), 0.0)
        return _unwrap(scale)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.full(size, self.photons, dtype=np.int64)

    def describe(self) -> str:
        return "fock(%d)" % self.photons

    def __repr__(self) -> str:
        return "FockStatistics(%d)" % self.photons


class CoherentStatistics(PhotonStatistics):
    """Poissonian photon numbers of a coherent state ``|alpha>``.

    Only ``|alpha|^2`` enters any probability; a global phase of
    ``alpha`` is unobservable here.
    """

    kind = "coherent"

    def __init__(self, mean_photons: float):
        if not math.isfinite(mean_photons) or mean_photons < 0:
            raise InvalidStatisticsError(
                "Mean photon number must be finite and nonnegative, not %r" % (mean_photons,)
            )
        self.mean_photons = float(mean_photons)

    @classmethod
    def from_amplitude(cls, alpha: complex) -> "CoherentStatistics":
        return cls(abs(alpha) ** 2)

    def mean(self) -> float:
        return self.mean_photons

    def weight(self, v: int) -> float:
        return float(stats.poisson.pmf(v, self.mean_photons)) if self.mean_photons > 0 else float(v == 0)

    def log_pgf_complement(self, u: float) -> float:
        return -self.mean_photons * u

    def photon_scale(self, norm2: ArrayOrFloat) -> ArrayOrFloat:
        return _unwrap(np.full(np.shape(norm2), self.mean_photons))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.poisson(self.mean_photons, size)

    def describe(self) -> str:
        return "coherent(%g)" % self.mean_photons

    def __repr__(self) -> str:
        return "CoherentStatistics(%r)" % self.mean_photons


class ArbitraryStatistics(PhotonStatistics):
    """Explicit weights ``w_v = |c_v|^2`` for ``v = 0, 1, ...``."""

    kind = "arbitrary"

    def __init__(self, weights: Sequence[float]):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise InvalidStatisticsError("Weights must be a nonempty sequence")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise InvalidStatisticsError("Weights must be finite and nonnegative")
        if abs(math.fsum(w) - 1.0) > _WEIGHT_TOLERANCE:
            raise InvalidStatisticsError("Weights sum to %r, not 1" % math.fsum(w))
        self.weights = w
        self._photons = np.arange(w.size)

    def mean(self) -> float:
        return math.fsum(self.weights * self._photons)

    def weight(self, v: int) -> float:
        return float(self.weights[v]) if 0 <= v < self.weights.size else 0.0

    def log_pgf_complement(self, u: float) -> float:
        if u >= 1.0:
            return math.log(self.weights[0]) if self.weights[0] > 0 else -math.inf
        exponents = self._photons * math.log1p(-u)
        return float(special.logsumexp(exponents, b=self.weights))

    def photon_scale(self, norm2: ArrayOrFloat) -> ArrayOrFloat:
        x = np.clip(np.asarray(norm2, dtype=float), 0.0, None)
        powers = np.power.outer(x, self._photons)
        total = powers @ self.weights
        derivative = powers @ (self.weights * self._photons)
        live = (x > 0.0) & (total > 0.0)
        scale = np.where(live, derivative / np.where(live, x * total, 1.0), 0.0)
        return _unwrap(scale)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.choice(self.weights.size, size=size, p=self.weights / self.weights.sum())

    def describe(self) -> str:
        return "arbitrary(%d weights)" % self.weights.size

    def __repr__(self) -> str:
        return "ArbitraryStatistics(%r)" % (self.weights.tolist(),)


@dataclass(frozen=True)
class TruncatedStatistics:
    """A photon distribution cut at ``cutoff``.

    ``weights[v]`` equals the source weight for ``v <= cutoff``;
    ``tail_mass`` is the photon-weighted mass ``sum_{v > cutoff} w_v v``
    that was dropped.
    """

    weights: np.ndarray
    cutoff: int
    tail_mass: float

    def mean(self) -> float:
        return math.fsum(self.weights * np.arange(self.weights.size))

    def tail_probability(self) -> float:
        return max(0.0, 1.0 - math.fsum(self.weights))


def _poisson_tail_mass(mean_photons: float, cutoff: int) -> float:
    # sum_{v > k} v p(v) = mean * P(V >= k) for a Poisson variable V
    return mean_photons * float(stats.poisson.sf(cutoff - 1, mean_photons))


def truncate_statistics(
    statistics: PhotonStatistics, epsilon: float = config.TRUNCATION_EPSILON
) -> TruncatedStatistics:
    """Drop the photon numbers that carry less than ``epsilon`` of the mean.

    The cutoff is the smallest ``v_c`` with ``sum_{v > v_c} w_v v < epsilon``;
    a Fock input is cut exactly at its photon number.

    Raises:
        :exc:`InvalidStatisticsError`: ``epsilon`` is not positive or the
            distribution has no finite mean
    """
    if not epsilon > 0:
        raise InvalidStatisticsError("Truncation epsilon must be positive, not %r" % (epsilon,))
    if not math.isfinite(statistics.mean()):
        raise InvalidStatisticsError("Cannot truncate a distribution without finite mean")

    if isinstance(statistics, FockStatistics):
        weights = np.zeros(statistics.photons + 1)
        weights[-1] = 1.0
        return TruncatedStatistics(weights, statistics.photons, 0.0)

    if isinstance(statistics, CoherentStatistics):
        mu = statistics.mean_photons
        if mu == 0.0:
            return TruncatedStatistics(np.ones(1), 0, 0.0)
        # mu P(V >= k) < epsilon starts one above the isf quantile
        start = stats.poisson.isf(min(1.0, epsilon / mu), mu)
        cutoff = max(0, int(start) + 1) if np.isfinite(start) else 0
        while _poisson_tail_mass(mu, cutoff) >= epsilon:
            cutoff += 1
        while cutoff > 0 and _poisson_tail_mass(mu, cutoff - 1) < epsilon:
            cutoff -= 1
        weights = stats.poisson.pmf(np.arange(cutoff + 1), mu)
        return TruncatedStatistics(weights, cutoff, _poisson_tail_mass(mu, cutoff))

    if isinstance(statistics, ArbitraryStatistics):
        w = statistics.weights
        photon_mass = w * np.arange(w.size)
        # tails[k] = sum_{v >= k} w_v v
        tails = np.concatenate([np.cumsum(photon_mass[::-1])[::-1], [0.0]])
        cutoff = 0
        while tails[cutoff + 1] >= epsilon:
            cutoff += 1
        return TruncatedStatistics(w[: cutoff + 1].copy(), cutoff, float(tails[cutoff + 1]))

    raise InvalidStatisticsError("Unsupported statistics %r" % (statistics,))
