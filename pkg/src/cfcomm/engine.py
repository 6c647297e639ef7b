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
Exact evolution of the chained interferometer protocols.

Two schemes are supported. The full scheme (``Scheme.SLAZ``) has ``M``
outer beam splitters with an inner chain of ``N`` beam splitters
between consecutive ones, so ``M - 1`` inner chains, and reads out
Zones 0 and 1 after the last outer splitter. The modified scheme
stops after the ``m_c``-th inner chain and reads the detectors there.

Bob's signal decides what happens inside an inner chain. With ``s = 1``
his detector looks at Zone 2 after every inner beam splitter, which
keeps the photons in Zone 1 by repeated vacuum projection. With
``s = 0`` the inner chain is a complete transfer and the photons that
reach Zone 2 are measured once, at the chain exit.

Example:

    >>> from cfcomm.engine import ProtocolParams, Scheme, run_slaz
    >>> from cfcomm.states import CoherentStatistics
    >>> params = ProtocolParams(Scheme.SLAZ, M=250, N=35000, s=0)
    >>> round(run_slaz(params, CoherentStatistics(10)).prob_only_d0, 3)
    0.906

UNSTABLE.
"""

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Iterator, List, NamedTuple, Optional, Tuple

import numpy as np

from cfcomm import logger
from cfcomm.states import (
    CoherentStatistics,
    FockStatistics,
    ModeAmplitudes,
    PhotonStatistics,
    beam_splitter_apply,
    collapse_vacuum,
)

_logger = logging.getLogger("cfcomm.engine")

BEAM_SPLITTER = "beam_splitter"
DETECTOR = "detector"

# Zone 2 detector of the channel
CHANNEL = 2


class InvalidParamsError(ValueError):
    """
    Protocol parameters are not usable, because:
        * ``M`` is smaller than 2 or ``N`` smaller than 1,
        * the signal is not 0 or 1, or
        * the modified scheme has no ``m_c``, or ``m_c`` is outside
          ``1 .. M``.
    """

    pass


class Scheme(enum.Enum):
    SLAZ = "slaz"
    MODIFIED = "modified"


@dataclass(frozen=True)
class ProtocolParams:
    """Cycle numbers and signal of one protocol run.

    ``M`` and ``N`` are the outer and inner cycle numbers; the outer
    beam splitters have angle ``pi / 2M`` and the inner ones
    ``pi / 2N``. ``mc`` is the number of inner chains the modified
    scheme keeps and is ignored by the full scheme.
    """

    scheme: Scheme
    M: int
    N: int
    s: int = 0
    mc: Optional[int] = None

    def __post_init__(self) -> None:
        if not isinstance(self.scheme, Scheme):
            try:
                object.__setattr__(self, "scheme", Scheme(self.scheme))
            except ValueError:
                raise InvalidParamsError("Unknown scheme %r" % (self.scheme,))
        for name in ("M", "N", "s", "mc"):
            value = getattr(self, name)
            if value is None and name == "mc":
                continue
            try:
                integer = int(value)
            except (TypeError, ValueError):
                raise InvalidParamsError("%s must be an integer, not %r" % (name, value))
            if integer != value:
                raise InvalidParamsError("%s must be an integer, not %r" % (name, value))
            object.__setattr__(self, name, integer)
        if self.M < 2:
            raise InvalidParamsError("Outer cycle number M must be at least 2, not %r" % self.M)
        if self.N < 1:
            raise InvalidParamsError("Inner cycle number N must be at least 1, not %r" % self.N)
        if self.s not in (0, 1):
            raise InvalidParamsError("Signal must be 0 or 1, not %r" % (self.s,))
        if self.scheme is Scheme.MODIFIED:
            if self.mc is None:
                raise InvalidParamsError("The modified scheme needs m_c")
            if int(self.mc) != self.mc or not 1 <= self.mc <= self.M:
                raise InvalidParamsError("m_c must be an integer in 1..M, not %r" % (self.mc,))

    @property
    def theta_M(self) -> float:
        return math.pi / (2 * self.M)

    @property
    def theta_N(self) -> float:
        return math.pi / (2 * self.N)

    @property
    def outer_splitters(self) -> int:
        return self.M if self.scheme is Scheme.SLAZ else int(self.mc)  # type: ignore[arg-type]

    @property
    def inner_chains(self) -> int:
        return self.M - 1 if self.scheme is Scheme.SLAZ else int(self.mc)  # type: ignore[arg-type]

    @property
    def T(self) -> int:
        """Total cycle number, ``M N`` or ``m_c N`` for the modified scheme."""
        if self.scheme is Scheme.SLAZ:
            return self.M * self.N
        return int(self.mc) * self.N  # type: ignore[arg-type]

    def with_signal(self, s: int) -> "ProtocolParams":
        return ProtocolParams(self.scheme, self.M, self.N, s, self.mc)


class OpticalElement(NamedTuple):
    """One element of the unrolled optical path.

    ``outer`` counts outer beam splitters from 1; ``inner`` counts the
    splitters of an inner chain from 1 and is 0 for outer elements.
    """

    kind: str
    outer: int
    inner: int
    pair: Optional[Tuple[int, int]] = None
    theta: float = 0.0
    mode: Optional[int] = None


def optical_elements(params: ProtocolParams) -> Iterator[OpticalElement]:
    """Walk the optical path element by element, in photon order."""
    for m in range(1, params.outer_splitters + 1):
        yield OpticalElement(BEAM_SPLITTER, m, 0, (0, 1), params.theta_M)
        if m > params.inner_chains:
            continue
        for n in range(1, params.N + 1):
            yield OpticalElement(BEAM_SPLITTER, m, n, (1, 2), params.theta_N)
            if params.s == 1:
                yield OpticalElement(DETECTOR, m, n, mode=CHANNEL)
        if params.s == 0:
            yield OpticalElement(DETECTOR, m, params.N, mode=CHANNEL)


class CollapseRecord(NamedTuple):
    outer: int
    leaked: float
    norm2_before: float


class SurvivalLedger(object):
    """Single-photon weight removed by the channel detectors.

    Every vacuum projection adds one record. The probability that no
    channel detector clicks is ``G(1 - L)``, with ``L`` the total
    leaked weight, so it is kept as a sum of small terms and only
    turned into a probability in log form at the end.
    """

    def __init__(self, statistics: Optional[PhotonStatistics] = None):
        self.statistics = statistics
        self.records: List[CollapseRecord] = []

    def record(self, outer: int, leaked: float, norm2_before: float) -> None:
        self.records.append(CollapseRecord(outer, leaked, norm2_before))

    def leaked_total(self) -> float:
        return math.fsum(r.leaked for r in self.records)

    def log_survival(self, statistics: Optional[PhotonStatistics] = None) -> float:
        statistics = statistics or self.statistics
        if statistics is None:
            raise ValueError("No photon statistics to evaluate the survival with")
        return statistics.log_pgf_complement(min(1.0, self.leaked_total()))

    def thinning_probabilities(self) -> np.ndarray:
        """Per-record leak probability of a photon that survived so far."""
        q = [r.leaked / r.norm2_before if r.norm2_before > 0 else 0.0 for r in self.records]
        return np.clip(np.asarray(q, dtype=float), 0.0, 1.0)


@dataclass
class ChannelOccupancyProfile:
    """Mean photon number in Zone 2 right after every inner beam splitter."""

    outer: np.ndarray
    inner: np.ndarray
    occupancy: np.ndarray

    def __len__(self) -> int:
        return int(self.occupancy.size)

    def __iter__(self) -> Iterator[Tuple[int, int, float]]:
        for m, n, value in zip(self.outer, self.inner, self.occupancy):
            yield int(m), int(n), float(value)

    def maximum(self) -> Tuple[int, int, float]:
        """``(m, n, occupancy)`` of the first largest entry."""
        if not len(self):
            return (0, 0, 0.0)
        i = int(np.argmax(self.occupancy))
        return int(self.outer[i]), int(self.inner[i]), float(self.occupancy[i])


class OccupancyTracker(object):
    """Largest Zone 2 occupancy of a run, and optionally every entry.

    Along an ``s = 1`` chain the Fock photon scale ``v / x`` grows, but the
    entry's occupancy product falls like ``c / (b0**2 + b1**2 c)`` as the
    transfer factor ``c`` shrinks, and coherent sources have a constant
    scale, so a chain's largest entry is its first one. For ``s = 0`` it is
    the last one for every source. Only those entries are evaluated unless
    ``keep_entries`` is set.
    """

    def __init__(self, statistics: PhotonStatistics, keep_entries: bool = False):
        self._statistics = statistics
        self._monotone = isinstance(statistics, (CoherentStatistics, FockStatistics))
        self.keep_entries = keep_entries
        self.best: Tuple[int, int, float] = (0, 0, 0.0)
        self._chunks: List[Tuple[int, np.ndarray, np.ndarray]] = []

    def chain_steps(self, N: int, s: int) -> np.ndarray:
        """Inner indices of a chain that have to be evaluated."""
        if self.keep_entries or (s == 1 and not self._monotone):
            return np.arange(1, N + 1)
        return np.array([1 if s == 1 else N])

    def add(self, outer: int, inner: np.ndarray, beta2_squared: np.ndarray, norm2: np.ndarray) -> None:
        scale = self._statistics.photon_scale(np.asarray(norm2, dtype=float))
        values = beta2_squared * np.broadcast_to(scale, beta2_squared.shape)
        i = int(np.argmax(values))
        if values[i] > self.best[2]:
            self.best = (outer, int(inner[i]), float(values[i]))
        if self.keep_entries:
            self._chunks.append((outer, np.asarray(inner), values))

    def build(self) -> ChannelOccupancyProfile:
        if not self._chunks:
            empty = np.zeros(0, dtype=int)
            return ChannelOccupancyProfile(empty, empty, np.zeros(0))
        outer = np.concatenate([np.full(v.size, m, dtype=int) for m, _, v in self._chunks])
        inner = np.concatenate([n for _, n, _ in self._chunks])
        return ChannelOccupancyProfile(outer, inner, np.concatenate([v for _, _, v in self._chunks]))


def run_inner_chain(
    state: ModeAmplitudes,
    N: int,
    s: int,
    coherent_mean: Optional[float] = None,
    ledger: Optional[SurvivalLedger] = None,
    outer: int = 0,
    occupancy: Optional[OccupancyTracker] = None,
) -> ModeAmplitudes:
    """Send the Zone 1 amplitude through one inner chain of ``N`` splitters.

    With ``s = 1`` each of the ``N`` steps rotates Zones 1 and 2 by
    ``pi / 2N`` and projects Zone 2 on the vacuum; the steps compose to
    ``beta1 -> beta1 cos^N(pi / 2N)`` with leaked weight
    ``beta1^2 (1 - cos^2N(pi / 2N))``. With ``s = 0`` the rotations
    add up to ``pi / 2`` and Zone 2 is projected once at the exit.

    The leaked weight goes to ``ledger``; when no ledger is given and
    ``coherent_mean`` is, a coherent ledger is created, so a caller can
    read the chain's survival from ``ledger.log_survival()``.

    Raises:
        ValueError: ``state`` has amplitude in Zone 2 at entry
    """
    if state.beta2 != 0.0:
        raise ValueError("Inner chains start with an empty channel, got beta2=%r" % state.beta2)
    if ledger is None:
        ledger = SurvivalLedger(CoherentStatistics(coherent_mean) if coherent_mean is not None else None)

    theta = math.pi / (2 * N)
    norm2 = state.norm2()
    b1sq = state.beta1 * state.beta1

    if s == 1:
        if N == 1:
            # a single splitter sends all of Zone 1 into the channel
            ledger.record(outer, b1sq, norm2)
            if occupancy is not None:
                occupancy.add(outer, np.array([1]), np.array([b1sq]), np.array([norm2]))
            return ModeAmplitudes(state.beta0, 0.0, 0.0)

        log_c = math.log(math.cos(theta))
        ledger.record(outer, -b1sq * math.expm1(2 * N * log_c), norm2)
        if occupancy is not None:
            steps = occupancy.chain_steps(N, s)
            lost = -np.expm1(2 * (steps - 1) * log_c)
            entering = b1sq * (1.0 - lost)
            occupancy.add(outer, steps, entering * math.sin(theta) ** 2, norm2 - b1sq * lost)
        return ModeAmplitudes(state.beta0, state.beta1 * math.exp(N * log_c), 0.0)

    phase = N * theta
    if occupancy is not None:
        steps = occupancy.chain_steps(N, s)
        occupancy.add(outer, steps, b1sq * np.sin(steps * theta) ** 2, np.full(steps.size, norm2))
    ledger.record(outer, b1sq * math.sin(phase) ** 2, norm2)
    return ModeAmplitudes(state.beta0, state.beta1 * math.cos(phase), 0.0)


@dataclass(frozen=True)
class RunOutcome:
    """Probabilities of one protocol run.

    ``prob_only_d0`` and ``prob_only_d1`` are the probabilities that no
    channel detector clicks and only the named output detector fires.
    ``prob_other`` collects the remaining outcomes with a silent
    channel: both output detectors fire, or neither does.

    ``ptilde`` is the modified-scheme success probability ``p_s f_s``,
    which does not ask the other output detector to stay silent;
    ``prob_only_d0``/``prob_only_d1`` are the stricter variant.
    """

    params: ProtocolParams
    prob_only_d0: float
    prob_only_d1: float
    prob_leak: float
    prob_other: float
    log_p_counterfactual: float
    f_click: float
    max_channel_occupancy: float
    max_channel_location: Optional[Tuple[int, int]] = None
    final_amplitudes: Optional[ModeAmplitudes] = None
    truncation_error: float = 0.0
    ledger: Optional[SurvivalLedger] = field(default=None, compare=False, repr=False)

    @property
    def p_counterfactual(self) -> float:
        return math.exp(self.log_p_counterfactual)

    @property
    def ptilde(self) -> float:
        return self.p_counterfactual * self.f_click

    @property
    def prob_only_signal(self) -> float:
        """Only the detector of Bob's bit fires."""
        return self.prob_only_d1 if self.params.s == 1 else self.prob_only_d0

    @property
    def success_probability(self) -> float:
        if self.params.scheme is Scheme.MODIFIED:
            return self.ptilde
        return self.prob_only_signal

    def total_probability(self) -> float:
        return math.fsum([self.prob_only_d0, self.prob_only_d1, self.prob_leak, self.prob_other])

    def as_dict(self) -> dict:
        amplitudes = self.final_amplitudes.as_tuple() if self.final_amplitudes else None
        return {
            "scheme": self.params.scheme.value,
            "M": self.params.M,
            "N": self.params.N,
            "mc": self.params.mc,
            "s": self.params.s,
            "prob_only_d0": self.prob_only_d0,
            "prob_only_d1": self.prob_only_d1,
            "prob_leak": self.prob_leak,
            "prob_other": self.prob_other,
            "p_counterfactual": self.p_counterfactual,
            "f_click": self.f_click,
            "ptilde": self.ptilde,
            "max_channel_occupancy": self.max_channel_occupancy,
            "max_channel_location": self.max_channel_location,
            "final_amplitudes": amplitudes,
            "truncation_error": self.truncation_error,
        }


def outcome_from_amplitudes(
    params: ProtocolParams,
    statistics: PhotonStatistics,
    state: ModeAmplitudes,
    leaked: float,
    max_channel_occupancy: float = 0.0,
    ledger: Optional[SurvivalLedger] = None,
    max_channel_location: Optional[Tuple[int, int]] = None,
) -> RunOutcome:
    """Read the output detectors of a run that ended in ``state``.

    ``leaked`` is the total single-photon weight taken by the channel
    detectors, so ``1 - leaked`` is the squared norm of ``state``. All
    probabilities are generating-function values ``G(x) = G(1 - u)``
    with ``u`` assembled from small terms.
    """
    leaked = min(1.0, max(0.0, leaked))
    b0sq = state.beta0 * state.beta0
    b1sq = state.beta1 * state.beta1

    log_p = statistics.log_pgf_complement(leaked)
    log_g0 = statistics.log_pgf_complement(min(1.0, leaked + b1sq))  # Zone 1 empty
    log_g1 = statistics.log_pgf_complement(min(1.0, leaked + b0sq))  # Zone 0 empty
    vacuum = statistics.vacuum_weight()

    g_all = math.exp(log_p)
    g0 = math.exp(log_g0)
    g1 = math.exp(log_g1)
    only_d0 = max(0.0, g0 - vacuum)
    only_d1 = max(0.0, g1 - vacuum)
    prob_leak = -math.expm1(log_p) if log_p > -math.inf else 1.0
    other = max(0.0, (g_all - g0) - (g1 - vacuum) + vacuum)

    log_silent = log_g0 if params.s == 1 else log_g1
    if log_p == -math.inf:
        f_click = 0.0
    else:
        f_click = -math.expm1(log_silent - log_p)

    return RunOutcome(
        params=params,
        prob_only_d0=only_d0,
        prob_only_d1=only_d1,
        prob_leak=prob_leak,
        prob_other=other,
        log_p_counterfactual=log_p,
        f_click=max(0.0, min(1.0, f_click)),
        max_channel_occupancy=max_channel_occupancy,
        max_channel_location=max_channel_location,
        final_amplitudes=state,
        ledger=ledger,
    )


def _evolve_closed_form(
    params: ProtocolParams, ledger: SurvivalLedger, occupancy: Optional[OccupancyTracker] = None
) -> ModeAmplitudes:
    state = ModeAmplitudes.input_state()
    for m in range(1, params.outer_splitters + 1):
        state = beam_splitter_apply(state, (0, 1), params.theta_M)
        if m <= params.inner_chains:
            state = run_inner_chain(state, params.N, params.s, ledger=ledger, outer=m, occupancy=occupancy)
    return state


def _evolve_stepwise(
    params: ProtocolParams, ledger: SurvivalLedger, occupancy: OccupancyTracker
) -> ModeAmplitudes:
    state = ModeAmplitudes.input_state()
    chain: List[Tuple[float, float]] = []
    for element in optical_elements(params):
        if element.kind == BEAM_SPLITTER:
            state = beam_splitter_apply(state, element.pair, element.theta)  # type: ignore[arg-type]
            if element.inner:
                chain.append((state.beta2 * state.beta2, state.norm2()))
                if element.inner == params.N:
                    beta2_squared, norm2 = np.array(chain).T
                    occupancy.add(element.outer, np.arange(1, params.N + 1), beta2_squared, norm2)
                    chain = []
        else:
            norm2 = state.norm2()
            state, leaked = collapse_vacuum(state, element.mode)  # type: ignore[arg-type]
            ledger.record(element.outer, leaked, norm2)
    return state


def _run(
    params: ProtocolParams, statistics: PhotonStatistics, stepwise: bool, keep_entries: bool = False
) -> Tuple[RunOutcome, OccupancyTracker]:
    ledger = SurvivalLedger(statistics)
    occupancy = OccupancyTracker(statistics, keep_entries)
    if stepwise:
        state = _evolve_stepwise(params, ledger, occupancy)
    else:
        state = _evolve_closed_form(params, ledger, occupancy)
    outer, inner, peak = occupancy.best
    outcome = outcome_from_amplitudes(
        params, statistics, state, ledger.leaked_total(), peak, ledger, (outer, inner)
    )
    _logger.debug(
        "%s M=%d N=%d mc=%s s=%d %s: P0=%.6g P1=%.6g leak=%.6g",
        params.scheme.value,
        params.M,
        params.N,
        params.mc,
        params.s,
        statistics.describe(),
        outcome.prob_only_d0,
        outcome.prob_only_d1,
        outcome.prob_leak,
    )
    return outcome, occupancy


@logger.trace(logger_name="cfcomm.engine")
def run_slaz(params: ProtocolParams, statistics: PhotonStatistics, stepwise: bool = False) -> RunOutcome:
    """Evolve the full scheme and read Zones 0 and 1 at its end.

    ``stepwise`` walks every optical element instead of evaluating the
    inner chains in closed form; both give the same probabilities.

    Raises:
        :exc:`InvalidParamsError`: ``params`` is not a full-scheme run
    """
    if params.scheme is not Scheme.SLAZ:
        raise InvalidParamsError("run_slaz needs the full scheme, got %s" % params.scheme.value)
    return _run(params, statistics, stepwise)[0]


@logger.trace(logger_name="cfcomm.engine")
def run_modified(params: ProtocolParams, statistics: PhotonStatistics, stepwise: bool = False) -> RunOutcome:
    """Evolve the modified scheme up to its ``m_c``-th inner chain.

    The outcome's ``ptilde`` is ``p_s f_s``: no channel detector clicks
    and the detector of Zone ``s`` sees at least one photon.

    Raises:
        :exc:`InvalidParamsError`: ``params`` is not a modified-scheme run
    """
    if params.scheme is not Scheme.MODIFIED:
        raise InvalidParamsError("run_modified needs the modified scheme, got %s" % params.scheme.value)
    return _run(params, statistics, stepwise)[0]


def success_probability(params: ProtocolParams, statistics: PhotonStatistics) -> float:
    """Success probability of a run without the occupancy bookkeeping.

    ``ptilde`` for the modified scheme, the only-D_s probability for the
    full scheme. Used by the parameter searches.
    """
    ledger = SurvivalLedger(statistics)
    state = _evolve_closed_form(params, ledger)
    return outcome_from_amplitudes(params, statistics, state, ledger.leaked_total()).success_probability


def run(params: ProtocolParams, statistics: PhotonStatistics, stepwise: bool = False) -> RunOutcome:
    if params.scheme is Scheme.SLAZ:
        return run_slaz(params, statistics, stepwise)
    return run_modified(params, statistics, stepwise)


def channel_occupancy_profile(
    params: ProtocolParams, statistics: PhotonStatistics, stepwise: bool = False
) -> ChannelOccupancyProfile:
    """Zone 2 mean photon numbers before each channel measurement.

    An entry is ``beta2^2 G'(x) / G(x)`` right after an inner beam
    splitter, with ``x`` the squared norm at that point; for a coherent
    source this is ``|alpha|^2 beta2^2``.
    """
    return _run(params, statistics, stepwise, keep_entries=True)[1].build()
