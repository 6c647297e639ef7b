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
Closed-form estimates for both schemes.

These are the large-``M``, large-``N`` expansions of the exact engine
results. Each approximate result carries ``flags``: one boolean per
inequality the expansion relies on, where ``a >> b`` is read as
``a / b >= ratio`` (:data:`cfcomm.config.MUCH_GREATER_RATIO` unless
given). Values are returned whether or not the flags hold.

Notation: ``mu`` is the mean photon number of the source, ``mc`` the
number of inner chains of the modified scheme and ``kbar`` the mean
photon number expected in Zone 1 at the readout for ``s = 1``.

STABLE.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from cfcomm import config
from cfcomm.states import CoherentStatistics, PhotonStatistics, truncate_statistics

_logger = logging.getLogger("cfcomm.analytic")

PI2 = math.pi ** 2

# T / (kbar^3 M' N') for the modified scheme at matched success probabilities
BASELINE_CONSTANT = 32.0 / (3.0 * math.pi ** 4)

Flags = Dict[str, bool]


class InfeasibleDesignError(ValueError):
    """The requested probabilities cannot be met by the closed-form design.

    Raised when the denominator ``P1 + exp(mc ln P0) - 1`` of the inner
    cycle number is not negative, which leaves ``N`` without a positive
    solution.
    """

    pass


def much_greater(a: float, b: float, ratio: Optional[float] = None) -> bool:
    ratio = config.MUCH_GREATER_RATIO if ratio is None else ratio
    if b <= 0:
        return a > 0
    return a / b >= ratio


def _check_probability(name: str, value: float) -> None:
    if not 0.0 < value < 1.0:
        raise ValueError("%s must be in (0, 1), not %r" % (name, value))


@dataclass(frozen=True)
class LossCoefficients:
    """First-order amplitude shifts from the inner-chain losses.

    After ``m`` outer splitters with ``s = 1`` the Zone 0 and Zone 1
    amplitudes are ``cos(m theta_M) + A`` and ``sin(m theta_M) - B`` to
    first order in ``1 / N``. ``A_asymptotic`` and ``B_asymptotic`` are
    the integral estimates ``pi M / 8N`` and ``pi^2 M / 16N`` for
    ``m = M``.
    """

    m: int
    A: float
    B: float
    A_asymptotic: float
    B_asymptotic: float


def loss_coefficients(m: int, M: int, N: int, include_last_chain: bool = False) -> LossCoefficients:
    """Exact finite sums behind the first-order ``s = 1`` amplitudes.

    ``A = pi^2 / 8N * sum_{m'=1}^{m-1} sin(m' t) sin((m - m') t)`` and
    ``B = pi^2 / 8N * sum_{m'} sin(m' t) cos((m - m') t)``, ``t = pi / 2M``.
    The ``B`` sum runs to ``m - 1``, the state right after the ``m``-th
    outer splitter, or to ``m`` with ``include_last_chain``, the state
    after the ``m``-th inner chain as well.
    """
    if m < 1 or m > M:
        raise ValueError("Outer index must be in 1..M, not %r" % (m,))
    theta = math.pi / (2 * M)
    scale = PI2 / (8 * N)
    inner = np.arange(1, m)
    a = scale * math.fsum(np.sin(inner * theta) * np.sin((m - inner) * theta))
    upper = np.arange(1, m + 1) if include_last_chain else inner
    b = scale * math.fsum(np.sin(upper * theta) * np.cos((m - upper) * theta))
    return LossCoefficients(
        m=m,
        A=max(0.0, a),
        B=max(0.0, b),
        A_asymptotic=math.pi * M / (8 * N),
        B_asymptotic=PI2 * M / (16 * N),
    )


@dataclass(frozen=True)
class FockFinalAmplitudes:
    """Zone 0 and Zone 1 amplitudes at the end of the full scheme.

    ``asymptotic`` is the leading large-``M`` (``s = 0``) or large-``N``
    (``s = 1``) form. ``exact`` is the pre-asymptotic form: the exact
    product for ``s = 0`` and the first order in ``1 / N`` for ``s = 1``.
    ``survival`` is the probability that a ``v`` photon input is never
    seen in the channel, from the ``exact`` amplitudes.
    """

    s: int
    asymptotic: Tuple[float, float]
    exact: Tuple[float, float]
    survival: float
    loss: Optional[LossCoefficients] = None
    flags: Flags = field(default_factory=dict)


def fock_final_amplitudes(M: int, N: int, v: int, s: int, ratio: Optional[float] = None) -> FockFinalAmplitudes:
    theta = math.pi / (2 * M)
    if s == 0:
        asymptotic = (1.0 - PI2 / (8 * M), math.pi / (2 * M))
        cos_m1 = math.cos(theta) ** (M - 1)
        exact = (cos_m1 * math.cos(theta), cos_m1 * math.sin(theta))
        loss = None
        flags = {"M >> v": much_greater(M, v, ratio), "M >> 1": much_greater(M, 1, ratio)}
    elif s == 1:
        asymptotic = (math.pi * M / (8 * N), 1.0 - PI2 * M / (16 * N))
        loss = loss_coefficients(M, M, N)
        exact = (math.cos(M * theta) + loss.A, math.sin(M * theta) - loss.B)
        flags = {"N >> M v": much_greater(N, M * v, ratio), "M >> 1": much_greater(M, 1, ratio)}
    else:
        raise ValueError("Signal must be 0 or 1, not %r" % (s,))
    survival = (exact[0] ** 2 + exact[1] ** 2) ** v
    return FockFinalAmplitudes(s, asymptotic, exact, survival, loss, flags)


def exact_final_amplitudes(M: int, N: int, s: int) -> Tuple[float, float]:
    """Final Zone 0/1 amplitudes of the full scheme as a matrix product.

    Each outer period is a rotation by ``pi / 2M`` followed by the
    inner chain's diagonal action ``diag(1, k)``, with ``k = cos^N(pi / 2N)``
    for ``s = 1`` and ``k = cos(pi / 2)`` for ``s = 0``.
    """
    theta = math.pi / (2 * M)
    c, s_ = math.cos(theta), math.sin(theta)
    rotation = np.array([[c, -s_], [s_, c]])
    k = math.cos(math.pi / (2 * N)) ** N if s == 1 else math.cos(math.pi / 2)
    period = np.diag([1.0, k]) @ rotation
    final = rotation @ np.linalg.matrix_power(period, M - 1) @ np.array([1.0, 0.0])
    return float(final[0]), float(final[1])


@dataclass(frozen=True)
class SlazApproximation:
    """Closed-form success probabilities of the full scheme.

    ``p0_sum``/``p1_sum`` sum the per-photon-number terms with the
    asymptotic amplitudes ``1 - pi^2 / 8M`` and ``1 - pi^2 M / 16N``;
    ``p0_linear``/``p1_linear`` are their first-order forms
    ``1 - pi^2 vbar / 4M - w_0`` and ``1 - pi^2 vbar M / 8N - w_0``.
    """

    p0_sum: float
    p1_sum: float
    p0_linear: float
    p1_linear: float
    mean_photons: float
    cutoff: int
    flags: Flags = field(default_factory=dict)

    @property
    def valid(self) -> bool:
        return all(self.flags.values())


def approx_probs_slaz(
    M: int,
    N: int,
    statistics: PhotonStatistics,
    ratio: Optional[float] = None,
    epsilon: float = config.TRUNCATION_EPSILON,
) -> SlazApproximation:
    truncated = truncate_statistics(statistics, epsilon)
    weights = truncated.weights
    photons = np.arange(weights.size)
    amplitude0 = 1.0 - PI2 / (8 * M)
    amplitude1 = 1.0 - PI2 * M / (16 * N)

    # the empty input cannot make a detector click
    p0_sum = math.fsum(weights[1:] * amplitude0 ** (2 * photons[1:]))
    p1_sum = math.fsum(weights[1:] * amplitude1 ** (2 * photons[1:]))

    vbar = statistics.mean()
    w0 = statistics.weight(0)
    flags = {
        "M >> v_c": much_greater(M, max(truncated.cutoff, 1), ratio),
        "N >> v_c M": much_greater(N, max(truncated.cutoff, 1) * M, ratio),
    }
    if isinstance(statistics, CoherentStatistics):
        flags["N >> mu M"] = much_greater(N, vbar * M, ratio)
        flags["mu M >> mu^2"] = much_greater(vbar * M, vbar * vbar, ratio)

    return SlazApproximation(
        p0_sum=p0_sum,
        p1_sum=p1_sum,
        p0_linear=1.0 - PI2 * vbar / (4 * M) - w0,
        p1_linear=1.0 - PI2 * vbar * M / (8 * N) - w0,
        mean_photons=vbar,
        cutoff=truncated.cutoff,
        flags=flags,
    )


@dataclass(frozen=True)
class CoherentClosedForms:
    """Coherent-source probabilities of the full scheme in closed form.

    ``p0_exact`` is exact. ``p1_first_order`` keeps the three factors of
    the first-order ``s = 1`` state (channel survival, Zone 0 silent,
    Zone 1 click); ``p1_closed`` is the generating-function sum with the
    asymptotic Zone 1 amplitude. ``p0_asymptotic``/``p1_asymptotic``
    are the same sums at the asymptotic amplitudes, so they match
    :func:`approx_probs_slaz` exactly. ``p1_exact`` uses the exact
    matrix-product amplitudes.
    """

    p0_exact: float
    p0_asymptotic: float
    p0_linear: float
    p1_first_order: float
    p1_closed: float
    p1_asymptotic: float
    p1_linear: float
    p1_exact: float


def coherent_closed_forms(M: int, N: int, mu: float) -> CoherentClosedForms:
    theta = math.pi / (2 * M)
    vacuum = math.exp(-mu)
    cos2m = math.cos(theta) ** (2 * M)
    amplitude0 = 1.0 - PI2 / (8 * M)
    amplitude1 = 1.0 - PI2 * M / (16 * N)
    loss1 = PI2 * M / (8 * N)

    gamma0, gamma1 = exact_final_amplitudes(M, N, 1)
    leaked = 1.0 - gamma0 ** 2 - gamma1 ** 2
    return CoherentClosedForms(
        p0_exact=math.exp(-mu * (1.0 - cos2m)) - vacuum,
        p0_asymptotic=math.exp(-mu * (1.0 - amplitude0 ** 2)) - vacuum,
        p0_linear=1.0 - mu * PI2 / (4 * M),
        p1_first_order=math.exp(-mu * loss1)
        * math.exp(-mu * PI2 * M * M / (64 * N * N))
        * -math.expm1(-mu * amplitude1 ** 2),
        p1_closed=math.exp(-mu * (loss1 - PI2 ** 2 * M * M / (256 * N * N))) - vacuum,
        p1_asymptotic=math.exp(-mu * (1.0 - amplitude1 ** 2)) - vacuum,
        p1_linear=1.0 - mu * loss1,
        p1_exact=math.exp(-mu * (leaked + gamma0 ** 2)) - vacuum,
    )


def slaz_resource_requirement(
    mean_photons: float, M1: int, N1: int, ratio: Optional[float] = None
) -> Tuple[float, float, float, Flags]:
    """Cycle numbers the full scheme needs to match single-photon ``M'``, ``N'``.

    Returns ``(mu M', mu^2 N', mu^3 M' N', flags)``.
    """
    mu = mean_photons
    flags = {"mu >> 1": much_greater(mu, 1.0, ratio)}
    return mu * M1, mu * mu * N1, mu ** 3 * M1 * N1, flags


@dataclass(frozen=True)
class ModifiedProbabilities:
    """Closed-form success probabilities of the modified scheme.

    ``ptilde0`` is the small-angle exponential, ``ptilde0_exact`` the
    exact coherent expression it approximates. ``p1``/``f1`` use the
    small-angle sums, ``p1_sum``/``f1_sum`` the finite sums.
    """

    ptilde0: float
    ptilde1: float
    p0: float
    p1: float
    f0: float
    f1: float
    kbar: float
    ptilde0_exact: float
    p1_sum: float
    f1_sum: float
    flags: Flags = field(default_factory=dict)

    @property
    def valid(self) -> bool:
        return all(self.flags.values())


def modified_probs(
    mean_photons: float, M: int, N: int, mc: int, ratio: Optional[float] = None
) -> ModifiedProbabilities:
    mu = mean_photons
    theta = math.pi / (2 * M)
    cos2 = math.cos(theta) ** (2 * mc)

    p0 = math.exp(-mu * (1.0 - cos2))
    f0 = -math.expm1(-mu * cos2)

    p1 = math.exp(-(math.pi ** 4) * mu * mc * (mc + 1) * (2 * mc + 1) / (96 * N * M * M))
    zone1 = mu * PI2 * mc * mc / (4 * M * M) * (1.0 - PI2 * (1 + mc) / (16 * N)) ** 2
    f1 = -math.expm1(-zone1)

    steps = np.arange(1, mc + 1)
    p1_sum = math.exp(-PI2 / (4 * N) * mu * math.fsum(np.sin(steps * theta) ** 2))
    loss = loss_coefficients(mc, M, N, include_last_chain=True)
    f1_sum = -math.expm1(-mu * (math.sin(mc * theta) - loss.B) ** 2)

    kbar = mu * math.sin(mc * theta) ** 2
    return ModifiedProbabilities(
        ptilde0=math.exp(-mu * mc * PI2 / (4 * M * M)),
        ptilde1=p1 * f1,
        p0=p0,
        p1=p1,
        f0=f0,
        f1=f1,
        kbar=kbar,
        ptilde0_exact=p0 - math.exp(-mu),
        p1_sum=p1_sum,
        f1_sum=f1_sum,
        flags={
            "kbar << mu": much_greater(mu, kbar, ratio),
            "N >> mc^2": much_greater(N, mc * mc, ratio),
        },
    )


def ptilde1_from_ptilde0(ptilde0: float, N: int, mc: int) -> float:
    """Modified-scheme ``P1`` with ``M`` eliminated through ``P0``."""
    _check_probability("P0", ptilde0)
    log_p0 = math.log(ptilde0)
    survival = math.exp(PI2 * (mc + 1) * (2 * mc + 1) * log_p0 / (24 * N))
    silent = math.exp(mc * log_p0 * (1.0 - PI2 * (1 + mc) / (16 * N)) ** 2)
    return survival * (1.0 - silent)


@dataclass(frozen=True)
class ModifiedDesign:
    """Real-valued modified-scheme parameters for target probabilities."""

    mc: int
    M: float
    N: float
    T: float
    kbar: float
    N_large_kbar: float
    flags: Flags = field(default_factory=dict)


def modified_design(
    ptilde0: float, ptilde1: float, mean_photons: float, mc: int, ratio: Optional[float] = None
) -> ModifiedDesign:
    """Outer and inner cycle numbers that give ``ptilde0`` and ``ptilde1``.

    Raises:
        :exc:`InfeasibleDesignError`: no positive ``N`` exists for ``mc``
        ValueError: a probability is outside ``(0, 1)`` or ``mc < 1``
    """
    _check_probability("P0", ptilde0)
    _check_probability("P1", ptilde1)
    if mc < 1:
        raise ValueError("m_c must be at least 1, not %r" % (mc,))

    log_p0 = math.log(ptilde0)
    silent = math.exp(mc * log_p0)
    denominator = ptilde1 + silent - 1.0
    if denominator >= 0.0:
        raise InfeasibleDesignError(
            "P1=%g is out of reach for m_c=%d at P0=%g (P1 + P0^m_c - 1 = %g)"
            % (ptilde1, mc, ptilde0, denominator)
        )

    M = math.sqrt(-mean_photons * mc * PI2 / (4 * log_p0))
    N = PI2 * (mc + 1) * ((2 * mc + 1) + (mc - 1) * silent) * log_p0 / (24 * denominator)
    kbar = -mc * log_p0
    return ModifiedDesign(
        mc=mc,
        M=M,
        N=N,
        T=mc * N,
        kbar=kbar,
        N_large_kbar=PI2 * kbar * kbar / (12 * log_p0 * math.log(ptilde1)),
        flags={
            "N >> mc^2": much_greater(N, mc * mc, ratio),
            "kbar << mu": much_greater(mean_photons, kbar, ratio),
        },
    )


def modified_resource_asymptotics(kbar: float, p0: float, p1: float) -> Tuple[float, float]:
    """Total cycle number for a given ``kbar``, with and without ``exp(-kbar)``.

    Returns ``(T, T_large_kbar)``; the second drops every ``exp(-kbar)``
    term and is the large-``kbar`` limit of the first.

    Raises:
        :exc:`InfeasibleDesignError`: ``exp(-kbar) >= 1 - p1``
    """
    _check_probability("P0", p0)
    _check_probability("P1", p1)
    log_p0 = math.log(p0)
    tail = math.exp(-kbar)
    denominator = tail - (1.0 - p1)
    if denominator >= 0.0:
        raise InfeasibleDesignError("kbar=%g cannot reach P1=%g" % (kbar, p1))
    T = (
        PI2
        * kbar
        * (log_p0 - kbar)
        * (2 * kbar - log_p0 + (kbar + log_p0) * tail)
        / (24 * log_p0 ** 2 * denominator)
    )
    T_large = PI2 * kbar ** 3 / (12 * log_p0 ** 2 * (1.0 - p1))
    return T, T_large


def baseline_comparison(kbar: float, M1: float, N1: float) -> float:
    """Modified-scheme ``T`` at the single-photon baseline's probabilities."""
    return BASELINE_CONSTANT * kbar ** 3 * M1 * N1


def baseline_probabilities(M1: int, N1: int) -> Tuple[float, float]:
    """Single-photon full-scheme ``(P0', P1')``."""
    return 1.0 - PI2 / (4 * M1), 1.0 - PI2 * M1 / (8 * N1)


@dataclass(frozen=True)
class CounterfactualOnlyDesign:
    """Modified-scheme parameters when only channel silence is required.

    ``M`` is ``None`` when no mean photon number was given.
    """

    mc: float
    M: Optional[float]
    N: float
    T: float
    log10T: float
    flags: Flags = field(default_factory=dict)


def counterfactual_only_design(
    kbar: float, p0: float, p1: float, mean_photons: Optional[float] = None, ratio: Optional[float] = None
) -> CounterfactualOnlyDesign:
    _check_probability("p0", p0)
    _check_probability("p1", p1)
    log_p0 = math.log(p0)
    log_p1 = math.log(p1)
    mc = -kbar / log_p0
    M = None
    if mean_photons is not None:
        M = math.sqrt(-mean_photons * mc * PI2 / (4 * log_p0))
    N = PI2 * kbar * kbar / (12 * log_p0 * log_p1)
    T = -PI2 * kbar ** 3 / (12 * log_p0 ** 2 * log_p1)
    return CounterfactualOnlyDesign(
        mc=mc,
        M=M,
        N=N,
        T=T,
        log10T=math.log10(T),
        flags={"mc >> 1": much_greater(mc, 1.0, ratio)},
    )


def counterfactual_only_log10T(kbar: float, p: float) -> float:
    """``log10 T`` of :func:`counterfactual_only_design` at ``p0 = p1 = p``."""
    _check_probability("P'", p)
    return math.log10(-PI2 * kbar ** 3 / (12 * math.log(p) ** 3))


def counterfactual_only_from_baseline(
    kbar: float, M1: float, N1: float, mean_photons: Optional[float] = None
) -> CounterfactualOnlyDesign:
    """The same design expressed through the single-photon ``M'`` and ``N'``."""
    mc = 4 * M1 * kbar / PI2
    M = None
    if mean_photons is not None:
        M = 2 * M1 * math.sqrt(kbar) * math.sqrt(mean_photons) / math.pi
    N = 8 * N1 * kbar * kbar / (3 * PI2)
    T = mc * N
    return CounterfactualOnlyDesign(mc=mc, M=M, N=N, T=T, log10T=math.log10(T))


def channel_occupancy_estimates(mean_photons: float, M: int, N: int, mc: int) -> Tuple[float, float]:
    """Lossless estimates of the peak Zone 2 occupancy, ``(s = 0, s = 1)``.

    For ``s = 0`` the first inner chain carries the whole ``sin^2(theta_M)``
    into the channel; for ``s = 1`` the last chain's first splitter
    takes ``sin^2(theta_N)`` of the Zone 1 population ``sin^2(mc theta_M)``.
    """
    theta_M = math.pi / (2 * M)
    theta_N = math.pi / (2 * N)
    s0 = mean_photons * math.sin(theta_M) ** 2
    s1 = mean_photons * math.sin(mc * theta_M) ** 2 * math.sin(theta_N) ** 2
    _logger.debug("occupancy estimates mu=%g M=%d N=%d mc=%d: %g %g", mean_photons, M, N, mc, s0, s1)
    return s0, s1
