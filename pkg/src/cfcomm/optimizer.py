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
Searches for the smallest total cycle number.

Four searches are provided:

* :func:`minimize_T_approx` scans ``m_c`` with the closed-form design
  of the modified scheme,
* :func:`minimize_T_exact` searches integer ``(m_c, M, N)`` with the
  exact engine,
* :func:`minimize_T_matched_kbar` fixes ``m_c`` from a requested
  ``kbar`` and takes the smallest exact ``M``, then ``N``, and
* :func:`baseline_min_T` finds the single-photon full-scheme
  ``(M', N')`` for a target probability.

A search with no admissible point raises :exc:`InfeasibleError`.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional, Tuple

from cfcomm import analytic, config
from cfcomm.engine import ProtocolParams, Scheme, success_probability
from cfcomm.states import CoherentStatistics, PhotonStatistics

_logger = logging.getLogger("cfcomm.optimizer")

APPROX = "approx"
EXACT = "exact"
BASELINE = "baseline"
MATCHED = "matched"


@dataclass(frozen=True)
class OptimizationResult:
    """A minimal-``T`` configuration.

    ``T`` is ``mc * N`` for the modified scheme and ``M * N`` for the
    single-photon baseline, where ``mc`` is 0. ``achieved_p0`` and
    ``achieved_p1`` are evaluated at the returned integers: by the
    engine in exact mode and by the closed forms otherwise.
    """

    mode: str
    mc: int
    M: int
    N: int
    T: int
    kbar: Optional[float]
    achieved_p0: float
    achieved_p1: float

    @property
    def log10T(self) -> float:
        return math.log10(self.T)

    def as_dict(self) -> Dict[str, Any]:
        values = asdict(self)
        values["log10T"] = self.log10T
        return values


class InfeasibleError(Exception):
    """No configuration within the bounds meets the targets.

    ``best`` is the configuration that came closest, or ``None`` when
    nothing was evaluated.
    """

    def __init__(self, message: str, best: Optional[OptimizationResult] = None):
        Exception.__init__(self, message)
        self.best = best


def _check_target(name: str, value: float, allow_zero: bool = False) -> None:
    low_ok = value >= 0.0 if allow_zero else value > 0.0
    if not (low_ok and value < 1.0):
        raise ValueError("%s target must be in %s0, 1), not %r" % (name, "[" if allow_zero else "(", value))


def minimize_T_approx(
    target0: float,
    target1: float,
    mean_photons: float,
    mc_max: int = config.MC_MAX_APPROX,
    ratio: Optional[float] = None,
) -> OptimizationResult:
    """Scan ``m_c = 1 .. mc_max`` through the closed-form design.

    ``M`` and ``N`` are rounded up, so ``T = m_c ceil(N)``. Ties go to the
    smaller ``m_c``.

    Raises:
        :exc:`InfeasibleError`: every ``m_c`` is infeasible
    """
    _check_target("P0", target0)
    _check_target("P1", target1)

    best: Optional[Tuple[int, int, int]] = None
    for mc in range(1, mc_max + 1):
        try:
            design = analytic.modified_design(target0, target1, mean_photons, mc, ratio)
        except analytic.InfeasibleDesignError:
            continue
        N = max(1, math.ceil(design.N))
        M = max(2, mc, math.ceil(design.M))
        if best is None or mc * N < best[0] * best[2]:
            best = (mc, M, N)

    if best is None:
        raise InfeasibleError(
            "No m_c <= %d reaches P0=%g, P1=%g at mean photon number %g" % (mc_max, target0, target1, mean_photons)
        )

    mc, M, N = best
    probs = analytic.modified_probs(mean_photons, M, N, mc, ratio)
    _logger.debug("approx optimum mc=%d M=%d N=%d T=%d", mc, M, N, mc * N)
    return OptimizationResult(APPROX, mc, M, N, mc * N, probs.kbar, probs.ptilde0, probs.ptilde1)


class _ExactSearch(object):
    """Integer search over ``(m_c, M, N)`` with engine evaluations."""

    def __init__(self, target0: float, target1: float, statistics: PhotonStatistics):
        self.target0 = target0
        self.target1 = target1
        self.statistics = statistics
        self.evaluations = 0
        self.closest: Optional[OptimizationResult] = None

    def _meets(self, value: float, target: float) -> bool:
        # a zero target still asks for a detector click
        return value >= target and value > 0.0

    def ptilde(self, mc: int, M: int, N: int, s: int) -> float:
        self.evaluations += 1
        return success_probability(ProtocolParams(Scheme.MODIFIED, M, N, s, mc), self.statistics)

    def ptilde0(self, mc: int, M: int) -> float:
        # N only sets how the complete transfer is split up
        return self.ptilde(mc, M, 1, 0)

    def note(self, mc: int, M: int, N: int, p0: float, p1: float) -> None:
        candidate = _exact_result(mc, M, N, self.statistics, p0, p1)
        if self.closest is None or min(p0 - self.target0, p1 - self.target1) > min(
            self.closest.achieved_p0 - self.target0, self.closest.achieved_p1 - self.target1
        ):
            self.closest = candidate

    def first_feasible_M(self, mc: int, m_lo: int, m_hi: int) -> Optional[int]:
        """Smallest ``M`` in ``m_lo .. m_hi`` with ``P0`` on target."""
        if not self._meets(self.ptilde0(mc, m_hi), self.target0):
            return None
        lo, hi = m_lo, m_hi
        while lo < hi:
            mid = (lo + hi) // 2
            if self._meets(self.ptilde0(mc, mid), self.target0):
                hi = mid
            else:
                lo = mid + 1
        return lo

    def p1_bound(self, mc: int, M: int) -> float:
        """Upper bound on ``P1``: Zone 1 never holds more than ``sin^2(mc pi / 2M)``."""
        reach = math.sin(mc * math.pi / (2 * M)) ** 2
        return -math.expm1(self.statistics.log_pgf_complement(min(1.0, reach)))

    def first_feasible_N(self, mc: int, M: int, n_lo: int, n_hi: int) -> Optional[int]:
        """Smallest ``N`` in ``n_lo .. n_hi`` with ``P1`` on target."""
        if not self._meets(self.ptilde(mc, M, n_hi, 1), self.target1):
            return None
        lo, hi = n_lo, n_hi
        while lo < hi:
            mid = (lo + hi) // 2
            if self._meets(self.ptilde(mc, M, mid, 1), self.target1):
                hi = mid
            else:
                lo = mid + 1
        return lo


def _exact_result(
    mc: int, M: int, N: int, statistics: PhotonStatistics, p0: float, p1: float, mode: str = EXACT
) -> OptimizationResult:
    kbar = statistics.mean() * math.sin(mc * math.pi / (2 * M)) ** 2
    return OptimizationResult(mode, mc, M, N, mc * N, kbar, p0, p1)


def minimize_T_exact(
    target: float,
    mean_photons: Optional[float] = None,
    mc_bounds: Tuple[int, int] = config.MC_BOUNDS,
    M_bounds: Tuple[int, int] = config.M_BOUNDS,
    N_bounds: Tuple[int, int] = config.N_BOUNDS,
    target1: Optional[float] = None,
    statistics: Optional[PhotonStatistics] = None,
) -> OptimizationResult:
    """Smallest ``T = m_c N`` whose exact ``P0`` and ``P1`` reach the target.

    ``P0`` grows with ``M`` and does not depend on ``N``, so for every
    ``m_c`` the scan starts at the smallest admissible ``M``. It stops
    once even a lossless Zone 1 could not reach ``P1``, and ``N`` is
    bisected below the best ``T`` found so far. The result equals that
    of the full grid scan; ties go to the smaller ``m_c``, then ``M``.

    ``target1`` defaults to ``target``. The source is coherent with
    ``mean_photons`` unless ``statistics`` is given.

    Raises:
        :exc:`InfeasibleError`: nothing within the bounds qualifies;
            ``best`` holds the closest configuration seen
    """
    target1 = target if target1 is None else target1
    _check_target("P0", target, allow_zero=True)
    _check_target("P1", target1, allow_zero=True)
    if statistics is None:
        if mean_photons is None:
            raise ValueError("Give either mean_photons or statistics")
        statistics = CoherentStatistics(mean_photons)

    mc_lo, mc_hi = mc_bounds
    m_lo, m_hi = M_bounds
    n_lo, n_hi = N_bounds
    if mc_lo < 1 or m_lo < 2 or n_lo < 1 or mc_lo > mc_hi or m_lo > m_hi or n_lo > n_hi:
        raise ValueError("Invalid search bounds m_c=%r M=%r N=%r" % (mc_bounds, M_bounds, N_bounds))

    search = _ExactSearch(target, target1, statistics)
    best: Optional[Tuple[int, int, int]] = None

    for mc in range(mc_lo, min(mc_hi, m_hi) + 1):
        n_cap = n_hi if best is None else min(n_hi, (best[0] * best[2] - 1) // mc)
        if n_cap < n_lo:
            break
        start = search.first_feasible_M(mc, max(m_lo, mc), m_hi)
        if start is None:
            search.note(mc, m_hi, n_cap, search.ptilde0(mc, m_hi), search.ptilde(mc, m_hi, n_cap, 1))
            continue

        for M in range(start, m_hi + 1):
            bound = search.p1_bound(mc, M)
            if bound < target1 or bound == 0.0:
                if M == start:
                    search.note(mc, M, n_cap, search.ptilde0(mc, M), search.ptilde(mc, M, n_cap, 1))
                break
            N = search.first_feasible_N(mc, M, n_lo, n_cap)
            if N is None:
                if M == start:
                    search.note(mc, M, n_cap, search.ptilde0(mc, M), search.ptilde(mc, M, n_cap, 1))
                continue
            best = (mc, M, N)
            n_cap = N - 1
            if n_cap < n_lo:
                break

    if best is None:
        raise InfeasibleError(
            "No configuration with m_c in %r, M in %r, N in %r reaches P0=%g, P1=%g"
            % (mc_bounds, M_bounds, N_bounds, target, target1),
            search.closest,
        )

    mc, M, N = best
    result = _exact_result(mc, M, N, statistics, search.ptilde0(mc, M), search.ptilde(mc, M, N, 1))
    _logger.debug("exact optimum mc=%d M=%d N=%d T=%d after %d runs", mc, M, N, mc * N, search.evaluations)
    return result


def minimize_T_matched_kbar(
    kbar: float,
    target: float,
    mean_photons: Optional[float] = None,
    M_bounds: Tuple[int, int] = config.M_BOUNDS,
    N_bounds: Tuple[int, int] = config.N_BOUNDS,
    statistics: Optional[PhotonStatistics] = None,
) -> OptimizationResult:
    """Exact modified-scheme ``T`` at a requested Zone 1 photon number.

    ``m_c`` is ``round(-kbar / ln P')``. ``M`` is the smallest value whose
    exact ``P0`` reaches ``target``, so ``kbar`` at the result is close
    to the requested one, and ``N`` the smallest with ``P1`` on target.
    The result's ``T`` compares with
    :func:`analytic.baseline_comparison` at the returned ``kbar``.

    Raises:
        :exc:`InfeasibleError`: ``M`` or ``N`` runs out of its bounds
    """
    _check_target("P'", target)
    if kbar <= 0.0:
        raise ValueError("kbar must be positive, not %r" % (kbar,))
    if statistics is None:
        if mean_photons is None:
            raise ValueError("Give either mean_photons or statistics")
        statistics = CoherentStatistics(mean_photons)

    m_lo, m_hi = M_bounds
    n_lo, n_hi = N_bounds
    if m_lo < 2 or n_lo < 1 or m_lo > m_hi or n_lo > n_hi:
        raise ValueError("Invalid search bounds M=%r N=%r" % (M_bounds, N_bounds))

    mc = max(1, int(round(-kbar / math.log(target))))
    if mc > m_hi:
        raise InfeasibleError("kbar=%g needs m_c=%d above the M bound %d" % (kbar, mc, m_hi))

    search = _ExactSearch(target, target, statistics)
    M = search.first_feasible_M(mc, max(m_lo, mc), m_hi)
    if M is None:
        raise InfeasibleError("m_c=%d does not reach P0=%g with M <= %d" % (mc, target, m_hi))
    N = search.first_feasible_N(mc, M, n_lo, n_hi)
    if N is None:
        p1 = search.ptilde(mc, M, n_hi, 1)
        raise InfeasibleError(
            "m_c=%d, M=%d does not reach P1=%g with N <= %d" % (mc, M, target, n_hi),
            _exact_result(mc, M, n_hi, statistics, search.ptilde0(mc, M), p1, MATCHED),
        )

    result = _exact_result(mc, M, N, statistics, search.ptilde0(mc, M), search.ptilde(mc, M, N, 1), MATCHED)
    _logger.debug("matched kbar=%g optimum mc=%d M=%d N=%d T=%d", result.kbar, mc, M, N, result.T)
    return result


def _baseline_N(M1: int, target: float) -> int:
    N1 = max(1, math.ceil(analytic.PI2 * M1 / (8 * (1.0 - target))))
    # ceil of a rounded quotient can land one off either way
    while analytic.baseline_probabilities(M1, N1)[1] < target:
        N1 += 1
    while N1 > 1 and analytic.baseline_probabilities(M1, N1 - 1)[1] >= target:
        N1 -= 1
    return N1


def baseline_min_T(target: float, M_max: int = config.BASELINE_M_MAX) -> OptimizationResult:
    """Smallest single-photon ``T = M' N'`` with both ``P0'`` and ``P1'`` on target.

    The smallest admissible ``N'`` grows with ``M'``, so the product is
    smallest at the smallest admissible ``M'``.

    Raises:
        :exc:`InfeasibleError`: ``target >= 1``, or ``M_max`` is too small
    """
    if target >= 1.0:
        raise InfeasibleError("P'=%g cannot be reached with finite M', N'" % target)
    if target <= 0.0:
        raise ValueError("P' target must be positive, not %r" % (target,))

    M1 = max(1, math.ceil(analytic.PI2 / (4 * (1.0 - target))))
    while analytic.baseline_probabilities(M1, 1)[0] < target:
        M1 += 1
    while M1 > 1 and analytic.baseline_probabilities(M1 - 1, 1)[0] >= target:
        M1 -= 1
    if M1 > M_max:
        raise InfeasibleError("P'=%g needs M'=%d > %d" % (target, M1, M_max))

    N1 = _baseline_N(M1, target)
    p0, p1 = analytic.baseline_probabilities(M1, N1)
    return OptimizationResult(BASELINE, 0, M1, N1, M1 * N1, None, p0, p1)
