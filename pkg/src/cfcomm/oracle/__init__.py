# Copyright (C) 2025 cfcomm contributors
#
# SPDX-License-Identifier: LGPL-2.1-or-later

"""
Independent checks of the engine.

:func:`fock_simulate` evolves the full Fock-space state and agrees with
the engine to rounding error on small instances;
:func:`monte_carlo_clicks` samples photon trajectories and agrees with
it statistically.

UNSTABLE.
"""

from cfcomm.oracle.fockspace import CutoffTooSmallError, FockSpaceState, beam_splitter_matrix, fock_simulate
from cfcomm.oracle.montecarlo import OUTCOMES, ClickTally, expected_probabilities, monte_carlo_clicks

__all__ = [
    "OUTCOMES",
    "ClickTally",
    "CutoffTooSmallError",
    "FockSpaceState",
    "beam_splitter_matrix",
    "expected_probabilities",
    "fock_simulate",
    "monte_carlo_clicks",
]
