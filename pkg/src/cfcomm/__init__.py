"""
cfcomm
======

Exact simulation and closed-form analysis of counterfactual
communication through chained Mach-Zehnder interferometers with
multiphoton sources.

Modules:
    states: zone amplitudes and photon-number statistics
    engine: exact evolution of the full and the modified scheme
    analytic: closed-form probabilities and resource estimates
    optimizer: smallest total cycle number searches
    oracle: independent Fock-space and Monte Carlo checks
    figures: CSV sweeps behind the figures
"""

__version__ = "0.3.0"
__license__ = "LGPL-2.1-or-later"

from cfcomm.engine import ProtocolParams, RunOutcome, Scheme, run, run_modified, run_slaz
from cfcomm.states import ArbitraryStatistics, CoherentStatistics, FockStatistics, ModeAmplitudes

__all__ = [
    "ArbitraryStatistics",
    "CoherentStatistics",
    "FockStatistics",
    "ModeAmplitudes",
    "ProtocolParams",
    "RunOutcome",
    "Scheme",
    "run",
    "run_modified",
    "run_slaz",
]
