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
Figure sweeps written as CSV tables.

Each figure is a :class:`SweepSpec` turned into rows by
:func:`sweep_rows` and written by :func:`write_csv`. Rows follow the
grid order whatever the number of worker processes, and numbers are
printed with 12 significant digits, so the files are reproducible
byte for byte.
"""

import csv
import itertools
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Sequence, Tuple

from cfcomm import analytic, config, optimizer
from cfcomm.engine import ProtocolParams, Scheme, run_slaz
from cfcomm.states import CoherentStatistics

_logger = logging.getLogger("cfcomm.figures")

ENGINE = "engine"
ANALYTIC = "analytic"

HEADERS = {
    "fig1b": ("M", "N", "P"),
    "fig1c": ("M", "N", "P"),
    "fig1d": ("Ptilde", "log10T_approx", "log10T_exact"),
    "figD1": ("Pprime", "log10T_baseline", "log10T_D34", "log10T_eq8"),
    "fig1d-table": ("Ptilde", "M", "N", "mc", "T"),
}

Row = Tuple[Any, ...]


class SweepError(ValueError):
    """
    A figure sweep cannot be run, because:
        * the figure name is unknown,
        * a swept range is empty, or
        * a swept or fixed name is not a parameter of that figure.
    """

    pass


@dataclass
class SweepSpec:
    """What a figure sweeps, what it holds fixed and where it goes."""

    name: str
    grid: Dict[str, Sequence[Any]]
    fixed: Dict[str, Any] = field(default_factory=dict)
    output: str = ""
    source: str = ENGINE

    def validate(self) -> None:
        if self.name not in HEADERS:
            raise SweepError("Unknown figure %r, choose one of %s" % (self.name, ", ".join(HEADERS)))
        allowed_grid, allowed_fixed = _PARAMETERS[self.name]
        for key, values in self.grid.items():
            if key not in allowed_grid:
                raise SweepError("%s cannot sweep %r" % (self.name, key))
            if not len(values):
                raise SweepError("Empty range for %r in %s" % (key, self.name))
        for key in self.fixed:
            if key not in allowed_fixed:
                raise SweepError("%s has no parameter %r" % (self.name, key))
        if self.source not in (ENGINE, ANALYTIC):
            raise SweepError("Unknown source %r" % (self.source,))

    def cells(self) -> List[Tuple[Any, ...]]:
        """Grid points in row order, last key varying fastest."""
        return list(itertools.product(*self.grid.values()))


_PARAMETERS = {
    "fig1b": (("M", "N"), ("mean_photons",)),
    "fig1c": (("M", "N"), ("mean_photons",)),
    "fig1d": (("Ptilde",), ("mean_photons", "mc_max")),
    "fig1d-table": (("Ptilde",), ("mean_photons", "mc_max")),
    "figD1": (("Pprime",), ("mean_photons", "kbar")),
}


def default_spec(name: str, output: str = "") -> SweepSpec:
    """The sweep behind each figure at its published settings."""
    if name in ("fig1b", "fig1c"):
        grid = {"M": list(config.FIG1BC_M_GRID), "N": list(config.FIG1BC_N_GRID)}
        fixed = {"mean_photons": config.FIG1BC_MEAN_PHOTONS}
    elif name in ("fig1d", "fig1d-table"):
        grid = {"Ptilde": list(config.PTILDE_GRID)}
        fixed = {"mean_photons": config.FIG1D_MEAN_PHOTONS, "mc_max": config.FIG1D_MC_MAX}
    elif name == "figD1":
        grid = {"Pprime": list(config.PTILDE_GRID)}
        fixed = {"mean_photons": config.FIG1D_MEAN_PHOTONS, "kbar": config.FIGD1_KBAR}
    else:
        raise SweepError("Unknown figure %r, choose one of %s" % (name, ", ".join(HEADERS)))
    return SweepSpec(name, grid, fixed, output)


def _slaz_cell(args: Tuple[str, str, float, int, int]) -> Row:
    name, source, mu, M, N = args
    s = 0 if name == "fig1b" else 1
    if source == ANALYTIC:
        approx = analytic.approx_probs_slaz(M, N, CoherentStatistics(mu))
        return (M, N, approx.p0_sum if s == 0 else approx.p1_sum)
    outcome = run_slaz(ProtocolParams(Scheme.SLAZ, M, N, s), CoherentStatistics(mu))
    return (M, N, outcome.prob_only_signal)


def _log10T(run: Callable[[], optimizer.OptimizationResult]) -> float:
    try:
        return run().log10T
    except optimizer.InfeasibleError as e:
        _logger.warning("%s", e)
        return math.nan


def _fig1d_cell(args: Tuple[float, float, int]) -> Row:
    target, mu, mc_max = args
    approx = _log10T(lambda: optimizer.minimize_T_approx(target, target, mu))
    exact = _log10T(lambda: optimizer.minimize_T_exact(target, mu, mc_bounds=(1, mc_max)))
    return (target, approx, exact)


def _fig1d_table_cell(args: Tuple[float, float, int]) -> Row:
    target, mu, mc_max = args
    try:
        result = optimizer.minimize_T_exact(target, mu, mc_bounds=(1, mc_max))
    except optimizer.InfeasibleError as e:
        _logger.warning("%s", e)
        return (target, math.nan, math.nan, math.nan, math.nan)
    return (target, result.M, result.N, result.mc, result.T)


def _figD1_cell(args: Tuple[float, float, float]) -> Row:
    target, mu, kbar = args
    baseline = _log10T(lambda: optimizer.baseline_min_T(target))
    vacuum_only = analytic.counterfactual_only_log10T(kbar, target)
    design = _log10T(lambda: optimizer.minimize_T_approx(target, target, mu))
    return (target, baseline, vacuum_only, design)


def _tasks(spec: SweepSpec) -> Tuple[Callable[[Any], Row], List[Any]]:
    mu = float(spec.fixed.get("mean_photons", config.FIG1D_MEAN_PHOTONS))
    if spec.name in ("fig1b", "fig1c"):
        mu = float(spec.fixed.get("mean_photons", config.FIG1BC_MEAN_PHOTONS))
        return _slaz_cell, [(spec.name, spec.source, mu, M, N) for M, N in spec.cells()]
    if spec.name == "figD1":
        kbar = float(spec.fixed.get("kbar", config.FIGD1_KBAR))
        return _figD1_cell, [(p, mu, kbar) for (p,) in spec.cells()]
    mc_max = int(spec.fixed.get("mc_max", config.FIG1D_MC_MAX))
    cell = _fig1d_cell if spec.name == "fig1d" else _fig1d_table_cell
    return cell, [(p, mu, mc_max) for (p,) in spec.cells()]


def sweep_rows(spec: SweepSpec, jobs: int = 1) -> List[Row]:
    """Evaluate every grid point of ``spec``, in grid order.

    With ``jobs > 1`` the points are spread over worker processes.

    Raises:
        :exc:`SweepError`: ``spec`` does not validate
    """
    spec.validate()
    cell, tasks = _tasks(spec)
    _logger.info("%s: %d grid points on %d worker(s)", spec.name, len(tasks), jobs)
    if jobs <= 1:
        return [cell(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(cell, tasks))


def format_value(value: Any) -> str:
    if isinstance(value, float):
        return "%.12g" % value
    return str(value)


def write_csv(path: str, header: Iterable[str], rows: Iterable[Row]) -> str:
    """Write ``rows`` under ``header``; returns ``path``.

    Raises:
        OSError: ``path`` cannot be written
    """
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(list(header))
        for row in rows:
            writer.writerow([format_value(v) for v in row])
    return path


def make_figure(spec: SweepSpec, jobs: int = 1) -> str:
    """Run ``spec`` and write its table; returns the CSV path."""
    rows = sweep_rows(spec, jobs)
    path = spec.output or os.path.join(os.getcwd(), spec.name + ".csv")
    write_csv(path, HEADERS[spec.name], rows)
    _logger.info("wrote %d rows to %s", len(rows), path)
    return path
