# Copyright (C) 2008 One Laptop Per Child
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
# You should have received a copy of the GNU Lesser General Public
# License along with this library; if not, write to the
# Free Software Foundation, Inc., 59 Temple Place - Suite 330,
# Boston, MA 02111-1307, USA.

"""
Command line front end.

``cfcomm run`` evaluates one configuration, ``cfcomm figure`` writes
the CSV tables behind the figures, ``cfcomm optimize`` searches for the
smallest total cycle number and ``cfcomm oracle`` checks the engine
against the independent simulators.

Exit status is 0 on success, 1 for invalid input and 2 when an
optimization has no feasible point.
"""

import argparse
import json
import logging
import os
import sys
from typing import List, Optional, Tuple

from cfcomm import analytic, env, figures, logger, optimizer
from cfcomm import config as defaults
from cfcomm.config import Config
from cfcomm.engine import ProtocolParams, RunOutcome, Scheme, run
from cfcomm.oracle import fock_simulate, monte_carlo_clicks
from cfcomm.oracle.montecarlo import expected_probabilities
from cfcomm.states import (
    ArbitraryStatistics,
    CoherentStatistics,
    FockStatistics,
    PhotonStatistics,
)

_logger = logging.getLogger("cfcomm.cli")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INFEASIBLE = 2

# oracle cross-checks start failing beyond this
ORACLE_TOLERANCE = 1e-10
MONTE_CARLO_SIGMAS = 3.0


class UsageError(ValueError):
    """The command line does not describe a runnable configuration."""

    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, "%s: error: %s\n" % (self.prog, message))


def _statistics(config: Config) -> PhotonStatistics:
    given = [key for key in ("fock", "coherent", "weights") if config.get(key) is not None]
    if len(given) != 1:
        raise UsageError("Give exactly one of --fock, --coherent or --weights")
    if config.fock is not None:
        return FockStatistics(config.fock)
    if config.coherent is not None:
        return CoherentStatistics(config.coherent)
    return ArbitraryStatistics(config.weights)


def _params(config: Config) -> ProtocolParams:
    for key in ("M", "N"):
        if config.get(key) is None:
            raise UsageError("--%s is required" % key)
    return ProtocolParams(config.get("scheme", Scheme.SLAZ.value), config.M, config.N, config.get("s", 0), config.mc)


def _line(label: str, value: object) -> None:
    if isinstance(value, float):
        value = "%.12g" % value
    print("%-28s %s" % (label, value))


def _print_flags(flags: dict) -> None:
    for name, ok in flags.items():
        _line("  regime %s" % name, "ok" if ok else "VIOLATED")


def _print_outcome(outcome: RunOutcome) -> None:
    _line("P(only D0)", outcome.prob_only_d0)
    _line("P(only D1)", outcome.prob_only_d1)
    _line("P(channel click)", outcome.prob_leak)
    _line("P(other)", outcome.prob_other)
    _line("p_s (no channel click)", outcome.p_counterfactual)
    _line("f_s (D_s clicks | p_s)", outcome.f_click)
    _line("Ptilde_s", outcome.ptilde)
    _line("max channel occupancy", outcome.max_channel_occupancy)
    _line("  at (outer, inner)", outcome.max_channel_location)
    if outcome.truncation_error:
        _line("truncation error", outcome.truncation_error)


def cmd_run(config: Config, options: argparse.Namespace) -> int:
    """Evaluate one configuration and compare with the closed forms"""
    params = _params(config)
    statistics = _statistics(config)
    outcome = run(params, statistics, stepwise=bool(config.stepwise))

    if options.json:
        print(json.dumps(outcome.as_dict(), indent=2, sort_keys=True))
        return EXIT_OK

    _line("scheme", params.scheme.value)
    _line("M, N, mc, s", "%d, %d, %s, %d" % (params.M, params.N, params.mc, params.s))
    _line("source", statistics.describe())
    _line("T", params.T)
    _print_outcome(outcome)

    ratio = config.ratio
    if params.scheme is Scheme.SLAZ:
        epsilon = config.get("epsilon", defaults.TRUNCATION_EPSILON)
        approx = analytic.approx_probs_slaz(params.M, params.N, statistics, ratio, epsilon)
        print("closed forms")
        _line("  P0 photon sum", approx.p0_sum)
        _line("  P0 linear", approx.p0_linear)
        _line("  P1 photon sum", approx.p1_sum)
        _line("  P1 linear", approx.p1_linear)
        _print_flags(approx.flags)
        if not approx.valid:
            _logger.warning("closed forms evaluated outside their regime")
    elif isinstance(statistics, CoherentStatistics):
        mc = int(params.mc)  # type: ignore[arg-type]
        probs = analytic.modified_probs(statistics.mean_photons, params.M, params.N, mc, ratio)
        s0, s1 = analytic.channel_occupancy_estimates(statistics.mean_photons, params.M, params.N, mc)
        print("closed forms")
        _line("  Ptilde0", probs.ptilde0)
        _line("  Ptilde1", probs.ptilde1)
        _line("  kbar", probs.kbar)
        _line("  occupancy estimate s=%d" % params.s, s1 if params.s == 1 else s0)
        _print_flags(probs.flags)
        if not probs.valid:
            _logger.warning("closed forms evaluated outside their regime")
    return EXIT_OK


def _figure_spec(config: Config, name: str) -> figures.SweepSpec:
    spec = figures.default_spec(name)
    if config.coherent is not None:
        spec.fixed["mean_photons"] = config.coherent
    if config.kbar is not None and "kbar" in spec.fixed:
        spec.fixed["kbar"] = config.kbar
    if config.mc_max is not None and "mc_max" in spec.fixed:
        spec.fixed["mc_max"] = config.mc_max
    for key, grid_key in (("m_grid", "M"), ("n_grid", "N"), ("ptilde_grid", "Ptilde"), ("pprime_grid", "Pprime")):
        if config.get(key) is not None and grid_key in spec.grid:
            spec.grid[grid_key] = config.get(key)
    spec.source = config.get("source", figures.ENGINE)
    spec.output = config.output or env.get_output_path(name + ".csv")
    return spec


def cmd_figure(config: Config, options: argparse.Namespace) -> int:
    """Write the CSV table of a figure"""
    spec = _figure_spec(config, options.name)
    path = figures.make_figure(spec, jobs=config.get("jobs", 1))
    print(path)
    return EXIT_OK


def _engine_check(result: optimizer.OptimizationResult, statistics: PhotonStatistics) -> dict:
    params = ProtocolParams(Scheme.MODIFIED, result.M, result.N, 0, result.mc)
    return {
        "engine_p0": run(params, statistics).ptilde,
        "engine_p1": run(params.with_signal(1), statistics).ptilde,
    }


def _write_report(config: Config, name: str, report: dict) -> str:
    path = config.output or env.get_output_path(name + ".json")
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w") as f:
        json.dump(report, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def _bounds(config: Config, low: str, high: str, default: Tuple[int, int]) -> Tuple[int, int]:
    return (config.get(low, default[0]), config.get(high, default[1]))


def cmd_optimize(config: Config, options: argparse.Namespace) -> int:
    """Search for the smallest total cycle number"""
    mode = config.get("mode", optimizer.EXACT)
    target0 = config.get("target0", config.target)
    target1 = config.get("target1", config.target)
    if target0 is None or target1 is None:
        raise UsageError("Give --target, or both --target0 and --target1")

    if mode == optimizer.BASELINE:
        if target0 != target1:
            raise UsageError("The single-photon baseline takes one target, use --target")
        report = optimizer.baseline_min_T(target0).as_dict()
    else:
        mu = config.get("coherent", defaults.FIG1D_MEAN_PHOTONS)
        if mode == optimizer.APPROX:
            result = optimizer.minimize_T_approx(
                target0, target1, mu, config.get("mc_max", defaults.MC_MAX_APPROX), config.ratio
            )
        elif mode == optimizer.EXACT:
            result = optimizer.minimize_T_exact(
                target0,
                mu,
                mc_bounds=_bounds(config, "mc_min", "mc_max", defaults.MC_BOUNDS),
                M_bounds=_bounds(config, "m_min", "m_max", defaults.M_BOUNDS),
                N_bounds=_bounds(config, "n_min", "n_max", defaults.N_BOUNDS),
                target1=target1,
            )
        elif mode == optimizer.MATCHED:
            if target0 != target1 or config.kbar is None:
                raise UsageError("The matched-kbar search takes --kbar and one target, use --target")
            result = optimizer.minimize_T_matched_kbar(
                config.kbar,
                target0,
                mu,
                M_bounds=_bounds(config, "m_min", "m_max", defaults.M_BOUNDS),
                N_bounds=_bounds(config, "n_min", "n_max", defaults.N_BOUNDS),
            )
        else:
            raise UsageError("Unknown optimization mode %r" % (mode,))
        report = result.as_dict()
        report["mean_photons"] = mu
        if mode == optimizer.MATCHED:
            baseline = optimizer.baseline_min_T(target0)
            report["baseline_comparison_T"] = analytic.baseline_comparison(result.kbar, baseline.M, baseline.N)
        report.update(_engine_check(result, CoherentStatistics(mu)))
        if mode != optimizer.APPROX and (report["engine_p0"] < target0 or report["engine_p1"] < target1):
            print("cfcomm: infeasible: the optimum failed its engine re-check", file=sys.stderr)
            print("cfcomm: closest: %s" % json.dumps(report, sort_keys=True), file=sys.stderr)
            return EXIT_INFEASIBLE

    report["target0"] = target0
    report["target1"] = target1
    for key in ("mode", "mc", "M", "N", "T", "log10T", "achieved_p0", "achieved_p1", "engine_p0", "engine_p1"):
        if key in report:
            _line(key, report[key])
    _line("report", _write_report(config, "optimize-%s" % mode, report))
    return EXIT_OK


def cmd_oracle(config: Config, options: argparse.Namespace) -> int:
    """Check the engine against the Fock-space and Monte Carlo simulators"""
    params = _params(config)
    statistics = _statistics(config)
    outcome = run(params, statistics)
    expected = expected_probabilities(outcome)
    method = config.get("method", "both")
    failed = False

    if method in ("fock", "both"):
        cutoff = config.get("cutoff", defaults.FOCK_CUTOFF)
        dense = fock_simulate(params, statistics, cutoff)
        print("fock-space simulation, cutoff %d" % cutoff)
        for name, value in expected_probabilities(dense).items():
            difference = abs(value - expected[name])
            _line("  %s" % name, "%.12g (engine %.12g, diff %.3g)" % (value, expected[name], difference))
            failed = failed or difference > ORACLE_TOLERANCE + dense.truncation_error
        _line("  truncation error", dense.truncation_error)

    if method in ("montecarlo", "both"):
        shots = config.get("shots", defaults.MONTE_CARLO_BATCH)
        seed = config.get("seed", 0)
        tally = monte_carlo_clicks(params, statistics, shots, seed)
        print("monte carlo, %d shots, seed %d" % (shots, seed))
        deviations = tally.deviations(outcome)
        for name, frequency in tally.frequencies().items():
            _line("  %s" % name, "%.6g (engine %.6g, %.2f sigma)" % (frequency, expected[name], deviations[name]))
            failed = failed or deviations[name] > MONTE_CARLO_SIGMAS

    _line("result", "MISMATCH" if failed else "ok")
    return EXIT_INVALID if failed else EXIT_OK


def _add_source_arguments(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--fock", type=int, help="Fock input with this many photons")
    source.add_argument("--coherent", type=float, help="coherent input with this mean photon number")
    source.add_argument("--weights", type=defaults.float_list, help="photon-number weights, comma separated")


def _add_protocol_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scheme", choices=[s.value for s in Scheme], help="protocol variant (default slaz)")
    parser.add_argument("--M", dest="M", type=int, help="outer cycle number")
    parser.add_argument("--N", dest="N", type=int, help="inner cycle number")
    parser.add_argument("--mc", type=int, help="inner chains kept by the modified scheme")
    parser.add_argument("--s", dest="s", type=int, choices=[0, 1], help="Bob's signal")
    _add_source_arguments(parser)


def make_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="cfcomm", description="Counterfactual communication with multiphoton sources")
    parser.add_argument("--config", dest="config_file", help="flat key = value file with flag defaults")
    parser.add_argument("--log-file", dest="log_file", help="also log to <logs dir>/LOG_FILE.log")
    parser.add_argument("--log-level", dest="log_level", help="error, warning, info, debug, trace or a number")
    subparsers = parser.add_subparsers(dest="command", help="Options for %(prog)s")

    run_parser = subparsers.add_parser("run", help="Evaluate one configuration")
    _add_protocol_arguments(run_parser)
    run_parser.add_argument(
        "--stepwise", action="store_true", default=None, help="walk every optical element instead of closed forms"
    )
    run_parser.add_argument("--ratio", type=float, help="ratio read as 'much greater' in regime flags")
    run_parser.add_argument("--epsilon", type=float, help="photon tail mass dropped by the closed-form sums")
    run_parser.add_argument("--json", action="store_true", default=False, help="print the outcome as JSON")

    figure_parser = subparsers.add_parser("figure", help="Write the CSV table of a figure")
    figure_parser.add_argument("name", choices=list(figures.HEADERS), help="figure to compute")
    figure_parser.add_argument("--coherent", type=float, help="mean photon number")
    figure_parser.add_argument("--kbar", type=float, help="expected Zone 1 photons for figD1")
    figure_parser.add_argument("--mc-max", dest="mc_max", type=int, help="largest m_c of the exact search")
    figure_parser.add_argument("--m-grid", dest="m_grid", type=defaults.int_list, help="outer cycle numbers")
    figure_parser.add_argument("--n-grid", dest="n_grid", type=defaults.int_list, help="inner cycle numbers")
    figure_parser.add_argument("--ptilde-grid", dest="ptilde_grid", type=defaults.float_list, help="targets of fig1d")
    figure_parser.add_argument("--pprime-grid", dest="pprime_grid", type=defaults.float_list, help="targets of figD1")
    figure_parser.add_argument("--source", choices=[figures.ENGINE, figures.ANALYTIC], help="fig1b/fig1c values")
    figure_parser.add_argument("--jobs", type=int, help="worker processes")
    figure_parser.add_argument("--output", help="CSV path (default $CFCOMM_OUTPUT_DIR/<name>.csv)")

    optimize_parser = subparsers.add_parser("optimize", help="Search for the smallest total cycle number")
    mode = optimize_parser.add_mutually_exclusive_group()
    mode.add_argument("--exact", dest="mode", action="store_const", const=optimizer.EXACT, help="engine search")
    mode.add_argument("--approx", dest="mode", action="store_const", const=optimizer.APPROX, help="closed-form scan")
    mode.add_argument(
        "--baseline", dest="mode", action="store_const", const=optimizer.BASELINE, help="single-photon full scheme"
    )
    mode.add_argument(
        "--matched", dest="mode", action="store_const", const=optimizer.MATCHED, help="engine search at a given kbar"
    )
    optimize_parser.add_argument("--target", type=float, help="target for both signals")
    optimize_parser.add_argument("--target0", type=float, help="target Ptilde0")
    optimize_parser.add_argument("--target1", type=float, help="target Ptilde1")
    optimize_parser.add_argument("--coherent", type=float, help="mean photon number")
    optimize_parser.add_argument("--kbar", type=float, help="expected Zone 1 photons for --matched")
    for name in ("mc-min", "mc-max", "m-min", "m-max", "n-min", "n-max"):
        optimize_parser.add_argument("--" + name, dest=name.replace("-", "_"), type=int, help="search bound")
    optimize_parser.add_argument("--ratio", type=float, help="ratio read as 'much greater' in regime flags")
    optimize_parser.add_argument("--output", help="JSON path (default $CFCOMM_OUTPUT_DIR/optimize-<mode>.json)")

    oracle_parser = subparsers.add_parser("oracle", help="Check the engine against independent simulators")
    _add_protocol_arguments(oracle_parser)
    oracle_parser.add_argument("--method", choices=["fock", "montecarlo", "both"], help="which check (default both)")
    oracle_parser.add_argument("--cutoff", type=int, help="photon number cutoff of the Fock-space simulation")
    oracle_parser.add_argument("--shots", type=int, help="Monte Carlo shots")
    oracle_parser.add_argument("--seed", type=int, help="Monte Carlo seed")

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = make_parser()
    options = parser.parse_args(argv)
    logger.start(options.log_file, options.log_level)

    if not options.command:
        parser.print_help()
        return EXIT_INVALID

    try:
        config = Config.from_file(options.config_file)
        config.update(vars(options))
        return globals()["cmd_" + options.command](config, options)  # type: ignore[no-any-return]
    except optimizer.InfeasibleError as e:
        print("cfcomm: infeasible: %s" % e, file=sys.stderr)
        if e.best is not None:
            print("cfcomm: closest: %s" % json.dumps(e.best.as_dict(), sort_keys=True), file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValueError, OSError) as e:
        # ConfigError, UsageError and the parameter errors are all ValueErrors
        print("cfcomm: error: %s" % e, file=sys.stderr)
        return EXIT_INVALID
