# Copyright (C) 2025 cfcomm contributors
#
# This library is free software; you can redistribute it and/or
# modify it under the terms of the GNU Lesser General Public
# License as published by the Free Software Foundation; either
# version 2 of the License, or (at your option) any later version.
#
# This library is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU Lesser General Public License for more details.

"""Default numerical settings and the flat ``key = value`` config file.

The module level constants are the library defaults. :class:`Config`
holds the values a command line run actually uses; it starts from the
defaults, is updated from an optional config file and finally from the
command line flags.

A config file mirrors the long flags, one per line::

    # fig1d at a weaker source
    coherent = 100
    mc_max = 80
    ptilde_grid = 0.5, 0.6, 0.7
"""

import logging
import os
from configparser import ConfigParser, Error as ConfigParserError
from typing import Any, Callable, Dict, Iterable, List, Optional

# photon-weighted tail mass left out when truncating a photon distribution
TRUNCATION_EPSILON = 1e-12

# "a >> b" is read as a / b >= MUCH_GREATER_RATIO in validity flags
MUCH_GREATER_RATIO = 10.0

FOCK_CUTOFF = 25
FOCK_TRUNCATION_TOLERANCE = 1e-8

MC_MAX_APPROX = 200
MC_BOUNDS = (1, 50)
M_BOUNDS = (2, 5000)
N_BOUNDS = (1, 100000)
BASELINE_M_MAX = 100000

MONTE_CARLO_BATCH = 10000

FIG1BC_MEAN_PHOTONS = 10.0
FIG1BC_M_GRID = tuple(range(50, 501, 50))
FIG1BC_N_GRID = tuple(range(5000, 50001, 5000))
FIG1D_MEAN_PHOTONS = 200.0
FIG1D_MC_MAX = 100
FIGD1_KBAR = 2.0
PTILDE_GRID = tuple(round(0.5 + 0.05 * i, 2) for i in range(10))

_SECTION = "cfcomm"


class ConfigError(ValueError):
    """A config file or value cannot be used.

    Raised for unreadable files, unknown keys and values that do not
    parse as the expected type.
    """

    pass


def int_list(value: str) -> List[int]:
    return [int(v) for v in value.replace(",", " ").split()]


def float_list(value: str) -> List[float]:
    return [float(v) for v in value.replace(",", " ").split()]


def _bool(value: str) -> bool:
    return value.strip().lower() not in ("0", "", "false", "off", "no")


# key -> parser; keys are the dest names of the command line flags
_KEYS: Dict[str, Callable[[str], Any]] = {
    "scheme": str,
    "fock": int,
    "coherent": float,
    "weights": float_list,
    "M": int,
    "N": int,
    "mc": int,
    "s": int,
    "target": float,
    "target0": float,
    "target1": float,
    "mode": str,
    "mc_min": int,
    "mc_max": int,
    "m_min": int,
    "m_max": int,
    "n_min": int,
    "n_max": int,
    "epsilon": float,
    "ratio": float,
    "cutoff": int,
    "shots": int,
    "seed": int,
    "output": str,
    "jobs": int,
    "kbar": float,
    "m_grid": int_list,
    "n_grid": int_list,
    "ptilde_grid": float_list,
    "pprime_grid": float_list,
    "stepwise": _bool,
    "source": str,
    "method": str,
}


def parse_config_text(text: str, source: str = "<string>") -> Dict[str, Any]:
    """Parse flat ``key = value`` text into typed values."""
    cp = ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keep 'M' and 'N' distinct from 'm' and 'n'
    try:
        cp.read_string("[%s]\n%s" % (_SECTION, text), source=source)
    except ConfigParserError as e:
        raise ConfigError("Could not parse %s: %s" % (source, e))

    values = {}
    for key, raw in cp.items(_SECTION):
        if key not in _KEYS:
            raise ConfigError("Unknown key %r in %s" % (key, source))
        try:
            values[key] = _KEYS[key](raw)
        except ValueError:
            raise ConfigError("Invalid value %r for %r in %s" % (raw, key, source))
    return values


def load_config_file(path: str) -> Dict[str, Any]:
    try:
        with open(path, "r") as f:
            text = f.read()
    except IOError as e:
        raise ConfigError("Error reading config file %s: %s" % (path, e))
    logging.debug("Loaded config file %s", path)
    return parse_config_text(text, source=path)


class Config(object):
    """Resolved settings for one command line invocation.

    Attribute lookups fall back to ``None`` for keys that were neither
    in the file nor given as flags, so commands can apply their own
    defaults.
    """

    def __init__(self, values: Optional[Dict[str, Any]] = None):
        self._values: Dict[str, Any] = {}
        if values:
            self.update(values)

    @classmethod
    def from_file(cls, path: Optional[str]) -> "Config":
        if path is None:
            return cls()
        if not os.path.exists(path):
            raise ConfigError("Config file %s does not exist" % path)
        return cls(load_config_file(path))

    def update(self, values: Dict[str, Any], skip_none: bool = True) -> None:
        for key, value in values.items():
            if key not in _KEYS:
                continue
            if skip_none and value is None:
                continue
            self._values[key] = value

    def get(self, key: str, default: Any = None) -> Any:
        value = self._values.get(key)
        return default if value is None else value

    def __getattr__(self, key: str) -> Any:
        if key.startswith("_"):
            raise AttributeError(key)
        return self._values.get(key)

    def keys(self) -> Iterable[str]:
        return self._values.keys()
