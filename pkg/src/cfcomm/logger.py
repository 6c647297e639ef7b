# Copyright (C) 2007 Red Hat, Inc.
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

"""Logging service setup.

STABLE.
"""

import errno
import logging
import os
import reprlib
import sys
from typing import Any, Callable, Iterable, Optional, TextIO, Union

import decorator
import numpy as np

from cfcomm import env

# traces engine calls, use CFCOMM_LOGGER_LEVEL=trace to enable
TRACE = 5
_LEVELS = {
    "error": logging.ERROR,
    "warning": logging.WARNING,
    "debug": logging.DEBUG,
    "info": logging.INFO,
    "trace": TRACE,
    "all": 0,
}
logging.addLevelName(TRACE, "TRACE")

_FORMAT = "%(created)f %(levelname)s %(name)s: %(message)s"


def set_level(level: Union[str, int]) -> None:
    if level in _LEVELS:
        logging.getLogger("").setLevel(_LEVELS[level])  # type: ignore[index]
        return

    try:
        logging.getLogger("").setLevel(int(level))
    except ValueError:
        logging.warning("Invalid log level: %r" % level)


class SafeLogWrapper(object):
    """Small file-like wrapper to gracefully handle ENOSPC errors when
    logging."""

    def __init__(self, stream: TextIO):
        self._stream = stream

    def write(self, s: str) -> None:
        try:
            self._stream.write(s)
        except IOError as e:
            # gracefully deal w/ disk full
            if e.errno != errno.ENOSPC:
                raise e

    def flush(self) -> None:
        try:
            self._stream.flush()
        except IOError as e:
            if e.errno != errno.ENOSPC:
                raise e


def start(log_filename: Optional[str] = None, level: Optional[str] = None) -> None:
    """Configure the root logger for a command line run.

    Messages go to stderr; with ``log_filename`` they are also written
    to ``<logs dir>/<log_filename>.log``. ``CFCOMM_LOGGER_LEVEL`` wins
    over ``level``.
    """
    # remove existing handlers, or logging.basicConfig() won't have no effect.
    root_logger = logging.getLogger("")
    for handler in list(root_logger.handlers):
        root_logger.removeHandler(handler)

    logging.basicConfig(
        level=logging.WARNING,
        format=_FORMAT,
        stream=SafeLogWrapper(sys.stderr),  # type: ignore[arg-type]
    )

    if level is not None:
        set_level(level)
    if "CFCOMM_LOGGER_LEVEL" in os.environ:
        set_level(os.environ["CFCOMM_LOGGER_LEVEL"])

    if log_filename:
        logs_path = env.get_logs_path()
        try:
            os.makedirs(logs_path, exist_ok=True)
            log_path = os.path.join(logs_path, log_filename + ".log")
            handler = logging.FileHandler(log_path)
            handler.setFormatter(logging.Formatter(_FORMAT))
            root_logger.addHandler(handler)
        except OSError as e:
            # if we're out of space, just continue
            if e.errno != errno.ENOSPC:
                raise e


class TraceRepr(reprlib.Repr):

    # numpy scalars and arrays show up in engine arguments
    _TYPES: Iterable[type] = [int, bool, tuple, list, set, frozenset, dict, str]

    def repr1(self, x: Any, level: int) -> str:
        if isinstance(x, np.ndarray):
            return "array(shape=%r)" % (x.shape,)
        if isinstance(x, np.generic):
            return repr(x.item())
        for t in self._TYPES:
            if isinstance(x, t):
                return getattr(self, "repr_" + t.__name__)(x, level)

        return reprlib.Repr.repr1(self, x, level)

    def repr_int(self, x: int, level: int) -> str:
        return repr(x)

    def repr_bool(self, x: bool, level: int) -> str:
        return repr(x)


def trace(
    logger: Optional[logging.Logger] = None,
    logger_name: Optional[str] = None,
    skip_args: Optional[Iterable[int]] = None,
    skip_kwargs: Optional[Iterable[str]] = None,
    maxsize_list: int = 30,
    maxsize_dict: int = 30,
    maxsize_string: int = 300,
) -> Callable[..., Any]:
    """Log calls and return values of the decorated function at TRACE."""

    skip_args = set(skip_args or [])
    skip_kwargs = set(skip_kwargs or [])

    # size-limit repr()
    trace_repr = TraceRepr()
    trace_repr.maxlist = maxsize_list
    trace_repr.maxdict = maxsize_dict
    trace_repr.maxstring = maxsize_string
    trace_repr.maxother = maxsize_string
    trace_logger = logger or logging.getLogger(logger_name)

    def _trace(f: Callable[..., Any], *args: Any, **kwargs: Any) -> Any:
        # don't do expensive formatting if loglevel TRACE is not enabled
        if not trace_logger.isEnabledFor(TRACE):
            return f(*args, **kwargs)

        params_formatted = ", ".join(
            [trace_repr.repr(a) for (idx, a) in enumerate(args) if idx not in skip_args]
            + [
                "%s=%s" % (k, trace_repr.repr(v))
                for (k, v) in list(kwargs.items())
                if k not in skip_kwargs
            ]
        )

        trace_logger.log(TRACE, "%s(%s) invoked", f.__name__, params_formatted)

        try:
            res = f(*args, **kwargs)
        except BaseException:
            trace_logger.exception("Exception occurred in %s" % f.__name__)
            raise

        trace_logger.log(
            TRACE,
            "%s(%s) returned %s",
            f.__name__,
            params_formatted,
            trace_repr.repr(res),
        )

        return res

    return decorator.decorator(_trace)  # type: ignore[no-any-return]
