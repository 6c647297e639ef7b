# Copyright (C) 2006-2007 Red Hat, Inc.
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

"""Calculates file-paths for the cfcomm working environment.

STABLE.
"""

import logging
import os
from typing import Optional


def get_home_path(path: Optional[str] = None) -> str:
    base = os.environ.get("CFCOMM_HOME", os.path.expanduser("~/.cfcomm"))
    if not os.path.isdir(base):
        try:
            os.makedirs(base, 0o770)
        except OSError:
            logging.debug("Could not create home directory %s", base)

    if path is not None:
        return os.path.join(base, path)
    return base


def get_logs_path(path: Optional[str] = None) -> str:
    base = os.environ.get("CFCOMM_LOGS_DIR", get_home_path("logs"))
    if path is not None:
        return os.path.join(base, path)
    return base


def get_output_path(path: Optional[str] = None) -> str:
    """Directory figure CSVs and optimizer reports are written to.

    Defaults to ``./results``; ``CFCOMM_OUTPUT_DIR`` overrides it.
    """
    base = os.environ.get("CFCOMM_OUTPUT_DIR", os.path.join(os.getcwd(), "results"))
    if path is not None:
        return os.path.join(base, path)
    return base
