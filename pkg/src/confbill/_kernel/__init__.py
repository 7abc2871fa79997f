"""Stepper backend selection.

The compiled Cython kernel is used when importable; setting
``CONFBILL_PURE=1`` in the environment forces the pure-Python twin.  Both
implement the same Dormand-Prince 5(4) scheme with identical constants and
operation order.
"""

from __future__ import annotations

import os

from .tableau import (  # noqa: F401  (re-exported)
    STATUS_COLLISION, STATUS_DONE, STATUS_STEP_LIMIT, STATUS_UNDERFLOW,
)
from . import pure as _pure

BACKEND = "pure"
integrate = _pure.integrate

if os.environ.get("CONFBILL_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _native

        integrate = _native.integrate
        BACKEND = "native"
    except ImportError:
        pass


def backends() -> dict:
    """Mapping of available backend names to their integrate functions."""
    found = {"pure": _pure.integrate}
    try:
        from . import _native

        found["native"] = _native.integrate
    except ImportError:
        pass
    return found
