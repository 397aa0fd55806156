"""Symplectic Gauss IRK integration with controlled round-off."""

import os as _os

_data = _os.path.join(_os.path.dirname(__file__), "data")
if "SYMIRK_DATA_DIR" not in _os.environ and _os.path.isdir(_data):
    _os.environ["SYMIRK_DATA_DIR"] = _data

from ._core import (
    ConfigError,
    SymirkError,
    estimate,
    format_tableau,
    integrate,
    kahan_accumulate,
    machine_tableau,
    manifest_roundtrip,
    moments,
    reference,
    round_reduced,
)

__all__ = [
    "ConfigError",
    "SymirkError",
    "estimate",
    "format_tableau",
    "integrate",
    "kahan_accumulate",
    "machine_tableau",
    "manifest_roundtrip",
    "moments",
    "reference",
    "round_reduced",
]
