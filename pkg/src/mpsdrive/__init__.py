"""Generators of motion on uniform matrix product states and Floquet driving along MPS loops."""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import MPSDriveError  # noqa: E402
from .mps import UniformMPS, normalize  # noqa: E402

__all__ = ["MPSDriveError", "UniformMPS", "normalize", "__version__"]
