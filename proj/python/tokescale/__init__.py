"""Compression-aware scaling-law analysis toolkit.

Thin wrapper over the compiled extension: run-record ingestion, IsoFLOP
fitting, Scaling Laws I/II, architecture recipes with FLOPs accounting,
cross-lingual parity, and the synthetic-grid oracle.
"""

try:
    from tokescale._core import *  # noqa: F401,F403
    from tokescale import _core as core
except ImportError:  # development layout: extension on sys.path directly
    from _core import *  # noqa: F401,F403
    import _core as core

__version__ = "0.1.0"
__all__ = [name for name in dir(core) if not name.startswith("_")]
