"""Kernel selection: the compiled extension when importable, else pure Python.

Set ``UAROOTS_PURE=1`` to force the fallback.
"""
import logging
import os

from . import _pykernels

log = logging.getLogger(__name__)

if os.environ.get("UAROOTS_PURE"):
    kernels = _pykernels
else:
    try:
        from . import _ckernels as kernels
    except ImportError:  # extension not built
        log.debug("compiled kernels unavailable, using pure-Python fallback")
        kernels = _pykernels

BACKEND = kernels.NAME
