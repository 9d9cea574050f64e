"""Kernel selection: compiled core when importable, pure Python otherwise.

Set ``ELECTSIM_BACKEND=python`` to force the fallback, or ``cython`` to make a
missing extension an import error.
"""
import logging
import os

from . import _crp_py

log = logging.getLogger(__name__)

_requested = os.environ.get("ELECTSIM_BACKEND", "auto").lower()
if _requested not in ("auto", "python", "cython"):
    raise ImportError(f"ELECTSIM_BACKEND must be auto, python or cython, got {_requested!r}")

crp_assign_python = _crp_py.crp_assign

try:
    from ._crp import crp_assign as crp_assign_compiled
except ImportError:
    crp_assign_compiled = None
    if _requested == "cython":
        raise

if _requested == "python" or crp_assign_compiled is None:
    BACKEND = "python"
    crp_assign = crp_assign_python
    if _requested == "auto":
        log.debug("compiled CRP kernel not built; using pure-Python fallback")
else:
    BACKEND = "cython"
    crp_assign = crp_assign_compiled
