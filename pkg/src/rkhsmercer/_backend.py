"""Select the Gram assembly core at import time.

The compiled extension is preferred. Set ``RKHSMERCER_BACKEND=python`` to
force the numpy fallback, or ``=cython`` to fail loudly if it is missing.
"""
import os

_requested = os.environ.get("RKHSMERCER_BACKEND", "").strip().lower()

if _requested == "python":
    from . import _core_py as core
    BACKEND = "python"
else:
    try:
        from . import _core as core
        BACKEND = "cython"
    except ImportError:
        if _requested == "cython":
            raise
        from . import _core_py as core
        BACKEND = "python"

gram_closed_form = core.gram_closed_form
diag_closed_form = core.diag_closed_form

__all__ = ["BACKEND", "gram_closed_form", "diag_closed_form"]
