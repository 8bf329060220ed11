"""Batch kernels with a compiled core and a pure-numpy fallback.

The compiled extension is preferred when importable; set RISPROP_PURE_PYTHON=1
to force the fallback. BACKEND names the selected implementation.
"""

import os

from . import _fallback

if os.environ.get("RISPROP_PURE_PYTHON") == "1":
    _impl = _fallback
    BACKEND = "numpy"
else:
    try:
        from . import _core as _impl

        for _name in ("batch_amp_phase", "batch_heff", "batch_chain"):
            if not hasattr(_impl, _name):
                raise ImportError(f"compiled core lacks {_name}")
        BACKEND = "compiled"
    except ImportError:
        _impl = _fallback
        BACKEND = "numpy"

batch_amp_phase = _impl.batch_amp_phase
batch_heff = _impl.batch_heff
batch_chain = _impl.batch_chain

__all__ = ["BACKEND", "batch_amp_phase", "batch_heff", "batch_chain"]
