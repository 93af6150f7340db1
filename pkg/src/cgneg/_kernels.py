"""Select the compiled core when available, else the numpy fallback.

Set ``CGNEG_PURE=1`` to force the fallback (used by the benchmark and the
parity tests).
"""
import os

from cgneg import _fallback

BACKEND = "numpy"
_impl = _fallback

if os.environ.get("CGNEG_PURE", "") not in ("1", "true", "yes"):
    try:
        from cgneg import _core as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        _impl = _fallback

laguerre_array = _impl.laguerre_array
well_wigner_grid = _impl.well_wigner_grid
conv_axis0 = _impl.conv_axis0
neg_line_integrals = _impl.neg_line_integrals
