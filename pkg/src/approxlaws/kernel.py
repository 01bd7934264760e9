"""Kernel backend selection.

Prefers the compiled extension ``approxlaws._poly_c`` and falls back to the
pure-Python twin.  ``APPROXLAWS_PURE=1`` forces the fallback (used by the
benchmark and by tests that exercise both backends).
"""

import os

if os.environ.get("APPROXLAWS_PURE"):
    from . import _poly_py as _impl
else:
    try:
        from . import _poly_c as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _poly_py as _impl

BACKEND = _impl.BACKEND

mono_mul = _impl.mono_mul
poly_iadd = _impl.poly_iadd
poly_add = _impl.poly_add
poly_scale = _impl.poly_scale
poly_mul_mono = _impl.poly_mul_mono
poly_mul = _impl.poly_mul
derive = _impl.derive
