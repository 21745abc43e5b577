"""Hot-kernel backend selection.

Prefers the compiled Cython module; falls back to the numpy implementations
when it is missing or when TDTK_DISABLE_NATIVE is set in the environment.
BACKEND names the selected implementation ("cython" or "numpy").

Contracts across backends: the random-stream functions (uint64_stream,
uniform_stream, normal_stream) and color_pixels are bitwise-identical;
accumulate_moments and detection_scores may differ by summation order at the
last-ulp level (the compiled path accumulates in strict pixel order, the
numpy path through BLAS blocking), which the callers' tolerances absorb.
"""

import os

from . import _fallback

if os.environ.get("TDTK_DISABLE_NATIVE"):
    _impl = _fallback
    BACKEND = "numpy"
else:
    try:
        from . import _native as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
        BACKEND = "numpy"

uint64_stream = _impl.uint64_stream
uniform_stream = _impl.uniform_stream
normal_stream = _impl.normal_stream
color_pixels = _impl.color_pixels
accumulate_moments = _impl.accumulate_moments
detection_scores = _impl.detection_scores


def available_backends():
    """Importable kernel backends, keyed by name (for tests/benchmarks)."""
    impls = {"numpy": _fallback}
    try:
        from . import _native
        impls["cython"] = _native
    except ImportError:
        pass
    return impls
