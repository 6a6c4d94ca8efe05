"""Backend selection for the hot kernels.

The compiled Cython core is preferred when it was built; the NumPy fallback
is bit-identical, just slower. Set DEGRADE_FORGE_PURE_PYTHON=1 to force the
fallback (used by the benchmark and the backend-equality tests).
"""

import os

from . import _pykernels

if os.environ.get("DEGRADE_FORGE_PURE_PYTHON", "") == "1":
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pykernels

BACKEND_NAME: str = _impl.BACKEND_NAME
correlate2d = _impl.correlate2d
resample_rows = _impl.resample_rows
