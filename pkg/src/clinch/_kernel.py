"""Select the tableau backend at import time.

The compiled GMP kernel is used when it was built; set
``CLINCH_PURE_PYTHON=1`` to force the pure-Python fallback.
"""

import os

from . import _simplex_py

try:
    from . import _simplex_ext as _ext
except ImportError:
    _ext = None

BACKENDS = {"python": _simplex_py.Tableau}
if _ext is not None:
    BACKENDS["gmp"] = _ext.Tableau

if _ext is None or os.environ.get("CLINCH_PURE_PYTHON", "") not in ("", "0"):
    BACKEND = "python"
else:
    BACKEND = "gmp"
Tableau = BACKENDS[BACKEND]
