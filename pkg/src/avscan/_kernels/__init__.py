"""Kernel backend selection.

The hot inner loops (tree-edit-distance forest DP, LCS table fill) run
through numba when available. Set ``AVSCAN_KERNELS=numpy`` to force the
pure-numpy fallback, ``AVSCAN_KERNELS=numba`` to require the JIT (import
error surfaces instead of being swallowed). Both backends produce
identical tables/distances; benchmarks/bench_kernels.py compares them.
"""

import os

_requested = os.environ.get("AVSCAN_KERNELS", "auto").lower()

if _requested == "numpy":
    from . import numpy_backend as _impl
    BACKEND = "numpy"
elif _requested == "numba":
    from . import numba_backend as _impl
    BACKEND = "numba"
else:
    try:
        from . import numba_backend as _impl
        BACKEND = "numba"
    except ImportError:
        from . import numpy_backend as _impl
        BACKEND = "numpy"

ted_kernel = _impl.ted_kernel
lcs_table_kernel = _impl.lcs_table_kernel
warmup = _impl.warmup


def backend_name():
    return BACKEND
