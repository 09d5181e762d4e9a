"""Hot-kernel backend selection.

Prefers the compiled Cython extension; falls back to pure numpy when the
extension is missing or PEERAUDIT_NO_EXT is set. Both backends export the
same functions with matching semantics.
"""

import os

from . import _fallback

if os.environ.get("PEERAUDIT_NO_EXT"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _speedups as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

pb_upper_tail = _impl.pb_upper_tail
dyad_pvalues = _impl.dyad_pvalues
exact_partition_dp = _impl.exact_partition_dp

__all__ = ["BACKEND", "pb_upper_tail", "dyad_pvalues", "exact_partition_dp"]
