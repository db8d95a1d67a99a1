"""Kernel backend selection: compiled extension if built, numpy otherwise.

Set KEYACTOR_PURE=1 in the environment to force the pure-numpy path (useful
for benchmarking the two implementations against each other).
"""

import os

if os.environ.get("KEYACTOR_PURE") == "1":
    from ._fallback import mutual_reachability_mst

    BACKEND = "python"
else:
    try:
        from ._mst import mutual_reachability_mst

        BACKEND = "compiled"
    except ImportError:
        from ._fallback import mutual_reachability_mst

        BACKEND = "python"

__all__ = ["BACKEND", "mutual_reachability_mst"]
