"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the pure-Python
fallback. ``ROSTEXPLORE_BACKEND=python`` forces the fallback.
"""

import os

from . import _fallback

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = {"python": _fallback}
if _compiled is not None:
    BACKENDS["compiled"] = _compiled

BACKEND = ""
gibbs_obs = None
polya_cells = None


def use(name: str) -> None:
    """Switch the active backend ('compiled' or 'python')."""
    global BACKEND, gibbs_obs, polya_cells
    if name not in BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}")
    mod = BACKENDS[name]
    BACKEND = name
    gibbs_obs = mod.gibbs_obs
    polya_cells = mod.polya_cells


use(os.environ.get("ROSTEXPLORE_BACKEND") or ("compiled" if _compiled is not None else "python"))
