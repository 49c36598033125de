"""Kernel backend selection: compiled extension when built, pure NumPy otherwise.

Set ``TRAJSEG_PURE=1`` to force the pure backend (used by the parity
tests and the benchmark).
"""

import os

from . import _pure

_FORCE_PURE = os.environ.get("TRAJSEG_PURE", "").strip().lower() in ("1", "true", "yes")

if not _FORCE_PURE:
    try:
        from . import _ext as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _pure
        BACKEND = "pure"
else:
    _impl = _pure
    BACKEND = "pure"

local_extremes = _impl.local_extremes
select_influential = _impl.select_influential
risk_levels = _impl.risk_levels

# candidate scan is already one vectorized pass; no compiled variant
cut_in_candidates = _pure.cut_in_candidates
drop_qualifiers = _pure.drop_qualifiers
rise_qualifiers = _pure.rise_qualifiers

RISK_NO_PV = _pure.RISK_NO_PV
RISK_FADING = _pure.RISK_FADING
RISK_CLOSING = _pure.RISK_CLOSING
RISK_URGENT = _pure.RISK_URGENT
RISK_FORCED = _pure.RISK_FORCED
RISK_CRITICAL = _pure.RISK_CRITICAL
