"""Kernel selection: compiled extension when available, pure fallback.

Set SCATLAB_PURE=1 in the environment to force the pure implementation
(used by the cross-implementation tests and the benchmark).
"""

import os

from . import pure

_FORCE_PURE = os.environ.get("SCATLAB_PURE", "") == "1"

if not _FORCE_PURE:
    try:
        from . import _ck as _impl

        IMPL_NAME = "compiled"
    except ImportError:
        _impl = pure
        IMPL_NAME = "pure"
else:
    _impl = pure
    IMPL_NAME = "pure"

flow_propagate = _impl.flow_propagate
radial_propagate = _impl.radial_propagate
flow_propagate_recorded = pure.flow_propagate  # recorder hook is pure-only
bump_value_grad = pure.bump_value_grad

ESCAPED = pure.ESCAPED
TIMED_OUT = pure.TIMED_OUT
STEP_UNDERFLOW = pure.STEP_UNDERFLOW
STEP_BUDGET = pure.STEP_BUDGET
