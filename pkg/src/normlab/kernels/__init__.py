"""Kernel backend selection.

The compiled Cython extension is preferred when it imported cleanly; the
pure-Python numpy implementation is the fallback. Set ``NORMLAB_BACKEND``
to ``compiled`` or ``python`` to force one (forcing ``compiled`` raises if
the extension is missing). Both backends implement the same function set
with matching semantics; results agree to floating-point roundoff but are
not guaranteed bit-identical because summation orders differ.
"""

import os

from . import _python

_FUNCTIONS = [
    "fwd_wn", "fwd_cwn", "fwd_ws",
    "bwd_wn_exact", "bwd_wn_diag", "bwd_cwn_exact", "bwd_ws_exact", "bwd_ws_diag",
    "l2_grad", "mag_shift_grad", "meanstd_shift_grad",
    "sgd_step", "momentum_step", "adam_step",
]

__all__ = _FUNCTIONS + ["BACKEND_NAME", "available_backends", "get_backend"]


def _load_compiled():
    try:
        from . import _compiled
    except ImportError:
        return None
    return _compiled


def available_backends():
    names = ["python"]
    if _load_compiled() is not None:
        names.insert(0, "compiled")
    return names


def get_backend(name):
    """Return the backend module for an explicit name."""
    if name == "python":
        return _python
    if name == "compiled":
        mod = _load_compiled()
        if mod is None:
            raise ImportError("compiled kernel extension is not built")
        return mod
    raise ValueError(f"unknown backend '{name}'")


_choice = os.environ.get("NORMLAB_BACKEND", "auto")
if _choice == "auto":
    _impl = _load_compiled() or _python
else:
    _impl = get_backend(_choice)

BACKEND_NAME = _impl.BACKEND_NAME

for _name in _FUNCTIONS:
    globals()[_name] = getattr(_impl, _name)
del _name
