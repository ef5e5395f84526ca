"""Kernel selection: compiled extension when available, NumPy fallback otherwise."""

try:
    from . import _sc_core as _impl

    BACKEND = "compiled"
except ImportError:  # extension not built on this interpreter
    from . import _sc_pure as _impl

    BACKEND = "pure"

sample_states = _impl.sample_states
sc_trellis = _impl.sc_trellis
