"""Hot-loop kernels with backend selection.

The compiled extension is used when it imports; otherwise (or when the
environment variable ``STOCHDIST_PURE_PYTHON`` is set to a non-empty value
other than ``0``) the pure-Python module is used. Both backends return
identical results. Inputs are normalized here so the backends only ever see
contiguous ``int64`` endpoints and ``uint8`` masks.
"""

from __future__ import annotations

import os

import numpy as np

from . import _pykernels

try:
    if os.environ.get("STOCHDIST_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure Python backend forced")
    from . import _ckernels
except ImportError:
    _ckernels = None

# Bitmask kernels in the compiled backend use 64-bit words.
_BITMASK_LIMIT = 64

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["cython"] = _ckernels

_active = _ckernels if _ckernels is not None else _pykernels


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def backend() -> str:
    """Name of the backend currently in use."""
    return _active.BACKEND


def set_backend(name: str) -> str:
    """Switch backend; returns the previous backend name."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} not available (have {available_backends()})")
    prev = _active.BACKEND
    _active = _BACKENDS[name]
    return prev


def _i64(a):
    return np.ascontiguousarray(a, dtype=np.int64)


def _u8(a):
    return np.ascontiguousarray(a, dtype=np.uint8)


def _u8_2d(a):
    a = np.ascontiguousarray(a, dtype=np.uint8)
    return a.reshape(1, -1) if a.ndim == 1 else a


def _impl(n, bitmask=False):
    if bitmask and n > _BITMASK_LIMIT:
        return _pykernels
    return _active


def matching_mates(n, eu, ev, mask):
    """Per-vertex matched edge id (-1 if unmatched) in a maximum matching."""
    return _impl(n).matching_mates(int(n), _i64(eu), _i64(ev), _u8(mask))


def matching_batch(n, eu, ev, masks):
    """Maximum-matching indicator over edge ids for each mask row."""
    return _impl(n).matching_batch(int(n), _i64(eu), _i64(ev), _u8_2d(masks))


def frac_vc2(n, eu, ev, mask):
    """Twice an optimal half-integral fractional vertex cover, per vertex."""
    return _impl(n).frac_vc2(int(n), _i64(eu), _i64(ev), _u8(mask))


def frac_vc2_batch(n, eu, ev, masks):
    return _impl(n).frac_vc2_batch(int(n), _i64(eu), _i64(ev), _u8_2d(masks))


def mvc_exact(n, eu, ev, mask):
    """Membership vector of a minimum vertex cover."""
    return _impl(n, True).mvc_exact(int(n), _i64(eu), _i64(ev), _u8(mask))


def mvc_size_batch(n, eu, ev, masks):
    return _impl(n, True).mvc_size_batch(int(n), _i64(eu), _i64(ev), _u8_2d(masks))


def mds_exact(n, eu, ev, mask):
    """Membership vector of a minimum dominating set."""
    return _impl(n, True).mds_exact(int(n), _i64(eu), _i64(ev), _u8(mask))


def mds_size_batch(n, eu, ev, masks):
    return _impl(n, True).mds_size_batch(int(n), _i64(eu), _i64(ev), _u8_2d(masks))


def dwf_events(n, eu, ev, qmask, thresholds):
    """Event-driven uniform-increment water-filling; see ``_pykernels.dwf_events``."""
    thr = np.maximum(_i64(thresholds), 0)
    return _impl(n).dwf_events(int(n), _i64(eu), _i64(ev), _u8(qmask), thr)
