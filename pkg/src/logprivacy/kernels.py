"""Backend selection for the hot loops.

The compiled ``_kernels`` extension is used when it was built; otherwise,
or when ``LOGPRIVACY_PURE_PYTHON`` is set to a non-empty value, the
pure-Python ``_pykernels`` module is used. Both expose the same functions
and give identical results.
"""
import os

from logprivacy import _pykernels

if os.environ.get("LOGPRIVACY_PURE_PYTHON"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from logprivacy import _kernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

levenshtein = _impl.levenshtein
levenshtein_many = _impl.levenshtein_many
sgns_epoch = _impl.sgns_epoch


def available_backends():
    """Map backend name to kernel module for every backend importable here."""
    found = {"python": _pykernels}
    try:
        from logprivacy import _kernels

        found["cython"] = _kernels
    except ImportError:
        pass
    return found
