"""Kernel backend selection.

Two interchangeable kernel modules exist: a numba-compiled one and a
pure-numpy one.  ``get_kernels`` picks one by explicit name, by the
``CAVQED_BACKEND`` environment variable, or by availability (numba
preferred when importable).  The choice is a performance knob only;
both backends implement the same integrator arithmetic.
"""

import os

from . import _kernels_numpy
from .errors import ConfigurationError

try:
    from . import _kernels_numba
    _HAVE_NUMBA = True
except ImportError:
    _kernels_numba = None
    _HAVE_NUMBA = False

ENV_VAR = "CAVQED_BACKEND"


def available_backends():
    """Names of importable kernel backends."""
    names = ["numpy"]
    if _HAVE_NUMBA:
        names.insert(0, "numba")
    return names


def get_kernels(name=None):
    """Return the kernel module for ``name``.

    ``name=None`` consults the CAVQED_BACKEND environment variable and
    falls back to numba when importable, numpy otherwise.
    """
    if name is None:
        name = os.environ.get(ENV_VAR, "").strip().lower() or None
    if name is None:
        return _kernels_numba if _HAVE_NUMBA else _kernels_numpy
    name = name.lower()
    if name == "numpy":
        return _kernels_numpy
    if name == "numba":
        if not _HAVE_NUMBA:
            raise ConfigurationError(
                "numba backend requested but numba is not importable")
        return _kernels_numba
    raise ConfigurationError(
        "unknown backend %r (expected 'numba' or 'numpy')" % (name,))
