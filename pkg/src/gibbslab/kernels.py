"""Backend selection for the hot kernels.

The compiled extension ``gibbslab._ckernels`` is used when importable;
otherwise the pure-Python twins in ``gibbslab._pykernels`` are used.  Setting
``GIBBSLAB_PURE_PYTHON=1`` forces the fallback.
"""
import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("GIBBSLAB_PURE_PYTHON", "") != "1":
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on build
        _impl = _pykernels

fisher_yates = _impl.fisher_yates
glauber_sweep = _impl.glauber_sweep
ball_sizes = _impl.ball_sizes
count_good_colorings = _impl.count_good_colorings


def get_backend(name):
    """Return the kernel module for ``"python"`` or ``"cython"``."""
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown backend {name!r}")


def available_backends():
    names = ["python"]
    try:
        from . import _ckernels  # noqa: F401

        names.append("cython")
    except ImportError:  # pragma: no cover
        pass
    return names
