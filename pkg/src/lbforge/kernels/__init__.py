"""Simulation kernels: the compiled extension when it is importable, numpy otherwise.

Set ``LBFORGE_BACKEND=python`` to force the numpy fallback.
"""
import os

from . import _pykernels as python_backend

try:
    from . import _ckernels as compiled_backend
except ImportError:  # extension not built
    compiled_backend = None

if compiled_backend is not None and os.environ.get("LBFORGE_BACKEND", "").lower() != "python":
    backend = compiled_backend
    BACKEND = "compiled"
else:
    backend = python_backend
    BACKEND = "python"

collide = backend.collide
stream = backend.stream


def get_backend(name=None):
    """Kernel module by name (``"compiled"`` or ``"python"``); default is the import-time choice."""
    if name is None:
        return backend
    if name == "python":
        return python_backend
    if name == "compiled":
        if compiled_backend is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .` with Cython available")
        return compiled_backend
    raise ValueError(f"unknown backend {name!r}")


def thread_count() -> int:
    env = os.environ.get("LBFORGE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"LBFORGE_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1
