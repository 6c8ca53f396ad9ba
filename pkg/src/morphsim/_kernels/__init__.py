"""Kernel backend selection.

The compiled extension (_core) is preferred when importable; the numpy
fallback (py_backend) is used otherwise. Set MORPHSIM_PURE_PYTHON=1 to force
the fallback, e.g. for the backend benchmark or debugging.
"""

import os

_force_py = os.environ.get("MORPHSIM_PURE_PYTHON", "").strip() not in ("", "0")

if _force_py:
    from morphsim._kernels import py_backend as impl
else:
    try:
        from morphsim._kernels import _core as impl  # type: ignore[no-redef]
    except ImportError:
        from morphsim._kernels import py_backend as impl  # type: ignore[no-redef]

BACKEND_NAME = impl.BACKEND_NAME

rk4_step = impl.rk4_step
integrate_free = impl.integrate_free
rollout_states = impl.rollout_states
rollout_cost_grad = impl.rollout_cost_grad


def available_backends():
    """Names of importable backends, compiled first when present."""
    names = []
    try:
        from morphsim._kernels import _core  # noqa: F401
        names.append("compiled")
    except ImportError:
        pass
    names.append("python")
    return names
