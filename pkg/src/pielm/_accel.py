"""Optional numba acceleration for the hot kernels.

Every accelerated function in this package exists in two flavours: a
numba ``@njit`` build and a pure-numpy fallback.  The active flavour is
chosen once at import time:

* if numba is importable and the environment variable ``PIELM_NUMBA`` is
  unset (or anything other than ``0``/``false``/``off``/``no``), kernels
  are JIT-compiled with ``cache=True``;
* otherwise the plain numpy implementations run.

``benchmarks/bench_kernels.py`` times both flavours side by side.
"""

import os


def _flag_enabled() -> bool:
    raw = os.environ.get("PIELM_NUMBA", "1").strip().lower()
    return raw not in ("0", "false", "off", "no")


NUMBA_ENABLED = False
if _flag_enabled():
    try:
        import numba  # noqa: F401

        NUMBA_ENABLED = True
    except ImportError:
        numba = None
else:
    numba = None


def maybe_njit(*args, **options):
    """``numba.njit`` when acceleration is on, identity decorator otherwise."""
    if NUMBA_ENABLED:
        options.setdefault("cache", True)
        return numba.njit(*args, **options)
    if args and callable(args[0]):
        return args[0]
    return lambda f: f
