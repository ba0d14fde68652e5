"""Hot-kernel backend selection.

The right-hand-side evaluation and the adaptive integration between
renormalization points dominate runtime. A compiled Cython extension
(``idqa._kernel``) provides them when available; ``idqa._kernel_py`` is a
numpy implementation of the same interface used as a fallback and as the
comparison baseline for the benchmark. Set IDQA_PURE_PYTHON=1 to force the
fallback.
"""

from __future__ import annotations

import os

if os.environ.get("IDQA_PURE_PYTHON"):
    from . import _kernel_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernel as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _kernel_py as _impl

        BACKEND = "python"

build_plan = _impl.build_plan
rhs = _impl.rhs
advance_chunk = _impl.advance_chunk


def available_backends() -> dict:
    """Importable kernel modules keyed by backend name."""
    from . import _kernel_py

    found = {"python": _kernel_py}
    try:
        from . import _kernel  # type: ignore[attr-defined]

        found["compiled"] = _kernel
    except ImportError:
        pass
    return found
