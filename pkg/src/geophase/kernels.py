"""Backend selection for the sequential matrix reductions.

The compiled extension is used when it was built; setting the environment
variable ``GEOPHASE_PURE_PYTHON=1`` forces the fallback.
"""
import os

if os.environ.get("GEOPHASE_PURE_PYTHON"):
    from ._pykernels import ordered_partials, ordered_product, propagate

    BACKEND = "python"
else:
    try:
        from ._ckernels import ordered_partials, ordered_product, propagate

        BACKEND = "cython"
    except ImportError:
        from ._pykernels import ordered_partials, ordered_product, propagate

        BACKEND = "python"

__all__ = ["BACKEND", "ordered_partials", "ordered_product", "propagate"]
