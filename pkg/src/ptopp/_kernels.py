"""Select the kernel backend.

The compiled extension is used when it imports; ``PTOPP_PURE_PYTHON=1``
forces the pure-Python fallback.
"""

import os

if os.environ.get("PTOPP_PURE_PYTHON", "") not in ("", "0"):
    from . import _pykernels as impl
else:
    try:
        from . import _ckernels as impl
    except ImportError:  # pragma: no cover - depends on the build
        from . import _pykernels as impl

BACKEND = impl.BACKEND
KIND_PASSAGE = impl.KIND_PASSAGE
KIND_ARC = impl.KIND_ARC
PolySet = impl.PolySet
PassageSet = impl.PassageSet
CellWalker = impl.CellWalker
seg_intersect = impl.seg_intersect
seg_param = impl.seg_param
gate_hit = impl.gate_hit
geodesic_reach = impl.geodesic_reach
