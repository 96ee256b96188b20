"""Sliding-graph component counting, with a compiled fast path.

For hom data between a pair (x, xp) and an indexed family with component
sizes (ys, yps), the sliding graph has one vertex per triple

    (residual row m, forward table x -> sum_j m_j * ys_j,
     backward table sum_j yps_j * m_j -> xp)

with residual rows ranging over grids in {0..entry_bound}^len(ys), and one
edge per generator (m, n, row morphism r, forward over m, backward over n)
relating the two representatives that r connects.  Both implementations
return the pair (vertex count, connected component count).

The compiled extension is selected at import when available; set
FIBOPTIC_PURE_PYTHON=1 to force the pure-Python twin.
"""

from __future__ import annotations

import itertools
import os
from typing import Sequence

from ..fincat import EnumerationCeilingError

if os.environ.get("FIBOPTIC_PURE_PYTHON"):
    from . import _slide_py as _impl
else:
    try:
        from . import _slide_c as _impl  # type: ignore[no-redef]
    except ImportError:
        from . import _slide_py as _impl  # type: ignore[no-redef]

IMPLEMENTATION: str = _impl.IMPLEMENTATION


def estimate_work(
    x: int, xp: int, ys: Sequence[int], yps: Sequence[int], entry_bound: int
) -> tuple[int, int]:
    """Vertex count and an edge-operation bound for the sliding graph."""
    J = len(ys)
    rows = list(itertools.product(range(entry_bound + 1), repeat=J))
    stats = []
    vertices = 0
    for m in rows:
        F = sum(m[j] * ys[j] for j in range(J))
        Bd = sum(yps[j] * m[j] for j in range(J))
        nf, nb = F**x, xp**Bd
        stats.append((m, F, Bd, nf, nb))
        vertices += nf * nb
    ops = 0
    for m, Fm, Bdm, nfm, nbm in stats:
        if nfm == 0 or nbm == 0:
            continue
        for n, Fn, Bdn, nfn, nbn in stats:
            if nbn == 0:
                continue
            mediators = 1
            for j in range(J):
                if m[j] > 0 and n[j] == 0:
                    mediators = 0
                    break
                mediators *= n[j] ** m[j]
            if mediators == 0:
                continue
            per = Fm + Bdm + nfm * max(x, 1) + nbn * max(Bdm, 1) + nfm * nbn
            ops += mediators * per
    return vertices, ops


def sliding_component_count(
    x: int,
    xp: int,
    ys: Sequence[int],
    yps: Sequence[int],
    entry_bound: int,
    max_vertices: int = 2_000_000,
    max_ops: int = 10**9,
) -> tuple[int, int]:
    """Count sliding-graph vertices and connected components.

    Raises EnumerationCeilingError when the graph would exceed the stated
    vertex or edge-operation ceilings.
    """
    if len(ys) != len(yps):
        raise ValueError("ys and yps must have equal length")
    if x < 0 or xp < 0 or entry_bound < 0 or any(v < 0 for v in ys) or any(
        v < 0 for v in yps
    ):
        raise ValueError("sizes and bounds must be nonnegative")
    vertices, ops = estimate_work(x, xp, ys, yps, entry_bound)
    if vertices > max_vertices:
        raise EnumerationCeilingError(
            f"sliding graph has {vertices} vertices, above ceiling {max_vertices}"
        )
    if ops > max_ops:
        raise EnumerationCeilingError(
            f"sliding graph needs ~{ops} edge operations, above ceiling {max_ops}"
        )
    return _impl.sliding_component_count(
        int(x), int(xp), [int(v) for v in ys], [int(v) for v in yps], int(entry_bound)
    )


def sliding_component_count_with(
    impl_name: str,
    x: int,
    xp: int,
    ys: Sequence[int],
    yps: Sequence[int],
    entry_bound: int,
) -> tuple[int, int]:
    """Run a specific implementation by name; used by tests and benchmarks."""
    if impl_name == "python":
        from . import _slide_py as chosen
    elif impl_name == "cython":
        from . import _slide_c as chosen  # type: ignore[no-redef]
    else:
        raise ValueError(f"unknown kernel implementation {impl_name!r}")
    return chosen.sliding_component_count(
        int(x), int(xp), [int(v) for v in ys], [int(v) for v in yps], int(entry_bound)
    )
