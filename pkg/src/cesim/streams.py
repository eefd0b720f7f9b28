"""Counter-based deterministic random streams.

Every consumer derives a child generator from the root seed and a lineage
(a label plus integer coordinates such as agent id, round, local step and
draw index). The child seed is a cryptographic hash of the lineage, so the
draws a consumer sees never depend on execution order or on how work is
scheduled across threads.
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np

_MASK64 = (1 << 64) - 1


class RandomStream:
    """Root of a family of reproducible, independent random generators."""

    __slots__ = ("root_seed",)

    def __init__(self, root_seed: int):
        self.root_seed = int(root_seed) & _MASK64

    def child(self, label: str, *lineage: int) -> np.random.Generator:
        """Return the generator for a lineage; same lineage, same draws."""
        h = hashlib.sha256()
        h.update(struct.pack(">Q", self.root_seed))
        h.update(label.encode("utf-8"))
        for part in lineage:
            h.update(struct.pack(">q", int(part)))
        seed = int.from_bytes(h.digest()[:16], "big")
        return np.random.Generator(np.random.PCG64(seed))

    def __repr__(self) -> str:
        return f"RandomStream(root_seed={self.root_seed})"


def gaussian_vector(gen: np.random.Generator, d: int, per_coord_std: float) -> np.ndarray:
    """d i.i.d. zero-mean normal draws; exact zeros when the std is zero."""
    if per_coord_std < 0:
        raise ValueError("per_coord_std must be >= 0")
    if per_coord_std == 0.0:
        return np.zeros(d)
    return gen.standard_normal(d) * per_coord_std
