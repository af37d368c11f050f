"""Integer partitions in multiplicity form, for Faa di Bruno expansions.

A partition of ``j`` is stored as ``(N_1, ..., N_j)`` where ``N_q`` counts the
parts of size ``q``; every vector satisfies ``sum(q * N_q) == j``.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Sequence

from .errors import InvalidArgumentError

MAX_J = 30

PartitionVector = tuple[int, ...]


@lru_cache(maxsize=None)
def enumerate_tj(j: int) -> tuple[PartitionVector, ...]:
    """All partitions of ``j`` as multiplicity vectors of length ``j``.

    Ordered by descending lexicographic order of the count vector. ``j = 0`` yields the single
    empty partition.
    """
    if isinstance(j, bool) or int(j) != j or not 0 <= j <= MAX_J:
        raise InvalidArgumentError(f"j must be an integer in [0, {MAX_J}], got {j!r}")
    j = int(j)
    out: list[PartitionVector] = []
    counts = [0] * j

    def descend(q: int, remaining: int):
        # assign N_q for q = j, j-1, ..., 1
        if q == 0:
            if remaining == 0:
                out.append(tuple(counts))
            return
        for n in range(remaining // q + 1):
            counts[q - 1] = n
            descend(q - 1, remaining - n * q)
        counts[q - 1] = 0

    descend(j, j)
    return tuple(sorted(out, reverse=True))


def b_coefficient(p: Sequence[int]) -> int:
    return 1 + sum(p)


def a_coefficient(p: Sequence[int], factors: Sequence[float], scale: float) -> float:
    """Product over part sizes of ``((-1)**q * scale * E_q / q!)**N_q / N_q!``.

    ``factors[q-1]`` holds ``E_q``; only entries with ``N_q > 0`` are read.
    """
    out = 1.0
    for q, n_q in enumerate(p, start=1):
        if n_q:
            base = (-1) ** q * scale * factors[q - 1] / math.factorial(q)
            out *= base ** n_q / math.factorial(n_q)
    return out
