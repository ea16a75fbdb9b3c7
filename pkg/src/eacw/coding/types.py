"""Frequency types of sequences and the typical-subspace block decomposition."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import factorial, prod

from ..linalg import ResourceError

ENUM_GUARD = 10**6


@dataclass(frozen=True)
class TypeClass:
    k: int
    d: int
    counts: tuple[int, ...]
    sequences: tuple[tuple[int, ...], ...]

    @property
    def dim(self) -> int:
        return len(self.sequences)

    def multinomial(self) -> int:
        return factorial(self.k) // prod(factorial(c) for c in self.counts)

    def probability(self, p) -> float:
        """``p^k(T)``: total i.i.d. weight of the class under the letter distribution ``p``."""
        return self.dim * prod(float(p[a]) ** c for a, c in enumerate(self.counts))


def compositions(k: int, d: int):
    """All count vectors of length ``d`` summing to ``k``, lexicographically descending."""
    if d == 1:
        yield (k,)
        return
    for first in range(k, -1, -1):
        for rest in compositions(k - first, d - 1):
            yield (first,) + rest


def enumerate_types(k: int, d: int) -> list[TypeClass]:
    if d ** k > ENUM_GUARD:
        raise ResourceError(f"{d}^{k} sequences exceed the enumeration guard {ENUM_GUARD}")
    buckets: dict[tuple[int, ...], list[tuple[int, ...]]] = {c: [] for c in compositions(k, d)}
    for seq in itertools.product(range(d), repeat=k):
        counts = tuple(seq.count(a) for a in range(d))
        buckets[counts].append(seq)
    return [TypeClass(k, d, c, tuple(seqs)) for c, seqs in buckets.items()]
