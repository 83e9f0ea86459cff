"""Symmetric-group tools and the embedding of NC(k) into S_k.

Composition is right-to-left: ``(s * t)(i) == s(t(i))``. Cycle notation
lists each cycle from its smallest element, cycles ordered by that element,
fixed points included: ``(1,7)(2,5,6)(3)(4)(8,9)``.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import _accel
from .errors import SizeLimitError
from .nc_lattice import NonCrossingPartition, enumerate_nc, kreweras, leq

EXHAUSTIVE_CAP = 8

__all__ = [
    "Permutation",
    "CycleType",
    "integer_partitions",
    "all_permutations",
    "gamma",
    "gamma_two",
    "length",
    "embed_nc",
    "is_geodesic",
    "complement_via_group",
    "geodesic_pairs_two_cycle",
    "EXHAUSTIVE_CAP",
]


@dataclass(frozen=True)
class CycleType:
    """Integer partition of ``k`` labelling a conjugacy class of S_k."""

    parts: tuple[int, ...]

    def __post_init__(self):
        parts = tuple(sorted((int(p) for p in self.parts), reverse=True))
        if any(p < 1 for p in parts):
            raise ValueError(f"cycle lengths must be positive: {self.parts}")
        object.__setattr__(self, "parts", parts)

    @property
    def k(self) -> int:
        return sum(self.parts)

    @property
    def length(self) -> int:
        return self.k - len(self.parts)

    def __str__(self) -> str:
        return "[" + ",".join(map(str, self.parts)) + "]"

    def representative(self) -> "Permutation":
        cycles = []
        start = 1
        for p in self.parts:
            cycles.append(tuple(range(start, start + p)))
            start += p
        return Permutation.from_cycles(self.k, cycles)


def integer_partitions(k: int) -> list[CycleType]:
    """Cycle types of S_k, starting from ``[k]`` in reverse lexicographic order."""
    out = []

    def rec(rest, cap, acc):
        if rest == 0:
            out.append(CycleType(tuple(acc)))
            return
        for p in range(min(rest, cap), 0, -1):
            rec(rest - p, p, acc + [p])

    rec(k, k, [])
    return out


@dataclass(frozen=True)
class Permutation:
    """Element of S_k; ``images[i-1] == sigma(i)``."""

    images: tuple[int, ...]

    def __post_init__(self):
        imgs = tuple(int(x) for x in self.images)
        if sorted(imgs) != list(range(1, len(imgs) + 1)):
            raise ValueError(f"{imgs} is not a permutation of 1..{len(imgs)}")
        object.__setattr__(self, "images", imgs)

    @classmethod
    def identity(cls, k: int) -> "Permutation":
        return cls(tuple(range(1, k + 1)))

    @classmethod
    def from_array(cls, arr: Sequence[int]) -> "Permutation":
        """From 0-based images."""
        return cls(tuple(int(x) + 1 for x in arr))

    @classmethod
    def from_cycles(cls, k: int, cycles: Iterable[Sequence[int]]) -> "Permutation":
        img = list(range(1, k + 1))
        seen = set()
        for cyc in cycles:
            for a, b in zip(cyc, list(cyc[1:]) + [cyc[0]]):
                if a in seen:
                    raise ValueError(f"point {a} appears in two cycles")
                seen.add(a)
                img[a - 1] = b
        return cls(tuple(img))

    @classmethod
    def parse(cls, text: str, k: int | None = None) -> "Permutation":
        """Read cycle notation such as ``(1,3,2,5)(4)(6,9)(7,8)``."""
        cycles = [tuple(int(t) for t in re.split(r"[,\s]+", c.strip()) if t)
                  for c in re.findall(r"\(([^)]*)\)", text)]
        if k is None:
            k = max((x for c in cycles for x in c), default=0)
        return cls.from_cycles(k, cycles)

    @property
    def k(self) -> int:
        return len(self.images)

    @cached_property
    def array(self) -> np.ndarray:
        a = np.asarray(self.images, dtype=np.int64) - 1
        a.setflags(write=False)
        return a

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def __mul__(self, other: "Permutation") -> "Permutation":
        if self.k != other.k:
            raise ValueError("permutations act on different sets")
        return Permutation(tuple(self.images[j - 1] for j in other.images))

    def inverse(self) -> "Permutation":
        inv = [0] * self.k
        for i, j in enumerate(self.images, start=1):
            inv[j - 1] = i
        return Permutation(tuple(inv))

    @cached_property
    def cycles(self) -> tuple[tuple[int, ...], ...]:
        seen = [False] * (self.k + 1)
        out = []
        for i in range(1, self.k + 1):
            if seen[i]:
                continue
            cyc = []
            j = i
            while not seen[j]:
                seen[j] = True
                cyc.append(j)
                j = self.images[j - 1]
            out.append(tuple(cyc))
        return tuple(out)

    @property
    def num_cycles(self) -> int:
        return len(self.cycles)

    @property
    def length(self) -> int:
        return self.k - self.num_cycles

    @property
    def cycle_type(self) -> CycleType:
        return CycleType(tuple(len(c) for c in self.cycles))

    def __str__(self) -> str:
        return "".join("(" + ",".join(map(str, c)) + ")" for c in self.cycles)


def length(sigma: Permutation) -> int:
    """Minimal number of transpositions whose product is ``sigma``."""
    return sigma.length


@lru_cache(maxsize=None)
def all_permutations(k: int) -> np.ndarray:
    """All of S_k as a read-only (k!, k) array of 0-based images."""
    if k > 10:
        raise SizeLimitError(f"refusing to materialize S_{k}")
    arr = np.array(list(itertools.permutations(range(k))), dtype=np.int64).reshape(-1, k)
    arr.setflags(write=False)
    return arr


def gamma(k: int) -> Permutation:
    """The full cycle ``(1, 2, ..., k)``."""
    return Permutation(tuple(list(range(2, k + 1)) + [1]))


def gamma_two(k: int) -> Permutation:
    """``(1..k)(k+1..2k)`` in S_{2k}."""
    return Permutation.from_cycles(2 * k, [tuple(range(1, k + 1)), tuple(range(k + 1, 2 * k + 1))])


def embed_nc(rho: NonCrossingPartition) -> Permutation:
    """Product of the increasing cycles on the blocks of ``rho``."""
    return Permutation.from_cycles(rho.k, rho.blocks)


def is_geodesic(sigma: Permutation, target: Permutation) -> bool:
    """True iff ``|sigma| + |sigma^-1 target| == |target|``."""
    return sigma.length + (sigma.inverse() * target).length == target.length


def complement_via_group(rho: NonCrossingPartition) -> Permutation:
    """``P_rho^-1 gamma_k``, the group-side Kreweras complement."""
    return embed_nc(rho).inverse() * gamma(rho.k)


def _lengths(perms: np.ndarray) -> np.ndarray:
    return perms.shape[1] - _accel.cycle_counts(np.ascontiguousarray(perms))


def _inverse_rows(perms: np.ndarray) -> np.ndarray:
    return np.argsort(perms, axis=1).astype(np.int64)


def geodesic_pairs_two_cycle(
    k: int, method: str = "auto", cap: int = EXHAUSTIVE_CAP
) -> list[tuple[Permutation, Permutation]]:
    """Pairs ``sigma <= pi`` on a geodesic from ``e`` to ``gamma_two(k)``.

    These are the solutions of ``|s| + |s^-1 p| + |p^-1 g| = 2k - 2`` in
    S_{2k}. ``method="exhaustive"`` scans S_{2k} (allowed while ``2k <=
    cap``); ``method="nc"`` builds them from comparable pairs in
    ``NC(k) x NC(k)``; ``"auto"`` picks the scan when it is allowed.
    """
    if method not in ("auto", "exhaustive", "nc"):
        raise ValueError(f"unknown method {method!r}")
    if k < 1:
        raise SizeLimitError(f"k={k} must be positive")
    if method == "auto":
        method = "exhaustive" if 2 * k <= cap else "nc"
    if method == "exhaustive":
        if 2 * k > cap:
            raise SizeLimitError(f"exhaustive scan of S_{2 * k} exceeds cap 2k <= {cap}")
        return _pairs_exhaustive(k)
    return _pairs_from_nc(k)


def _pairs_exhaustive(k: int) -> list[tuple[Permutation, Permutation]]:
    n = 2 * k
    perms = all_permutations(n)
    inv = _inverse_rows(perms)
    target = gamma_two(k).array
    full = n - 2
    len_p = _lengths(perms)
    len_rest = _lengths(inv[:, target])
    geo = np.nonzero(len_p + len_rest == full)[0]
    out = []
    for r in geo:
        pi = perms[r]
        len_between = _lengths(inv[:, pi])
        ok = np.nonzero(len_p + len_between == len_p[r])[0]
        p_obj = Permutation.from_array(pi)
        out.extend((Permutation.from_array(perms[s]), p_obj) for s in ok)
    return out


def _pairs_from_nc(k: int) -> list[tuple[Permutation, Permutation]]:
    parts = enumerate_nc(k)
    below = {rho: [nu for nu in parts if leq(nu, rho)] for rho in parts}
    out = []
    for r1 in parts:
        for r2 in parts:
            pi = embed_nc(_juxtapose(r1, r2))
            for n1 in below[r1]:
                for n2 in below[r2]:
                    out.append((embed_nc(_juxtapose(n1, n2)), pi))
    return out


def _juxtapose(a: NonCrossingPartition, b: NonCrossingPartition) -> NonCrossingPartition:
    blocks = list(a.blocks) + [tuple(x + a.k for x in blk) for blk in b.blocks]
    return NonCrossingPartition(a.k + b.k, tuple(blocks))
