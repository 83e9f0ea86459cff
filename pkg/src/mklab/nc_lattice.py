"""Non-crossing partitions: enumeration, order, Kreweras complement, insertion.

Partitions are stored in canonical form: each block is a sorted tuple of
1-based integers and the blocks are sorted by their minimum. Equality and
hashing use that form only, so two partitions built from differently ordered
input compare equal.

The textual form is ``{1,7|2,5,6|3|4|8,9}``.
"""
from __future__ import annotations

import re
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import _accel
from .errors import InsertionError, PosetError, SizeLimitError

K_MAX = 12

__all__ = [
    "K_MAX",
    "NonCrossingPartition",
    "KrewerasDecomposition",
    "enumerate_nc",
    "nc_firsts",
    "leq",
    "kreweras",
    "kreweras_points",
    "insert_at",
    "kreweras_decompositions",
    "inner_partitions",
    "inner_partitions_nested",
    "mobius_nc",
    "interval_type",
    "catalan",
]


def catalan(n: int) -> int:
    c = 1
    for i in range(n):
        c = c * 2 * (2 * i + 1) // (i + 2)
    return c


@dataclass(frozen=True)
class NonCrossingPartition:
    """A non-crossing partition of ``{1, ..., k}``."""

    k: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"ground set size must be positive, got {self.k}")
        blocks = tuple(sorted((tuple(sorted(b)) for b in self.blocks), key=lambda b: b[0] if b else 0))
        if any(len(b) == 0 for b in blocks):
            raise ValueError("empty block")
        flat = sorted(x for b in blocks for x in b)
        if flat != list(range(1, self.k + 1)):
            raise ValueError(f"blocks {blocks} do not partition 1..{self.k}")
        if _has_crossing(blocks, self.k):
            raise ValueError(f"partition {blocks} is crossing")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def _trusted(cls, k: int, blocks: tuple[tuple[int, ...], ...]) -> "NonCrossingPartition":
        # caller guarantees canonical, valid blocks
        obj = object.__new__(cls)
        object.__setattr__(obj, "k", k)
        object.__setattr__(obj, "blocks", blocks)
        return obj

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[int]], k: int | None = None) -> "NonCrossingPartition":
        blocks = tuple(tuple(b) for b in blocks)
        if k is None:
            k = max((x for b in blocks for x in b), default=0)
        return cls(k, blocks)

    @classmethod
    def parse(cls, text: str, k: int | None = None) -> "NonCrossingPartition":
        """Read the ``{1,7|2,5,6|3}`` form; braces and blanks are optional."""
        body = text.strip()
        if body.startswith("{") and body.endswith("}"):
            body = body[1:-1]
        if not body.strip():
            raise ValueError(f"empty partition string {text!r}")
        blocks = []
        for chunk in body.split("|"):
            nums = [int(t) for t in re.split(r"[,\s]+", chunk.strip()) if t]
            if not nums:
                raise ValueError(f"empty block in {text!r}")
            blocks.append(nums)
        return cls.from_blocks(blocks, k)

    @classmethod
    def zero(cls, k: int) -> "NonCrossingPartition":
        return cls._trusted(k, tuple((i,) for i in range(1, k + 1)))

    @classmethod
    def one(cls, k: int) -> "NonCrossingPartition":
        return cls._trusted(k, (tuple(range(1, k + 1)),))

    def __len__(self) -> int:
        return len(self.blocks)

    def __str__(self) -> str:
        return "{" + "|".join(",".join(map(str, b)) for b in self.blocks) + "}"

    def block_sizes(self) -> tuple[int, ...]:
        """Block sizes sorted in decreasing order."""
        return tuple(sorted((len(b) for b in self.blocks), reverse=True))

    def labels(self) -> list[int]:
        """``labels[i-1]`` is the index of the block holding ``i``."""
        lab = [0] * self.k
        for idx, b in enumerate(self.blocks):
            for x in b:
                lab[x - 1] = idx
        return lab

    def firsts(self) -> np.ndarray:
        """0-based smallest element of the block of each point."""
        out = np.empty(self.k, dtype=np.int64)
        for b in self.blocks:
            out[np.asarray(b) - 1] = b[0] - 1
        return out

    def restrict(self, points: Sequence[int]) -> "NonCrossingPartition":
        """Restriction to a union of blocks, relabelled to ``1..len(points)``."""
        pts = sorted(points)
        index = {x: i + 1 for i, x in enumerate(pts)}
        blocks = []
        for b in self.blocks:
            inside = [x in index for x in b]
            if any(inside) and not all(inside):
                raise ValueError(f"points {pts} split block {b}")
            if all(inside):
                blocks.append(tuple(index[x] for x in b))
        return NonCrossingPartition._trusted(len(pts), tuple(sorted(blocks)))

    def rotate(self) -> "NonCrossingPartition":
        """Relabel ``i -> i-1 (mod k)``, i.e. conjugate by the full cycle."""
        k = self.k
        return NonCrossingPartition._trusted(
            k, _canon(tuple(((x - 2) % k) + 1 for x in b) for b in self.blocks)
        )


def _canon(blocks: Iterable[Iterable[int]]) -> tuple[tuple[int, ...], ...]:
    return tuple(sorted(tuple(sorted(b)) for b in blocks))


def _has_crossing(blocks, k) -> bool:
    lab = [0] * (k + 1)
    for idx, b in enumerate(blocks):
        for x in b:
            lab[x] = idx
    # a<c<b<d with a,b in one block and c,d in another: scan with a stack of
    # open blocks; a point may only attach to the block on top of the stack
    last = {idx: b[-1] for idx, b in enumerate(blocks)}
    first = {idx: b[0] for idx, b in enumerate(blocks)}
    stack: list[int] = []
    for x in range(1, k + 1):
        b = lab[x]
        if first[b] == x:
            if last[b] != x:
                stack.append(b)
            continue
        if not stack or stack[-1] != b:
            return True
        if last[b] == x:
            stack.pop()
    return False


@dataclass(frozen=True)
class KrewerasDecomposition:
    """Split of a partition into an outer part and an inner part.

    ``inner`` sits on the points ``insertion_point + 1 .. insertion_point +
    inner.k`` of the original ground set, right after the barred point
    ``insertion_point`` of ``outer``.
    """

    outer: NonCrossingPartition
    inner: NonCrossingPartition
    insertion_point: int

    @property
    def support(self) -> tuple[int, int]:
        return self.insertion_point + 1, self.insertion_point + self.inner.k


# ---------------------------------------------------------------------------
# enumeration

def _check_k(k: int, k_max: int = K_MAX) -> None:
    if not isinstance(k, (int, np.integer)) or k < 1 or k > k_max:
        raise SizeLimitError(f"k={k} outside supported range 1..{k_max}")


def _generate(k: int) -> list[tuple[tuple[int, ...], ...]]:
    out = []
    blocks: list[list[int]] = []
    # stack of indices into ``blocks`` that may still receive points
    def rec(x: int, stack: list[int]) -> None:
        if x > k:
            out.append(tuple(tuple(b) for b in blocks))
            return
        blocks.append([x])
        rec(x + 1, stack + [len(blocks) - 1])
        blocks.pop()
        for depth in range(len(stack)):
            b = stack[depth]
            blocks[b].append(x)
            rec(x + 1, stack[:depth + 1])
            blocks[b].pop()

    rec(1, [])
    return out


@lru_cache(maxsize=None)
def _enumerate_cached(k: int) -> tuple[NonCrossingPartition, ...]:
    raw = sorted(_generate(k))
    return tuple(NonCrossingPartition._trusted(k, b) for b in raw)


def enumerate_nc(k: int, k_max: int = K_MAX) -> tuple[NonCrossingPartition, ...]:
    """All non-crossing partitions of ``1..k`` in lexicographic canonical order.

    The result has ``catalan(k)`` entries and is cached per ``k``.
    """
    _check_k(k, k_max)
    return _enumerate_cached(int(k))


@lru_cache(maxsize=None)
def _firsts_cached(k: int) -> np.ndarray:
    parts = _enumerate_cached(k)
    arr = np.empty((len(parts), k), dtype=np.int64)
    for r, p in enumerate(parts):
        arr[r] = p.firsts()
    arr.setflags(write=False)
    return arr


def nc_firsts(k: int) -> np.ndarray:
    """Matrix of block-minimum labels, one row per element of ``enumerate_nc(k)``."""
    _check_k(k)
    return _firsts_cached(int(k))


# ---------------------------------------------------------------------------
# order and complement

def leq(nu: NonCrossingPartition, rho: NonCrossingPartition) -> bool:
    """Refinement order: every block of ``nu`` lies inside a block of ``rho``."""
    if nu.k != rho.k:
        raise ValueError(f"ground sets differ: {nu.k} vs {rho.k}")
    lab = rho.labels()
    return all(len({lab[x - 1] for x in b}) == 1 for b in nu.blocks)


def _kreweras_blocks(blocks: tuple[tuple[int, ...], ...], k: int) -> tuple[tuple[int, ...], ...]:
    # barred points i < j share a block iff {i+1..j} is a union of blocks
    lab = [0] * (k + 1)
    size = [len(b) for b in blocks]
    for idx, b in enumerate(blocks):
        for x in b:
            lab[x] = idx
    assigned = [False] * (k + 1)
    out = []
    for i in range(1, k + 1):
        if assigned[i]:
            continue
        blk = [i]
        assigned[i] = True
        cnt = [0] * len(blocks)
        deficit = 0
        for j in range(i + 1, k + 1):
            b = lab[j]
            cnt[b] += 1
            if cnt[b] == 1:
                deficit += 1
            if cnt[b] == size[b]:
                deficit -= 1
            if deficit == 0 and not assigned[j]:
                blk.append(j)
                assigned[j] = True
        out.append(tuple(blk))
    return tuple(out)


@lru_cache(maxsize=1 << 16)
def _kreweras_cached(k: int, blocks: tuple[tuple[int, ...], ...]) -> NonCrossingPartition:
    return NonCrossingPartition._trusted(k, _kreweras_blocks(blocks, k))


def kreweras(rho: NonCrossingPartition) -> NonCrossingPartition:
    """Kreweras complement on ``1..k`` (bars dropped)."""
    return _kreweras_cached(rho.k, rho.blocks)


def kreweras_points(rho: NonCrossingPartition) -> frozenset[int]:
    """Last points of the blocks of ``K(rho)``; barred point ``i`` reported as ``i``."""
    return frozenset(b[-1] for b in kreweras(rho).blocks)


# ---------------------------------------------------------------------------
# insertion and decompositions

def insert_at(outer: NonCrossingPartition, p: int, inner: NonCrossingPartition) -> NonCrossingPartition:
    """Place ``inner`` right after the barred point ``p`` of ``outer``.

    Labels of ``outer`` above ``p`` move up by ``inner.k`` and ``inner``
    occupies ``p+1 .. p+inner.k``.

    Raises
    ------
    InsertionError
        If ``p`` is not a Kreweras point of ``outer``.
    """
    if p not in kreweras_points(outer):
        raise InsertionError(f"{p} is not a Kreweras point of {outer}")
    m = inner.k
    blocks = [tuple(x if x <= p else x + m for x in b) for b in outer.blocks]
    blocks += [tuple(x + p for x in b) for b in inner.blocks]
    return NonCrossingPartition._trusted(outer.k + m, _canon(blocks))


def kreweras_decompositions(rho: NonCrossingPartition) -> list[KrewerasDecomposition]:
    """Every Kreweras decomposition of ``rho``, ordered by inner support.

    An inner part is a set of blocks whose union is an interval ``[i, j]``
    with ``i >= 2``; it qualifies when ``i - 1`` is a Kreweras point of the
    remaining (relabelled) blocks.
    """
    k = rho.k
    lab = rho.labels()
    size = [len(b) for b in rho.blocks]
    out = []
    for i in range(2, k + 1):
        cnt = [0] * len(rho.blocks)
        deficit = 0
        for j in range(i, k + 1):
            b = lab[j - 1]
            cnt[b] += 1
            if cnt[b] == 1:
                deficit += 1
            if cnt[b] == size[b]:
                deficit -= 1
            if deficit:
                continue
            width = j - i + 1
            inner_blocks = [blk for blk in rho.blocks if i <= blk[0] <= j]
            outer_blocks = [blk for blk in rho.blocks if not i <= blk[0] <= j]
            inner = NonCrossingPartition._trusted(
                width, tuple(tuple(x - i + 1 for x in blk) for blk in inner_blocks)
            )
            outer = NonCrossingPartition._trusted(
                k - width, tuple(tuple(x if x < i else x - width for x in blk) for blk in outer_blocks)
            )
            if i - 1 in kreweras_points(outer):
                out.append(KrewerasDecomposition(outer, inner, i - 1))
    return out


def inner_partitions(rho: NonCrossingPartition) -> set[tuple[tuple[int, ...], ...]]:
    """Inner partitions of ``rho`` as block tuples in the original labels."""
    return {
        tuple(tuple(x + d.insertion_point for x in b) for b in d.inner.blocks)
        for d in kreweras_decompositions(rho)
    }


def inner_partitions_nested(rho: NonCrossingPartition) -> set[tuple[tuple[int, ...], ...]]:
    """Inner partitions collected through the segments cut out by the first block.

    The block containing 1 splits the rest of ``1..k`` into segments; each
    restricted segment is inner, and so is every inner partition of a
    segment. Independent of :func:`kreweras_decompositions`.
    """
    out: set[tuple[tuple[int, ...], ...]] = set()
    first = rho.blocks[0]
    cuts = list(first) + [rho.k + 1]
    for a, b in zip(cuts, cuts[1:]):
        if b - a < 2:
            continue
        seg = list(range(a + 1, b))
        shift = a
        segment = tuple(blk for blk in rho.blocks if a < blk[0] < b)
        out.add(segment)
        sub = rho.restrict(seg)
        for inner in inner_partitions_nested(sub):
            out.add(tuple(tuple(x + shift for x in blk) for blk in inner))
    return out


# ---------------------------------------------------------------------------
# Moebius function

_mu_memo: dict[tuple[int, ...], int] = {}
_mu_lock = threading.Lock()


def interval_type(nu: NonCrossingPartition, rho: NonCrossingPartition) -> tuple[int, ...]:
    """Isomorphism type of the interval ``[nu, rho]``.

    ``[nu, rho]`` factors over the blocks ``V`` of ``rho`` as
    ``[nu|V, 1_V]``, and ``[nu|V, 1_V]`` is isomorphic to a product of full
    lattices ``NC(|W|)`` over the blocks ``W`` of ``K(nu|V)``. The type is
    the decreasing tuple of those sizes with the trivial factors (size 1)
    removed.
    """
    sizes: list[int] = []
    for v in rho.blocks:
        sub = nu.restrict(v)
        sizes.extend(len(w) for w in kreweras(sub).blocks if len(w) > 1)
    return tuple(sorted(sizes, reverse=True))


def _mu_of_type(t: tuple[int, ...]) -> int:
    hit = _mu_memo.get(t)
    if hit is not None:
        return hit
    if not t:
        return 1
    # representative: [0_n, rho] with rho made of consecutive blocks of sizes t
    n = sum(t)
    rho_blocks = []
    start = 1
    for s in t:
        rho_blocks.append(tuple(range(start, start + s)))
        start += s
    rho = NonCrossingPartition._trusted(n, tuple(rho_blocks))
    firsts = _firsts_cached(n)
    parts = _enumerate_cached(n)
    rho_first = rho.firsts()
    below = np.nonzero(_accel.refines_mask(firsts, rho_first))[0]
    bottom = NonCrossingPartition.zero(n)
    total = 0
    for r in below:
        sigma = parts[r]
        if sigma == bottom:
            continue
        total += _mu_of_type(interval_type(sigma, rho))
    value = -total
    with _mu_lock:
        _mu_memo[t] = value
    return value


def mobius_nc(nu: NonCrossingPartition, rho: NonCrossingPartition) -> Fraction:
    """Moebius function of the lattice ``NC(k)`` on the pair ``nu <= rho``.

    Computed by the defining recursion ``mu(rho, rho) = 1`` and
    ``sum_{nu <= sigma <= rho} mu(sigma, rho) = 0``, summed over the
    elements of a representative interval and memoized by interval type.
    Safe to call from several threads.
    """
    if not leq(nu, rho):
        raise PosetError(f"{nu} is not below {rho}")
    return Fraction(_mu_of_type(interval_type(nu, rho)))
