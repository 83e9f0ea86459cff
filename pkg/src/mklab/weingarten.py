"""Unitary Weingarten functions for concrete ``N`` and Haar mixed moments.

Values are exact ``Fraction`` objects obtained from the class-reduced
system

    sum_{pi in S_k} N^{#(sigma^-1 pi)} Wg(pi, N) = [sigma == e]

with one equation per cycle type. Floats appear only when the caller hands
in floating-point matrices.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from . import _accel
from .errors import ConditioningError, SizeLimitError
from .nc_lattice import catalan
from .perm_group import CycleType, Permutation, all_permutations, gamma, integer_partitions

K_MAX = 8
MIXED_MOMENT_K_MAX = 6

__all__ = [
    "WeingartenTable",
    "mu_asymptotic",
    "build_table",
    "trace_product",
    "haar_mixed_moment",
    "class_indices",
    "solve_exact",
]


def mu_asymptotic(t: CycleType | Permutation) -> int:
    """Leading coefficient of ``N^{k+|sigma|} Wg(sigma, N)``: a signed Catalan product."""
    if isinstance(t, Permutation):
        t = t.cycle_type
    out = 1
    for c in t.parts:
        out *= (-1) ** (c - 1) * catalan(c - 1)
    return out


@dataclass(frozen=True)
class WeingartenTable:
    k: int
    N: int
    values: Mapping[CycleType, Fraction] = field(repr=False)

    def __getitem__(self, key: CycleType | Permutation) -> Fraction:
        if isinstance(key, Permutation):
            key = key.cycle_type
        return self.values[key]

    def scaled(self, t: CycleType) -> Fraction:
        """``N^{k+|sigma|} Wg(sigma, N)`` for a permutation of type ``t``."""
        return self.values[t] * Fraction(self.N) ** (self.k + t.length)

    def convolution(self, sigma: Permutation) -> Fraction:
        """Left side of the defining identity at ``sigma``; should be ``[sigma == e]``."""
        perms = all_permutations(self.k)
        inv = sigma.inverse().array
        counts = _accel.cycle_counts(np.ascontiguousarray(inv[perms]))
        classes = integer_partitions(self.k)
        idx = class_indices(perms)
        total = Fraction(0)
        for c, n in zip(idx, counts):
            total += self.N ** int(n) * self.values[classes[c]]
        return total

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "N": self.N,
            "entries": [
                {"cycle_type": list(t.parts), "numerator": v.numerator, "denominator": v.denominator}
                for t, v in self.values.items()
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    @classmethod
    def from_json(cls, data: Mapping) -> "WeingartenTable":
        values = {
            CycleType(tuple(e["cycle_type"])): Fraction(e["numerator"], e["denominator"])
            for e in data["entries"]
        }
        return cls(int(data["k"]), int(data["N"]), values)


@lru_cache(maxsize=None)
def _class_codes(k: int) -> tuple[np.ndarray, np.ndarray]:
    # code of a cycle type = sum m_l (k+1)^l, m_l = number of l-cycles
    base = (k + 1) ** np.arange(k + 1, dtype=np.int64)
    codes = []
    for t in integer_partitions(k):
        m = np.zeros(k + 1, dtype=np.int64)
        for p in t.parts:
            m[p] += 1
        codes.append(int(m @ base))
    codes = np.asarray(codes, dtype=np.int64)
    order = np.argsort(codes)
    return codes[order], order


def class_indices(perms: np.ndarray) -> np.ndarray:
    """Position in ``integer_partitions(k)`` of the cycle type of each row."""
    perms = np.ascontiguousarray(perms, dtype=np.int64)
    k = perms.shape[1]
    m = _accel.cycle_length_counts(perms)
    base = (k + 1) ** np.arange(k + 1, dtype=np.int64)
    sorted_codes, order = _class_codes(k)
    return order[np.searchsorted(sorted_codes, m @ base)]


def solve_exact(a: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    """Gauss-Jordan elimination over the rationals with row pivoting."""
    n = len(a)
    m = [list(map(Fraction, row)) + [Fraction(rhs)] for row, rhs in zip(a, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            raise ArithmeticError("singular system")
        m[col], m[piv] = m[piv], m[col]
        pv = m[col][col]
        m[col] = [x / pv for x in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [row[n] for row in m]


@lru_cache(maxsize=None)
def _class_system_counts(k: int) -> np.ndarray:
    """``counts[c, d, n]``: number of pi of type d with #(rep_c^-1 pi) == n."""
    classes = integer_partitions(k)
    perms = all_permutations(k)
    cls = class_indices(perms)
    out = np.zeros((len(classes), len(classes), k + 1), dtype=np.int64)
    for c, t in enumerate(classes):
        inv = t.representative().inverse().array
        ncyc = _accel.cycle_counts(np.ascontiguousarray(inv[perms]))
        np.add.at(out, (c, cls, ncyc), 1)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=64)
def build_table(k: int, N: int) -> WeingartenTable:
    """Exact ``Wg(., N)`` on every cycle type of S_k.

    Raises
    ------
    ConditioningError
        When ``N < k``; the class system is singular there.
    SizeLimitError
        When ``k`` exceeds ``K_MAX``.
    """
    if k < 1 or k > K_MAX:
        raise SizeLimitError(f"k={k} outside 1..{K_MAX}")
    if N < k:
        raise ConditioningError(f"N={N} < k={k}: Weingarten class system is singular")
    classes = integer_partitions(k)
    counts = _class_system_counts(k)
    powers = [N ** n for n in range(k + 1)]
    a = [[sum(int(counts[c, d, n]) * powers[n] for n in range(k + 1)) for d in range(len(classes))]
         for c in range(len(classes))]
    b = [1 if t.parts == (1,) * k else 0 for t in classes]
    try:
        sol = solve_exact(a, b)
    except ArithmeticError as exc:  # pragma: no cover - impossible for N >= k
        raise ArithmeticError(f"Weingarten system singular at k={k}, N={N}") from exc
    return WeingartenTable(k, N, dict(zip(classes, sol)))


def _is_exact(mats: Sequence[np.ndarray]) -> bool:
    return all(np.asarray(m).dtype.kind in "iuO" for m in mats)


def _matmul_chain(mats):
    out = mats[0]
    for m in mats[1:]:
        out = out @ m
    return out


def _trace(m):
    return sum(m[i, i] for i in range(m.shape[0])) if m.dtype == object else np.trace(m)


def trace_product(sigma: Permutation, matrices: Sequence[np.ndarray]):
    """Product over the cycles ``(i1, ..., ip)`` of ``Tr(A_i1 A_i2 ... A_ip)``."""
    if len(matrices) != sigma.k:
        raise ValueError(f"need {sigma.k} matrices, got {len(matrices)}")
    mats = [np.asarray(m) for m in matrices]
    shapes = {m.shape for m in mats}
    if len(shapes) != 1 or len(next(iter(shapes))) != 2 or mats[0].shape[0] != mats[0].shape[1]:
        raise ValueError(f"matrices must share one square shape, got {sorted(shapes)}")
    out = Fraction(1) if _is_exact(mats) else 1.0
    for cyc in sigma.cycles:
        out = out * _trace(_matmul_chain([mats[i - 1] for i in cyc]))
    return out


def _all_traces(matrices, k):
    perms = all_permutations(k)
    memo: dict[tuple[int, ...], object] = {}
    exact = _is_exact(matrices)
    out = []
    for row in perms:
        sigma = Permutation.from_array(row)
        val = Fraction(1) if exact else 1.0
        for cyc in sigma.cycles:
            # the trace is invariant under rotation of the word
            j = cyc.index(min(cyc))
            word = cyc[j:] + cyc[:j]
            if word not in memo:
                memo[word] = _trace(_matmul_chain([matrices[i - 1] for i in word]))
            val = val * memo[word]
        out.append(val)
    return out


@lru_cache(maxsize=None)
def _mixed_class_matrix(k: int) -> np.ndarray:
    """``C[s, p]`` = type index of ``pi_p^-1 sigma_s^-1 gamma_k``."""
    perms = all_permutations(k)
    inv = np.argsort(perms, axis=1)
    g = gamma(k).array
    out = np.empty((len(perms), len(perms)), dtype=np.int64)
    for s in range(len(perms)):
        w = inv[s][g]
        out[s] = class_indices(inv[:, w])
    out.setflags(write=False)
    return out


def haar_mixed_moment(A: Sequence[np.ndarray], B: Sequence[np.ndarray], N: int | None = None):
    """``E Tr[(A_1 U B_1 U^*) ... (A_k U B_k U^*)]`` for Haar ``U``.

    Evaluates the double sum over ``S_k x S_k`` of
    ``Tr_sigma[A] Tr_pi[B] Wg(pi^-1 sigma^-1 gamma_k, N)``. Integer or
    object (``Fraction``) matrices give an exact ``Fraction``; floating
    matrices give a float or complex number.
    """
    k = len(A)
    if len(B) != k or k == 0:
        raise ValueError("A and B must be non-empty lists of equal length")
    mats_a = [np.asarray(m) for m in A]
    mats_b = [np.asarray(m) for m in B]
    dim = mats_a[0].shape[0]
    if any(m.shape != (dim, dim) for m in mats_a + mats_b):
        raise ValueError("all matrices must be square of one size")
    if N is None:
        N = dim
    if N != dim:
        raise ValueError(f"N={N} does not match matrix size {dim}")
    if k > MIXED_MOMENT_K_MAX:
        raise SizeLimitError(f"k={k} exceeds {MIXED_MOMENT_K_MAX}")
    table = build_table(k, N)
    classes = integer_partitions(k)
    cls = _mixed_class_matrix(k)
    ta = _all_traces(mats_a, k)
    tb = _all_traces(mats_b, k)
    if _is_exact(mats_a + mats_b):
        wg = [table.values[t] for t in classes]
        total = Fraction(0)
        for s, a_val in enumerate(ta):
            if a_val == 0:
                continue
            acc = [Fraction(0)] * len(classes)
            row = cls[s]
            for p, b_val in enumerate(tb):
                if b_val:
                    acc[row[p]] += b_val
            total += a_val * sum(w * x for w, x in zip(wg, acc))
        return total
    wg = np.array([float(table.values[t]) for t in classes])
    wmat = wg[cls]
    res = np.asarray(ta) @ wmat @ np.asarray(tb)
    return complex(res) if np.iscomplexobj(res) else float(res)
