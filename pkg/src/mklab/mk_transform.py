"""Moment-level transforms between a transition measure and its Rayleigh measure.

A :class:`MomentSequence` is a truncated list ``M_1..M_K``. Exact entries
(``int``/``Fraction``) keep the whole pipeline in rational arithmetic;
any float entry switches the sequence to float mode. Sums over ``NC(k)``
are evaluated by grouping partitions with equal block sizes, which leaves
the value unchanged because ``fc_rho`` only depends on block sizes.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable, Sequence

import numpy as np

from . import _accel
from .nc_lattice import NonCrossingPartition, enumerate_nc, kreweras, mobius_nc
from .perm_group import Permutation

KINDS = ("transition", "rayleigh", "raw")
THM12_K_MAX = 10
THM31_K_MAX = 8

__all__ = [
    "MomentSequence",
    "FreeCumulantSequence",
    "moments_to_cumulants",
    "cumulants_to_moments",
    "mk_forward",
    "mk_inverse",
    "thm12_sum",
    "thm31_prediction",
    "rayleigh_moments",
    "partition_value",
    "permutation_value",
    "semicircle_cumulants",
    "marchenko_pastur_cumulants",
    "point_mass_moments",
]


def _resolve(values: Iterable) -> tuple[tuple, str]:
    vals = tuple(values)
    if all(isinstance(v, Rational) for v in vals):
        return tuple(Fraction(v) for v in vals), "rational"
    return tuple(float(v) for v in vals), "float"


def _format(v) -> str | float:
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    return float(v)


def _parse(v):
    if isinstance(v, str):
        return Fraction(v)
    return v


class _Sequence:
    values: tuple
    scalar_mode: str

    @property
    def K(self) -> int:
        return len(self.values)

    def __getitem__(self, k: int):
        """1-based access: ``seq[k]`` is the order-``k`` entry."""
        if not 1 <= k <= len(self.values):
            raise IndexError(f"order {k} outside 1..{len(self.values)}")
        return self.values[k - 1]

    def __len__(self) -> int:
        return len(self.values)

    def _zero(self):
        return Fraction(0) if self.scalar_mode == "rational" else 0.0

    def _one(self):
        return Fraction(1) if self.scalar_mode == "rational" else 1.0


@dataclass(frozen=True)
class MomentSequence(_Sequence):
    """Moments ``M_1..M_K`` of a measure or signed measure."""

    values: tuple
    kind: str = "raw"
    scalar_mode: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        vals, mode = _resolve(self.values)
        if not vals:
            raise ValueError("a moment sequence needs K >= 1")
        if self.scalar_mode == "float" and mode == "rational":
            vals, mode = tuple(float(v) for v in vals), "float"
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "scalar_mode", mode)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "K": self.K,
            "scalar_mode": self.scalar_mode,
            "values": [_format(v) for v in self.values],
        }

    @classmethod
    def from_json(cls, data: dict) -> "MomentSequence":
        vals = [_parse(v) for v in data["values"]]
        if len(vals) != int(data["K"]):
            raise ValueError("K does not match the number of values")
        return cls(tuple(vals), data.get("kind", "raw"), data.get("scalar_mode", ""))


@dataclass(frozen=True)
class FreeCumulantSequence(_Sequence):
    """Free cumulants ``fc_1..fc_K``."""

    values: tuple
    scalar_mode: str = ""

    def __post_init__(self):
        vals, mode = _resolve(self.values)
        if not vals:
            raise ValueError("a cumulant sequence needs K >= 1")
        if self.scalar_mode == "float" and mode == "rational":
            vals, mode = tuple(float(v) for v in vals), "float"
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "scalar_mode", mode)

    def to_json(self) -> dict:
        return {
            "kind": "free_cumulants",
            "K": self.K,
            "scalar_mode": self.scalar_mode,
            "values": [_format(v) for v in self.values],
        }

    @classmethod
    def from_json(cls, data: dict) -> "FreeCumulantSequence":
        vals = [_parse(v) for v in data["values"]]
        if len(vals) != int(data["K"]):
            raise ValueError("K does not match the number of values")
        return cls(tuple(vals), data.get("scalar_mode", ""))


def _product(seq: _Sequence, sizes: Iterable[int]):
    out = seq._one()
    for s in sizes:
        out = out * seq.values[s - 1]
    return out


def partition_value(seq: _Sequence, rho: NonCrossingPartition):
    """``alpha_rho``: product of ``seq[|B|]`` over the blocks of ``rho``."""
    return _product(seq, (len(b) for b in rho.blocks))


def permutation_value(seq: _Sequence, sigma: Permutation):
    """``alpha_sigma``: product of ``seq[|c|]`` over the cycles of ``sigma``."""
    return _product(seq, (len(c) for c in sigma.cycles))


# ---------------------------------------------------------------------------
# tables over NC(k), grouped by block sizes

@lru_cache(maxsize=None)
def _block_type_table(k: int) -> tuple[tuple[tuple[int, ...], int, int], ...]:
    """``(block sizes, |K(rho)|, multiplicity)`` over NC(k)."""
    cnt: Counter = Counter()
    for rho in enumerate_nc(k):
        cnt[(rho.block_sizes(), len(kreweras(rho)))] += 1
    return tuple((sizes, ksize, n) for (sizes, ksize), n in sorted(cnt.items()))


@lru_cache(maxsize=None)
def _mobius_table(k: int) -> tuple[tuple[tuple[int, ...], int], ...]:
    """``(block sizes of nu, sum of mu(nu, 1_k))`` over NC(k)."""
    top = NonCrossingPartition.one(k)
    acc: Counter = Counter()
    for nu in enumerate_nc(k):
        acc[nu.block_sizes()] += int(mobius_nc(nu, top))
    return tuple(sorted((s, c) for s, c in acc.items() if c))


def moments_to_cumulants(M: MomentSequence) -> FreeCumulantSequence:
    """``fc_k = sum_{nu in NC(k)} M_nu mu(nu, 1_k)`` for ``k = 1..K``."""
    out = []
    for k in range(1, M.K + 1):
        total = M._zero()
        for sizes, coeff in _mobius_table(k):
            total = total + coeff * _product(M, sizes)
        out.append(total)
    return FreeCumulantSequence(tuple(out), M.scalar_mode)


def cumulants_to_moments(fc: FreeCumulantSequence, kind: str = "transition") -> MomentSequence:
    """``M_k = sum_{rho in NC(k)} fc_rho`` for ``k = 1..K``."""
    out = []
    for k in range(1, fc.K + 1):
        total = fc._zero()
        for sizes, _, n in _block_type_table(k):
            total = total + n * _product(fc, sizes)
        out.append(total)
    return MomentSequence(tuple(out), kind, fc.scalar_mode)


def mk_forward(Mm: MomentSequence) -> MomentSequence:
    """Rayleigh-measure moments from transition-measure moments.

    ``M_k(tau) = k M_k(m) - sum_{r=1}^{k-1} M_r(tau) M_{k-r}(m)``: the
    Newton identity linking power sums to complete symmetric functions.
    """
    m = Mm.values
    tau: list = []
    for k in range(1, len(m) + 1):
        acc = k * m[k - 1]
        for r in range(1, k):
            acc = acc - tau[r - 1] * m[k - r - 1]
        tau.append(acc)
    return MomentSequence(tuple(tau), "rayleigh", Mm.scalar_mode)


def mk_inverse(Mt: MomentSequence) -> MomentSequence:
    """Transition-measure moments from Rayleigh-measure moments (inverse of :func:`mk_forward`)."""
    tau = Mt.values
    m: list = []
    rational = Mt.scalar_mode == "rational"
    for k in range(1, len(tau) + 1):
        acc = tau[k - 1]
        for r in range(1, k):
            acc = acc + tau[r - 1] * m[k - r - 1]
        m.append(acc / k if not rational else Fraction(acc) / k)
    return MomentSequence(tuple(m), "transition", Mt.scalar_mode)


def _check_order(fc: _Sequence, k: int, cap: int) -> None:
    if not 1 <= k <= fc.K:
        raise ValueError(f"order {k} outside 1..{fc.K}")
    if k > cap:
        raise ValueError(f"order {k} exceeds supported maximum {cap}")


def thm12_sum(fc: FreeCumulantSequence, k: int):
    """``sum_{rho in NC(k)} (k + 1 - |rho|) fc_rho``: the k-th Rayleigh moment."""
    _check_order(fc, k, THM12_K_MAX)
    total = fc._zero()
    for sizes, _, n in _block_type_table(k):
        total = total + (k + 1 - len(sizes)) * n * _product(fc, sizes)
    return total


def thm31_prediction(fc: FreeCumulantSequence, k: int, ell: int):
    """Large-N limit of ``E[M_k(kappa_N)^ell]`` for deterministic cumulants.

    ``ell=1``: ``sum_rho |K(rho)| fc_rho``.
    ``ell=2``: ``sum_{rho1, rho2} |K(rho1)| |K(rho2)| fc_rho1 fc_rho2``.
    """
    if ell not in (1, 2):
        raise ValueError(f"ell must be 1 or 2, got {ell}")
    _check_order(fc, k, THM31_K_MAX)
    terms = [(ksize * n, _product(fc, sizes)) for sizes, ksize, n in _block_type_table(k)]
    total = fc._zero()
    if ell == 1:
        for w, v in terms:
            total = total + w * v
        return total
    for w1, v1 in terms:
        for w2, v2 in terms:
            total = total + w1 * w2 * v1 * v2
    return total


def rayleigh_moments(lam: Sequence, lam_tilde: Sequence, K: int) -> MomentSequence:
    """Moments of ``sum_i delta_{lam_i} - sum_j delta_{lam_tilde_j}``.

    Exact inputs give exact moments; anything else goes through the float
    power-sum kernel.
    """
    if len(lam) != len(lam_tilde) + 1:
        raise ValueError(f"need N and N-1 eigenvalues, got {len(lam)} and {len(lam_tilde)}")
    if K < 1:
        raise ValueError("K must be positive")
    vals = list(lam) + list(lam_tilde)
    if all(isinstance(v, Rational) for v in vals):
        out = []
        for k in range(1, K + 1):
            out.append(sum(Fraction(x) ** k for x in lam) - sum(Fraction(x) ** k for x in lam_tilde))
        return MomentSequence(tuple(out), "rayleigh")
    a = _accel.power_sums(np.ascontiguousarray(lam, dtype=np.float64), K)
    b = _accel.power_sums(np.ascontiguousarray(lam_tilde, dtype=np.float64), K)
    return MomentSequence(tuple(a - b), "rayleigh", "float")


# ---------------------------------------------------------------------------
# reference sequences

def semicircle_cumulants(K: int) -> FreeCumulantSequence:
    """Standard semicircle on [-2, 2]: ``fc_2 = 1``, every other cumulant 0."""
    return FreeCumulantSequence(tuple(1 if k == 2 else 0 for k in range(1, K + 1)))


def marchenko_pastur_cumulants(c, K: int) -> FreeCumulantSequence:
    """Free cumulants of the spectral limit of ``G G^*/M`` with ``c = N/M``: ``fc_k = c^{k-1}``."""
    c = Fraction(c) if isinstance(c, Rational) else c
    return FreeCumulantSequence(tuple(c ** (k - 1) for k in range(1, K + 1)))


def point_mass_moments(a, K: int) -> MomentSequence:
    return MomentSequence(tuple(a ** k for k in range(1, K + 1)), "transition")
