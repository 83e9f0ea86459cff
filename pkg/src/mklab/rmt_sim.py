"""Rotationally invariant Hermitian ensembles and the Rayleigh-measure experiment.

Normalizations:

* GUE: independent upper-triangular entries, ``E|X_ij|^2 = 1/N`` off the
  diagonal and real diagonal entries of variance ``1/N``. The spectrum
  converges to the semicircle on [-2, 2].
* Wishart: ``G G^* / M`` with ``G`` an ``N x M`` complex standard Gaussian
  matrix and ``c = N/M``. The limit has free cumulants ``c^{k-1}``.
* Fixed spectrum: ``U diag(s) U^*`` with Haar ``U``.

Every trial draws from its own generator, ``PCG64(SeedSequence((seed,
trial)))``, so a trial's stream depends only on the pair ``(seed, trial)``
and not on scheduling.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Sequence

import numpy as np

from . import _accel
from .errors import InterlacingError, NumericalError, SizeLimitError
from .mk_transform import (
    FreeCumulantSequence,
    MomentSequence,
    marchenko_pastur_cumulants,
    moments_to_cumulants,
    rayleigh_moments,
    semicircle_cumulants,
    thm31_prediction,
)

FAMILIES = ("gue", "fixed", "wishart")
HERMITIAN_TOL = 1e-10
INTERLACING_RTOL = 1e-8
QL_MAX_ITER = 60
K_MAX = 8
MIN_TRIALS = 30

# a/N allowance added to 3 standard errors in the Monte Carlo gates
ALLOWANCE_L1 = 30.0
ALLOWANCE_L2 = 60.0
GATE_SIGMAS = 3.0

__all__ = [
    "EnsembleSpec",
    "SpectrumSample",
    "ExperimentResult",
    "SecondMomentEstimate",
    "trial_rng",
    "sample_haar_unitary",
    "sample_haar_unitary_batch",
    "sample_matrix",
    "eigen_hermitian",
    "eigen_residual",
    "principal_submatrix",
    "check_interlacing",
    "draw_sample",
    "run_concentration_experiment",
    "estimate_second_moment",
    "mc_mixed_moment",
    "within_gate",
    "thread_count",
]


@dataclass(frozen=True)
class EnsembleSpec:
    family: str
    N: int
    seed: int = 0
    spectrum: tuple | None = None
    M: int | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if self.N < 2:
            raise ValueError(f"N must be at least 2, got {self.N}")
        if self.family == "fixed":
            if self.spectrum is None or len(self.spectrum) != self.N:
                raise ValueError("fixed-spectrum ensemble needs exactly N eigenvalues")
            object.__setattr__(self, "spectrum", tuple(self.spectrum))
        if self.family == "wishart" and (self.M is None or self.M < 1):
            raise ValueError("Wishart ensemble needs M >= 1")

    @classmethod
    def gue(cls, N: int, seed: int = 0) -> "EnsembleSpec":
        return cls("gue", N, seed)

    @classmethod
    def fixed(cls, spectrum: Sequence, seed: int = 0) -> "EnsembleSpec":
        return cls("fixed", len(spectrum), seed, spectrum=tuple(spectrum))

    @classmethod
    def wishart(cls, N: int, c, seed: int = 0) -> "EnsembleSpec":
        """Wishart with ``M = N / c``; ``N / c`` must be an integer."""
        m = Fraction(N) / Fraction(c).limit_denominator(10**6)
        if m.denominator != 1:
            raise ValueError(f"N/c = {m} is not an integer")
        return cls("wishart", N, seed, M=int(m))

    @property
    def c(self) -> Fraction | None:
        return Fraction(self.N, self.M) if self.family == "wishart" else None

    def to_json(self) -> dict:
        d = asdict(self)
        d["spectrum"] = None if self.spectrum is None else [
            f"{Fraction(x).numerator}/{Fraction(x).denominator}" if isinstance(x, Rational) else float(x)
            for x in self.spectrum
        ]
        return d


@dataclass(frozen=True)
class SpectrumSample:
    lam: np.ndarray
    lam_tilde: np.ndarray
    interlacing_ok: bool
    seed_used: tuple[int, int]
    deleted_entry: float


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((int(seed), int(trial)))))


def _complex_gaussian(rng, shape):
    # E|z|^2 = 1
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def sample_haar_unitary(N: int, rng: np.random.Generator) -> np.ndarray:
    """Haar unitary via QR of a complex Gaussian matrix, R with positive diagonal."""
    return sample_haar_unitary_batch(N, 1, rng)[0]


def sample_haar_unitary_batch(N: int, size: int, rng: np.random.Generator) -> np.ndarray:
    if N < 1:
        raise ValueError("N must be positive")
    z = _complex_gaussian(rng, (size, N, N))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=1, axis2=2)
    return q * (d / np.abs(d))[:, None, :]


def _hermitize(y: np.ndarray) -> np.ndarray:
    return (y + y.conj().T) / 2.0


def sample_matrix(spec: EnsembleSpec, rng: np.random.Generator) -> np.ndarray:
    n = spec.N
    if spec.family == "gue":
        x = np.zeros((n, n), dtype=np.complex128)
        iu = np.triu_indices(n, 1)
        x[iu] = _complex_gaussian(rng, len(iu[0])) / np.sqrt(n)
        x = x + x.conj().T
        x[np.diag_indices(n)] = rng.standard_normal(n) / np.sqrt(n)
        return x
    if spec.family == "fixed":
        s = np.asarray([float(v) for v in spec.spectrum])
        u = sample_haar_unitary(n, rng)
        if np.all(s == s[0]):
            # U (aI) U^* is aI; skip the rounding of the product
            return s[0] * np.eye(n, dtype=np.complex128)
        return _hermitize((u * s) @ u.conj().T)
    g = _complex_gaussian(rng, (n, spec.M))
    return _hermitize(g @ g.conj().T / spec.M)


def eigen_hermitian(x: np.ndarray, method: str = "lapack") -> np.ndarray:
    """Eigenvalues of a Hermitian matrix in nondecreasing order.

    ``method="householder"`` runs the in-package Householder reduction and
    implicit-shift QL kernels; ``"lapack"`` calls ``numpy.linalg.eigvalsh``.
    """
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {x.shape}")
    if x.size and np.max(np.abs(x - x.conj().T)) > HERMITIAN_TOL:
        raise ValueError("matrix is not Hermitian within 1e-10")
    if method == "lapack":
        return np.linalg.eigvalsh(x)
    if method != "householder":
        raise ValueError(f"unknown eigen method {method!r}")
    d, e = _accel.tridiagonalize(np.ascontiguousarray(x, dtype=np.complex128))
    w, ok = _accel.tridiag_eigvals(d, e, QL_MAX_ITER)
    if not ok:
        raise NumericalError(f"QL iteration did not converge in {QL_MAX_ITER} sweeps per eigenvalue")
    return w


def eigen_residual(x: np.ndarray, w: np.ndarray) -> float:
    """``max_i ||X v_i - w_i v_i|| / ||X||`` using reference eigenvectors."""
    _, v = np.linalg.eigh(x)
    res = np.linalg.norm(x @ v - v * w, axis=0)
    scale = np.linalg.norm(x, 2) or 1.0
    return float(res.max() / scale)


def principal_submatrix(x: np.ndarray) -> np.ndarray:
    """Drop the last row and column."""
    x = np.asarray(x)
    if x.shape[0] < 2:
        raise ValueError("principal submatrix needs N >= 2")
    return x[:-1, :-1]


def check_interlacing(lam: Sequence[float], lam_tilde: Sequence[float], tol: float | None = None) -> bool:
    lam = np.asarray(lam, dtype=float)
    lt = np.asarray(lam_tilde, dtype=float)
    if lam.shape[0] != lt.shape[0] + 1:
        raise ValueError(f"need N and N-1 values, got {lam.shape[0]} and {lt.shape[0]}")
    if tol is None:
        tol = INTERLACING_RTOL * (1.0 + float(np.max(np.abs(lam))) if lam.size else 1.0)
    return bool(np.all(lam[:-1] <= lt + tol) and np.all(lt <= lam[1:] + tol))


def draw_sample(spec: EnsembleSpec, trial: int, eigen_method: str = "lapack") -> SpectrumSample:
    rng = trial_rng(spec.seed, trial)
    x = sample_matrix(spec, rng)
    lam = eigen_hermitian(x, eigen_method)
    lt = eigen_hermitian(principal_submatrix(x), eigen_method)
    return SpectrumSample(lam, lt, check_interlacing(lam, lt), (spec.seed, trial), float(x[-1, -1].real))


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("MKLAB_THREADS", "1")))
    except ValueError:
        return 1


def predicted_cumulants(spec: EnsembleSpec, K: int) -> FreeCumulantSequence:
    """Free cumulants the ensemble's Rayleigh moments are compared with."""
    if spec.family == "gue":
        return semicircle_cumulants(K)
    if spec.family == "wishart":
        return marchenko_pastur_cumulants(spec.c, K)
    s = spec.spectrum
    n = len(s)
    if all(isinstance(v, Rational) for v in s):
        moments = tuple(sum(Fraction(v) ** k for v in s) / n for k in range(1, K + 1))
    else:
        arr = np.asarray(s, dtype=float)
        moments = tuple(float(np.mean(arr ** k)) for k in range(1, K + 1))
    return moments_to_cumulants(MomentSequence(moments, "transition"))


@dataclass
class ExperimentResult:
    spec: EnsembleSpec
    k_max: int
    trials: int
    mean: np.ndarray
    var: np.ndarray
    stderr: np.ndarray
    mean_sq: np.ndarray
    stderr_sq: np.ndarray
    pred_l1: list
    pred_l2: list
    z1: np.ndarray
    z2: np.ndarray
    interlacing_checked: int = 0
    interlacing_violations: int = 0
    eigen_method: str = "lapack"
    samples: np.ndarray = field(default=None, repr=False)

    CSV_COLUMNS = ("k", "mean", "var", "stderr", "pred_l1", "pred_l2", "z1", "z2")

    def rows(self) -> list[dict]:
        return [
            {
                "k": k + 1,
                "mean": float(self.mean[k]),
                "var": float(self.var[k]),
                "stderr": float(self.stderr[k]),
                "pred_l1": float(self.pred_l1[k]),
                "pred_l2": float(self.pred_l2[k]),
                "z1": float(self.z1[k]),
                "z2": float(self.z2[k]),
            }
            for k in range(self.k_max)
        ]

    def gate(self, a1: float = ALLOWANCE_L1, a2: float = ALLOWANCE_L2) -> list[tuple[bool, bool]]:
        """Per-k pass flags for the first and second moment gates."""
        n = self.spec.N
        return [
            (
                within_gate(self.mean[k], self.stderr[k], float(self.pred_l1[k]), n, a1),
                within_gate(self.mean_sq[k], self.stderr_sq[k], float(self.pred_l2[k]), n, a2),
            )
            for k in range(self.k_max)
        ]

    def to_json(self) -> dict:
        def fmt(v):
            return f"{v.numerator}/{v.denominator}" if isinstance(v, Fraction) else float(v)

        return {
            "ensemble": self.spec.to_json(),
            "k_max": self.k_max,
            "trials": self.trials,
            "eigen_method": self.eigen_method,
            "interlacing_checked": self.interlacing_checked,
            "interlacing_violations": self.interlacing_violations,
            "per_k": [
                dict(row, mean_sq=float(self.mean_sq[k]), stderr_sq=float(self.stderr_sq[k]),
                     pred_l1_exact=fmt(self.pred_l1[k]), pred_l2_exact=fmt(self.pred_l2[k]))
                for k, row in enumerate(self.rows())
            ],
        }


def within_gate(mean: float, stderr: float, prediction: float, N: int, allowance: float) -> bool:
    """``|mean - prediction| <= 3 stderr + allowance / N``."""
    return bool(abs(mean - prediction) <= GATE_SIGMAS * stderr + allowance / N)


def _z(diff: np.ndarray, se: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, diff / np.where(se > 0, se, 1.0), np.where(diff == 0, 0.0, np.inf * np.sign(diff)))
    return z


def run_concentration_experiment(
    spec: EnsembleSpec,
    k_max: int,
    T: int,
    eigen_method: str = "lapack",
    threads: int | None = None,
    keep_samples: bool = False,
) -> ExperimentResult:
    """Monte Carlo estimate of ``E[M_k(kappa_N)]`` and ``E[M_k(kappa_N)^2]``.

    Each trial samples a matrix, diagonalizes it and its principal
    submatrix, checks interlacing and records the Rayleigh moments. The
    aggregates are compared with the large-N predictions built from the
    ensemble's free cumulants.

    Raises
    ------
    InterlacingError
        On the first trial whose spectra fail to interlace.
    """
    if not 1 <= k_max <= K_MAX:
        raise SizeLimitError(f"k_max={k_max} outside 1..{K_MAX}")
    if T < MIN_TRIALS:
        raise SizeLimitError(f"need at least {MIN_TRIALS} trials, got {T}")
    threads = thread_count() if threads is None else max(1, threads)

    def one(trial: int) -> np.ndarray:
        s = draw_sample(spec, trial, eigen_method)
        if not s.interlacing_ok:
            gap = max(np.max(s.lam[:-1] - s.lam_tilde), np.max(s.lam_tilde - s.lam[1:]))
            raise InterlacingError(
                f"trial {trial} (seed {spec.seed}, N={spec.N}, {spec.family}) "
                f"violates interlacing by {gap:.3e}"
            )
        return np.asarray(rayleigh_moments(s.lam, s.lam_tilde, k_max).values)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, range(T)))
    else:
        rows = [one(t) for t in range(T)]
    data = np.vstack(rows)

    mean = data.mean(axis=0)
    var = data.var(axis=0, ddof=1)
    stderr = np.sqrt(var / T)
    sq = data ** 2
    mean_sq = sq.mean(axis=0)
    stderr_sq = np.sqrt(sq.var(axis=0, ddof=1) / T)

    fc = predicted_cumulants(spec, k_max)
    pred_l1 = [thm31_prediction(fc, k, 1) for k in range(1, k_max + 1)]
    pred_l2 = [thm31_prediction(fc, k, 2) for k in range(1, k_max + 1)]
    z1 = _z(mean - np.array([float(p) for p in pred_l1]), stderr)
    z2 = _z(mean_sq - np.array([float(p) for p in pred_l2]), stderr_sq)
    return ExperimentResult(
        spec, k_max, T, mean, var, stderr, mean_sq, stderr_sq, pred_l1, pred_l2, z1, z2,
        interlacing_checked=T, interlacing_violations=0, eigen_method=eigen_method,
        samples=data if keep_samples else None,
    )


@dataclass(frozen=True)
class SecondMomentEstimate:
    mean: float
    stderr: float
    prediction: object

    def within(self, N: int, allowance: float = ALLOWANCE_L2) -> bool:
        return within_gate(self.mean, self.stderr, float(self.prediction), N, allowance)


def estimate_second_moment(spec: EnsembleSpec, k: int, T: int, **kwargs) -> SecondMomentEstimate:
    """Empirical ``E[M_k(kappa_N)^2]`` with its standard error and the large-N value."""
    res = run_concentration_experiment(spec, k, T, **kwargs)
    return SecondMomentEstimate(float(res.mean_sq[k - 1]), float(res.stderr_sq[k - 1]), res.pred_l2[k - 1])


def mc_mixed_moment(
    A: Sequence[np.ndarray],
    B: Sequence[np.ndarray],
    samples: int,
    rng: np.random.Generator,
    batch: int = 10_000,
) -> tuple[complex, float]:
    """Monte Carlo ``E Tr[(A_1 U B_1 U^*) ... (A_k U B_k U^*)]`` and its standard error."""
    n = np.asarray(A[0]).shape[0]
    a = [np.asarray(m, dtype=np.complex128) for m in A]
    b = [np.asarray(m, dtype=np.complex128) for m in B]
    vals = []
    done = 0
    while done < samples:
        m = min(batch, samples - done)
        u = sample_haar_unitary_batch(n, m, rng)
        us = np.conj(np.transpose(u, (0, 2, 1)))
        prod = np.broadcast_to(np.eye(n, dtype=np.complex128), (m, n, n))
        for ai, bi in zip(a, b):
            prod = prod @ (ai @ u @ bi @ us)
        vals.append(np.trace(prod, axis1=1, axis2=2))
        done += m
    v = np.concatenate(vals)
    se = float(np.sqrt((np.var(v.real, ddof=1) + np.var(v.imag, ddof=1)) / len(v)))
    return complex(v.mean()), se
