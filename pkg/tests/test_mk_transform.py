import json
from fractions import Fraction
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mklab.mk_transform import (
    FreeCumulantSequence,
    MomentSequence,
    cumulants_to_moments,
    marchenko_pastur_cumulants,
    mk_forward,
    mk_inverse,
    moments_to_cumulants,
    partition_value,
    permutation_value,
    point_mass_moments,
    rayleigh_moments,
    semicircle_cumulants,
    thm12_sum,
    thm31_prediction,
)
from mklab.nc_lattice import NonCrossingPartition as NC
from mklab.perm_group import Permutation
from oracles import brute_nc, nc_sum_moments

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=7)


def seqs(K):
    return st.lists(rationals, min_size=K, max_size=K).map(tuple)


def test_mode_resolution():
    assert MomentSequence((1, Fraction(1, 2))).scalar_mode == "rational"
    assert MomentSequence((1, 0.5)).scalar_mode == "float"
    assert MomentSequence((1, 2), scalar_mode="float").values == (1.0, 2.0)
    with pytest.raises(ValueError):
        MomentSequence((1,), kind="other")
    with pytest.raises(ValueError):
        MomentSequence(())


def test_json_round_trip():
    m = MomentSequence((Fraction(1, 3), 2, Fraction(-7, 2)), "transition")
    data = json.loads(json.dumps(m.to_json()))
    assert data["values"][0] == "1/3"
    assert MomentSequence.from_json(data) == m
    fc = FreeCumulantSequence((0.5, 1.25))
    assert FreeCumulantSequence.from_json(fc.to_json()) == fc


def test_partition_and_permutation_values():
    fc = FreeCumulantSequence((2, 3, 5))
    assert partition_value(fc, NC.parse("{1,3|2}")) == 6
    assert permutation_value(fc, Permutation.parse("(1,2,3)")) == 5


@settings(max_examples=40, deadline=None)
@given(seqs(6))
def test_cumulants_to_moments_matches_brute_force(vals):
    fc = FreeCumulantSequence(vals)
    m = cumulants_to_moments(fc)
    for k in range(1, 7):
        assert m[k] == nc_sum_moments(vals, k)


def test_reference_examples():
    for a in (2, -1):
        fc = moments_to_cumulants(point_mass_moments(a, 4))
        assert fc.values == (a, 0, 0, 0)
    fc = moments_to_cumulants(MomentSequence((0, 1, 0, 2, 0, 5)))
    assert fc.values == (0, 1, 0, 0, 0, 0)
    assert moments_to_cumulants(MomentSequence((0,) * 5)).values == (0,) * 5
    assert cumulants_to_moments(semicircle_cumulants(6)).values == (0, 1, 0, 2, 0, 5)


def test_marchenko_pastur_moments_are_narayana():
    c = Fraction(1, 2)
    m = cumulants_to_moments(marchenko_pastur_cumulants(c, 6))
    for k in range(1, 7):
        narayana = sum(Fraction(comb(k, j) * comb(k, j - 1), k) * c ** (k - j) for j in range(1, k + 1))
        assert m[k] == narayana
    assert m.values[:4] == (1, Fraction(3, 2), Fraction(11, 4), Fraction(45, 8))


@settings(max_examples=50, deadline=None)
@given(seqs(10))
def test_round_trips(vals):
    m = MomentSequence(vals)
    assert cumulants_to_moments(moments_to_cumulants(m)).values == m.values
    assert mk_inverse(mk_forward(m)).values == m.values
    assert mk_forward(mk_inverse(m)).values == m.values


def test_forward_examples():
    tau = mk_forward(cumulants_to_moments(semicircle_cumulants(6)))
    assert tau.values == (0, 2, 0, 6, 0, 20)
    assert tau.kind == "rayleigh"
    assert mk_forward(point_mass_moments(3, 5)).values == point_mass_moments(3, 5).values


@settings(max_examples=30, deadline=None)
@given(seqs(7))
def test_thm12_matches_recursion_and_brute_force(vals):
    fc = FreeCumulantSequence(vals)
    tau = mk_forward(cumulants_to_moments(fc))
    for k in range(1, 8):
        brute = Fraction(0)
        for p in brute_nc(k):
            v = Fraction(k + 1 - len(p))
            for b in p:
                v *= vals[len(b) - 1]
            brute += v
        assert thm12_sum(fc, k) == tau[k] == brute


@settings(max_examples=30, deadline=None)
@given(seqs(6))
def test_second_order_prediction_is_square(vals):
    fc = FreeCumulantSequence(vals)
    for k in range(1, 7):
        l1 = thm31_prediction(fc, k, 1)
        assert l1 == thm12_sum(fc, k)
        assert thm31_prediction(fc, k, 2) == l1 * l1


def test_prediction_guards():
    fc = semicircle_cumulants(9)
    with pytest.raises(ValueError):
        thm31_prediction(fc, 2, 3)
    with pytest.raises(ValueError):
        thm31_prediction(fc, 9, 1)
    with pytest.raises(ValueError):
        thm12_sum(fc, 10)


def test_semicircle_predictions():
    fc = semicircle_cumulants(2)
    assert thm31_prediction(fc, 2, 1) == 2
    assert thm31_prediction(fc, 2, 2) == 4


def test_rayleigh_moments_exact():
    r = rayleigh_moments([0, 1], [Fraction(1, 2)], 2)
    assert r.values == (Fraction(1, 2), Fraction(3, 4))
    assert r.scalar_mode == "rational"
    with pytest.raises(ValueError):
        rayleigh_moments([0, 1], [0, 1], 2)


@pytest.mark.parametrize("seed", range(5))
def test_rayleigh_is_spectral_measure_of_deleted_vector(seed):
    # The transition measure of (lam, lam_tilde) is the spectral measure of X at e_N,
    # whose k-th moment is (X^k)_{NN}.
    rng = np.random.default_rng(seed)
    n = 6
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    x = (g + g.conj().T) / 4
    lam = np.linalg.eigvalsh(x)
    lt = np.linalg.eigvalsh(x[:-1, :-1])
    m = mk_inverse(rayleigh_moments(lam, lt, 6))
    power = np.eye(n, dtype=complex)
    for k in range(1, 7):
        power = power @ x
        assert m[k] == pytest.approx(power[-1, -1].real, rel=1e-9, abs=1e-9)
