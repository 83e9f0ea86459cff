import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mklab.errors import SizeLimitError
from mklab.nc_lattice import NonCrossingPartition as NC, enumerate_nc, kreweras, leq, mobius_nc
from mklab.perm_group import (
    CycleType,
    Permutation,
    all_permutations,
    complement_via_group,
    embed_nc,
    gamma,
    gamma_two,
    geodesic_pairs_two_cycle,
    integer_partitions,
    is_geodesic,
    length,
)
from mklab.weingarten import mu_asymptotic
from oracles import all_perms, brute_length, brute_perm_cycles


def perm_strategy(max_k=8):
    return st.integers(1, max_k).flatmap(lambda k: st.permutations(range(1, k + 1))).map(Permutation)


def test_cycle_notation_round_trip():
    s = Permutation.parse("(1,3,2,5)(4)(6,9)(7,8)")
    assert str(s) == "(1,3,2,5)(4)(6,9)(7,8)"
    assert s(1) == 3 and s(5) == 1
    assert s.cycle_type == CycleType((4, 2, 2, 1))


def test_composition_is_right_to_left():
    s = Permutation.parse("(1,2)", 3)
    t = Permutation.parse("(2,3)", 3)
    assert (s * t)(2) == s(t(2)) == 3
    assert (s * t)(1) == 2


def test_length_examples():
    assert length(Permutation.identity(5)) == 0
    assert length(Permutation.parse("(1,2)", 4)) == 1
    assert length(gamma(6)) == 5


@pytest.mark.parametrize("k", range(1, 6))
def test_length_is_word_length(k):
    for p in all_perms(k):
        assert length(Permutation(p)) == brute_length(p)


@settings(max_examples=200, deadline=None)
@given(perm_strategy())
def test_cycles_and_inverse(s):
    assert s.num_cycles == brute_perm_cycles(s.images)
    assert s.num_cycles + s.length == s.k
    assert s * s.inverse() == Permutation.identity(s.k)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 8).flatmap(lambda k: st.tuples(st.permutations(range(1, k + 1)),
                                                     st.permutations(range(1, k + 1)))))
def test_conjugation_invariance(pair):
    s, p = Permutation(pair[0]), Permutation(pair[1])
    assert (p * s * p.inverse()).length == s.length


def test_integer_partitions():
    assert [t.parts for t in integer_partitions(4)] == [(4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)]
    assert CycleType((1, 3)).representative().cycle_type == CycleType((3, 1))


def test_all_permutations_cap():
    assert all_permutations(4).shape == (24, 4)
    with pytest.raises(SizeLimitError):
        all_permutations(11)


def test_embedding_examples():
    assert embed_nc(NC.zero(5)) == Permutation.identity(5)
    assert embed_nc(NC.one(5)) == gamma(5)
    assert str(embed_nc(NC.parse("{1,7|2,5,6|3|4|8,9}"))) == "(1,7)(2,5,6)(3)(4)(8,9)"


def test_is_geodesic_examples():
    g = gamma(3)
    assert is_geodesic(Permutation.identity(3), g)
    assert is_geodesic(g, g)
    # (1,3) is the image of the non-crossing partition {1,3|2}, so it lies on a geodesic
    assert is_geodesic(Permutation.parse("(1,3)", 3), g)
    assert not is_geodesic(Permutation.parse("(1,3,2)"), g)


@pytest.mark.parametrize("k", range(1, 7))
def test_geodesic_set_is_image_of_nc(k):
    g = gamma(k)
    on_geodesic = {Permutation(p) for p in all_perms(k) if is_geodesic(Permutation(p), g)}
    assert on_geodesic == {embed_nc(p) for p in enumerate_nc(k)}


def test_complement_examples():
    rho = NC.parse("{1,7|2,5,6|3|4|8,9}")
    assert complement_via_group(rho) == embed_nc(NC.parse("{1,6|2,3,4|5|7,9|8}"))
    assert complement_via_group(NC.zero(4)) == gamma(4)
    assert complement_via_group(NC.one(4)) == Permutation.identity(4)


@pytest.mark.parametrize("k", range(1, 8))
def test_isomorphism(k):
    parts = enumerate_nc(k)
    emb = {p: embed_nc(p) for p in parts}
    for rho in parts:
        assert complement_via_group(rho) == emb[kreweras(rho)]
    if k > 6:
        return
    for nu in parts:
        for rho in parts:
            s, p = emb[nu], emb[rho]
            assert is_geodesic(s, p) == leq(nu, rho)
            if leq(nu, rho):
                assert mu_asymptotic(s.inverse() * p) == mobius_nc(nu, rho)


def test_two_cycle_counts():
    assert len(geodesic_pairs_two_cycle(1)) == 1
    assert len(geodesic_pairs_two_cycle(2)) == 9
    for k in (3, 4):
        below = sum(1 for r in enumerate_nc(k) for n in enumerate_nc(k) if leq(n, r))
        assert len(geodesic_pairs_two_cycle(k, method="nc")) == below ** 2


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_two_cycle_methods_agree(k):
    a = set(geodesic_pairs_two_cycle(k, method="exhaustive"))
    b = set(geodesic_pairs_two_cycle(k, method="nc"))
    assert a == b
    g = gamma_two(k)
    for s, p in a:
        assert s.length + (s.inverse() * p).length + (p.inverse() * g).length == 2 * k - 2
        # pi restricted to each half is P_rho; #(pi^-1 g) = |K(rho1)| + |K(rho2)|
        left = NC.from_blocks([c for c in p.cycles if c[0] <= k], k)
        right = NC.from_blocks([tuple(x - k for x in c) for c in p.cycles if c[0] > k], k)
        assert (p.inverse() * g).num_cycles == len(kreweras(left)) + len(kreweras(right))


def test_two_cycle_cap():
    with pytest.raises(SizeLimitError):
        geodesic_pairs_two_cycle(5, method="exhaustive")
    assert len(geodesic_pairs_two_cycle(5)) > 0
