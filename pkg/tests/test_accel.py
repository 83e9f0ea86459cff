import os
import subprocess
import sys

import numpy as np
import pytest

from mklab import _accel
from mklab.nc_lattice import NonCrossingPartition as NC, enumerate_nc, leq, nc_firsts
from mklab.perm_group import Permutation, all_permutations

needs_numba = pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba not installed")


def test_kernel_sets_match():
    assert set(_accel.NUMPY_KERNELS) == set(_accel._LOOP_KERNELS)


@pytest.mark.parametrize("impl", ["numpy", "loop"])
def test_cycle_kernels_against_permutation_class(impl):
    kernels = _accel.NUMPY_KERNELS if impl == "numpy" else _accel._LOOP_KERNELS
    perms = all_permutations(5)
    counts = kernels["cycle_counts"](np.ascontiguousarray(perms))
    lengths = kernels["cycle_length_counts"](np.ascontiguousarray(perms))
    for row, c, m in zip(perms, counts, lengths):
        p = Permutation.from_array(row)
        assert c == p.num_cycles
        expect = np.zeros(6, dtype=np.int64)
        for cyc in p.cycles:
            expect[len(cyc)] += 1
        assert np.array_equal(m, expect)


@pytest.mark.parametrize("impl", ["numpy", "loop"])
def test_refines_mask_is_leq(impl):
    kernel = (_accel.NUMPY_KERNELS if impl == "numpy" else _accel._LOOP_KERNELS)["refines_mask"]
    parts = enumerate_nc(5)
    firsts = nc_firsts(5)
    for rho in parts:
        mask = kernel(firsts, rho.firsts())
        assert list(mask) == [leq(nu, rho) for nu in parts]


@needs_numba
def test_numba_and_numpy_agree():
    rng = np.random.default_rng(0)
    perms = np.ascontiguousarray(all_permutations(6)[rng.permutation(720)[:200]])
    nb, npk = _accel.NUMBA_KERNELS, _accel.NUMPY_KERNELS
    assert np.array_equal(nb["cycle_counts"](perms), npk["cycle_counts"](perms))
    assert np.array_equal(nb["cycle_length_counts"](perms), npk["cycle_length_counts"](perms))
    f = nc_firsts(6)
    top = NC.parse("{1,4|2,3|5,6}").firsts()
    assert np.array_equal(nb["refines_mask"](f, top), npk["refines_mask"](f, top))
    x = rng.normal(size=500)
    assert np.allclose(nb["power_sums"](x, 8), npk["power_sums"](x, 8), rtol=1e-12)
    g = rng.normal(size=(40, 40)) + 1j * rng.normal(size=(40, 40))
    h = (g + g.conj().T) / 2
    d1, e1 = nb["tridiagonalize"](h)
    d2, e2 = npk["tridiagonalize"](h)
    w1, ok1 = nb["tridiag_eigvals"](d1, e1, 60)
    w2, ok2 = npk["tridiag_eigvals"](d2, e2, 60)
    assert ok1 and ok2
    assert np.allclose(w1, np.linalg.eigvalsh(h), atol=1e-11)
    assert np.allclose(w2, np.linalg.eigvalsh(h), atol=1e-11)


def test_power_sums_exact_small():
    for kernels in (_accel.NUMPY_KERNELS, _accel._LOOP_KERNELS):
        assert list(kernels["power_sums"](np.array([1.0, 2.0, -1.0]), 3)) == [2.0, 6.0, 8.0]


def test_env_flag_selects_numpy_backend():
    env = dict(os.environ, MKLAB_DISABLE_NUMBA="1")
    code = ("from mklab import _accel; from mklab.nc_lattice import *; "
            "print(_accel.backend(), mobius_nc(NonCrossingPartition.zero(6), NonCrossingPartition.one(6)))")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["numpy", "-42"]
