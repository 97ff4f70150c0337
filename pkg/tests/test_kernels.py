import numpy as np
import pytest

from conftest import random_graph
from mfrank import kernels, reproduce as rp
from mfrank.pagerank import power_iteration
from mfrank.synth import generate

compiled_only = pytest.mark.skipif("compiled" not in kernels.available_backends(),
                                   reason="compiled extension not built")


@pytest.fixture
def backend():
    before = kernels.backend_name()
    yield kernels.set_backend
    kernels.set_backend(before)


def _loop_pull_sum(indptr, indices, x):
    out = np.zeros(len(indptr) - 1)
    for i in range(len(out)):
        for e in range(indptr[i], indptr[i + 1]):
            out[i] += x[indices[e]]
    return out


@pytest.mark.parametrize("name", kernels.available_backends())
def test_pull_sum_against_loops(backend, name):
    backend(name)
    g = random_graph(5, 300, 2000, 0.2)
    x = np.random.default_rng(0).random(300)
    ref = _loop_pull_sum(g.in_indptr, g.in_indices, x)
    got = kernels.pull_sum(g.in_indptr, g.in_indices, x, rows=g.in_rows)
    np.testing.assert_allclose(got, ref, rtol=1e-14)


@pytest.mark.parametrize("name", kernels.available_backends())
def test_sweep_and_change(backend, name):
    backend(name)
    g = random_graph(6, 200, 900, 0.1)
    p = np.random.default_rng(1).random(200)
    ref = 0.01 + 0.85 * _loop_pull_sum(g.in_indptr, g.in_indices, p * g.inv_out)
    got = kernels.pagerank_sweep(g.in_indptr, g.in_indices, g.inv_out, p, 0.01, 0.85, rows=g.in_rows)
    np.testing.assert_allclose(got, ref, rtol=1e-14)
    old = np.array([1.0, 2.0, 0.0, 4.0])
    new = np.array([1.5, 2.0, 1e-320, 2.0])
    # relative to the new value; entries below the floor are skipped
    assert kernels.max_relative_change(new, old) == pytest.approx(1.0)


def test_isolated_rows_are_zero(backend):
    for name in kernels.available_backends():
        backend(name)
        out = kernels.pull_sum(np.array([0, 0, 1]), np.array([0]), np.array([2.0, 3.0]),
                               rows=np.array([1]))
        assert out.tolist() == [0.0, 2.0]


@compiled_only
def test_backends_bit_identical(backend):
    g = generate(rp.default_spec(20000, 3))
    backend("python")
    a = power_iteration(g).values
    backend("compiled")
    b = power_iteration(g).values
    assert np.array_equal(a, b)


@compiled_only
def test_parallel_close_to_serial(backend):
    backend("compiled")
    g = random_graph(8, 20000, 150000, 0.1)
    x = np.random.default_rng(2).random(20000)
    a = kernels.pull_sum(g.in_indptr, g.in_indices, x, threads=1)
    b = kernels.pull_sum(g.in_indptr, g.in_indices, x, threads=4)
    np.testing.assert_allclose(b, a, rtol=0, atol=1e-12)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.set_backend("fortran")
