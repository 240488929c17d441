import numpy as np
import pytest

from simule.covariance import kendall_tau_matrix, sample_covariance
from simule.errors import DataError, UsageError
from simule.linalg import cholesky, min_eigenvalue
from simule.simulation import (derive_seed, gen_model1, gen_model2, grid_adjacency,
                               nonparanormal_transform, ring_adjacency, sample_gaussian,
                               sample_nonparanormal, sample_tasks)


def test_model1_structure():
    truth = gen_model1(3, 30, seed=11)
    assert truth.num_tasks == 3 and truth.p == 30
    for omega, own in zip(truth.omegas, truth.individual_supports):
        assert np.array_equal(omega, omega.T)
        assert min_eigenvalue(omega) >= 0.5 - 1e-9
        cholesky(omega)
        off = omega - np.diag(np.diag(omega))
        assert set(np.unique(off)) <= {0.0, 0.5, 1.0}
        support = (own | truth.shared_support)
        np.fill_diagonal(support, False)
        assert np.array_equal(off != 0, support)


def test_model1_empty_graph():
    truth = gen_model1(1, 2, seed=0, shared_prob=0.0, individual_step=0.0)
    np.testing.assert_allclose(truth.omegas[0], 0.5 * np.eye(2))


def test_model1_densities():
    iu = np.triu_indices(50, 1)
    shared = np.mean([gen_model1(2, 50, s).shared_support[iu].mean() for s in range(50)])
    assert 0.08 <= shared <= 0.12
    own2 = np.mean([gen_model1(2, 50, s).individual_supports[1][iu].mean()
                    for s in range(50)])
    assert own2 == pytest.approx(0.10, abs=0.02)


def test_model1_deterministic():
    a, b = gen_model1(3, 20, 5), gen_model1(3, 20, 5)
    assert all(np.array_equal(x, y) for x, y in zip(a.omegas, b.omegas))
    c = gen_model1(3, 20, 6)
    assert not np.array_equal(a.omegas[0], c.omegas[0])


def test_ring_and_grid():
    ring = ring_adjacency(4)
    for j in range(4):
        for k in range(4):
            assert ring[j, k] == ((j - k) % 4 in (1, 3))
    grid = grid_adjacency(4)
    assert grid.sum() // 2 == 4
    assert np.all(grid.sum(axis=0) == 2)
    g9 = grid_adjacency(9)
    assert g9.sum() // 2 == 12
    g10 = grid_adjacency(10)
    assert np.array_equal(g10, g10.T) and not np.any(np.diag(g10))


def test_model2():
    truth = gen_model2(16)
    assert truth.num_tasks == 2
    for omega in truth.omegas:
        cholesky(omega)
        assert np.all(np.diag(omega) == 1.0)
    tot = truth.total_supports()
    assert np.array_equal(truth.shared_support, tot[0] & tot[1])
    for own, t in zip(truth.individual_supports, tot):
        assert np.array_equal(own | truth.shared_support, t)
        assert not np.any(own & truth.shared_support)
    with pytest.raises(UsageError):
        gen_model2(3)


def test_sample_gaussian_identity_covariance():
    # three standard deviations per entry: 1/sqrt(n) off the diagonal,
    # sqrt(2/n) for a sample variance
    n = 10000
    bound = 3 / np.sqrt(n) * np.where(np.eye(4, dtype=bool), np.sqrt(2), 1.0)
    for seed in range(5):
        s = sample_covariance(sample_gaussian(np.eye(4), n, seed=seed)).matrix
        assert np.all(np.abs(s - np.eye(4)) <= bound)


def test_sampling_deterministic_and_validated():
    omega = gen_model1(1, 5, 1).omegas[0]
    a = sample_gaussian(omega, 50, seed=9)
    b = sample_gaussian(omega, 50, seed=9)
    assert np.array_equal(a.samples, b.samples)
    with pytest.raises(DataError):
        sample_gaussian(omega, 1, seed=9)


def test_nonparanormal_transform_examples():
    assert nonparanormal_transform(np.array(-4.0)) == -2.0
    assert nonparanormal_transform(np.array(0.0)) == 0.0
    x = np.linspace(-3, 3, 101)
    assert np.all(np.diff(nonparanormal_transform(x)) > 0)


def test_nonparanormal_preserves_ranks():
    omega = gen_model1(1, 6, 2).omegas[0]
    g = sample_gaussian(omega, 80, seed=4)
    npn = sample_nonparanormal(omega, 80, seed=4)
    assert np.array_equal(kendall_tau_matrix(g), kendall_tau_matrix(npn))


def test_sample_tasks_streams():
    truth = gen_model1(3, 8, 1)
    tasks = sample_tasks(truth, 40, seed=1)
    assert [t.task_id for t in tasks] == [1, 2, 3]
    again = sample_tasks(truth, 40, seed=1)
    assert all(np.array_equal(a.samples, b.samples) for a, b in zip(tasks, again))
    assert derive_seed(1, 1001) != derive_seed(1, 1002)
    with pytest.raises(UsageError):
        sample_tasks(truth, 40, seed=1, dist="cauchy")
