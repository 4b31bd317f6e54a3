import math

import numpy as np
import pytest

import ksapprox


def test_covariances():
    assert ksapprox.cov("fbm", 1.0, 2.0, 3.0) == pytest.approx(2.0)
    assert ksapprox.cov("fbm", 0.75, 1.0, 1.0) == pytest.approx(1.0)
    assert ksapprox.cov("lei-nualart-x", 0.5, 1.0, 1.0) == pytest.approx(2.0765588543600631, rel=1e-12)
    assert ksapprox.decomposition_constant(0.5) == pytest.approx(0.37556277223247124, rel=1e-12)


def test_decomposition_identity():
    H, t, s = 0.6, 0.4, 0.9
    c1 = ksapprox.decomposition_constant(H)
    lhs = c1**2 * ksapprox.cov("lei-nualart-x", H, t, s) + ksapprox.cov("fbm", H, t, s)
    assert lhs == pytest.approx(ksapprox.cov("sub-fbm", H, t, s), abs=1e-12)


def test_kernel_matches_covariance():
    k = ksapprox.Kernel.fbm(0.75)
    assert ksapprox.kernel_inner_product(k, 1.0, 0.5) == pytest.approx(ksapprox.cov("fbm", 0.75, 1.0, 0.5), abs=1e-7)
    assert k(1.0, 2.0) == 0.0


def test_theta_gate():
    assert not ksapprox.validate_theta(2 * math.pi / 3, 0.3)["admissible"]
    assert ksapprox.validate_theta(2 * math.pi / 3, 0.75)["admissible"]
    with pytest.raises(ValueError):
        ksapprox.transform(ksapprox.Kernel.fbm(0.3), [1.0], 0.2, 2 * math.pi / 3, seed=1)


def test_poisson_jumps():
    jumps = ksapprox.poisson_jumps(1000.0, seed=3)
    assert np.all(np.diff(jumps) > 0)
    assert abs(len(jumps) - 1000) < 5 * math.sqrt(1000)
    assert np.array_equal(jumps, ksapprox.poisson_jumps(1000.0, seed=3))


def test_transform_is_reproducible():
    k = ksapprox.Kernel.fbm(1.0)
    a = ksapprox.transform(k, [0.5, 1.0], 0.2, math.pi / 2, seed=7, stream=2)
    b = ksapprox.transform(k, [0.5, 1.0], 0.2, math.pi / 2, seed=7, stream=2)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
    assert a[0].shape == (2,)


def test_ensemble_brownian():
    stats = ksapprox.run_ensemble(ksapprox.Kernel.fbm(1.0), [0.5, 1.0], 0.1, math.pi / 2, replicas=2000, seed=11)
    cos = stats["channels"]["cos"]
    target = np.array([[0.5, 0.5], [0.5, 1.0]])
    assert np.all(np.abs(cos["cov"] - target) <= 0.05 + 4 * cos["se_cov"])
    assert stats["cross_cov"].shape == (2, 2)


def test_ensemble_threads_do_not_change_results():
    args = (ksapprox.Kernel.fbm(0.75), [1.0], 0.2, 2 * math.pi / 3)
    a = ksapprox.run_ensemble(*args, replicas=300, seed=5, threads=1)
    b = ksapprox.run_ensemble(*args, replicas=300, seed=5, threads=3)
    assert np.array_equal(a["channels"]["sin"]["cov"], b["channels"]["sin"]["cov"])


def test_horizon_guard():
    with pytest.raises(ksapprox.HorizonGuard):
        ksapprox.transform(ksapprox.Kernel.fbm(1.0), [1.0], 1e-4, math.pi / 2, seed=1, max_expected_events=1e6)
