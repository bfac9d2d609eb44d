import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from barrier_moments.certificates import (
    graded_basis,
    interval_certificate,
    localizing_matrix,
    moment_matrix,
    psd_certificate,
)
from barrier_moments.errors import DimensionError
from barrier_moments.poly import BiPoly, T, X


def test_graded_basis():
    assert graded_basis(2, 2) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    assert graded_basis(2, 1) == [(0, 0), (0, 1), (0, 2)]


def test_moment_matrix_is_hankel():
    m = [1.0, 0.5, 1 / 3, 0.25, 0.2]
    M = moment_matrix(m, 2)
    assert np.allclose(M, [[1, 0.5, 1 / 3], [0.5, 1 / 3, 0.25], [1 / 3, 0.25, 0.2]])


def test_short_sequence_raises():
    with pytest.raises(DimensionError):
        moment_matrix([1.0, 0.5], 2)
    with pytest.raises(DimensionError):
        localizing_matrix([1.0, 0.5, 0.3], X * (1 - X), 1)
    with pytest.raises(DimensionError):
        localizing_matrix([1.0, 0.5, 0.3, 0.2, 0.1], T, 0)


def test_two_dimensional_certificate():
    rng = np.random.default_rng(0)
    pts = rng.random((5, 2))
    w = rng.dirichlet(np.ones(5))
    seq = {(a, b): float(np.sum(w * pts[:, 0] ** a * pts[:, 1] ** b)) for a in range(5) for b in range(5 - a)}
    assert psd_certificate(moment_matrix(seq, 2))
    assert psd_certificate(localizing_matrix(seq, T * (1 - T), 1))
    assert psd_certificate(localizing_matrix(seq, X * (1 - X), 1))


def test_localizing_rejects_mass_outside_box():
    seq = [2.0**k for k in range(5)]  # point mass at 2
    assert psd_certificate(moment_matrix(seq, 2))
    assert not psd_certificate(localizing_matrix(seq, X * (1 - X), 1))
    assert not interval_certificate(seq)


@given(st.lists(st.floats(0, 1), min_size=1, max_size=6), st.integers(1, 8))
def test_point_masses_accepted(points, n):
    seq = [sum(p**k for p in points) / len(points) for k in range(n + 1)]
    assert interval_certificate(seq)


def test_psd_tolerance():
    assert psd_certificate(np.diag([1.0, 0.0, -1e-12]))
    assert not psd_certificate(np.diag([1.0, -1e-3]))
