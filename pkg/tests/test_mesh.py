import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracdelay.mesh import build_spatial, build_temporal


def test_small_graded_mesh_values():
    m = build_temporal(1.0, 1, 2, 2.0)
    expected = [-1, -0.875, -0.5, -0.125, 0, 0.125, 0.5, 0.875, 1]
    np.testing.assert_allclose(m.points, expected, rtol=0, atol=1e-15)


def test_uniform_mesh_is_equispaced():
    m = build_temporal(1.0, 3, 10, 1.0)
    assert m.is_uniform
    np.testing.assert_allclose(m.steps, 0.05, rtol=1e-12)
    assert m.n_steps == 60
    assert m.t(0) == 0.0 and m.t(60) == 3.0 and m.t(-20) == -1.0


@given(
    N=st.integers(2, 40),
    K=st.integers(1, 4),
    r=st.floats(1.0, 4.0),
    tau=st.sampled_from([0.5, 1.0, 2.0]),
)
@settings(max_examples=60, deadline=None)
def test_mesh_structure(N, K, r, tau):
    m = build_temporal(tau, K, N, r)
    assert m.points.size == 2 * (K + 1) * N + 1
    assert np.all(np.diff(m.points) > 0)
    for i in range(-1, K + 1):
        assert m.t(2 * i * N) == i * tau
    # symmetric inside every window
    w = m.points[2 * N: 4 * N + 1] - 0.0
    np.testing.assert_allclose(w + w[::-1], tau, rtol=0, atol=1e-13 * tau)
    # periodic across windows
    for i in range(1, K + 1):
        seg = m.points[2 * i * N: 2 * (i + 1) * N + 1] - (i - 1) * tau
        np.testing.assert_allclose(seg, m.points[: 2 * N + 1] + tau, atol=1e-13 * K * tau)


@given(N=st.integers(2, 30), r=st.floats(1.0, 3.5), p=st.integers(1, 3))
@settings(max_examples=40, deadline=None)
def test_nestedness(N, r, p):
    coarse = build_temporal(1.0, 3, N, r)
    fine = build_temporal(1.0, 3, N * 2**p, r)
    assert fine.is_refinement_of(coarse) == 2**p
    np.testing.assert_allclose(fine.points[:: 2**p], coarse.points, rtol=0, atol=1e-13)


def test_refinement_rejections():
    coarse = build_temporal(1.0, 3, 10, 2.0)
    assert build_temporal(1.0, 3, 30, 2.0).is_refinement_of(coarse) == 0
    assert build_temporal(1.0, 3, 40, 1.5).is_refinement_of(coarse) == 0
    assert build_temporal(1.0, 2, 40, 2.0).is_refinement_of(coarse) == 0


def test_window_of():
    m = build_temporal(1.0, 3, 5, 1.0)
    assert [m.window_of(n) for n in (1, 10, 11, 20, 21, 30)] == [1, 1, 2, 2, 3, 3]


@pytest.mark.parametrize(
    "args",
    [(0.0, 1, 4, 1.0), (1.0, 0, 4, 1.0), (1.0, 1, 1, 1.0), (1.0, 1, 4, 0.5), (1.0, 1.5, 4, 1.0)],
)
def test_temporal_validation(args):
    with pytest.raises(ValueError):
        build_temporal(*args)


def test_spatial_mesh():
    s = build_spatial(1.0, 8)
    assert s.h == 0.125
    assert s.interior.size == 7
    assert s.nodes[0] == 0.0 and s.nodes[-1] == 1.0
    with pytest.raises(ValueError):
        build_spatial(1.0, 1)
    with pytest.raises(ValueError):
        build_spatial(-1.0, 4)
