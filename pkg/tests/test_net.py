import math

import numpy as np
import pytest

from polyapprox.bodies import Ball, Ellipsoid, OuterBoundaryPoint, Segment, unit_cube
from polyapprox.errors import BoundViolation, DensityViolation, InsufficientHits
from polyapprox.net import (
    ArcLengthMetric,
    EuclideanMetric,
    MixedMetric,
    SampledMetricSpace,
    body_net,
    boundary_cloud,
    boundary_net,
    cap_area_bounds,
    cap_area_shell_mc,
    greedy_net,
    packing_count_bounds,
    verify_cap_bounds,
    verify_net_cardinality,
)
from polyapprox.shape import constants

from conftest import body_suite

PI = math.pi


def circle(n, seed=0):
    t = np.random.default_rng(seed).uniform(0, 2 * PI, n)
    return np.column_stack([np.cos(t), np.sin(t)])


def test_greedy_collinear():
    space = SampledMetricSpace(np.array([[0.0, 0], [1, 0], [2, 0]]), EuclideanMetric())
    net = greedy_net(space, 0.5)
    assert len(net) == 3 and net.packing_ok and net.covering_ok


def test_greedy_circle_chordal():
    P = circle(2000)
    by_angle = np.argsort(np.arctan2(P[:, 1], P[:, 0]))
    net = greedy_net(SampledMetricSpace(P, EuclideanMetric()), 0.5, seed=3, priority=by_angle)
    assert 12 <= len(net) <= 14
    # any scan order gives a maximal packing: consecutive gaps stay below two chord arcs
    arc = 2 * math.asin(0.25)
    for seed in range(5):
        net = greedy_net(SampledMetricSpace(P, EuclideanMetric()), 0.5, seed=seed)
        assert 2 * PI / (2 * arc) < len(net) <= 2 * PI / arc
        assert net.min_pair_distance > 0.5 and net.covering_radius <= 0.5


def test_greedy_large_delta_single_center():
    net = greedy_net(SampledMetricSpace(circle(200), EuclideanMetric()), 2.5)
    assert len(net) == 1


def test_greedy_without_prefilter_agrees():
    class Plain:
        def __call__(self, A, b):
            return np.linalg.norm(np.atleast_2d(A) - b, axis=1)

    P = np.random.default_rng(1).standard_normal((400, 3))
    a = greedy_net(SampledMetricSpace(P, Plain()), 0.7, seed=5)
    b = greedy_net(SampledMetricSpace(P, EuclideanMetric()), 0.7, seed=5)
    assert np.array_equal(a.indices, b.indices)


def test_density_violation():
    space = SampledMetricSpace(circle(50), EuclideanMetric(), gamma=0.2)
    with pytest.raises(DensityViolation):
        greedy_net(space, 0.5)


def test_metric_spot_checks():
    P = np.random.default_rng(0).standard_normal((300, 6))
    P[:, 3:] /= np.linalg.norm(P[:, 3:], axis=1)[:, None]
    assert SampledMetricSpace(P, MixedMetric(3)).check_metric()
    assert SampledMetricSpace(circle(300), ArcLengthMetric()).check_metric()


def test_arc_length_circle_packing_bounds():
    lo, hi = packing_count_bounds(2 * PI, 2.0, 2.0, 1, 0.1)
    assert (lo, hi) == pytest.approx((PI / 0.1, 2 * PI / 0.1))
    net = greedy_net(SampledMetricSpace(circle(20000), ArcLengthMetric()), 0.1, seed=0)
    assert lo < len(net) < hi + 2
    assert packing_count_bounds(2 * PI, 2.0, 2.0, 1, 0.2) == pytest.approx((lo / 2, hi / 2))


def test_packing_count_bounds_reproduce_boundary_constants():
    for d in (2, 3, 4):
        c = constants(d)
        # ball measure bounds on the boundary of D from the cap bounds, total 2 V_{d-1}(D)
        lower_cap, upper_cap = cap_area_bounds(d, 1.0)
        lo, hi = packing_count_bounds(2.0, upper_cap, lower_cap, d - 1, 1.0)
        assert lo == pytest.approx(c.c12min)
        assert hi == pytest.approx(c.c12 / 2)  # the tabulated upper constant has slack 2


def test_packing_count_bounds_rejects_nonpositive():
    with pytest.raises(ValueError):
        packing_count_bounds(1.0, 1.0, 0.0, 1, 0.1)


def test_cap_area_bounds_examples():
    assert cap_area_bounds(3, 0.5) == pytest.approx((PI / 16, 0.75 * PI))
    assert cap_area_bounds(3, 0.9) == pytest.approx((0.6361725124, 7.6340701482))
    assert cap_area_bounds(2, 0.5) == pytest.approx((0.5, 2.0))


def test_cap_full_sphere():
    ball = Ball(np.zeros(3), 1.0)
    center = OuterBoundaryPoint(x=np.array([2.0, 0, 0]), foot=np.array([1.0, 0, 0]),
                                normal=np.array([1.0, 0, 0]))
    # radius 5 (> diameter 4) so the cap is all of the boundary of 2B
    val, err = cap_area_shell_mc(Ball(np.zeros(3), 1.0), center, 5.0, 0.01, 10**6, 0)
    assert abs(val - 16 * PI) < 4 * err + 16 * PI * 0.0075  # shell bias about h/2
    assert ball.dim == 3


def test_cap_segment_example():
    K = Segment([-0.05, 0, 0], [0.05, 0, 0])
    center = OuterBoundaryPoint(x=np.array([0, 1.0, 0]), foot=np.zeros(3),
                                normal=np.array([0, 1.0, 0]))
    val, err = cap_area_shell_mc(K, center, 0.5, 0.025, 10**5, 1)
    lo, hi = cap_area_bounds(3, 0.5)
    assert lo < val < hi
    # the cap is close to a spherical cap of chord 0.5 on the unit sphere
    assert val == pytest.approx(PI * 0.25, rel=0.15)


def test_cap_insufficient_hits():
    center = OuterBoundaryPoint(x=np.array([2.0, 0, 0]), foot=np.array([1.0, 0, 0]),
                                normal=np.array([1.0, 0, 0]))
    with pytest.raises(InsufficientHits):
        cap_area_shell_mc(Ball(np.zeros(3), 1.0), center, 1e-3, 1e-4, 1000, 0)
    with pytest.raises(ValueError):
        cap_area_shell_mc(Ball(np.zeros(3), 1.0), center, 0.5, 0.1, 1000, 0)


@pytest.mark.parametrize("K", [Ball(np.zeros(2), 1.0), Ellipsoid(np.zeros(2), [1.0, 0.3])])
def test_verify_cap_bounds_d2(K):
    report = verify_cap_bounds(K, [0.5, 0.9], trials=10, samples=20000, seed=0)
    assert report.passed and len(report.checks) == 20


def test_verify_cap_bounds_raises():
    K = Ball(np.zeros(3), 1.0)
    report = verify_cap_bounds(K, [0.5], trials=3, samples=20000, seed=0)
    bad = report.checks[0]
    bad.passed = False
    with pytest.raises(BoundViolation):
        report.raise_on_failure()
    with pytest.raises(ValueError):
        verify_cap_bounds(K, [1.2], trials=1)


def test_boundary_net_ball_examples():
    K = Ball(np.zeros(3), 1.0)
    c = constants(3)
    coarse = boundary_net(K, 0.5, seed=0)
    lo, hi = c.c12min * 8 * PI * 4, c.c12 * 8 * PI * 4
    assert (lo, hi) == pytest.approx((21.33, 2047.6), rel=1e-3)
    assert lo < len(coarse) < hi
    assert coarse.packing_ok and coarse.covering_ok
    assert np.allclose(np.linalg.norm(coarse.x, axis=1), 2.0)
    fine = boundary_net(K, 0.25, seed=0)
    assert 2 < len(fine) / len(coarse) < 8
    assert verify_net_cardinality(coarse, K).passed


def test_boundary_net_short_segment():
    net = boundary_net(Segment([-0.05, 0, 0], [0.05, 0, 0]), 0.9, seed=0)
    assert len(net) >= 4


def test_boundary_net_rejects_delta():
    with pytest.raises(ValueError):
        boundary_net(Ball(np.zeros(3), 1.0), 1.0)


@pytest.mark.parametrize("name", list(body_suite()))
def test_boundary_net_cardinality_suite(name):
    K = body_suite()[name]
    net = boundary_net(K, 0.8, seed=1)
    assert net.packing_ok and net.covering_ok
    assert verify_net_cardinality(net, K, samples=20000).passed


def test_boundary_net_deterministic():
    K = Ellipsoid(np.zeros(3), [1.0, 0.6, 0.3])
    a = boundary_net(K, 0.6, seed=4)
    b = boundary_net(K, 0.6, seed=4)
    assert np.array_equal(a.centers, b.centers)
    c = boundary_net(K, 0.6, seed=5)
    assert not np.array_equal(a.centers, c.centers)


def test_body_net_ball():
    K = Ball(np.zeros(3), 1.0)
    net = body_net(K, 0.5, seed=0)
    assert np.allclose(net.feet, net.x / 2) and np.allclose(net.normals, net.x / 2)
    assert 0 < len(net) < net.cardinality_bound
    assert net.cardinality_bound == pytest.approx(constants(3).c12 * 8 * PI * 4, rel=1e-9)


def test_body_net_contracts():
    K = Ellipsoid(np.zeros(3), [1.0, 0.5, 0.3])
    net = body_net(K, 0.5, seed=2, with_bound=False)
    i, j = np.triu_indices(len(net), 1)
    dx = np.linalg.norm(net.x[i] - net.x[j], axis=1)
    assert np.all(np.linalg.norm(net.feet[i] - net.feet[j], axis=1) <= dx + 1e-12)
    assert np.all(np.linalg.norm(net.normals[i] - net.normals[j], axis=1) <= dx + 1e-12)
    assert net.packing_ok and net.metric_tag == "mixed"


def test_body_net_cube_normals_cover_sphere():
    delta = 0.4
    net = body_net(unit_cube(3), delta, seed=0, with_bound=False)
    U = np.random.default_rng(9).standard_normal((20000, 3))
    U /= np.linalg.norm(U, axis=1)[:, None]
    cover = np.max(np.min(np.linalg.norm(U[:, None, :] - net.normals[None], axis=2), axis=1))
    assert cover <= 2 * delta


def test_boundary_cloud_density():
    cloud = boundary_cloud(Ball(np.zeros(2), 1.0), 0.3, seed=0)
    assert cloud.gamma <= 0.03
    # shell estimate of the perimeter 4 pi, biased upwards by the shell width
    assert 4 * PI < cloud.area_estimate < 4 * PI * 1.1
