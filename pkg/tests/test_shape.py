import math

import numpy as np
import pytest

from polyapprox.bodies import Ball, Box, Ellipsoid, Scaled, Segment
from polyapprox.errors import InvalidIndexPair, ParameterBelowThreshold, ThresholdNotMet
from polyapprox.shape import (
    constants,
    elongation_certificate,
    g,
    golden_section,
    optimal_scaling,
    phi,
    rho,
    theorem1_bound,
)
from polyapprox.volumes import IntrinsicVolumeVector, exact_intrinsic_volumes, intrinsic_volumes

from conftest import rotation

PI = math.pi

# mpmath (50 digits) evaluations of the closed-form constants, frozen
D4 = {
    "c_iv1": 16.152790710356,
    "c_iv2": 3.4827019687,
    "c_iv3": 1.2433830,
    "c_iv4": 19.314510,
    "c_iv5": 17.580440,
    "delta_1j0": 7.198729,
    "n_1j0": 4708.006,
}
C12BIS_D3 = 35.28504930
C12BISBIS_D3 = 221.7025034


def test_constants_d3():
    c = constants(3)
    assert c.c12min == pytest.approx(2 / (3 * PI), rel=1e-14)
    assert c.c12 == pytest.approx(64 / PI, rel=1e-14)
    assert c.c12bis == pytest.approx(C12BIS_D3, rel=1e-9)
    assert c.c12bisbis == pytest.approx(C12BISBIS_D3, rel=1e-9)
    assert c.c13 == pytest.approx(c.c12bis, rel=1e-14)
    assert c.c13bis > c.c13
    assert c.j0 == 1


def test_constants_d4():
    c = constants(4)
    assert c.alpha == 3 and c.beta_thm == pytest.approx(1 / 6) and c.beta_strong == pytest.approx(1 / 3)
    for key, value in D4.items():
        assert getattr(c, key) == pytest.approx(value, rel=1e-6), key
    assert c.delta_ij(1, 2) == pytest.approx(D4["delta_1j0"], rel=1e-6)
    assert c.n_ij(1, 2) == pytest.approx(D4["n_1j0"], rel=1e-6)


def test_constants_d2():
    c = constants(2)
    assert c.c12bis == pytest.approx(10.52859, rel=1e-6)
    assert c.c12bisbis == pytest.approx(33.07655, rel=1e-6)


@pytest.mark.parametrize("d", range(2, 7))
def test_constants_positive(d):
    doc = constants(d).to_dict()
    for k, v in doc.items():
        if isinstance(v, (int, float)) and k != "d":
            assert v > 0, k


def test_constants_dim_range():
    with pytest.raises(ValueError):
        constants(7)


def test_invalid_pairs():
    with pytest.raises(InvalidIndexPair):
        elongation_certificate(Ball(np.zeros(3), 1.0), 0.5, 1, 2)
    with pytest.raises(InvalidIndexPair):
        elongation_certificate(Ball(np.zeros(4), 1.0), 0.5, 2, 1)
    with pytest.raises(InvalidIndexPair):
        constants(6).c_ij(1, 4)
    assert constants(6).c_ij(1, 3) > 0


def test_golden_section_endpoint():
    x, fx = golden_section(lambda t: -t, 0.0, 1.0)
    assert x == 1.0 and fx == -1.0
    x, _ = golden_section(lambda t: (t - 0.3) ** 2, 0.0, 1.0)
    assert x == pytest.approx(0.3, abs=1e-8)


def test_rho_examples():
    seg = Segment([-1.0, 0, 0], [1.0, 0, 0])
    assert rho(seg, 1000) == pytest.approx(3.510549, rel=1e-6)
    assert rho(Ball(np.zeros(3), 1.0), 1000) == pytest.approx(1.123805, rel=1e-6)
    c = constants(3)
    assert rho(Ball(np.zeros(3), 1.0), c.c12bisbis * (1 + 1e-10)) == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(ParameterBelowThreshold):
        rho(seg, 200)


def test_phi_g_examples():
    seg = Segment([-1.0, 0, 0], [1.0, 0, 0])
    assert phi(seg, 1000) == pytest.approx(8.072987, rel=1e-6)
    assert g(seg, 1000) == pytest.approx(4.036493, rel=1e-6)
    ball = Ball(np.zeros(3), 1.0)
    t, f = optimal_scaling(ball, 1000)
    assert t == pytest.approx(1.0, abs=1e-6) and f == pytest.approx(8 * PI, rel=1e-10)
    assert g(ball, 1000) == pytest.approx(2 * PI, rel=1e-10)


@pytest.mark.parametrize("K", [
    Segment(np.zeros(2), [3.0, 1.0]),
    Box(np.zeros(2), [1.0, 1.0]),
    Ball(np.zeros(2), 0.4),
])
def test_d2_constancy(K):
    l0 = 2 * constants(2).c12bisbis
    for l in (l0, 1.5 * l0, 10 * l0):
        assert g(K, l) == pytest.approx(4 * PI, rel=1e-9)


def test_g_monotone_in_l():
    bodies = [Segment(np.zeros(3), [1.0, 1, 0]), Box(np.zeros(3), [1, 2, 3]),
              Ball(np.zeros(3), 2.0), intrinsic_volumes(Ellipsoid(np.zeros(3), [1, .5, .2]), 20000, 0)]
    grid = [230, 300, 500, 1000, 5000, 10**5]
    for K in bodies:
        vals = [g(K, l) for l in grid]
        assert all(b <= a + 1e-9 for a, b in zip(vals, vals[1:]))


def test_sandwich_d3():
    lo = g(Segment([-1.0, 0, 0], [1.0, 0, 0]), 1000)
    hi = g(Ball(np.zeros(3), 1.0), 1000)
    assert lo == pytest.approx(4.036493, rel=1e-6) and hi == pytest.approx(2 * PI)
    for K in (Box(np.zeros(3), [1, 2, 3]), intrinsic_volumes(Ellipsoid(np.zeros(3), [1, .6, .3]), 20000, 1)):
        assert lo + 1e-9 < g(K, 1000) < hi - 1e-9


def test_shape_factor_invariance():
    K = Box(np.zeros(3), [1, 2, 3])
    base = g(K, 1000)
    for t in (0.5, 2.0):
        moved = Box(np.random.default_rng(int(t * 10)).standard_normal(3), np.array([1, 2, 3]) * t)
        assert g(moved, 1000) == pytest.approx(base, abs=1e-9)
        assert g(Scaled(K, t), 1000) == pytest.approx(base, abs=1e-9)


def test_certificate_elongated_ellipsoid():
    E = Ellipsoid(np.zeros(4), [1, .05, .05, .05], rotation(4, 0))
    V = intrinsic_volumes(E, 10**5, 0)
    from polyapprox.volumes import isoperimetric_ratio

    eps = 1.05 * isoperimetric_ratio(V, 1, 2)
    cert = elongation_certificate(V, eps, 1, 2)
    assert cert.elongated and cert.applicable and cert.passed
    assert cert.chain_ok
    assert cert.N == pytest.approx(D4["n_1j0"] * eps**-3, rel=1e-6)


def test_certificate_ball_not_elongated():
    cert = elongation_certificate(Ball(np.zeros(4), 1.0), 0.5, 1, 2)
    assert cert.ratio == pytest.approx(0.651470, rel=1e-6)
    assert not cert.elongated and cert.passed is None


def test_certificate_large_eps_not_applicable():
    cert = elongation_certificate(Segment(np.zeros(4), np.ones(4)), 50.0, 1, 2)
    assert cert.elongated and not cert.applicable and cert.passed is None


def test_elongated_distance_bound():
    V = exact_intrinsic_volumes(Segment(np.zeros(4), [2.0, 0, 0, 0]))
    eps = 0.1
    thr, bound, weak = theorem1_bound(V, 10**7, eps, 1, 2)
    assert thr == pytest.approx(D4["n_1j0"] * 1000, rel=1e-6)
    _, bound8, _ = theorem1_bound(V, 8 * 10**7, eps, 1, 2)
    assert bound8 == pytest.approx(bound * 8 ** (-2 / 3), rel=1e-12)
    assert weak > bound
    with pytest.raises(ThresholdNotMet):
        theorem1_bound(V, 10**5, eps, 1, 2)


def test_degenerate_point():
    with pytest.raises(Exception):
        g(IntrinsicVolumeVector.exact([1, 0, 0, 0]), 1000)
