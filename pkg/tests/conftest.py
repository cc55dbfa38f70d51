import numpy as np
import pytest

from polyapprox.bodies import Ball, Box, Ellipsoid, HPolytope, Scaled, Segment, BallSum


def rotation(d, seed):
    Q, R = np.linalg.qr(np.random.default_rng(seed).standard_normal((d, d)))
    return Q * np.sign(np.diag(R))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def body_suite(d=3):
    """Bodies of every variant in dimension ``d``."""
    e = np.eye(d)
    cube = HPolytope(np.vstack([e, -e]), np.ones(2 * d))
    return {
        "ball": Ball(np.full(d, 0.3), 1.2),
        "ellipsoid": Ellipsoid(np.zeros(d), np.linspace(1.0, 0.2, d), rotation(d, 1)),
        "segment": Segment(-e[0], e[0] + 0.5 * e[1]),
        "box": Box(np.full(d, -0.5), np.arange(1.0, d + 1)),
        "hpolytope": cube,
        "scaled": Scaled(Ellipsoid(np.zeros(d), np.linspace(1.0, 0.5, d)), 1.7),
        "ball_sum": BallSum(Segment(np.zeros(d), e[0]), 0.5),
    }


@pytest.fixture(params=list(body_suite()))
def any_body(request):
    return body_suite()[request.param]


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
