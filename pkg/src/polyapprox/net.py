"""Greedy delta-nets on sampled metric spaces and on boundaries of K + B.

A net is built by scanning a dense candidate cloud in a seeded order and
keeping a candidate iff it is farther than ``delta`` from every kept
centre.  The result is a (delta/2)-packing by construction and, by
maximality, covers the cloud within ``delta``; the cloud's own covering
radius ``gamma`` is added for the claim about the continuum.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.spatial import cKDTree

from .bodies import outer_boundary_sample, sample_unit_directions
from .errors import BoundViolation, DensityViolation, InsufficientHits
from .volumes import (
    eval_side, intrinsic_volumes, kappa, seed_key, shell_sample, side_polynomial, side_stderr,
)

log = logging.getLogger(__name__)

DENSITY_FACTOR = 10
SHELL_WIDTH = 0.25
PROBES = 20000


# ----------------------------------------------------------------------------
# Metrics.  Each metric may expose ``prefilter(points) -> (coords, factor)``
# such that metric(p, q) <= delta implies |coords_p - coords_q| <= factor*delta.


class EuclideanMetric:
    tag = "euclidean"

    def __call__(self, A, b):
        return np.linalg.norm(np.atleast_2d(A) - b, axis=1)

    def prefilter(self, points):
        return points, 1.0


class MixedMetric:
    """``max(|x - y|, |v(x) - v(y)|)`` on rows ``[foot | normal]``."""

    tag = "mixed"

    def __init__(self, dim):
        self.dim = dim

    def __call__(self, A, b):
        A = np.atleast_2d(A)
        d = self.dim
        return np.maximum(np.linalg.norm(A[:, :d] - b[:d], axis=1),
                          np.linalg.norm(A[:, d:] - b[d:], axis=1))

    def prefilter(self, points):
        # foot + normal lies on the boundary of K + B and moves by at most 2 d_m
        d = self.dim
        return points[:, :d] + points[:, d:], 2.0


class ArcLengthMetric:
    """Geodesic distance on the unit circle / sphere for unit-vector rows."""

    tag = "arc"

    def __call__(self, A, b):
        c = np.clip(np.atleast_2d(A) @ b, -1.0, 1.0)
        return np.arccos(c)

    def prefilter(self, points):
        return points, 1.0


@dataclass
class SampledMetricSpace:
    points: np.ndarray
    metric: Callable
    gamma: float = 0.0

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))

    def __len__(self):
        return len(self.points)

    def check_metric(self, trials=1000, seed=0, tol=1e-9):
        """Spot-check symmetry and the triangle inequality on random triples."""
        rng = np.random.default_rng(seed)
        idx = rng.integers(0, len(self.points), size=(trials, 3))
        P = self.points
        for i, j, k in idx:
            dij = self.metric(P[i][None], P[j])[0]
            dji = self.metric(P[j][None], P[i])[0]
            dik = self.metric(P[i][None], P[k])[0]
            djk = self.metric(P[j][None], P[k])[0]
            if abs(dij - dji) > tol or dik > dij + djk + tol:
                return False
        return True


@dataclass
class DeltaNet:
    centers: np.ndarray
    indices: np.ndarray
    delta: float
    metric_tag: str
    gamma: float
    min_pair_distance: float
    covering_radius: float
    seed: int
    x: Optional[np.ndarray] = None
    feet: Optional[np.ndarray] = None
    normals: Optional[np.ndarray] = None
    cardinality_bound: Optional[float] = None
    extra: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.indices)

    @property
    def packing_ok(self):
        return self.min_pair_distance > self.delta

    @property
    def covering_ok(self):
        return self.covering_radius <= self.delta + self.gamma

    @property
    def packing_margin(self):
        return self.min_pair_distance - self.delta

    @property
    def covering_margin(self):
        return self.delta + self.gamma - self.covering_radius

    def to_dict(self):
        doc = {
            "delta": self.delta,
            "metric": self.metric_tag,
            "size": len(self),
            "gamma": self.gamma,
            "seed": self.seed,
            "packing_ok": bool(self.packing_ok),
            "covering_ok": bool(self.covering_ok),
            "min_pair_distance": _finite_or_none(self.min_pair_distance),
            "covering_radius": self.covering_radius,
            "centers": self.centers.tolist(),
        }
        if self.feet is not None:
            doc["feet"] = self.feet.tolist()
        if self.normals is not None:
            doc["normals"] = self.normals.tolist()
        if self.cardinality_bound is not None:
            doc["cardinality_bound"] = self.cardinality_bound
        return doc


def _finite_or_none(v):
    return float(v) if np.isfinite(v) else None


def _min_pair_distance(points, metric, delta):
    """Smallest pairwise distance, or ``inf`` if every pair exceeds the search radius."""
    if len(points) < 2:
        return np.inf
    if hasattr(metric, "prefilter"):
        coords, factor = metric.prefilter(points)
        tree = cKDTree(coords)
        pairs = tree.query_pairs(2.0 * factor * delta, output_type="ndarray")
        if len(pairs) == 0:
            return np.inf
        return float(_rowwise(metric, points[pairs[:, 0]], points[pairs[:, 1]]).min())
    best = np.inf
    for i in range(len(points) - 1):
        best = min(best, float(metric(points[i + 1:], points[i]).min()))
    return best


def _rowwise(metric, A, B):
    if isinstance(metric, EuclideanMetric):
        return np.linalg.norm(A - B, axis=1)
    if isinstance(metric, MixedMetric):
        d = metric.dim
        return np.maximum(np.linalg.norm(A[:, :d] - B[:, :d], axis=1),
                          np.linalg.norm(A[:, d:] - B[:, d:], axis=1))
    if isinstance(metric, ArcLengthMetric):
        return np.arccos(np.clip(np.sum(A * B, axis=1), -1.0, 1.0))
    return np.array([metric(a[None], b)[0] for a, b in zip(A, B)])


def greedy_net(space, delta, seed=0, priority=None):
    """Maximal (delta/2)-packing of the candidate cloud, scanned in seeded order.

    ``priority`` lists candidate indices to scan first (in the given order)
    before the shuffled remainder.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    if space.gamma > delta / DENSITY_FACTOR:
        raise DensityViolation(
            f"candidate covering radius {space.gamma:.4g} exceeds delta/10 = {delta / 10:.4g}")
    P = space.points
    n = len(P)
    metric = space.metric
    rng = np.random.default_rng(seed_key(seed))
    order = rng.permutation(n)
    if priority is not None and len(priority):
        priority = np.asarray(priority, dtype=int)
        rest = order[~np.isin(order, priority)]
        order = np.concatenate([priority, rest])

    nearest = np.full(n, np.inf)
    accepted = []
    if hasattr(metric, "prefilter"):
        coords, factor = metric.prefilter(P)
        tree = cKDTree(coords)
        radius = factor * delta
        for idx in order.tolist():
            if nearest[idx] <= delta:
                continue
            accepted.append(idx)
            nb = np.asarray(tree.query_ball_point(coords[idx], radius), dtype=int)
            dist = metric(P[nb], P[idx])
            close = dist <= delta
            nb, dist = nb[close], dist[close]
            nearest[nb] = np.minimum(nearest[nb], dist)
    else:
        for idx in order.tolist():
            if nearest[idx] <= delta:
                continue
            accepted.append(idx)
            nearest = np.minimum(nearest, metric(P, P[idx]))

    idx = np.asarray(accepted, dtype=int)
    centers = P[idx]
    return DeltaNet(
        centers=centers,
        indices=idx,
        delta=float(delta),
        metric_tag=getattr(metric, "tag", "custom"),
        gamma=float(space.gamma),
        min_pair_distance=_min_pair_distance(centers, metric, delta),
        covering_radius=float(nearest.max()) if n else 0.0,
        seed=seed,
    )


# ----------------------------------------------------------------------------
# Candidate clouds on the boundary of D = K + rB


@dataclass
class BoundaryCloud:
    """Dense sample of the boundary of ``K + rB`` with nearest points on ``K``."""

    body: object
    r: float
    x: np.ndarray
    feet: np.ndarray
    normals: np.ndarray
    gamma: float
    area_estimate: float

    def __len__(self):
        return len(self.x)


def _shell_boundary_points(K, r, count, seed, width=SHELL_WIDTH):
    """About ``count`` points of the boundary of ``K + rB``.

    Points are drawn uniformly in the shell ``r < dist <= r + w`` and pushed to
    the boundary along the nearest-point map, so the density is within a
    factor ``(1 + w/r)^(d-1)`` of uniform.  Also returns the shell-based area
    estimate.
    """
    w = width * r
    lo, hi = K.bounding_box()
    lo, hi = lo - r - w, hi + r + w
    box_vol = float(np.prod(hi - lo))
    # pilot run for the acceptance rate
    pilot = 20000
    Y, F = shell_sample(K, r, w, lo, hi, pilot, [seed, 0])
    rate = max(len(Y), 1) / pilot
    area = box_vol * rate / w
    xs, fs = [Y], [F]
    have = len(Y)
    batch = 1
    while have < count:
        need = int((count - have) / rate * 1.1) + 1000
        Y, F = shell_sample(K, r, w, lo, hi, need, [seed, batch])
        xs.append(Y)
        fs.append(F)
        have += len(Y)
        batch += 1
    Y = np.concatenate(xs)[:count]
    F = np.concatenate(fs)[:count]
    N = Y - F
    N /= np.linalg.norm(N, axis=1)[:, None]
    return F + r * N, F, N, area


def _target_count(area, d, gamma, probes=PROBES):
    """Cloud size whose expected probe-measured covering radius is below ``gamma``.

    For a Poisson cloud of density ``m / area`` the chance that a probe is
    farther than ``gamma`` from it is ``exp(-m kappa gamma^(d-1) / area)``;
    the extra ``+3`` keeps the maximum over all probes below ``gamma``
    with probability about 0.95.
    """
    m = area / (kappa(d - 1) * gamma ** (d - 1))
    return int(np.ceil(m * (np.log(probes) + 3.0)))


def estimate_gamma(cloud_x, K, r, probes, seed):
    """Largest distance from fresh boundary probes to the cloud."""
    px, _, _, _ = _shell_boundary_points(K, r, probes, seed, width=0.1)
    dist, _ = cKDTree(cloud_x).query(px)
    return float(dist.max()), px, dist


def boundary_cloud(K, delta, oversample=None, seed=0, r=1.0, probes=PROBES, max_rounds=6):
    """Candidate cloud on the boundary of ``K + rB`` dense enough for ``delta``.

    ``oversample`` is the number of direction samples ``s(u) + r u``; shell
    samples are added until the probe-estimated covering radius is at most
    ``delta / 10``.
    """
    d = K.dim
    target = 0.8 * delta / DENSITY_FACTOR
    _, _, _, area = _shell_boundary_points(K, r, 1, [seed, 1])
    n_shell = _target_count(area, d, target, probes)
    if oversample is None:
        oversample = max(1000, n_shell // 4)
    U = sample_unit_directions(oversample, [seed, 2], d)
    ob = outer_boundary_sample(K, r, U)
    X, F, N, area = _shell_boundary_points(K, r, n_shell, [seed, 3])
    X = np.vstack([ob.x, X])
    F = np.vstack([ob.foot, F])
    N = np.vstack([ob.normal, N])
    gamma = np.inf
    for rnd in range(max_rounds):
        gamma, px, dist = estimate_gamma(X, K, r, probes, [seed, 100 + rnd])
        log.debug("cloud of %d points, gamma %.4g (target %.4g)", len(X), gamma, delta / 10)
        if gamma <= delta / DENSITY_FACTOR:
            break
        Xn, Fn, Nn, _ = _shell_boundary_points(K, r, len(X), [seed, 200 + rnd])
        X = np.vstack([X, Xn])
        F = np.vstack([F, Fn])
        N = np.vstack([N, Nn])
    return BoundaryCloud(K, r, X, F, N, gamma, area)


def boundary_net(K, delta, oversample=None, seed=0, cloud=None):
    """Euclidean greedy delta-net of the boundary of ``D = K + B``."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if cloud is None:
        cloud = boundary_cloud(K, delta, oversample, seed)
    space = SampledMetricSpace(cloud.x, EuclideanMetric(), cloud.gamma)
    net = greedy_net(space, delta, seed)
    net.x = net.centers
    net.feet = cloud.feet[net.indices]
    net.normals = cloud.normals[net.indices]
    return net


def body_net(K, delta, oversample=None, seed=0, cloud=None, with_bound=True,
             volume_samples=10**5):
    """Delta-net of the boundary of ``K`` under ``max(|x-y|, |v(x)-v(y)|)``.

    The Euclidean net of the boundary of ``K + B`` is projected onto ``K``;
    the greedy filter is rerun under the mixed metric, scanning the projected
    centres first and then the rest of the projected cloud so that the
    result is again maximal.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if cloud is None:
        cloud = boundary_cloud(K, delta, oversample, seed)
    outer = boundary_net(K, delta, seed=seed, cloud=cloud)
    lifted = np.hstack([cloud.feet, cloud.normals])
    space = SampledMetricSpace(lifted, MixedMetric(K.dim), cloud.gamma)
    net = greedy_net(space, delta, seed, priority=outer.indices)
    d = K.dim
    net.feet = net.centers[:, :d]
    net.normals = net.centers[:, d:]
    net.x = cloud.x[net.indices]
    net.extra["outer_net_size"] = len(outer)
    net.extra["outer_centers_kept"] = int(np.isin(outer.indices, net.indices).sum())
    if with_bound:
        from .shape import constants

        V = intrinsic_volumes(K, volume_samples, seed)
        p = side_polynomial(V)
        vd = eval_side(p, 1.0) + 4.0 * side_stderr(p, 1.0)
        net.cardinality_bound = constants(d).c12 * vd * delta ** (-(d - 1))
    return net


# ----------------------------------------------------------------------------
# Cap measures and cardinality checks


def cap_area_bounds(d, delta):
    """Lower/upper bounds on the boundary measure of a cap of radius delta."""
    base = delta ** (d - 1) * kappa(d - 1)
    return base * 2.0 ** (-(d - 1)), base * d


def cap_area_shell_mc(K, center, delta, h, samples=10**5, seed=0, min_hits=100):
    """Shell estimate of the boundary measure of the cap of ``D = K + B``
    around ``center.x`` with radius ``delta``.  Returns ``(value, stderr)``.
    """
    if not 0 < h <= delta / 10:
        raise ValueError("need 0 < h <= delta/10")
    c = np.asarray(center.x, dtype=float)
    glo, ghi = K.bounding_box()
    glo, ghi = glo - 1.0 - h, ghi + 1.0 + h
    lo = np.maximum(c - delta - h, glo)
    hi = np.minimum(c + delta + h, ghi)
    box_vol = float(np.prod(hi - lo))
    Y, F = shell_sample(K, 1.0, h, lo, hi, samples, seed)
    N = Y - F
    onD = F + N / np.linalg.norm(N, axis=1)[:, None]
    hits = int(np.count_nonzero(np.linalg.norm(onD - c, axis=1) < delta))
    if hits < min_hits:
        raise InsufficientHits(f"only {hits} shell samples hit the cap (need {min_hits})")
    p = hits / samples
    return box_vol * p / h, box_vol * np.sqrt(p * (1 - p) / samples) / h


@dataclass
class BoundCheck:
    """One verified inequality ``lower < value < upper`` with both sides kept."""

    quantity: str
    value: float
    lower: Optional[float]
    upper: Optional[float]
    passed: bool
    stderr: float = 0.0
    context: dict = field(default_factory=dict)

    def to_row(self):
        return {"quantity": self.quantity, "value": self.value, "lower": self.lower,
                "upper": self.upper, "pass": self.passed, "stderr": self.stderr}


@dataclass
class BoundReport:
    checks: list

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def raise_on_failure(self):
        bad = self.failures()
        if bad:
            c = bad[0]
            raise BoundViolation(
                f"{c.quantity}: {c.value} not in ({c.lower}, {c.upper})",
                details={"check": c.to_row(), **c.context})


def verify_cap_bounds(K, deltas, trials=50, samples=10**5, seed=0, h_ratio=1 / 20,
                      strict=True):
    """Compare shell estimates of random caps with the cap-measure bounds."""
    d = K.dim
    checks = []
    for t, delta in enumerate(deltas):
        if not 0 < delta < 1:
            raise ValueError("cap radii must lie in (0, 1)")
        lower, upper = cap_area_bounds(d, delta)
        U = sample_unit_directions(trials, [seed, t], d)
        ob = outer_boundary_sample(K, 1.0, U)
        for k in range(trials):
            center = type(ob)(x=ob.x[k], foot=ob.foot[k], normal=ob.normal[k])
            val, err = cap_area_shell_mc(K, center, delta, delta * h_ratio, samples,
                                         [seed, t, k])
            ok = lower - 4 * err < val < upper + 4 * err
            checks.append(BoundCheck(f"cap_area[delta={delta}]", val, lower, upper, ok, err,
                                     {"delta": delta, "center": ob.x[k].tolist()}))
    report = BoundReport(checks)
    if strict:
        report.raise_on_failure()
    return report


def packing_count_bounds(total_measure, c_upper, c_lower, k, delta):
    """Cardinality range of a delta-net from ball-measure bounds ``c' r^k < psi(B(x,r)) < c r^k``."""
    if min(total_measure, c_upper, c_lower, k, delta) <= 0:
        raise ValueError("all arguments must be positive")
    return (total_measure / (c_upper * delta**k),
            2.0**k * total_measure / (c_lower * delta**k))


def verify_net_cardinality(net, K, samples=10**5, seed=0, strict=True):
    """Check ``c12min V(D) delta^-(d-1) < |S| < c12 V(D) delta^-(d-1)``.

    ``V(D) = V_{d-1}(K + B)``; estimated values are widened by 4 standard errors.
    """
    from .shape import constants

    d = K.dim
    c = constants(d)
    p = side_polynomial(intrinsic_volumes(K, samples, seed))
    v, s = eval_side(p, 1.0), side_stderr(p, 1.0)
    scale = net.delta ** (-(d - 1))
    lower = c.c12min * (v - 4 * s) * scale
    upper = c.c12 * (v + 4 * s) * scale
    size = len(net)
    check = BoundCheck("net_cardinality", float(size), lower, upper, lower < size < upper,
                       0.0, {"delta": net.delta, "V_d-1(D)": v, "V_stderr": s})
    report = BoundReport([check])
    if strict:
        report.raise_on_failure()
    return report
