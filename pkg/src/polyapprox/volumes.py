"""Intrinsic volumes, isoperimetric ratios and the side polynomial.

Exact formulas cover balls, boxes and segments (and their scaled copies
and outer parallel bodies).  Everything else goes through Kubota's
projection formula, which averages shadow volumes over random
k-dimensional subspaces.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial, gamma, pi

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .bodies import Ball, BallSum, Box, Ellipsoid, HPolytope, Scaled, Segment
from .errors import DegenerateBody, Unsupported

DEFAULT_KUBOTA_SAMPLES = 10**5
DEFAULT_VOLUME_SAMPLES = 10**6
CHUNK = 2**16


def kappa(n):
    """Volume of the n-dimensional unit ball."""
    if not 0 <= n <= 12:
        raise ValueError("kappa is tabulated for 0 <= n <= 12")
    return pi ** (n / 2) / gamma(n / 2 + 1)


def omega(n):
    """Surface area of the unit sphere in R^n."""
    if not 1 <= n <= 12:
        raise ValueError("omega is tabulated for 1 <= n <= 12")
    return n * kappa(n)


def ball_intrinsic_volume(d, j, r=1.0):
    return comb(d, j) * kappa(d) / kappa(d - j) * r**j


@dataclass(frozen=True)
class IntrinsicVolumeVector:
    """``V_0..V_d`` with per-entry standard errors (0 for exact entries)."""

    dim: int
    values: tuple
    stderr: tuple

    def __post_init__(self):
        if len(self.values) != self.dim + 1 or len(self.stderr) != self.dim + 1:
            raise ValueError("need d + 1 values")

    @classmethod
    def exact(cls, values):
        values = tuple(float(v) for v in values)
        return cls(len(values) - 1, values, (0.0,) * len(values))

    @property
    def is_exact(self):
        return all(s == 0.0 for s in self.stderr)

    def exact_flags(self):
        return [s == 0.0 for s in self.stderr]

    def __getitem__(self, k):
        return self.values[k]

    def scaled(self, t):
        return IntrinsicVolumeVector(
            self.dim,
            tuple(v * t**j for j, v in enumerate(self.values)),
            tuple(s * t**j for j, s in enumerate(self.stderr)),
        )

    def to_dict(self):
        return {"dim": self.dim, "values": list(self.values), "stderr": list(self.stderr),
                "exact": self.exact_flags()}


def _steiner_parallel(vec, r):
    """Intrinsic volumes of ``K + rB`` from those of ``K``."""
    d = vec.dim
    vals, errs = [], []
    for j in range(d + 1):
        coeffs = [comb(d - m, j - m) * kappa(d - m) / kappa(d - j) * r ** (j - m)
                  for m in range(j + 1)]
        vals.append(sum(c * vec.values[m] for m, c in enumerate(coeffs)))
        errs.append(float(np.sqrt(sum((c * vec.stderr[m]) ** 2 for m, c in enumerate(coeffs)))))
    return IntrinsicVolumeVector(d, tuple(vals), tuple(errs))


def _elementary_symmetric(a):
    e = np.zeros(len(a) + 1)
    e[0] = 1.0
    for x in a:
        e[1:] = e[1:] + x * e[:-1]
    return e


def exact_intrinsic_volumes(K):
    """Closed-form intrinsic volumes for balls, boxes and segments."""
    d = K.dim
    if isinstance(K, Ball):
        return IntrinsicVolumeVector.exact(
            [ball_intrinsic_volume(d, j, K.radius) for j in range(d + 1)])
    if isinstance(K, Box):
        return IntrinsicVolumeVector.exact(_elementary_symmetric(K.sides))
    if isinstance(K, Segment):
        return IntrinsicVolumeVector.exact([1.0, K.length] + [0.0] * (d - 1))
    if isinstance(K, Scaled):
        return exact_intrinsic_volumes(K.inner).scaled(K.factor)
    if isinstance(K, BallSum):
        return _steiner_parallel(exact_intrinsic_volumes(K.inner), K.radius)
    raise Unsupported(f"no closed form for {type(K).__name__}; use kubota_estimate")


def has_exact_volumes(K):
    try:
        exact_intrinsic_volumes(K)
    except Unsupported:
        return False
    return True


def random_subspaces(count, d, k, rng):
    """Orthonormal bases (count, d, k) of uniform random k-subspaces."""
    G = rng.standard_normal((count, d, k))
    Q, R = np.linalg.qr(G)
    return Q


def _facet_measures(K):
    """Areas and unit outer normals of the hull facets of a polytope."""
    hull = ConvexHull(K.vertices)
    P = K.vertices[hull.simplices]
    E = P[:, 1:] - P[:, :1]
    gram = np.einsum("fik,fjk->fij", E, E)
    d = K.dim
    areas = np.sqrt(np.maximum(np.linalg.det(gram), 0.0)) / factorial(d - 1)
    return areas, hull.equations[:, :-1]


def _shadow_volumes(K, U):
    """k-volume of the orthogonal projection of ``K`` onto span(U) per sample."""
    k = U.shape[2]
    if isinstance(K, Ball):
        return np.full(len(U), kappa(k) * K.radius**k)
    if isinstance(K, Ellipsoid):
        M = K.shape_matrix
        G = np.einsum("nik,ij,njl->nkl", U, M, U)
        return kappa(k) * np.sqrt(np.maximum(np.linalg.det(G), 0.0))
    if isinstance(K, Box):
        # a box is a zonotope: the shadow volume is a sum of k x k minors
        from itertools import combinations

        total = np.zeros(len(U))
        for S in combinations(range(K.dim), k):
            S = list(S)
            total += np.abs(np.linalg.det(U[:, S, :])) * np.prod(K.sides[S])
        return total
    if isinstance(K, Segment):
        if k > 1:
            return np.zeros(len(U))
        v = K.end - K.start
        return np.abs(np.einsum("nik,i->n", U, v))
    if isinstance(K, HPolytope):
        V = K.vertices
        if k == 1:
            Y = np.einsum("vi,ni->nv", V, U[:, :, 0])
            return Y.max(axis=1) - Y.min(axis=1)
        if k == K.dim - 1:
            # shadow on a hyperplane: half the facet areas weighted by |<n_F, w>|
            areas, normals = _facet_measures(K)
            W = np.linalg.svd(U, full_matrices=True)[0][:, :, -1]
            return 0.5 * np.abs(W @ normals.T) @ areas
        out = np.empty(len(U))
        for n in range(len(U)):
            try:
                out[n] = ConvexHull(V @ U[n]).volume
            except QhullError:
                out[n] = 0.0
        return out
    if isinstance(K, Scaled):
        return K.factor**k * _shadow_volumes(K.inner, U)
    raise Unsupported(f"no shadow oracle for {type(K).__name__}")


def kubota_estimate(K, k, samples=DEFAULT_KUBOTA_SAMPLES, seed=0):
    """Monte-Carlo estimate of ``V_k(K)`` via Kubota's formula.

    Returns ``(value, stderr)``.  Segments use the closed-form average
    ``E|<u, v>|`` and come back with zero standard error; balls have a
    deterministic shadow.
    """
    d = K.dim
    if not 1 <= k <= d - 1:
        raise ValueError("Kubota estimate needs 1 <= k <= d - 1")
    if isinstance(K, BallSum):
        inner = [(1.0, 0.0)] + [kubota_estimate(K.inner, m, samples, seed) for m in range(1, k + 1)]
        r = K.radius
        coeffs = [comb(d - m, k - m) * kappa(d - m) / kappa(d - k) * r ** (k - m)
                  for m in range(k + 1)]
        val = sum(c * v for c, (v, _) in zip(coeffs, inner))
        err = float(np.sqrt(sum((c * s) ** 2 for c, (_, s) in zip(coeffs, inner))))
        return val, err
    if isinstance(K, Scaled):
        v, s = kubota_estimate(K.inner, k, samples, seed)
        return K.factor**k * v, K.factor**k * s
    const = comb(d, k) * kappa(d) / (kappa(k) * kappa(d - k))
    if isinstance(K, Segment):
        if k > 1:
            return 0.0, 0.0
        mean_abs = 2.0 * kappa(d - 1) / (d * kappa(d))
        return const * K.length * mean_abs, 0.0
    rng = np.random.default_rng(seed_key(seed))
    chunks = []
    remaining = samples
    while remaining > 0:
        m = min(CHUNK, remaining)
        chunks.append(_shadow_volumes(K, random_subspaces(m, d, k, rng)))
        remaining -= m
    vals = np.concatenate(chunks)
    mean = float(vals.mean())
    err = float(vals.std(ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else 0.0
    return const * mean, const * err


def _volume(K):
    if isinstance(K, Ellipsoid):
        return K.volume
    if isinstance(K, HPolytope):
        return ConvexHull(K.vertices).volume
    return None


def intrinsic_volumes(K, samples=DEFAULT_KUBOTA_SAMPLES, seed=0):
    """Best available ``IntrinsicVolumeVector``: exact when possible."""
    try:
        return exact_intrinsic_volumes(K)
    except Unsupported:
        pass
    if isinstance(K, Scaled):
        return intrinsic_volumes(K.inner, samples, seed).scaled(K.factor)
    if isinstance(K, BallSum):
        return _steiner_parallel(intrinsic_volumes(K.inner, samples, seed), K.radius)
    d = K.dim
    vals, errs = [1.0], [0.0]
    for k in range(1, d):
        v, s = kubota_estimate(K, k, samples, seed + k)
        vals.append(v)
        errs.append(s)
    vol = _volume(K)
    if vol is None:
        raise Unsupported(f"no volume oracle for {type(K).__name__}")
    vals.append(float(vol))
    errs.append(0.0)
    return IntrinsicVolumeVector(d, tuple(vals), tuple(errs))


def _as_vector(K_or_vec, samples, seed):
    if isinstance(K_or_vec, IntrinsicVolumeVector):
        return K_or_vec
    return intrinsic_volumes(K_or_vec, samples, seed)


def isoperimetric_ratio(K, i, j, samples=DEFAULT_KUBOTA_SAMPLES, seed=0):
    """``V_j^(1/j) / V_i^(1/i)``; accepts a body or a precomputed vector."""
    V = _as_vector(K, samples, seed)
    if not 1 <= i < j <= V.dim:
        raise ValueError("need 1 <= i < j <= d")
    if V[i] <= 0:
        raise DegenerateBody(f"V_{i} vanishes")
    return max(V[j], 0.0) ** (1.0 / j) / V[i] ** (1.0 / i)


def is_elongated(K, eps, i, j, samples=DEFAULT_KUBOTA_SAMPLES, seed=0):
    if not eps > 0:
        raise ValueError("eps must be positive")
    return isoperimetric_ratio(K, i, j, samples, seed) < eps


@dataclass(frozen=True)
class SidePolynomial:
    """``p(t) = V_{d-1}(tK + B^d) = sum_k a_k t^k``, ``k = 0..d-1``."""

    dim: int
    coefficients: tuple
    stderr: tuple = None

    def __call__(self, t):
        return eval_side(self, t)

    def derivative(self, t):
        return sum(k * a * t ** (k - 1) for k, a in enumerate(self.coefficients) if k > 0)


def steiner_side_weight(d, k):
    """Weight of ``V_k(K)`` in ``V_{d-1}(K + B^d)``."""
    return (d - k) * kappa(d - k) / 2.0


def divided_side_weight(d, k):
    """The same weight divided by ``d``; a negative control for the oracle tests."""
    return steiner_side_weight(d, k) / d


def side_polynomial(V, weight=steiner_side_weight):
    d = V.dim
    coeffs = tuple(weight(d, k) * V[k] for k in range(d))
    errs = tuple(weight(d, k) * V.stderr[k] for k in range(d))
    return SidePolynomial(d, coeffs, errs)


def eval_side(p, t):
    if not t > 0:
        raise ValueError("t must be positive")
    return float(sum(a * t**k for k, a in enumerate(p.coefficients)))


def side_stderr(p, t=1.0):
    if p.stderr is None:
        return 0.0
    return float(np.sqrt(sum((s * t**k) ** 2 for k, s in enumerate(p.stderr))))


def parallel_side_volume(K, samples=DEFAULT_KUBOTA_SAMPLES, seed=0):
    """``(V_{d-1}(K + B^d), stderr)`` from the side polynomial at t = 1."""
    p = side_polynomial(intrinsic_volumes(K, samples, seed))
    return eval_side(p, 1.0), side_stderr(p, 1.0)


def steiner_volume(V, eps):
    """``V_d(K + eps B) = sum_j eps^(d-j) kappa_(d-j) V_j``."""
    d = V.dim
    return float(sum(eps ** (d - j) * kappa(d - j) * V[j] for j in range(d + 1)))


def seed_key(seed):
    """Flatten a nested seed like ``[seed, [tag, k]]`` into a list of ints."""
    if isinstance(seed, (list, tuple, np.ndarray)):
        return [v for s in seed for v in seed_key(s)]
    return [int(seed)]


def _chunk_rngs(seed, n_chunks):
    """One deterministic substream per chunk, keyed by (seed..., chunk index)."""
    base = seed_key(seed)
    return [np.random.default_rng(base + [c]) for c in range(n_chunks)]


def mc_parallel_volume(K, eps, samples=DEFAULT_VOLUME_SAMPLES, seed=0):
    """Rejection-sampling estimate of ``V_d(K + eps B)``.

    Returns ``(value, stderr)``.
    """
    if samples < 1000:
        raise ValueError("need at least 10^3 samples")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    lo, hi = K.bounding_box()
    lo, hi = lo - eps, hi + eps
    box_vol = float(np.prod(hi - lo))
    hits = 0
    n_chunks = -(-samples // CHUNK)
    for c, rng in enumerate(_chunk_rngs(seed, n_chunks)):
        m = min(CHUNK, samples - c * CHUNK)
        X = lo + (hi - lo) * rng.random((m, K.dim))
        hits += int(np.count_nonzero(K.distance(X) <= eps))
    p = hits / samples
    return box_vol * p, box_vol * np.sqrt(p * (1 - p) / samples)


def shell_sample(K, r, h, lo, hi, samples, seed):
    """Uniform points of the box ``[lo, hi]`` lying in ``{r < dist(x, K) <= r + h}``.

    Returns ``(points, feet)`` where ``feet`` are the nearest points of ``K``.  Sampling is chunked with one RNG substream per chunk.
    """
    pts, feet = [], []
    n_chunks = -(-samples // CHUNK)
    for c, rng in enumerate(_chunk_rngs(seed, n_chunks)):
        m = min(CHUNK, samples - c * CHUNK)
        X = lo + (hi - lo) * rng.random((m, K.dim))
        P = K._project(X)
        dist = np.linalg.norm(X - P, axis=1)
        keep = (dist > r) & (dist <= r + h)
        pts.append(X[keep])
        feet.append(P[keep])
    d = K.dim
    return (np.concatenate(pts) if pts else np.empty((0, d)),
            np.concatenate(feet) if feet else np.empty((0, d)))


def boundary_area_mc(K, r=1.0, h=0.01, samples=DEFAULT_VOLUME_SAMPLES, seed=0):
    """Shell estimate of ``H^{d-1}(boundary of K + rB)``: shell volume / h.

    Returns ``(value, stderr)``.
    """
    lo, hi = K.bounding_box()
    lo, hi = lo - r - h, hi + r + h
    box_vol = float(np.prod(hi - lo))
    X, _ = shell_sample(K, r, h, lo, hi, samples, seed)
    p = len(X) / samples
    return box_vol * p / h, box_vol * np.sqrt(p * (1 - p) / samples) / h
