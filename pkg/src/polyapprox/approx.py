"""Circumscribed polytopes from body nets, and Hausdorff distances.

The construction is: build a delta-net of the boundary of ``K`` under the
mixed foot/normal metric, put one tangent halfspace ``<x, v> <= h_K(v)``
at each net normal ``v``, and measure the Hausdorff distance of the
resulting polytope to ``K`` through the support-function gap
``sup_u h_P(u) - h_K(u)``.

Three drivers are provided: :func:`approximate_eps` (target distance),
:func:`approximate_n` (target facet count) and :func:`approximate_scaled`
(facet count, after rescaling ``K`` to the shape-optimal size).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import cKDTree

from .bodies import HPolytope, Scaled, _as_directions, sample_unit_directions
from .errors import (
    BoundViolation,
    ContainmentViolation,
    RetryExhausted,
    ThresholdNotMet,
    UnboundedBody,
    UnboundedCircumscription,
)
from .net import BoundCheck, MixedMetric, SampledMetricSpace, boundary_cloud, body_net, greedy_net
from .shape import constants, g, optimal_scaling, rho
from .volumes import eval_side, intrinsic_volumes, seed_key, side_polynomial, side_stderr

log = logging.getLogger(__name__)

CONTAINMENT_TOL = 1e-6
SPOT_CHECK_TOL = 1e-9
NORMAL_DEDUPE_TOL = 1e-12
ROW_CHUNK = 2048


# ----------------------------------------------------------------------------
# Circumscription


def positively_spanning(normals, tol=1e-10):
    """True iff the rows positively span ``R^d``.

    Equivalent to: full rank and ``sum lam_i v_i = 0`` for some strictly
    positive weights.  Solved as the LP ``max eta`` subject to
    ``sum lam_i v_i = 0``, ``sum lam_i = 1``, ``lam_i >= eta``.
    """
    N = np.atleast_2d(normals)
    m, d = N.shape
    if m <= d or np.linalg.matrix_rank(N) < d:
        return False
    # variables (lam_1..lam_m, eta); minimise -eta
    c = np.zeros(m + 1)
    c[-1] = -1.0
    A_eq = np.zeros((d + 1, m + 1))
    A_eq[:d, :m] = N.T
    A_eq[d, :m] = 1.0
    b_eq = np.zeros(d + 1)
    b_eq[d] = 1.0
    A_ub = np.hstack([-np.eye(m), np.ones((m, 1))])
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(m), A_eq=A_eq, b_eq=b_eq,
                  bounds=[(0, None)] * m + [(None, None)], method="highs")
    return res.status == 0 and -res.fun > tol / m


def _dedupe_normals(N, tol=NORMAL_DEDUPE_TOL):
    tree = cKDTree(N)
    keep = np.ones(len(N), dtype=bool)
    for i, j in sorted(tree.query_pairs(tol)):
        if keep[i]:
            keep[j] = False
    return N[keep]


def circumscribe(K, normals):
    """Polytope with one facet tangent to ``K`` at each normal direction."""
    N = np.atleast_2d(np.asarray(normals, dtype=float))
    if N.size == 0:
        raise ValueError("need at least one normal")
    N, _ = _as_directions(N, K.dim)
    N = _dedupe_normals(N)
    if not positively_spanning(N):
        raise UnboundedCircumscription("normals do not positively span; the polytope is unbounded")
    return HPolytope(N, K._support(N), check_bounded=False)


def polytope_support(P, u):
    """``max <u, x>`` over ``P`` by linear programming."""
    (u,), _ = _as_directions(u, P.dim)
    h = P.support_lp(u)
    if not np.isfinite(h):
        raise UnboundedBody("polytope is unbounded in this direction")
    return float(h)


def polytope_support_many(P, U):
    """Vectorised support of a polytope, via its vertices when available."""
    if not P.has_vertices:
        return np.array([P.support_lp(u) for u in U])
    V = P.vertices
    out = np.empty(len(U))
    for s in range(0, len(U), ROW_CHUNK):
        out[s:s + ROW_CHUNK] = np.max(U[s:s + ROW_CHUNK] @ V.T, axis=1)
    return out


def dump_halfspaces(P, path):
    """Write one ``a_1 ... a_d b`` row per facet."""
    rows = np.hstack([P.normals, P.offsets[:, None]])
    np.savetxt(Path(path), rows, fmt="%.17g")


def load_halfspaces(path):
    rows = np.atleast_2d(np.loadtxt(Path(path)))
    return HPolytope(rows[:, :-1], rows[:, -1])


# ----------------------------------------------------------------------------
# Hausdorff distance


@dataclass
class HausdorffReport:
    """Support-gap maximisation result.

    ``value`` is attained at ``argmax`` and is therefore a certified lower
    bound on ``d_H``.  ``upper_estimate`` adds the Lipschitz constant of the
    gap times the measured covering radius of the coarse directions; it is
    an estimate because the covering radius is itself sampled.
    ``vertex_distance`` is the exact value ``max_v dist(v, K)`` over the
    vertices of ``P`` when they are available.
    """

    value: float
    argmax: np.ndarray
    lipschitz: float
    direction_covering_radius: float
    upper_estimate: float
    min_gap: float
    evaluations: int
    vertex_distance: Optional[float] = None

    @property
    def best(self):
        """Largest trustworthy value: the exact vertex distance if known."""
        if self.vertex_distance is None:
            return self.value
        return max(self.value, self.vertex_distance)

    def to_dict(self):
        return {
            "value": self.value,
            "argmax": self.argmax.tolist(),
            "lipschitz": self.lipschitz,
            "direction_covering_radius": self.direction_covering_radius,
            "upper_estimate": self.upper_estimate,
            "min_gap": self.min_gap,
            "evaluations": self.evaluations,
            "vertex_distance": self.vertex_distance,
        }


def hausdorff_vertex(K, P):
    """Exact ``d_H(K, P)`` for ``K`` inside ``P``: the farthest vertex of ``P``."""
    V = P.vertices
    return float(np.max(K.distance(V)))


def _gap(K, P, U):
    return polytope_support_many(P, U) - K._support(U)


def _tangent_perturb(U, step, rng):
    G = rng.standard_normal(U.shape)
    G -= np.sum(G * U, axis=1)[:, None] * U
    G /= np.linalg.norm(G, axis=1)[:, None]
    W = U + step[:, None] * G
    return W / np.linalg.norm(W, axis=1)[:, None]


def hausdorff_report(K, P, coarse_dirs=20000, refine_iters=40, seed=0, top=32,
                     seed_vertices=True, probes=5000):
    """Maximise ``h_P(u) - h_K(u)`` over the unit sphere.

    Coarse random directions are scanned (plus, if ``seed_vertices``, the
    directions from each vertex of ``P`` to its nearest point on ``K``);
    the best ``top`` are refined by random tangent perturbations whose
    size is halved whenever a round brings no improvement.
    """
    d = K.dim
    rng = np.random.default_rng(seed_key([seed, 2]))
    U = sample_unit_directions(coarse_dirs, [seed, 0], d)
    vertex_distance = None
    if P.has_vertices:
        V = P.vertices
        F = K._project(V)
        diff = V - F
        dist = np.linalg.norm(diff, axis=1)
        vertex_distance = float(dist.max())
        if seed_vertices:
            pos = dist > 1e-12
            U = np.vstack([U, diff[pos] / dist[pos][:, None]])
    G = _gap(K, P, U)
    evaluations = len(U)
    min_gap = float(G.min())
    if min_gap < -CONTAINMENT_TOL:
        k = int(np.argmin(G))
        raise ContainmentViolation(
            f"h_P(u) < h_K(u) by {-min_gap:.3g} at u = {U[k].tolist()}; K is not inside P")

    # covering radius of the coarse set, measured with probe directions
    probe = sample_unit_directions(probes, [seed, 1], d)
    chord, _ = cKDTree(U).query(probe)
    theta = float(np.max(2.0 * np.arcsin(np.minimum(chord / 2.0, 1.0))))

    order = np.argsort(G)[::-1][:top]
    best_u, best_g = U[order].copy(), G[order].copy()
    step = np.full(len(best_u), max(theta, 1e-3))
    for _ in range(refine_iters):
        cand = _tangent_perturb(best_u, step, rng)
        gc = _gap(K, P, cand)
        evaluations += len(cand)
        better = gc > best_g
        best_u[better] = cand[better]
        best_g[better] = gc[better]
        step[~better] *= 0.5
    k = int(np.argmax(best_g))
    value = float(best_g[k])
    # |grad h_L| <= max |x| over L, for both bodies
    lip = float(np.max(np.linalg.norm(P.vertices, axis=1)) if P.has_vertices
                else P.circumradius_bound()) + K.circumradius_bound()
    return HausdorffReport(value, best_u[k], lip, theta, value + lip * theta, min_gap,
                           evaluations, vertex_distance)


def hausdorff_gap(K, P, coarse_dirs=20000, refine_iters=40, seed=0, seed_vertices=True):
    """Certified lower bound (and estimate) of ``d_H(K, P)`` for ``K`` inside ``P``."""
    return hausdorff_report(K, P, coarse_dirs, refine_iters, seed,
                            seed_vertices=seed_vertices).value


def containment_spot_check(K, P, count=10**4, seed=0, tol=SPOT_CHECK_TOL):
    """Smallest ``h_P(u) - h_K(u) + tol`` over random directions; negative means failure."""
    U = sample_unit_directions(count, [seed, 7], K.dim)
    return float(np.min(_gap(K, P, U)) + tol)


# ----------------------------------------------------------------------------
# Drivers


@dataclass(frozen=True)
class ApproxOptions:
    """Knobs shared by the approximation drivers.

    ``fill_budget`` makes :func:`approximate_n` spend the facet budget: after
    the guaranteed construction it shrinks the net radius until the facet
    count is just below ``n``.
    """

    seed: int = 0
    oversample: Optional[int] = None
    coarse_dirs: int = 20000
    refine_iters: int = 40
    volume_samples: int = 10**5
    max_retries: int = 6
    spot_check_dirs: int = 10**4
    fill_budget: bool = False
    fill_rounds: int = 4
    fill_tolerance: float = 0.97


@dataclass
class ApproxResult:
    polytope: HPolytope
    facet_count: int
    eps_target: float
    d_H: float
    bound_facets: float
    c1: float
    n: int
    delta: float
    attempts: int
    hausdorff: HausdorffReport
    provenance: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)

    def to_dict(self, include_halfspaces=False):
        doc = {
            "facet_count": self.facet_count,
            "eps_target": self.eps_target,
            "d_H": self.d_H,
            "bound_facets": self.bound_facets,
            "c1": self.c1,
            "n": self.n,
            "delta": self.delta,
            "attempts": self.attempts,
            "hausdorff": self.hausdorff.to_dict(),
            "provenance": self.provenance,
            "checks": [c.to_row() for c in self.checks],
        }
        if include_halfspaces:
            doc["halfspaces"] = np.hstack(
                [self.polytope.normals, self.polytope.offsets[:, None]]).tolist()
        return doc


def _side_value(K, opts):
    """``V_{d-1}(K + B)`` and its standard error."""
    V = intrinsic_volumes(K, opts.volume_samples, opts.seed)
    p = side_polynomial(V)
    return eval_side(p, 1.0), side_stderr(p, 1.0)


def _exponent(d):
    return 2.0 / (d - 1)


def _check(quantity, value, lower=None, upper=None, stderr=0.0):
    ok = True
    if lower is not None:
        ok &= value > lower
    if upper is not None:
        ok &= value < upper
    return BoundCheck(quantity, float(value), None if lower is None else float(lower),
                      None if upper is None else float(upper), bool(ok), stderr)


def _build(K, delta, seed, opts, cloud=None):
    if cloud is None:
        cloud = boundary_cloud(K, delta, opts.oversample, seed)
    net = body_net(K, delta, seed=seed, cloud=cloud, with_bound=False)
    P = circumscribe(K, net.normals)
    rep = hausdorff_report(K, P, opts.coarse_dirs, opts.refine_iters, seed)
    return net, P, rep, cloud


def approximate_eps(K, eps, opts=ApproxOptions()):
    """Circumscribed polytope with ``d_H(K, P) < eps``.

    The net radius starts at ``delta = sqrt(eps / sqrt(3))`` and is halved
    whenever the measured distance is not below ``eps``.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    d = K.dim
    c = constants(d)
    side, side_err = _side_value(K, opts)
    bound_facets = c.c12bis * (side + 4.0 * side_err) * eps ** (-(d - 1) / 2.0)
    delta = np.sqrt(eps / np.sqrt(3.0))
    history = []
    for attempt in range(opts.max_retries + 1):
        seed = [opts.seed, attempt]
        net, P, rep, _ = _build(K, delta, seed, opts)
        dh = rep.best
        history.append({"delta": float(delta), "facets": P.n_facets, "d_H": dh})
        log.debug("attempt %d: delta %.4g, %d facets, d_H %.4g", attempt, delta, P.n_facets, dh)
        if dh < eps:
            break
        delta /= 2.0
    else:
        raise RetryExhausted(f"d_H stayed >= {eps} after {opts.max_retries} halvings",
                             diagnostics=history)
    slack = containment_spot_check(K, P, opts.spot_check_dirs, opts.seed)
    if slack < 0:
        raise ContainmentViolation(f"support spot check failed by {-slack:.3g}")
    facets = P.n_facets
    checks = [
        _check("d_H", dh, upper=eps),
        _check("facets", facets, upper=bound_facets),
        _check("containment_slack", slack, lower=0.0),
    ]
    if facets > bound_facets:
        raise BoundViolation(f"{facets} facets exceed the bound {bound_facets:.6g}",
                             details=checks[1].to_row())
    return ApproxResult(
        polytope=P, facet_count=facets, eps_target=float(eps), d_H=dh,
        bound_facets=float(bound_facets), c1=dh * facets ** _exponent(d), n=facets,
        delta=float(delta), attempts=len(history), hausdorff=rep,
        provenance={"operation": "approx-eps", "eps": float(eps), "seed": opts.seed,
                    "side_value": side, "side_stderr": side_err, "history": history,
                    "net_size": len(net)},
        checks=checks)


def budget_eps(K, n, opts=ApproxOptions()):
    """``(eps, threshold)`` of the facet-count driver; raises below the threshold."""
    d = K.dim
    c = constants(d)
    side, _ = _side_value(K, opts)
    threshold = c.c12bis * side
    if not n > threshold:
        raise ThresholdNotMet(f"n = {n} must exceed c12bis V_(d-1)(K+B) = {threshold:.6g}")
    return c.c13 * (side / n) ** _exponent(d), threshold


def _fill(K, n, base, opts):
    """Shrink the net radius on a fresh dense cloud until the facet count nears ``n``."""
    d = K.dim
    k = 1.0 / (d - 1)
    delta = base.delta * (base.facet_count / n) ** k
    floor = 0.85 * delta
    seed = [opts.seed, 1000]
    cloud = boundary_cloud(K, floor, opts.oversample, seed)
    lifted = np.hstack([cloud.feet, cloud.normals])
    space = SampledMetricSpace(lifted, MixedMetric(d), cloud.gamma)
    best, trail = None, []
    for _ in range(opts.fill_rounds):
        delta = max(delta, floor)
        net = greedy_net(space, delta, seed)
        trail.append({"delta": float(delta), "facets": len(net)})
        if len(net) <= n:
            if best is None or len(net) > len(best[1]):
                best = (delta, net)
            if len(net) >= opts.fill_tolerance * n or delta <= floor:
                break
            delta *= (len(net) / n) ** k
        else:
            delta *= (len(net) / n) ** k * 1.01
    if best is None:
        return None, trail
    delta, net = best
    P = circumscribe(K, net.centers[:, d:])
    rep = hausdorff_report(K, P, opts.coarse_dirs, opts.refine_iters, seed)
    return (delta, net, P, rep), trail


def approximate_n(K, n, opts=ApproxOptions()):
    """Circumscribed polytope with at most ``n`` facets.

    The target distance is ``eps = c13 (V_{d-1}(K+B) / n)^(2/(d-1))``, for
    which the facet bound of :func:`approximate_eps` equals ``n``.
    """
    n = int(n)
    d = K.dim
    c = constants(d)
    eps, threshold = budget_eps(K, n, opts)
    res = approximate_eps(K, eps, opts)
    if res.facet_count > n:
        raise BoundViolation(f"{res.facet_count} facets exceed n = {n}")
    P, dh, rep, delta = res.polytope, res.d_H, res.hausdorff, res.delta
    fill_trail = None
    if opts.fill_budget:
        filled, fill_trail = _fill(K, n, res, opts)
        if filled is not None and filled[3].best < dh:
            delta, _, P, rep = filled
            dh = rep.best
            slack = containment_spot_check(K, P, opts.spot_check_dirs, opts.seed)
            if slack < 0:
                raise ContainmentViolation(f"support spot check failed by {-slack:.3g}")
    side = res.provenance["side_value"]
    c1 = dh * n ** _exponent(d)
    c1_bound = c.c13 * side ** _exponent(d)
    checks = [
        _check("threshold_margin", n, lower=threshold),
        _check("d_H", dh, upper=eps),
        _check("facets", P.n_facets, upper=n + 1),
        _check("c1_budget", c1, upper=c1_bound),
    ]
    prov = dict(res.provenance, operation="approx-n", n=n, threshold=threshold,
                c1_bound=c1_bound, achieved_to_bound=c1 / c1_bound,
                base_facets=res.facet_count, base_d_H=res.d_H)
    if fill_trail is not None:
        prov["fill"] = fill_trail
    return replace(res, polytope=P, facet_count=P.n_facets, d_H=dh, c1=c1, n=n,
                   delta=float(delta), hausdorff=rep, provenance=prov, checks=checks)


def approximate_scaled(K, n, opts=ApproxOptions(), shrink=1e-6):
    """Facet-count driver applied to ``t* K``, then scaled back by ``1/t*``.

    ``t*`` minimises ``t^{-(d-1)/2} V_{d-1}(tK + B)`` over ``(0, rho_n]``; it
    is pulled inside by the relative margin ``shrink`` so that the scaled
    body meets the strict facet threshold.
    """
    n = int(n)
    d = K.dim
    c = constants(d)
    if not n > c.c12bisbis:
        raise ThresholdNotMet(f"n = {n} must exceed c12bisbis = {c.c12bisbis:.6g}")
    V = intrinsic_volumes(K, opts.volume_samples, opts.seed)
    t_star, _ = optimal_scaling(V, n)
    r = rho(V, n)
    t = min(t_star, r * (1.0 - shrink))
    res = approximate_n(Scaled(K, t), n, opts)
    P = res.polytope.scaled(1.0 / t)
    rep = hausdorff_report(K, P, opts.coarse_dirs, opts.refine_iters, [opts.seed, 2])
    dh = rep.best
    g_n = g(V, n)
    c1 = dh * n ** _exponent(d)
    bound = c.c13bis * g_n * V[1]
    checks = res.checks + [_check("c1_scaled", c1, upper=bound)]
    if not c1 < bound:
        raise BoundViolation(f"c1 = {c1:.6g} not below c13bis g_n V_1 = {bound:.6g}",
                             details=checks[-1].to_row())
    prov = dict(res.provenance, operation="approx-scaled", t_star=t_star, t_used=t, rho=r,
                g_n=g_n, V1=V[1], c1_scaled_bound=bound, scaled_d_H=res.d_H)
    return replace(res, polytope=P, d_H=dh, c1=c1, hausdorff=rep, provenance=prov,
                   checks=checks)


def c1_sweep(K, n_values, opts=ApproxOptions()):
    """``(n, c1)`` per facet budget plus the running suffix maximum.

    The suffix maximum over the swept budgets stands in for
    ``sup_{m >= n} c1(K, m)``; it can only underestimate the true supremum.
    """
    ns = sorted(int(n) for n in n_values)
    results = [approximate_n(K, n, opts) for n in ns]
    c1 = [r.c1 for r in results]
    suffix = list(np.maximum.accumulate(c1[::-1])[::-1])
    return [{"n": n, "c1": v, "c1_suffix_max": float(s), "facets": r.facet_count,
             "d_H": r.d_H} for n, v, s, r in zip(ns, c1, suffix, results)], results
