"""Oracle model of convex bodies.

Every body is an immutable value object that answers three questions:
the support value ``h_K(u)``, a support point realising it, and the
nearest point of ``K`` to an arbitrary ``x``.  Nothing is ever meshed.

All oracle methods on the classes are vectorised: they take ``(m, d)``
arrays and return ``(m,)`` or ``(m, d)`` arrays.  The module-level
functions (:func:`support_value`, :func:`support_point`, ...) accept
single vectors as well and validate their inputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import HalfspaceIntersection, cKDTree
from scipy.spatial import QhullError

from .errors import (
    ConvergenceFailure,
    DegenerateBody,
    ParseError,
    UnboundedBody,
    VertexEnumerationOverflow,
)

MIN_DIM = 2
MAX_DIM = 6
UNIT_TOL = 1e-12
TIE_TOL = 1e-12
VERTEX_CAP = 10**5
PROJECTION_MAX_STEPS = 10**4
# face-lattice projection is used up to this many facets; Wolfe's algorithm beyond
FACE_PROJECTION_MAX_FACETS = 256


def _check_dim(d):
    if not MIN_DIM <= d <= MAX_DIM:
        raise ValueError(f"dimension must be in [{MIN_DIM}, {MAX_DIM}], got {d}")


def _as_points(x, d):
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.shape[1] != d:
        raise ValueError(f"expected points of dimension {d}, got shape {arr.shape}")
    return arr, single


def _as_directions(u, d):
    arr, single = _as_points(u, d)
    norms = np.linalg.norm(arr, axis=1)
    if np.any(np.abs(norms - 1.0) > UNIT_TOL):
        raise ValueError("directions must be unit vectors (|u| = 1 within 1e-12)")
    return arr, single


def _lex_argmin(points):
    """Index of the lexicographically smallest row."""
    order = np.lexsort(points.T[::-1])
    return order[0]


class ConvexBody:
    """Common interface of the body variants.

    Subclasses implement ``_support``, ``_support_points`` and ``_project``
    on 2-d arrays.
    """

    dim: int

    def _support(self, U):
        raise NotImplementedError

    def _support_points(self, U):
        raise NotImplementedError

    def _project(self, X):
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError

    def bounding_box(self):
        eye = np.eye(self.dim)
        hi = self._support(eye)
        lo = -self._support(-eye)
        return lo, hi

    def distance(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.linalg.norm(X - self._project(X), axis=1)

    def circumradius_bound(self):
        """Upper bound on ``max |x|`` over ``K`` (from the bounding box)."""
        lo, hi = self.bounding_box()
        return float(np.linalg.norm(np.maximum(np.abs(lo), np.abs(hi))))


@dataclass(frozen=True, eq=False)
class Ball(ConvexBody):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).ravel()
        _check_dim(c.size)
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return self.center.size

    def _support(self, U):
        return U @ self.center + self.radius

    def _support_points(self, U):
        return self.center + self.radius * U

    def _project(self, X):
        diff = X - self.center
        r = np.linalg.norm(diff, axis=1)
        scale = np.ones_like(r)
        out = r > self.radius
        scale[out] = self.radius / r[out]
        return self.center + diff * scale[:, None]

    def to_dict(self):
        return {"dim": self.dim, "variant": "ball", "center": self.center.tolist(),
                "radius": self.radius}


def _ellipsoid_multiplier(a, Y, max_iter=200):
    """Root ``lam > 0`` of ``S(lam) = sum (a y / (a^2 + lam))^2 = 1`` per row of ``Y``.

    ``S`` is decreasing, so the root is bracketed by
    ``[max(0, a_min |y| - a_max^2), a_max |y|]``.  Newton runs on
    ``psi = 1 - S^(-1/2)``, which is close to linear for large ``lam``;
    the bracket is updated from the sign of ``psi`` and a step leaving it
    is replaced by bisection.
    """
    a2 = a**2
    r = np.linalg.norm(Y, axis=1)
    lo = np.maximum(0.0, a.min() * r - a2.max())
    hi = a.max() * r
    A = (a * Y) ** 2
    out = np.empty(len(Y))
    idx = np.arange(len(Y))
    lam = lo.copy()
    for _ in range(max_iter):
        den = a2 + lam[:, None]
        S = np.sum(A / den**2, axis=1)
        dS = -2.0 * np.sum(A / den**3, axis=1)
        psi = 1.0 - S**-0.5
        dpsi = 0.5 * S**-1.5 * dS
        beyond = psi < 0.0
        lo = np.where(beyond, lo, lam)
        hi = np.where(beyond, lam, hi)
        new = lam - psi / dpsi
        leave = ~((new >= lo) & (new <= hi))
        new[leave] = 0.5 * (lo[leave] + hi[leave])
        done = ((np.abs(psi) <= 1e-15) | (np.abs(new - lam) <= 4e-16 * (1.0 + new))
                | (hi - lo <= 4e-16 * (1.0 + hi)))
        out[idx[done]] = np.where(np.abs(psi[done]) <= 1e-15, lam[done], new[done])
        keep = ~done
        if not keep.any():
            return out
        idx, lam, lo, hi, A = idx[keep], new[keep], lo[keep], hi[keep], A[keep]
    raise ConvergenceFailure("ellipsoid projection did not converge")


@dataclass(frozen=True, eq=False)
class Ellipsoid(ConvexBody):
    """Ellipsoid ``center + F diag(semi_axes) B^d``.

    ``orientation`` is an orthonormal matrix whose columns are the
    principal directions.
    """

    center: np.ndarray
    semi_axes: np.ndarray
    orientation: np.ndarray = None

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).ravel()
        a = np.asarray(self.semi_axes, dtype=float).ravel()
        _check_dim(c.size)
        if a.size != c.size:
            raise ValueError("need one semi-axis per dimension")
        if np.any(a <= 0):
            raise ValueError("semi-axes must be positive")
        if self.orientation is None:
            F = np.eye(c.size)
        else:
            F = np.asarray(self.orientation, dtype=float)
            if F.shape != (c.size, c.size) or not np.allclose(F.T @ F, np.eye(c.size), atol=1e-9):
                raise ValueError("orientation must be an orthonormal d x d frame")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "semi_axes", a)
        object.__setattr__(self, "orientation", F)

    @property
    def dim(self):
        return self.center.size

    @cached_property
    def shape_matrix(self):
        """``M = F diag(a^2) F^T``; ``h(u) = <c,u> + sqrt(u^T M u)``."""
        F = self.orientation
        return (F * self.semi_axes**2) @ F.T

    def _support(self, U):
        coords = U @ self.orientation
        return U @ self.center + np.sqrt(np.sum((coords * self.semi_axes) ** 2, axis=1))

    def _support_points(self, U):
        MU = U @ self.shape_matrix
        norm = np.sqrt(np.einsum("ij,ij->i", U, MU))
        return self.center + MU / norm[:, None]

    def _project(self, X):
        a = self.semi_axes
        a2 = a**2
        Y = (X - self.center) @ self.orientation
        outside = np.sum((Y / a) ** 2, axis=1) > 1.0
        Z = Y.copy()
        if np.any(outside):
            Yo = Y[outside]
            lam = _ellipsoid_multiplier(a, Yo)
            Z[outside] = a2 * Yo / (a2 + lam[:, None])
        return self.center + Z @ self.orientation.T

    @property
    def volume(self):
        from .volumes import kappa

        return kappa(self.dim) * float(np.prod(self.semi_axes))

    def to_dict(self):
        return {"dim": self.dim, "variant": "ellipsoid", "center": self.center.tolist(),
                "semi_axes": self.semi_axes.tolist(),
                "orientation": self.orientation.tolist()}


@dataclass(frozen=True, eq=False)
class Segment(ConvexBody):
    start: np.ndarray
    end: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.start, dtype=float).ravel()
        q = np.asarray(self.end, dtype=float).ravel()
        _check_dim(p.size)
        if p.size != q.size:
            raise ValueError("segment endpoints must have the same dimension")
        if np.allclose(p, q, rtol=0, atol=0):
            raise ValueError("segment endpoints must be distinct")
        object.__setattr__(self, "start", p)
        object.__setattr__(self, "end", q)

    @property
    def dim(self):
        return self.start.size

    @property
    def length(self):
        return float(np.linalg.norm(self.end - self.start))

    def _support(self, U):
        return np.maximum(U @ self.start, U @ self.end)

    def _support_points(self, U):
        a = U @ self.start
        b = U @ self.end
        scale = TIE_TOL * (1.0 + np.abs(a) + np.abs(b))
        lex_first = self.start if _lex_argmin(np.vstack([self.start, self.end])) == 0 else self.end
        out = np.where((b > a)[:, None], self.end, self.start)
        tie = np.abs(a - b) <= scale
        out[tie] = lex_first
        return out

    def _project(self, X):
        v = self.end - self.start
        t = np.clip((X - self.start) @ v / (v @ v), 0.0, 1.0)
        return self.start + t[:, None] * v

    def to_dict(self):
        return {"dim": self.dim, "variant": "segment",
                "endpoints": [self.start.tolist(), self.end.tolist()]}


@dataclass(frozen=True, eq=False)
class Box(ConvexBody):
    min_corner: np.ndarray
    sides: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.min_corner, dtype=float).ravel()
        s = np.asarray(self.sides, dtype=float).ravel()
        _check_dim(lo.size)
        if s.size != lo.size or np.any(s <= 0):
            raise ValueError("box needs d positive side lengths")
        object.__setattr__(self, "min_corner", lo)
        object.__setattr__(self, "sides", s)

    @property
    def dim(self):
        return self.min_corner.size

    @property
    def max_corner(self):
        return self.min_corner + self.sides

    def _support(self, U):
        return U @ self.min_corner + np.sum(np.maximum(U, 0.0) * self.sides, axis=1)

    def _support_points(self, U):
        # zero components tie; the lexicographic rule picks the low side
        return self.min_corner + (U > TIE_TOL) * self.sides

    def _project(self, X):
        return np.clip(X, self.min_corner, self.max_corner)

    def to_dict(self):
        return {"dim": self.dim, "variant": "box", "min_corner": self.min_corner.tolist(),
                "sides": self.sides.tolist()}


def _chebyshev_center(A, b):
    d = A.shape[1]
    c = np.zeros(d + 1)
    c[-1] = -1.0
    A_ub = np.hstack([A, np.linalg.norm(A, axis=1)[:, None]])
    bounds = [(None, None)] * d + [(0, None)]
    res = linprog(c, A_ub=A_ub, b_ub=b, bounds=bounds, method="highs")
    if res.status == 2:
        raise DegenerateBody("halfspace intersection is empty")
    if res.status == 3:
        raise UnboundedBody("Chebyshev centre LP is unbounded")
    return res.x[:d], res.x[d]


def _dedupe_points(P, tol):
    if len(P) == 0:
        return P
    tree = cKDTree(P)
    keep = np.ones(len(P), dtype=bool)
    for i, j in sorted(tree.query_pairs(tol)):
        if keep[i] and keep[j]:
            keep[j] = False
    return P[keep]


def halfspace_vertices(A, b, cap=VERTEX_CAP):
    """Vertices of the bounded full-dimensional polytope ``{x : A x <= b}``.

    Raises :class:`DegenerateBody` when the polytope has empty interior.
    """
    center, radius = _chebyshev_center(A, b)
    scale = max(1.0, float(np.max(np.abs(b))))
    if radius <= 1e-10 * scale:
        raise DegenerateBody("polytope has empty interior")
    hs = np.hstack([A, -b[:, None]])
    try:
        hi = HalfspaceIntersection(hs, center)
    except QhullError:
        hi = HalfspaceIntersection(hs, center, qhull_options="QJ")
    V = hi.intersections
    V = V[np.all(np.isfinite(V), axis=1)]
    V = _dedupe_points(V, 1e-9 * scale)
    if len(V) > cap:
        raise VertexEnumerationOverflow(f"{len(V)} vertices exceed the cap of {cap}")
    return V


def polytope_faces(A, b, V):
    """Nonempty proper faces as ``(origin, basis)`` pairs of their affine hulls.

    Faces are the vertex sets obtained by intersecting facet vertex sets
    until no new set appears; ``basis`` has orthonormal rows.
    """
    scale = max(1.0, float(np.max(np.abs(b))))
    tol = 1e-9 * scale
    incident = V @ A.T >= b - tol
    facets = {frozenset(np.flatnonzero(col).tolist()) for col in incident.T}
    facets.discard(frozenset())
    faces = set(facets) | {frozenset([i]) for i in range(len(V))}
    frontier = set(facets)
    while frontier:
        found = set()
        for F in frontier:
            for G in facets:
                H = F & G
                if H and H not in faces:
                    found.add(H)
        faces |= found
        frontier = found
    out = []
    for F in faces:
        P = V[sorted(F)]
        o = P[0]
        if len(P) == 1:
            out.append((o, np.zeros((0, V.shape[1]))))
            continue
        _, sv, Vt = np.linalg.svd(P - o, full_matrices=False)
        out.append((o, Vt[sv > tol]))
    return out


@dataclass(frozen=True, eq=False)
class HPolytope(ConvexBody):
    """Bounded polytope ``{x : <a_i, x> <= b_i}`` with unit normals ``a_i``.

    Boundedness is checked at construction with one LP per axis direction.
    """

    normals: np.ndarray
    offsets: np.ndarray
    check_bounded: bool = field(default=True, repr=False)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.normals, dtype=float))
        b = np.asarray(self.offsets, dtype=float).ravel()
        _check_dim(A.shape[1])
        if len(A) != len(b):
            raise ValueError("need one offset per normal")
        n = np.linalg.norm(A, axis=1)
        if np.any(n == 0):
            raise ValueError("zero normal in halfspace list")
        object.__setattr__(self, "normals", A / n[:, None])
        object.__setattr__(self, "offsets", b / n)
        if self.check_bounded:
            for u in np.vstack([np.eye(self.dim), -np.eye(self.dim)]):
                if not np.isfinite(self.support_lp(u)):
                    raise UnboundedBody("halfspace intersection is unbounded")

    @property
    def dim(self):
        return self.normals.shape[1]

    @property
    def n_facets(self):
        return len(self.offsets)

    def support_lp(self, u):
        """Linear maximisation of ``<u, x>``; ``inf`` if unbounded."""
        res = linprog(-np.asarray(u, dtype=float), A_ub=self.normals, b_ub=self.offsets,
                      bounds=[(None, None)] * self.dim, method="highs")
        if res.status == 3:
            return np.inf
        if res.status == 2:
            from .errors import Infeasible

            raise Infeasible("polytope is empty")
        if res.status != 0:
            raise ConvergenceFailure(f"LP failed: {res.message}")
        return -res.fun

    @cached_property
    def _vertex_cache(self):
        try:
            return halfspace_vertices(self.normals, self.offsets)
        except DegenerateBody:
            return None

    @property
    def vertices(self):
        V = self._vertex_cache
        if V is None:
            raise DegenerateBody("polytope has empty interior; no vertex enumeration")
        return V

    @property
    def has_vertices(self):
        return self._vertex_cache is not None

    def contains(self, X, tol=1e-9):
        X = np.atleast_2d(X)
        return np.all(X @ self.normals.T <= self.offsets + tol, axis=1)

    def _support(self, U):
        if self.has_vertices:
            return np.max(U @ self.vertices.T, axis=1)
        return np.array([self.support_lp(u) for u in U])

    def _support_points(self, U):
        V = self.vertices
        vals = U @ V.T
        h = vals.max(axis=1)
        out = np.empty((len(U), self.dim))
        for k in range(len(U)):
            face = V[vals[k] >= h[k] - 1e-9 * (1.0 + abs(h[k]))]
            out[k] = face[_lex_argmin(face)]
        return out

    @cached_property
    def _faces(self):
        if self.n_facets > FACE_PROJECTION_MAX_FACETS:
            return None
        return polytope_faces(self.normals, self.offsets, self.vertices)

    def _project(self, X):
        out = X.copy()
        outside = np.flatnonzero(~self.contains(X, tol=0.0))
        if len(outside) == 0:
            return out
        V = self.vertices
        faces = self._faces
        if faces is None:
            for k in outside:
                out[k] = X[k] + min_norm_point(V - X[k])
            return out
        # the nearest point is the projection onto the affine hull of the face
        # containing it in its relative interior, and that projection lies in P
        Y = X[outside]
        best = np.full(len(Y), np.inf)
        proj = np.empty_like(Y)
        tol = 1e-12 * max(1.0, float(np.max(np.abs(self.offsets))))
        for o, Q in faces:
            Z = o + ((Y - o) @ Q.T) @ Q
            dist = np.sum((Z - Y) ** 2, axis=1)
            ok = (dist < best) & self.contains(Z, tol=tol)
            best[ok] = dist[ok]
            proj[ok] = Z[ok]
        for k in np.flatnonzero(~np.isfinite(best)):
            proj[k] = Y[k] + min_norm_point(V - Y[k])
        out[outside] = proj
        return out

    def scaled(self, factor):
        return HPolytope(self.normals, self.offsets * factor, check_bounded=False)

    def to_dict(self):
        return {"dim": self.dim, "variant": "hpolytope",
                "halfspaces": [list(a) + [float(b)] for a, b in
                               zip(self.normals.tolist(), self.offsets)]}


def min_norm_point(P, tol=1e-12, max_steps=PROJECTION_MAX_STEPS):
    """Point of minimum norm in ``conv(P)`` (Wolfe's algorithm)."""
    P = np.asarray(P, dtype=float)
    scale = max(1.0, float(np.max(np.sum(P**2, axis=1))))
    S = [int(np.argmin(np.sum(P**2, axis=1)))]
    w = np.array([1.0])
    x = P[S[0]].copy()
    for _ in range(max_steps):
        j = int(np.argmin(P @ x))
        if x @ x - P[j] @ x <= tol * scale or j in S:
            return x
        S.append(j)
        w = np.append(w, 0.0)
        for _ in range(max_steps):
            Q = P[S]
            k = len(S)
            M = np.zeros((k + 1, k + 1))
            M[:k, :k] = Q @ Q.T
            M[:k, k] = 1.0
            M[k, :k] = 1.0
            rhs = np.zeros(k + 1)
            rhs[k] = 1.0
            v = np.linalg.lstsq(M, rhs, rcond=None)[0][:k]
            if np.all(v > 1e-14):
                w = v
                break
            neg = v <= 1e-14
            theta = np.min(w[neg] / (w[neg] - v[neg]))
            w = (1 - theta) * w + theta * v
            keep = w > 1e-14
            keep[np.argmax(w)] = True
            S = [s for s, kp in zip(S, keep) if kp]
            w = w[keep]
            w /= w.sum()
        else:
            raise ConvergenceFailure("minimum-norm-point minor cycle did not terminate")
        x = w @ P[S]
    raise ConvergenceFailure("projection onto polytope exceeded the step cap")


@dataclass(frozen=True, eq=False)
class Scaled(ConvexBody):
    """``factor * inner`` (scaling about the origin)."""

    inner: ConvexBody
    factor: float

    def __post_init__(self):
        if not self.factor > 0:
            raise ValueError("scale factor must be positive")
        object.__setattr__(self, "factor", float(self.factor))

    @property
    def dim(self):
        return self.inner.dim

    def _support(self, U):
        return self.factor * self.inner._support(U)

    def _support_points(self, U):
        return self.factor * self.inner._support_points(U)

    def _project(self, X):
        return self.factor * self.inner._project(X / self.factor)

    def to_dict(self):
        return {"dim": self.dim, "variant": "scaled", "inner": self.inner.to_dict(),
                "factor": self.factor}


@dataclass(frozen=True, eq=False)
class BallSum(ConvexBody):
    """Outer parallel body ``inner + radius * B^d``."""

    inner: ConvexBody
    radius: float

    def __post_init__(self):
        if not self.radius >= 0:
            raise ValueError("ball-sum radius must be nonnegative")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return self.inner.dim

    def _support(self, U):
        return self.inner._support(U) + self.radius

    def _support_points(self, U):
        return self.inner._support_points(U) + self.radius * U

    def _project(self, X):
        P = self.inner._project(X)
        diff = X - P
        dist = np.linalg.norm(diff, axis=1)
        out = X.copy()
        far = dist > self.radius
        out[far] = P[far] + diff[far] * (self.radius / dist[far])[:, None]
        return out

    def to_dict(self):
        return {"dim": self.dim, "variant": "ball_sum", "inner": self.inner.to_dict(),
                "radius": self.radius}


@dataclass(frozen=True)
class OuterBoundaryPoint:
    """Point ``x`` on the boundary of ``K + rB`` with its foot on ``K``."""

    x: np.ndarray
    foot: np.ndarray
    normal: np.ndarray


# ----------------------------------------------------------------------------
# Oracle functions


def support_value(K, u):
    U, single = _as_directions(u, K.dim)
    h = K._support(U)
    if not np.all(np.isfinite(h)):
        raise UnboundedBody("support value diverges")
    return float(h[0]) if single else h


def support_point(K, u):
    U, single = _as_directions(u, K.dim)
    S = K._support_points(U)
    return S[0] if single else S


def project_onto(K, x):
    X, single = _as_points(x, K.dim)
    P = K._project(X)
    return P[0] if single else P


def outer_boundary_sample(K, r, u):
    """Boundary point of ``K + rB`` with outer normal ``u``."""
    if not r > 0:
        raise ValueError("r must be positive")
    U, single = _as_directions(u, K.dim)
    foot = K._support_points(U)
    x = foot + r * U
    if single:
        return OuterBoundaryPoint(x=x[0], foot=foot[0], normal=U[0].copy())
    return OuterBoundaryPoint(x=x, foot=foot, normal=U.copy())


def sample_unit_directions(count, seed, dim=3):
    """``count`` i.i.d. uniform directions on the unit sphere of ``R^dim``."""
    if count < 1:
        raise ValueError("count must be at least 1")
    from .volumes import seed_key

    rng = np.random.default_rng(seed_key(seed))
    G = rng.standard_normal((count, dim))
    return G / np.linalg.norm(G, axis=1)[:, None]


# ----------------------------------------------------------------------------
# Structured text (JSON) description


def body_from_dict(doc):
    """Build a body from its JSON-like description."""
    if not isinstance(doc, dict):
        raise ParseError("body description must be an object")
    variant = doc.get("variant")
    if variant is None:
        raise ParseError("missing body variant", field="variant")
    dim = doc.get("dim")

    def vec(name, default=None):
        if name not in doc:
            if default is not None:
                return default
            raise ParseError("missing field", field=name)
        arr = np.asarray(doc[name], dtype=float)
        if dim is not None and arr.ndim == 1 and arr.size != dim:
            raise ParseError(f"expected {dim} entries", field=name)
        return arr

    zeros = np.zeros(dim) if dim is not None else None
    try:
        if variant == "ball":
            body = Ball(vec("center", zeros), float(doc.get("radius", 1.0)))
        elif variant == "ellipsoid":
            body = Ellipsoid(vec("center", zeros), vec("semi_axes"), doc.get("orientation"))
        elif variant == "segment":
            if "endpoints" in doc:
                p, q = doc["endpoints"]
            elif "length" in doc:
                half = 0.5 * float(doc["length"])
                p, q = -half * np.eye(dim)[0], half * np.eye(dim)[0]
            else:
                raise ParseError("segment needs endpoints or length", field="endpoints")
            body = Segment(p, q)
        elif variant == "box":
            body = Box(vec("min_corner", zeros), vec("sides"))
        elif variant == "hpolytope":
            hs = np.asarray(doc["halfspaces"], dtype=float)
            body = HPolytope(hs[:, :-1], hs[:, -1])
        elif variant == "scaled":
            body = Scaled(body_from_dict(doc["inner"]), float(doc["factor"]))
        elif variant == "ball_sum":
            body = BallSum(body_from_dict(doc["inner"]), float(doc["radius"]))
        else:
            raise ParseError(f"unknown body variant {variant!r}", field="variant")
    except KeyError as exc:
        raise ParseError("missing field", field=exc.args[0]) from None
    except (TypeError, ValueError) as exc:
        raise ParseError(str(exc), field="variant") from None
    if dim is not None and body.dim != dim:
        raise ParseError(f"body has dimension {body.dim}, document says {dim}", field="dim")
    return body


def load_body(path):
    with open(Path(path)) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, line=exc.lineno) from None
    return body_from_dict(doc)


def unit_cube(d=3):
    return Box(np.zeros(d), np.ones(d))


def unit_ball(d=3):
    return Ball(np.zeros(d), 1.0)
