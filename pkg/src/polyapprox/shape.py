"""Dimension constants and the elongation shape factor ``g_l``.

For a body ``K`` with side polynomial ``p(t) = V_{d-1}(tK + B^d)`` and a
facet budget ``l``:

* ``rho_l(K)`` solves ``c12bis * p(rho) = l``;
* ``phi_l(K) = (min over 0 < t <= rho of t^{-(d-1)/2} p(t))^{2/(d-1)}``;
* ``g_l(K) = phi_l(K) / V_1(K)``, a scale- and translation-invariant number
  that is small for elongated bodies.

Shape functions accept either a body or a precomputed
:class:`~polyapprox.volumes.IntrinsicVolumeVector`.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from functools import lru_cache
from math import ceil, sqrt
from typing import NamedTuple, Optional

from .errors import DegenerateBody, InvalidIndexPair, ParameterBelowThreshold, ThresholdNotMet
from .volumes import (
    IntrinsicVolumeVector,
    ball_intrinsic_volume,
    eval_side,
    intrinsic_volumes,
    isoperimetric_ratio,
    kappa,
    side_polynomial,
    steiner_side_weight,
)

C13BIS_FACTOR = 1.01
INV_PHI = (sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ConstantsTable:
    d: int
    j0: int
    c12min: float
    c12: float
    c12bis: float
    c12bisbis: float
    c13: float
    c13bis: float
    v: tuple
    c_iv1: float
    c_iv2: float
    c_iv3: float
    c_iv4: float
    c_iv5: float
    alpha: float
    beta_strong: float
    beta_thm: float
    delta_1j0: float
    n_1j0: float

    def c_ij(self, i, j):
        self._check_pair(i, j)
        v = self.v
        return v[self.j0] * v[i] / (v[j] * v[1])

    def _check_pair(self, i, j):
        if not 1 <= i < j <= self.j0:
            raise InvalidIndexPair(
                f"need 1 <= i < j <= ceil((d-1)/2) = {self.j0}, got ({i}, {j})")

    def delta_ij(self, i, j, beta=None):
        self._check_pair(i, j)
        beta = self.beta_strong if beta is None else beta
        if (i, j) == (1, self.j0):
            return self.delta_1j0
        return self.delta_1j0 * self.c_ij(i, j) ** beta

    def n_ij(self, i, j):
        self._check_pair(i, j)
        if (i, j) == (1, self.j0):
            return self.n_1j0
        return self.n_1j0 * self.c_ij(i, j) ** (-self.alpha)

    def t_eps(self, eps):
        return self.c_iv3 * eps ** (-2.0 * self.j0 / self.d)

    def to_dict(self):
        doc = asdict(self)
        doc["v"] = list(self.v)
        return doc


@lru_cache(maxsize=None)
def constants(d):
    """All dimension-dependent constants, built on the weight ``(d-k) kappa_{d-k} / 2``."""
    if not 2 <= d <= 6:
        raise ValueError("constants are tabulated for 2 <= d <= 6")
    j0 = ceil((d - 1) / 2)
    c12min = 2.0 / (d * kappa(d - 1))
    c12 = 4.0**d / kappa(d - 1)
    c12bis = 3.0 ** ((d - 1) / 4) * c12
    c12bisbis = c12bis * ball_intrinsic_volume(d, d - 1)
    c13 = c12bis ** (2.0 / (d - 1))
    v = (None,) + tuple(ball_intrinsic_volume(d, k) ** (1.0 / k) for k in range(1, d + 1))

    def w(k):
        return steiner_side_weight(d, k)

    c_iv1 = w(0) + sum(w(k) * (v[k] / v[1]) ** k for k in range(1, j0))
    c_iv2 = sum(w(k) * (v[k] / v[j0]) ** k for k in range(j0, d))
    c_iv3 = (c_iv2 * (d - 1) / c_iv1) ** (-2.0 / d)
    c_iv4 = c_iv1 * c_iv3 ** -0.5 + c_iv2 * c_iv3 ** ((d - 1) / 2)
    c_iv5 = w(0) + sum(w(k) * (v[k] / v[1]) ** k for k in range(1, d))
    alpha = 2.0 * j0 * (d - 1) / d
    return ConstantsTable(
        d=d, j0=j0, c12min=c12min, c12=c12, c12bis=c12bis, c12bisbis=c12bisbis,
        c13=c13, c13bis=C13BIS_FACTOR * c13, v=v,
        c_iv1=c_iv1, c_iv2=c_iv2, c_iv3=c_iv3, c_iv4=c_iv4, c_iv5=c_iv5,
        alpha=alpha, beta_strong=2.0 * j0 / ((d - 1) * d), beta_thm=j0 / ((d - 1) * d),
        delta_1j0=c_iv4 ** (2.0 / (d - 1)), n_1j0=c12bis * c_iv5 * c_iv3 ** (d - 1),
    )


def _volumes(K, samples=10**5, seed=0):
    if isinstance(K, IntrinsicVolumeVector):
        return K
    return intrinsic_volumes(K, samples, seed)


def golden_section(f, lo, hi, tol=1e-10, max_iter=500):
    """Minimise a unimodal ``f`` on ``[lo, hi]``; endpoints are candidates too."""
    a, b = lo, hi
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if b - a <= tol * max(1.0, abs(a), abs(b)):
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - INV_PHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_PHI * (b - a)
            f2 = f(x2)
    best = min([(f1, x1), (f2, x2), (f(lo), lo), (f(hi), hi)])
    return best[1], best[0]


def rho(K, l, samples=10**5, seed=0):
    """Largest admissible scaling: ``c12bis * V_{d-1}(rho K + B) = l``."""
    V = _volumes(K, samples, seed)
    c = constants(V.dim)
    if not l > c.c12bisbis:
        raise ParameterBelowThreshold(f"l = {l} must exceed c12bisbis = {c.c12bisbis:.6g}")
    p = side_polynomial(V)
    target = l / c.c12bis
    if len(p.coefficients) < 2 or all(a == 0 for a in p.coefficients[1:]):
        raise DegenerateBody("side polynomial is constant")
    hi = 1.0
    while eval_side(p, hi) <= target:
        hi *= 2.0
    lo = 0.0
    while hi - lo > 1e-12 * hi:
        mid = 0.5 * (lo + hi)
        if eval_side(p, mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def side_ratio(p, t):
    """``t^{-(d-1)/2} p(t)``."""
    return t ** (-(p.dim - 1) / 2.0) * eval_side(p, t)


def optimal_scaling(K, l, samples=10**5, seed=0):
    """``(t*, f(t*))`` minimising ``t^{-(d-1)/2} p(t)`` over ``(0, rho_l]``.

    The objective is a positive sum of exponentials in ``log t``, hence
    convex there; golden-section search runs on ``log t``.
    """
    from math import exp, log

    V = _volumes(K, samples, seed)
    r = rho(V, l)
    p = side_polynomial(V)
    s, fmin = golden_section(lambda s: side_ratio(p, exp(s)), log(r * 1e-9), log(r))
    return exp(s), fmin


def phi(K, l, samples=10**5, seed=0):
    V = _volumes(K, samples, seed)
    _, fmin = optimal_scaling(V, l)
    return fmin ** (2.0 / (V.dim - 1))


def g(K, l, samples=10**5, seed=0):
    """Shape factor ``g_l(K) = phi_l(K) / V_1(K)``."""
    V = _volumes(K, samples, seed)
    if V[1] <= 0:
        raise DegenerateBody("V_1 vanishes")
    return phi(V, l) / V[1]


@dataclass(frozen=True)
class ElongationCertificate:
    i: int
    j: int
    eps: float
    ratio: float
    elongated: bool
    N: float
    bound: float
    g_value: float
    t_eps: float
    applicable: bool
    rho_N_normalized: float
    f_t_eps: float
    q_t_eps: float
    passed: Optional[bool]

    @property
    def chain_ok(self):
        return self.rho_N_normalized > self.t_eps and self.f_t_eps <= self.q_t_eps

    def to_dict(self):
        doc = asdict(self)
        doc["chain_ok"] = self.chain_ok
        return doc


def elongation_certificate(K, eps, i, j, samples=10**5, seed=0):
    """Numerically check the elongation bound ``g_N(K) <= delta_ij eps^beta``.

    ``passed`` is ``None`` when the body is not ``(eps: i, j)``-elongated or
    when ``t_eps <= 1`` (outside the range the bound is derived for).
    """
    V = _volumes(K, samples, seed)
    d = V.dim
    c = constants(d)
    c._check_pair(i, j)
    if not eps > 0:
        raise ValueError("eps must be positive")
    ratio = isoperimetric_ratio(V, i, j)
    elongated = ratio < eps
    eps_eff = c.c_ij(i, j) * eps
    N = c.n_ij(i, j) * eps ** (-c.alpha)
    bound = c.delta_ij(i, j) * eps**c.beta_strong
    t_eps = c.t_eps(eps_eff)
    # g_N is defined only above c12bisbis
    defined = N > c.c12bisbis
    applicable = defined and t_eps > 1.0
    g_value = g(V, N) if defined else float("nan")
    # intermediate inequalities on the normalised body V_1 = 1
    Vn = V.scaled(1.0 / V[1])
    pn = side_polynomial(Vn)
    f_t = side_ratio(pn, t_eps)
    q_t = c.c_iv4 * eps_eff ** (c.j0 / d)
    rho_n = rho(Vn, N) if defined else float("nan")
    passed = (g_value <= bound) if (applicable and elongated) else None
    return ElongationCertificate(i, j, eps, ratio, elongated, N, bound, g_value, t_eps,
                                 applicable, rho_n, f_t, q_t, passed)


class Theorem1Bound(NamedTuple):
    threshold_n: float
    dh_bound: float
    dh_bound_weak_beta: float


def theorem1_bound(K, n, eps, i, j, samples=10**5, seed=0):
    """Facet threshold and the Hausdorff bound for an elongated body."""
    V = _volumes(K, samples, seed)
    d = V.dim
    c = constants(d)
    threshold = c.n_ij(i, j) * eps ** (-c.alpha)
    if n < threshold:
        raise ThresholdNotMet(f"n = {n} below n_ij eps^-alpha = {threshold:.6g}")
    scale = V[1] * n ** (-2.0 / (d - 1))
    return Theorem1Bound(
        threshold,
        c.delta_ij(i, j) * eps**c.beta_strong * scale,
        c.delta_ij(i, j, beta=c.beta_thm) * eps**c.beta_thm * scale,
    )
