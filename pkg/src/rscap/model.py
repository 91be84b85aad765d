"""Scalar maps of the replica-symmetric Ising perceptron with margin kappa >= 0.

Notation follows the usual saddle point system

    q = P(r) = E[tanh^2(sqrt(r) Z)],
    r = R(q, alpha) = alpha * B(q) / (1 - q)^2,
    B(q) = (1 - q) E[E(U_q)^2],   U_q = (kappa - sqrt(q) Z) / sqrt(1 - q),

where ``E`` is the inverse Mills ratio.  Substituting ``q = P(r)`` reduces the
system to the scalar equation ``f(r) = A(r) - alpha B(P(r)) = 0`` with
``A(r) = r (1 - P(r))^2``.

Expectations use the supplied Gauss-Hermite rule while the integrand is smooth
on the unit scale.  When ``r`` is large or ``q`` is close to one the
integrands develop a layer of width ``1/sqrt(r)`` (resp. ``sqrt((1-q)/q)``)
that no fixed rule resolves; a graded rule centred on the layer is used
instead (see :func:`rscap.gauss.layered_rule`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import DomainError
from .gauss import (
    DEFAULT_NODES,
    SQRT_2PI,
    QuadratureRule,
    composite_legendre,
    graded_breakpoints,
    hermite_rule,
    inv_mills_vec,
    layered_rule,
    log_tail,
    mills_gap_vec,
)

TWO_OVER_PI = 2.0 / math.pi
LOG2 = math.log(2.0)
# below this layer width the Gauss-Hermite rule is replaced by a graded one
LAYER_SWITCH = 1.0
# smallest 1 - q used when forming (1 - q)^-1 quantities
EPS_FLOOR = 1e-14


# ---------------------------------------------------------------------------
# argument checks
# ---------------------------------------------------------------------------

def _check_kappa(kappa):
    kappa = float(kappa)
    if not (math.isfinite(kappa) and kappa >= 0):
        raise DomainError(f"margin kappa must be finite and >= 0, got {kappa!r}")
    return kappa


def _check_q(q):
    q = float(q)
    if not (0.0 <= q < 1.0):
        raise DomainError(f"overlap q must lie in [0, 1), got {q!r}")
    return q


def _check_r(r):
    r = float(r)
    if not (math.isfinite(r) and r >= 0):
        raise DomainError(f"variance parameter r must be finite and >= 0, got {r!r}")
    return r


def _check_alpha(alpha):
    alpha = float(alpha)
    if not (math.isfinite(alpha) and alpha > 0):
        raise DomainError(f"alpha must be finite and > 0, got {alpha!r}")
    return alpha


def _default(rule):
    return hermite_rule(DEFAULT_NODES) if rule is None else rule


def panel_nodes(rule: QuadratureRule) -> int:
    """Gauss-Legendre nodes per panel for graded rules derived from ``rule``."""
    return max(8, len(rule) // 12)


def rule_for(center, width, rule=None) -> QuadratureRule:
    """Pick a rule able to resolve a layer of ``width`` around ``center``."""
    rule = _default(rule)
    if width >= LAYER_SWITCH:
        return rule
    return layered_rule(center, width, n_per_panel=panel_nodes(rule))


# ---------------------------------------------------------------------------
# spin side: P, S, A
# ---------------------------------------------------------------------------

def _sech2(x):
    t = np.exp(-2.0 * np.abs(x))
    return 4.0 * t / (1.0 + t) ** 2


def overlap_P(r, rule=None) -> float:
    """``P(r) = E[tanh^2(sqrt(r) Z)]``, in ``[0, 1)`` and increasing in ``r``."""
    r = _check_r(r)
    if r == 0:
        return 0.0
    s = math.sqrt(r)
    rl = rule_for(0.0, 1.0 / s, rule)
    return rl.expect(np.tanh(s * rl.nodes) ** 2)


def sech2_mean(r, rule=None) -> float:
    """``S(r) = E[sech^2(sqrt(r) Z)] = 1 - P(r)``, computed directly."""
    r = _check_r(r)
    if r == 0:
        return 1.0
    s = math.sqrt(r)
    rl = rule_for(0.0, 1.0 / s, rule)
    return rl.expect(_sech2(s * rl.nodes))


def sech2_integral(r, n_per_panel=20) -> float:
    """``I(r) = int sech^2(y) exp(-y^2 / (2r)) dy`` over the real line.

    Truncated to ``|y| <= Y`` with ``Y = max(25, min(6 sqrt(r), 60))``; the
    neglected mass is below ``4 exp(-2Y)``.
    """
    r = _check_r(r)
    if r == 0:
        return 0.0
    sr = math.sqrt(r)
    ymax = max(25.0, min(6.0 * sr, 60.0))
    breaks = graded_breakpoints(0.0, min(1.0, sr), -ymax, ymax, step=0.5)
    y, w = composite_legendre(breaks, n_per_panel)
    return float(np.dot(w, _sech2(y) * np.exp(-(y * y) / (2.0 * r))))


def sech2_mean_integral(r) -> float:
    """``S(r)`` through the change of variables ``y = sqrt(r) z``."""
    r = _check_r(r)
    if r == 0:
        return 1.0
    return sech2_integral(r) / math.sqrt(2.0 * math.pi * r)


def cap_A(r, rule=None) -> float:
    """``A(r) = r (1 - P(r))^2``; increasing bijection onto ``[0, 2/pi)``."""
    r = _check_r(r)
    s = sech2_mean(r, rule)
    return r * s * s


def cap_A_integral(r) -> float:
    """``A(r) = I(r)^2 / (2 pi)``, independent of the Gaussian rule."""
    i = sech2_integral(r)
    return i * i / (2.0 * math.pi)


# ---------------------------------------------------------------------------
# constraint side: B, C, alpha_c, R
# ---------------------------------------------------------------------------

def _big_B(q, eps, kappa, rule):
    # eps is 1 - q, passed separately so it keeps full relative precision
    if q == 0:
        return float(inv_mills_vec(np.array(kappa)) ** 2)
    eps = max(eps, EPS_FLOOR)
    sq, se = math.sqrt(q), math.sqrt(eps)
    rl = rule_for(kappa / sq, se / sq, rule)
    u = (kappa - sq * rl.nodes) / se
    return eps * rl.expect(inv_mills_vec(u) ** 2)


def big_B(q, kappa=0.0, rule=None) -> float:
    """``B(q) = (1 - q) E[E(U_q)^2]``.

    Equal to ``E(kappa)^2`` at ``q = 0``, strictly decreasing on ``[0, 1)``
    with limit ``C_kappa`` as ``q -> 1``.
    """
    q = _check_q(q)
    kappa = _check_kappa(kappa)
    return _big_B(q, 1.0 - q, kappa, rule)


def c_kappa(kappa) -> float:
    """``C_kappa = E[(kappa - Z)_+^2] = (kappa^2 + 1) Phi(kappa) + kappa phi(kappa)``."""
    kappa = _check_kappa(kappa)
    pdf = math.exp(-kappa * kappa / 2) / SQRT_2PI
    return (kappa * kappa + 1.0) * float(ndtr(kappa)) + kappa * pdf


def c_kappa_quadrature(kappa, rule=None) -> float:
    """``E[(kappa - Z)_+^2]`` by quadrature with a panel edge at the kink."""
    kappa = _check_kappa(kappa)
    rl = layered_rule(kappa, 1.0, n_per_panel=panel_nodes(_default(rule)))
    return rl.expect(np.maximum(kappa - rl.nodes, 0.0) ** 2)


def alpha_c(kappa) -> float:
    """Critical capacity ``2 / (pi C_kappa)``."""
    return 2.0 / (math.pi * c_kappa(kappa))


def r_map(q, alpha, kappa=0.0, rule=None) -> float:
    """``R(q, alpha) = alpha B(q) / (1 - q)^2``."""
    q = _check_q(q)
    alpha = _check_alpha(alpha)
    kappa = _check_kappa(kappa)
    eps = max(1.0 - q, EPS_FLOOR)
    return alpha * _big_B(q, eps, kappa, rule) / (eps * eps)


# ---------------------------------------------------------------------------
# free energy and the one-dimensional reduction
# ---------------------------------------------------------------------------

def _spin_entropy(r, rule):
    # E[log(2 cosh(sqrt(r) Z))]
    if r == 0:
        return LOG2
    s = math.sqrt(r)
    rl = rule_for(0.0, 1.0 / s, rule)
    x = s * rl.nodes
    return rl.expect(np.logaddexp(x, -x))


def _constraint_term(q, eps, kappa, rule):
    # E[log(1 - Phi(U_q))]
    if q == 0:
        return float(log_tail(kappa))
    eps = max(eps, EPS_FLOOR)
    sq, se = math.sqrt(q), math.sqrt(eps)
    rl = rule_for(kappa / sq, se / sq, rule)
    return rl.expect(log_tail((kappa - sq * rl.nodes) / se))


def _rs_free_energy(alpha, kappa, q, eps, r, rule):
    return -r * eps / 2.0 + _spin_entropy(r, rule) + alpha * _constraint_term(q, eps, kappa, rule)


def rs_free_energy(alpha, kappa, q, r, rule=None) -> float:
    """Replica-symmetric functional

        -r (1 - q) / 2 + E[log(2 cosh(sqrt(r) Z))] + alpha E[log(1 - Phi(U_q))].
    """
    alpha = _check_alpha(alpha)
    kappa = _check_kappa(kappa)
    q = _check_q(q)
    r = _check_r(r)
    return _rs_free_energy(alpha, kappa, q, 1.0 - q, r, rule)


def reduction(r, alpha, kappa, rule=None):
    """Evaluate ``f(r)`` together with ``q = P(r)`` and ``1 - q = S(r)``.

    ``S`` is integrated directly rather than formed as ``1 - P`` so that
    ``1 - q`` keeps full relative precision as ``q -> 1``.
    """
    if r == 0:
        return -alpha * float(inv_mills_vec(np.array(kappa)) ** 2), 0.0, 1.0
    s = math.sqrt(r)
    rl = rule_for(0.0, 1.0 / s, rule)
    x = s * rl.nodes
    q = rl.expect(np.tanh(x) ** 2)
    eps = rl.expect(_sech2(x))
    f = r * eps * eps - alpha * _big_B(q, eps, kappa, rule)
    return f, q, eps


def one_dim_f(r, alpha, kappa=0.0, rule=None) -> float:
    """``f(r) = A(r) - alpha B(P(r))``; strictly increasing, ``f(0) < 0``."""
    r = _check_r(r)
    alpha = _check_alpha(alpha)
    kappa = _check_kappa(kappa)
    return reduction(r, alpha, kappa, rule)[0]


def tail_limit(alpha, kappa) -> float:
    """``lim_{r -> inf} f(r) = 2/pi - alpha C_kappa``."""
    return TWO_OVER_PI - _check_alpha(alpha) * c_kappa(kappa)


# ---------------------------------------------------------------------------
# monotonicity machinery for B
# ---------------------------------------------------------------------------

def g_fun(u):
    """``g(u) = E'(u)^2 - 2 (1 - E'(u)) E(u)^2`` (vectorized)."""
    u = np.asarray(u, dtype=np.float64)
    e = inv_mills_vec(u)
    ep = e * mills_gap_vec(u)
    out = ep * ep - 2.0 * (1.0 - ep) * e * e
    return out[()] if out.ndim == 0 else out


def g_quartic(u):
    """Quartic form ``E^2 (3E^2 - 4uE + u^2 - 2)`` of ``g``.

    The bracket is evaluated as ``(E - u)(3E - u) - 2`` to avoid cancelling
    terms of size ``u^2``.
    """
    u = np.asarray(u, dtype=np.float64)
    e = inv_mills_vec(u)
    d = mills_gap_vec(u)
    out = e * e * (d * (3.0 * e - u) - 2.0)
    return out[()] if out.ndim == 0 else out


def g_prime(u):
    """``g'(u) = 2 E(u)^2 H(u)``."""
    u = np.asarray(u, dtype=np.float64)
    e = inv_mills_vec(u)
    out = 2.0 * e * e * big_H(u)
    return out[()] if np.ndim(out) == 0 else out


def big_H(u):
    """``H(u) = u^2 d + 6 u d^2 + 6 d^3 - u - 4 d`` with ``d = E(u) - u``."""
    u = np.asarray(u, dtype=np.float64)
    d = mills_gap_vec(u)
    out = u * u * d + 6.0 * u * d * d + 6.0 * d ** 3 - u - 4.0 * d
    return out[()] if out.ndim == 0 else out


def f_xy(x, y):
    """``F(x, y) = x^2 + 6xy + 6y^2 - x - 4y``; ``d H(u) = F(u d, d^2)``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    out = x * x + 6.0 * x * y + 6.0 * y * y - x - 4.0 * y
    return out[()] if out.ndim == 0 else out


def region_constraints(x, y):
    """Slacks of the moment-feasible region in ``(x, y) = (u d, d^2)``.

    Returns ``(x + 2y - 1, x^2 + xy - 3x - 3y + 2, 1 - x - y)``, which are
    ``det M1 >= 0``, ``det M2 >= 0`` and ``Var(Y_u) > 0`` rewritten.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return x + 2.0 * y - 1.0, x * x + x * y - 3.0 * x - 3.0 * y + 2.0, 1.0 - x - y


def region_right_edge(y):
    """Smaller root ``r_-(y) = (3 - y - sqrt(y^2 + 6y + 1)) / 2`` of the quadratic constraint."""
    y = np.asarray(y, dtype=np.float64)
    return (3.0 - y - np.sqrt(y * y + 6.0 * y + 1.0)) / 2.0


@dataclass(frozen=True)
class TruncMoments:
    """Moments of ``Y_u = X - u`` given ``X >= u`` and the derived minors."""

    u: float
    mu0: float
    mu1: float
    mu2: float
    mu3: float
    mu4: float
    det_m1: float
    det_m2: float
    var_y: float

    def hankel_m1(self):
        return np.array([[self.mu1, self.mu2], [self.mu2, self.mu3]])

    def hankel_m2(self):
        m = (self.mu0, self.mu1, self.mu2, self.mu3, self.mu4)
        return np.array([[m[i + j] for j in range(3)] for i in range(3)])

    def raw_minors(self):
        """``(det M1, det M2, mu2 - mu1^2)`` from the moment values themselves."""
        return (
            self.mu1 * self.mu3 - self.mu2 ** 2,
            float(np.linalg.det(self.hankel_m2())),
            self.mu2 - self.mu1 ** 2,
        )


def trunc_moments(u) -> TruncMoments:
    """Truncated Gaussian moments ``mu_0..mu_4`` at threshold ``u``."""
    u = float(u)
    if not math.isfinite(u):
        raise DomainError(f"u must be finite, got {u!r}")
    d = float(mills_gap_vec(np.array(u)))
    return TruncMoments(
        u=u,
        mu0=1.0,
        mu1=d,
        mu2=1.0 - u * d,
        mu3=(u * u + 2.0) * d - u,
        mu4=u * u + 3.0 - u * (u * u + 5.0) * d,
        det_m1=u * d + 2.0 * d * d - 1.0,
        det_m2=u * u * d * d + u * d ** 3 - 3.0 * d * d - 3.0 * u * d + 2.0,
        var_y=1.0 - u * d - d * d,
    )


def g_critical_value(rho):
    """Value of ``g`` at a critical point parametrized by ``rho = -u/d`` in (0, 1)."""
    arr = np.asarray(rho, dtype=np.float64)
    if np.any((arr <= 0) | (arr >= 1)) or not np.all(np.isfinite(arr)):
        raise DomainError(f"rho must lie in (0, 1), got {rho!r}")
    out = arr * (4.0 - arr) * (1.0 - arr) ** 2 / (arr * arr - 6.0 * arr + 6.0) ** 2
    return out[()] if out.ndim == 0 else out


def critical_quartic(r):
    """``(r^2 - 6r + 6)^2 - 18 r (4 - r)(1 - r)^2 = 19r^4 - 120r^3 + 210r^2 - 144r + 36``."""
    r = np.asarray(r, dtype=np.float64)
    out = (((19.0 * r - 120.0) * r + 210.0) * r - 144.0) * r + 36.0
    return out[()] if out.ndim == 0 else out


G_ZERO = 12.0 / math.pi ** 2 - 4.0 / math.pi


def b_prime(t, kappa=0.0, rule=None) -> float:
    """``B'(t) = E[g(U_t)]`` for ``t`` in (0, 1)."""
    t = float(t)
    if not (0.0 < t < 1.0):
        raise DomainError(f"t must lie in (0, 1), got {t!r}")
    kappa = _check_kappa(kappa)
    st, se = math.sqrt(t), math.sqrt(1.0 - t)
    rl = rule_for(kappa / st, se / st, rule)
    return rl.expect(g_fun((kappa - st * rl.nodes) / se))


def b_prime_split_bound(t, kappa=0.0) -> float:
    """Upper bound ``g(0)(1 - p_t) + p_t / 18`` with ``p_t = P(U_t < 0)``."""
    kappa = _check_kappa(kappa)
    p = float(ndtr(-kappa / math.sqrt(t)))
    return G_ZERO * (1.0 - p) + p / 18.0
