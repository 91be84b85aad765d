"""Standard-normal primitives and quadrature for expectations over Z ~ N(0, 1).

Two families of functions live here:

* public scalar/array primitives (:func:`std_normal`, :func:`inv_mills`,
  :func:`inv_mills_prime`, :func:`mills_gap`) that validate their input, clamp
  to the accuracy range ``|u| <= 40`` and return extended precision where the
  float64 exponent range is too small (``phi(40)`` is about ``1e-348``);
* float64 kernels (:func:`inv_mills_vec`, :func:`mills_gap_vec`,
  :func:`log_tail`) used inside quadratures, which never clamp.

The inverse Mills ratio ``E(u) = phi(u) / (1 - Phi(u))`` is never formed as a
quotient of two underflowing numbers.  For ``u >= 4`` the gap
``d(u) = E(u) - u`` is evaluated from the continued fraction

    d(u) = 1 / (u + 2 / (u + 3 / (u + 4 / (u + ...))))

and ``E = u + d``; for ``0 <= u < 4`` the scaled complementary error function
is used, ``E(u) = sqrt(2/pi) / erfcx(u / sqrt(2))``; for ``u < 0`` the tail is
``Phi(-u) >= 1/2`` and only the density can be small.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from numpy.polynomial.legendre import leggauss
from scipy.special import erfcx, log_ndtr, ndtr, roots_hermitenorm

from .errors import ConfigError, DomainError, EvaluationError

logger = logging.getLogger(__name__)

SQRT_2PI = float(np.sqrt(2.0 * np.pi))
SQRT_2_OVER_PI = float(np.sqrt(2.0 / np.pi))
MAX_ABS_U = 40.0
DEFAULT_NODES = 201

_CF_START = 4.0
_CF_TERMS = 60
_LD_SQRT_2PI = np.sqrt(2 * np.longdouble("3.14159265358979323846264338327950288"))


# ---------------------------------------------------------------------------
# input handling
# ---------------------------------------------------------------------------

def _as_finite(u, name="u"):
    arr = np.asarray(u, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite, got {u!r}")
    return arr


def _clamped(u):
    arr = _as_finite(u)
    if np.any(np.abs(arr) > MAX_ABS_U):
        logger.warning("argument outside |u| <= %g clamped to the accuracy range", MAX_ABS_U)
        arr = np.clip(arr, -MAX_ABS_U, MAX_ABS_U)
    return arr


def _out(arr, like):
    return arr[()] if np.ndim(like) == 0 else arr


def _exp_neg_half_sq(u, dtype=np.float64):
    """``exp(-u**2 / 2)`` with the square split so the exponent is exact.

    ``|u| = hi + lo`` with ``hi`` on a 1/64 grid, so ``hi**2 / 2`` carries no
    rounding error even when ``u**2 / 2`` is several hundred.
    """
    u = np.abs(np.asarray(u, dtype=dtype))
    # flooring keeps lo >= 0, so neither factor can overflow
    hi = np.floor(u * 64) / 64
    lo = u - hi
    return np.exp(-hi * hi / 2) * np.exp(-(hi * lo + lo * lo / 2))


def _cf_gap(u):
    # backward evaluation of the continued fraction; converged to eps for u >= 4
    t = np.zeros_like(u)
    for k in range(_CF_TERMS, 1, -1):
        t = k / (u + t)
    return 1.0 / (u + t)


# ---------------------------------------------------------------------------
# float64 kernels
# ---------------------------------------------------------------------------

def mills_gap_vec(u):
    """Float64 kernel for ``d(u) = E(u) - u`` on any real array (no clamping)."""
    u = np.asarray(u, dtype=np.float64)
    d = np.empty_like(u)
    neg = u < 0
    mid = (u >= 0) & (u < _CF_START)
    big = u >= _CF_START
    if np.any(neg):
        un = u[neg]
        d[neg] = _exp_neg_half_sq(un) / (SQRT_2PI * ndtr(-un)) - un
    if np.any(mid):
        um = u[mid]
        d[mid] = SQRT_2_OVER_PI / erfcx(um / np.sqrt(2.0)) - um
    if np.any(big):
        d[big] = _cf_gap(u[big])
    return d


def inv_mills_vec(u):
    """Float64 kernel for ``E(u)``; underflows to 0 below about ``u = -38.5``."""
    u = np.asarray(u, dtype=np.float64)
    e = np.empty_like(u)
    neg = u < 0
    mid = (u >= 0) & (u < _CF_START)
    big = u >= _CF_START
    if np.any(neg):
        un = u[neg]
        e[neg] = _exp_neg_half_sq(un) / (SQRT_2PI * ndtr(-un))
    if np.any(mid):
        e[mid] = SQRT_2_OVER_PI / erfcx(u[mid] / np.sqrt(2.0))
    if np.any(big):
        ub = u[big]
        e[big] = ub + _cf_gap(ub)
    return e


def log_tail(u):
    """``log(1 - Phi(u))`` without forming the (possibly underflowing) tail."""
    return log_ndtr(-np.asarray(u, dtype=np.float64))


# ---------------------------------------------------------------------------
# public primitives
# ---------------------------------------------------------------------------

def std_normal(u):
    """Density, CDF and upper tail of the standard normal at ``u``.

    Returns ``(pdf, cdf, tail)`` as ``numpy.longdouble`` so that values such as
    ``tail(40) ~ 3.7e-350`` stay representable.  The tail is computed directly
    from the Mills ratio, never as ``1 - cdf``.
    """
    arr = _clamped(u)
    pdf = _exp_neg_half_sq(arr, np.longdouble) / _LD_SQRT_2PI
    absu = np.abs(arr)
    # small side: pdf / E(|u|); large side: Phi(|u|) which is >= 1/2
    small = pdf / inv_mills_vec(absu).astype(np.longdouble)
    large = ndtr(absu).astype(np.longdouble)
    tail = np.where(arr >= 0, small, large)
    cdf = np.where(arr >= 0, large, small)
    return _out(pdf, u), _out(cdf, u), _out(tail, u)


def inv_mills(u):
    """Inverse Mills ratio ``E(u) = phi(u) / (1 - Phi(u))``.

    Relative error below 1e-13 on ``|u| <= 40``; arguments outside that range
    are clamped with a logged warning.  The result is a ``numpy.longdouble``
    because ``E(-40) ~ 1.5e-348`` underflows float64.
    """
    arr = _clamped(u)
    out = inv_mills_vec(np.maximum(arr, 0.0)).astype(np.longdouble)
    neg = arr < 0
    if np.any(neg):
        un = arr[neg]
        pdf = _exp_neg_half_sq(un, np.longdouble) / _LD_SQRT_2PI
        out[neg] = pdf / ndtr(-un).astype(np.longdouble)
    return _out(out, u)


def inv_mills_prime(u):
    """Derivative ``E'(u) = E(u)**2 - u E(u)``, evaluated as ``E(u) d(u)``.

    Lies in (0, 1) for every real ``u``.
    """
    arr = _clamped(u)
    e = np.asarray(inv_mills(arr), dtype=np.longdouble)
    out = e * mills_gap_vec(arr).astype(np.longdouble)
    return _out(out, u)


def mills_gap(u):
    """``d(u) = E(u) - u``: positive and strictly decreasing in ``u``."""
    arr = _clamped(u)
    return _out(mills_gap_vec(arr), u)


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and probability weights for ``E[f(Z)]`` with ``Z ~ N(0, 1)``.

    Weights are positive and sum to one; nodes are strictly increasing.  Both
    arrays are made read-only at construction.
    """

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=np.float64)
        weights = np.array(self.weights, dtype=np.float64)
        if nodes.ndim != 1 or nodes.shape != weights.shape or nodes.size < 1:
            raise ConfigError("nodes and weights must be 1-D arrays of equal length")
        if np.any(np.diff(nodes) <= 0):
            raise ConfigError("nodes must be strictly increasing")
        if np.any(weights <= 0):
            raise ConfigError("weights must be positive")
        if abs(weights.sum() - 1.0) > 1e-14:
            raise ConfigError(f"weights sum to {weights.sum()!r}, expected 1")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return self.nodes.size

    def expect(self, values):
        """Weighted sum of already-evaluated integrand values."""
        return float(np.dot(self.weights, values))


def _normalized(nodes, weights):
    weights = weights / weights.sum()
    # one more pass absorbs the rounding of the first division
    weights = weights / weights.sum()
    return QuadratureRule(nodes, weights)


@lru_cache(maxsize=16)
def hermite_rule(n=DEFAULT_NODES):
    """``n``-point Gauss-Hermite rule for the standard normal.

    Exact for polynomials of degree ``<= 2n - 1``.  For large ``n`` the
    outermost nodes, whose weights underflow float64, are dropped.
    """
    if int(n) != n or n < 2:
        raise ConfigError(f"node count must be an integer >= 2, got {n!r}")
    with np.errstate(all="ignore"):
        x, w = hermegauss(int(n))
    if not np.all(np.isfinite(w)):
        # numpy's recurrence overflows for a few hundred nodes
        x, w = roots_hermitenorm(int(n))
    # outermost weights can underflow to zero; such nodes contribute nothing
    keep = w > 0
    return _normalized(x[keep], w[keep])


def graded_breakpoints(center, width, lo, hi, step=1.0):
    """Panel edges on ``[lo, hi]``: a uniform grid plus geometric grading.

    Edges are placed at ``center +- width * 2**j`` so that panels adjacent to
    ``center`` have size ``width``; ``center`` itself is always an edge when
    it lies inside the interval.
    """
    edges = [np.arange(np.ceil(lo / step) * step, hi, step), [lo, hi]]
    if lo < center < hi:
        edges.append([center])
    if width > 0:
        span = hi - lo
        offsets = width * 2.0 ** np.arange(0, max(1, int(np.ceil(np.log2(span / width))) + 1))
        edges.append(center - offsets)
        edges.append(center + offsets)
    b = np.unique(np.clip(np.concatenate([np.asarray(e, dtype=np.float64) for e in edges]), lo, hi))
    # merge near-coincident edges, which would give degenerate panels
    tol = 1e-6 * (width if width > 0 else step)
    keep = np.concatenate([[True], np.diff(b) > tol])
    keep[-1] = True
    b = b[keep]
    if len(b) > 2 and b[-1] - b[-2] <= tol:
        b = np.delete(b, -2)
    return b


def composite_legendre(breaks, n):
    """Composite Gauss-Legendre nodes/weights (Lebesgue measure) over ``breaks``."""
    x, w = leggauss(int(n))
    a = breaks[:-1, None]
    b = breaks[1:, None]
    half = (b - a) / 2
    nodes = (a + half * (1 + x)).ravel()
    weights = (half * w).ravel()
    return nodes, weights


def layered_rule(center, width, n_per_panel=16, half_width=12.0):
    """Standard-normal rule that resolves a transition layer.

    Built for integrands that change on a length scale ``width`` around
    ``center`` (``tanh(z / width)``-type layers and kinks), where a fixed
    Gauss-Hermite rule cannot see the layer.  Mass outside
    ``[-half_width, half_width]`` (below 1e-32 for the default) is dropped and
    the weights renormalized.
    """
    if not (width > 0 and np.isfinite(width)):
        raise ConfigError(f"layer width must be positive and finite, got {width!r}")
    if n_per_panel < 2:
        raise ConfigError("n_per_panel must be >= 2")
    breaks = graded_breakpoints(float(center), float(width), -half_width, half_width)
    nodes, weights = composite_legendre(breaks, n_per_panel)
    weights = weights * _exp_neg_half_sq(nodes) / SQRT_2PI
    return _normalized(nodes, weights)


def gaussian_expect(f: Callable, rule: QuadratureRule) -> float:
    """``E[f(Z)]`` under ``rule``.

    ``f`` is called once on the node array; scalar-only callables are
    accepted and evaluated node by node.
    """
    nodes = rule.nodes
    try:
        vals = np.asarray(f(nodes), dtype=np.float64)
    except (TypeError, ValueError):
        vals = None
    if vals is None or vals.shape != nodes.shape:
        vals = np.array([f(float(z)) for z in nodes], dtype=np.float64)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        z = float(nodes[np.argmax(bad)])
        raise EvaluationError(f"integrand is not finite at node z={z!r}")
    return rule.expect(vals)
