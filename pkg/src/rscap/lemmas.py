"""Grid certification of the inequalities behind uniqueness and capacity.

Each registered check evaluates one or more *conditions* on a deterministic
grid.  A condition maps each grid point to a signed margin (positive means
the inequality holds with room to spare) and the report keeps the most
adverse one.  This is numerical evidence gathered on finitely many points,
not a proof, and every report says so.

Adding a check::

    @register("my_check", tolerance=1e-12, description="...")
    def _my_check(resolution, cfg):
        u = np.linspace(0, 1, resolution)
        return "u in [0, 1]", [Condition("f(u) >= 0", u[:, None], lambda p: f(p[:, 0]))]
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.special import ndtr
from scipy.stats import qmc

from . import model as m
from .errors import ConfigError
from .gauss import inv_mills, inv_mills_prime, inv_mills_vec, log_tail, mills_gap, mills_gap_vec
from .solver import SolverConfig, approach_alphas, sign_changes, solve_saddle

NOTE = "numerical evidence, not proof"
CLOSED_FORM_TOL = 1e-12
QUADRATURE_TOL = 1e-8
MIN_RESOLUTION = 100
# constant of the uniform Mills bound E(u) <= u_+ + C
MILLS_C = max(1.0 / float(ndtr(-1.0)), 1.0)
# constant bounding E(u)^2 - u_+^2
MILLS_SQ_C0 = 3.0


@dataclass(frozen=True)
class Condition:
    """One inequality: rows of ``points`` and a vectorized margin function."""

    name: str
    points: np.ndarray
    margin: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Check:
    lemma_id: str
    tolerance: float
    description: str
    build: Callable


@dataclass(frozen=True)
class LemmaReport:
    """Outcome of one certification run.

    ``passed`` holds exactly when ``worst_margin > -tolerance``.
    """

    lemma_id: str
    passed: bool
    worst_margin: float
    worst_point: tuple
    grid_spec: str
    tolerance: float
    condition: str
    note: str = NOTE

    def to_dict(self):
        return {
            "lemma": self.lemma_id,
            "passed": self.passed,
            "worst_margin": self.worst_margin,
            "worst_point": list(self.worst_point),
            "grid_spec": self.grid_spec,
            "tolerance": self.tolerance,
            "note": self.note,
        }


REGISTRY: dict[str, Check] = {}


def register(lemma_id, tolerance, description):
    def deco(fn):
        if lemma_id in REGISTRY:
            raise ValueError(f"duplicate check {lemma_id!r}")
        REGISTRY[lemma_id] = Check(lemma_id, tolerance, description, fn)
        return fn
    return deco


def _col(x):
    return np.asarray(x, dtype=np.float64).reshape(-1, 1)


def _pairs(x):
    x = np.asarray(x, dtype=np.float64)
    return np.column_stack([x[:-1], x[1:]])


def _rows(fn):
    """Lift a scalar function of one grid row to a vectorized margin."""
    return lambda pts: np.array([fn(*row) for row in pts], dtype=np.float64)


def _resolve(lemma_id):
    try:
        return REGISTRY[lemma_id]
    except KeyError:
        raise ConfigError(f"unknown lemma id {lemma_id!r}; known: {', '.join(REGISTRY)}") from None


def verify(lemma_id, resolution=10_000, cfg: SolverConfig | None = None) -> LemmaReport:
    """Run the registered check ``lemma_id`` at grid size ``resolution``."""
    check = _resolve(lemma_id)
    if int(resolution) != resolution or resolution < MIN_RESOLUTION:
        raise ConfigError(f"resolution must be an integer >= {MIN_RESOLUTION}, got {resolution!r}")
    cfg = SolverConfig() if cfg is None else cfg
    grid_spec, conditions = check.build(int(resolution), cfg)
    worst = (math.inf, (), "")
    for cond in conditions:
        margins = np.asarray(cond.margin(cond.points), dtype=np.float64)
        # NaN counts as a violation
        margins = np.where(np.isnan(margins), -math.inf, margins)
        i = int(np.argmin(margins))
        if margins[i] < worst[0]:
            worst = (float(margins[i]), tuple(float(v) for v in cond.points[i]), cond.name)
    margin, point, name = worst
    return LemmaReport(lemma_id, bool(margin > -check.tolerance), margin, point,
                       grid_spec, check.tolerance, name)


def verify_all(resolution=10_000, cfg: SolverConfig | None = None):
    """Reports for every registered check, in registry order."""
    return [verify(lemma_id, resolution, cfg) for lemma_id in REGISTRY]


def margin_at(lemma_id, condition, point, resolution=MIN_RESOLUTION, cfg: SolverConfig | None = None):
    """Re-evaluate one condition of a check at a single point."""
    cfg = SolverConfig() if cfg is None else cfg
    _, conditions = _resolve(lemma_id).build(int(resolution), cfg)
    for cond in conditions:
        if cond.name == condition:
            return float(cond.margin(np.asarray([point], dtype=np.float64))[0])
    raise ConfigError(f"check {lemma_id!r} has no condition {condition!r}")


# ---------------------------------------------------------------------------
# inverse Mills ratio
# ---------------------------------------------------------------------------

@register("mills_bounds", CLOSED_FORM_TOL, "u < E(u) <= u + 1/u for u > 0; E(u) <= u_+ + C")
def _mills_bounds(n, cfg):
    pos = _col(np.linspace(40.0 / n, 40.0, n))
    full = _col(np.linspace(-40.0, 40.0, n + 1))
    return (
        f"u in (0, 40] ({n} pts) and [-40, 40] ({n + 1} pts); C = {MILLS_C!r}",
        [
            Condition("E(u) > u", pos, lambda p: mills_gap(p[:, 0])),
            Condition("E(u) <= u + 1/u", pos, lambda p: 1.0 / p[:, 0] - mills_gap(p[:, 0])),
            Condition("E(u) <= u_+ + C", full,
                      lambda p: np.maximum(p[:, 0], 0.0) + MILLS_C
                      - np.asarray(inv_mills(p[:, 0]), dtype=np.float64)),
        ],
    )


@register("mills_prime_identity", QUADRATURE_TOL,
          "E' = E^2 - uE against finite differences; 0 < E' < 1; d decreasing")
def _mills_prime(n, cfg):
    h = 1e-5
    fd_grid = _col(np.linspace(-30.0, 30.0, max(n // 10, MIN_RESOLUTION)))
    full = np.linspace(-40.0, 40.0, n + 1)

    def fd_margin(p):
        u = p[:, 0]
        ep = np.asarray(inv_mills_prime(u), dtype=np.float64)
        fd = (inv_mills_vec(u + h) - inv_mills_vec(u - h)) / (2 * h)
        return 1e-6 - np.abs(ep - fd) / np.abs(ep)

    def range_margin(p):
        ep = np.asarray(inv_mills_prime(p[:, 0]), dtype=np.longdouble)
        return np.minimum(ep, 1 - ep).astype(np.float64)

    return (
        f"finite differences h={h} on u in [-30, 30]; range and monotonicity on [-40, 40] ({n + 1} pts)",
        [
            Condition("E' matches central difference (rel 1e-6)", fd_grid, fd_margin),
            Condition("0 < E'(u) < 1", _col(full), range_margin),
            Condition("d strictly decreasing", _pairs(full),
                      lambda p: mills_gap(p[:, 0]) - mills_gap(p[:, 1])),
        ],
    )


@register("mills_sq_gap", CLOSED_FORM_TOL, "0 <= E(u)^2 - u_+^2 <= 3 on [-40, 40]")
def _mills_sq_gap(n, cfg):
    def gap(u):
        d = mills_gap_vec(u)
        e = inv_mills_vec(u)
        return np.where(u > 0, d * (2 * np.maximum(u, 0.0) + d), e * e)

    grid = _col(np.linspace(-40.0, 40.0, n + 1))
    return (
        f"u in [-40, 40] ({n + 1} pts), C0 = {MILLS_SQ_C0}",
        [
            Condition("E^2 - u_+^2 >= 0", grid, lambda p: gap(p[:, 0])),
            Condition("E^2 - u_+^2 <= C0", grid, lambda p: MILLS_SQ_C0 - gap(p[:, 0])),
        ],
    )


@register("logtail_chernoff", CLOSED_FORM_TOL,
          "log tail(u) <= -u^2/2 and <= -u^2/2 - log u for u > 0; log tail <= 0")
def _logtail(n, cfg):
    pos = _col(np.linspace(40.0 / n, 40.0, n))
    full = _col(np.linspace(-40.0, 40.0, n + 1))
    return (
        f"u in (0, 40] ({n} pts); u in [-40, 40] ({n + 1} pts)",
        [
            Condition("log tail(u) <= -u^2/2", pos,
                      lambda p: -p[:, 0] ** 2 / 2 - log_tail(p[:, 0])),
            Condition("log tail(u) <= -u^2/2 - log u", pos,
                      lambda p: -p[:, 0] ** 2 / 2 - np.log(p[:, 0]) - log_tail(p[:, 0])),
            Condition("log tail(u) <= 0", full, lambda p: -log_tail(p[:, 0])),
        ],
    )


# ---------------------------------------------------------------------------
# P, A, B
# ---------------------------------------------------------------------------

def _r_grid(n):
    base = 2.0 ** np.arange(41) * 1e-3
    dense = np.geomspace(base[0], base[-1], max(n // 20, MIN_RESOLUTION))
    return np.unique(np.concatenate([base, dense]))


@register("P_monotone", CLOSED_FORM_TOL, "P continuous, strictly increasing, P(0) = 0, P < 1, P -> 1")
def _p_monotone(n, cfg):
    rule = cfg.rule
    grid = _r_grid(n)
    P = _rows(lambda r: m.overlap_P(r, rule))
    return (
        f"r in {{2^k 1e-3, k=0..40}} merged with {max(n // 20, MIN_RESOLUTION)} geometric pts",
        [
            Condition("P strictly increasing", _pairs(grid),
                      _rows(lambda a, b: m.overlap_P(b, rule) - m.overlap_P(a, rule))),
            Condition("P(0) = 0", _col([0.0]), lambda p: -np.abs(P(p))),
            Condition("P(r) < 1", _col(grid), _rows(lambda r: m.sech2_mean(r, rule))),
            Condition("1 - P(1e6) < 1e-2", _col([1e6]), _rows(lambda r: 1e-2 - m.sech2_mean(r, rule))),
        ],
    )


@register("A_monotone_range", CLOSED_FORM_TOL,
          "A strictly increasing with range [0, 2/pi); r S^2 = I^2 / (2 pi)")
def _a_monotone(n, cfg):
    rule = cfg.rule
    grid = _r_grid(n)
    A = lambda r: m.cap_A(r, rule)  # noqa: E731

    def dual(r):
        a, b = A(r), m.cap_A_integral(r)
        return 1e-10 - abs(a - b) / b

    return (
        f"r in {{2^k 1e-3, k=0..40}} merged with {max(n // 20, MIN_RESOLUTION)} geometric pts",
        [
            Condition("A strictly increasing", _pairs(grid), _rows(lambda a, b: A(b) - A(a))),
            Condition("A(r) < 2/pi", _col(grid), _rows(lambda r: m.TWO_OVER_PI - A(r))),
            Condition("A(0) = 0", _col([0.0]), _rows(lambda r: -abs(A(r)))),
            Condition("r S(r)^2 = I(r)^2/(2 pi) (rel 1e-10)", _col(grid), _rows(dual)),
            Condition("|A(1e6) - 2/pi| < 1e-3", _col([1e6]),
                      _rows(lambda r: 1e-3 - abs(A(r) - m.TWO_OVER_PI))),
        ],
    )


KAPPAS = (0.0, 0.5, 1.0, 2.0, 5.0)
Q_GRID = tuple(np.round(np.arange(0, 0.951, 0.05), 10)) + (0.99, 0.999)
# |B'| = |E g(U)| <= sup |g| < 2 gives a Lipschitz certificate for continuity
B_LIPSCHITZ = 2.0


@register("B_continuity_endpoints", QUADRATURE_TOL,
          "B finite and continuous on [0, 1); B(0) = E(kappa)^2; B(q) -> C_kappa")
def _b_endpoints(n, cfg):
    rule = cfg.rule
    nq = max(n // 50, MIN_RESOLUTION)
    q = np.linspace(0.0, 0.999, nq)
    pairs = np.array([(k, a, b) for k in KAPPAS for a, b in zip(q[:-1], q[1:])])

    def b0(k):
        e = float(inv_mills(k))
        return 1e-12 * max(1.0, e * e) - abs(m.big_B(0.0, k, rule) - e * e)

    return (
        f"kappa in {KAPPAS}; q in [0, 0.999] ({nq} pts); endpoint q = 1 - 1e-6",
        [
            Condition("B(0) = E(kappa)^2", _col(KAPPAS), _rows(b0)),
            Condition("|B(1e-12) - B(0)| < 1e-6", _col(KAPPAS),
                      _rows(lambda k: 1e-6 - abs(m.big_B(1e-12, k, rule) - m.big_B(0.0, k, rule)))),
            Condition("|B(1 - 1e-6) - C_kappa| < 1e-3", _col(KAPPAS),
                      _rows(lambda k: 1e-3 - abs(m.big_B(1 - 1e-6, k, rule) - m.c_kappa(k)))),
            Condition("|B(b) - B(a)| <= 2 |b - a|", pairs,
                      _rows(lambda k, a, b: B_LIPSCHITZ * (b - a)
                            - abs(m.big_B(b, k, rule) - m.big_B(a, k, rule)))),
        ],
    )


@register("B_monotone", QUADRATURE_TOL, "B strictly decreasing: B'(t) = E g(U_t) < 0 and pairwise decrease")
def _b_monotone(n, cfg):
    rule = cfg.rule
    nt = min(max(n // 50, MIN_RESOLUTION), 400)
    t = np.concatenate([(np.arange(nt) + 0.5) / nt, 1.0 - 10.0 ** -np.arange(3, 9)])
    kt = np.array([(k, s) for k in KAPPAS for s in t])
    qp = np.array([(k, a, b) for k in KAPPAS for a, b in zip(Q_GRID[:-1], Q_GRID[1:])])
    return (
        f"kappa in {KAPPAS}; q in {{0, 0.05, ..., 0.95, 0.99, 0.999}}; t midpoints of {nt} cells plus 1 - 1e-3..1e-8",
        [
            Condition("B(a) > B(b) for a < b", qp,
                      _rows(lambda k, a, b: m.big_B(a, k, rule) - m.big_B(b, k, rule))),
            Condition("B'(t) < 0", kt, _rows(lambda k, s: -m.b_prime(s, k, rule))),
            Condition("B'(t) <= g(0)(1 - p_t) + p_t/18", kt,
                      _rows(lambda k, s: m.b_prime_split_bound(s, k) - m.b_prime(s, k, rule))),
            Condition("g(0)(1 - p_t) + p_t/18 < 0", kt, _rows(lambda k, s: -m.b_prime_split_bound(s, k))),
        ],
    )


@register("Bprime_matches_fd", QUADRATURE_TOL, "B'(t) = E[g(U_t)] against central differences of B")
def _bprime_fd(n, cfg):
    rule = cfg.rule
    h = 1e-5
    pts = np.array([(k, s) for k in (0.0, 0.5, 1.0, 2.0) for s in np.round(np.arange(0.1, 0.91, 0.1), 10)])

    def rel(k, s):
        fd = (m.big_B(s + h, k, rule) - m.big_B(s - h, k, rule)) / (2 * h)
        return 1e-5 - abs(m.b_prime(s, k, rule) - fd) / abs(fd)

    return (f"kappa in {{0, 0.5, 1, 2}}, t in {{0.1, ..., 0.9}}, h = {h}",
            [Condition("B'(t) matches central difference (rel 1e-5)", pts, _rows(rel))])


# ---------------------------------------------------------------------------
# g, H, F and the moment region
# ---------------------------------------------------------------------------

@register("g_two_forms", CLOSED_FORM_TOL, "g = E'^2 - 2(1 - E')E^2 equals E^2(3E^2 - 4uE + u^2 - 2)")
def _g_two_forms(n, cfg):
    def margin(p):
        u = p[:, 0]
        e = inv_mills_vec(u)
        ep = e * mills_gap_vec(u)
        scale = ep * ep + 2 * np.abs(1 - ep) * e * e
        diff = np.abs(m.g_fun(u) - m.g_quartic(u))
        with np.errstate(invalid="ignore", divide="ignore"):
            rel = np.where(scale > 0, diff / scale, diff)
        return 1e-11 - rel

    return (f"u in [-20, 20] ({n} pts); error relative to |E'^2| + 2|1 - E'| E^2",
            [Condition("two forms agree (rel 1e-11)", _col(np.linspace(-20, 20, n)), margin)])


@register("g_decreasing_pos", CLOSED_FORM_TOL, "g strictly decreasing on [0, inf); H < 0 there; g(0) value")
def _g_decreasing(n, cfg):
    u = np.linspace(0.0, 20.0, n)
    return (
        f"u in [0, 20] ({n} pts)",
        [
            Condition("g(a) > g(b) for a < b", _pairs(u), lambda p: m.g_fun(p[:, 0]) - m.g_fun(p[:, 1])),
            Condition("H(u) < 0", _col(u), lambda p: -m.big_H(p[:, 0])),
            Condition("g(0) = 12/pi^2 - 4/pi", _col([0.0]),
                      lambda p: 1e-12 - np.abs(m.g_fun(p[:, 0]) - m.G_ZERO)),
        ],
    )


@register("gprime_identity", QUADRATURE_TOL, "g' = 2 E^2 H against finite differences; d H(u) = F(ud, d^2)")
def _gprime(n, cfg):
    h = 1e-5
    u = _col(np.linspace(0.0, 20.0, max(n // 10, MIN_RESOLUTION)))
    v = _col(np.linspace(-20.0, 20.0, n))

    def fd(p):
        x = p[:, 0]
        d = (m.g_fun(x + h) - m.g_fun(x - h)) / (2 * h)
        return 1e-5 - np.abs(m.g_prime(x) - d) / np.abs(d)

    def fxy(p):
        x = p[:, 0]
        d = mills_gap_vec(x)
        X, Y = x * d, d * d
        scale = X * X + 6 * np.abs(X * Y) + 6 * Y * Y + np.abs(X) + 4 * Y
        return 1e-11 - np.abs(d * m.big_H(x) - m.f_xy(X, Y)) / scale

    return (
        f"finite differences h={h} on u in [0, 20]; F identity on [-20, 20] ({n} pts)",
        [
            Condition("g' matches central difference (rel 1e-5)", u, fd),
            Condition("d H(u) = F(ud, d^2) (rel 1e-11)", v, fxy),
        ],
    )


@register("g_neg_bound", CLOSED_FORM_TOL, "g(u) <= 1/18 for u <= 0")
def _g_neg(n, cfg):
    return (f"u in [-20, 0] ({n} pts)",
            [Condition("g(u) <= 1/18", _col(np.linspace(-20.0, 0.0, n)), lambda p: 1 / 18 - m.g_fun(p[:, 0]))])


def _moments(u):
    return [m.trunc_moments(x) for x in u]


def _minor_scales(t):
    m1 = max(abs(t.mu1 * t.mu3), t.mu2 ** 2)
    m2 = max(abs(t.mu0 * t.mu2 * t.mu4), abs(t.mu1 * t.mu2 * t.mu3), abs(t.mu2) ** 3,
             t.mu3 ** 2, t.mu1 ** 2 * abs(t.mu4))
    return max(1.0, m1), max(1.0, m2)


@register("hankel_feasible", 1e-10,
          "det M1 >= 0, det M2 >= 0, Var(Y_u) > 0; (ud, d^2) in the F-region and F < 0 for u >= 0")
def _hankel(n, cfg):
    u = np.linspace(-10.0, 10.0, n)
    up = _col(u[u >= 0])
    full = _col(u)

    def field(name):
        return lambda p: np.array([getattr(t, name) for t in _moments(p[:, 0])])

    def minors(p, i):
        out = []
        for t in _moments(p[:, 0]):
            raw = t.raw_minors()[i]
            poly = (t.det_m1, t.det_m2)[i]
            out.append(1e-11 - abs(raw - poly) / _minor_scales(t)[i])
        return np.array(out)

    def xy(p):
        d = mills_gap_vec(p[:, 0])
        return p[:, 0] * d, d * d

    def slack(i):
        return lambda p: m.region_constraints(*xy(p))[i]

    return (
        f"u in [-10, 10] ({n} pts); region tests on u >= 0",
        [
            Condition("det M1 >= 0", full, field("det_m1")),
            Condition("det M2 >= 0", full, field("det_m2")),
            Condition("Var(Y_u) > 0", full, field("var_y")),
            Condition("det M1 matches raw minor", full, lambda p: minors(p, 0)),
            Condition("det M2 matches raw minor", full, lambda p: minors(p, 1)),
            Condition("x = ud >= 0", up, lambda p: xy(p)[0]),
            Condition("y = d^2 < 2/3", up, lambda p: 2 / 3 - xy(p)[1]),
            Condition("x + 2y >= 1", up, slack(0)),
            Condition("x^2 + xy - 3x - 3y + 2 >= 0", up, slack(1)),
            Condition("x + y < 1", up, slack(2)),
            Condition("F(ud, d^2) < 0", up, lambda p: -m.f_xy(*xy(p))),
        ],
    )


@register("F_region_negative", CLOSED_FORM_TOL,
          "F(x, y) < 0 on x >= 0, 0 < y < 2/3, x + 2y >= 1, x^2 + xy - 3x - 3y + 2 >= 0, x + y < 1")
def _f_region(n, cfg):
    h = qmc.Halton(d=2, scramble=False).random(n + 1)[1:]
    x, y = h[:, 0], h[:, 1] * (2 / 3)
    c1, c2, c3 = m.region_constraints(x, y)
    keep = (y > 0) & (c1 >= 0) & (c2 >= 0) & (c3 > 0)
    interior = np.column_stack([x[keep], y[keep]])
    nb = max(n // 10, MIN_RESOLUTION)
    yl = np.linspace(0.5 / nb, 0.5, nb)
    yz = np.linspace(0.5, 2 / 3, nb + 1)[:-1]
    left1 = np.column_stack([1 - 2 * yl, yl])
    left2 = np.column_stack([np.zeros_like(yz), yz])
    yr = np.linspace((2 / 3) / nb, 2 / 3, nb + 1)[:-1]
    xr = m.region_right_edge(yr)
    ok = xr >= np.maximum(0.0, 1 - 2 * yr)
    right = np.column_stack([xr[ok], yr[ok]])
    neg_f = lambda p: -m.f_xy(p[:, 0], p[:, 1])  # noqa: E731
    return (
        f"{len(interior)} feasible Halton pts of {n} in [0,1]x(0,2/3); edges x=1-2y, x=0, x=r_-(y) ({nb} pts each)",
        [
            Condition("F < 0 (interior)", interior, neg_f),
            Condition("F(1-2y, y) = -2y^2 < 0", left1, neg_f),
            Condition("F(0, y) = 2y(3y - 2) < 0", left2, neg_f),
            Condition("F(r_-(y), y) < 0", right, neg_f),
        ],
    )


@register("critical_value_bound", CLOSED_FORM_TOL,
          "r(4-r)(1-r)^2/(r^2-6r+6)^2 <= 1/18 and 19r^4-120r^3+210r^2-144r+36 >= 1 on (0, 1)")
def _critical(n, cfg):
    r = _col((np.arange(n) + 0.5) / n)
    r01 = _col(np.linspace(0.0, 1.0, n + 1))

    def expansion(p):
        x = p[:, 0]
        direct = (x * x - 6 * x + 6) ** 2 - 18 * x * (4 - x) * (1 - x) ** 2
        return 1e-12 * 36 - np.abs(m.critical_quartic(x) - direct)

    def cubic(x):
        return ((19 * x - 101) * x + 109) * x - 35

    return (
        f"rho midpoints of {n} cells in (0, 1); cubic factor on [0, 1] ({n + 1} pts)",
        [
            Condition("g at critical point <= 1/18", r, lambda p: 1 / 18 - m.g_critical_value(p[:, 0])),
            Condition("quartic >= 1", r, lambda p: m.critical_quartic(p[:, 0]) - 1),
            Condition("quartic equals the expanded inequality", r, expansion),
            Condition("quartic - 1 = (r - 1) C(r)", r,
                      lambda p: 1e-12 * 36 - np.abs(m.critical_quartic(p[:, 0]) - 1 - (p[:, 0] - 1) * cubic(p[:, 0]))),
            Condition("C(r) < 0 on [0, 1]", r01, lambda p: -cubic(p[:, 0])),
        ],
    )


@register("pi_estimate", CLOSED_FORM_TOL, "4(pi - 3)/pi^2 > 1/18, hence g(0) < -1/18")
def _pi_estimate(n, cfg):
    h = lambda x: 4 * (x - 3) / x ** 2  # noqa: E731
    archimedes = Fraction(223, 71)
    exact = h(archimedes)

    def lower(p):
        # exact rational arithmetic; the point records 223/71 as a float
        assert exact == Fraction(201640, 3530759)
        return np.array([float(exact - Fraction(1, 18))] * len(p))

    return (
        "x = pi; Archimedes lower bound 223/71 in exact arithmetic",
        [
            Condition("4(pi-3)/pi^2 - 1/18 > 0", _col([math.pi]), lambda p: h(p[:, 0]) - 1 / 18),
            Condition("h(223/71) - 1/18 > 0 (exact)", _col([float(archimedes)]), lower),
            Condition("h increasing on (3, 6) at pi", _col([math.pi]), lambda p: 4 * (6 - p[:, 0]) / p[:, 0] ** 3),
            Condition("pi > 223/71", _col([math.pi]), lambda p: p[:, 0] - float(archimedes)),
            Condition("g(0) = -4(pi-3)/pi^2", _col([0.0]),
                      lambda p: 1e-12 - np.abs(m.g_fun(p[:, 0]) + h(math.pi))),
        ],
    )


# ---------------------------------------------------------------------------
# reduction and the approach to alpha_c
# ---------------------------------------------------------------------------

@lru_cache(maxsize=256)
def _solve(alpha, kappa, cfg):
    return solve_saddle(alpha, kappa, cfg)


@register("one_dim_reduction", QUADRATURE_TOL,
          "f(0) = -alpha E(kappa)^2 < 0; f increasing with at most one sign change; f -> 2/pi - alpha C_kappa")
def _reduction(n, cfg):
    rule = cfg.rule
    cases = [(k, a) for k in (0.0, 1.0) for a in (0.2, 0.5, 0.9 * m.alpha_c(k))] + [(0.0, 1.3), (1.0, 0.4)]
    grid = np.geomspace(1e-6, cfg.max_bracket, 200)
    pairs = np.array([(k, a, x, y) for k, a in cases for x, y in zip(grid[:-1], grid[1:])])
    f = lambda r, a, k: m.one_dim_f(r, a, k, rule)  # noqa: E731
    return (
        f"(kappa, alpha) in {[(k, round(a, 6)) for k, a in cases]}; r geometric on [1e-6, {cfg.max_bracket:g}] (200 pts)",
        [
            Condition("f(0) < 0", np.array(cases), _rows(lambda k, a: -f(0.0, a, k))),
            Condition("f(0) = -alpha E(kappa)^2", np.array(cases),
                      _rows(lambda k, a: 1e-12 - abs(f(0.0, a, k) + a * float(inv_mills(k)) ** 2))),
            Condition("f strictly increasing", pairs, _rows(lambda k, a, x, y: f(y, a, k) - f(x, a, k))),
            Condition("at most one sign change", np.array(cases),
                      _rows(lambda k, a: 1 - sign_changes(a, k, cfg))),
            Condition("|f(1e12) - (2/pi - alpha C)| < 1e-4", np.array(cases),
                      _rows(lambda k, a: 1e-4 - abs(f(1e12, a, k) - m.tail_limit(a, k)))),
        ],
    )


THEOREM2_KAPPAS = (0.0, 1.0)
K_MAX = 12


def _sol(kappa, k, cfg):
    return _solve(approach_alphas(kappa, K_MAX)[int(k) - 1], float(kappa), cfg)


@register("theorem2_approach", QUADRATURE_TOL,
          "along alpha_k = alpha_c (1 - 2^-k): q, r increasing, q -> 1, RS -> -inf")
def _theorem2(n, cfg):
    steps = np.array([(kap, k) for kap in THEOREM2_KAPPAS for k in range(1, K_MAX)])
    late = np.array([(kap, k) for kap in THEOREM2_KAPPAS for k in range(6, K_MAX)])
    last = np.array([(kap, K_MAX) for kap in THEOREM2_KAPPAS])
    every = np.array([(kap, k) for kap in THEOREM2_KAPPAS for k in range(1, K_MAX + 1)])
    return (
        f"kappa in {THEOREM2_KAPPAS}, k = 1..{K_MAX}; point = (kappa, k)",
        [
            Condition("q(alpha_k+1) > q(alpha_k)", steps,
                      _rows(lambda kap, k: _sol(kap, k + 1, cfg).q - _sol(kap, k, cfg).q)),
            Condition("r(alpha_k+1) > r(alpha_k)", steps,
                      _rows(lambda kap, k: _sol(kap, k + 1, cfg).r - _sol(kap, k, cfg).r)),
            Condition("RS decreasing for k >= 6", late,
                      _rows(lambda kap, k: _sol(kap, k, cfg).rs_value - _sol(kap, k + 1, cfg).rs_value)),
            Condition("q(alpha_12) > 0.99", last, _rows(lambda kap, k: _sol(kap, k, cfg).q - 0.99)),
            Condition("RS(alpha_12) < -1", last, _rows(lambda kap, k: -1.0 - _sol(kap, k, cfg).rs_value)),
            Condition("residual_r <= 1e-8", every, _rows(lambda kap, k: 1e-8 - _sol(kap, k, cfg).residual_r)),
        ],
    )


DELTA = 0.5


def theorem3_terms(sol, rule, delta=DELTA):
    """Quantities in the upper bound chain for the RS value near ``alpha_c``.

    Returns a dict with the spin part, ``A_n = E[(kappa - sqrt(q) Z)_+^2]``,
    ``B(q)``, the constraint expectation and the right-hand sides of each
    inequality in the chain.
    """
    kappa, alpha, q, r = sol.kappa, sol.alpha, sol.q, sol.r
    eps = sol.one_minus_q
    sq = math.sqrt(q)
    log_cosh = m._spin_entropy(r, rule) - m.LOG2
    a_n = q * m.c_kappa(kappa / sq)
    b = m._big_B(q, eps, kappa, rule)
    cons = m._constraint_term(q, eps, kappa, rule)
    c_delta = -math.log(delta / 2)
    phi_kd = float(ndtr(kappa - delta))
    ac = m.alpha_c(kappa)
    return {
        "log_cosh": log_cosh,
        "log_cosh_bound": r * eps,
        "A_n": a_n,
        "B": b,
        "B_minus_A_bound": MILLS_SQ_C0 * eps,
        "constraint": cons,
        "constraint_bound": -a_n / (2 * eps) + phi_kd / 2 * math.log(eps) + c_delta,
        "rs": sol.rs_value,
        "rs_bound": alpha * phi_kd / 2 * math.log(eps) + m.LOG2 + MILLS_SQ_C0 * ac / 2 + ac * c_delta,
    }


@register("theorem3_chain", QUADRATURE_TOL,
          "bounding chain for the RS value along alpha_k: log cosh, B - A_n, log tail, final bound")
def _theorem3(n, cfg):
    rule = cfg.rule
    # sqrt(q) >= 1/2 is needed for the log-tail step; q(alpha_1) > 0.39 already
    pts = np.array([(kap, k) for kap in THEOREM2_KAPPAS for k in range(1, K_MAX + 1)])
    t = lambda kap, k: theorem3_terms(_sol(kap, k, cfg), rule)  # noqa: E731
    return (
        f"kappa in {THEOREM2_KAPPAS}, k = 1..{K_MAX}, delta = {DELTA}; point = (kappa, k)",
        [
            Condition("sqrt(q) >= 1/2", pts, _rows(lambda kap, k: math.sqrt(_sol(kap, k, cfg).q) - 0.5)),
            Condition("E log cosh <= r (1 - q)", pts,
                      _rows(lambda kap, k: (lambda d: d["log_cosh_bound"] - d["log_cosh"])(t(kap, k)))),
            Condition("B(q) >= A_n", pts, _rows(lambda kap, k: (lambda d: d["B"] - d["A_n"])(t(kap, k)))),
            Condition("B(q) - A_n <= C0 (1 - q)", pts,
                      _rows(lambda kap, k: (lambda d: d["B_minus_A_bound"] - d["B"] + d["A_n"])(t(kap, k)))),
            Condition("E log tail(U) <= -A_n/(2 eps) + Phi(kappa - delta)/2 log eps + C(delta)", pts,
                      _rows(lambda kap, k: (lambda d: d["constraint_bound"] - d["constraint"])(t(kap, k)))),
            Condition("RS <= final bound", pts, _rows(lambda kap, k: (lambda d: d["rs_bound"] - d["rs"])(t(kap, k)))),
        ],
    )
