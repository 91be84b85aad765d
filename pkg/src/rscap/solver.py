"""Saddle point solver, capacities and alpha sweeps.

The two-dimensional fixed point system is solved through its scalar
reduction ``f(r) = A(r) - alpha B(P(r))``.  ``f`` is strictly increasing with
``f(0) < 0`` and ``f(r) -> 2/pi - alpha C_kappa`` as ``r -> inf``, so a root
exists exactly when ``alpha < alpha_c(kappa)`` and plain bisection finds it.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericalResolutionError, RscapError
from .gauss import hermite_rule
from .model import (
    EPS_FLOOR,
    _big_B,
    _check_alpha,
    _check_kappa,
    _rs_free_energy,
    alpha_c,
    reduction,
    tail_limit,
)

ENV_PREFIX = "RSCAP_"


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances and resolution of the saddle point solver."""

    rel_tol_r: float = 1e-10
    max_bracket: float = 1e12
    quad_nodes: int = 201
    max_iter: int = 500

    def __post_init__(self):
        for name in ("rel_tol_r", "max_bracket", "quad_nodes", "max_iter"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be positive, got {value!r}")
        if self.rel_tol_r >= 1e-2:
            raise ConfigError(f"rel_tol_r must be < 1e-2, got {self.rel_tol_r!r}")
        if int(self.quad_nodes) != self.quad_nodes or self.quad_nodes < 2:
            raise ConfigError(f"quad_nodes must be an integer >= 2, got {self.quad_nodes!r}")
        if self.max_bracket <= 1:
            raise ConfigError("max_bracket must exceed 1")

    @property
    def rule(self):
        return hermite_rule(int(self.quad_nodes))

    @classmethod
    def from_env(cls, environ=None, **overrides):
        """Defaults, overridden by ``RSCAP_*`` variables, overridden by ``overrides``.

        ``None`` values in ``overrides`` are ignored so that unset CLI flags
        fall through to the environment.
        """
        environ = os.environ if environ is None else environ
        kwargs = {}
        casts = {"QUAD_NODES": ("quad_nodes", int), "REL_TOL_R": ("rel_tol_r", float),
                 "MAX_BRACKET": ("max_bracket", float), "MAX_ITER": ("max_iter", int)}
        for key, (name, cast) in casts.items():
            raw = environ.get(ENV_PREFIX + key)
            if raw is not None:
                try:
                    kwargs[name] = cast(raw)
                except ValueError:
                    raise ConfigError(f"{ENV_PREFIX + key}={raw!r} is not a valid {cast.__name__}") from None
        kwargs.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**kwargs)


@dataclass(frozen=True)
class SaddlePoint:
    """Unique solution ``(q, r)`` of the fixed point system at ``(alpha, kappa)``."""

    alpha: float
    kappa: float
    q: float
    r: float
    residual_q: float
    residual_r: float
    rs_value: float
    one_minus_q: float = field(repr=False, default=float("nan"))
    iterations: int = field(repr=False, default=0)
    solved: bool = True


@dataclass(frozen=True)
class NoSolution:
    """Certified absence of a solution for ``alpha >= alpha_c(kappa)``."""

    alpha: float
    kappa: float
    tail_limit: float
    f_at_max_bracket: float
    reason: str
    solved: bool = False


@dataclass(frozen=True)
class SweepRecord:
    alpha: float
    q: float | None
    r: float | None
    rs_value: float | None
    solved: bool
    residual_q: float | None = None
    residual_r: float | None = None
    error: str | None = None


@dataclass(frozen=True)
class CapacityResult:
    kappa: float
    alpha_c: float
    alpha_star: float | None
    bracket_width: float | None
    alpha_star_reason: str | None = None


def residuals(q, eps, r, alpha, kappa, rule):
    """``(|q - P(r)|, |r - R(q, alpha)| / max(1, r))`` with ``q = P(r)`` exact."""
    eps = max(eps, EPS_FLOOR)
    r_back = alpha * _big_B(q, eps, kappa, rule) / (eps * eps)
    return 0.0, abs(r - r_back) / max(1.0, r)


def solve_saddle(alpha, kappa=0.0, cfg: SolverConfig | None = None):
    """Solve the saddle point system at ``(alpha, kappa)``.

    Returns a :class:`SaddlePoint` for ``alpha < alpha_c(kappa)`` and a
    :class:`NoSolution` otherwise.  Absence is decided by the tail criterion
    ``2/pi - alpha C_kappa <= 0`` together with ``f(max_bracket) < 0``.

    Raises
    ------
    NumericalResolutionError
        If a root is predicted but not bracketed below ``cfg.max_bracket``,
        or the two absence criteria disagree.
    """
    alpha = _check_alpha(alpha)
    kappa = _check_kappa(kappa)
    cfg = SolverConfig() if cfg is None else cfg
    rule = cfg.rule
    limit = tail_limit(alpha, kappa)

    def f(r):
        return reduction(r, alpha, kappa, rule)[0]

    if limit <= 0:
        f_max = f(cfg.max_bracket)
        if f_max < 0:
            return NoSolution(alpha, kappa, limit, f_max,
                              reason=f"alpha >= alpha_c(kappa) = {alpha_c(kappa)!r}")
        raise NumericalResolutionError(
            f"tail criterion excludes a root but f(max_bracket) = {f_max!r} >= 0",
            alpha=alpha, kappa=kappa)

    lo, hi = 0.0, 1.0
    while f(hi) <= 0:
        lo, hi = hi, 2.0 * hi
        if hi > cfg.max_bracket:
            raise NumericalResolutionError(
                f"root of f predicted (tail limit {limit!r} > 0) but not bracketed "
                f"below max_bracket={cfg.max_bracket!r}", alpha=alpha, kappa=kappa)

    it = 0
    while hi - lo > cfg.rel_tol_r * hi:
        if it >= cfg.max_iter:
            raise NumericalResolutionError(
                f"bisection did not reach rel_tol_r within {cfg.max_iter} iterations",
                alpha=alpha, kappa=kappa)
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            hi = mid
        else:
            lo = mid
        it += 1

    r = 0.5 * (lo + hi)
    _, q, eps = reduction(r, alpha, kappa, rule)
    res_q, res_r = residuals(q, eps, r, alpha, kappa, rule)
    rs = _rs_free_energy(alpha, kappa, q, eps, r, rule)
    return SaddlePoint(alpha, kappa, q, r, res_q, res_r, rs, one_minus_q=eps, iterations=it)


def sign_changes(alpha, kappa=0.0, cfg: SolverConfig | None = None, r_min=1e-6, points=200):
    """Count sign changes of ``f`` on a geometric grid over ``[r_min, max_bracket]``."""
    cfg = SolverConfig() if cfg is None else cfg
    alpha = _check_alpha(alpha)
    kappa = _check_kappa(kappa)
    grid = np.geomspace(r_min, cfg.max_bracket, points)
    signs = np.sign([reduction(r, alpha, kappa, cfg.rule)[0] for r in grid])
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def _rs_at(alpha, kappa, cfg):
    sol = solve_saddle(alpha, kappa, cfg)
    if not sol.solved:
        raise NumericalResolutionError("no saddle point below alpha_c", alpha=alpha, kappa=kappa)
    return sol.rs_value


def capacity(kappa=0.0, cfg: SolverConfig | None = None, scan_points=64, width=1e-6):
    """Critical capacity ``alpha_c`` and the zero ``alpha_star`` of the RS value.

    ``alpha_star`` is located as the first sign change of
    ``alpha -> RS(alpha)`` on ``scan_points`` equally spaced values in
    ``[0.01 alpha_c, 0.999 alpha_c]`` and refined by bisection until the
    bracket is at most ``width`` wide.
    """
    kappa = _check_kappa(kappa)
    cfg = SolverConfig() if cfg is None else cfg
    ac = alpha_c(kappa)
    grid = np.linspace(0.01 * ac, 0.999 * ac, scan_points)
    prev_a, prev_v = None, None
    bracket = None
    for a in grid:
        try:
            v = _rs_at(float(a), kappa, cfg)
        except RscapError as exc:
            raise type(exc)(f"{exc} (at alpha={float(a)!r})") from exc
        if prev_v is not None and prev_v > 0 >= v:
            bracket = (prev_a, float(a))
            break
        prev_a, prev_v = float(a), v
    if bracket is None:
        return CapacityResult(kappa, ac, None, None,
                              alpha_star_reason="no sign change of the RS value on the scan grid")
    lo, hi = bracket
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if _rs_at(mid, kappa, cfg) > 0:
            lo = mid
        else:
            hi = mid
    return CapacityResult(kappa, ac, 0.5 * (lo + hi), hi - lo)


def _record(alpha, kappa, cfg):
    try:
        sol = solve_saddle(alpha, kappa, cfg)
    except RscapError as exc:
        return SweepRecord(alpha, None, None, None, False, error=str(exc))
    if not sol.solved:
        return SweepRecord(alpha, None, None, None, False, error=sol.reason)
    return SweepRecord(alpha, sol.q, sol.r, sol.rs_value, True, sol.residual_q, sol.residual_r)


def sweep(kappa, alpha_min, alpha_max, steps, cfg: SolverConfig | None = None, workers=1):
    """Solve on ``steps`` equally spaced alphas in ``[alpha_min, alpha_max]``.

    Per-point failures are recorded in the row and never abort the sweep.
    With ``workers > 1`` points are evaluated concurrently; the output does
    not depend on the evaluation order.
    """
    kappa = _check_kappa(kappa)
    alpha_min = _check_alpha(alpha_min)
    alpha_max = _check_alpha(alpha_max)
    if not alpha_min < alpha_max:
        raise ConfigError("alpha_min must be smaller than alpha_max")
    if int(steps) != steps or steps < 2:
        raise ConfigError(f"steps must be an integer >= 2, got {steps!r}")
    cfg = SolverConfig() if cfg is None else cfg
    alphas = [float(a) for a in np.linspace(alpha_min, alpha_max, int(steps))]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda a: _record(a, kappa, cfg), alphas))
    else:
        records = [_record(a, kappa, cfg) for a in alphas]
    return sorted(records, key=lambda rec: rec.alpha)


def approach_alphas(kappa, k_max=12):
    """``alpha_k = alpha_c(kappa) (1 - 2^-k)`` for ``k = 1..k_max``."""
    ac = alpha_c(kappa)
    return [ac * (1.0 - 2.0 ** -k) for k in range(1, k_max + 1)]


def approach_critical(kappa, k_max=12, cfg: SolverConfig | None = None):
    """Solutions along ``alpha_k`` increasing to ``alpha_c(kappa)``."""
    return [solve_saddle(a, kappa, cfg) for a in approach_alphas(kappa, k_max)]


__all__ = [
    "SolverConfig", "SaddlePoint", "NoSolution", "SweepRecord", "CapacityResult",
    "solve_saddle", "capacity", "sweep", "sign_changes", "approach_alphas",
    "approach_critical", "residuals",
]
