"""Distributional superhedging in a two-regime Black-Scholes model.

The stock follows geometric Brownian motion with drift mu and a volatility
drawn once at time 0: sigma_h with probability p, sigma_l otherwise.  The
extreme pricing kernels are parameterized by the probability q that the
kernel assigns to the high regime; state prices and the stock are both
two-component lognormal mixtures whose quantiles are found by root-finding
on the component split.

The cost of delivering a terminal-wealth *distribution* F is
sup_q integral of F_kernel_q^{-1}(u) * F^{-1}(1-u) du, the anti-comonotone
pairing price maximized over the kernel family.  For the stock's own law
this cost sits strictly below S0, the price of the stock itself: the gap
between hedging a distribution and hedging a claim.
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Union

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import BracketError, NumericalError

__all__ = [
    "RegimeSwitchModel",
    "DEFAULT_MODEL",
    "PointMass",
    "Normal",
    "LogNormal",
    "MixtureStock",
    "TargetDistribution",
    "stock_cdf",
    "kernel_cdf",
    "stock_quantile",
    "kernel_quantile",
    "floor_price",
    "DistributionCost",
    "distribution_superhedge_cost",
    "MomentMatchedTargets",
    "moment_matched_targets",
    "CurvePoint",
    "variance_cost_curve",
    "curve_to_csv",
]

_NODES = 400
_BISECT_ITER = 90
_Q_TOL = 1e-8
_EDGE = 1e-7
_CLIP_LO = 1e-300
_CLIP_HI = 1.0 - 1e-16


@dataclass(frozen=True)
class RegimeSwitchModel:
    """Black-Scholes dynamics with volatility sigma_h w.p. p, else sigma_l.

    The rate r is fixed at zero; theta_h and theta_l are the market prices
    of risk mu/sigma per regime.  sigma_h = sigma_l is accepted and
    collapses the model to a single complete Black-Scholes market, which
    the degenerate-case checks rely on.
    """

    mu: float
    sigma_h: float
    sigma_l: float
    p: float
    T: float
    s0: float

    def __post_init__(self):
        for name in ("mu", "sigma_h", "sigma_l", "p", "T", "s0"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.mu <= 0:
            raise ValueError(f"drift must be positive, got {self.mu}")
        if not self.sigma_h >= self.sigma_l > 0:
            raise ValueError(
                f"volatilities must satisfy sigma_h >= sigma_l > 0, "
                f"got {self.sigma_h}, {self.sigma_l}"
            )
        if not 0 < self.p < 1:
            raise ValueError(f"regime probability must lie in (0, 1), got {self.p}")
        if self.T <= 0:
            raise ValueError(f"horizon must be positive, got {self.T}")
        if self.s0 <= 0:
            raise ValueError(f"initial price must be positive, got {self.s0}")

    @property
    def theta_h(self) -> float:
        return self.mu / self.sigma_h

    @property
    def theta_l(self) -> float:
        return self.mu / self.sigma_l

    @classmethod
    def from_dict(cls, data: dict) -> "RegimeSwitchModel":
        try:
            return cls(
                mu=data["mu"],
                sigma_h=data["sigma_h"],
                sigma_l=data["sigma_l"],
                p=data["p"],
                T=data["T"],
                s0=data["s0"],
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"model JSON needs keys mu, sigma_h, sigma_l, p, T, s0: {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "mu": self.mu,
            "sigma_h": self.sigma_h,
            "sigma_l": self.sigma_l,
            "p": self.p,
            "T": self.T,
            "s0": self.s0,
        }


DEFAULT_MODEL = RegimeSwitchModel(mu=0.05, sigma_h=0.3, sigma_l=0.15, p=0.5, T=1.0, s0=1.0)


# ------------------------------------------------------------------ cdfs


def _check_positive(x: float, what: str) -> float:
    x = float(x)
    if x <= 0:
        raise ValueError(f"{what} must be positive, got {x}")
    return x


def _check_open_unit(v: float, what: str) -> float:
    v = float(v)
    if not 0 < v < 1:
        raise ValueError(f"{what} must lie in (0, 1), got {v}")
    return v


def stock_cdf(model: RegimeSwitchModel, x: float) -> float:
    """P(S_T <= x): probability mixture of the two lognormal regimes."""
    x = _check_positive(x, "cdf argument")
    rt = math.sqrt(model.T)
    log_m = math.log(x / model.s0)
    z_h = (log_m - (model.mu - model.sigma_h**2 / 2) * model.T) / (model.sigma_h * rt)
    z_l = (log_m - (model.mu - model.sigma_l**2 / 2) * model.T) / (model.sigma_l * rt)
    return float(model.p * ndtr(z_h) + (1 - model.p) * ndtr(z_l))


def kernel_cdf(model: RegimeSwitchModel, q: float, x: float) -> float:
    """P(xi_T^q <= x) for the kernel that weights the high regime by q."""
    q = _check_open_unit(q, "kernel parameter q")
    x = _check_positive(x, "cdf argument")
    rt = math.sqrt(model.T)
    th, tl = model.theta_h, model.theta_l
    z_h = (math.log(x) - math.log(q / model.p) + th**2 * model.T / 2) / (th * rt)
    z_l = (math.log(x) - math.log((1 - q) / (1 - model.p)) + tl**2 * model.T / 2) / (tl * rt)
    return float(model.p * ndtr(z_h) + (1 - model.p) * ndtr(z_l))


# ------------------------------------------------------------- quantiles


def _mixture_log_quantile(
    p: float,
    m_h: float,
    s_h: float,
    m_l: float,
    s_l: float,
    u: np.ndarray,
    uc: np.ndarray,
) -> np.ndarray:
    """log of the u-quantile of p * LogN(m_h, s_h^2) + (1-p) * LogN(m_l, s_l^2).

    Bisects in log-value space between the two component quantiles, testing
    the cdf on the lower half and the survival function against the exact
    complement uc on the upper half.  Deep in either tail the component
    *split* level is not representable in floats, so root-finding on the
    split would silently saturate; the value-space formulation stays
    conditioned all the way to the representable edge of (0, 1).
    """
    if np.any(u <= 0.0) or np.any(u >= 1.0) or np.any(uc <= 0.0):
        raise BracketError("quantile level outside (0, 1)")
    z = ndtri(np.clip(u, _CLIP_LO, _CLIP_HI))
    y_h = m_h + s_h * z
    y_l = m_l + s_l * z
    lo = np.minimum(y_h, y_l)
    hi = np.maximum(y_h, y_l)
    lower_half = u <= 0.5
    for _ in range(_BISECT_ITER):
        mid = 0.5 * (lo + hi)
        z_h = (mid - m_h) / s_h
        z_l = (mid - m_l) / s_l
        cdf = p * ndtr(z_h) + (1.0 - p) * ndtr(z_l)
        sf = p * ndtr(-z_h) + (1.0 - p) * ndtr(-z_l)
        go_right = np.where(lower_half, cdf < u, sf > uc)
        lo = np.where(go_right, mid, lo)
        hi = np.where(go_right, hi, mid)
    return 0.5 * (lo + hi)


def _stock_quantile_array(
    model: RegimeSwitchModel, u: np.ndarray, uc: np.ndarray | None = None
) -> np.ndarray:
    if uc is None:
        uc = 1.0 - u
    rt = math.sqrt(model.T)
    base = math.log(model.s0) + model.mu * model.T
    y = _mixture_log_quantile(
        model.p,
        base - model.sigma_h**2 * model.T / 2,
        model.sigma_h * rt,
        base - model.sigma_l**2 * model.T / 2,
        model.sigma_l * rt,
        u,
        uc,
    )
    return np.exp(y)


def _kernel_quantile_array(
    model: RegimeSwitchModel, q: float, u: np.ndarray, uc: np.ndarray | None = None
) -> np.ndarray:
    if uc is None:
        uc = 1.0 - u
    rt = math.sqrt(model.T)
    th, tl = model.theta_h, model.theta_l
    y = _mixture_log_quantile(
        model.p,
        math.log(q / model.p) - th**2 * model.T / 2,
        th * rt,
        math.log((1.0 - q) / (1.0 - model.p)) - tl**2 * model.T / 2,
        tl * rt,
        u,
        uc,
    )
    return np.exp(y)


def stock_quantile(model: RegimeSwitchModel, u: float) -> float:
    """Generalized inverse of stock_cdf at u in (0, 1)."""
    u = _check_open_unit(u, "quantile level u")
    return float(_stock_quantile_array(model, np.array([u]))[0])


def kernel_quantile(model: RegimeSwitchModel, q: float, u: float) -> float:
    """Generalized inverse of kernel_cdf(., q) at u in (0, 1)."""
    q = _check_open_unit(q, "kernel parameter q")
    u = _check_open_unit(u, "quantile level u")
    return float(_kernel_quantile_array(model, q, np.array([u]))[0])


# --------------------------------------------------------------- targets


@dataclass(frozen=True)
class PointMass:
    """Degenerate target delivering the constant ``value``."""

    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))

    def quantile(self, u: float) -> float:
        _check_open_unit(u, "quantile level u")
        return self.value

    def quantile_from_score(self, t: np.ndarray) -> np.ndarray:
        return np.full_like(np.asarray(t, dtype=float), self.value)


@dataclass(frozen=True)
class Normal:
    """Normal target; the quantile is unbounded below, the cost integral converges."""

    mean: float
    variance: float

    def __post_init__(self):
        object.__setattr__(self, "mean", float(self.mean))
        object.__setattr__(self, "variance", float(self.variance))
        if self.variance <= 0:
            raise ValueError(f"variance must be positive, got {self.variance}")

    @property
    def sd(self) -> float:
        return math.sqrt(self.variance)

    def quantile(self, u: float) -> float:
        u = _check_open_unit(u, "quantile level u")
        return self.mean + self.sd * float(ndtri(u))

    def quantile_from_score(self, t: np.ndarray) -> np.ndarray:
        return self.mean + self.sd * np.asarray(t, dtype=float)


@dataclass(frozen=True)
class LogNormal:
    """exp(N(log_mean, log_variance)) target."""

    log_mean: float
    log_variance: float

    def __post_init__(self):
        object.__setattr__(self, "log_mean", float(self.log_mean))
        object.__setattr__(self, "log_variance", float(self.log_variance))
        if self.log_variance <= 0:
            raise ValueError(f"log-variance must be positive, got {self.log_variance}")

    @property
    def log_sd(self) -> float:
        return math.sqrt(self.log_variance)

    def quantile(self, u: float) -> float:
        u = _check_open_unit(u, "quantile level u")
        return math.exp(self.log_mean + self.log_sd * float(ndtri(u)))

    def quantile_from_score(self, t: np.ndarray) -> np.ndarray:
        return np.exp(self.log_mean + self.log_sd * np.asarray(t, dtype=float))


@dataclass(frozen=True)
class MixtureStock:
    """The stock's own terminal law as the target distribution."""

    model: RegimeSwitchModel

    def quantile(self, u: float) -> float:
        return stock_quantile(self.model, u)

    def quantile_from_score(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        # ndtr(-t) is the exact complement of ndtr(t); 1 - ndtr(t) is not
        return _stock_quantile_array(self.model, ndtr(t), ndtr(-t))


TargetDistribution = Union[PointMass, Normal, LogNormal, MixtureStock]


# ------------------------------------------------------------ quadrature


@lru_cache(maxsize=8)
def _gauss_nodes(nodes: int):
    # u = ndtr(t) substitution on t in [-8, 8]; truncated mass < 1e-14
    x, w = np.polynomial.legendre.leggauss(nodes)
    t = 8.0 * x
    weight = 8.0 * w * np.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi)
    t.setflags(write=False)
    weight.setflags(write=False)
    return t, weight


def _target_factor(target: TargetDistribution, t: np.ndarray) -> np.ndarray:
    # F_target^{-1}(1 - ndtr(t)) = F_target^{-1}(ndtr(-t))
    return np.asarray(target.quantile_from_score(-t), dtype=float)


def floor_price(
    model: RegimeSwitchModel,
    q: float,
    target: TargetDistribution,
    nodes: int = _NODES,
) -> float:
    """Price of the anti-comonotone pairing of the target with kernel q.

    Computes the integral of F_kernel^{-1}(u) F_target^{-1}(1-u) du by the
    substitution u = Phi(t) and Gauss-Legendre quadrature on [-8, 8]; this
    is the cheapest cost of any payoff with the target law, seen by the
    single kernel q.  Point masses are returned exactly.
    """
    q = _check_open_unit(q, "kernel parameter q")
    if isinstance(target, PointMass):
        return target.value
    t, weight = _gauss_nodes(nodes)
    kq = _kernel_quantile_array(model, q, ndtr(t), ndtr(-t))
    value = float(np.dot(weight, kq * _target_factor(target, t)))
    if not math.isfinite(value):
        raise NumericalError("cost integral diverged; target tail too heavy")
    return value


# ---------------------------------------------------------- optimization


@dataclass(frozen=True)
class DistributionCost:
    """Superhedging cost of a distribution and the maximizing kernel weight."""

    value: float
    q_star: float


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def distribution_superhedge_cost(
    model: RegimeSwitchModel,
    target: TargetDistribution,
    nodes: int = _NODES,
) -> DistributionCost:
    """sup over q of floor_price: the cost of the cheapest superhedge of a law.

    A 33-point coarse grid over q locates the basin, then golden-section
    search refines the maximizer to within 1e-8.  A RuntimeWarning flags
    maximizers within 1e-6 of the endpoints, where the kernel family
    degenerates.
    """
    if isinstance(target, PointMass):
        return DistributionCost(target.value, 0.5)
    t, weight = _gauss_nodes(nodes)
    factor = weight * _target_factor(target, t)
    levels = ndtr(t)
    comps = ndtr(-t)

    def g(q: float) -> float:
        value = float(np.dot(factor, _kernel_quantile_array(model, q, levels, comps)))
        if not math.isfinite(value):
            raise NumericalError("cost integral diverged; target tail too heavy")
        return value

    grid = np.linspace(_EDGE, 1.0 - _EDGE, 33)
    values = [g(q) for q in grid]
    best = int(np.argmax(values))
    a = grid[max(best - 1, 0)]
    b = grid[min(best + 1, len(grid) - 1)]

    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = g(x1), g(x2)
    while b - a > _Q_TOL:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = g(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = g(x1)
    q_star = 0.5 * (a + b)
    if q_star < 1e-6 or q_star > 1.0 - 1e-6:
        warnings.warn(
            f"optimal kernel weight {q_star} sits at the edge of (0, 1)",
            RuntimeWarning,
            stacklevel=2,
        )
    return DistributionCost(g(q_star), q_star)


# ------------------------------------------------------- moment matching


@dataclass(frozen=True)
class MomentMatchedTargets:
    """Normal and lognormal targets sharing the stock's mean and variance."""

    mean: float
    variance: float
    normal: Normal
    lognormal: LogNormal


def _lognormal_for(mean: float, variance: float) -> LogNormal:
    s2 = math.log(1.0 + variance / mean**2)
    return LogNormal(math.log(mean) - s2 / 2.0, s2)


def moment_matched_targets(model: RegimeSwitchModel) -> MomentMatchedTargets:
    """Targets matching E[S_T] and Var[S_T] of the regime-switching stock."""
    mean = model.s0 * math.exp(model.mu * model.T)
    variance = (
        model.p * math.exp(model.sigma_h**2 * model.T)
        + (1.0 - model.p) * math.exp(model.sigma_l**2 * model.T)
        - 1.0
    ) * model.s0**2 * math.exp(2.0 * model.mu * model.T)
    return MomentMatchedTargets(
        mean, variance, Normal(mean, variance), _lognormal_for(mean, variance)
    )


# ----------------------------------------------------------------- curve


@dataclass(frozen=True)
class CurvePoint:
    variance: float
    cost_normal: float
    cost_lognormal: float


def _thread_count(tasks: int) -> int:
    env = os.environ.get("EFFICO_THREADS")
    if env is not None:
        cap = int(env)
    else:
        cap = min(8, os.cpu_count() or 1)
    return max(1, min(cap, tasks))


def variance_cost_curve(
    model: RegimeSwitchModel, variances: Sequence[float]
) -> list[CurvePoint]:
    """Superhedging cost of normal/lognormal laws with the stock's mean, per variance.

    Larger variance means larger in convex order within each family, hence
    a cheaper distribution: both columns are nonincreasing.  Rows come back
    in grid order regardless of the worker scheduling.
    """
    vs = [float(v) for v in variances]
    if not vs:
        raise ValueError("variance grid is empty")
    if any(v <= 0 for v in vs):
        raise ValueError("variances must be positive")
    if any(b <= a for a, b in zip(vs, vs[1:])):
        raise ValueError("variance grid must be strictly increasing")
    mean = model.s0 * math.exp(model.mu * model.T)
    targets: list[TargetDistribution] = []
    for v in vs:
        targets.append(Normal(mean, v))
        targets.append(_lognormal_for(mean, v))

    def cost(target: TargetDistribution) -> float:
        return distribution_superhedge_cost(model, target).value

    workers = _thread_count(len(targets))
    if workers == 1:
        costs = [cost(t) for t in targets]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            costs = list(pool.map(cost, targets))
    return [
        CurvePoint(v, costs[2 * i], costs[2 * i + 1]) for i, v in enumerate(vs)
    ]


def curve_to_csv(points: Sequence[CurvePoint]) -> str:
    lines = ["variance,cost_normal,cost_lognormal"]
    for pt in points:
        lines.append(
            f"{_csv_num(pt.variance)},{_csv_num(pt.cost_normal)},{_csv_num(pt.cost_lognormal)}"
        )
    return "\n".join(lines) + "\n"


def _csv_num(x: float) -> str:
    return format(float(x), ".12g")
