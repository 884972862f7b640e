"""Log-domain adaptive quadrature for integrands exp(g(u)).

On every panel [a, b] the exponent is split into its chord
ga + s(u - a) and a residual. The chord part is integrated exactly through
the substitution t = (e^{s(u-a)} - 1)/(e^{s(b-a)} - 1); the residual is left to
Gauss-Legendre in t. Values stay logarithms throughout, so exp(2u^4) at
u = 4096 is as harmless as exp(-2u^4).
"""
import heapq
import logging
import math
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import logsumexp

from ergodiff.core.errors import QuadratureError

logger = logging.getLogger(__name__)

LogIntegrand = Callable[[np.ndarray], np.ndarray]

_HIGH = leggauss(10)
_LOW = leggauss(5)
_SMALL_EXPONENT = 1e-8
_ROUNDING_SLACK = 1e3


def log_expm1_ratio(x: np.ndarray) -> np.ndarray:
    """log((e^x - 1)/x), with the limit 0 at x = 0"""
    x = np.asarray(x, dtype=np.float64)
    out = x / 2.0
    big = np.abs(x) >= _SMALL_EXPONENT
    pos = big & (x > 0)
    neg = big & (x < 0)
    out[pos] = x[pos] + np.log(-np.expm1(-x[pos])) - np.log(x[pos])
    out[neg] = np.log(-np.expm1(x[neg])) - np.log(-x[neg])
    return out


def _log1p_t_expm1(t: np.ndarray, x: np.ndarray) -> np.ndarray:
    """log(1 + t (e^x - 1)) without overflow for large x"""
    pos = x > 0
    safe_x = np.where(pos, x, 0.0)
    large = safe_x + np.log(t + (1.0 - t) * np.exp(-safe_x))
    small = np.log1p(t * np.expm1(np.minimum(x, 0.0)))
    return np.where(pos, large, small)


def log_panels(
    g: LogIntegrand,
    a: np.ndarray,
    b: np.ndarray,
    ga: np.ndarray | None = None,
    gb: np.ndarray | None = None,
    rule: tuple[np.ndarray, np.ndarray] = _HIGH,
) -> np.ndarray:
    """log of int_a^b exp(g(u)) du for arrays of panels, one fitted Gauss rule each"""
    a = np.atleast_1d(np.asarray(a, dtype=np.float64))
    b = np.atleast_1d(np.asarray(b, dtype=np.float64))
    ga = g(a) if ga is None else ga
    gb = g(b) if gb is None else gb
    ga, gb = _finite_chord(ga, gb)
    nodes, weights = rule
    t = (nodes + 1.0) / 2.0
    w = weights / 2.0

    h = (b - a)[:, None]
    x = (gb - ga)[:, None]
    s = x / h
    flat = np.abs(x) < _SMALL_EXPONENT
    safe_s = np.where(flat, 1.0, s)
    u = np.where(flat, a[:, None] + t * h, a[:, None] + _log1p_t_expm1(t, x) / safe_s)
    u = np.clip(u, a[:, None], b[:, None])
    residual = g(u) - (ga[:, None] + s * (u - a[:, None]))
    return (
        ga + np.log(b - a) + log_expm1_ratio(gb - ga)
        + logsumexp(residual, b=np.broadcast_to(w, residual.shape), axis=-1)
    )


def _finite_chord(ga, gb) -> tuple[np.ndarray, np.ndarray]:
    """Replace -inf endpoint exponents so the chord stays finite"""
    ga = np.asarray(ga, dtype=np.float64)
    gb = np.asarray(gb, dtype=np.float64)
    dead_a, dead_b = np.isneginf(ga), np.isneginf(gb)
    both = dead_a & dead_b
    ga_f = np.where(both, 0.0, np.where(dead_a, gb, ga))
    gb_f = np.where(both, 0.0, np.where(dead_b, ga, gb))
    return ga_f, gb_f


def _log_abs_diff(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    hi = np.maximum(p, q)
    lo = np.minimum(p, q)
    with np.errstate(divide="ignore", invalid="ignore"):
        gap = hi + np.log(-np.expm1(lo - hi))
    return np.where(np.isneginf(hi), -np.inf, gap)


def _initial_breaks(a: float, b: float, per_doubling: int) -> np.ndarray:
    if a > 0:
        doublings = max(1, math.ceil(math.log2(b / a)))
        breaks = np.geomspace(a, b, doublings * per_doubling + 1)
    else:
        breaks = np.linspace(a, b, per_doubling + 1)
    breaks[0], breaks[-1] = a, b
    return breaks


def log_integral(
    g: LogIntegrand,
    a: float,
    b: float,
    rtol: float = 1e-10,
    max_panels: int = 4000,
    per_doubling: int = 4,
    magnitude: float = 0.0,
) -> float:
    """log of int_a^b exp(g(u)) du by globally adaptive bisection.

    The panel with the largest error estimate (10- vs 5-point fitted rule) is
    split until the summed error falls below rtol times the integral. When g
    is a difference of large terms, magnitude is the size of those terms; their
    rounding error bounds the attainable tolerance.
    """
    if b < a:
        raise ValueError(f"empty interval [{a}, {b}]")
    if b == a:
        return -math.inf

    breaks = _initial_breaks(a, b, per_doubling)
    lo, hi = breaks[:-1], breaks[1:]
    values, errors, scale = _estimate(g, lo, hi)
    scale = max(scale, abs(magnitude))
    heap = [(-e, float(l), float(h), float(v)) for l, h, v, e in zip(lo, hi, values, errors)]
    heapq.heapify(heap)

    while True:
        # exponents near 1e14 carry absolute rounding error of order 0.1
        log_tol = math.log(max(rtol, _ROUNDING_SLACK * np.finfo(float).eps * scale))
        vals = np.array([item[3] for item in heap])
        errs = np.array([-item[0] for item in heap])
        total = float(logsumexp(vals)) if np.isfinite(vals).any() else -math.inf
        err = float(logsumexp(errs)) if np.isfinite(errs).any() else -math.inf
        if err <= log_tol + total:
            logger.debug("log_integral on [%g, %g]: %d panels", a, b, len(heap))
            return total
        if len(heap) >= max_panels:
            raise QuadratureError(
                f"no convergence on [{a}, {b}] after {len(heap)} panels "
                f"(log error {err:.3g}, log value {total:.3g})"
            )
        _, left, right, _ = heapq.heappop(heap)
        mid = 0.5 * (left + right)
        v, e, mid_scale = _estimate(g, np.array([left, mid]), np.array([mid, right]))
        scale = max(scale, mid_scale)
        heapq.heappush(heap, (-float(e[0]), left, mid, float(v[0])))
        heapq.heappush(heap, (-float(e[1]), mid, right, float(v[1])))


def _estimate(
    g: LogIntegrand, lo: np.ndarray, hi: np.ndarray
) -> tuple[np.ndarray, np.ndarray, float]:
    """Panel values, their error estimates and the largest finite |g| at the ends"""
    ga, gb = g(lo), g(hi)
    high = log_panels(g, lo, hi, ga, gb, _HIGH)
    low = log_panels(g, lo, hi, ga, gb, _LOW)
    ends = np.abs(np.concatenate([np.ravel(ga), np.ravel(gb)]))
    ends = ends[np.isfinite(ends)]
    scale = float(ends.max()) if ends.size else 0.0
    return high, _log_abs_diff(high, low), scale


def log_increments(
    g: LogIntegrand,
    a: float,
    breaks: list[float],
    rtol: float = 1e-10,
    magnitude: LogIntegrand | None = None,
) -> np.ndarray:
    """log of the integral over each [breaks[k-1], breaks[k]], with breaks[-1] taken as a.

    magnitude(u), when given, sizes the cancelling terms of g on the panel ending at u.
    """
    edges = [a] + list(breaks)
    return np.array([
        log_integral(
            g, lo, hi, rtol=rtol,
            magnitude=0.0 if magnitude is None else float(np.max(np.abs(magnitude(hi)))),
        )
        for lo, hi in zip(edges[:-1], edges[1:])
    ])


class LogCumulative:
    """Running log of int_a^s exp(g(u)) du, tabulated on a geometric grid up to b.

    Partial panels beyond the last grid point below s use one fitted Gauss rule.
    """

    def __init__(self, g: LogIntegrand, a: float, b: float, per_doubling: int = 64):
        self.g = g
        self.grid = _initial_breaks(a, b, per_doubling)
        increments = log_panels(g, self.grid[:-1], self.grid[1:])
        self.values = np.concatenate([[-np.inf], np.logaddexp.accumulate(increments)])

    def __call__(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=np.float64)
        flat = s.ravel()
        j = np.clip(np.searchsorted(self.grid, flat, side="right") - 1, 0, len(self.grid) - 1)
        left = self.grid[j]
        partial = np.full(flat.shape, -np.inf)
        inside = flat > left
        if inside.any():
            partial[inside] = log_panels(self.g, left[inside], flat[inside])
        return np.logaddexp(self.values[j], partial).reshape(s.shape)
