"""Composite Gauss-Legendre rules, graded panels and oscillatory integrals."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import InvalidArgument

GL_ORDER = 16
_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_ORDER)


def panel_rule(edges) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the composite 16-point rule on the given panel edges."""
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or len(edges) < 2:
        raise InvalidArgument("need at least two panel edges")
    lo, hi = edges[:-1], edges[1:]
    if np.any(hi <= lo):
        raise InvalidArgument("panel edges must be strictly increasing")
    half = (hi - lo) / 2
    mid = (hi + lo) / 2
    nodes = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    weights = (half[:, None] * _GL_W[None, :]).ravel()
    return nodes, weights


def graded_edges(lo: float, hi: float, critical=(), ratio: float = 0.25,
                 levels: int = 12, base: int = 2) -> np.ndarray:
    """Panel edges on ``[lo, hi]`` refined geometrically toward ``lo``, ``hi``
    and every critical point inside.

    Each segment between consecutive critical points is split at its midpoint
    and each half is graded toward its outer end with ``levels`` panels
    shrinking by ``ratio``; ``base`` uniform panels cover the middle.
    """
    if not hi > lo:
        raise InvalidArgument("need hi > lo")
    pts = sorted({float(lo), float(hi)} | {float(c) for c in critical if lo < c < hi})
    edges = [pts[0]]
    for u, v in zip(pts[:-1], pts[1:]):
        m = (u + v) / 2
        half = m - u
        # grading stops where panels would shrink to a few ulps
        floor_u = 64 * np.spacing(max(abs(u), half))
        floor_v = 64 * np.spacing(max(abs(v), half))
        left = [u + half * ratio ** j for j in range(levels, 0, -1) if half * ratio ** j > floor_u]
        right = [v - half * ratio ** j for j in range(1, levels + 1)
                 if half * ratio ** j > floor_v][::-1]
        middle = list(np.linspace(u + half * ratio, v - half * ratio, base + 1))
        seg = sorted(set(left + middle + right + [v]))
        edges.extend(e for e in seg if e > edges[-1])
    return np.array(edges)


def refine_edges(edges, counts) -> np.ndarray:
    """Split panel ``p`` into ``counts[p]`` equal panels."""
    edges = np.asarray(edges, dtype=float)
    counts = np.maximum(1, np.asarray(counts, dtype=int))
    start = np.repeat(edges[:-1], counts)
    width = np.repeat(np.diff(edges) / counts, counts)
    offset = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    out = np.concatenate([start + offset * width, edges[-1:]])
    # panel starts must coincide with the given edges exactly
    out[np.cumsum(counts) - counts] = edges[:-1]
    return out


def halve_edges(edges) -> np.ndarray:
    return refine_edges(edges, np.full(len(edges) - 1, 2))


def phase_edges(dpsi: Callable, lo: float, hi: float, k: float, theta: float = 6.0,
                grid: int = 4097, max_panels: int = 200_000) -> np.ndarray:
    """Panels on which the phase ``2 pi k psi`` turns by at most ``theta``.

    ``|psi'|`` is bounded per cell of a fine sampling grid (the larger of the
    two cell endpoints, times a safety factor of 2).
    """
    xs = np.linspace(lo, hi, grid)
    g = np.abs(np.asarray(dpsi(xs), dtype=float))
    cellmax = 2.0 * np.maximum(g[:-1], g[1:])
    width = xs[1] - xs[0]
    counts = np.ceil(2 * math.pi * abs(k) * cellmax * width / theta).astype(int)
    counts = np.clip(counts, 1, None)
    if counts.sum() > max_panels:
        raise InvalidArgument(f"phase needs {int(counts.sum())} panels (> {max_panels})")
    return refine_edges(xs, counts)


def oscillatory_integral(psi: Callable, dpsi: Callable, k: float, lo: float = 0.0,
                         hi: float = 1.0, theta: float = 6.0) -> complex:
    """``int_lo^hi exp(2 pi i k psi(x)) dx`` by phase-resolved Gauss panels."""
    edges = phase_edges(dpsi, lo, hi, k, theta)
    x, w = panel_rule(edges)
    ph = np.mod(k * np.asarray(psi(x), dtype=float), 1.0)
    return complex(np.sum(w * np.exp(2j * math.pi * ph)))


def oscillatory_integrals(psi: Callable, dpsi: Callable, ks, lo: float = 0.0,
                          hi: float = 1.0, theta: float = 6.0, chunk: int = 32) -> np.ndarray:
    """``oscillatory_integral`` for many integer ``k`` on one panel set
    (resolving the largest).

    Consecutive ``k`` are stepped by multiplying with ``exp(2 pi i dk psi)``;
    the exponential is recomputed from scratch every ``chunk`` values so the
    rounding drift stays at a few dozen ulps.
    """
    ks = [int(k) for k in ks]
    if not ks:
        return np.zeros(0, dtype=complex)
    edges = phase_edges(dpsi, lo, hi, float(max(abs(k) for k in ks)), theta)
    x, w = panel_rule(edges)
    ph = np.asarray(psi(x), dtype=float)

    def expo(k):
        return np.exp(2j * math.pi * np.mod(k * ph, 1.0))

    steps: dict = {}
    out = np.empty(len(ks), dtype=complex)
    cur, prev = None, None
    for j, k in enumerate(ks):
        if cur is None or j % chunk == 0:
            cur = expo(k)
        elif k != prev:
            dk = k - prev
            if dk not in steps:
                steps[dk] = expo(dk)
            cur = cur * steps[dk]
        out[j] = np.dot(cur, w)
        prev = k
    return out


def linear_phase_selftest(k_values=range(1, 1001)) -> float:
    """Largest ``|int_0^1 exp(2 pi i k x) dx|`` over integer ``k`` (exactly 0)."""
    worst = 0.0
    for k in k_values:
        val = oscillatory_integral(lambda x: x, lambda x: np.ones_like(x), k)
        worst = max(worst, abs(val))
    return worst


def total_variation(values) -> float:
    v = np.asarray(values, dtype=float)
    return float(np.sum(np.abs(np.diff(v))))


@dataclass
class StationaryPhaseVerdict:
    k: int
    modulus: float
    eta: float
    rho: float
    var_bound: float
    hypothesis_ok: bool
    rho_measured: float
    var_measured: float
    C_literal: float
    C_conventional: float
    bound_literal: float
    bound_conventional: float
    literal_ok: bool
    conventional_ok: bool

    @property
    def ok(self) -> bool:
        """Hypotheses hold and the (mathematically valid) conventional bound holds."""
        return self.hypothesis_ok and self.conventional_ok


def stationary_phase_constants(rho: float, var_bound: float) -> tuple[float, float]:
    """``(C_literal, C_conventional)``.

    The literal constant is ``rho/pi + V rho^2 / (2 pi)``; integrating by
    parts gives ``1/(pi rho) + V / (2 pi rho^2)``, which is the one that
    actually bounds the integral over ``[0, eta]``.
    """
    lit = rho / math.pi + var_bound * rho ** 2 / (2 * math.pi)
    conv = 1 / (math.pi * rho) + var_bound / (2 * math.pi * rho ** 2)
    return lit, conv


def stationary_phase_check(psi: Callable, dpsi: Callable, eta: float, k: int, rho: float,
                           var_bound: float, samples: int = 20001,
                           rel_slack: float = 1e-9) -> StationaryPhaseVerdict:
    """Compare ``|int_0^1 exp(2 pi i k psi)|`` with ``1 - eta + C/k``.

    The hypotheses ``|psi'| >= rho`` and ``Var(psi') <= var_bound`` on
    ``[0, eta]`` are checked on a dense grid; a violation gives a verdict
    with ``hypothesis_ok = False``.
    """
    return stationary_phase_sweep(psi, dpsi, eta, [k], rho, var_bound, samples, rel_slack)[0]


def stationary_phase_sweep(psi: Callable, dpsi: Callable, eta: float, ks, rho: float,
                           var_bound: float, samples: int = 20001,
                           rel_slack: float = 1e-9) -> list:
    """:func:`stationary_phase_check` for every ``k`` in ``ks`` (hypotheses
    measured once, integrals on a shared panel set)."""
    ks = [int(k) for k in ks]
    if not (0 < eta <= 1):
        raise InvalidArgument("eta must lie in (0, 1]")
    if not ks or min(ks) < 1:
        raise InvalidArgument("k must be >= 1")
    if rho <= 0:
        raise InvalidArgument("rho must be positive")
    xs = np.linspace(0.0, eta, samples)
    g = np.asarray(dpsi(xs), dtype=float)
    rho_m = float(np.min(np.abs(g)))
    var_m = total_variation(g)
    same_sign = bool(np.all(g > 0) or np.all(g < 0))
    hyp = same_sign and rho_m >= rho * (1 - rel_slack) and var_m <= var_bound * (1 + rel_slack)
    mods = np.abs(oscillatory_integrals(psi, dpsi, ks))
    lit, conv = stationary_phase_constants(rho, var_bound)
    tol = 1e-12
    out = []
    for k, mod in zip(ks, mods):
        b_lit = 1 - eta + lit / k
        b_conv = 1 - eta + conv / k
        out.append(StationaryPhaseVerdict(k, float(mod), eta, rho, var_bound, hyp, rho_m, var_m,
                                          lit, conv, b_lit, b_conv, mod <= b_lit + tol,
                                          mod <= b_conv + tol))
    return out


def measured_constants(dpsi: Callable, eta: float, samples: int = 20001):
    """``(rho, Var(psi'))`` on ``[0, eta]`` from a dense grid."""
    xs = np.linspace(0.0, eta, samples)
    g = np.asarray(dpsi(xs), dtype=float)
    return float(np.min(np.abs(g))), total_variation(g)


# ---------------------------------------------------------------------------
# resampling inside a panel
# ---------------------------------------------------------------------------

def _bary_weights(x):
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / np.prod(diff, axis=1)


_GL_B = _bary_weights(_GL_X)


def diff_matrix() -> np.ndarray:
    """``D`` with ``(D @ f)[i] = p'(x_i)`` for the interpolant of ``f`` on
    the 16 Gauss nodes of ``[-1, 1]``."""
    x, b = _GL_X, _GL_B
    D = (b[None, :] / b[:, None]) / (x[:, None] - x[None, :] + np.eye(len(x)))
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


def interp_matrix(y) -> np.ndarray:
    """Rows evaluate the Gauss-node interpolant at the points ``y`` in ``[-1, 1]``."""
    y = np.asarray(y, dtype=float)
    diff = y[:, None] - _GL_X[None, :]
    hit = diff == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        c = _GL_B[None, :] / diff
        out = c / c.sum(axis=1, keepdims=True)
    rows = hit.any(axis=1)
    out[rows] = hit[rows].astype(float)
    return out


_SUB_CACHE: dict = {}


def subpanel_rule(m: int):
    """Interpolation matrix and weights for ``m`` equal sub-panels of ``[-1, 1]``
    (``16 m`` Gauss nodes); weights sum to 2."""
    if m not in _SUB_CACHE:
        edges = np.linspace(-1.0, 1.0, m + 1)
        y, w = panel_rule(edges)
        _SUB_CACHE[m] = (interp_matrix(y), w)
    return _SUB_CACHE[m]
