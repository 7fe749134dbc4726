"""Quantitative checks behind the ergodicity criterion for skew products.

Symmetry identities of Birkhoff sums of odd cocycles, tightness integrals
``int_Xi |S_h phi|`` and oscillation integrals ``int_Xi exp(2 pi i k S_h phi)``
over rigidity sets, and derivative bounds on the left sub-floors.

Birkhoff sums on a whole tower are computed with a sliding window: floor
``i + 1`` is the image of floor ``i``, so
``S_h phi`` on floor ``i + 1`` equals ``S_h phi`` on floor ``i`` minus the
term of step ``i`` plus the term of step ``i + h`` (all evaluated at the same
relative position inside the floor).  Each step is a translation on every
piece of the base interval, so the whole computation is ``O((h + floors) * nodes)``.
"""

from __future__ import annotations

import csv
import io
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .cocycle import LogCocycle, birkhoff_prefix
from .errors import InvalidArgument, StructuralError
from .iet import Iet
from .involution import HALF, centers
from .quadrature import diff_matrix, graded_edges, halve_edges, panel_rule, subpanel_rule
from .rauzy import InductionState
from .towers import RigiditySet


# ---------------------------------------------------------------------------
# symmetry identities
# ---------------------------------------------------------------------------

@dataclass
class SymmetryResidual:
    n: int
    residual: float
    clipped: bool


def symmetry_residual(T: Iet, phi: LogCocycle, x, n: int) -> SymmetryResidual:
    """``|S_n phi(T^-n(|I| - x)) + S_n phi(x)|`` (zero for odd ``phi``)."""
    if not T.perm.is_symmetric():
        raise InvalidArgument("the identity needs a symmetric permutation")
    if n < 0:
        raise InvalidArgument("n must be >= 0")
    if n == 0:
        return SymmetryResidual(0, 0.0, False)
    prof = symmetry_profile(T, phi, x, n)
    return SymmetryResidual(n, float(prof[0][n]), bool(prof[1][n]))


def symmetry_profile(T: Iet, phi: LogCocycle, x, n_max: int):
    """Residuals of the reflection identity for every ``n <= n_max``.

    Returns ``(residuals, clipped)`` arrays of length ``n_max + 1``.
    """
    y = float(T.total) - float(x)
    fwd, cf = birkhoff_prefix(T, phi, x, n_max)
    bwd, cb = birkhoff_prefix(T, phi, y, n_max, backward=True)
    return np.abs(fwd + bwd), cf | cb


@dataclass
class MidpointResidual:
    label: object  # letter or "1/2"
    point: float
    n_max: int
    max_residual: float  # over non-clipped n
    max_scaled: float  # max residual / n over non-clipped n >= 1
    clipped_count: int
    phi_at_point: Optional[float]  # phi(x) for interval midpoints


def midpoint_profile(T: Iet, phi: LogCocycle, x, n_max: int, half: bool):
    """Residuals of the midpoint identities for ``n = 0 .. n_max``.

    Global midpoint: ``S_2n phi(T^-n x) = 0``; interval midpoint:
    ``S_2n phi(T^-n x) + phi(T^n x) = 0``.  Both are prefix-sum combinations
    of one forward and one backward orbit.
    """
    fwd, cf = birkhoff_prefix(T, phi, x, n_max + 1)
    bwd, cb = birkhoff_prefix(T, phi, x, n_max, backward=True)
    if half:
        res = np.abs(bwd + fwd[: n_max + 1])
        clip = cb | cf[: n_max + 1]
    else:
        res = np.abs(bwd + fwd[1: n_max + 2])
        clip = cb | cf[1: n_max + 2]
    return res, clip


def midpoint_identities(T: Iet, phi: LogCocycle, n: int) -> list:
    """Per-center residual summaries for all ``m <= n``."""
    if not T.perm.is_symmetric():
        raise InvalidArgument("the identities need a symmetric permutation")
    mids, hp = centers(T)
    out = []
    for label, x in [(a, mids[a]) for a in range(T.d)] + [(HALF, hp)]:
        res, clip = midpoint_profile(T, phi, x, n, label == HALF)
        ok = ~clip
        scale = np.maximum(np.arange(n + 1), 1)
        mr = float(res[ok].max()) if ok.any() else math.nan
        ms = float((res[ok] / scale[ok]).max()) if ok.any() else math.nan
        val = None if label == HALF else float(phi.eval_array(np.array([float(x)]))[0])
        out.append(MidpointResidual(label, float(x), n, mr, ms, int(clip.sum()), val))
    return out


# ---------------------------------------------------------------------------
# eta
# ---------------------------------------------------------------------------

def select_case(phi: LogCocycle):
    """``"ends"`` when ``C+`` of the first and last top letters do not cancel,
    else the first top rank ``1 < k < d`` with ``C+ != 0``."""
    top = phi.T.perm.top
    if phi.C_plus[top[0]] + phi.C_plus[top[-1]] != 0:
        return "ends"
    for k in range(2, phi.d):
        if phi.C_plus[top[k - 1]] != 0:
            return k
    raise InvalidArgument("cocycle is trivial for both cases (no usable singular coefficient)")


def case_letter(perm, case) -> int:
    """Letter whose tower approaches the singularity used by ``case``."""
    if case == "ends":
        return perm.top[-1]
    if not (isinstance(case, int) and 1 < case < perm.d):
        raise InvalidArgument(f"bad case {case!r}")
    return perm.top[case - 1]


def choose_eta(C_plus, C_minus, case, M_hat: float, perm=None) -> float:
    """``min(1/1000, 1/(3 M_hat)) / |C|`` clamped to ``(0, 1/4)``.

    ``C`` is ``C+_first + C+_last`` (top order) for ``case == "ends"`` and
    ``C+`` of the letter of top rank ``case`` otherwise.  Without ``perm`` the
    letters are taken in top order ``0 .. d-1``.
    """
    d = len(C_plus)
    if len(C_minus) != d:
        raise InvalidArgument("C+ and C- must have the same length")
    if not (M_hat > 0):
        raise InvalidArgument("M_hat must be positive")
    top = list(perm.top) if perm is not None else list(range(d))
    if case == "ends":
        c = C_plus[top[0]] + C_plus[top[-1]]
    elif isinstance(case, int) and 1 < case < d:
        c = C_plus[top[case - 1]]
    else:
        raise InvalidArgument(f"bad case {case!r}")
    if c == 0:
        raise InvalidArgument("zero singular coefficient for the chosen case")
    eta = min(1 / 1000, 1 / (3 * M_hat)) / abs(c)
    return float(min(eta, np.nextafter(0.25, 0)))


# ---------------------------------------------------------------------------
# orbit of a floor, split into continuity pieces
# ---------------------------------------------------------------------------

@dataclass
class FloorOrbit:
    """Orbit of ``[a, a + L)`` over ``steps`` iterates.

    ``breaks`` are the relative positions where some iterate is cut by a
    discontinuity; inside a piece every iterate is a translation.  For piece
    ``p`` and step ``j`` the image of ``a + t`` is ``a + t + offsets[j, p]``
    and lies in letter ``letters[j, p]``.
    """
    a: float
    length: float
    steps: int
    breaks: np.ndarray
    offsets: np.ndarray
    letters: np.ndarray

    def piece_of(self, t) -> np.ndarray:
        return np.searchsorted(self.breaks, t, side="right")


def floor_orbit(T: Iet, a, length, steps: int) -> FloorOrbit:
    a, length = float(a), float(length)
    size = float(T.total)
    rights = [float(v) for v in T.rights]
    w = [float(v) for v in T.translation]
    cuts = [float(c) for c in T._top_cuts]
    top = T.perm.top
    tol = 1e-13 * size
    pieces = [(0.0, length, a)]
    breaks = []
    for _ in range(steps - 1):
        nxt = []
        for t0, t1, x in pieces:
            while True:
                b = top[bisect_right(cuts, x)]
                over = x + (t1 - t0) - rights[b]
                if over > tol and t1 - t0 - over > tol:
                    s = t0 + (rights[b] - x)
                    breaks.append(s)
                    nxt.append((t0, s, x + w[b]))
                    t0, x = s, rights[b]
                else:
                    nxt.append((t0, t1, x + w[b]))
                    break
        pieces = [(t0, t1, min(max(x, 0.0), np.nextafter(size, 0))) for t0, t1, x in nxt]
    bk = np.array(sorted(set(breaks)))
    edges = np.concatenate([[0.0], bk, [length]])
    mids_rel = (edges[:-1] + edges[1:]) / 2
    orb = T.orbit_array(a + mids_rel, steps)
    offsets = orb - (a + mids_rel)[None, :]
    cut_arr = np.asarray(cuts)
    letters = np.asarray(top)[np.searchsorted(cut_arr, orb, side="right")]
    return FloorOrbit(a, length, steps, bk, offsets, letters)


# ---------------------------------------------------------------------------
# sliding-window engine
# ---------------------------------------------------------------------------

def _nadd(s, c, x):
    t = s + x
    c += np.where(np.abs(s) >= np.abs(x), (s - t) + x, (x - t) + s)
    return t, c


class _Terms:
    def __init__(self, phi: LogCocycle, orbit: FloorOrbit, t: np.ndarray):
        self.phi = phi
        self.orbit = orbit
        self.base = orbit.a + t
        self.piece = orbit.piece_of(t)

    def values(self, j: int, derivative: bool):
        pos = self.base + self.orbit.offsets[j, self.piece]
        let = self.orbit.letters[j, self.piece]
        if derivative:
            return self.phi.derivative_array(pos, let)
        return self.phi.eval_array(pos, let)


def sliding_sums(phi: LogCocycle, orbit: FloorOrbit, t, window: int, floors: int,
                 derivative: bool = False):
    """Yield ``(i, S, clipped)`` with ``S = S_window phi`` (or ``phi'``) at
    relative positions ``t`` of floor ``i``, for ``i = 0 .. floors - 1``."""
    t = np.asarray(t, dtype=float)
    if orbit.steps < floors - 1 + window:
        raise InvalidArgument("floor orbit too short for the requested window")
    terms = _Terms(phi, orbit, t)
    s = np.zeros_like(t)
    c = np.zeros_like(t)
    bad = np.zeros(t.shape, dtype=np.int64)
    for j in range(window):
        v = terms.values(j, derivative)
        nan = np.isnan(v)
        bad += nan
        s, c = _nadd(s, c, np.where(nan, 0.0, v))
    yield 0, s + c, bad > 0
    for i in range(1, floors):
        old = terms.values(i - 1, derivative)
        new = terms.values(i - 1 + window, derivative)
        on, nn = np.isnan(old), np.isnan(new)
        bad += nn.astype(np.int64) - on.astype(np.int64)
        s, c = _nadd(s, c, np.where(on, 0.0, -old))
        s, c = _nadd(s, c, np.where(nn, 0.0, new))
        yield i, s + c, bad > 0


# ---------------------------------------------------------------------------
# tightness and oscillation integrals
# ---------------------------------------------------------------------------

@dataclass
class FloorIntegrals:
    tightness: float
    tightness_err: float
    ks: list
    moduli: list
    phases: list
    moduli_err: list
    measure: float  # Leb(Xi)
    excised: float  # measure removed because of clipped evaluations
    nodes: int
    panels: int
    phase_resolved: bool  # every panel resolves the largest k
    window: int
    sup_abs: float  # max |S_h phi| over the nodes
    unresolved: list = field(default_factory=list)  # per k, measure of unresolved panels


def _coarse_edges(orbit: FloorOrbit, ratio: float = 0.5, levels: int = 40, base: int = 4):
    """Gauss panels graded toward the floor edges and the break points.

    With ratio 1/2 every panel is at least its own width away from the
    nearest critical point, so ``S`` is analytic on a neighbourhood of each
    panel and its 16-node interpolant is accurate to near rounding.
    """
    return graded_edges(0.0, orbit.length, orbit.breaks, ratio=ratio, levels=levels, base=base)


_DIFF = None


def _panel_slopes(SP, width):
    """``max |S'|`` per panel from the interpolant on the panel's Gauss nodes."""
    global _DIFF
    if _DIFF is None:
        _DIFF = diff_matrix()
    return np.abs(SP @ _DIFF.T).max(axis=1) * (2.0 / width)


class _Oscillation:
    """Accumulates ``sum_floors int exp(2 pi i k S)`` for several ``k`` on one grid."""

    def __init__(self, edges, ks, theta, m_cap, skip_width=0.0):
        self.width = np.diff(edges)
        self.skip_width = skip_width
        self.P = len(self.width)
        self.ks = np.asarray(ks, dtype=float)
        self.theta = theta
        self.m_cap = m_cap
        self.Z = np.zeros(len(ks), dtype=complex)
        self.unresolved = np.zeros(len(ks))
        self.max_m = 1
        self.capped = False

    def add(self, S, bad, scale):
        """``scale`` normalizes the panel weights (sum of widths -> floor length)."""
        SP = S.reshape(self.P, -1)
        okp = ~bad.reshape(self.P, -1).any(axis=1)
        if not okp.any():
            return
        SPg = SP[okp]
        wg = self.width[okp] * scale
        slope = _panel_slopes(SPg, self.width[okp])
        for i, k in enumerate(self.ks):
            turn = 2 * math.pi * k * 1.2 * slope * self.width[okp] / self.theta
            m = np.ones(len(turn), dtype=np.int64)
            big = turn > 1
            m[big] = 2 ** np.ceil(np.log2(turn[big])).astype(np.int64)
            # tiny panels are not worth resolving: their measure bounds the error
            over = (m > self.m_cap) | ((m > 1) & (wg < self.skip_width))
            self.capped |= bool((m > self.m_cap).any())
            if over.any():
                # left out of the sum; |integrand| <= 1 so the measure bounds the loss
                self.unresolved[i] += float(wg[over].sum())
            acc = 0j
            for mv in np.unique(m[~over]):
                sel = (m == mv) & ~over
                A, w = subpanel_rule(int(mv))
                vals = SPg[sel] @ A.T  # (panels, 16 m)
                ph = 2 * math.pi * np.mod(k * vals, 1.0)
                ww = (wg[sel] / 2)[:, None] * w[None, :]
                acc += np.sum(ww * np.cos(ph)) + 1j * np.sum(ww * np.sin(ph))
            self.Z[i] += acc
            if (~over).any():
                self.max_m = max(self.max_m, int(m[~over].max()))


def floor_integrals(T: Iet, phi: LogCocycle, Xi: RigiditySet, ks: Sequence[int] = (),
                    window: Optional[int] = None, theta: float = 10.0,
                    m_cap: int = 1 << 15, levels: int = 40,
                    skip: float = 1e-8) -> FloorIntegrals:
    """``int_Xi |S_h phi|`` and ``int_Xi exp(2 pi i k S_h phi)`` for ``k`` in ``ks``.

    ``S_h phi`` is computed exactly (sliding window) on Gauss panels graded
    toward the floor edges and the break points, on two levels (a grid and
    its halving).  The oscillatory integrals resample ``S`` inside each panel
    by 16-node interpolation onto ``m`` sub-panels with ``m`` chosen so that
    the phase turns by at most ``theta`` per sub-panel.  Returned values come
    from the finer level; the level difference is the error estimate, plus
    twice the measure of panels needing more than ``m_cap`` sub-panels or
    narrower than ``skip`` times the floor length (and not already resolved).
    """
    h = Xi.h if window is None else int(window)
    floors = len(Xi.floors)
    length = float(Xi.length)
    orbit = floor_orbit(T, Xi.base[0], length, floors - 1 + h + 1)
    eA = _coarse_edges(orbit, levels=levels)
    eB = halve_edges(eA)
    tA, wA = panel_rule(eA)
    tB, wB = panel_rule(eB)
    sA, sB = length / wA.sum(), length / wB.sum()
    wA, wB = wA * sA, wB * sB
    t = np.concatenate([tA, tB])
    nA = len(tA)
    ks = [int(k) for k in ks]
    oA = _Oscillation(eA, ks, theta, m_cap, skip * length)
    oB = _Oscillation(eB, ks, theta, m_cap, skip * length)
    tight = np.zeros(2)
    excised = 0.0
    sup = 0.0
    for _, S, bad in sliding_sums(phi, orbit, t, h, floors):
        good = ~bad
        SA, SB = S[:nA], S[nA:]
        gA, gB = good[:nA], good[nA:]
        excised += float(wB[~gB].sum())
        if good.any():
            sup = max(sup, float(np.abs(S[good]).max()))
        tight[0] += float(np.dot(np.where(gA, wA, 0.0), np.where(gA, np.abs(SA), 0.0)))
        tight[1] += float(np.dot(np.where(gB, wB, 0.0), np.where(gB, np.abs(SB), 0.0)))
        if ks:
            oA.add(np.where(gA, SA, 0.0), bad[:nA], sA)
            oB.add(np.where(gB, SB, 0.0), bad[nA:], sB)
    meas = length * floors
    Z = oB.Z
    unres = oB.unresolved
    errs = np.abs(oB.Z - oA.Z) + 2 * np.maximum(unres, oA.unresolved)
    return FloorIntegrals(
        tightness=float(tight[1]), tightness_err=float(abs(tight[1] - tight[0])),
        ks=ks, moduli=[float(m) for m in np.abs(Z)], phases=[float(p) for p in np.angle(Z)],
        moduli_err=[float(e) for e in errs], measure=meas, excised=excised,
        nodes=len(tB), panels=len(eB) - 1, phase_resolved=not (oA.capped or oB.capped), window=h,
        sup_abs=sup, unresolved=[float(u) for u in unres])


def tightness_integral(T: Iet, phi: LogCocycle, Xi: RigiditySet, **kw):
    """``(value, error_estimate)`` of ``int_Xi |S_h phi| dLeb``."""
    r = floor_integrals(T, phi, Xi, (), **kw)
    return r.tightness, r.tightness_err


def oscillation_integral(T: Iet, phi: LogCocycle, Xi: RigiditySet, k, **kw):
    """``(modulus, phase)`` of ``int_Xi exp(2 pi i k S_h phi) dLeb``; a sequence
    of ``k`` gives a list of pairs."""
    many = not np.isscalar(k)
    ks = list(k) if many else [int(k)]
    if any(int(v) < 1 for v in ks):
        raise InvalidArgument("k must be >= 1")
    r = floor_integrals(T, phi, Xi, ks, **kw)
    out = list(zip(r.moduli, r.phases))
    return out if many else out[0]


# ---------------------------------------------------------------------------
# derivative bounds on the left sub-floors
# ---------------------------------------------------------------------------

@dataclass
class DerivativeBounds:
    rho_hat: float  # min |S_2h phi'| over the sub-floors
    D_hat: float  # max |S_2h phi'| over the sub-floors
    lower_predicted: float
    upper_predicted: float  # = D q_alpha
    D: float
    q_alpha: int
    applicable: bool  # the cocycle has a singular term at the tower's letter
    lower_ok: Optional[bool]  # rho_hat >= predicted lower bound (when positive)
    upper_ok: bool
    sign_constant: bool  # S_2h phi' keeps one sign on every sub-floor
    clipped: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def derivative_bounds_on_subfloor(T: Iet, phi: LogCocycle, Xi: RigiditySet, eta=None,
                                  delta: float = 0.0, M_hat: float = 0.0,
                                  samples: int = 64) -> DerivativeBounds:
    """``|S_2h phi'|`` on the left ``eta``-portions of every floor of ``Xi``,
    compared with the bracket ``|C+_a| q/(2 eta) -/+ (2d-1) max|C| q/delta -/+ 2 M h``."""
    eta = float(Xi.eta if eta is None else eta)
    h = Xi.h
    floors = len(Xi.floors)
    length = float(Xi.length)
    sub = eta * length
    orbit = floor_orbit(T, Xi.base[0], length, floors - 1 + 2 * h + 1)
    edges = graded_edges(0.0, sub, [b for b in orbit.breaks if b < sub], levels=6, base=samples // 16)
    t, _ = panel_rule(edges)
    rho, dmax, clipped, same = math.inf, 0.0, 0, True
    for _, ds, bad in sliding_sums(phi, orbit, t, 2 * h, floors, derivative=True):
        clipped += int(bad.sum())
        g = ds[~bad]
        if g.size:
            rho = min(rho, float(np.abs(g).min()))
            dmax = max(dmax, float(np.abs(g).max()))
            same = same and bool(np.all(g > 0) or np.all(g < 0))
    q = Xi.q_alpha
    d = phi.d
    cmax = max(max(abs(c) for c in phi.C_plus), max(abs(c) for c in phi.C_minus))
    ca = abs(phi.C_plus[Xi.alpha])
    main = ca * q / (2 * eta)
    extra = ((2 * d - 1) * cmax * q / delta if delta > 0 else math.inf) + 2 * M_hat * h
    lower = main - extra
    upper = main + extra
    applicable = ca > 0
    lower_ok = (rho >= lower) if (applicable and lower > 0) else None
    return DerivativeBounds(rho, dmax, lower, upper, upper / q, q, applicable, lower_ok,
                            dmax <= upper, same, clipped)


# ---------------------------------------------------------------------------
# anchor point
# ---------------------------------------------------------------------------

@dataclass
class Anchor:
    label: object  # original center: letter or "1/2"
    point: float
    floor: int  # floor of the tower over I^n_alpha containing the point
    value: float  # |S_2h phi(T^-h x)|
    clipped: bool
    candidates: list = field(default_factory=list)


def centers_in_tower(T: Iet, state: InductionState, alpha: int):
    """Original centers (interval midpoints and ``|I|/2``) lying in the
    tower ``U_{i < q_alpha} T^i I^n_alpha``, with their floor index."""
    base = state.induced()
    lo, hi = float(base.lefts[alpha]), float(base.rights[alpha])
    top_n = float(base.total)
    mids, hp = centers(T)
    out = []
    for label, x in [(HALF, hp)] + [(a, mids[a]) for a in range(T.d)]:
        orb = T.backward_orbit(x, state.q[alpha])
        for r, y in enumerate(orb):
            y = float(y)
            if y < top_n:
                if lo <= y < hi:
                    out.append((label, float(x), r))
                break
    return out


def anchor_point(T: Iet, phi: LogCocycle, state: InductionState, alpha: int, h: int) -> Anchor:
    """Center in the tower over ``alpha`` with ``|S_2h phi(T^-h x)|``.

    ``|I|/2`` is preferred when it lies in the tower; otherwise the first
    interval midpoint (letter order) that does.
    """
    cands = centers_in_tower(T, state, alpha)
    if not cands:
        raise StructuralError(f"no center in the tower over letter {alpha} at n={state.n}",
                              {"n": state.n, "alpha": alpha})
    vals = []
    for label, x, r in cands:
        fwd, cf = birkhoff_prefix(T, phi, x, h)
        bwd, cb = birkhoff_prefix(T, phi, x, h, backward=True)
        vals.append((label, x, r, abs(float(fwd[h] + bwd[h])), bool(cf[h] or cb[h])))
    label, x, r, v, c = vals[0]
    return Anchor(label, x, r, v, c, [dict(label=str(lb), point=px, floor=fr, value=vv, clipped=cc)
                                       for lb, px, fr, vv, cc in vals])


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

@dataclass
class CriterionReport:
    n: int
    alpha: int
    q_alpha: int
    h: int
    measure: float
    tightness: float
    tightness_err: float
    oscillation: list  # [(k, modulus, phase, err)]
    eta_used: float
    M_hat: float
    D_prime: float
    rho_hat: Optional[float]
    D_hat: Optional[float]
    D_upper: Optional[float]
    anchor_point: Optional[float]
    anchor_label: Optional[str]
    anchor_value: Optional[float]
    excised: float
    phase_resolved: bool

    @property
    def tightness_bound(self) -> float:
        a = self.anchor_value if self.anchor_value is not None else math.inf
        return self.D_prime + a + self.tightness_err

    def tightness_ok(self) -> bool:
        return self.tightness <= self.tightness_bound

    def oscillation_ok(self, eta: Optional[float] = None):
        """Smallest listed ``k`` from which every modulus stays below
        ``Leb(Xi) (1 - eta/2)``, or ``None``."""
        eta = self.eta_used if eta is None else eta
        thr = self.measure * (1 - eta / 2)
        K = None
        for k, m, _, err in sorted(self.oscillation, key=lambda r: r[0], reverse=True):
            if m + err < thr:
                K = k
            else:
                break
        return K

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "alpha": self.alpha,
            "q_alpha": self.q_alpha,
            "h": self.h,
            "measure": self.measure,
            "tightness": self.tightness,
            "tightness_err": self.tightness_err,
            "oscillation": [{"k": k, "modulus": m, "phase": p, "err": e}
                            for k, m, p, e in self.oscillation],
            "eta_used": self.eta_used,
            "anchor": {"point": self.anchor_point, "label": self.anchor_label,
                       "value": self.anchor_value},
            "bounds": {"M_hat": self.M_hat, "rho_hat": self.rho_hat, "D_hat": self.D_hat,
                       "D_prime": self.D_prime, "D_upper": self.D_upper},
            "excised": self.excised,
            "phase_resolved": self.phase_resolved,
        }


def d_prime(phi: LogCocycle, eta: float) -> float:
    cmax = max(max(abs(c) for c in phi.C_plus), max(abs(c) for c in phi.C_minus))
    return 4 * phi.d * cmax / eta


def run_criterion(T: Iet, phi: LogCocycle, state: InductionState, Xi: RigiditySet,
                  ks: Sequence[int], M_hat: float, delta: float = 0.0,
                  derivative: bool = True, **kw) -> CriterionReport:
    """All criterion quantities for one good time."""
    fi = floor_integrals(T, phi, Xi, ks, **kw)
    try:
        anc = anchor_point(T, phi, state, Xi.alpha, Xi.h)
        apoint, alabel, aval = anc.point, str(anc.label), (None if anc.clipped else anc.value)
    except StructuralError:
        apoint = alabel = aval = None
    rho = dh = du = None
    if derivative:
        db = derivative_bounds_on_subfloor(T, phi, Xi, Xi.eta, delta, M_hat)
        rho, dh, du = db.rho_hat, db.D_hat, db.upper_predicted
    osc = [(k, m, p, e) for k, m, p, e in zip(fi.ks, fi.moduli, fi.phases, fi.moduli_err)]
    return CriterionReport(state.n, Xi.alpha, Xi.q_alpha, Xi.h, fi.measure, fi.tightness,
                           fi.tightness_err, osc, float(Xi.eta), float(M_hat),
                           d_prime(phi, float(Xi.eta)), rho, dh, du, apoint, alabel, aval,
                           fi.excised, fi.phase_resolved)


def oscillation_csv(reports: Sequence[CriterionReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "k", "modulus", "measure"])
    for r in reports:
        for k, m, _, _ in r.oscillation:
            w.writerow([r.n, k, repr(m), repr(r.measure)])
    return buf.getvalue()
