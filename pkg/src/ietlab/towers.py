"""Rigidity towers over Rauzy-Veech inducing intervals.

At an induction time ``n`` and a letter ``a`` with ``pi0(a) > 1`` the base is

    F = [l^n_a + eta |I^n_a|,  r^n_a - |I^n_a| / 4]

and the rigidity set is the union of the floors ``T^i F`` for
``i = 0 .. ceil(q^n_a / 4)``, with rigidity time ``h = q^n_a + q^n_abar``.
Floors are stored as ``(offset, length)``; all measures are computed from
endpoint arithmetic on finite unions of intervals, so with Fraction input
everything here is exact.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidArgument, StructuralError
from .iet import Iet
from .numeric import default_eps
from .rauzy import InductionState, locate_discontinuity


# ---------------------------------------------------------------------------
# finite unions of intervals
# ---------------------------------------------------------------------------

def normalize_union(intervals):
    """Sort and merge ``[(lo, hi), ...]`` into disjoint, increasing intervals."""
    out = []
    for lo, hi in sorted(intervals):
        if hi <= lo:
            continue
        if out and lo <= out[-1][1]:
            if hi > out[-1][1]:
                out[-1] = (out[-1][0], hi)
        else:
            out.append((lo, hi))
    return out


def union_measure(intervals):
    return sum((hi - lo for lo, hi in normalize_union(intervals)), 0)


def intersection_measure(A, B):
    """Measure of the intersection of two finite unions of intervals."""
    A, B = normalize_union(A), normalize_union(B)
    i = j = 0
    total = 0
    while i < len(A) and j < len(B):
        lo = max(A[i][0], B[j][0])
        hi = min(A[i][1], B[j][1])
        if hi > lo:
            total = total + (hi - lo)
        if A[i][1] < B[j][1]:
            i += 1
        else:
            j += 1
    return total


def symmetric_difference_measure(A, B):
    return union_measure(A) + union_measure(B) - 2 * intersection_measure(A, B)


def pairwise_disjoint(intervals) -> bool:
    """True iff the closed-open intervals ``[lo, hi)`` never overlap."""
    s = sorted(intervals)
    return all(s[k][1] <= s[k + 1][0] for k in range(len(s) - 1))


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

def build_F(state: InductionState, alpha: int, eta):
    """Base interval ``[a, b]`` inside ``I^n_alpha``."""
    if not (0 < eta < 0.25):
        raise InvalidArgument("eta must lie in (0, 1/4)")
    if state.perm.pi0(alpha) <= 1:
        raise InvalidArgument("the base letter needs pi0 > 1")
    base = state.induced()
    lam = state.lengths[alpha]
    return base.lefts[alpha] + eta * lam, base.rights[alpha] - lam / 4


@dataclass
class RigiditySet:
    n: int
    alpha: int
    eta: float
    base: tuple  # (a, b)
    floors: list  # [(offset, length)] for i = 0 .. ceil(q/4)
    h: int
    q_alpha: int
    q_bar: int
    lambda_alpha: object  # |I^n_alpha|
    lambda_total: object  # |lambda^n|
    total: object  # |lambda|
    alpha_bar: int = -1

    @property
    def length(self):
        return self.base[1] - self.base[0]

    @property
    def measure(self):
        return self.length * len(self.floors)

    def intervals(self):
        return [(o, o + ln) for o, ln in self.floors]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "alpha": self.alpha,
            "eta": float(self.eta),
            "h": self.h,
            "q_alpha": self.q_alpha,
            "q_bar": self.q_bar,
            "base": [float(self.base[0]), float(self.base[1])],
            "floors": [{"offset": float(o), "length": float(ln)} for o, ln in self.floors],
        }


def _cuts(T: Iet):
    return T._top_cuts


def _inside_one_interval(cuts, lo, hi) -> bool:
    """No discontinuity strictly inside ``(lo, hi)``."""
    return bisect_right(cuts, lo) == bisect_left(cuts, hi)


def build_Xi(T: Iet, state: InductionState, alpha: int, eta) -> RigiditySet:
    """Rigidity set over ``F^n_alpha``; every floor is checked to lie in one
    continuity interval of ``T``."""
    a, b = build_F(state, alpha, eta)
    q = state.q[alpha]
    abar = state.perm.bar(alpha)
    count = math.ceil(q / 4) + 1
    cuts = _cuts(T)
    w = T.translation
    top = T.perm.top
    length = b - a
    floors = []
    lo = a
    for i in range(count):
        hi = lo + length
        if not (0 <= lo and hi <= T.total) or not _inside_one_interval(cuts, lo, hi):
            raise StructuralError(
                f"floor {i} of the tower over letter {alpha} crosses a discontinuity",
                {"n": state.n, "floor": i, "interval": (float(lo), float(hi))},
            )
        floors.append((lo, length))
        lo = lo + w[top[bisect_right(cuts, lo)]]
    return RigiditySet(state.n, alpha, eta, (a, b), floors, q + state.q[abar], q,
                       state.q[abar], state.lengths[alpha], state.total, T.total, abar)


# ---------------------------------------------------------------------------
# audit
# ---------------------------------------------------------------------------

@dataclass
class RigidityReport:
    n: int
    alpha: int
    eta: float
    delta: float
    h: int
    measure: float
    base_ratio: float  # |F| / |I^n_alpha|
    floors_disjoint: bool
    orbit_disjoint: bool  # T^i F, i < h, pairwise disjoint
    length_bound: bool  # |F| <= |lambda| / h
    floors_in_continuity: bool
    sym_diff: float
    sup_disp: float
    min_gap: float  # over non-exceptional pairs
    gap_threshold: float  # delta |lambda^n|
    exceptional_pairs: list  # expected pairs [(i, beta)]
    exceptional_gaps: list  # measured gaps at the expected pairs
    exceptional_target: float  # eta |I^n_alpha|
    small_pairs: list  # all pairs with gap < threshold
    structure_ok: bool  # every small pair is an expected exceptional pair
    exceptional_ok: bool  # exceptional gaps equal the target (1e-10 relative)
    gaps_ok: bool
    alternation_ok: bool = True  # T_n^j F in I^n_alpha (j even) / I^n_abar (j odd), j <= 5
    min_gap_table: list = field(default_factory=list)  # sparse [(i, beta, gap)]
    lambda_total: float = 0.0
    inducing_length: float = 0.0

    @property
    def claims_ok(self) -> bool:
        """Floor disjointness, base ratio, length bound and both gap claims."""
        return (self.floors_disjoint and self.base_ratio > 0.5 and self.length_bound
                and self.gaps_ok and self.exceptional_ok)

    @property
    def all_ok(self) -> bool:
        return (self.alternation_ok and self.floors_disjoint and self.orbit_disjoint and self.base_ratio > 0.5
                and self.length_bound and self.floors_in_continuity
                and self.structure_ok and self.exceptional_ok and self.gaps_ok)

    def to_dict(self) -> dict:
        return {
            "n": self.n, "alpha": self.alpha, "eta": float(self.eta), "delta": float(self.delta),
            "h": self.h, "measure": float(self.measure), "base_ratio": float(self.base_ratio),
            "floors_disjoint": self.floors_disjoint, "orbit_disjoint": self.orbit_disjoint,
            "length_bound": self.length_bound, "floors_in_continuity": self.floors_in_continuity,
            "sym_diff": float(self.sym_diff), "sup_disp": float(self.sup_disp),
            "min_gap": float(self.min_gap), "gap_threshold": float(self.gap_threshold),
            "exceptional_pairs": [list(p) for p in self.exceptional_pairs],
            "exceptional_gaps": [float(g) for g in self.exceptional_gaps],
            "exceptional_target": float(self.exceptional_target),
            "small_pairs": [list(p) for p in self.small_pairs],
            "structure_ok": self.structure_ok, "exceptional_ok": self.exceptional_ok,
            "gaps_ok": self.gaps_ok, "alternation_ok": self.alternation_ok,
            "claims_ok": self.claims_ok, "all_ok": self.all_ok,
            "min_gap_table": [[i, b, float(g)] for i, b, g in self.min_gap_table],
        }


def expected_exceptional_pairs(T: Iet, state: InductionState, alpha: int, eps=None):
    """Pairs ``(i, beta)`` where ``T^i(a)`` is expected to sit ``eta |I^n_alpha|``
    to the right of ``l_beta``."""
    k = T.perm.pi0(alpha)
    q = state.q[alpha]
    if k == T.d:
        return [(q - 1, alpha), (q, T.perm.bar(alpha))]
    if eps is None:
        eps = default_eps(T.total)
    hits = locate_discontinuity(T, state.induced().lefts[alpha], T.lefts[alpha], q, eps)
    if not hits:
        raise StructuralError(f"l_{alpha} not found in its tower", {"n": state.n})
    return [(hits[0], alpha)]


def audit_tower(Xi: RigiditySet, T: Iet, state: InductionState, delta,
                sample_density: int = 8, sparse_factor: float = 10.0,
                eps=None) -> RigidityReport:
    """Check the disjointness, distance and rigidity claims for one tower."""
    h = Xi.h
    a = Xi.base[0]
    length = Xi.length
    floors = Xi.intervals()
    floors_disjoint = pairwise_disjoint(floors)
    cuts = _cuts(T)
    floors_in = all(_inside_one_interval(cuts, lo, hi) for lo, hi in floors)

    # orbit of a over 0..3h (exact scalar type) and the gap table
    steps = 3 * h + 1
    orbit_a = T.orbit(a, steps)
    lefts = T.lefts
    thr = delta * Xi.lambda_total
    excepted = expected_exceptional_pairs(T, state, Xi.alpha, eps)
    target = Xi.eta * Xi.lambda_alpha
    exc_gaps = [abs(orbit_a[i] - lefts[b]) for i, b in excepted]
    small = []
    table = []
    min_gap = math.inf
    sparse_thr = sparse_factor * thr
    for i, x in enumerate(orbit_a):
        for b in range(T.d):
            g = abs(x - lefts[b])
            if g < sparse_thr:
                table.append((i, b, g))
            if g < thr:
                small.append((i, b))
            if (i, b) not in excepted and g < min_gap:
                min_gap = g
    structure_ok = set(small) <= set(excepted)
    exceptional_ok = all(abs(g - target) <= 1e-10 * abs(target) for g in exc_gaps)
    gaps_ok = min_gap >= thr

    # T^i F for i < h pairwise disjoint (valid when no floor crossing occurs)
    orbit_ivals = [(x, x + length) for x in orbit_a[:h]]
    orbit_disjoint = pairwise_disjoint(orbit_ivals)

    # symmetric difference of Xi and T(Xi), from the same orbit
    image = [(x, x + length) for x in orbit_a[1:len(floors) + 1]]
    sym = symmetric_difference_measure(floors, image)

    # rigidity displacement at endpoints and interior sample points
    fa, fb = float(Xi.base[0]), float(Xi.base[1])
    samples = np.concatenate([[fa], fa + (fb - fa) * (np.arange(1, sample_density + 1)
                                                     / (sample_density + 1)),
                              [np.nextafter(fb, fa)]])
    orb = T.orbit_array(samples, len(floors) + h)
    disp = np.abs(orb[h:h + len(floors)] - orb[:len(floors)])
    sup_disp = float(disp.max())

    alternation_ok = check_alternation(Xi, state)

    return RigidityReport(
        alternation_ok=alternation_ok, n=Xi.n, alpha=Xi.alpha, eta=Xi.eta, delta=delta, h=h, measure=Xi.measure,
        base_ratio=length / Xi.lambda_alpha, floors_disjoint=floors_disjoint,
        orbit_disjoint=orbit_disjoint, length_bound=length * h <= Xi.total,
        floors_in_continuity=floors_in, sym_diff=sym, sup_disp=sup_disp,
        min_gap=min_gap, gap_threshold=thr, exceptional_pairs=excepted,
        exceptional_gaps=exc_gaps, exceptional_target=target, small_pairs=small,
        structure_ok=structure_ok, exceptional_ok=exceptional_ok, gaps_ok=gaps_ok,
        min_gap_table=table, lambda_total=float(Xi.lambda_total),
        inducing_length=float(Xi.lambda_total),
    )


def check_alternation(Xi: RigiditySet, state: InductionState, steps: int = 5) -> bool:
    """``T_n^j F`` lies in ``I^n_alpha`` for even ``j`` and in ``I^n_abar`` for odd
    ``j``, ``0 <= j <= steps``."""
    base = state.induced()
    lo, hi = Xi.base
    for j in range(steps + 1):
        want = Xi.alpha if j % 2 == 0 else Xi.alpha_bar
        if not (base.lefts[want] <= lo and hi <= base.rights[want]):
            return False
        if j < steps:
            shift = base.translation[want]
            lo, hi = lo + shift, hi + shift
    return True


def measure_lower_bound(eta, nu, d, total=1.0):
    """``(3/4 - eta) / (4 nu^2 d)`` times ``|lambda|``: floor count times base
    length at a nu-balanced time."""
    return (0.75 - eta) / (4 * nu * nu * d) * total


@dataclass
class RigidityTrend:
    verdict: str  # "pass", "fail" or "inconclusive"
    measure_ok: bool
    sym_diff_decreasing: bool
    sup_disp_decreasing: bool
    measures: list
    sym_diffs: list
    sup_disps: list
    detail: str = ""


def _decreasing_trend(values) -> bool:
    """Last value below the first and no value above the running start."""
    return values[-1] < values[0] and max(values[1:]) <= values[0]


def check_partial_rigidity(reports, measure_floor: float = 0.0,
                           min_reports: int = 3) -> RigidityTrend:
    """Trend verdict across towers at increasing good times."""
    reports = sorted(reports, key=lambda r: r.n)
    ms = [float(r.measure) for r in reports]
    sd = [float(r.sym_diff) for r in reports]
    sp = [float(r.sup_disp) for r in reports]
    if len(reports) < min_reports:
        return RigidityTrend("inconclusive", False, False, False, ms, sd, sp,
                             f"{len(reports)} report(s); need {min_reports}")
    measure_ok = min(ms) > 0 and min(ms) >= measure_floor
    sdd = _decreasing_trend(sd)
    spd = _decreasing_trend(sp)
    verdict = "pass" if (measure_ok and sdd and spd) else "fail"
    return RigidityTrend(verdict, measure_ok, sdd, spd, ms, sd, sp)
