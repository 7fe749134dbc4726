"""Rauzy-Veech induction, suspension data and good-time detection.

Conventions
-----------
* One step compares the last letters of the two rows.  The longer one is the
  *winner*; ``kind`` is ``"top"`` when the top letter wins.  The winner's
  length drops by the loser's, and the loser is moved in the losing row to
  sit right after the winner.
* The elementary matrix satisfies ``lambda_old = E @ lambda_new`` with
  ``E = I + e_{winner, loser}``.  The cumulative matrix is ``A^n = E_1 ... E_n``,
  so ``lambda = A^n @ lambda^n`` and return times are its column sums,
  ``q^n = (A^n)^T 1``.
* A suspension datum ``tau`` transforms with the same matrix as ``lambda``
  (``tau = E @ tau_new``); heights ``h = -Omega tau`` then transform by
  ``h_new = E^T h``, which keeps the area ``<lambda, h>`` fixed.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import (
    BudgetExceeded,
    DegenerateStep,
    InvalidArgument,
    InvalidSuspension,
    StructuralError,
)
from .iet import Iet, Permutation, discontinuities, omega_apply
from .numeric import default_eps, unit_roundoff


class RVStep(NamedTuple):
    perm: Permutation
    lengths: tuple
    kind: str
    winner: int
    loser: int
    matrix: np.ndarray


def _move_after(row, letter, anchor):
    row = [a for a in row if a != letter]
    row.insert(row.index(anchor) + 1, letter)
    return tuple(row)


def _step_combinatorics(perm: Permutation, lengths, eps):
    at = perm.top[-1]
    ab = perm.bottom[-1]
    diff = lengths[at] - lengths[ab]
    if abs(diff) <= eps:
        raise DegenerateStep(
            f"last lengths {lengths[at]!r} and {lengths[ab]!r} coincide (Keane violation)"
        )
    if diff > 0:
        kind, winner, loser = "top", at, ab
        new_perm = Permutation(perm.top, _move_after(perm.bottom, ab, at))
    else:
        kind, winner, loser = "bottom", ab, at
        new_perm = Permutation(_move_after(perm.top, at, ab), perm.bottom)
    return kind, winner, loser, new_perm


def elementary_matrix(d, winner, loser):
    E = np.eye(d, dtype=np.int64)
    E[winner, loser] += 1
    return E


def rv_step(perm: Permutation, lengths, eps=0.0) -> RVStep:
    """One Rauzy-Veech step on ``(perm, lengths)``."""
    kind, winner, loser, new_perm = _step_combinatorics(perm, lengths, eps)
    new = list(lengths)
    new[winner] = lengths[winner] - lengths[loser]
    return RVStep(new_perm, tuple(new), kind, winner, loser,
                  elementary_matrix(perm.d, winner, loser))


# ---------------------------------------------------------------------------
# suspension data
# ---------------------------------------------------------------------------

def in_theta(perm: Permutation, tau) -> bool:
    """Proper top partial sums of ``tau`` positive, bottom ones negative."""
    acc = 0
    for a in perm.top[:-1]:
        acc = acc + tau[a]
        if not acc > 0:
            return False
    acc = 0
    for a in perm.bottom[:-1]:
        acc = acc + tau[a]
        if not acc < 0:
            return False
    return True


def heights(perm: Permutation, tau) -> tuple:
    """Rectangle heights ``h = -Omega_pi tau`` (strictly positive)."""
    if len(tau) != perm.d:
        raise InvalidArgument("tau does not match the alphabet size")
    h = tuple(-v for v in omega_apply(perm, tuple(tau)))
    if any(not v > 0 for v in h):
        raise InvalidSuspension(f"heights {h} are not all positive")
    return h


def area(perm: Permutation, lengths, tau):
    h = heights(perm, tau)
    return math.fsum(float(l) * float(v) for l, v in zip(lengths, h))


def height_ratio(perm: Permutation, tau) -> float:
    h = heights(perm, tau)
    return float(max(h)) / float(min(h))


def suspension_condition_c(perm: Permutation, tau) -> bool:
    """For interior ranks ``i``: ``h_{pi0^-1(i)} / 2 < sum_{j<i} tau_{pi0^-1(j)}``."""
    h = heights(perm, tau)
    acc = 0
    for i, a in enumerate(perm.top[:-1]):
        if i >= 1 and not (h[a] / 2 < acc):
            return False
        acc = acc + tau[a]
    return True


def forward_centers_condition(perm: Permutation, tau) -> bool:
    """Sign condition under which all center shifts are forward:

    ``sum tau > 0 > sum tau - tau_{pi1^-1(d)} / 2``.
    """
    s = sum(tau)
    return s > 0 > s - tau[perm.bottom[-1]] / 2


def extended_rv_step(perm: Permutation, lengths, tau, eps=0.0):
    """Rauzy-Veech step carrying the suspension datum along."""
    if not in_theta(perm, tau):
        raise InvalidSuspension(f"tau={tuple(tau)} is not admissible for {perm}")
    step = rv_step(perm, lengths, eps)
    new_tau = list(tau)
    new_tau[step.winner] = tau[step.winner] - tau[step.loser]
    return step.perm, step.lengths, tuple(new_tau), step


# ---------------------------------------------------------------------------
# induction states
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InductionState:
    n: int
    perm: Permutation
    lengths: tuple
    q: tuple
    A: np.ndarray = field(repr=False, compare=False)
    tau: Optional[tuple] = None
    kinds: tuple = ()

    @property
    def total(self):
        acc = self.lengths[0] - self.lengths[0]
        for v in self.lengths:
            acc = acc + v
        return acc

    def induced(self) -> Iet:
        """The first-return map ``T_n`` on ``[0, |lambda^n|)``."""
        return Iet(self.perm, self.lengths)

    def normalized(self) -> Iet:
        return self.induced().normalized()

    def normalized_tau(self):
        """Suspension datum under the normalized induction, ``|lambda^n| * tau^n``."""
        if self.tau is None:
            return None
        t = self.total
        return tuple(t * v for v in self.tau)


def initial_state(T: Iet, tau=None) -> InductionState:
    d = T.d
    return InductionState(0, T.perm, T.lengths, (1,) * d, np.eye(d, dtype=np.int64),
                          None if tau is None else tuple(tau), ())


def advance(state: InductionState, eps=0.0) -> InductionState:
    try:
        step = rv_step(state.perm, state.lengths, eps)
    except DegenerateStep as exc:
        raise DegenerateStep(str(exc), step=state.n + 1) from None
    A = state.A.copy()
    A[:, step.loser] += A[:, step.winner]
    q = list(state.q)
    q[step.loser] += q[step.winner]
    tau = None
    if state.tau is not None:
        t = list(state.tau)
        t[step.winner] = state.tau[step.winner] - state.tau[step.loser]
        tau = tuple(t)
    return InductionState(state.n + 1, step.perm, step.lengths, tuple(q), A, tau,
                          state.kinds + (step.kind,))


def induction_states(T: Iet, horizon: int, tau=None, eps=None):
    """Yield the states ``0 .. horizon`` (stops early by raising DegenerateStep)."""
    if eps is None:
        eps = default_eps(T.total)
    state = initial_state(T, tau)
    yield state
    for _ in range(horizon):
        state = advance(state, eps)
        yield state


def induce(T: Iet, n: int, tau=None, eps=None) -> InductionState:
    if n < 0:
        raise InvalidArgument("n must be >= 0")
    state = None
    for state in induction_states(T, n, tau, eps):
        pass
    return state


# ---------------------------------------------------------------------------
# brute-force first return (independent oracle)
# ---------------------------------------------------------------------------

class ReturnPiece(NamedTuple):
    left: object
    right: object
    time: int
    shift: object


@dataclass
class FirstReturn:
    """First-return map of ``T`` to ``[0, s)`` found by direct iteration."""

    s: object
    pieces: list

    @property
    def lengths(self):
        return [p.right - p.left for p in self.pieces]

    @property
    def times(self):
        return [p.time for p in self.pieces]

    def as_iet(self) -> Iet:
        """The induced map as an IET with letters numbered in top order."""
        d = len(self.pieces)
        images = sorted(range(d), key=lambda i: self.pieces[i].left + self.pieces[i].shift)
        return Iet(Permutation(tuple(range(d)), tuple(images)), tuple(self.lengths))


def first_return_bruteforce(T: Iet, s, budget: int = 10_000_000, min_length=None) -> FirstReturn:
    """Partition ``J = [0, s)`` by return time, iterating subintervals forward.

    Each live piece is pushed through ``T`` once per round, split at the
    discontinuities of ``T`` and at ``s``; pieces landing back in ``J`` are
    recorded with their return time and total translation.  Adjacent pieces
    with equal time and translation are merged.  Works exactly on Fraction
    input.  ``budget`` bounds the total number of piece-steps.  Pieces shorter
    than ``min_length`` (default: the Keane tolerance, 0 for exact input) are
    rounding slivers and are dropped.
    """
    if not (0 < s <= T.total):
        raise InvalidArgument("s must lie in (0, |lambda|]")
    if min_length is None:
        min_length = default_eps(T.total)
    cuts = T._top_cuts
    top = T.perm.top
    w = T.translation
    zero = T.total - T.total
    live = [(zero, s, 0, zero)]  # original [left, right), time, shift
    done = []
    work = 0
    while live:
        nxt = []
        for left, right, time, shift in live:
            u, v = left + shift, right + shift
            # split the current image at the discontinuities of T
            lo = u
            i = bisect_right(cuts, u)
            pieces = []
            while True:
                hi = cuts[i] if i < len(cuts) and cuts[i] < v else v
                pieces.append((lo, hi, top[i]))
                if hi == v:
                    break
                lo = hi
                i += 1
            for a, b, letter in pieces:
                if b - a <= min_length:
                    continue
                ns = shift + w[letter]
                oa, ob = a - shift, b - shift
                ia, ib = a + w[letter], b + w[letter]
                # inside J: [ia, min(ib, s)); outside: [max(ia, s), ib)
                if ia < s:
                    cut = ib if ib <= s else s
                    ocut = oa + (cut - ia)
                    if ocut - oa > min_length:
                        done.append(ReturnPiece(oa, ocut, time + 1, ns))
                    if ib > s and ob - ocut > min_length:
                        nxt.append((ocut, ob, time + 1, ns))
                else:
                    nxt.append((oa, ob, time + 1, ns))
            work += 1
        if work > budget:
            raise BudgetExceeded(f"first-return search exceeded {budget} piece-steps")
        live = nxt
    done.sort(key=lambda p: p.left)
    merged = []
    for p in done:
        if merged and merged[-1].time == p.time and merged[-1].shift == p.shift \
                and merged[-1].right == p.left:
            m = merged[-1]
            merged[-1] = ReturnPiece(m.left, p.right, m.time, m.shift)
        elif merged and merged[-1].time == p.time and abs(merged[-1].right - p.left) <= min_length \
                and abs(merged[-1].shift - p.shift) <= min_length:
            m = merged[-1]
            merged[-1] = ReturnPiece(m.left, p.right, m.time, m.shift)
        else:
            merged.append(p)
    return FirstReturn(s, merged)


# ---------------------------------------------------------------------------
# detectors
# ---------------------------------------------------------------------------

def _max_ratio(values) -> float:
    vals = [float(v) for v in values]
    return max(vals) / min(vals)


def is_balanced(state: InductionState, nu: float) -> bool:
    return _max_ratio(state.lengths) < nu and _max_ratio(state.q) < nu


def has_delta_drift(T: Iet, delta, alpha: int) -> bool:
    """Drift inequalities at letter ``alpha`` (scale invariant, so ``T`` need
    not be normalized)."""
    if not T.perm.is_symmetric():
        raise InvalidArgument("drift is defined for symmetric permutations only")
    k = T.perm.pi0(alpha)
    if k <= 1:
        raise InvalidArgument("drift needs 1 < pi0(alpha) <= d")
    if delta < 0:
        raise InvalidArgument("delta must be non-negative")
    ut, ub = discontinuities(T)
    size = T.total
    d = T.d
    return (delta * size + ut[k - 1] <= ub[k - 1]
            and delta * min(1, d - k) * size + ut[k] <= ub[k])


@dataclass
class WellPositioned:
    ok: bool
    indices: dict  # letter -> i_alpha^n (first match)
    reason: str = ""
    multiple: dict = field(default_factory=dict)  # letter -> all matches when ambiguous


def locate_discontinuity(T: Iet, start, target, steps: int, eps):
    """Indices ``0 <= i < steps`` with ``|T^i(start) - target| <= eps``."""
    hits = []
    orbit = T.orbit(start, steps)
    for i, p in enumerate(orbit):
        if abs(p - target) <= eps:
            hits.append(i)
    return hits


def well_positioned(T: Iet, state: InductionState, eps=None) -> WellPositioned:
    """Check that each interior discontinuity ``l_a`` sits at height
    ``q_a/4 < i < q_a`` of the tower over ``I^n_a``."""
    if not T.perm.is_symmetric():
        raise InvalidArgument("well-positioning is defined for symmetric permutations")
    if state.perm != T.perm:
        return WellPositioned(False, {}, "perm^n differs from perm")
    u = unit_roundoff(T.total)
    if eps is None:
        eps = default_eps(T.total)
    base = state.induced()
    d = T.d
    indices = {}
    multiple = {}
    ok = True
    reason = ""
    for a in T.perm.top[1:-1]:
        q = state.q[a]
        # inexact orbits drift by about one ulp per step
        tol = eps + 2 * u * q * T.total if u else eps
        hits = locate_discontinuity(T, base.lefts[a], T.lefts[a], q, tol)
        if not hits:
            raise StructuralError(
                f"l_{a} not found in the forward orbit of l^n_{a} within q={q} steps",
                {"n": state.n, "letter": a, "q": q},
            )
        if len(hits) > 1:
            multiple[a] = hits
        i = hits[0]
        indices[a] = i
        if not (q / 4 < i < q):
            ok = False
            reason = reason or f"letter {a}: i={i} outside (q/4, q) with q={q}"
    if multiple:
        reason = (reason + "; " if reason else "") + "ambiguous matches (eps artifact?)"
    return WellPositioned(ok, indices, reason, multiple)


@dataclass
class GoodTimeReport:
    n: int
    balanced: bool
    nu: float
    well_positioned: bool
    i_alpha: dict
    drift: dict  # letter -> bool (letters with pi0 > 1), empty if perm^n != perm
    delta: float
    lambda_n: tuple
    q_n: tuple
    perm_is_initial: bool
    condition_c: Optional[bool] = None
    forward_centers: Optional[bool] = None
    cancellation_M: Optional[float] = None
    note: str = ""

    def good_for(self, letter: int) -> bool:
        # step 0 is no renormalization at all
        return self.n >= 1 and self.balanced and self.well_positioned and bool(self.drift.get(letter, False))

    def good_letters(self):
        return [a for a in sorted(self.drift) if self.good_for(a)]

    def to_record(self) -> dict:
        return {
            "n": self.n,
            "balanced": self.balanced,
            "nu": self.nu,
            "well_positioned": self.well_positioned,
            "i_alpha": {str(k): v for k, v in sorted(self.i_alpha.items())},
            "drift": {"delta": self.delta,
                      "letters": [a for a, ok in sorted(self.drift.items()) if ok]},
            "lambda_n": [float(v) for v in self.lambda_n],
            "q_n": list(self.q_n),
            "perm_is_initial": self.perm_is_initial,
            "condition_c": self.condition_c,
            "forward_centers": self.forward_centers,
            "cancellation_M": self.cancellation_M,
            "note": self.note,
        }


@dataclass
class ScanResult:
    records: list  # GoodTimeReport per step 0..last
    degenerate_at: Optional[int] = None
    horizon: int = 0
    capped_at: Optional[int] = None  # first step whose return times exceeded q_cap

    @property
    def partial(self) -> bool:
        return self.degenerate_at is not None

    def good_times(self, letter: Optional[int] = None) -> list:
        if letter is None:
            return [r for r in self.records if r.good_letters()]
        return [r for r in self.records if r.good_for(letter)]


def check_scan_preconditions(T: Iet, tau, nu, delta):
    if not T.perm.is_symmetric():
        raise InvalidArgument("scan needs a symmetric permutation")
    if not nu > 1:
        raise InvalidArgument("nu must exceed 1")
    if not (0 < delta < 1 / (10 * T.d)):
        raise InvalidArgument(f"delta must lie in (0, 1/(10d)) = (0, {1 / (10 * T.d)})")
    if tau is not None:
        if not in_theta(T.perm, tau):
            raise InvalidSuspension("tau is not admissible")
        if not height_ratio(T.perm, tau) < 3:
            raise InvalidSuspension("tau violates the seed condition max h_a/h_b < 3")


def scan_good_times(T: Iet, tau, nu: float, delta: float, horizon: int,
                    letter: Optional[int] = None, eps=None,
                    q_cap: Optional[int] = None) -> ScanResult:
    """Run the balance / well-positioning / drift detectors on steps ``0..horizon``.

    ``letter`` restricts the drift test to one target letter; by default all
    letters with ``pi0 > 1`` are tested.  A degenerate step ends the scan
    early and is reported via ``degenerate_at``; with ``q_cap`` the scan also
    stops at the first step whose largest return time exceeds the cap.
    """
    check_scan_preconditions(T, tau, nu, delta)
    if letter is not None and T.perm.pi0(letter) <= 1:
        raise InvalidArgument("target letter must have pi0 > 1")
    letters = [letter] if letter is not None else list(T.perm.top[1:])
    records = []
    degenerate_at = capped_at = None
    try:
        for state in induction_states(T, horizon, tau, eps):
            if q_cap is not None and max(state.q) > q_cap:
                capped_at = state.n
                break
            records.append(_detect(T, state, nu, delta, letters, eps))
    except DegenerateStep as exc:
        degenerate_at = exc.step
    return ScanResult(records, degenerate_at, horizon, capped_at)


def _detect(T, state, nu, delta, letters, eps):
    balanced = is_balanced(state, nu)
    same = state.perm == T.perm
    drift = {}
    wp = WellPositioned(False, {}, "perm^n differs from perm")
    cond_c = fwd = None
    if same:
        induced = state.induced()
        drift = {a: has_delta_drift(induced, delta, a) for a in letters}
        wp = well_positioned(T, state, eps)
        if state.tau is not None:
            cond_c = suspension_condition_c(state.perm, state.tau)
            fwd = forward_centers_condition(state.perm, state.tau)
    return GoodTimeReport(
        n=state.n, balanced=balanced, nu=nu, well_positioned=wp.ok, i_alpha=wp.indices,
        drift=drift, delta=delta, lambda_n=state.lengths, q_n=state.q,
        perm_is_initial=same, condition_c=cond_c, forward_centers=fwd, note=wp.reason,
    )
