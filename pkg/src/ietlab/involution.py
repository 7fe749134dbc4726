"""Suspension polygons, involution centers and center shifts under induction.

For a symmetric permutation the rotation by pi of the suspension polygon is
an involution whose fixed points are the midpoints ``C_a`` of the sides and
the polygon center ``C_1/2``.  Dropping them vertically onto the base gives
the interval midpoints ``c_a`` and the point ``|I|/2``.  After ``n`` induction
steps the level-``n`` midpoints flow (along their towers) onto the original
ones; :func:`locate_center_shifts` finds those orbit shifts.
"""

from __future__ import annotations

import io
import csv
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidArgument, InvalidSuspension, StructuralError
from .iet import Iet, Permutation
from .rauzy import InductionState, forward_centers_condition, in_theta


@dataclass
class SuspensionPolygon:
    perm: Permutation
    lengths: tuple
    tau: tuple
    top_chain: np.ndarray  # (d+1, 2) vertices
    bottom_chain: np.ndarray
    side_centers: np.ndarray  # (d, 2), C_a per letter
    center: np.ndarray  # C_1/2
    drops: np.ndarray  # (d, 2), v_a per letter (purely vertical)
    center_drop: np.ndarray  # v_1/2

    @property
    def closure_error(self) -> float:
        return float(np.max(np.abs(self.top_chain[-1] - self.bottom_chain[-1])))

    def base_centers(self) -> np.ndarray:
        """``C_a + v_a`` (x-coordinates are the interval midpoints)."""
        return self.side_centers + self.drops

    def svg_path(self, scale: float = 100.0) -> str:
        """Closed SVG path: top chain forward then bottom chain backward.

        The y axis is flipped so that positive ``tau`` points up on screen.
        """
        pts = list(self.top_chain) + list(self.bottom_chain[::-1][1:-1])
        parts = []
        for i, (x, y) in enumerate(pts):
            parts.append(f"{'M' if i == 0 else 'L'} {x * scale:.6g} {-y * scale:.6g}")
        return " ".join(parts) + " Z"

    def centers_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["label", "Cx", "Cy", "vx", "vy", "cx"])
        for a in range(len(self.lengths)):
            C, v = self.side_centers[a], self.drops[a]
            w.writerow([a, repr(float(C[0])), repr(float(C[1])), repr(float(v[0])),
                        repr(float(v[1])), repr(float(C[0] + v[0]))])
        C, v = self.center, self.center_drop
        w.writerow(["1/2", repr(float(C[0])), repr(float(C[1])), repr(float(v[0])),
                    repr(float(v[1])), repr(float(C[0] + v[0]))])
        return buf.getvalue()


def _chain(order, lengths, tau):
    pts = [(0.0, 0.0)]
    x = y = 0.0
    for a in order:
        x += float(lengths[a])
        y += float(tau[a])
        pts.append((x, y))
    return np.array(pts)


def build_polygon(perm: Permutation, lengths, tau) -> SuspensionPolygon:
    if not in_theta(perm, tau):
        raise InvalidSuspension(f"tau={tuple(tau)} is not admissible for {perm}")
    d = perm.d
    top = _chain(perm.top, lengths, tau)
    bottom = _chain(perm.bottom, lengths, tau)
    C = np.zeros((d, 2))
    v = np.zeros((d, 2))
    for i, a in enumerate(perm.top):
        C[a] = top[i] + 0.5 * np.array([float(lengths[a]), float(tau[a])])
        v[a] = (0.0, -(0.5 * float(tau[a]) + top[i][1]))
    Chalf = 0.5 * top[-1]
    vhalf = np.array([0.0, -0.5 * top[-1][1]])
    return SuspensionPolygon(perm, tuple(lengths), tuple(tau), top, bottom, C, Chalf, v, vhalf)


def centers(T: Iet):
    """Interval midpoints ``(l_a + r_a)/2`` per letter and the global midpoint."""
    return T.centers(), T.total / 2


HALF = "1/2"


@dataclass
class CenterShifts:
    n: int
    shifts: dict  # source (letter or "1/2") -> shift l (int)
    targets: dict  # source -> target (letter or "1/2")
    directions: dict  # source -> "forward" | "backward"
    bounds: dict  # source -> (low, high) allowed range
    bounds_ok: bool
    set_equality: bool
    forward_condition: Optional[bool]  # sign condition on tau^n, None if no tau
    nonnegative_ok: Optional[bool]  # all shifts >= 0 when forward_condition holds
    double_matches: list = field(default_factory=list)
    max_q_ok: bool = True  # |l| <= max_b q_b for every source

    def to_dict(self) -> dict:
        key = lambda s: str(s)
        return {
            "n": self.n,
            "shifts": {key(k): v for k, v in self.shifts.items()},
            "targets": {key(k): str(v) for k, v in self.targets.items()},
            "directions": {key(k): v for k, v in self.directions.items()},
            "bounds_ok": self.bounds_ok,
            "set_equality": self.set_equality,
            "forward_condition": self.forward_condition,
            "nonnegative_ok": self.nonnegative_ok,
            "double_matches": [str(s) for s in self.double_matches],
            "max_q_ok": self.max_q_ok,
        }


def _match(point, targets, tol):
    hits = [lab for lab, t in targets if abs(point - t) <= tol]
    return hits


def locate_center_shifts(T: Iet, state: InductionState, tau=None, tol=None) -> CenterShifts:
    """Find ``l`` with ``T^l(c^n_a)`` (and ``T^l(|I^n|/2)``) equal to an original center.

    Forward search first, then backward, each within the return-time bounds
    ``-q_b <= l <= q_a``, where ``a`` is the letter of the induced interval
    containing the start point ``c`` and ``b`` the letter containing
    ``T_n(c)``.  Only meaningful when the level-n permutation is symmetric.
    """
    if not T.perm.is_symmetric():
        raise InvalidArgument("center shifts need a symmetric permutation")
    if not state.perm.is_symmetric():
        raise InvalidArgument(
            f"level-{state.n} permutation {state.perm} is not symmetric; the rotation "
            "of its polygon is not an involution of the surface")
    size = float(T.total)
    if tol is None:
        tol = 1e-10 * size
    mids, half = centers(T)
    targets = [(a, float(mids[a])) for a in range(T.d)] + [(HALF, float(half))]
    base = state.induced()
    perm_n = state.perm
    sources = []
    for a in range(T.d):
        c = (base.lefts[a] + base.rights[a]) / 2
        sources.append((a, c, state.q[a], state.q[_image_letter(base, c)]))
    hpt = base.total / 2
    sources.append((HALF, hpt, state.q[base.letter_at(hpt)], state.q[_image_letter(base, hpt)]))

    shifts, tmap, dirs, bnds = {}, {}, {}, {}
    doubles = []
    for label, c, fwd, bwd in sources:
        found = None
        orbit = T.orbit_array([float(c)], fwd + 1)[:, 0]
        for i, p in enumerate(orbit):
            hits = _match(p, targets, tol)
            if hits:
                if len(hits) > 1:
                    doubles.append(label)
                found = (i, hits[0], "forward")
                break
        if found is None:
            found = _backward_search(T, c, bwd, targets, tol, doubles, label)
        if found is None:
            # outside the nominal window: widen to the full level-n return scale
            wide = int(sum(state.q))
            orbit = T.orbit_array([float(c)], fwd + wide + 1)[:, 0]
            for i in range(fwd + 1, len(orbit)):
                hits = _match(orbit[i], targets, tol)
                if hits:
                    found = (i, hits[0], "forward")
                    break
            back = _backward_search(T, c, bwd + wide, targets, tol, doubles, label)
            if back is not None and (found is None or -back[0] < found[0]):
                found = back
        if found is None:
            raise StructuralError(
                f"no center matched from level-{state.n} point {label}",
                {"n": state.n, "source": str(label), "start": float(c),
                 "forward_orbit_head": [float(v) for v in orbit[:20]]},
            )
        shifts[label], tmap[label], dirs[label] = found[0], found[1], found[2]
        bnds[label] = (-bwd, fwd)
    bounds_ok = all(lo <= shifts[k] <= hi for k, (lo, hi) in bnds.items())
    matched = sorted(str(v) for v in tmap.values())
    expected = sorted(str(lab) for lab, _ in targets)
    set_eq = matched == expected
    fwd_cond = None
    nonneg = None
    if tau is not None or state.tau is not None:
        t = state.tau if state.tau is not None else tau
        fwd_cond = forward_centers_condition(perm_n, t)
        if fwd_cond:
            nonneg = all(v >= 0 for v in shifts.values())
    max_q_ok = all(abs(v) <= max(state.q) for v in shifts.values())
    return CenterShifts(state.n, shifts, tmap, dirs, bnds, bounds_ok, set_eq, fwd_cond,
                        nonneg, doubles, max_q_ok)


def _backward_search(T, c, steps, targets, tol, doubles, label):
    y = float(c)
    for j in range(1, steps + 1):
        y = float(T.evaluate_inverse(y))
        hits = _match(y, targets, tol)
        if hits:
            if len(hits) > 1:
                doubles.append(label)
            return (-j, hits[0], "backward")
    return None


def _image_letter(base: Iet, x):
    """Letter ``b`` with ``T_n(x)`` in ``I^n_b``."""
    return base.letter_at(base.evaluate(x))


def center_in_tower(shifts: CenterShifts, alpha) -> list:
    """Original centers reached from the level-n center of ``alpha`` (or the
    half point when it lies over ``alpha``) with a non-negative shift."""
    out = []
    for src, tgt in shifts.targets.items():
        if src == alpha and shifts.shifts[src] >= 0:
            out.append((tgt, shifts.shifts[src]))
    return out
