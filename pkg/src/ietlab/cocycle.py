"""Cocycles with logarithmic singularities over an IET.

A cocycle is stored through its singularity strengths ``C_plus``/``C_minus``
and a smooth part ``g``.  Two equivalent representations are supported:

``"global"``
    ``phi(x) = g(x) + sum_b C+_b log(|I| {(x - l_b)/|I|}) + C-_b log(|I| {(r_b - x)/|I|})``
    with ``{.}`` the fractional part.  For ``x`` in ``I_a`` only the two
    terms of letter ``a`` are singular; the others are smooth there.
``"local"``
    ``phi(x) = g_a(x) + C+_a log(x - l_a) + C-_a log(r_a - x)`` on ``I_a``.
    The two forms differ by a function that is smooth on every ``I_a``, so
    the classification (symmetric / non-trivial) is the same; the local form
    is used for odd cocycles, where it makes ``phi(midpoint) = 0`` exact.

The smooth part is given per letter either as polynomial coefficients in
``x`` (highest degree first, :func:`numpy.polyval` order) or as a callable
returning ``(g, g')`` on arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .errors import InvalidArgument, SingularEvaluation
from .iet import Iet
from .numeric import Neumaier, compensated_cumsum, decimal_string

GAMMA_MIN = 1e-30


def _poly_deriv(coeffs):
    c = np.asarray(coeffs, dtype=float)
    if c.size <= 1:
        return np.zeros(1)
    return np.polyder(c)


@dataclass(frozen=True)
class LogCocycle:
    T: Iet
    C_plus: tuple
    C_minus: tuple
    g_poly: Optional[tuple] = None  # per-letter coefficient tuples
    g_func: Optional[Callable] = field(default=None, compare=False)
    form: str = "global"
    gamma_min: float = GAMMA_MIN

    def __post_init__(self):
        d = self.T.d
        object.__setattr__(self, "C_plus", tuple(float(c) for c in self.C_plus))
        object.__setattr__(self, "C_minus", tuple(float(c) for c in self.C_minus))
        if len(self.C_plus) != d or len(self.C_minus) != d:
            raise InvalidArgument("singularity constants must have one entry per letter")
        if self.form not in ("global", "local"):
            raise InvalidArgument(f"unknown form {self.form!r}")
        if self.g_poly is not None:
            if len(self.g_poly) != d:
                raise InvalidArgument("g_poly needs one coefficient list per letter")
            object.__setattr__(self, "g_poly",
                               tuple(tuple(float(c) for c in p) for p in self.g_poly))
        lefts = np.array([float(v) for v in self.T.lefts])
        rights = np.array([float(v) for v in self.T.rights])
        object.__setattr__(self, "_l", lefts)
        object.__setattr__(self, "_r", rights)
        object.__setattr__(self, "_cp", np.array(self.C_plus))
        object.__setattr__(self, "_cm", np.array(self.C_minus))
        object.__setattr__(self, "_cuts", np.array([float(c) for c in self.T._top_cuts]))
        object.__setattr__(self, "_top", np.array(self.T.perm.top))
        object.__setattr__(self, "_size", float(self.T.total))
        if self.g_poly is not None:
            object.__setattr__(self, "_gd", tuple(_poly_deriv(p) for p in self.g_poly))

    # -- classification -------------------------------------------------
    @property
    def d(self) -> int:
        return self.T.d

    def sum_plus(self) -> float:
        return math.fsum(self.C_plus)

    def sum_minus(self) -> float:
        return math.fsum(self.C_minus)

    def is_symmetric(self, tol: float = 0.0) -> bool:
        """Equal sums of the ``C-`` and ``C+`` constants."""
        return abs(self.sum_minus() - self.sum_plus()) <= tol

    def end_sum(self) -> float:
        """``C+`` of the first plus the last letter (top order)."""
        top = self.T.perm.top
        return self.C_plus[top[0]] + self.C_plus[top[-1]]

    def is_nontrivial(self) -> bool:
        top = self.T.perm.top
        return self.end_sum() != 0 or any(self.C_plus[a] != 0 for a in top[1:-1])

    def has_singularities(self) -> bool:
        return any(self.C_plus) or any(self.C_minus)

    # -- vectorized evaluation -------------------------------------------
    def letters_of(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        return self._top[np.searchsorted(self._cuts, xs, side="right")]

    def _smooth(self, xs, letters, deriv=False):
        if self.g_func is not None:
            g, gp = self.g_func(xs, letters)
            return np.asarray(gp if deriv else g, dtype=float)
        out = np.zeros_like(xs)
        if self.g_poly is None:
            return out
        polys = self._gd if deriv else self.g_poly
        for a in range(self.d):
            m = letters == a
            if m.any():
                out[m] = np.polyval(polys[a], xs[m])
        return out

    def _distances(self, xs, letters):
        zp = xs - self._l[letters]
        zm = self._r[letters] - xs
        return zp, zm

    def singular_mask(self, xs, letters=None) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        if letters is None:
            letters = self.letters_of(xs)
        zp, zm = self._distances(xs, letters)
        cp, cm = self._cp[letters], self._cm[letters]
        return ((zp < self.gamma_min) & (cp != 0)) | ((zm < self.gamma_min) & (cm != 0))

    def eval_array(self, xs, letters=None, check: bool = False) -> np.ndarray:
        """``phi`` on an array; points within ``gamma_min`` of a singularity
        give ``nan`` (or raise when ``check``)."""
        xs = np.asarray(xs, dtype=float)
        if letters is None:
            letters = self.letters_of(xs)
        zp, zm = self._distances(xs, letters)
        cp, cm = self._cp[letters], self._cm[letters]
        bad = ((zp < self.gamma_min) & (cp != 0)) | ((zm < self.gamma_min) & (cm != 0))
        if check and bad.any():
            self._raise_singular(xs, letters, bad, zp)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = self._smooth(xs, letters)
            val = val + np.where(cp != 0, cp * np.log(np.maximum(zp, self.gamma_min)), 0.0)
            val = val + np.where(cm != 0, cm * np.log(np.maximum(zm, self.gamma_min)), 0.0)
            if self.form == "global":
                val = val + self._cross_terms(xs, letters)
            else:
                # odd letters in the central half: c log((L/2+u)/(L/2-u)) = 2c atanh(2u/L),
                # exactly zero at the midpoint and exactly antisymmetric in u
                lam = self._r[letters] - self._l[letters]
                u = xs - (self._l[letters] + self._r[letters]) / 2
                central = (cp == -cm) & (cp != 0) & (np.abs(u) <= lam / 4)
                if central.any():
                    g = self._smooth(xs[central], letters[central])
                    val[central] = g + 2 * cp[central] * np.arctanh(2 * u[central] / lam[central])
        val = np.where(bad, np.nan, val)
        return val

    def _cross_terms(self, xs, letters):
        """Wrapped-log terms of the letters other than the one containing x."""
        size = self._size
        out = np.zeros_like(xs)
        for b in range(self.d):
            other = letters != b
            if not other.any():
                continue
            x = xs[other]
            if self._cp[b] != 0:
                u = np.mod((x - self._l[b]) / size, 1.0)
                out[other] += self._cp[b] * np.log(size * u)
            if self._cm[b] != 0:
                u = np.mod((self._r[b] - x) / size, 1.0)
                out[other] += self._cm[b] * np.log(size * u)
        return out

    def _cross_derivative(self, xs, letters):
        size = self._size
        out = np.zeros_like(xs)
        for b in range(self.d):
            other = letters != b
            if not other.any():
                continue
            x = xs[other]
            if self._cp[b] != 0:
                u = np.mod((x - self._l[b]) / size, 1.0)
                out[other] += self._cp[b] / (size * u)
            if self._cm[b] != 0:
                u = np.mod((self._r[b] - x) / size, 1.0)
                out[other] -= self._cm[b] / (size * u)
        return out

    def derivative_array(self, xs, letters=None, check: bool = False) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        if letters is None:
            letters = self.letters_of(xs)
        zp, zm = self._distances(xs, letters)
        cp, cm = self._cp[letters], self._cm[letters]
        bad = ((zp < self.gamma_min) & (cp != 0)) | ((zm < self.gamma_min) & (cm != 0))
        if check and bad.any():
            self._raise_singular(xs, letters, bad, zp)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = self._smooth(xs, letters, deriv=True)
            val = val + np.where(cp != 0, cp / np.maximum(zp, self.gamma_min), 0.0)
            val = val - np.where(cm != 0, cm / np.maximum(zm, self.gamma_min), 0.0)
            if self.form == "global":
                val = val + self._cross_derivative(xs, letters)
        return np.where(bad, np.nan, val)

    def _raise_singular(self, xs, letters, bad, zp):
        k = int(np.flatnonzero(bad)[0])
        side = "left" if zp[k] < self.gamma_min else "right"
        raise SingularEvaluation(
            f"phi evaluated within {self.gamma_min} of the {side} end of letter {letters[k]}",
            letter=int(letters[k]), side=side, point=float(xs[k]),
        )

    def eval(self, x) -> float:
        x = float(x)
        if not (0 <= x < self._size):
            from .errors import DomainError
            raise DomainError(f"x={x!r} outside [0, {self._size!r})")
        return float(self.eval_array(np.array([x]), check=True)[0])

    __call__ = eval

    def eval_derivative(self, x) -> float:
        x = float(x)
        if not (0 <= x < self._size):
            from .errors import DomainError
            raise DomainError(f"x={x!r} outside [0, {self._size!r})")
        return float(self.derivative_array(np.array([x]), check=True)[0])

    # -- serialization --------------------------------------------------
    def to_descriptor(self) -> dict:
        if self.g_func is not None:
            raise InvalidArgument("callable smooth parts cannot be serialized")
        g = self.g_poly if self.g_poly is not None else tuple((0.0,) for _ in range(self.d))
        return {
            "C_plus": [decimal_string(c) for c in self.C_plus],
            "C_minus": [decimal_string(c) for c in self.C_minus],
            "g_poly": [[decimal_string(c) for c in p] for p in g],
            "form": self.form,
        }

    @classmethod
    def from_descriptor(cls, T: Iet, desc: dict) -> "LogCocycle":
        g = desc.get("g_poly")
        return cls(T, tuple(float(c) for c in desc["C_plus"]),
                   tuple(float(c) for c in desc["C_minus"]),
                   None if g is None else tuple(tuple(float(c) for c in p) for p in g),
                   form=desc.get("form", "global"))


def make_log_cocycle(T: Iet, C_plus, C_minus, g=None, form: str = "global") -> LogCocycle:
    """Cocycle with the given singularity strengths.

    ``g`` is ``None`` (zero), a per-letter list of polynomial coefficients, or
    a callable ``g(xs, letters) -> (values, derivatives)``.
    """
    if g is None or callable(g):
        return LogCocycle(T, tuple(C_plus), tuple(C_minus), None, g, form)
    return LogCocycle(T, tuple(C_plus), tuple(C_minus), tuple(tuple(p) for p in g), None, form)


def make_odd_cocycle(T: Iet, c) -> LogCocycle:
    """``phi = c_a (log(x - l_a) - log(r_a - x))`` on each ``I_a``.

    In the singularity notation this is ``C+ = c`` and ``C- = -c``.
    """
    c = tuple(float(v) for v in c)
    if len(c) != T.d:
        raise InvalidArgument("need one strength per letter")
    return LogCocycle(T, c, tuple(-v for v in c), None, None, "local")


def make_asymmetric_cocycle(T: Iet, c, center: bool = True) -> LogCocycle:
    """``phi = c_a log(x - l_a) + const`` on ``I_a`` (no right singularities).

    With ``center`` the constant makes ``int phi = 0``.
    """
    c = tuple(float(v) for v in c)
    const = 0.0
    if center:
        total = 0.0
        for a in range(T.d):
            lam = float(T.lengths[a])
            total += c[a] * lam * (math.log(lam) - 1.0)
        const = -total / float(T.total)
    g = tuple((const,) for _ in range(T.d))
    return LogCocycle(T, c, (0.0,) * T.d, g, None, "local")


# ---------------------------------------------------------------------------
# oddness
# ---------------------------------------------------------------------------

class OddVerdict(NamedTuple):
    ok: bool
    interval_residual: float
    global_residual: float
    interval_ok: bool
    global_ok: bool
    witness: Optional[float]  # a point with a large residual, if any
    consistent: bool  # both checks agree


def quasi_random(n: int, offset: float = 0.5) -> np.ndarray:
    """Additive-recurrence (golden ratio) low-discrepancy points in [0, 1)."""
    g = (math.sqrt(5) - 1) / 2
    return np.mod(offset + g * np.arange(1, n + 1), 1.0)


def is_odd(phi: LogCocycle, T: Optional[Iet] = None, sample_count: int = 1000,
           tol: float = 1e-9, guard: float = 1e-6) -> OddVerdict:
    """Per-interval oddness and ``phi(T^-1 y) = -phi(|I| - y)``, sampled."""
    T = phi.T if T is None else T
    if not T.perm.is_symmetric():
        raise InvalidArgument("oddness test needs a symmetric permutation")
    size = float(T.total)
    u = quasi_random(sample_count)
    # per interval: x and its reflection about the interval midpoint
    xs = u * size
    letters = phi.letters_of(xs)
    l, r = phi._l[letters], phi._r[letters]
    keep = (xs - l > guard * size) & (r - xs > guard * size)
    xs, letters = xs[keep], letters[keep]
    refl = phi._l[letters] + phi._r[letters] - xs
    a = phi.eval_array(xs, letters)
    b = phi.eval_array(refl, letters)
    res1 = np.abs(a + b)
    scale1 = np.maximum(1.0, np.abs(a))
    r1 = float(np.max(res1 / scale1)) if res1.size else 0.0
    # global identity
    ys = u * size
    pre = np.array([float(T.evaluate_inverse(y)) for y in ys])
    mirror = size - ys
    lp, lm = phi.letters_of(pre), phi.letters_of(mirror)
    near = lambda x, lt: (x - phi._l[lt] > guard * size) & (phi._r[lt] - x > guard * size)
    keep2 = near(pre, lp) & near(mirror, lm)
    a2 = phi.eval_array(pre[keep2], lp[keep2])
    b2 = phi.eval_array(mirror[keep2], lm[keep2])
    res2 = np.abs(a2 + b2)
    scale2 = np.maximum(1.0, np.abs(a2))
    r2 = float(np.max(res2 / scale2)) if res2.size else 0.0
    ok1, ok2 = r1 <= tol, r2 <= tol
    witness = None
    if not ok1 and res1.size:
        witness = float(xs[int(np.argmax(res1 / scale1))])
    elif not ok2 and res2.size:
        witness = float(ys[keep2][int(np.argmax(res2 / scale2))])
    return OddVerdict(ok1 and ok2, r1, r2, ok1, ok2, witness, ok1 == ok2)


# ---------------------------------------------------------------------------
# Birkhoff sums
# ---------------------------------------------------------------------------

@dataclass
class BirkhoffResult:
    value: float
    n: int
    closest_plus: np.ndarray  # per letter, distance of closest visit to l_a from the right
    closest_minus: np.ndarray  # per letter, distance of closest visit to r_a from the left
    min_gap: float
    clipped: bool
    clipped_step: Optional[int] = None


def _orbit_and_letters(T: Iet, x, n: int):
    pts = T.orbit_array([float(x)], n)[:, 0]
    cuts = np.array([float(c) for c in T._top_cuts])
    letters = np.array(T.perm.top)[np.searchsorted(cuts, pts, side="right")]
    return pts, letters


def closest_visits(phi: LogCocycle, pts, letters):
    d = phi.d
    zp = np.full(d, np.inf)
    zm = np.full(d, np.inf)
    if len(pts):
        dp, dm = phi._distances(pts, letters)
        np.minimum.at(zp, letters, dp)
        np.minimum.at(zm, letters, dm)
    return zp, zm


def birkhoff_sum(T: Iet, phi: LogCocycle, x, n: int) -> BirkhoffResult:
    """``S_n phi(x)`` with closest-visit tracking; compensated summation."""
    if n < 0:
        raise InvalidArgument("n must be >= 0")
    d = phi.d
    if n == 0:
        return BirkhoffResult(0.0, 0, np.full(d, np.inf), np.full(d, np.inf), math.inf, False)
    pts, letters = _orbit_and_letters(T, x, n)
    vals = phi.eval_array(pts, letters)
    zp, zm = closest_visits(phi, pts, letters)
    bad = ~np.isfinite(vals)
    if bad.any():
        k = int(np.flatnonzero(bad)[0])
        return BirkhoffResult(math.nan, n, zp, zm, float(min(zp.min(), zm.min())), True, k)
    value = math.fsum(vals.tolist())
    return BirkhoffResult(value, n, zp, zm, float(min(zp.min(), zm.min())), False)


def birkhoff_prefix(T: Iet, phi: LogCocycle, x, n: int, backward: bool = False):
    """Compensated prefix sums along an orbit.

    Forward: ``out[m] = S_m phi(x)`` for ``m = 0..n``.
    Backward: ``out[m] = sum_{j=1..m} phi(T^-j x) = S_m phi(T^-m x)``.
    Returns ``(out, clipped_mask)`` where ``clipped_mask[m]`` marks sums that
    include a point within ``gamma_min`` of a singularity.
    """
    if backward:
        pts = np.array([float(p) for p in T.backward_orbit(x, n + 1)[1:]])
    else:
        pts = T.orbit_array([float(x)], n)[:, 0]
    vals = phi.eval_array(pts)
    bad = ~np.isfinite(vals)
    clipped = np.concatenate([[False], np.cumsum(bad) > 0])
    out = compensated_cumsum(np.where(bad, 0.0, vals))
    return out, clipped


def main_term(phi: LogCocycle, zp, zm) -> float:
    """Singular part of ``S_r phi'`` at the closest visits: ``sum C+/z+ - C-/z-``."""
    total = Neumaier()
    for a in range(phi.d):
        if phi.C_plus[a] != 0 and np.isfinite(zp[a]):
            total.add(phi.C_plus[a] / zp[a])
        if phi.C_minus[a] != 0 and np.isfinite(zm[a]):
            total.add(-phi.C_minus[a] / zm[a])
    return total.value


@dataclass
class CancellationResult:
    M_hat: float
    r: int
    derivative_sum: float
    main: float
    clipped: bool


def cancellation_quality(T: Iet, phi: LogCocycle, z, r: int) -> CancellationResult:
    """``|S_r phi'(z) - main term| / r``."""
    if r < 1:
        raise InvalidArgument("r must be >= 1")
    pts, letters = _orbit_and_letters(T, z, r)
    der = phi.derivative_array(pts, letters)
    zp, zm = closest_visits(phi, pts, letters)
    if not np.all(np.isfinite(der)):
        return CancellationResult(math.nan, r, math.nan, math.nan, True)
    s = math.fsum(der.tolist())
    m = main_term(phi, zp, zm)
    return CancellationResult(abs(s - m) / r, r, s, m, False)


def cancellation_profile(T: Iet, phi: LogCocycle, starts: Sequence[float], r: int) -> float:
    """Largest ``M_hat`` over several start points and all ``1 <= r' <= r``.

    The closest visits change along the orbit, so the main term is updated
    incrementally; ``O(r)`` per start point.
    """
    worst = 0.0
    for z in starts:
        pts, letters = _orbit_and_letters(T, z, r)
        der = phi.derivative_array(pts, letters)
        if not np.all(np.isfinite(der)):
            continue
        csum = compensated_cumsum(der)[1:]
        dp, dm = phi._distances(pts, letters)
        zp = np.full(phi.d, np.inf)
        zm = np.full(phi.d, np.inf)
        main = 0.0
        cp, cm = phi._cp, phi._cm
        for i in range(r):
            a = letters[i]
            if dp[i] < zp[a]:
                if np.isfinite(zp[a]):
                    main -= cp[a] / zp[a]
                zp[a] = dp[i]
                main += cp[a] / zp[a]
            if dm[i] < zm[a]:
                if np.isfinite(zm[a]):
                    main += cm[a] / zm[a]
                zm[a] = dm[i]
                main -= cm[a] / zm[a]
            worst = max(worst, abs(csum[i] - main) / (i + 1))
    return worst
