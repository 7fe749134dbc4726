"""Interval exchange transformations on ``[0, |lambda|)``.

Letters are the integers ``0 .. d-1`` (displayed ``A, B, C, ...``).  A
:class:`Permutation` stores the two rows as tuples of letters: ``top`` lists
the letters in the order of the intervals before the exchange, ``bottom`` in
the order after it.  Ranks returned by :meth:`Permutation.pi0` and
:meth:`Permutation.pi1` are 1-based.

All operations only use ring operations and comparisons on the lengths, so
an :class:`Iet` built from :class:`fractions.Fraction` lengths is exact.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import DomainError, InvalidArgument
from .numeric import decimal_string, parse_decimal

LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"


def letter_name(a: int) -> str:
    return LETTERS[a] if a < len(LETTERS) else f"L{a}"


@dataclass(frozen=True)
class Permutation:
    top: tuple
    bottom: tuple

    def __post_init__(self):
        top, bottom = tuple(self.top), tuple(self.bottom)
        object.__setattr__(self, "top", top)
        object.__setattr__(self, "bottom", bottom)
        d = len(top)
        if d < 2:
            raise InvalidArgument("a permutation needs at least 2 letters")
        if sorted(top) != list(range(d)) or sorted(bottom) != list(range(d)):
            raise InvalidArgument(f"rows {top} / {bottom} are not bijections onto 0..{d - 1}")

    @classmethod
    def from_ranks(cls, pi0: Sequence[int], pi1: Sequence[int]) -> "Permutation":
        """Build from per-letter 1-based ranks, ``pi0[a] = pi_0(a)``."""
        d = len(pi0)
        if len(pi1) != d:
            raise InvalidArgument("pi0 and pi1 must have the same length")
        if sorted(pi0) != list(range(1, d + 1)) or sorted(pi1) != list(range(1, d + 1)):
            raise InvalidArgument("pi0 and pi1 must be bijections onto 1..d")
        top = [0] * d
        bottom = [0] * d
        for a in range(d):
            top[pi0[a] - 1] = a
            bottom[pi1[a] - 1] = a
        return cls(tuple(top), tuple(bottom))

    @property
    def d(self) -> int:
        return len(self.top)

    @cached_property
    def _ranks(self):
        r0 = [0] * self.d
        r1 = [0] * self.d
        for i, a in enumerate(self.top):
            r0[a] = i + 1
        for i, a in enumerate(self.bottom):
            r1[a] = i + 1
        return tuple(r0), tuple(r1)

    def pi0(self, a: int) -> int:
        return self._ranks[0][a]

    def pi1(self, a: int) -> int:
        return self._ranks[1][a]

    def ranks(self):
        """Per-letter ranks ``(pi0, pi1)`` as lists (descriptor order)."""
        r0, r1 = self._ranks
        return list(r0), list(r1)

    def monodromy(self) -> tuple:
        """``pi_1 o pi_0^{-1}`` as the tuple of its values on ``1..d``."""
        return tuple(self.pi1(a) for a in self.top)

    def is_irreducible(self) -> bool:
        mono = self.monodromy()
        for k in range(1, self.d):
            if max(mono[:k]) == k:
                return False
        return True

    def is_symmetric(self) -> bool:
        d = self.d
        return all(v == d - i for i, v in enumerate(self.monodromy()))

    def bar(self, a: int) -> int:
        """The letter ``pi_0^{-1}(pi_1(a))`` (mirror letter for symmetric rows)."""
        return self.top[self.pi1(a) - 1]

    def omega(self) -> np.ndarray:
        d = self.d
        om = np.zeros((d, d), dtype=np.int64)
        for a in range(d):
            for b in range(d):
                if self.pi1(a) > self.pi1(b) and self.pi0(a) < self.pi0(b):
                    om[a, b] = 1
                elif self.pi1(a) < self.pi1(b) and self.pi0(a) > self.pi0(b):
                    om[a, b] = -1
        return om

    def __str__(self):
        return " ".join(letter_name(a) for a in self.top) + " / " + " ".join(
            letter_name(a) for a in self.bottom
        )


def make_symmetric_permutation(d: int) -> Permutation:
    if not isinstance(d, (int, np.integer)) or d < 2:
        raise InvalidArgument(f"symmetric permutation needs d >= 2, got {d!r}")
    letters = tuple(range(d))
    return Permutation(letters, letters[::-1])


def omega_apply(perm: Permutation, vec):
    """``Omega_pi @ vec`` using only additions (works for any scalar type)."""
    d = perm.d
    zero = vec[0] - vec[0]
    out = []
    for a in range(d):
        acc = zero
        for b in range(d):
            if perm.pi1(a) > perm.pi1(b) and perm.pi0(a) < perm.pi0(b):
                acc = acc + vec[b]
            elif perm.pi1(a) < perm.pi1(b) and perm.pi0(a) > perm.pi0(b):
                acc = acc - vec[b]
        out.append(acc)
    return tuple(out)


def translation_vector(perm: Permutation, lengths) -> tuple:
    if len(lengths) != perm.d:
        raise InvalidArgument("lengths do not match the alphabet size")
    if any(not (v > 0) for v in lengths):
        raise InvalidArgument("interval lengths must be strictly positive")
    return omega_apply(perm, lengths)


class KeaneVerdict(NamedTuple):
    ok: bool
    depth_checked: int
    witness: Optional[tuple] = None  # (m, alpha, beta, gap)


class OrbitGaps(NamedTuple):
    points: list
    gaps: list
    flagged: list  # indices i with gaps[i] < tolerance


@dataclass(frozen=True)
class Iet:
    perm: Permutation
    lengths: tuple

    def __post_init__(self):
        lengths = tuple(self.lengths)
        object.__setattr__(self, "lengths", lengths)
        if len(lengths) != self.perm.d:
            raise InvalidArgument(
                f"{len(lengths)} lengths given for a {self.perm.d}-letter permutation"
            )
        if any(not (v > 0) for v in lengths):
            raise InvalidArgument("interval lengths must be strictly positive")

    # -- derived data -----------------------------------------------------
    @property
    def d(self) -> int:
        return self.perm.d

    @cached_property
    def total(self):
        acc = self.lengths[0] - self.lengths[0]
        for v in self.lengths:
            acc = acc + v
        return acc

    @cached_property
    def _top_geometry(self):
        lefts = [None] * self.d
        acc = self.lengths[0] - self.lengths[0]
        for a in self.perm.top:
            lefts[a] = acc
            acc = acc + self.lengths[a]
        rights = [lefts[a] + self.lengths[a] for a in range(self.d)]
        return tuple(lefts), tuple(rights)

    @property
    def lefts(self) -> tuple:
        return self._top_geometry[0]

    @property
    def rights(self) -> tuple:
        return self._top_geometry[1]

    @cached_property
    def translation(self) -> tuple:
        return omega_apply(self.perm, self.lengths)

    @cached_property
    def _top_cuts(self):
        return [self.lefts[a] for a in self.perm.top[1:]]

    @cached_property
    def _bottom_geometry(self):
        # image endpoints as T computes them, so that T^-1(T(l_a)) = l_a
        # also in rounded arithmetic
        w = self.translation
        lefts = [self.lefts[a] + w[a] for a in range(self.d)]
        lefts[self.perm.bottom[0]] = self.total - self.total
        cuts = [lefts[a] for a in self.perm.bottom[1:]]
        return tuple(lefts), cuts

    @property
    def image_lefts(self) -> tuple:
        """Left endpoints of the image intervals ``T(I_a)``."""
        return self._bottom_geometry[0]

    def centers(self) -> tuple:
        return tuple((self.lefts[a] + self.rights[a]) / 2 for a in range(self.d))

    # -- evaluation -------------------------------------------------------
    def letter_at(self, x) -> int:
        if not (0 <= x < self.total):
            raise DomainError(f"x={x!r} outside [0, {self.total!r})")
        return self.perm.top[bisect_right(self._top_cuts, x)]

    def evaluate(self, x):
        a = self.letter_at(x)
        return x + self.translation[a]

    __call__ = evaluate

    def evaluate_inverse(self, y):
        if not (0 <= y < self.total):
            raise DomainError(f"y={y!r} outside [0, {self.total!r})")
        b = self.perm.bottom[bisect_right(self._bottom_geometry[1], y)]
        return y - self.translation[b]

    def orbit(self, x, n: int) -> list:
        """``[x, Tx, ..., T^{n-1}x]`` by sequential evaluation."""
        if n <= 0:
            return []
        if not (0 <= x < self.total):
            raise DomainError(f"x={x!r} outside [0, {self.total!r})")
        cuts = self._top_cuts
        top = self.perm.top
        w = self.translation
        out = [x]
        for _ in range(n - 1):
            x = x + w[top[bisect_right(cuts, x)]]
            out.append(x)
        return out

    def backward_orbit(self, y, n: int) -> list:
        """``[y, T^{-1}y, ..., T^{-(n-1)}y]``."""
        if n <= 0:
            return []
        if not (0 <= y < self.total):
            raise DomainError(f"y={y!r} outside [0, {self.total!r})")
        cuts = self._bottom_geometry[1]
        bottom = self.perm.bottom
        w = self.translation
        out = [y]
        for _ in range(n - 1):
            y = y - w[bottom[bisect_right(cuts, y)]]
            out.append(y)
        return out

    def orbit_array(self, xs, n: int) -> np.ndarray:
        """Float orbits of many points at once: row ``t`` holds ``T^t xs``.

        Returns an ``(n, len(xs))`` array; rows ``0 .. n-1``.
        """
        xs = np.asarray(xs, dtype=float)
        if xs.size and (xs.min() < 0 or xs.max() >= float(self.total)):
            raise DomainError("orbit start outside the domain")
        cuts = np.asarray([float(c) for c in self._top_cuts])
        w_top = np.asarray([float(self.translation[a]) for a in self.perm.top])
        out = np.empty((max(n, 0), xs.size))
        x = xs.copy()
        for t in range(n):
            out[t] = x
            x = x + w_top[np.searchsorted(cuts, x, side="right")]
        return out

    def iterate(self, x, m: int):
        """``T^m x`` for any integer ``m`` (negative means inverse)."""
        if m >= 0:
            return self.orbit(x, m + 1)[-1]
        return self.backward_orbit(x, -m + 1)[-1]

    def itinerary(self, x, n: int) -> list:
        """Letters of the intervals visited by ``x, ..., T^{n-1}x``."""
        cuts = self._top_cuts
        top = self.perm.top
        return [top[bisect_right(cuts, p)] for p in self.orbit(x, n)]

    # -- conveniences ------------------------------------------------------
    def normalized(self) -> "Iet":
        t = self.total
        return Iet(self.perm, tuple(v / t for v in self.lengths))

    def with_lengths(self, lengths) -> "Iet":
        return Iet(self.perm, tuple(lengths))

    def to_descriptor(self) -> dict:
        pi0, pi1 = self.perm.ranks()
        return {
            "d": self.d,
            "pi0": pi0,
            "pi1": pi1,
            "lengths": [decimal_string(v) for v in self.lengths],
        }

    @classmethod
    def from_descriptor(cls, desc: dict, precision: str = "double") -> "Iet":
        try:
            d = int(desc["d"])
            perm = Permutation.from_ranks(desc["pi0"], desc["pi1"])
            lengths = tuple(parse_decimal(s, precision) for s in desc["lengths"])
        except (KeyError, TypeError) as exc:
            raise InvalidArgument(f"malformed IET descriptor: {exc}") from exc
        if perm.d != d:
            raise InvalidArgument("descriptor 'd' does not match the permutation size")
        return cls(perm, lengths)

    def __repr__(self):
        return f"Iet({self.perm}, lengths={self.lengths!r})"


def discontinuities(T: Iet):
    """Partial sums ``(u^t, u^b)``: discontinuities of ``T`` and ``T^{-1}``."""
    zero = T.total - T.total
    ut = [zero]
    for a in T.perm.top:
        ut.append(ut[-1] + T.lengths[a])
    ub = [zero]
    for a in T.perm.bottom:
        ub.append(ub[-1] + T.lengths[a])
    return tuple(ut), tuple(ub)


def default_keane_tolerance(T: Iet):
    return 1e-12 * float(T.total)


def check_keane(T: Iet, depth: int, eps=None) -> KeaneVerdict:
    """Search for ``|T^m l_a - l_b| <= eps`` with ``1 <= m <= depth``, ``pi0(b) != 1``.

    A positive verdict only means no connection was found up to ``depth``.
    The witness with the smallest ``m`` is reported.
    """
    if depth < 1:
        raise InvalidArgument("depth must be >= 1")
    if eps is None:
        eps = default_keane_tolerance(T)
    cuts = T._top_cuts
    targets = {T.lefts[b]: b for b in T.perm.top[1:]}
    best = None
    for a in T.perm.top:
        orbit = T.orbit(T.lefts[a], depth + 1)
        for m in range(1, depth + 1):
            if best is not None and m >= best[0]:
                break
            p = orbit[m]
            i = bisect_right(cuts, p)
            for j in (i - 1, i):
                if 0 <= j < len(cuts):
                    gap = abs(p - cuts[j])
                    if gap <= eps:
                        best = (m, a, targets[cuts[j]], gap)
                        break
    if best is not None:
        return KeaneVerdict(False, depth, best)
    return KeaneVerdict(True, depth, None)


def orbit_with_gaps(T: Iet, x, n: int, eps=None) -> OrbitGaps:
    """Orbit segment of length ``n`` and its distance to the left endpoints ``l_b``."""
    if eps is None:
        eps = default_keane_tolerance(T)
    points = T.orbit(x, n)
    lefts = sorted(T.lefts)
    gaps = []
    flagged = []
    for i, p in enumerate(points):
        j = bisect_right(lefts, p)
        cands = [abs(p - lefts[k]) for k in (j - 1, j) if 0 <= k < len(lefts)]
        g = min(cands)
        gaps.append(g)
        if g < eps:
            flagged.append(i)
    return OrbitGaps(points, gaps, flagged)


def involution(a, b, x):
    """Reflection ``a + b - x`` of ``[a, b]``."""
    if not (a <= x <= b):
        raise DomainError(f"x={x!r} outside [{a!r}, {b!r}]")
    return a + b - x


def random_lengths(rng: np.random.Generator, d: int) -> tuple:
    """Uniform sample of the open simplex ``|lambda| = 1`` (normalized exponentials)."""
    e = rng.standard_exponential(d)
    lam = e / e.sum()
    return tuple(float(v) for v in lam)


def golden_rotation() -> Iet:
    """Rotation by the inverse golden mean, ``lambda = (1 - g, g)``."""
    g = (5 ** 0.5 - 1) / 2
    return Iet(make_symmetric_permutation(2), (1 - g, g))
