"""
Explicit equilibria and interchangeability witnesses for G_1, G_2 and G_n.

G_n profiles are windows of MatrixStrategy cells. Semi-perfection at every
player is exactly the equilibrium condition, so each construction is checked
with the semi-perfect (or perfect) predicate before it is returned.
"""

import logging
from dataclasses import dataclass

import numpy as np

from constants import RESIDUE_LABELS
from errors import ConstructionError, PreconditionError
from games import (
    MatrixStrategy, G1_SPEC, G2_SPEC, build_game, semiperfect_mask, perfect_mask,
)
from engine import EventuallyPeriodicProfile, assemble_profile, verify_profile

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MatrixWindow:
    """Cells of G_n at positions start, start+1, ..."""
    n: int
    start: int
    cells: tuple

    def __post_init__(self):
        cells = tuple(self.cells)
        if not cells:
            raise PreconditionError("window must hold at least one cell")
        if any(not isinstance(c, MatrixStrategy) or c.n != self.n for c in cells):
            raise PreconditionError(f"every cell must be a G_{self.n} strategy")
        object.__setattr__(self, "cells", cells)

    def __len__(self):
        return len(self.cells)

    @property
    def stop(self) -> int:
        """One past the last position."""
        return self.start + len(self.cells)

    def at(self, position: int) -> MatrixStrategy:
        if not self.start <= position < self.stop:
            raise IndexError(position)
        return self.cells[position - self.start]

    def array(self) -> np.ndarray:
        return np.stack([c.array() for c in self.cells])

    def semiperfect_players(self) -> np.ndarray:
        """Per interior player (start+1 .. stop-2)."""
        cells = self.array()
        return semiperfect_mask(self.n, cells[:-2], cells[1:-1], cells[2:])

    def perfect_players(self) -> np.ndarray:
        cells = self.array()
        return perfect_mask(self.n, cells[:-2], cells[1:-1], cells[2:])

    def is_semiperfect(self) -> bool:
        return bool(self.semiperfect_players().all())

    def is_perfect(self) -> bool:
        return bool(self.perfect_players().all())


def _window_from_arrays(n, start, arrays):
    return MatrixWindow(n, start, tuple(MatrixStrategy.from_array(n, a) for a in arrays))


def _require_semiperfect(window, what):
    if not window.is_semiperfect():
        bad = [window.start + 1 + i for i, ok in enumerate(window.semiperfect_players()) if not ok]
        raise ConstructionError(f"{what} is not semi-perfect at players {bad}")


def zig_sequence(n: int, u: int, v: int, k: int) -> list:
    """k residues mod n from u to v with steps 0 or 1: the +1 steps come first."""
    if n < 1:
        raise PreconditionError(f"modulus must be positive, got {n}")
    if k < n:
        raise PreconditionError(f"need at least {n} terms, got {k}")
    gap = (v - u) % n
    return [(u + min(i, gap)) % n for i in range(k)]


# ---------------------------------------------------------------------------
# Named profiles

def f_matrix(n: int) -> MatrixStrategy:
    return MatrixStrategy.zero(n)


def g_matrix(n: int) -> MatrixStrategy:
    return MatrixStrategy(n, ((0, n),) * (n - 1))


def f_profile(n: int) -> EventuallyPeriodicProfile:
    return EventuallyPeriodicProfile.constant(f_matrix(n))


def g_profile(n: int) -> EventuallyPeriodicProfile:
    return EventuallyPeriodicProfile.constant(g_matrix(n))


def verify_matrix_profile(n: int, profile: EventuallyPeriodicProfile) -> bool:
    """Semi-perfect at every player, checked over the profile's finite region."""
    lo, hi = profile.checking_region()
    cells = profile.window(lo - 1, hi + 2)
    if any(not isinstance(c, MatrixStrategy) or c.n != n for c in cells):
        return False
    arrays = np.stack([c.array() for c in cells])
    return bool(semiperfect_mask(n, arrays[:-2], arrays[1:-1], arrays[2:]).all())


# ---------------------------------------------------------------------------
# Perfect windows

def _check_matrix(n, matrix, what):
    if not isinstance(matrix, MatrixStrategy) or matrix.n != n:
        raise PreconditionError(f"{what} must be a G_{n} strategy")
    if matrix[0, 0] != 0:
        raise PreconditionError(f"{what} must have top-left entry 0")


def perfect_profile(n: int, M: MatrixStrategy, a: int, b: int) -> MatrixWindow:
    """Window over [min(a,b), max(a,b)] with M at a, zero at b, perfect strictly between."""
    _check_matrix(n, M, "M")
    if not 0 < abs(a - b) < n:
        raise PreconditionError(f"need 0 < |a-b| < {n}, got a={a}, b={b}")
    x = M.array()
    k = abs(a - b)
    cells = np.zeros((k + 1, n - 1, 2), dtype=np.int64)

    if a < b:
        cells[0] = x
        if k > 1:
            cells[1, 1:, 0] = -x[1:, 1]
            cells[1, 1, 1] = x[0, 1]
            # the x12 entry travels one row down per player
            for j in range(2, k):
                cells[j, j, 1] = x[0, 1]
        window = _window_from_arrays(n, a, cells)
    else:
        cells[k] = x
        if k > 1:
            prev = k - 1
            cells[prev, 1:, 1] = -x[1:, 0]
            cells[prev, n - 2, 0] = x[0, 1]
            # mirrored: x12 travels one row up per player leftwards
            for j in range(2, k):
                cells[k - j, n - 1 - j, 0] = x[0, 1]
        window = _window_from_arrays(n, b, cells)

    if not window.is_perfect():
        raise ConstructionError(f"perfect window for a={a}, b={b} failed verification")
    return window


def sum_windows(p: MatrixWindow, q: MatrixWindow) -> MatrixWindow:
    """Cellwise sum mod n+1."""
    if p.n != q.n or p.start != q.start or len(p) != len(q):
        raise PreconditionError("windows must share parameter and span")
    return MatrixWindow(p.n, p.start, tuple(x + y for x, y in zip(p.cells, q.cells)))


# ---------------------------------------------------------------------------
# Semi-perfect windows

def semiperfect_profile(n: int, A: MatrixStrategy, B: MatrixStrategy, a: int, b: int) -> MatrixWindow:
    """
    Window over [min(a,b), max(a,b)] with A at a, B at b, semi-perfect at
    every interior player.

    Write D(j, r) = s[j-1][r, 2] + s[j][r, 1] (rows 1-based). The conditions
    say D(j+1, r+1) - D(j, r) and D(j+2, 1) - D(j, n-1) lie in {0, 1}, so the
    D values fall into n chains, one per residue of j - r mod n. The two ends
    pin D(lo+1, 1) = P12 and D(hi+1, 1) = Q12. When both pins share a chain it
    climbs from one to the other with a zig sequence; every other chain is
    constant. Each free D is then realised by one free cell entry.
    """
    _check_matrix(n, A, "A")
    _check_matrix(n, B, "B")
    if abs(a - b) <= n:
        raise PreconditionError(f"need |a-b| > {n}, got a={a}, b={b}")
    lo, hi = min(a, b), max(a, b)
    P, Q = (A, B) if a < b else (B, A)
    m = n + 1
    length = hi - lo

    def chain(j, r):
        return (j - r) % n

    low_chain, high_chain = chain(lo + 1, 1), chain(hi + 1, 1)
    values = {low_chain: P[0, 1], high_chain: Q[0, 1]}
    zig = None
    if low_chain == high_chain:
        # nodes of this chain in order, from (lo+1, 1) to (hi+1, 1)
        nodes = [(lo + 1, 1)]
        while nodes[-1] != (hi + 1, 1):
            j, r = nodes[-1]
            nodes.append((j + 1, r + 1) if r < n - 1 else (j + 2, 1))
        zig = dict(zip(nodes, zig_sequence(m, P[0, 1], Q[0, 1], len(nodes))))

    def D(j, r):
        if zig is not None:
            return zig.get((j, r), 0)
        return values.get(chain(j, r), 0)

    cells = np.zeros((length + 1, n - 1, 2), dtype=np.int64)
    cells[0] = P.array()
    cells[length] = Q.array()
    for j in range(lo + 2, hi + 1):
        cells[j - 1 - lo, 0, 1] = D(j, 1)
    for r in range(2, n):
        for j in range(lo + 1, hi):
            carried = P[r - 1, 1] if j == lo + 1 else 0
            cells[j - lo, r - 1, 0] = D(j, r) - carried
        cells[hi - 1 - lo, r - 1, 1] = D(hi, r) - Q[r - 1, 0]

    window = _window_from_arrays(n, lo, cells % m)
    if window.at(a) != A or window.at(b) != B:
        raise ConstructionError("semi-perfect window lost its endpoints")
    _require_semiperfect(window, f"semi-perfect window over [{lo}, {hi}]")
    return window


def expansion_right_cell(n: int, x: MatrixStrategy, y: MatrixStrategy) -> MatrixStrategy:
    """The cell after (x, y) that makes the player at y semi-perfect."""
    xa, ya = x.array(), y.array()
    w = np.zeros((n - 1, 2), dtype=np.int64)
    w[0, 1] = xa[n - 2, 1] + ya[n - 2, 0]
    w[1:, 0] = xa[:-1, 1] + ya[:-1, 0] - ya[1:, 1]
    return MatrixStrategy.from_array(n, w)


def expansion_left_cell(n: int, y: MatrixStrategy, z: MatrixStrategy) -> MatrixStrategy:
    """The cell before (y, z) that makes the player at y semi-perfect."""
    ya, za = y.array(), z.array()
    w = np.zeros((n - 1, 2), dtype=np.int64)
    w[:-1, 1] = ya[1:, 1] + za[1:, 0] - ya[:-1, 0]
    w[n - 2, 1] = za[0, 1] - ya[n - 2, 0]
    return MatrixStrategy.from_array(n, w)


def expand_right(n: int, window: MatrixWindow) -> MatrixWindow:
    if len(window) < 2:
        raise PreconditionError("expansion needs at least two cells")
    cell = expansion_right_cell(n, window.cells[-2], window.cells[-1])
    return MatrixWindow(n, window.start, window.cells + (cell,))


def expand_left(n: int, window: MatrixWindow) -> MatrixWindow:
    if len(window) < 2:
        raise PreconditionError("expansion needs at least two cells")
    cell = expansion_left_cell(n, window.cells[0], window.cells[1])
    return MatrixWindow(n, window.start - 1, (cell,) + window.cells)


def close_to_equilibrium(n: int, window: MatrixWindow) -> EventuallyPeriodicProfile:
    """
    Extend both ways until the boundary pair repeats; the appended cell is a
    function of that pair, so the extension is periodic from there on.
    """
    if len(window) < 2:
        raise PreconditionError("closing needs at least two cells")
    cells = {window.start + i: c for i, c in enumerate(window.cells)}

    # right: pair (c[j-1], c[j]) keyed by j
    last = window.stop - 1
    seen = {(cells[last - 1], cells[last]): last}
    while True:
        cells[last + 1] = expansion_right_cell(n, cells[last - 1], cells[last])
        last += 1
        pair = (cells[last - 1], cells[last])
        if pair in seen:
            first_seen = seen[pair]
            right_start, right_period = first_seen - 1, last - first_seen
            break
        seen[pair] = last

    # left: pair (c[p], c[p+1]) keyed by p
    first = window.start
    seen = {(cells[first], cells[first + 1]): first}
    while True:
        cells[first - 1] = expansion_left_cell(n, cells[first], cells[first + 1])
        first -= 1
        pair = (cells[first], cells[first + 1])
        if pair in seen:
            first_seen = seen[pair]
            left_end, left_period = first_seen + 1, first_seen - first
            break
        seen[pair] = first

    logger.debug("Closed window of %d cells: left period %d, right period %d",
                 len(window), left_period, right_period)
    profile = assemble_profile(cells, left_end, left_period, right_start, right_period)
    if not verify_matrix_profile(n, profile):
        raise ConstructionError("closed profile is not an equilibrium")
    return profile


# ---------------------------------------------------------------------------
# Witnesses

def _mod_profile(values, lo, hi, period):
    """Profile from a value function that repeats with the given period outside [lo, hi]."""
    left = tuple(values(p) for p in range(lo - period, lo))
    mid = tuple(values(p) for p in range(lo, hi + 1))
    right = tuple(values(p) for p in range(hi + 1, hi + 1 + period))
    return EventuallyPeriodicProfile(lo, left, mid, right).normalized()


def _require_residue(name, value):
    if not 0 <= value < len(RESIDUE_LABELS):
        raise PreconditionError(f"{name} must be a residue in 0..{len(RESIDUE_LABELS) - 1}, got {value}")


def residue_constant(r: int) -> EventuallyPeriodicProfile:
    """The constant G_2 equilibrium playing residue r everywhere."""
    _require_residue("residue", r)
    return EventuallyPeriodicProfile.constant(r)


def g1_witness(s: int, t: int, a: int, b: int) -> EventuallyPeriodicProfile:
    """G_1 equilibrium playing s at a and t at b (|a-b| > 1)."""
    _require_residue("s", s)
    _require_residue("t", t)
    if abs(a - b) <= 1:
        raise PreconditionError(f"G_1 witnesses need |a-b| > 1, got a={a}, b={b}")
    lo, hi = min(a, b), max(a, b)
    u, v = (s, t) if a < b else (t, s)
    steps = zig_sequence(3, u, v, hi - lo + 1)
    profile = EventuallyPeriodicProfile(lo, (u,), tuple(steps), (v,)).normalized()
    if not verify_profile(build_game(G1_SPEC), profile):
        raise ConstructionError("G_1 witness is not an equilibrium")
    return profile


def g2_witness(f: EventuallyPeriodicProfile, g: EventuallyPeriodicProfile, a: int, b: int) -> EventuallyPeriodicProfile:
    """G_2 equilibrium agreeing with f at a and with g at b (|a-b| = 1 or > 2)."""
    d = abs(a - b)
    if d in (0, 2):
        raise PreconditionError(f"G_2 witnesses need |a-b| = 1 or > 2, got a={a}, b={b}")
    game = build_game(G2_SPEC)
    for profile in (f, g):
        if not verify_profile(game, profile):
            raise PreconditionError("inputs must be G_2 equilibria")

    lo, hi = min(a, b), max(a, b)
    if d == 1:
        def values(p):
            return f[p] if (p - a) % 2 == 0 else g[p]
        # the interleaving repeats once both inputs and the parity do
        period = 2 * _lcm(_profile_period(f), _profile_period(g))
        lo = min(lo, f.anchor, g.anchor)
        hi = max(hi, f.anchor + len(f.mid), g.anchor + len(g.mid))
        result = _mod_profile(values, lo, hi, period)
    else:
        u, v = (f[a], g[b]) if a < b else (g[b], f[a])
        if d % 2 == 0:
            # one parity chain climbs from u to v, the other is constant
            chain = zig_sequence(3, u, v, d // 2 + 1)
            other = f[a + 1]

            def values(p):
                if (p - lo) % 2:
                    return other
                return chain[min(max((p - lo) // 2, 0), len(chain) - 1)]
        else:
            def values(p):
                return u if (p - lo) % 2 == 0 else v
        result = _mod_profile(values, lo, hi, 2)

    if result[a] != f[a] or result[b] != g[b] or not verify_profile(game, result):
        raise ConstructionError("G_2 witness failed verification")
    return result


def _profile_period(profile):
    return _lcm(len(profile.left), len(profile.right))


def _lcm(x, y):
    return int(np.lcm(x, y))


def gn_witness(n: int, f: EventuallyPeriodicProfile, g: EventuallyPeriodicProfile,
               a: int, b: int) -> EventuallyPeriodicProfile:
    """G_n equilibrium agreeing with f at a and with g at b (|a-b| not in {0, n})."""
    d = abs(a - b)
    if d == 0 or d == n:
        raise PreconditionError(f"G_{n} witnesses need |a-b| not in {{0, {n}}}, got a={a}, b={b}")
    for profile in (f, g):
        if not verify_matrix_profile(n, profile):
            raise PreconditionError(f"inputs must be G_{n} equilibria")

    if d < n:
        window = sum_windows(perfect_profile(n, f[a], a, b), perfect_profile(n, g[b], b, a))
    else:
        window = semiperfect_profile(n, f[a], g[b], a, b)
    _require_semiperfect(window, "witness window")
    result = close_to_equilibrium(n, window)
    if result[a] != f[a] or result[b] != g[b]:
        raise ConstructionError("G_n witness lost its endpoints")
    logger.info("G_%d witness for a=%d, b=%d via %s", n, a, b, "perfect sum" if d < n else "semi-perfect window")
    return result


# ---------------------------------------------------------------------------
# Diagonal bound

def diagonal_mask(n: int, cells: np.ndarray) -> np.ndarray:
    """
    Diagonal bound on entry arrays (..., length, n-1, 2) whose first cell has
    x12 = 0: the k-th diagonal sum stays within 0..k and the cell n steps on
    never shows x12 = n.
    """
    m = n + 1
    ok = np.ones(cells.shape[:-3], dtype=bool)
    for k in range(n - 1):
        total = (cells[..., k, k, 1] + cells[..., k + 1, k, 0]) % m
        ok &= total <= k
    return ok & (cells[..., n, 0, 1] % m != n)


def diagonal_check(n: int, window: MatrixWindow) -> bool:
    if len(window) < n + 1:
        raise PreconditionError(f"diagonal check needs at least {n + 1} cells")
    if window.cells[0][0, 1] != 0:
        raise PreconditionError("first cell must have x12 = 0")
    return bool(diagonal_mask(n, window.array()[:n + 1]))


# ---------------------------------------------------------------------------
# Random generators

def random_matrix(n: int, rng: np.random.Generator) -> MatrixStrategy:
    """Uniform G_n strategy with top-left entry 0."""
    entries = rng.integers(0, n + 1, size=(n - 1, 2))
    entries[0, 0] = 0
    return MatrixStrategy.from_array(n, entries)


def random_semiperfect_arrays(n: int, length: int, count: int, rng: np.random.Generator,
                              first_x12_zero: bool = False) -> np.ndarray:
    """
    count windows (count, length, n-1, 2), each semi-perfect at its interior
    players; every successor cell is drawn uniformly among the valid ones.
    """
    if length < 2:
        raise PreconditionError("windows need at least two cells")
    m = n + 1
    cells = rng.integers(0, m, size=(count, length, n - 1, 2))
    cells[:, :, 0, 0] = 0
    if first_x12_zero:
        cells[:, 0, 0, 1] = 0
    for i in range(2, length):
        prev, cur = cells[:, i - 2], cells[:, i - 1]
        slack = rng.integers(0, 2, size=(count, n - 1))
        # column 1 of rows 2..n-1 and x12 are forced up to a 0/1 slack; column 2 below row 1 is free
        cells[:, i, 1:, 0] = prev[:, :-1, 1] + cur[:, :-1, 0] - cur[:, 1:, 1] + slack[:, 1:]
        cells[:, i, 0, 1] = prev[:, n - 2, 1] + cur[:, n - 2, 0] + slack[:, 0]
    return cells % m


def random_semiperfect_window(n: int, length: int, rng: np.random.Generator, start: int = 0,
                              first_x12_zero: bool = False) -> MatrixWindow:
    arrays = random_semiperfect_arrays(n, length, 1, rng, first_x12_zero)[0]
    return _window_from_arrays(n, start, arrays)


def random_equilibrium(n: int, rng: np.random.Generator, length: int = None) -> EventuallyPeriodicProfile:
    """A random semi-perfect window closed to a full G_n equilibrium."""
    window = random_semiperfect_window(n, length or n + 2, rng)
    return close_to_equilibrium(n, window)
