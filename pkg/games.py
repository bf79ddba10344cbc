"""
Cellular game families: symbolic specs, builders and payoff functions.

A game is a finite strategy list with an integer payoff u(x, y, z) for the
player playing y between neighbours x and z. Payoffs are evaluated on numpy
id arrays so that the engine can take best responses a whole slab at a time.
"""

from __future__ import annotations

import logging
import os
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Union

import numpy as np

from constants import (
    G0_LABELS, RESIDUE_LABELS, PENNIES_LABELS, GINF_LABELS, PRODUCT_SEPARATOR,
    TABLE_HEADER, MAX_GN_PARAMETER,
)
from errors import GameSpecError, PreconditionError, ResourceLimitError, TableFormatError
from security import is_valid_label, read_text_file
from settings import get_app_dir, get_setting

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Symbolic specs

@dataclass(frozen=True)
class GameSpec:
    kind: str
    n: int = 0
    parts: tuple = ()
    path: str = ""

    def __post_init__(self):
        if self.kind not in ("G0", "G1", "G2", "GN", "GINF", "PROD", "FILE"):
            raise GameSpecError(f"unknown game kind {self.kind!r}")
        if self.kind == "GN" and self.n < 3:
            raise GameSpecError(f"GN parameter must be >= 3, got {self.n}")
        if self.kind == "PROD" and not self.parts:
            raise GameSpecError("PROD needs at least one component")

    def __str__(self):
        if self.kind == "GN":
            return f"GN:{self.n}"
        if self.kind == "PROD":
            return "PROD(" + ",".join(str(p) for p in self.parts) + ")"
        if self.kind == "FILE":
            return f"FILE:{self.path}"
        return self.kind


G0_SPEC = GameSpec("G0")
G1_SPEC = GameSpec("G1")
G2_SPEC = GameSpec("G2")
GINF_SPEC = GameSpec("GINF")


def gn_spec(n: int) -> GameSpec:
    return GameSpec("GN", n=n)


def file_spec(path: str) -> GameSpec:
    return GameSpec("FILE", path=path)


def product_spec(parts) -> GameSpec:
    """PROD of the given specs; a single component stands for itself."""
    parts = tuple(parts)
    if len(parts) == 1:
        return parts[0]
    return GameSpec("PROD", parts=parts)


def family_spec(d: int) -> GameSpec:
    """The family member whose interchangeability fails exactly at distances 0 and d."""
    if d < 0:
        raise PreconditionError(f"distance must be non-negative, got {d}")
    if d == 0:
        return G0_SPEC
    if d == 1:
        return G1_SPEC
    if d == 2:
        return G2_SPEC
    return gn_spec(d)


class _SpecParser:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def error(self, message):
        return GameSpecError(f"{message} at position {self.pos} in {self.text!r}")

    def spec(self, nested):
        rest = self.text[self.pos:]
        if rest.startswith("PROD("):
            self.pos += 5
            parts = [self.spec(True)]
            while self.text.startswith(",", self.pos):
                self.pos += 1
                parts.append(self.spec(True))
            if not self.text.startswith(")", self.pos):
                raise self.error("expected ')'")
            self.pos += 1
            return GameSpec("PROD", parts=tuple(parts))
        if rest.startswith("FILE:"):
            self.pos += 5
            end = len(self.text)
            if nested:
                match = re.compile(r'[,)]').search(self.text, self.pos)
                end = match.start() if match else end
            path = self.text[self.pos:end].strip()
            if not path:
                raise self.error("empty FILE path")
            self.pos = end
            return file_spec(path)
        match = re.compile(r'GN:(\d+)|GINF|G0|G1|G2').match(self.text, self.pos)
        if not match:
            raise self.error("expected G0, G1, G2, GINF, GN:<n>, PROD(...) or FILE:<path>")
        self.pos = match.end()
        if match.group(1) is not None:
            return gn_spec(int(match.group(1)))
        return GameSpec(match.group(0))


def parse_game_spec(text: str) -> GameSpec:
    parser = _SpecParser(text.strip())
    spec = parser.spec(False)
    if parser.pos != len(parser.text):
        raise parser.error("trailing characters")
    return spec


def expected_interchangeable(spec: GameSpec, a: int, b: int) -> bool:
    """Closed-form answer for the built-in families; products take the conjunction."""
    d = abs(a - b)
    if spec.kind == "GINF":
        return True
    if spec.kind == "PROD":
        return all(expected_interchangeable(part, a, b) for part in spec.parts)
    if spec.kind == "FILE":
        raise PreconditionError("no closed form for table games")
    family_distance = {"G0": 0, "G1": 1, "G2": 2}.get(spec.kind, spec.n)
    return d != 0 and d != family_distance


# ---------------------------------------------------------------------------
# Games

class FiniteCellularGame:
    """
    Finite strategy list plus a vectorised payoff.

    payoff_fn(x, y, z) receives broadcastable int64 id arrays and returns an
    integer array. Games hash by identity so engine caches key on them.
    """

    def __init__(self, spec: GameSpec, labels, payoff_fn: Callable,
                 components=(), max_payoff_fn: Optional[Callable] = None):
        self.spec = spec
        self.labels = tuple(labels)
        self._payoff_fn = payoff_fn
        self._max_payoff_fn = max_payoff_fn
        self.components = tuple(components)
        self._index = None

    def __repr__(self):
        return f"FiniteCellularGame({self.spec}, {self.strategy_count} strategies)"

    @property
    def strategy_count(self) -> int:
        return len(self.labels)

    def label(self, strategy: int) -> str:
        return self.labels[strategy]

    def index(self, label: str) -> int:
        if self._index is None:
            self._index = {lab: i for i, lab in enumerate(self.labels)}
        try:
            return self._index[label]
        except KeyError:
            raise GameSpecError(f"unknown strategy {label!r} in {self.spec}") from None

    def payoff_vec(self, x, y, z) -> np.ndarray:
        x, y, z = (np.asarray(v, dtype=np.int64) for v in (x, y, z))
        return np.asarray(self._payoff_fn(x, y, z), dtype=np.int64)

    def payoff(self, x: int, y: int, z: int) -> int:
        return int(self.payoff_vec(x, y, z))

    def max_payoff(self, x, z) -> np.ndarray:
        """max over s of payoff(x, s, z), elementwise over broadcast x, z."""
        x = np.asarray(x, dtype=np.int64)
        z = np.asarray(z, dtype=np.int64)
        if self._max_payoff_fn is not None:
            return np.asarray(self._max_payoff_fn(x, z), dtype=np.int64)
        ys = np.arange(self.strategy_count, dtype=np.int64)
        values = self.payoff_vec(x[..., None], ys, z[..., None])
        return values.max(axis=-1)

    def payoff_table(self) -> np.ndarray:
        """Dense |S|^3 cube indexed [x, y, z]."""
        size = self.strategy_count
        limit = get_setting("max_table_cells")
        if size ** 3 > limit:
            raise ResourceLimitError("payoff table cells", size ** 3, limit)
        ids = np.arange(size, dtype=np.int64)
        return self.payoff_vec(ids[:, None, None], ids[None, :, None], ids[None, None, :])


# ---------------------------------------------------------------------------
# G0, G1, GINF

def _zero_payoff(x, y, z):
    return np.zeros(np.broadcast(x, y, z).shape, dtype=np.int64)


def _g1_payoff(x, y, z):
    # 1 unless y = x + 2 (mod 3); z is irrelevant
    return np.broadcast_to((y != (x + 2) % 3).astype(np.int64), np.broadcast(x, y, z).shape)


# ---------------------------------------------------------------------------
# G2

@dataclass(frozen=True)
class Residue:
    r: int

    def __post_init__(self):
        if not 0 <= self.r < 3:
            raise PreconditionError(f"residue must be in 0..2, got {self.r}")

    def __str__(self):
        return str(self.r)


@dataclass(frozen=True)
class Pennies:
    y1: str
    y2: str

    def __post_init__(self):
        if self.y1 not in "HT" or self.y2 not in "HT" or len(self.y1) != 1 or len(self.y2) != 1:
            raise PreconditionError(f"pennies sides must be H or T, got {self.y1}{self.y2}")

    def __str__(self):
        return self.y1 + self.y2


G2Strategy = Union[Residue, Pennies]

G2_STRATEGIES = tuple(Residue(r) for r in range(3)) + tuple(Pennies(p[0], p[1]) for p in PENNIES_LABELS)


def g2_strategy(strategy_id: int) -> G2Strategy:
    return G2_STRATEGIES[strategy_id]


def g2_id(strategy: G2Strategy) -> int:
    return G2_STRATEGIES.index(strategy)


def g2_components(x: G2Strategy, y: G2Strategy, z: G2Strategy) -> tuple:
    """(u1, u2, u3) evaluated straight from the definition."""
    pennies_y = isinstance(y, Pennies)
    if isinstance(x, Residue) and isinstance(z, Residue):
        rewards_pennies = (x.r + 2) % 3 == z.r
    else:
        rewards_pennies = True
    u1 = int(rewards_pennies and pennies_y)
    u2 = int(isinstance(x, Pennies) and pennies_y and x.y2 == y.y1)
    u3 = int(pennies_y and isinstance(z, Pennies) and y.y2 != z.y1)
    return u1, u2, u3


# Pennies id p (3..6) encodes sides as bits of p - 3: high bit y1, low bit y2, H = 0
def _g2_arrays(x, y, z):
    x_pen, y_pen, z_pen = x >= 3, y >= 3, z >= 3
    x_side2 = (x - 3) & 1
    y_side1 = ((y - 3) >> 1) & 1
    y_side2 = (y - 3) & 1
    z_side1 = ((z - 3) >> 1) & 1
    rewards = x_pen | z_pen | ((x + 2) % 3 == z)
    u1 = rewards & y_pen
    u2 = x_pen & y_pen & (x_side2 == y_side1)
    u3 = y_pen & z_pen & (y_side2 != z_side1)
    return u1.astype(np.int64), u2.astype(np.int64), u3.astype(np.int64)


def _g2_payoff(x, y, z):
    u1, u2, u3 = _g2_arrays(x, y, z)
    return u1 + u2 + u3


# ---------------------------------------------------------------------------
# G_n, n >= 3

@dataclass(frozen=True)
class MatrixStrategy:
    """(n-1) x 2 matrix of residues mod n+1; entries[r][c] is 0-indexed."""
    n: int
    entries: tuple

    def __post_init__(self):
        if not 3 <= self.n <= MAX_GN_PARAMETER:
            raise PreconditionError(f"matrix parameter must be in 3..{MAX_GN_PARAMETER}, got {self.n}")
        rows = tuple(tuple(int(v) for v in row) for row in self.entries)
        if len(rows) != self.n - 1 or any(len(row) != 2 for row in rows):
            raise PreconditionError(f"G_{self.n} strategies are {self.n - 1}x2 matrices")
        if any(not 0 <= v <= self.n for row in rows for v in row):
            raise PreconditionError(f"entries must be residues mod {self.n + 1}")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def from_array(cls, n, array):
        array = np.mod(np.asarray(array, dtype=np.int64), n + 1)
        return cls(n, tuple(map(tuple, array.tolist())))

    @classmethod
    def zero(cls, n):
        return cls(n, ((0, 0),) * (n - 1))

    @classmethod
    def from_label(cls, text, n=None):
        match = re.fullmatch(r'\s*\[(.*)\]\s*', text)
        if not match:
            raise GameSpecError(f"matrix label must be bracketed: {text!r}")
        try:
            rows = [tuple(int(v) for v in row.split(",")) for row in match.group(1).split(";")]
        except ValueError:
            raise GameSpecError(f"non-integer entry in matrix label {text!r}") from None
        size = len(rows) + 1 if n is None else n
        try:
            return cls(size, tuple(rows))
        except PreconditionError as e:
            raise GameSpecError(f"bad matrix label {text!r}: {e}") from e

    @classmethod
    def from_id(cls, n, strategy_id):
        return cls.from_array(n, gn_decode(n, np.asarray(strategy_id, dtype=np.int64)))

    @property
    def modulus(self) -> int:
        return self.n + 1

    @property
    def label(self) -> str:
        return "[" + ";".join(f"{a},{b}" for a, b in self.entries) + "]"

    def __str__(self):
        return self.label

    def __getitem__(self, key):
        row, col = key
        return self.entries[row][col]

    def array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64)

    def strategy_id(self) -> int:
        result = 0
        for row in self.entries:
            for value in row:
                result = result * self.modulus + value
        return result

    def _check(self, other):
        if not isinstance(other, MatrixStrategy) or other.n != self.n:
            raise PreconditionError("matrix parameter mismatch")

    def __add__(self, other):
        self._check(other)
        return MatrixStrategy.from_array(self.n, self.array() + other.array())

    def __sub__(self, other):
        self._check(other)
        return MatrixStrategy.from_array(self.n, self.array() - other.array())


def gn_strategy_count(n: int) -> int:
    return (n + 1) ** (2 * (n - 1))


def gn_decode(n: int, ids: np.ndarray) -> np.ndarray:
    """Strategy ids to entry arrays of shape ids.shape + (n-1, 2); r11 is the top digit."""
    digits = 2 * (n - 1)
    powers = (n + 1) ** np.arange(digits - 1, -1, -1, dtype=np.int64)
    entries = (ids[..., None] // powers) % (n + 1)
    return entries.reshape(ids.shape + (n - 1, 2))


def gn_encode(n: int, entries: np.ndarray) -> np.ndarray:
    digits = 2 * (n - 1)
    powers = (n + 1) ** np.arange(digits - 1, -1, -1, dtype=np.int64)
    flat = np.asarray(entries, dtype=np.int64).reshape(entries.shape[:-2] + (digits,))
    return (flat * powers).sum(axis=-1)


def gn_conditions_array(n: int, x, y, z) -> np.ndarray:
    """Payoff-1 test on entry arrays (..., n-1, 2) for neighbours x, z and player y."""
    m = n + 1
    ok = y[..., 0, 0] % m == 0
    # rows k+1 against row k, k = 0..n-3
    slack = (y[..., 1:, 1] + z[..., 1:, 0] - x[..., :-1, 1] - y[..., :-1, 0]) % m
    ok = ok & np.all(slack <= 1, axis=-1)
    wrap = (z[..., 0, 1] - x[..., n - 2, 1] - y[..., n - 2, 0]) % m
    return ok & (wrap <= 1)


def _check_parameter(n, *matrices):
    for matrix in matrices:
        if not isinstance(matrix, MatrixStrategy) or matrix.n != n:
            raise PreconditionError(f"expected G_{n} strategies")


def gn_payoff_conditions(n: int, x: MatrixStrategy, y: MatrixStrategy, z: MatrixStrategy) -> bool:
    _check_parameter(n, x, y, z)
    return bool(gn_conditions_array(n, x.array(), y.array(), z.array()))


def semiperfect_mask(n: int, prev, cur, nxt) -> np.ndarray:
    """Semi-perfect test at the middle player, written in profile indexing."""
    m = n + 1
    prev, cur, nxt = (np.asarray(v, dtype=np.int64) for v in (prev, cur, nxt))
    result = cur[..., 0, 0] % m == 0
    for k in range(n - 2):
        lhs = cur[..., k + 1, 1] + nxt[..., k + 1, 0] - prev[..., k, 1] - cur[..., k, 0]
        result = result & np.isin(lhs % m, (0, 1))
    closing = nxt[..., 0, 1] - prev[..., n - 2, 1] - cur[..., n - 2, 0]
    return result & np.isin(closing % m, (0, 1))


def perfect_mask(n: int, prev, cur, nxt) -> np.ndarray:
    m = n + 1
    prev, cur, nxt = (np.asarray(v, dtype=np.int64) for v in (prev, cur, nxt))
    result = cur[..., 0, 0] % m == 0
    for k in range(n - 2):
        lhs = prev[..., k, 1] + cur[..., k, 0]
        rhs = cur[..., k + 1, 1] + nxt[..., k + 1, 0]
        result = result & ((lhs - rhs) % m == 0)
    closing = prev[..., n - 2, 1] + cur[..., n - 2, 0] - nxt[..., 0, 1]
    return result & (closing % m == 0)


def semiperfect_triple(n: int, x: MatrixStrategy, y: MatrixStrategy, z: MatrixStrategy) -> bool:
    _check_parameter(n, x, y, z)
    return bool(semiperfect_mask(n, x.array(), y.array(), z.array()))


def perfect_triple(n: int, x: MatrixStrategy, y: MatrixStrategy, z: MatrixStrategy) -> bool:
    _check_parameter(n, x, y, z)
    return bool(perfect_mask(n, x.array(), y.array(), z.array()))


def gn_best_response_array(n: int, x, z) -> np.ndarray:
    """A payoff-1 reply (entry arrays) to neighbours x, z: every condition hits [0]."""
    x = np.asarray(x, dtype=np.int64)
    z = np.asarray(z, dtype=np.int64)
    shape = np.broadcast_shapes(x.shape, z.shape)
    y = np.zeros(shape, dtype=np.int64)
    y[..., n - 2, 0] = z[..., 0, 1] - x[..., n - 2, 1]
    # y[k+1,1] = x[k,1] + y[k,0] - z[k+1,0]; y[k,0] is 0 for k <= n-3
    y[..., 1:, 1] = x[..., :-1, 1] - z[..., 1:, 0]
    return y % (n + 1)


def gn_best_response(n: int, x: MatrixStrategy, z: MatrixStrategy) -> MatrixStrategy:
    _check_parameter(n, x, z)
    return MatrixStrategy.from_array(n, gn_best_response_array(n, x.array(), z.array()))


def _gn_game(spec):
    n = spec.n
    count = gn_strategy_count(n)
    ids = np.arange(count, dtype=np.int64)
    labels = [MatrixStrategy.from_array(n, e).label for e in gn_decode(n, ids)]

    def payoff(x, y, z):
        return gn_conditions_array(n, gn_decode(n, x), gn_decode(n, y), gn_decode(n, z)).astype(np.int64)

    def max_payoff(x, z):
        # a payoff-1 reply always exists
        return np.ones(np.broadcast(x, z).shape, dtype=np.int64)

    return FiniteCellularGame(spec, labels, payoff, max_payoff_fn=max_payoff)


# ---------------------------------------------------------------------------
# Products

class ProductGame(FiniteCellularGame):
    """Componentwise game; strategy ids are mixed-radix, first component most significant."""

    def __init__(self, spec, parts):
        self.sizes = tuple(part.strategy_count for part in parts)
        strides = []
        stride = 1
        for size in reversed(self.sizes):
            strides.append(stride)
            stride *= size
        self.strides = tuple(reversed(strides))

        labels = list(parts[0].labels)
        for part in parts[1:]:
            labels = [prefix + PRODUCT_SEPARATOR + lab for prefix in labels for lab in part.labels]
        super().__init__(spec, labels, self._sum_payoff, components=parts,
                         max_payoff_fn=self._sum_max_payoff)

    def project(self, ids, i):
        """Component-i ids of product ids."""
        return (np.asarray(ids, dtype=np.int64) // self.strides[i]) % self.sizes[i]

    def combine(self, component_ids) -> int:
        return int(sum(s * c for s, c in zip(self.strides, component_ids)))

    def _sum_payoff(self, x, y, z):
        total = 0
        for i, part in enumerate(self.components):
            total = total + part.payoff_vec(self.project(x, i), self.project(y, i), self.project(z, i))
        return total

    def _sum_max_payoff(self, x, z):
        # the maximum of a sum of independent components splits
        total = 0
        for i, part in enumerate(self.components):
            total = total + part.max_payoff(self.project(x, i), self.project(z, i))
        return total


# ---------------------------------------------------------------------------
# Table files

def parse_game_table(text: str, spec: GameSpec = None) -> FiniteCellularGame:
    """Parse the line-based table format; unlisted triples pay the default."""
    labels = None
    default = 0
    seen_default = False
    entries = []
    header_seen = False

    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not header_seen:
            if line != TABLE_HEADER:
                raise TableFormatError(line_number, f"expected header {TABLE_HEADER!r}")
            header_seen = True
            continue
        if line.startswith("strategies:"):
            if labels is not None:
                raise TableFormatError(line_number, "strategies listed twice")
            labels = [lab.strip() for lab in line[len("strategies:"):].split(",")]
            for lab in labels:
                valid, err = is_valid_label(lab)
                if not valid:
                    raise TableFormatError(line_number, err)
            if len(set(labels)) != len(labels):
                raise TableFormatError(line_number, "duplicate strategy label")
            continue
        if line.startswith("default:"):
            if seen_default:
                raise TableFormatError(line_number, "default given twice")
            try:
                default = int(line[len("default:"):].strip())
            except ValueError:
                raise TableFormatError(line_number, "default payoff must be an integer") from None
            seen_default = True
            continue
        words = line.split()
        if len(words) != 4:
            raise TableFormatError(line_number, "expected '<x> <y> <z> <payoff>'")
        if labels is None:
            raise TableFormatError(line_number, "payoff line before 'strategies:'")
        entries.append((line_number, words))

    if not header_seen:
        raise TableFormatError(0, "empty table file")
    if labels is None:
        raise TableFormatError(0, "missing 'strategies:' line")

    size = len(labels)
    limit = get_setting("max_table_cells")
    if size ** 3 > limit:
        raise ResourceLimitError("payoff table cells", size ** 3, limit)

    index = {lab: i for i, lab in enumerate(labels)}
    cube = np.full((size, size, size), default, dtype=np.int64)
    assigned = set()
    for line_number, words in entries:
        try:
            triple = tuple(index[w] for w in words[:3])
        except KeyError as e:
            raise TableFormatError(line_number, f"unknown strategy {e.args[0]!r}") from None
        try:
            value = int(words[3])
        except ValueError:
            raise TableFormatError(line_number, f"payoff {words[3]!r} is not an integer") from None
        if triple in assigned:
            raise TableFormatError(line_number, "triple listed twice")
        assigned.add(triple)
        cube[triple] = value

    logger.info("Loaded table game: %d strategies, %d explicit triples", size, len(assigned))

    def payoff(x, y, z):
        return cube[x, y, z]

    return FiniteCellularGame(spec or file_spec("<text>"), labels, payoff)


TABLES_DIR = os.path.join(get_app_dir(), "tables")


def resolve_table_path(path: str) -> str:
    """Relative table paths fall back to the bundled tables/ directory."""
    if os.path.isabs(path) or os.path.exists(path):
        return path
    bundled = os.path.join(TABLES_DIR, path)
    return bundled if os.path.exists(bundled) else path


def load_game_table(path: str) -> FiniteCellularGame:
    text, err = read_text_file(resolve_table_path(path))
    if err:
        raise TableFormatError(0, err)
    return parse_game_table(text, file_spec(path))


# ---------------------------------------------------------------------------
# Builder

def game_size(spec: GameSpec) -> Optional[int]:
    """Strategy count implied by the spec (None for FILE)."""
    if spec.kind == "G0":
        return len(G0_LABELS)
    if spec.kind == "G1":
        return len(RESIDUE_LABELS)
    if spec.kind == "G2":
        return len(G2_STRATEGIES)
    if spec.kind == "GINF":
        return len(GINF_LABELS)
    if spec.kind == "GN":
        return gn_strategy_count(spec.n)
    if spec.kind == "PROD":
        total = 1
        for part in spec.parts:
            size = game_size(part)
            if size is None:
                return None
            total *= size
        return total
    return None


def _check_enumeration(spec):
    limit = get_setting("max_enumeration")
    if spec.kind == "GN" and spec.n > MAX_GN_PARAMETER:
        raise ResourceLimitError("GN parameter", spec.n, MAX_GN_PARAMETER)
    if spec.kind == "PROD":
        for part in spec.parts:
            _check_enumeration(part)
    size = game_size(spec)
    if size is not None and size > limit:
        raise ResourceLimitError(f"strategies of {spec}", size, limit)


@lru_cache(maxsize=64)
def _build_cached(spec: GameSpec) -> FiniteCellularGame:
    if spec.kind == "G0":
        return FiniteCellularGame(spec, G0_LABELS, _zero_payoff)
    if spec.kind == "GINF":
        return FiniteCellularGame(spec, GINF_LABELS, _zero_payoff)
    if spec.kind == "G1":
        return FiniteCellularGame(spec, RESIDUE_LABELS, _g1_payoff)
    if spec.kind == "G2":
        return FiniteCellularGame(spec, [str(s) for s in G2_STRATEGIES], _g2_payoff)
    if spec.kind == "GN":
        return _gn_game(spec)
    if spec.kind == "PROD":
        return ProductGame(spec, tuple(build_game(part) for part in spec.parts))
    raise GameSpecError(f"cannot build {spec}")


def _mentions_file(spec: GameSpec) -> bool:
    return spec.kind == "FILE" or any(_mentions_file(part) for part in spec.parts)


def build_game(spec: Union[GameSpec, str]) -> FiniteCellularGame:
    if isinstance(spec, str):
        spec = parse_game_spec(spec)
    _check_enumeration(spec)
    if spec.kind == "FILE":
        return load_game_table(spec.path)
    if _mentions_file(spec):
        # table files are re-read on every build, so products holding them are not cached
        game = ProductGame(spec, tuple(build_game(part) for part in spec.parts))
        limit = get_setting("max_enumeration")
        if game.strategy_count > limit:
            raise ResourceLimitError(f"strategies of {spec}", game.strategy_count, limit)
        return game
    game = _build_cached(spec)
    logger.debug("Built %r", game)
    return game
