"""
Equilibrium engine for finite cellular games.

A profile is a Nash equilibrium iff every consecutive triple lies in the
best-response relation T. Pairs of adjacent strategies form a directed graph
(x, y) -> (y, z) for (x, y, z) in T; equilibria are its bi-infinite walks, and
the core B keeps the nodes lying on one. Interchangeability, equilibrium
existence and constrained search all reduce to reachability inside B.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Optional

import numpy as np
import psutil
import networkx as nx

from constants import PROFILE_HEADER, WINDOW_HEADER
from errors import PreconditionError, ResourceLimitError, GameSpecError
from games import FiniteCellularGame, ProductGame
from settings import get_setting

logger = logging.getLogger(__name__)

# cells evaluated per payoff call while building the relation
SLAB_CELLS = 1 << 22


# ---------------------------------------------------------------------------
# Best-response relation

def best_response_membership(game: FiniteCellularGame, x, y, z) -> np.ndarray:
    """(x, y, z) in T, elementwise: y earns the best payoff available between x and z."""
    return game.payoff_vec(x, y, z) == game.max_payoff(x, z)


@dataclass(frozen=True, eq=False)
class TransferRelation:
    """Sorted keys x*S*S + y*S + z of the best-response triples."""
    game: FiniteCellularGame
    keys: np.ndarray

    @property
    def size(self) -> int:
        return self.game.strategy_count

    def __len__(self):
        return len(self.keys)

    def contains(self, x, y, z) -> bool:
        s = self.size
        key = (int(x) * s + int(y)) * s + int(z)
        pos = np.searchsorted(self.keys, key)
        return bool(pos < len(self.keys) and self.keys[pos] == key)

    def successors(self, x, y) -> np.ndarray:
        """{z : (x, y, z) in T}."""
        s = self.size
        base = (int(x) * s + int(y)) * s
        lo, hi = np.searchsorted(self.keys, [base, base + s])
        return self.keys[lo:hi] - base

    def triples(self) -> np.ndarray:
        s = self.size
        return np.stack([self.keys // (s * s), (self.keys // s) % s, self.keys % s], axis=1)


def _warn_if_memory_short(what, nbytes):
    available = psutil.virtual_memory().available
    if nbytes > available // 2:
        logger.warning("%s needs about %d MiB; %d MiB available", what, nbytes >> 20, available >> 20)


def _check_strategy_cap(game, max_strategies):
    limit = get_setting("max_strategies") if max_strategies is None else max_strategies
    if game.strategy_count > limit:
        raise ResourceLimitError(f"strategies of {game.spec}", game.strategy_count, limit)


@lru_cache(maxsize=16)
def _relation(game: FiniteCellularGame) -> TransferRelation:
    s = game.strategy_count
    ids = np.arange(s, dtype=np.int64)
    _warn_if_memory_short(f"relation of {game.spec}", min(s ** 3, SLAB_CELLS) * 8 * 4)

    # y-chunk so that a payoff call never evaluates more than SLAB_CELLS cells
    chunk = max(1, SLAB_CELLS // s)
    limit = get_setting("max_transfer_triples")
    parts = []
    total = 0
    for x in range(s):
        best = game.max_payoff(x, ids)
        for y0 in range(0, s, chunk):
            ys = ids[y0:y0 + chunk]
            values = game.payoff_vec(x, ys[:, None], ids[None, :])
            y_hit, z_hit = np.nonzero(values == best[None, :])
            if len(y_hit):
                parts.append((x * s + ys[y_hit]) * s + z_hit)
                total += len(y_hit)
        if total > limit:
            raise ResourceLimitError("best-response triples", total, limit)

    keys = np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)
    logger.info("Relation of %s: %d of %d triples", game.spec, len(keys), s ** 3)
    return TransferRelation(game, keys)


def best_response_relation(game: FiniteCellularGame, max_strategies: int = None) -> TransferRelation:
    _check_strategy_cap(game, max_strategies)
    return _relation(game)


# ---------------------------------------------------------------------------
# Core

@dataclass(frozen=True, eq=False)
class CoreGraph:
    """Pair graph restricted to nodes on bi-infinite walks; node id = x*S + y."""
    size: int
    alive: np.ndarray
    src: np.ndarray
    dst: np.ndarray

    def __len__(self):
        return int(self.alive.sum())

    @property
    def nodes(self) -> np.ndarray:
        return np.flatnonzero(self.alive)

    def head(self, node):
        return node // self.size

    def pair(self, node) -> tuple:
        return int(node) // self.size, int(node) % self.size

    def contains_pair(self, x, y) -> bool:
        return bool(self.alive[int(x) * self.size + int(y)])

    def heads(self) -> np.ndarray:
        """Sorted distinct first coordinates of core nodes."""
        return np.unique(self.nodes // self.size)

    def step(self, frontier: np.ndarray) -> np.ndarray:
        """Nodes one edge after the frontier."""
        result = np.zeros_like(frontier)
        result[self.dst[frontier[self.src]]] = True
        return result

    def head_mask(self, s) -> np.ndarray:
        mask = np.zeros(self.size * self.size, dtype=bool)
        mask[int(s) * self.size:(int(s) + 1) * self.size] = True
        return mask & self.alive


def _pair_edges(relation: TransferRelation):
    s = relation.size
    return relation.keys // s, relation.keys % (s * s)


def _prune(num_nodes, src, dst):
    """Repeatedly drop nodes without a live in-edge or out-edge."""
    alive = np.ones(num_nodes, dtype=bool)
    rounds = 0
    while True:
        live = alive[src] & alive[dst]
        has_out = np.bincount(src[live], minlength=num_nodes) > 0
        has_in = np.bincount(dst[live], minlength=num_nodes) > 0
        pruned = alive & has_out & has_in
        rounds += 1
        if np.array_equal(pruned, alive):
            break
        alive = pruned
    logger.debug("Pruning converged after %d rounds", rounds)
    return alive


def _scc_liveness(num_nodes, src, dst):
    """Nodes that reach a cycle and are reached from one, via SCC condensation."""
    graph = nx.DiGraph()
    graph.add_nodes_from(range(num_nodes))
    graph.add_edges_from(zip(src.tolist(), dst.tolist()))
    dag = nx.condensation(graph)
    members = dag.graph["mapping"]

    cyclic = {}
    for c in dag.nodes:
        component = dag.nodes[c]["members"]
        if len(component) > 1:
            cyclic[c] = True
        else:
            node = next(iter(component))
            cyclic[c] = graph.has_edge(node, node)
    order = list(nx.topological_sort(dag))
    forward = {}
    for c in reversed(order):
        forward[c] = cyclic[c] or any(forward[d] for d in dag.successors(c))
    backward = {}
    for c in order:
        backward[c] = cyclic[c] or any(backward[p] for p in dag.predecessors(c))

    alive = np.zeros(num_nodes, dtype=bool)
    for node, c in members.items():
        alive[node] = forward[c] and backward[c]
    return alive


@lru_cache(maxsize=16)
def _core(relation: TransferRelation, method: str) -> CoreGraph:
    s = relation.size
    src, dst = _pair_edges(relation)
    if method == "prune":
        alive = _prune(s * s, src, dst)
    elif method == "scc":
        alive = _scc_liveness(s * s, src, dst)
    else:
        raise PreconditionError(f"unknown core method {method!r}")
    keep = alive[src] & alive[dst]
    graph = CoreGraph(s, alive, src[keep], dst[keep])
    logger.info("Core of %s: %d of %d pairs", relation.game.spec, len(graph), s * s)
    return graph


def core(relation: TransferRelation, method: str = "prune") -> CoreGraph:
    return _core(relation, method)


def game_core(game: FiniteCellularGame, max_strategies: int = None) -> CoreGraph:
    return core(best_response_relation(game, max_strategies))


# ---------------------------------------------------------------------------
# Equilibrium queries

def _componentwise(game, monolithic):
    return isinstance(game, ProductGame) and not monolithic


def has_equilibrium(game: FiniteCellularGame, monolithic: bool = False,
                    max_strategies: int = None) -> bool:
    if _componentwise(game, monolithic):
        return all(has_equilibrium(part, False, max_strategies) for part in game.components)
    return len(game_core(game, max_strategies)) > 0


def realizable(game: FiniteCellularGame, monolithic: bool = False,
               max_strategies: int = None) -> frozenset:
    """Strategies played at position 0 by some equilibrium."""
    if _componentwise(game, monolithic):
        per_part = [sorted(realizable(part, False, max_strategies)) for part in game.components]
        if not all(per_part):
            return frozenset()
        combos = [()]
        for options in per_part:
            combos = [prefix + (o,) for prefix in combos for o in options]
        return frozenset(game.combine(c) for c in combos)
    return frozenset(int(h) for h in game_core(game, max_strategies).heads())


def reach_heads(graph: CoreGraph, s: int, d: int) -> np.ndarray:
    """Bool mask over strategies t with a d-edge core path from head s to head t."""
    frontier = graph.head_mask(s)
    for _ in range(d):
        if not frontier.any():
            break
        frontier = graph.step(frontier)
    mask = np.zeros(graph.size, dtype=bool)
    mask[np.flatnonzero(frontier) // graph.size] = True
    return mask


def path_exists(graph: CoreGraph, s: int, t: int, d: int) -> bool:
    if d < 1:
        raise PreconditionError(f"path length must be positive, got {d}")
    return bool(reach_heads(graph, s, d)[int(t)])


def interchangeable(game: FiniteCellularGame, a: int, b: int, monolithic: bool = False,
                    max_strategies: int = None) -> bool:
    """Whether any two equilibria can be merged to agree with the first at a and the second at b."""
    if _componentwise(game, monolithic):
        if not has_equilibrium(game, False, max_strategies):
            return True
        return all(interchangeable(part, a, b, False, max_strategies) for part in game.components)

    graph = game_core(game, max_strategies)
    heads = graph.heads()
    if len(heads) == 0:
        return True
    if a == b:
        return len(heads) <= 1
    d = abs(a - b)
    for s in heads:
        if not reach_heads(graph, s, d)[heads].all():
            logger.debug("Head %s misses a realizable strategy at distance %d", game.label(s), d)
            return False
    return True


# ---------------------------------------------------------------------------
# Profiles and windows

def _primitive_root(word: tuple) -> tuple:
    size = len(word)
    for period in range(1, size + 1):
        if size % period == 0 and word[:period] * (size // period) == word:
            return word[:period]
    return word


@dataclass(frozen=True)
class EventuallyPeriodicProfile:
    """
    Bi-infinite profile: mid at positions anchor.., right repeating after it,
    left repeating before anchor.
    """
    anchor: int
    left: tuple
    mid: tuple
    right: tuple

    def __post_init__(self):
        object.__setattr__(self, "left", tuple(self.left))
        object.__setattr__(self, "mid", tuple(self.mid))
        object.__setattr__(self, "right", tuple(self.right))
        if not self.left or not self.right:
            raise PreconditionError("periodic parts must be nonempty")

    @classmethod
    def constant(cls, value, anchor=0):
        return cls(anchor, (value,), (), (value,))

    def value(self, i: int):
        offset = i - self.anchor
        if offset < 0:
            return self.left[offset % len(self.left)]
        if offset < len(self.mid):
            return self.mid[offset]
        return self.right[(offset - len(self.mid)) % len(self.right)]

    __getitem__ = value

    def window(self, start: int, stop: int) -> list:
        return [self.value(i) for i in range(start, stop)]

    def checking_region(self) -> tuple:
        """Middle positions whose triples cover every triple of the profile."""
        return (self.anchor - 2 * len(self.left) - 2,
                self.anchor + len(self.mid) + 2 * len(self.right) + 2)

    def map(self, fn: Callable) -> "EventuallyPeriodicProfile":
        return EventuallyPeriodicProfile(
            self.anchor, tuple(map(fn, self.left)), tuple(map(fn, self.mid)), tuple(map(fn, self.right)),
        )

    def normalized(self) -> "EventuallyPeriodicProfile":
        """Primitive periods, with mid trimmed where the periodic parts already cover it."""
        left = _primitive_root(self.left)
        right = _primitive_root(self.right)
        mid = list(self.mid)
        anchor = self.anchor
        # absorb the leading mid cell into the left period when it continues it
        while mid and mid[0] == left[0]:
            left = left[1:] + (mid.pop(0),)
            anchor += 1
        while mid and mid[-1] == right[-1]:
            right = (mid.pop(),) + right[:-1]
        return EventuallyPeriodicProfile(anchor, left, tuple(mid), right)


def assemble_profile(cells: dict, left_end: int, left_period: int,
                     right_start: int, right_period: int) -> EventuallyPeriodicProfile:
    """
    Profile from known cells over a contiguous range, where positions up to
    left_end repeat with left_period and positions from right_start repeat
    with right_period.
    """
    lo, hi = min(cells), max(cells)

    def at(p):
        if p < lo:
            p += -(-(lo - p) // left_period) * left_period
        elif p > hi:
            p -= -(-(p - hi) // right_period) * right_period
        return cells[p]

    anchor = min(left_end + 1, right_start)
    left = tuple(at(p) for p in range(anchor - left_period, anchor))
    mid = tuple(at(p) for p in range(anchor, right_start))
    right = tuple(at(p) for p in range(right_start, right_start + right_period))
    return EventuallyPeriodicProfile(anchor, left, mid, right).normalized()


@dataclass(frozen=True)
class ProfileWindow:
    start: int
    cells: tuple

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(self.cells))
        if not self.cells:
            raise PreconditionError("window must hold at least one cell")

    def __len__(self):
        return len(self.cells)


def verify_profile(game: FiniteCellularGame, profile: EventuallyPeriodicProfile) -> bool:
    lo, hi = profile.checking_region()
    cells = np.array(profile.window(lo - 1, hi + 2), dtype=np.int64)
    if cells.size and (cells.min() < 0 or cells.max() >= game.strategy_count):
        return False
    return bool(best_response_membership(game, cells[:-2], cells[1:-1], cells[2:]).all())


def verify_window(game: FiniteCellularGame, window: ProfileWindow, mode: str = "interior",
                  max_strategies: int = None) -> bool:
    cells = np.array(window.cells, dtype=np.int64)
    if cells.min() < 0 or cells.max() >= game.strategy_count:
        return False
    if len(cells) >= 3 and not best_response_membership(game, cells[:-2], cells[1:-1], cells[2:]).all():
        return False
    if mode == "interior":
        return True
    if mode != "extendable":
        raise PreconditionError(f"unknown window mode {mode!r}")
    graph = game_core(game, max_strategies)
    if len(cells) == 1:
        return int(cells[0]) in set(graph.heads().tolist())
    return graph.contains_pair(cells[0], cells[1]) and graph.contains_pair(cells[-2], cells[-1])


def enumerate_ne_windows(game: FiniteCellularGame, length: int, max_windows: int = None,
                         max_strategies: int = None) -> list:
    """Every window of the given length that extends to a full equilibrium, sorted by labels."""
    if length < 1:
        raise PreconditionError(f"window length must be positive, got {length}")
    limit = get_setting("max_windows") if max_windows is None else max_windows
    graph = game_core(game, max_strategies)
    s = graph.size

    if length == 1:
        rows = graph.heads()[:, None]
    else:
        nodes = graph.nodes
        rows = np.stack([nodes // s, nodes % s], axis=1)
        order = np.argsort(graph.src, kind="stable")
        src_sorted, dst_sorted = graph.src[order], graph.dst[order]
        for _ in range(length - 2):
            last = rows[:, -2] * s + rows[:, -1]
            lo = np.searchsorted(src_sorted, last, side="left")
            hi = np.searchsorted(src_sorted, last, side="right")
            counts = hi - lo
            if counts.sum() > limit:
                raise ResourceLimitError("windows", int(counts.sum()), limit)
            parent = np.repeat(np.arange(len(rows)), counts)
            # k-th edge of each parent: lo[parent] + rank within the parent's block
            rank = np.arange(len(parent)) - np.repeat(np.cumsum(counts) - counts, counts)
            edge = np.repeat(lo, counts) + rank
            rows = np.concatenate([rows[parent], (dst_sorted[edge] % s)[:, None]], axis=1)
    if len(rows) > limit:
        raise ResourceLimitError("windows", len(rows), limit)

    windows = [ProfileWindow(0, tuple(int(v) for v in row)) for row in rows]
    windows.sort(key=lambda w: tuple(game.label(c) for c in w.cells))
    return windows


# ---------------------------------------------------------------------------
# Constrained search

def _smallest_predecessor(graph, order, dst_sorted, node, allowed):
    lo, hi = np.searchsorted(dst_sorted, [node, node + 1])
    candidates = graph.src[order[lo:hi]]
    candidates = candidates[allowed[candidates]]
    return int(candidates.min()) if len(candidates) else None


def _walk_to_cycle(start, choose):
    """Follow choose() from start until a node repeats; returns (walk, cycle start index)."""
    walk = [start]
    seen = {start: 0}
    while True:
        nxt = choose(walk[-1])
        if nxt in seen:
            return walk, seen[nxt]
        seen[nxt] = len(walk)
        walk.append(nxt)


def constrained_equilibrium(game: FiniteCellularGame, constraints: Iterable, max_constraints: int = None,
                            max_strategies: int = None) -> Optional[EventuallyPeriodicProfile]:
    """An equilibrium playing strategy s at each constrained position, or None if there is none."""
    constraints = sorted((int(p), int(s)) for p, s in constraints)
    limit = get_setting("max_constraints") if max_constraints is None else max_constraints
    if len(constraints) > limit:
        raise ResourceLimitError("constraints", len(constraints), limit)
    positions = [p for p, _ in constraints]
    if len(set(positions)) != len(positions):
        raise PreconditionError("constrained positions must be distinct")
    for _, s in constraints:
        if not 0 <= s < game.strategy_count:
            raise PreconditionError(f"strategy id {s} out of range")

    graph = game_core(game, max_strategies)
    if len(graph) == 0:
        return None
    num_nodes = graph.size * graph.size
    if not constraints:
        constraints = [(0, int(graph.heads()[0]))]
    first = constraints[0][0]
    span = constraints[-1][0] - first
    if (span + 1) * num_nodes > get_setting("max_table_cells"):
        raise ResourceLimitError("constrained layers", (span + 1) * num_nodes, get_setting("max_table_cells"))

    # forward layers: nodes (e_i, e_i+1) consistent with every constraint up to i
    required = dict(constraints)
    layers = []
    for offset in range(span + 1):
        layer = graph.step(layers[-1]) if layers else graph.alive.copy()
        if first + offset in required:
            layer &= graph.head_mask(required[first + offset])
        if not layer.any():
            logger.info("No equilibrium meets the constraints (dead at position %d)", first + offset)
            return None
        layers.append(layer)

    order = np.argsort(graph.dst, kind="stable")
    dst_sorted = graph.dst[order]
    path = [int(np.flatnonzero(layers[-1])[0])]
    for layer in reversed(layers[:-1]):
        path.append(_smallest_predecessor(graph, order, dst_sorted, path[-1], layer))
    path.reverse()

    src_order = np.argsort(graph.src, kind="stable")
    src_sorted = graph.src[src_order]

    def next_node(node):
        lo, hi = np.searchsorted(src_sorted, [node, node + 1])
        return int(graph.dst[src_order[lo:hi]].min())

    def previous_node(node):
        return _smallest_predecessor(graph, order, dst_sorted, node, graph.alive)

    right_walk, right_cycle = _walk_to_cycle(path[-1], next_node)
    left_walk, left_cycle = _walk_to_cycle(path[0], previous_node)

    s = graph.size
    last = constraints[-1][0]
    heads = {}
    for offset, node in enumerate(path):
        heads[first + offset] = int(node) // s
    for offset, node in enumerate(right_walk):
        heads[last + offset] = int(node) // s
    for offset, node in enumerate(left_walk):
        heads[first - offset] = int(node) // s

    profile = assemble_profile(
        heads,
        left_end=first - left_cycle, left_period=len(left_walk) - left_cycle,
        right_start=last + right_cycle, right_period=len(right_walk) - right_cycle,
    )
    logger.debug("Constrained equilibrium: %s", format_profile(profile, game.label))
    return profile


# ---------------------------------------------------------------------------
# Text codecs

def split_top_level(text: str, separator: str) -> list:
    """Split on separator outside square brackets (matrix labels hold ',' and ';')."""
    parts, depth, current = [], 0, []
    for c in text:
        if c == "[":
            depth += 1
        elif c == "]":
            depth -= 1
        if c == separator and depth == 0:
            parts.append("".join(current))
            current = []
        else:
            current.append(c)
    parts.append("".join(current))
    return parts


def _format_word(word, label):
    return ",".join(label(v) for v in word)


def format_profile(profile: EventuallyPeriodicProfile, label: Callable = str) -> str:
    return (f"{PROFILE_HEADER}; anchor: {profile.anchor}; left: {_format_word(profile.left, label)}; "
            f"mid: {_format_word(profile.mid, label)}; right: {_format_word(profile.right, label)}")


def format_window(window: ProfileWindow, label: Callable = str) -> str:
    return f"{WINDOW_HEADER}; start: {window.start}; cells: {_format_word(window.cells, label)}"


def _fields(text, header, names):
    parts = [p.strip() for p in split_top_level(text.strip(), ";")]
    if not parts or parts[0] != header:
        raise GameSpecError(f"expected {header!r} header")
    fields = {}
    for part in parts[1:]:
        match = re.fullmatch(r'(\w+):\s*(.*)', part, flags=re.S)
        if not match or match.group(1) not in names or match.group(1) in fields:
            raise GameSpecError(f"bad field {part!r}")
        fields[match.group(1)] = match.group(2).strip()
    missing = [n for n in names if n not in fields]
    if missing:
        raise GameSpecError(f"missing field(s) {', '.join(missing)}")
    return fields


def _parse_word(text, decode):
    if not text:
        return ()
    return tuple(decode(item.strip()) for item in split_top_level(text, ","))


def _parse_int(text):
    try:
        return int(text)
    except ValueError:
        raise GameSpecError(f"expected an integer, got {text!r}") from None


def parse_profile(text: str, decode: Callable = int) -> EventuallyPeriodicProfile:
    fields = _fields(text, PROFILE_HEADER, ("anchor", "left", "mid", "right"))
    try:
        return EventuallyPeriodicProfile(
            _parse_int(fields["anchor"]), _parse_word(fields["left"], decode),
            _parse_word(fields["mid"], decode), _parse_word(fields["right"], decode),
        )
    except PreconditionError as e:
        raise GameSpecError(str(e)) from e


def parse_window(text: str, decode: Callable = int) -> ProfileWindow:
    fields = _fields(text, WINDOW_HEADER, ("start", "cells"))
    try:
        return ProfileWindow(_parse_int(fields["start"]), _parse_word(fields["cells"], decode))
    except PreconditionError as e:
        raise GameSpecError(str(e)) from e
