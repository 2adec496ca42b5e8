"""Brute-force verifiers, independent of the LP-based solvers.

These deliberately avoid the solver code paths: the grid oracle evaluates
commitments on a simplex lattice, the one-dimensional oracle works out the
exact piecewise-affine geometry of two leader actions, and the clique
search is plain branch and bound on bitsets.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

from .game_model import (
    GameClassError,
    MixedStrategy,
    PolymatrixGame,
    enumerate_pure_ne,
    evaluate_commitment,
)

_GRID_GUARD = 10_000_000
_BREAKPOINT_TOL = 1e-12


@dataclass
class GridResult:
    value: float
    strategy: MixedStrategy
    skipped: int = 0  # grid points with no pure follower equilibrium


def _simplex_grid(k: int, m: int):
    """All length-m integer compositions of k, yielded lexicographically."""
    for cuts in itertools.combinations(range(k + m - 1), m - 1):
        prev = -1
        parts = []
        for c in cuts:
            parts.append(c - prev - 1)
            prev = c
        parts.append(k + m - 2 - prev)
        yield parts


def _leader_utility(game: PolymatrixGame, probs: np.ndarray, profile: dict[int, int]) -> float:
    total = 0.0
    for p in game.neighbors(game.leader):
        own, _ = game.edge_payoffs(game.leader, p)  # [a_n][a_p]
        total += float(probs @ own[:, profile[p]])
    return total


def grid_oracle(game: PolymatrixGame, k: int, mode: str = "pessimistic") -> GridResult:
    """Best leader value over all strategies with probabilities that are
    multiples of 1/k. A lower-bound witness for the true supremum.

    One-level trees are evaluated exactly per follower; general games use
    pure-equilibrium enumeration, skipping points where none exists (the
    worst / best equilibrium defines the point's value).
    """
    if mode not in ("pessimistic", "optimistic"):
        raise ValueError(f"unknown mode {mode!r}")
    if k < 1:
        raise ValueError("resolution must be positive")
    m_n = game.num_actions(game.leader)
    if comb(k + m_n - 1, m_n - 1) > _GRID_GUARD:
        raise ValueError(f"grid too large: C({k + m_n - 1},{m_n - 1}) points")

    tree = game.is_one_level_tree()
    best_v = -np.inf
    best_s = None
    skipped = 0
    for parts in _simplex_grid(k, m_n):
        probs = np.array(parts, dtype=float) / k
        s = MixedStrategy(game.leader, probs)
        if tree:
            v, _ = evaluate_commitment(game, s, mode)
        else:
            profiles = enumerate_pure_ne(game, s)
            if not profiles:
                skipped += 1
                continue
            vals = [_leader_utility(game, probs, a) for a in profiles]
            v = min(vals) if mode == "pessimistic" else max(vals)
        if v > best_v:
            best_v = v
            best_s = s
    if best_s is None:
        raise ValueError("no grid point admits a pure follower equilibrium")
    return GridResult(float(best_v), best_s, skipped)


def supremum_1d(game: PolymatrixGame, tol: float = _BREAKPOINT_TOL) -> tuple[float, bool]:
    """Exact pessimistic supremum for two leader actions.

    Parametrizes the commitment as (t, 1-t). Follower utilities are affine
    in t, so best-response sets are constant on open intervals between
    indifference points; refining the partition by crossings of the
    leader's own affine pieces makes the pessimistic value affine per
    interval. The supremum is then the max over interval endpoint limits
    and closed breakpoint values, and it is attained iff a closed point
    achieves it.
    """
    if not game.is_one_level_tree():
        raise GameClassError("one-dimensional oracle requires a one-level tree game")
    if game.num_actions(game.leader) != 2:
        raise ValueError("one-dimensional oracle requires exactly 2 leader actions")

    # follower/leader utilities as t * slope + intercept
    fol = {}
    lead = {}
    points = {0.0, 1.0}
    for p in game.followers:
        F = game.follower_matrix(p)
        L = game.leader_matrix(p)
        fol[p] = (F[:, 0] - F[:, 1], F[:, 1].copy())
        lead[p] = (L[:, 0] - L[:, 1], L[:, 1].copy())
        m_p = game.num_actions(p)
        for a, b in itertools.combinations(range(m_p), 2):
            for slope, inter in (fol[p], lead[p]):
                da = slope[a] - slope[b]
                db = inter[b] - inter[a]
                if da != 0.0:
                    t = db / da
                    if -tol < t < 1 + tol:
                        points.add(min(max(t, 0.0), 1.0))
    pts = sorted(points)
    merged = [pts[0]]
    for t in pts[1:]:
        if t - merged[-1] > tol:
            merged.append(t)
    pts = merged

    def closed_value(t: float) -> float:
        total = 0.0
        for p in game.followers:
            fs, fi = fol[p]
            u = fs * t + fi
            best = np.nonzero(u >= u.max() - 1e-11)[0]
            ls, li = lead[p]
            total += float((ls[best] * t + li[best]).min())
        return total

    def piece(lo: float, hi: float):
        """(slope, intercept) of the pessimistic value on the open interval."""
        mid = (lo + hi) / 2.0
        slope_sum = 0.0
        inter_sum = 0.0
        for p in game.followers:
            fs, fi = fol[p]
            u = fs * mid + fi
            best = np.nonzero(u >= u.max() - 1e-11)[0]
            ls, li = lead[p]
            lv = ls[best] * mid + li[best]
            a = int(best[int(np.argmin(lv))])
            slope_sum += ls[a]
            inter_sum += li[a]
        return slope_sum, inter_sum

    closed_max = max(closed_value(t) for t in pts)
    open_max = -np.inf
    for lo, hi in zip(pts, pts[1:]):
        slope, inter = piece(lo, hi)
        open_max = max(open_max, slope * lo + inter, slope * hi + inter)
    value = max(closed_max, open_max)
    attained = bool(closed_max >= value - 1e-12)
    return float(value), attained


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices 1..vertices."""

    vertices: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        norm = set()
        for a, b in self.edges:
            if a == b:
                raise ValueError(f"self-loop on vertex {a}")
            if not (1 <= a <= self.vertices and 1 <= b <= self.vertices):
                raise ValueError(f"edge ({a},{b}) out of range")
            norm.add((min(a, b), max(a, b)))
        object.__setattr__(self, "edges", tuple(sorted(norm)))

    def adjacency_bits(self) -> list[int]:
        adj = [0] * (self.vertices + 1)
        for a, b in self.edges:
            adj[a] |= 1 << b
            adj[b] |= 1 << a
        return adj

    def is_complete(self) -> bool:
        return len(self.edges) == self.vertices * (self.vertices - 1) // 2


def graph_from_json_dict(data: dict) -> Graph:
    try:
        return Graph(int(data["vertices"]), tuple((int(a), int(b)) for a, b in data["edges"]))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed graph JSON: {exc}") from exc


def graph_to_json_dict(graph: Graph) -> dict:
    return {"vertices": graph.vertices, "edges": [list(e) for e in graph.edges]}


def max_clique_bruteforce(graph: Graph) -> int:
    """Exact maximum clique size, branch and bound on bitsets (<= 20 vertices)."""
    r = graph.vertices
    if r > 20:
        raise ValueError("clique search capped at 20 vertices")
    if r == 0:
        return 0
    adj = graph.adjacency_bits()
    best = 1

    def expand(cand: int, size: int):
        nonlocal best
        if cand == 0:
            best = max(best, size)
            return
        if size + bin(cand).count("1") <= best:
            return
        while cand:
            v = cand & -cand
            vi = v.bit_length() - 1
            cand ^= v
            if size + bin(cand).count("1") + 1 <= best:
                return
            expand(cand & adj[vi], size + 1)

    full = ((1 << (r + 1)) - 1) & ~1  # vertices 1..r
    expand(full, 0)
    return best
