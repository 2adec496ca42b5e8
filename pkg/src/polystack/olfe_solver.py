"""Optimistic leader-follower equilibrium via one LP per follower profile.

Works for any polymatrix game with followers restricted to pure strategies:
the LP for a profile maximizes the leader's expected utility over
commitments that make the profile a pure Nash equilibrium of the follower
game (weak inequalities, ties broken in the leader's favor). For one-level
trees the equilibrium constraints reduce to per-follower best responses.

Only profiles whose inducibility region is full-dimensional enter the
outer maximization, mirroring the region enumeration of the pessimistic
algorithm; measure-zero knife-edge regions are discarded.
"""

from __future__ import annotations

import itertools
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import lp_core
from .game_model import MixedStrategy, PolymatrixGame
from .plfe_exact import EPS_TOL, LfeResult, SolverFailure

VALUE_TIE_TOL = 1e-9


class NoPureCommitmentError(RuntimeError):
    """No commitment induces any pure follower equilibrium (general games)."""


class _OlfeBlocks:
    """Per-game data: leader objective pieces and deviation constraints."""

    def __init__(self, game: PolymatrixGame):
        self.game = game
        self.followers = game.followers
        self.m_n = game.num_actions(game.leader)
        self.leader_mat = {}  # follower -> U_{n,p} [a_p][a_n], zero if no edge
        self.fol_mat = {}  # follower -> U_{p,n} [a_p][a_n], zero if no edge
        self.ff = {}  # (p, q) both followers -> p's payoff [a_p][a_q]
        for p in self.followers:
            m_p = game.num_actions(p)
            self.leader_mat[p] = np.zeros((m_p, self.m_n))
            self.fol_mat[p] = np.zeros((m_p, self.m_n))
            for q in game.neighbors(p):
                own, other = game.edge_payoffs(p, q)
                if q == game.leader:
                    self.fol_mat[p] = own
                    self.leader_mat[p] = other
                else:
                    self.ff[(p, q)] = own

    def ff_utility(self, p: int, a_p: int, profile: dict[int, int]) -> float:
        total = 0.0
        for q in self.followers:
            if (p, q) in self.ff:
                total += self.ff[(p, q)][a_p, profile[q]]
        return total

    def objective(self, profile: dict[int, int]) -> np.ndarray:
        c = np.zeros(self.m_n)
        for p in self.followers:
            c += self.leader_mat[p][profile[p]]
        return c

    def deviation_rows(self, profile: dict[int, int]):
        """(vector, constant) per non-equivalent deviation: the profile is a
        weak NE at s iff vector @ s + constant >= 0 for every row."""
        rows = []
        for p in self.followers:
            a_p = profile[p]
            base_ff = self.ff_utility(p, a_p, profile)
            for a2 in range(self.game.num_actions(p)):
                if a2 == a_p:
                    continue
                dv = self.fol_mat[p][a_p] - self.fol_mat[p][a2]
                d0 = base_ff - self.ff_utility(p, a2, profile)
                rows.append((dv, d0, (dv == 0.0).all() and d0 == 0.0))
        return rows


def olfe_profile_lp(
    game: PolymatrixGame, profile: dict[int, int]
) -> tuple[float, MixedStrategy] | None:
    """Best commitment making the profile a weak pure NE, or None when the
    profile cannot be induced by any commitment."""
    blocks = _OlfeBlocks(game)
    return _profile_lp(blocks, profile)


def _profile_lp(blocks: _OlfeBlocks, profile: dict[int, int]):
    m_n = blocks.m_n
    rows = [(dv, d0) for dv, d0, equiv in blocks.deviation_rows(profile) if not equiv]
    A_ub = np.array([-dv for dv, _ in rows]) if rows else None
    b_ub = np.array([d0 for _, d0 in rows]) if rows else None
    A_eq = np.ones((1, m_n))
    res = lp_core.maximize(blocks.objective(profile), A_ub, b_ub, A_eq, [1.0])
    if res.status is lp_core.LpStatus.INFEASIBLE:
        return None
    if res.status is not lp_core.LpStatus.OPTIMAL:
        raise SolverFailure(f"optimistic profile LP ended with {res.status}")
    return float(res.objective), MixedStrategy(blocks.game.leader, res.x)


def profile_region_epsilon(game: PolymatrixGame, profile: dict[int, int]) -> float:
    """Max strict margin over commitments for the profile's NE constraints;
    zero means the inducibility region has empty interior."""
    blocks = _OlfeBlocks(game)
    return _region_eps(blocks, profile)


def _region_eps(blocks: _OlfeBlocks, profile: dict[int, int]) -> float:
    m_n = blocks.m_n
    rows = [(dv, d0) for dv, d0, equiv in blocks.deviation_rows(profile) if not equiv]
    if not rows:
        return 1.0
    k = len(rows)
    c = np.zeros(m_n + 1)
    c[-1] = 1.0
    A_ub = np.zeros((k + 1, m_n + 1))
    b_ub = np.zeros(k + 1)
    for i, (dv, d0) in enumerate(rows):
        A_ub[i, :m_n] = -dv
        A_ub[i, -1] = 1.0
        b_ub[i] = d0
    A_ub[k, -1] = 1.0
    b_ub[k] = 1.0
    A_eq = np.zeros((1, m_n + 1))
    A_eq[0, :m_n] = 1.0
    res = lp_core.maximize(c, A_ub, b_ub, A_eq, [1.0])
    if res.status is lp_core.LpStatus.INFEASIBLE:
        return 0.0
    if res.status is not lp_core.LpStatus.OPTIMAL:
        raise SolverFailure(f"region-interior LP ended with {res.status}")
    return float(res.objective)


def solve_olfe(
    game: PolymatrixGame,
    time_limit: float | None = None,
    threads: int = 1,
) -> LfeResult:
    """Optimistic equilibrium: max over inducible follower profiles of the
    per-profile LP. The optimum is always attained."""
    blocks = _OlfeBlocks(game)
    followers = game.followers
    combos = list(itertools.product(*[range(game.num_actions(p)) for p in followers]))
    deadline = None if time_limit is None else time.perf_counter() + time_limit

    def work(combo):
        profile = dict(zip(followers, combo))
        if _region_eps(blocks, profile) <= EPS_TOL:
            return None
        got = _profile_lp(blocks, profile)
        if got is None:
            return None
        v, s = got
        return (v, combo, s)

    results = []
    processed = 0
    truncated = False
    if threads <= 1:
        for combo in combos:
            if deadline is not None and time.perf_counter() > deadline and results:
                truncated = True
                break
            r = work(combo)
            if r is not None:
                results.append(r)
            processed += 1
    else:
        chunk = 256
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for start in range(0, len(combos), chunk):
                if deadline is not None and time.perf_counter() > deadline and results:
                    truncated = True
                    break
                batch = combos[start : start + chunk]
                for r in pool.map(work, batch):
                    if r is not None:
                        results.append(r)
                processed += len(batch)

    if not results:
        if game.is_one_level_tree():
            raise SolverFailure("one-level tree games always admit an inducible profile")
        raise NoPureCommitmentError(
            "no commitment makes any follower profile a pure Nash equilibrium"
        )
    best_v = max(r[0] for r in results)
    v, combo, s = next(r for r in results if r[0] >= best_v - VALUE_TIE_TOL)
    return LfeResult(
        value=float(v),
        strategy=s,
        profile=dict(zip(followers, combo)),
        attained=True,
        alpha=0.0,
        anytime_complete=not truncated,
        profiles_enumerated=processed,
        diagnostics={"inducible_profiles": len(results)},
    )
