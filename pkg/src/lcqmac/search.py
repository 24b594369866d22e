"""Minimising the auxiliary-qudit count over local precoders.

The quantity minimised is ``c(P) = rank(sum_s V_s P_s V_s^T)`` over invertible
``P_s``.  Candidates are scored in numpy batches: each server's contributions
``V_s P V_s^T`` are tabulated once, combinations are summed and ranked in
lockstep by :func:`~lcqmac.matf.batched_rank`.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .construct import LCProblem
from .errors import BudgetExceeded, DimensionMismatch, SingularPrecoder
from .gf import FieldSpec
from .matf import MatF, batched_rank, hstack, mat_rank, matmul_array

DEFAULT_BUDGET = 200_000
RANDOM_SAMPLES = 10_000
LOCAL_ROUNDS = 3
_CHUNK = 16_384

STRATEGIES = ("exhaustive", "diagonal", "random", "portfolio")


def objective_c(problem: LCProblem, precoders: Sequence[MatF]) -> int:
    if len(precoders) != problem.S:
        raise DimensionMismatch(f"{len(precoders)} precoders for {problem.S} servers")
    field = problem.field
    total = MatF.zeros(field, problem.K, problem.K)
    for s, (V_s, P) in enumerate(zip(problem.blocks, precoders), start=1):
        if P.shape != (V_s.cols, V_s.cols) or mat_rank(P) < V_s.cols:
            raise SingularPrecoder(f"server {s}: precoder is not an invertible {V_s.cols}x{V_s.cols} matrix")
        total = total + V_s @ P @ V_s.T
    return mat_rank(total)


def gl_order(m: int, d: int) -> int:
    """``|GL(m, d)|``."""
    return math.prod(d**m - d**i for i in range(m))


@functools.lru_cache(maxsize=64)
def _gl_elements(field: FieldSpec, m: int) -> np.ndarray:
    d = field.d
    n = d ** (m * m)
    # Row t of ``digits`` is the base-d expansion of t, most significant first.
    t = np.arange(n, dtype=np.int64)
    digits = np.empty((n, m * m), dtype=np.int64)
    for k in range(m * m - 1, -1, -1):
        digits[:, k] = t % d
        t //= d
    mats = digits.reshape(n, m, m)
    keep = batched_rank(field, mats) == m
    out = mats[keep]
    out.setflags(write=False)
    return out


def enumerate_gl(field: FieldSpec, m: int) -> np.ndarray:
    """All invertible ``m x m`` matrices, ascending by flattened base-d encoding."""
    return _gl_elements(field, m)


def _diagonal_elements(field: FieldSpec, m: int) -> np.ndarray:
    diags = np.array(list(itertools.product(range(1, field.d), repeat=m)), dtype=np.int64)
    out = np.zeros((len(diags), m, m), dtype=np.int64)
    out[:, np.arange(m), np.arange(m)] = diags
    return out


def _contributions(problem: LCProblem, s: int, mats: np.ndarray) -> np.ndarray:
    field = problem.field
    V = problem.blocks[s].array
    return matmul_array(field, matmul_array(field, V[None], mats), V.T[None])


def _sum_terms(field: FieldSpec, terms: Sequence[np.ndarray]) -> np.ndarray:
    acc = terms[0]
    for t in terms[1:]:
        acc = field.add(acc, t)
    return acc


def _scan(problem: LCProblem, cands: Sequence[np.ndarray], stop_at: int) -> tuple[int, tuple[int, ...], int, bool]:
    """Lexicographic scan of the product of per-server candidate lists.

    Returns ``(best_c, best_index_tuple, evaluated, stopped_early)``; the
    first minimiser in scan order wins ties.
    """
    field = problem.field
    contribs = [_contributions(problem, s, c) for s, c in enumerate(cands)]
    sizes = tuple(len(c) for c in cands)
    total = math.prod(sizes)
    best_c, best_idx = problem.K + 1, (0,) * len(sizes)
    evaluated = 0
    for start in range(0, total, _CHUNK):
        flat = np.arange(start, min(start + _CHUNK, total))
        idx = np.unravel_index(flat, sizes)
        sums = _sum_terms(field, [contribs[s][idx[s]] for s in range(len(sizes))])
        ranks = batched_rank(field, sums)
        evaluated += len(flat)
        k = int(np.argmin(ranks))
        if ranks[k] < best_c:
            best_c = int(ranks[k])
            best_idx = tuple(int(i[k]) for i in idx)
            if best_c <= stop_at:
                return best_c, best_idx, evaluated, True
    return best_c, best_idx, evaluated, False


def _as_mats(field: FieldSpec, arrays: Sequence[np.ndarray]) -> list[MatF]:
    return [MatF(field, a) for a in arrays]


def exhaustive_size(problem: LCProblem) -> int:
    return math.prod(gl_order(w, problem.field.d) for w in problem.widths)


def _exhaustive(problem: LCProblem, budget: int):
    total = exhaustive_size(problem)
    if total > budget:
        raise BudgetExceeded(total, budget)
    cands = [enumerate_gl(problem.field, w) for w in problem.widths]
    lb = lower_bound_c(problem)
    c, idx, evaluated, _ = _scan(problem, cands, lb)
    return c, _as_mats(problem.field, [cand[i] for cand, i in zip(cands, idx)]), evaluated


def brute_force_c(problem: LCProblem, budget: int = DEFAULT_BUDGET) -> tuple[int, list[MatF]]:
    """Exact minimum of the auxiliary-qudit count by enumerating ``GL(m_s, d)``.

    The scan stops once the lower bound of :func:`lower_bound_c` is met, which
    leaves both the minimum and the lexicographically first minimiser intact.
    """
    c, precoders, _ = _exhaustive(problem, budget)
    return c, precoders


def lower_bound_c(problem: LCProblem) -> int:
    """``max_A (m_A - rank V_{not A})`` over server sets ``A`` with ``V_A`` of full column rank.

    For such ``A`` the partial sum over ``A`` has rank exactly ``m_A`` for
    every choice of precoders, while the remaining servers contribute rank at
    most ``rank(V_{not A})``.  Sets are enumerated exhaustively for ``S <= 12``
    and restricted to at most two servers beyond that.
    """
    S = problem.S
    max_size = S if S <= 12 else 2
    best = 0
    for size in range(1, max_size + 1):
        for A in itertools.combinations(range(S), size):
            m_A = sum(problem.widths[s] for s in A)
            if m_A > problem.K or m_A <= best:
                continue
            if mat_rank(hstack([problem.blocks[s] for s in A])) < m_A:
                continue
            rest = [problem.blocks[s] for s in range(S) if s not in A]
            r_rest = mat_rank(hstack(rest)) if rest else 0
            best = max(best, m_A - r_rest)
    return best


def _random_invertible(field: FieldSpec, m: int, count: int, rng: np.random.Generator) -> np.ndarray:
    out = np.empty((0, m, m), dtype=np.int64)
    while len(out) < count:
        draw = rng.integers(0, field.d, size=(max(2 * (count - len(out)), 16), m, m), dtype=np.int64)
        out = np.concatenate([out, draw[batched_rank(field, draw) == m]])
    return out[:count]


def _random_search(problem: LCProblem, seed: int, budget: int, stop_at: int):
    field = problem.field
    rng = np.random.default_rng(seed)
    n = max(1, min(RANDOM_SAMPLES, budget))
    samples = [_random_invertible(field, w, n, rng) for w in problem.widths]
    contribs = [_contributions(problem, s, samples[s]) for s in range(problem.S)]
    ranks = batched_rank(field, _sum_terms(field, contribs))
    k = int(np.argmin(ranks))
    best_c = int(ranks[k])
    current = [samples[s][k].copy() for s in range(problem.S)]
    evaluated = n
    # Coordinate moves: rewrite one entry of one precoder to every field value.
    for _ in range(LOCAL_ROUNDS):
        if best_c <= stop_at or evaluated >= budget:
            break
        improved = False
        for s, w in enumerate(problem.widths):
            fixed = _sum_terms(
                field,
                [_contributions(problem, t, current[t][None])[0] for t in range(problem.S) if t != s]
                or [np.zeros((problem.K, problem.K), dtype=np.int64)],
            )
            for i, j in itertools.product(range(w), range(w)):
                trial = np.repeat(current[s][None], field.d, axis=0)
                trial[:, i, j] = np.arange(field.d)
                ok = batched_rank(field, trial) == w
                trial = trial[ok]
                sums = field.add(_contributions(problem, s, trial), fixed[None])
                r = batched_rank(field, sums)
                evaluated += len(trial)
                k = int(np.argmin(r))
                if r[k] < best_c:
                    best_c = int(r[k])
                    current[s] = trial[k].copy()
                    improved = True
        if not improved:
            break
    return best_c, _as_mats(field, current), evaluated


@dataclass(frozen=True)
class SearchOutcome:
    c_best: int
    precoders: tuple[MatF, ...]
    proven_optimal: bool
    lower_bound: int
    candidates_evaluated: int
    seed: int
    strategy: str = "portfolio"
    source: str = dc_field(default="identity", compare=False)

    def as_dict(self) -> dict:
        return {
            "c": self.c_best,
            "precoders": [P.tolist() for P in self.precoders],
            "proven_optimal": self.proven_optimal,
            "lower_bound": self.lower_bound,
            "candidates_evaluated": self.candidates_evaluated,
            "seed": self.seed,
            "strategy": self.strategy,
            "found_by": self.source,
        }


def min_aux_qudits(
    problem: LCProblem,
    strategy: str = "portfolio",
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
) -> SearchOutcome:
    """Best auxiliary-qudit count found by ``strategy``.

    Never fails: strategies that cannot run within ``budget`` fall back to
    the identity-precoder baseline.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
    field = problem.field
    lb = lower_bound_c(problem)
    identity = problem.identity_precoders()
    best_c, best_p, source = objective_c(problem, identity), identity, "identity"
    evaluated = 1
    exhausted = False

    def offer(c, precoders, name):
        nonlocal best_c, best_p, source
        if c < best_c:
            best_c, best_p, source = c, precoders, name

    if strategy in ("exhaustive", "portfolio") and exhaustive_size(problem) <= budget:
        c, precoders, n = _exhaustive(problem, budget)
        evaluated += n
        best_c, best_p, source = c, precoders, "exhaustive"
        exhausted = True
    if not exhausted and best_c > lb and strategy in ("diagonal", "portfolio"):
        cands = [_diagonal_elements(field, w) for w in problem.widths]
        if math.prod(len(c) for c in cands) <= budget:
            c, idx, n, _ = _scan(problem, cands, lb)
            evaluated += n
            offer(c, _as_mats(field, [cand[i] for cand, i in zip(cands, idx)]), "diagonal")
        else:
            rng = np.random.default_rng(seed)
            picks = [cand[rng.integers(0, len(cand), size=budget)] for cand in cands]
            c, idx, n, _ = _scan_aligned(problem, picks, lb)
            evaluated += n
            offer(c, _as_mats(field, [p[idx] for p in picks]), "diagonal")
    if not exhausted and best_c > lb and strategy in ("random", "portfolio"):
        c, precoders, n = _random_search(problem, seed, budget, lb)
        evaluated += n
        offer(c, precoders, "random")
    return SearchOutcome(
        c_best=best_c,
        precoders=tuple(best_p),
        proven_optimal=exhausted or best_c == lb,
        lower_bound=lb,
        candidates_evaluated=evaluated,
        seed=seed,
        strategy=strategy,
        source=source,
    )


def _scan_aligned(problem: LCProblem, picks: Sequence[np.ndarray], stop_at: int):
    """Score ``len(picks[0])`` joint candidates, row ``k`` of every server together."""
    field = problem.field
    contribs = [_contributions(problem, s, p) for s, p in enumerate(picks)]
    ranks = batched_rank(field, _sum_terms(field, contribs))
    k = int(np.argmin(ranks))
    return int(ranks[k]), k, len(ranks), int(ranks[k]) <= stop_at


def rate_of(problem: LCProblem, c: int) -> Fraction:
    if c < 0:
        raise ValueError("c must be nonnegative")
    return Fraction(2 * problem.K, problem.m + c)


@dataclass(frozen=True)
class CostRegion:
    """Per-server download costs with ``2 D_s >= m_s`` and ``sum 2 D_s >= m + c``."""

    widths: tuple[int, ...]
    c: int

    def contains(self, delta: Sequence) -> bool:
        delta = [Fraction(v) for v in delta]
        if len(delta) != len(self.widths):
            raise DimensionMismatch(f"delta has {len(delta)} entries, expected {len(self.widths)}")
        if any(v < 0 for v in delta):
            raise ValueError("download costs must be nonnegative")
        if any(2 * v < w for v, w in zip(delta, self.widths)):
            return False
        return 2 * sum(delta) >= sum(self.widths) + self.c

    def corner(self, allocation: Sequence[int]) -> tuple[Fraction, ...]:
        """The cost tuple ``(m_s + a_s) / 2`` realised by an auxiliary allocation."""
        return tuple(Fraction(w + a, 2) for w, a in zip(self.widths, allocation))

    def as_dict(self) -> dict:
        return {
            "per_server": [{"server": s + 1, "min_2delta": w} for s, w in enumerate(self.widths)],
            "sum_min_2delta": sum(self.widths) + self.c,
        }


def cost_region(problem: LCProblem, c: int) -> CostRegion:
    return CostRegion(problem.widths, c)


def region_check(problem: LCProblem, c: int, delta: Sequence) -> bool:
    return cost_region(problem, c).contains(delta)
