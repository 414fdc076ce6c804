"""Loop erasure, Wilson-type samplers, and statistical validation.

The samplers draw rooted forests (and their cycle-rooted generalization)
with probability proportional to the transition-weight product, using
random walks with chronological loop erasure. Exact per-path laws and a
chi-square report make the samplers testable against the enumeration
tables in ``forests``.

Randomness contract: every sampler call owns a fresh ``random.Random``
seeded from its SamplerConfig; batch helpers derive one child seed per
sample index with a splitmix64 mix. Identical config, identical stream,
on any platform (the Mersenne Twister sequence for an integer seed is
pinned by CPython).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from scipy.stats import chi2 as _chi2

from . import oracle
from .chains import InfeasibleRootSetError, TransitionMatrix
from .forests import (
    DEFAULT_GUARD,
    CycleWeights,
    Ecrsf,
    EnumerationGuardError,
    RootedForest,
    _check_roots,
    _scaled_rows,
    w_sum,
)

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class PathTrace:
    """A finite walk path; consecutive states should be admissible steps
    of whatever chain produced it (not checked here, the chain is not known).
    """

    states: tuple[int, ...]

    def __post_init__(self):
        states = tuple(int(s) for s in self.states)
        if not states:
            raise ValueError("empty path")
        object.__setattr__(self, "states", states)

    @property
    def steps(self) -> int:
        return len(self.states) - 1

    def is_self_avoiding(self) -> bool:
        return len(set(self.states)) == len(self.states)


@dataclass(frozen=True)
class SamplerConfig:
    seed: int
    sample_count: int = 1
    alpha: CycleWeights | None = None

    def __post_init__(self):
        if not 0 <= int(self.seed) < (1 << 64):
            raise ValueError("seed must fit in 64 bits")
        object.__setattr__(self, "seed", int(self.seed))
        if self.sample_count < 1:
            raise ValueError("sample_count must be at least 1")


def derive_seed(seed: int, index: int) -> int:
    """Child seed for sample #index: one splitmix64 step per index."""
    z = (seed + (index + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def loop_erase(path: PathTrace | Sequence[int]) -> PathTrace:
    """Chronological loop erasure: each revisit pops back to the first visit."""
    states = path.states if isinstance(path, PathTrace) else tuple(path)
    if not states:
        raise ValueError("empty path")
    out: list[int] = []
    pos: dict[int, int] = {}
    for s in states:
        if s in pos:
            for dropped in out[pos[s] + 1:]:
                del pos[dropped]
            del out[pos[s] + 1:]
        else:
            pos[s] = len(out)
            out.append(s)
    return PathTrace(tuple(out))


class _Stepper:
    """Exact categorical walk steps via integer thresholds per row."""

    def __init__(self, p: TransitionMatrix):
        nums, dens = _scaled_rows(p)
        self.dens = dens
        table = []
        for row in nums:
            acc = 0
            cells = []
            for j, weight in enumerate(row):
                if weight:
                    acc += weight
                    cells.append((acc, j))
            table.append(tuple(cells))
        self.table = tuple(table)

    def step(self, rng: random.Random, i: int) -> int:
        # rows sum to dens[i] exactly, so the scan always lands
        r = rng.randrange(self.dens[i])
        for acc, j in self.table[i]:
            if r < acc:
                return j
        raise AssertionError("row mass does not cover its denominator")


def _site_order(n: int, site_order: Sequence[int] | None) -> tuple[int, ...]:
    if site_order is None:
        return tuple(range(n))
    order = tuple(int(s) for s in site_order)
    if sorted(order) != list(range(n)):
        raise ValueError("site order must be a permutation of the states")
    return order


def _walk_into(stepper: _Stepper, rng: random.Random, start: int,
               settled: set[int]) -> list[int]:
    path = [start]
    v = start
    while v not in settled:
        v = stepper.step(rng, v)
        path.append(v)
    return path


def wilson_tree(p: TransitionMatrix, root: int, cfg: SamplerConfig,
                site_order: Sequence[int] | None = None) -> RootedForest:
    """One spanning tree rooted at ``root``, law Π^P(t) / w({root})."""
    return wilson_forest(p, {root}, cfg, site_order)


def wilson_forest(p: TransitionMatrix, roots: Iterable[int],
                  cfg: SamplerConfig,
                  site_order: Sequence[int] | None = None) -> RootedForest:
    """One spanning forest rooted exactly at ``roots``, law Π^P(f) / w(R).

    Stage order over starting sites is fixed for reproducibility; the
    resulting law does not depend on it. Refuses infeasible root sets up
    front (zero forest weight means the walk would never terminate).
    """
    rs = _check_roots(p.n, roots)
    stranded = oracle.states_not_reaching(p, rs)
    if stranded:
        raise InfeasibleRootSetError(
            f"states {list(stranded)} cannot reach roots {sorted(rs)}: "
            "forest weight is zero")
    order = _site_order(p.n, site_order)
    rng = random.Random(cfg.seed)
    stepper = _Stepper(p)
    parent = [-1] * p.n
    settled = set(rs)
    for start in order:
        if start in settled:
            continue
        branch = loop_erase(_walk_into(stepper, rng, start, settled)).states
        for a, b in zip(branch, branch[1:]):
            parent[a] = b
            settled.add(a)
    return RootedForest(p.n, rs, tuple(parent))


def sample_trees(p: TransitionMatrix, root: int, cfg: SamplerConfig,
                 site_order: Sequence[int] | None = None) -> list[RootedForest]:
    return sample_forests(p, {root}, cfg, site_order)


def sample_forests(p: TransitionMatrix, roots: Iterable[int],
                   cfg: SamplerConfig,
                   site_order: Sequence[int] | None = None) -> list[RootedForest]:
    """cfg.sample_count independent forests, one derived seed per index."""
    rs = frozenset(roots)
    return [
        wilson_forest(p, rs, replace(cfg, seed=derive_seed(cfg.seed, k),
                                     sample_count=1), site_order)
        for k in range(cfg.sample_count)
    ]


# ---------------------------------------------------------------------------
# cycle-keeping sampler

def _positive_cycle_states(p: TransitionMatrix, alpha: CycleWeights,
                           inside: set[int]) -> set[int]:
    """States of ``inside`` on some directed support cycle with alpha > 0."""
    good: set[int] = set()
    support = p.support()
    adj = {v: [u for u in support[v] if u in inside] for v in inside}
    for s in sorted(inside):
        # cycles whose minimal state is s: simple paths through states > s
        stack: list[tuple[int, tuple[int, ...]]] = [(s, (s,))]
        while stack:
            v, trail = stack.pop()
            for u in adj[v]:
                if u == s:
                    if alpha.weight(trail) > 0:
                        good.update(trail)
                elif u > s and u not in trail:
                    stack.append((u, trail + (u,)))
    return good


def _check_ec_feasible(p: TransitionMatrix, alpha: CycleWeights,
                       roots: frozenset[int], guard: int) -> None:
    """Refuse configurations with zero total cycle-rooted weight.

    Positivity is structural: the states that cannot reach the roots form a
    closed set, and each of them must reach a positive-weight support cycle.
    """
    if roots:
        stranded = set(oracle.states_not_reaching(p, roots))
    else:
        stranded = set(range(p.n))
    if not stranded:
        return
    if len(stranded) > guard:
        raise EnumerationGuardError(
            f"{len(stranded)} states need a cycle search, above the guard of "
            f"{guard}; pass a larger guard to override")
    good = _positive_cycle_states(p, alpha, stranded)
    reached = set(good)
    frontier = list(good)
    rev: dict[int, list[int]] = {v: [] for v in stranded}
    support = p.support()
    for v in stranded:
        for u in support[v]:
            if u in stranded:
                rev[u].append(v)
    while frontier:
        u = frontier.pop()
        for v in rev[u]:
            if v not in reached:
                reached.add(v)
                frontier.append(v)
    missing = stranded - reached
    if missing:
        raise InfeasibleRootSetError(
            f"states {sorted(missing)} reach neither the roots {sorted(roots)} "
            "nor a positive-weight cycle: total cycle-rooted weight is zero")


def kkw_sample(p: TransitionMatrix, alpha: CycleWeights | None,
               tree_roots: Iterable[int], cfg: SamplerConfig,
               site_order: Sequence[int] | None = None,
               guard: int = DEFAULT_GUARD) -> Ecrsf:
    """One cycle-rooted spanning forest, law Π^{P,α}(f) / w^ec(R).

    The walk runs as in the forest sampler, but each time it closes a cycle
    a coin with bias alpha(cycle) decides between keeping the whole looped
    branch as a settled component and popping the cycle. alpha ≡ 0
    reproduces the plain forest sampler's law.
    """
    if alpha is None:
        alpha = cfg.alpha
    if alpha is None:
        raise ValueError("kkw_sample needs cycle weights (alpha)")
    rs = _check_roots(p.n, tree_roots, allow_empty=True)
    _check_ec_feasible(p, alpha, rs, guard)
    order = _site_order(p.n, site_order)
    rng = random.Random(cfg.seed)
    stepper = _Stepper(p)
    succ = [-1] * p.n
    settled = set(rs)

    def settle(path: list[int], closing: int) -> None:
        for a, b in zip(path, path[1:]):
            succ[a] = b
        succ[path[-1]] = closing
        settled.update(path)

    for start in order:
        if start in settled:
            continue
        path = [start]
        pos = {start: 0}
        while True:
            v = stepper.step(rng, path[-1])
            if v in settled:
                settle(path, v)
                break
            if v in pos:
                cycle = tuple(path[pos[v]:])
                bias = alpha.weight(cycle)
                if rng.randrange(bias.denominator) < bias.numerator:
                    settle(path, v)
                    break
                for dropped in path[pos[v] + 1:]:
                    del pos[dropped]
                del path[pos[v] + 1:]
                continue
            pos[v] = len(path)
            path.append(v)
    return Ecrsf(p.n, rs, tuple(succ))


def sample_ecrsf(p: TransitionMatrix, tree_roots: Iterable[int],
                 cfg: SamplerConfig,
                 site_order: Sequence[int] | None = None,
                 guard: int = DEFAULT_GUARD) -> list[Ecrsf]:
    """cfg.sample_count independent draws with cfg.alpha cycle weights."""
    rs = frozenset(tree_roots)
    return [
        kkw_sample(p, None, rs,
                   replace(cfg, seed=derive_seed(cfg.seed, k), sample_count=1),
                   site_order, guard)
        for k in range(cfg.sample_count)
    ]


def lerw_path_prob(p: TransitionMatrix, roots: Iterable[int],
                   path: PathTrace | Sequence[int],
                   guard: int = DEFAULT_GUARD) -> Fraction:
    """Exact law of the loop-erased walk from path[0] stopped at the roots.

    P(branch = i_1 … i_K) = [w(R ∪ {i_1..i_{K-1}}) / w(R)] · Π p-steps.
    """
    rs = _check_roots(p.n, roots)
    states = path.states if isinstance(path, PathTrace) else tuple(path)
    if len(states) < 2:
        raise ValueError("path must take at least one step")
    if len(set(states)) != len(states):
        raise ValueError("path is not self-avoiding")
    if states[0] in rs:
        raise ValueError("path must start outside the root set")
    if states[-1] not in rs:
        raise ValueError("path must end in the root set")
    for s in states[1:-1]:
        if s in rs:
            raise ValueError(f"path passes through root {s} before its end")
    w_roots = w_sum(p, rs, guard)
    if w_roots == 0:
        raise InfeasibleRootSetError(
            f"root set {sorted(rs)} has zero forest weight")
    prob = w_sum(p, rs | set(states[:-1]), guard) / w_roots
    for a, b in zip(states, states[1:]):
        prob *= p.p(a, b)
    return prob


# ---------------------------------------------------------------------------
# goodness of fit

@dataclass(frozen=True)
class GofReport:
    statistic: float
    dof: int
    p_value: float
    threshold: float
    sample_size: int
    cells: int
    impossible: tuple        # keys observed where the exact law puts mass 0
    passed: bool

    def to_json(self) -> dict:
        return {
            "statistic": self.statistic,
            "dof": self.dof,
            "p_value": self.p_value,
            "threshold": self.threshold,
            "sample_size": self.sample_size,
            "cells": self.cells,
            "impossible_cells": len(self.impossible),
            "passed": self.passed,
        }


def gof_test(observed: Mapping, expected: Mapping,
             threshold: float = 1e-3) -> GofReport:
    """Pearson chi-square of sampled counts against an exact law.

    Zero-probability cells are excluded from the statistic but any
    observation there is a certain bug and fails the report outright.
    """
    total = sum(observed.values())
    if total <= 0:
        raise ValueError("observed counts are empty")
    mass = sum(Fraction(str(x)) if isinstance(x, float) else Fraction(x)
               for x in expected.values())
    if abs(mass - 1) > Fraction(1, 10**9):
        raise ValueError("expected probabilities must sum to 1")
    impossible = tuple(
        key for key, count in observed.items()
        if count and not expected.get(key))
    statistic = 0.0
    live = 0
    for key, prob in expected.items():
        if prob <= 0:
            continue
        live += 1
        want = float(prob) * total
        got = observed.get(key, 0)
        statistic += (got - want) ** 2 / want
    dof = live - 1
    p_value = 1.0 if dof == 0 else float(_chi2.sf(statistic, dof))
    passed = not impossible and p_value > threshold
    return GofReport(statistic=statistic, dof=dof, p_value=p_value,
                     threshold=threshold, sample_size=total, cells=live,
                     impossible=impossible, passed=passed)
