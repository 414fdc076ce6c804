"""Directed spanning forests, cycle-rooted spanning forests, and exact weight sums.

This module is deliberately the brute-force side: every forest with a given
root set is enumerated (all parent maps, cyclic ones rejected), every
functional map is enumerated for the cycle-rooted case, and the weight
sums w(R), w_ij(R), Sigma_j, Sigma^(r), Sigma_ij, w^ec are exact
rational sums over those enumerations. Determinant shortcuts live elsewhere
and are checked against these sums.

Enumeration only depends on (n, roots), so forest structures are cached and
shared across chains; per-chain sums clear each row's denominator once and
accumulate plain integers, which keeps the inner loops cheap.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import lcm, prod
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .chains import InfeasibleRootSetError, TransitionMatrix, format_rational

__all__ = [
    "DEFAULT_GUARD", "EnumerationGuardError", "InfeasibleRootSetError",
    "RootedForest", "Ecrsf", "CycleWeights", "ForestSums",
    "canonical_cycle", "enumerate_forests", "enumerate_ecrsf", "cayley_count",
    "forest_weight", "ecrsf_weight", "w_sum", "w_target_sum", "sigma_sums",
    "sigma_r", "sigma_pair", "last_exit_state", "w_ec_sums",
    "forest_from_json", "ecrsf_from_json",
]

#: Maximum number of free (non-root) vertices enumerated without an override.
DEFAULT_GUARD = 8


class EnumerationGuardError(ValueError):
    """Candidate space too large for exhaustive enumeration."""


def _check_roots(n: int, roots: Iterable[int], allow_empty: bool = False) -> frozenset[int]:
    rs = frozenset(int(r) for r in roots)
    if not rs and not allow_empty:
        raise ValueError("root set must be nonempty")
    for r in rs:
        if not 0 <= r < n:
            raise ValueError(f"root {r} out of range for n={n}")
    return rs


def _check_guard(n: int, roots: frozenset[int], guard: int) -> None:
    free = n - len(roots)
    if free > guard:
        raise EnumerationGuardError(
            f"{free} free vertices exceeds enumeration guard {guard}; "
            f"pass a larger guard to override")


def canonical_cycle(cycle: Sequence[int]) -> tuple[int, ...]:
    """Rotate a directed cycle so its minimal state comes first."""
    cyc = tuple(cycle)
    if not cyc:
        raise ValueError("empty cycle")
    k = cyc.index(min(cyc))
    return cyc[k:] + cyc[:k]


def _classify(n: int, roots: frozenset[int], succ: Sequence[int]):
    """Walk a successor map; return (root_of, cycles).

    root_of[v] is the root of v's tree component, or -1 when v's component
    contains a cycle. Roots are their own root. Cycles come out canonical.
    """
    root_of = [-2] * n
    state = [0] * n  # 0 new, 1 on current walk, 2 resolved
    for r in roots:
        root_of[r] = r
        state[r] = 2
    cycles: list[tuple[int, ...]] = []
    for v0 in range(n):
        if state[v0] == 2:
            continue
        path: list[int] = []
        v = v0
        while state[v] == 0:
            state[v] = 1
            path.append(v)
            v = succ[v]
        if state[v] == 1:
            cycles.append(canonical_cycle(path[path.index(v):]))
            res = -1
        else:
            res = root_of[v]
        for u in path:
            root_of[u] = res
            state[u] = 2
    return tuple(root_of), tuple(sorted(cycles))


# ---------------------------------------------------------------------------
# configuration types

@dataclass(frozen=True)
class RootedForest:
    """Spanning forest directed toward a nonempty root set.

    ``parent`` has one entry per state: the parent of each non-root, -1 at
    the roots. Following parents from any state reaches a root (acyclicity
    is validated at construction).
    """

    n: int
    roots: frozenset[int]
    parent: tuple[int, ...]

    def __post_init__(self):
        roots = _check_roots(self.n, self.roots)
        parent = tuple(int(u) for u in self.parent)
        object.__setattr__(self, "roots", roots)
        object.__setattr__(self, "parent", parent)
        if len(parent) != self.n:
            raise ValueError(f"parent vector has length {len(parent)}, expected {self.n}")
        for v in range(self.n):
            if v in roots:
                if parent[v] != -1:
                    raise ValueError(f"root {v} must have parent -1")
            else:
                if not 0 <= parent[v] < self.n:
                    raise ValueError(f"parent of {v} out of range")
                if parent[v] == v:
                    raise ValueError(f"vertex {v} is its own parent")
        root_of, cycles = _classify(self.n, roots, parent)
        if cycles:
            raise ValueError(f"parent map contains cycle {cycles[0]}")
        object.__setattr__(self, "_root_of", root_of)

    @classmethod
    def from_parent_map(cls, n: int, roots: Iterable[int],
                        parent: Mapping[int, int]) -> "RootedForest":
        rs = frozenset(int(r) for r in roots)
        vec = tuple(-1 if v in rs else int(parent[v]) for v in range(n))
        return cls(n, rs, vec)

    def parent_map(self) -> dict[int, int]:
        return {v: u for v, u in enumerate(self.parent) if u != -1}

    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple((v, u) for v, u in enumerate(self.parent) if u != -1)

    def root_of(self, v: int) -> int:
        return self._root_of[v]

    def path_to_root(self, v: int) -> tuple[int, ...]:
        """States visited following parents from v up to and including the root."""
        path = [v]
        while self.parent[path[-1]] != -1:
            path.append(self.parent[path[-1]])
        return tuple(path)

    def to_json(self) -> dict:
        return {
            "roots": sorted(self.roots),
            "parent": {str(v): u for v, u in sorted(self.parent_map().items())},
        }


def forest_from_json(doc: dict) -> RootedForest:
    parent = {int(v): int(u) for v, u in doc["parent"].items()}
    roots = [int(r) for r in doc["roots"]]
    n = max([*roots, *parent.keys(), *parent.values()], default=-1) + 1
    n = max(n, doc.get("n", 0))
    return RootedForest.from_parent_map(n, roots, parent)


@dataclass(frozen=True)
class Ecrsf:
    """Cycle-rooted spanning forest with optional tree roots.

    Every component of the successor map is either a tree whose paths lead
    into ``tree_roots`` or hangs off exactly one directed cycle disjoint from
    the roots. A self-loop is a cycle of length 1. Any successor map on the
    non-root states is valid; the classification is computed, not checked.
    """

    n: int
    tree_roots: frozenset[int]
    successor: tuple[int, ...]
    cycles: tuple[tuple[int, ...], ...] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        roots = _check_roots(self.n, self.tree_roots, allow_empty=True)
        succ = tuple(int(u) for u in self.successor)
        object.__setattr__(self, "tree_roots", roots)
        object.__setattr__(self, "successor", succ)
        if len(succ) != self.n:
            raise ValueError(f"successor vector has length {len(succ)}, expected {self.n}")
        for v in range(self.n):
            if v in roots:
                if succ[v] != -1:
                    raise ValueError(f"tree root {v} must have successor -1")
            elif not 0 <= succ[v] < self.n:
                raise ValueError(f"successor of {v} out of range")
        root_of, cycles = _classify(self.n, roots, succ)
        object.__setattr__(self, "cycles", cycles)
        object.__setattr__(self, "_root_of", root_of)

    def successor_map(self) -> dict[int, int]:
        return {v: u for v, u in enumerate(self.successor) if u != -1}

    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple((v, u) for v, u in enumerate(self.successor) if u != -1)

    def root_of(self, v: int) -> int | None:
        """Tree root of v's component, or None when the component is cycle-rooted."""
        r = self._root_of[v]
        return None if r < 0 else r

    def to_json(self) -> dict:
        return {
            "roots": sorted(self.tree_roots),
            "parent": {str(v): u for v, u in sorted(self.successor_map().items())},
            "cycles": [list(c) for c in self.cycles],
        }


def ecrsf_from_json(doc: dict) -> Ecrsf:
    succ = {int(v): int(u) for v, u in doc["parent"].items()}
    roots = frozenset(int(r) for r in doc["roots"])
    n = max([*roots, *succ.keys(), *succ.values()], default=-1) + 1
    n = max(n, doc.get("n", 0))
    vec = tuple(-1 if v in roots else succ[v] for v in range(n))
    return Ecrsf(n, roots, vec)


@dataclass(frozen=True)
class CycleWeights:
    """Rotation-invariant rule assigning each directed cycle a weight in [0,1].

    The rule always receives the cycle rotated so its minimal state is first,
    which makes rotation invariance structural.
    """

    rule: Callable[[tuple[int, ...]], Fraction | int]

    def weight(self, cycle: Sequence[int]) -> Fraction:
        value = Fraction(self.rule(canonical_cycle(cycle)))
        if not 0 <= value <= 1:
            raise ValueError(
                f"cycle weight {format_rational(value)} outside [0,1]")
        return value

    @classmethod
    def constant(cls, value: Fraction | int | str) -> "CycleWeights":
        v = Fraction(value)
        if not 0 <= v <= 1:
            raise ValueError(f"cycle weight {format_rational(v)} outside [0,1]")
        return cls(lambda _cycle: v)


# ---------------------------------------------------------------------------
# structure enumeration (chain independent, cached)

@lru_cache(maxsize=None)
def _forest_structures(n: int, roots: frozenset[int]):
    """All forest parent vectors with this exact root set, with per-state roots."""
    free = [v for v in range(n) if v not in roots]
    out = []
    choices = [[u for u in range(n) if u != v] for v in free]
    for combo in itertools.product(*choices):
        parent = [-1] * n
        for v, u in zip(free, combo):
            parent[v] = u
        root_of, cycles = _classify(n, roots, parent)
        if cycles:
            continue
        out.append((tuple(parent), root_of))
    return tuple(out)


@lru_cache(maxsize=None)
def _ecrsf_structures(n: int, roots: frozenset[int]):
    """All successor vectors on the non-root states, classified."""
    free = [v for v in range(n) if v not in roots]
    out = []
    for combo in itertools.product(range(n), repeat=len(free)):
        succ = [-1] * n
        for v, u in zip(free, combo):
            succ[v] = u
        root_of, cycles = _classify(n, roots, succ)
        out.append((tuple(succ), root_of, cycles))
    return tuple(out)


def enumerate_forests(n: int, roots: Iterable[int],
                      guard: int = DEFAULT_GUARD) -> Iterator[RootedForest]:
    """Yield every spanning forest whose root set is exactly ``roots``.

    The count is k * n^(n-k-1) for |roots| = k. Candidates are all parent
    maps on the free vertices; cyclic ones are rejected by pointer chasing.
    """
    rs = _check_roots(n, roots)
    _check_guard(n, rs, guard)
    for parent, _root_of in _forest_structures(n, rs):
        yield RootedForest(n, rs, parent)


def enumerate_ecrsf(n: int, tree_roots: Iterable[int],
                    guard: int = DEFAULT_GUARD) -> Iterator[Ecrsf]:
    """Yield every ECRSF with the given tree roots (every successor map is one)."""
    rs = _check_roots(n, tree_roots, allow_empty=True)
    _check_guard(n, rs, guard)
    for succ, _root_of, _cycles in _ecrsf_structures(n, rs):
        yield Ecrsf(n, rs, succ)


def cayley_count(n: int, k: int) -> int:
    """Number of forests on n labeled vertices with a fixed k-element root set."""
    if not 1 <= k <= n:
        raise ValueError(f"root count {k} out of range 1..{n}")
    if k == n:
        return 1
    return k * n ** (n - k - 1)


# ---------------------------------------------------------------------------
# weights and sums

def forest_weight(f: RootedForest, p: TransitionMatrix) -> Fraction:
    """P-weight: product of p(v, parent(v)) over non-roots; empty product is 1."""
    if f.n != p.n:
        raise ValueError("forest and chain sizes differ")
    w = Fraction(1)
    for v, u in f.edges():
        w *= p.rows[v][u]
        if w == 0:
            break
    return w


def ecrsf_weight(f: Ecrsf, p: TransitionMatrix, alpha: CycleWeights) -> Fraction:
    """(P, alpha)-weight: edge probabilities times one alpha factor per cycle."""
    if f.n != p.n:
        raise ValueError("configuration and chain sizes differ")
    w = Fraction(1)
    for v, u in f.edges():
        w *= p.rows[v][u]
        if w == 0:
            return w
    for cyc in f.cycles:
        w *= alpha.weight(cyc)
        if w == 0:
            break
    return w


@lru_cache(maxsize=None)
def _scaled_rows(p: TransitionMatrix):
    """Integer numerators after clearing each row's common denominator."""
    dens = tuple(lcm(*(x.denominator for x in row)) for row in p.rows)
    nums = tuple(
        tuple(int(x * d) for x in row) for row, d in zip(p.rows, dens))
    return nums, dens


@lru_cache(maxsize=None)
def _root_set_sums(p: TransitionMatrix, roots: frozenset[int]):
    """(w(roots), {(i, j): weight of forests where i's tree has root j}).

    Every forest with this root set has the same denominator (one row
    denominator per free vertex), so the sum runs over plain integers.
    """
    n = p.n
    nums, dens = _scaled_rows(p)
    free = [v for v in range(n) if v not in roots]
    denom = prod(dens[v] for v in free)
    total = 0
    table: dict[tuple[int, int], int] = {}
    for parent, root_of in _forest_structures(n, roots):
        w = 1
        for v in free:
            x = nums[v][parent[v]]
            if not x:
                w = 0
                break
            w *= x
        if not w:
            continue
        total += w
        for i in range(n):
            key = (i, root_of[i])
            table[key] = table.get(key, 0) + w
    return (Fraction(total, denom),
            {key: Fraction(v, denom) for key, v in table.items()})


def w_sum(p: TransitionMatrix, roots: Iterable[int],
          guard: int = DEFAULT_GUARD) -> Fraction:
    """w(R): total P-weight of forests rooted exactly at R."""
    rs = _check_roots(p.n, roots)
    _check_guard(p.n, rs, guard)
    return _root_set_sums(p, rs)[0]


def w_target_sum(p: TransitionMatrix, roots: Iterable[int], i: int, j: int,
                 guard: int = DEFAULT_GUARD) -> Fraction:
    """w_ij over root set roots ∪ {j}: forests in which i's tree has root j.

    When j is already a root this is the harmonic numerator w_ij(R); when it
    is not, the root set is enlarged to R ∪ {j} as in the Green numerator.
    """
    rs = _check_roots(p.n, roots) | {int(j)}
    _check_guard(p.n, rs, guard)
    if not 0 <= i < p.n:
        raise ValueError(f"state {i} out of range")
    return _root_set_sums(p, rs)[1].get((i, j), Fraction(0))


class ForestSums:
    """All forest weight sums of one chain, enumerated lazily and cached globally.

    sigma(j) = w({j}), sigma1 = sum_j sigma(j). The heavier maps (w, w_target,
    sigma_pair, sigma_r) delegate to the cached module-level sums.
    """

    def __init__(self, chain: TransitionMatrix, guard: int = DEFAULT_GUARD):
        self.chain = chain
        self.guard = guard
        self.sigma_vector = tuple(
            w_sum(chain, {j}, guard) for j in range(chain.n))
        self.sigma1 = sum(self.sigma_vector)

    def sigma(self, j: int) -> Fraction:
        return self.sigma_vector[j]

    def sigma_r(self, r: int) -> Fraction:
        return sigma_r(self.chain, r, self.guard)

    def w(self, roots: Iterable[int]) -> Fraction:
        return w_sum(self.chain, roots, self.guard)

    def w_target(self, roots: Iterable[int], i: int, j: int) -> Fraction:
        return w_target_sum(self.chain, roots, i, j, self.guard)

    def sigma_pair(self, i: int, j: int, method: str = "tree-deletion") -> Fraction:
        return sigma_pair(self.chain, i, j, method, self.guard)


def sigma_sums(p: TransitionMatrix, guard: int = DEFAULT_GUARD) -> ForestSums:
    """Tree sums Sigma_j = w({j}) and their total Sigma^(1)."""
    return ForestSums(p, guard)


def sigma_r(p: TransitionMatrix, r: int, guard: int = DEFAULT_GUARD) -> Fraction:
    """Sigma^(r): total weight of forests with exactly r trees, any root sets."""
    if not 1 <= r <= p.n:
        raise ValueError(f"tree count {r} out of range 1..{p.n}")
    total = Fraction(0)
    for roots in itertools.combinations(range(p.n), r):
        total += w_sum(p, roots, guard)
    return total


def sigma_pair(p: TransitionMatrix, i: int, j: int,
               method: str = "tree-deletion",
               guard: int = DEFAULT_GUARD) -> Fraction:
    """Sigma_ij, by deleting the last edge into j or by two-tree forests.

    tree-deletion: over all trees t rooted at j, the product of edge
    probabilities with the factor for the last edge k(i,j,t) -> j left out.
    The factor is omitted, not divided: a tree whose only vanishing factor
    is the deleted one still contributes.

    two-forest: sum over k != j of the weight of {j,k}-rooted forests whose
    i-tree has root k. The two methods agree by the cut-the-last-edge
    bijection.
    """
    if i == j:
        raise ValueError("sigma_pair needs i != j")
    if not (0 <= i < p.n and 0 <= j < p.n):
        raise ValueError(f"states ({i},{j}) out of range")
    if method == "two-forest":
        total = Fraction(0)
        for k in range(p.n):
            if k != j:
                total += w_target_sum(p, {j, k}, i, k, guard)
        return total
    if method != "tree-deletion":
        raise ValueError(f"unknown method {method!r}")
    rs = frozenset([j])
    _check_guard(p.n, rs, guard)
    nums, dens = _scaled_rows(p)
    free = [v for v in range(p.n) if v != j]
    denom = prod(dens[v] for v in free)
    total = 0
    for parent, _root_of in _forest_structures(p.n, rs):
        v = i
        while parent[v] != j:
            v = parent[v]
        k = v
        # deleting edge k -> j drops its numerator and restores row k's denominator
        w = dens[k]
        for u in free:
            if u == k:
                continue
            x = nums[u][parent[u]]
            if not x:
                w = 0
                break
            w *= x
        total += w
    return Fraction(total, denom)


def last_exit_state(t: RootedForest, i: int) -> int:
    """k(i,j,t): the state just before the root j on the path from i."""
    if len(t.roots) != 1:
        raise ValueError("last_exit_state needs a single-rooted tree")
    (j,) = t.roots
    if i == j:
        raise ValueError("i coincides with the root")
    v = i
    while t.parent[v] != j:
        v = t.parent[v]
    return v


def w_ec_sums(p: TransitionMatrix, alpha: CycleWeights,
              tree_roots: Iterable[int],
              guard: int = DEFAULT_GUARD) -> tuple[Fraction, dict[tuple[int, int], Fraction]]:
    """(w^ec(R), {(i, j): weight of ECRSFs where i sits in a tree rooted at j}).

    With alpha identically 0 every configuration containing a cycle drops
    out and this reduces to the plain forest sums.
    """
    rs = _check_roots(p.n, tree_roots, allow_empty=True)
    _check_guard(p.n, rs, guard)
    n = p.n
    nums, dens = _scaled_rows(p)
    free = [v for v in range(n) if v not in rs]
    denom = prod(dens[v] for v in free)
    total = Fraction(0)
    table: dict[tuple[int, int], Fraction] = {}
    for succ, root_of, cycles in _ecrsf_structures(n, rs):
        w = 1
        for v in free:
            x = nums[v][succ[v]]
            if not x:
                w = 0
                break
            w *= x
        if not w:
            continue
        weight = Fraction(w, denom)
        for cyc in cycles:
            a = alpha.weight(cyc)
            if a == 0:
                weight = Fraction(0)
                break
            weight *= a
        if not weight:
            continue
        total += weight
        for i in range(n):
            r = root_of[i]
            if r >= 0:
                key = (i, r)
                table[key] = table.get(key, Fraction(0)) + weight
    return total, table
