"""Exhaustive enumeration of spanning in-trees and unicyclic subgraphs.

Arcs are ``(source, target)`` pairs with weight ``a[target, source]``.
Every subgraph enumerated here has at most one arc leaving each vertex, so it
is stored as a successor vector ``succ`` (``succ[root] = -1`` for trees).
Lists come back in lexicographic order of the successor vector, which is
lexicographic order of the arc set sorted by source.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, NamedTuple

import numpy as np

from . import kernels
from .errors import CapacityError, DomainError, NumericError, StructureError, ValidationError
from .netmat import as_square, strongly_connected, weights_of

TREE_GUARD = 8
UNICYCLIC_GUARD = 7


@dataclass(frozen=True)
class InTree:
    root: int
    arcs: tuple[tuple[int, int], ...]
    weight: float


@dataclass(frozen=True)
class UnicyclicSubgraph:
    arcs: tuple[tuple[int, int], ...]
    cycle: tuple[tuple[int, int], ...]
    weight: float

    @property
    def successors(self) -> tuple[int, ...]:
        return tuple(t for _, t in self.arcs)


def _arc_weights(G) -> np.ndarray:
    W = weights_of(G)
    if np.any(W < 0) or not np.all(np.isfinite(W)):
        raise ValidationError("arc weights must be finite and non-negative", "A")
    return W


def _choices(W: np.ndarray):
    n = W.shape[0]
    targets = [np.flatnonzero(W[:, v] > 0) for v in range(n)]
    ncho = np.array([t.size for t in targets], dtype=np.int64)
    choice = np.zeros((n, max(1, int(ncho.max(initial=0)))), dtype=np.int64)
    for v, t in enumerate(targets):
        choice[v, :t.size] = t
    return choice, ncho


def _check_guard(n: int, guard: int) -> None:
    if n > guard:
        raise CapacityError(f"n = {n} exceeds the enumeration guard {guard}")


def _run(W: np.ndarray, root: int, want_list: bool):
    choice, ncho = _choices(W)
    return kernels.functional_subgraphs(np.ascontiguousarray(W), choice, ncho,
                                        np.int64(root), want_list)


def enumerate_in_trees(G, root: int, guard: int = TREE_GUARD) -> list[InTree]:
    """All spanning in-trees rooted at ``root``."""
    W = _arc_weights(G)
    n = W.shape[0]
    _check_guard(n, guard)
    if not 0 <= root < n:
        raise ValidationError(f"root {root} out of range", "root")
    succ, wts, _, _ = _run(W, root, True)
    return [InTree(root, tuple((v, int(s[v])) for v in range(n) if v != root), float(w))
            for s, w in zip(succ, wts)]


def in_tree_sums(G, guard: int = TREE_GUARD) -> np.ndarray:
    """Total in-tree weight for every root, without materializing the lists."""
    W = _arc_weights(G)
    n = W.shape[0]
    _check_guard(n, guard)
    return np.array([_run(W, r, False)[3] for r in range(n)])


def _cycle_of(succ) -> tuple[tuple[int, int], ...]:
    v = 0
    for _ in range(len(succ)):
        v = int(succ[v])
    start = v
    ring = [start]
    v = int(succ[start])
    while v != start:
        ring.append(v)
        v = int(succ[v])
    k = ring.index(min(ring))
    ring = ring[k:] + ring[:k]
    return tuple((ring[i], ring[(i + 1) % len(ring)]) for i in range(len(ring)))


def enumerate_unicyclic(G, guard: int = UNICYCLIC_GUARD) -> list[UnicyclicSubgraph]:
    """All spanning subgraphs with one arc out of every vertex and exactly one cycle."""
    W = _arc_weights(G)
    n = W.shape[0]
    _check_guard(n, guard)
    succ, wts, _, _ = _run(W, -1, True)
    return [UnicyclicSubgraph(tuple(enumerate(s.tolist())), _cycle_of(s), float(w))
            for s, w in zip(succ, wts)]


# ---------------------------------------------------------------------------
# Matrix-Tree
# ---------------------------------------------------------------------------


class Cofactors(NamedTuple):
    C: np.ndarray
    alpha: np.ndarray
    tree_sums: np.ndarray | None


def _minors(L: np.ndarray) -> np.ndarray:
    n = L.shape[0]
    if n == 1:
        return np.ones(1)
    out = np.empty(n)
    for i in range(n):
        keep = np.r_[0:i, i + 1:n]
        out[i] = np.linalg.det(L[np.ix_(keep, keep)])
    return out


def principal_cofactors(L, guard: int = TREE_GUARD, rel_tol: float = 1e-9) -> Cofactors:
    """Diagonal cofactors of the Laplacian ``L`` and their normalization ``alpha``.

    Each ``C[i]`` is a principal minor determinant. Up to ``guard`` vertices it
    is cross-checked against the total weight of in-trees rooted at ``i``;
    disagreement beyond ``rel_tol`` raises :class:`NumericError`.
    """
    L = as_square(L, "L")
    W = -L.copy()
    np.fill_diagonal(W, 0.0)
    if np.any(W < 0):
        raise ValidationError("Laplacian has a positive off-diagonal entry", "L")
    if not np.allclose(np.diag(L), W.sum(axis=0), rtol=1e-12, atol=0.0):
        raise ValidationError("diagonal must equal the off-diagonal column totals", "L")
    if not strongly_connected(W):
        raise StructureError("digraph is not strongly connected; cofactors degenerate", "L")
    C = _minors(L)
    sums = None
    if L.shape[0] <= guard:
        sums = in_tree_sums(W, guard)
        gap = np.abs(C - sums)
        if np.any(gap > rel_tol * np.maximum(np.abs(sums), np.finfo(float).tiny)):
            i = int(np.argmax(gap))
            raise NumericError(f"cofactor {i}: determinant {C[i]!r} vs tree sum {sums[i]!r}",
                               residual=float(gap[i]))
    total = math.fsum(C)
    if not total > 0:
        raise StructureError("all cofactors vanish", "L")
    return Cofactors(C, C / total, sums)


# ---------------------------------------------------------------------------
# Tree-Cycle identity
# ---------------------------------------------------------------------------

ArcTable = np.ndarray | Mapping[tuple[int, int], float] | Callable[[int, int, float, float], float]


class TreeCycleCheck(NamedTuple):
    lhs: float
    rhs: float
    residual: float
    normalized_lhs: float
    cofactor_total: float


def _arc_values(F: ArcTable, W: np.ndarray, x: np.ndarray) -> np.ndarray:
    # table entry [j, i] belongs to the arc i -> j (weight a[j, i]); a callable
    # is invoked as F(j, i, x_j, x_i)
    n = W.shape[0]
    vals = np.zeros((n, n))
    for j, i in zip(*np.nonzero(W > 0)):
        j, i = int(j), int(i)
        if callable(F):
            val = F(j, i, float(x[j]), float(x[i]))
        elif isinstance(F, Mapping):
            if (j, i) not in F:
                raise ValidationError(f"missing value for arc {i} -> {j}", "F")
            val = F[(j, i)]
        else:
            val = np.asarray(F, dtype=float)[j, i]
        val = float(val)
        if not math.isfinite(val):
            raise ValidationError(f"missing or non-finite value for arc {i} -> {j}", "F")
        vals[j, i] = val
    return vals


def tree_cycle_residual(G, F: ArcTable, x=None, guard: int = UNICYCLIC_GUARD) -> TreeCycleCheck:
    """Both sides of the Tree-Cycle identity with unnormalized cofactors.

    ``lhs = sum_{i,j} C_i a_ji F_ji`` and ``rhs = sum_Q w(Q) sum_{cycle arcs} F``.
    ``normalized_lhs`` uses ``alpha = C / sum(C)`` instead, so ``lhs`` is
    ``cofactor_total`` times larger.
    """
    W = _arc_weights(G)
    n = W.shape[0]
    _check_guard(n, guard)
    if not strongly_connected(W):
        raise StructureError("digraph is not strongly connected", "G")
    x = np.zeros(n) if x is None else np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise ValidationError(f"expected {n} entries", "x")
    vals = _arc_values(F, W, x)
    L = -W
    L[np.diag_indices_from(L)] = W.sum(axis=0)
    C = principal_cofactors(L, guard=max(guard, TREE_GUARD)).C
    lhs = math.fsum((C[None, :] * W * vals).ravel())
    rhs = math.fsum(Q.weight * math.fsum(vals[t, s] for s, t in Q.cycle)
                    for Q in enumerate_unicyclic(W, guard))
    total = math.fsum(C)
    return TreeCycleCheck(lhs, rhs, abs(lhs - rhs), lhs / total, total)


def tree_arc_multiplicity(G, guard: int = UNICYCLIC_GUARD) -> Counter:
    """How often each successor vector arises as an in-tree plus one arc out of its root.

    Adding an arc ``r -> t`` to an in-tree rooted at ``r`` closes exactly one
    cycle, so every key is a unicyclic subgraph.
    """
    W = _arc_weights(G)
    n = W.shape[0]
    _check_guard(n, guard)
    hits: Counter = Counter()
    for r in range(n):
        for T in enumerate_in_trees(W, r, guard):
            succ = [-1] * n
            for s, t in T.arcs:
                succ[s] = t
            for t in np.flatnonzero(W[:, r] > 0):
                succ[r] = int(t)
                hits[tuple(succ)] += 1
    return hits


def bijection_holds(G, guard: int = UNICYCLIC_GUARD) -> bool:
    """Each unicyclic subgraph arises from exactly as many pairs as its cycle has arcs."""
    hits = tree_arc_multiplicity(G, guard)
    cyc = {Q.successors: len(Q.cycle) for Q in enumerate_unicyclic(G, guard)}
    return hits.keys() == cyc.keys() and all(hits[s] == ell for s, ell in cyc.items())


# ---------------------------------------------------------------------------
# k-vector
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KVector:
    """``k`` in doubles, with the rational values they were rounded from.

    ``exact`` matters only when two entries of ``u`` are so close that no
    ratio of doubles lies strictly inside their admissible interval.
    """

    k: np.ndarray
    mu: float
    mu_prime: float
    u: np.ndarray
    exact: tuple[Fraction, ...] | None = None


def ratio_bounds(ui: float, uj: float, mu: float, mu_prime: float) -> tuple[float, float]:
    """Open interval that ``k_i / k_j`` must lie in, for ``u_i != u_j``.

    Works unchanged on ``Fraction`` arguments.
    """
    lower = uj * (mu + mu_prime) / (mu_prime * ui + mu * uj)
    upper = (mu_prime * uj + mu * ui) / (ui * (mu + mu_prime))
    return lower, upper


def _check_k_inputs(u, mu, mu_prime) -> np.ndarray:
    u = np.asarray(u, dtype=float).reshape(-1)
    if u.size == 0:
        raise ValidationError("need at least one entry", "u")
    if not np.all(np.isfinite(u)) or np.any(u <= 0):
        raise DomainError("entries must be positive and finite", "u")
    for name, val in (("mu", mu), ("mu_prime", mu_prime)):
        if not (math.isfinite(val) and val > 0):
            raise DomainError(f"must be positive, got {val!r}", name)
    return u


def construct_k_vector(u, mu: float, mu_prime: float) -> KVector:
    """Positive ``k`` satisfying the pairwise ratio inequalities.

    Distinct values of ``u`` are visited in ascending order; each new ratio is
    the geometric mean of its admissible interval relative to the previous
    value. Equal entries of ``u`` (bitwise) share one ``k``. The chain is
    carried in rationals; where the rounded geometric mean misses the exact
    interval, its midpoint is used instead.
    """
    u = _check_k_inputs(u, mu, mu_prime)
    levels = np.unique(u)
    fmu, fmp = Fraction(mu), Fraction(mu_prime)
    chain = [Fraction(1)]
    for m in range(1, levels.size):
        lo, hi = ratio_bounds(levels[m], levels[m - 1], mu, mu_prime)
        ratio = Fraction(math.sqrt(lo * hi))
        elo, ehi = ratio_bounds(Fraction(levels[m]), Fraction(levels[m - 1]), fmu, fmp)
        if not elo < ratio < ehi:
            ratio = (elo + ehi) / 2
        chain.append(chain[-1] * ratio)
    idx = np.searchsorted(levels, u)
    k = np.array([float(chain[i]) for i in idx])
    return KVector(k, float(mu), float(mu_prime), u.copy(), tuple(chain[i] for i in idx))


def verify_k_vector(kv: KVector, exact: bool = True) -> bool:
    """Check every ordered pair; ``exact`` evaluates in rational arithmetic."""
    u, k = np.asarray(kv.u, dtype=float), np.asarray(kv.k, dtype=float)
    n = u.size
    conv = Fraction if exact else float
    mu, mp = conv(kv.mu), conv(kv.mu_prime)
    U = [conv(float(x)) for x in u]
    if exact and kv.exact is not None:
        K = list(kv.exact)
    else:
        K = [conv(float(x)) for x in k]
    if any(x <= 0 for x in K):
        return False
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if u[i] == u[j]:
                if K[i] != K[j]:
                    return False
                continue
            ratio = K[i] / K[j]
            lower = U[j] * (mu + mp) / (mp * U[i] + mu * U[j])
            upper = (mp * U[j] + mu * U[i]) / (U[i] * (mu + mp))
            if not lower < ratio < upper:
                return False
    return True
