"""Connectivity matrices, their digraphs, and structural classification.

Orientation is fixed here for the whole package: ``a[i, j]`` is the movement
rate from patch ``j`` into patch ``i``. In the associated digraph that entry
is an arc with source ``j`` and target ``i``, present iff ``a[i, j] > 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError

_EPS = np.finfo(float).eps


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def as_square(M, name: str = "matrix") -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise ValidationError(f"expected a non-empty square matrix, got shape {M.shape}", name)
    return M


@dataclass(frozen=True)
class DispersalNetwork:
    """Validated connectivity matrix.

    ``diag_rule`` is ``"auto"`` when the diagonal was filled so that every
    column sums to zero, ``"supplied"`` otherwise.
    """

    n: int
    a: np.ndarray
    diag_rule: str = "auto"

    def arcs(self) -> list[tuple[int, int]]:
        """Present arcs as ``(source, target)`` pairs, sorted."""
        tgt, src = np.nonzero(self.offdiag() > 0)
        return sorted(zip(src.tolist(), tgt.tolist()))

    def offdiag(self) -> np.ndarray:
        off = self.a.copy()
        np.fill_diagonal(off, 0.0)
        return off

    def column_sums(self) -> np.ndarray:
        return np.array([math.fsum(self.a[:, j]) for j in range(self.n)])


def _check_offdiag(off: np.ndarray, field: str = "offdiag") -> None:
    if not np.all(np.isfinite(off)):
        i, j = np.argwhere(~np.isfinite(off))[0]
        raise ValidationError(f"non-finite entry at ({i}, {j})", field)
    mask = ~np.eye(off.shape[0], dtype=bool)
    bad = np.argwhere((off < 0) & mask)
    if bad.size:
        i, j = bad[0]
        raise ValidationError(f"negative movement rate {off[i, j]!r} at ({i}, {j})", field)


def build_network(n: int, offdiag, diag: Sequence[float] | None = None) -> DispersalNetwork:
    """Build a network from off-diagonal rates, auto-filling the diagonal if absent.

    With ``diag=None`` each ``a[j, j]`` is set to minus the exact (``fsum``)
    total of column ``j``, so column sums vanish to within one rounding.
    Diagonal entries of ``offdiag`` must be zero: self arcs are rejected.
    """
    if int(n) != n or n < 1:
        raise ValidationError(f"patch count must be a positive integer, got {n!r}", "n")
    n = int(n)
    off = np.asarray(offdiag, dtype=float)
    if off.shape != (n, n):
        raise ValidationError(f"expected shape ({n}, {n}), got {off.shape}", "offdiag")
    _check_offdiag(off)
    if np.any(np.diag(off) != 0):
        k = int(np.flatnonzero(np.diag(off))[0])
        raise ValidationError(f"self arc at patch {k} (diagonal must be zero here)", "offdiag")
    a = off.copy()
    if diag is None:
        for j in range(n):
            a[j, j] = -math.fsum(off[:, j])
        rule = "auto"
    else:
        d = np.asarray(diag, dtype=float)
        if d.shape != (n,):
            raise ValidationError(f"expected {n} diagonal entries, got shape {d.shape}", "diag")
        if not np.all(np.isfinite(d)):
            raise ValidationError("non-finite diagonal entry", "diag")
        a[np.diag_indices(n)] = d
        rule = "supplied"
    return DispersalNetwork(n=n, a=_readonly(a), diag_rule=rule)


def network_from_triplets(n: int, triplets: Iterable[Sequence[float]],
                          diag: Sequence[float] | None = None) -> DispersalNetwork:
    """Build from 0-based ``(i, j, rate)`` triplets meaning movement ``j -> i``.

    Duplicate and self arcs are rejected rather than summed.
    """
    off = np.zeros((n, n))
    seen: set[tuple[int, int]] = set()
    for k, t in enumerate(triplets):
        if len(t) != 3:
            raise ValidationError("each edge must be [i, j, rate]", f"edges[{k}]")
        i, j, rate = t
        if int(i) != i or int(j) != j or not (0 <= i < n and 0 <= j < n):
            raise ValidationError(f"patch index out of range: ({i}, {j})", f"edges[{k}]")
        i, j = int(i), int(j)
        if i == j:
            raise ValidationError(f"self arc at patch {i}", f"edges[{k}]")
        if (i, j) in seen:
            raise ValidationError(f"duplicate arc ({i}, {j})", f"edges[{k}]")
        seen.add((i, j))
        rate = float(rate)
        if not math.isfinite(rate):
            raise ValidationError("non-finite rate", f"edges[{k}]")
        if rate < 0:
            raise ValidationError(f"negative movement rate {rate!r}", f"edges[{k}]")
        off[i, j] = rate
    return build_network(n, off, diag)


def network_from_matrix(A) -> DispersalNetwork:
    """Wrap a full matrix, keeping its diagonal as supplied."""
    A = as_square(A, "A")
    off = A.copy()
    np.fill_diagonal(off, 0.0)
    return build_network(A.shape[0], off, np.diag(A).copy())


def laplacian_negative(A) -> np.ndarray:
    """Off-diagonal part of ``A`` with the diagonal reset to zero column sums."""
    A = as_square(A)
    off = A.copy()
    np.fill_diagonal(off, 0.0)
    for j in range(A.shape[0]):
        off[j, j] = -math.fsum(off[:, j])
    return off


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MatrixClass:
    """Flags for a square matrix ``A``.

    The Laplacian-type flags describe ``L = -A`` in the column sense:
    ``laplacian`` means every column of ``A`` sums to zero, ``sub_laplacian``
    that every column sum is ``<= 0``, ``strictly_sub`` that some column sum
    is negative, ``strongly_sub`` that all are.
    """

    quasi_positive: bool
    laplacian: bool
    sub_laplacian: bool
    strictly_sub: bool
    strongly_sub: bool
    irreducible: bool


def _column_signs(A: np.ndarray) -> np.ndarray:
    # -1, 0, +1 per column; zero means within one rounding of the summation
    sums = np.array([math.fsum(A[:, j]) for j in range(A.shape[0])])
    scale = np.abs(A).sum(axis=0)
    tol = A.shape[0] * _EPS * scale
    return np.where(sums > tol, 1, np.where(sums < -tol, -1, 0))


def is_quasi_positive(A) -> bool:
    A = as_square(A)
    mask = ~np.eye(A.shape[0], dtype=bool)
    return bool(np.all(A[mask] >= 0))


def classify_matrix(A) -> MatrixClass:
    A = as_square(A)
    qp = is_quasi_positive(A)
    signs = _column_signs(A)
    sub = qp and bool(np.all(signs <= 0))
    return MatrixClass(
        quasi_positive=qp,
        laplacian=sub and bool(np.all(signs == 0)),
        sub_laplacian=sub,
        strictly_sub=sub and bool(np.any(signs < 0)),
        strongly_sub=sub and bool(np.all(signs < 0)),
        irreducible=strongly_connected(A),
    )


# ---------------------------------------------------------------------------
# strongly connected components
# ---------------------------------------------------------------------------


def _successors(A: np.ndarray) -> list[list[int]]:
    # arc j -> i whenever a[i, j] > 0
    n = A.shape[0]
    off = A > 0
    off[np.diag_indices(n)] = False
    return [np.flatnonzero(off[:, j]).tolist() for j in range(n)]


def tarjan_scc(succ: list[list[int]]) -> list[list[int]]:
    """Strongly connected components, iteratively, sinks first.

    Each component is returned sorted. Every arc between two components goes
    from a later component to an earlier one.
    """
    n = len(succ)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for start in range(n):
        if index[start] != -1:
            continue
        work = [(start, 0)]
        index[start] = low[start] = counter
        counter += 1
        stack.append(start)
        on_stack[start] = True
        while work:
            v, k = work[-1]
            if k < len(succ[v]):
                work[-1] = (v, k + 1)
                w = succ[v][k]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
    return comps


def strongly_connected(A) -> bool:
    A = as_square(A)
    return len(tarjan_scc(_successors(A))) == 1


@dataclass(frozen=True)
class BlockDecomposition:
    """Strongly connected blocks ordered so ``A[perm][:, perm]`` is block upper triangular."""

    blocks: tuple[tuple[int, ...], ...]
    permutation: tuple[int, ...]


def scc_blocks(A) -> BlockDecomposition:
    A = as_square(A)
    comps = tarjan_scc(_successors(A))
    # sinks first: arcs only run from later blocks to earlier ones, which puts
    # every nonzero off-block entry above the block diagonal
    blocks = tuple(tuple(c) for c in comps)
    perm = tuple(v for b in blocks for v in b)
    return BlockDecomposition(blocks=blocks, permutation=perm)


def weights_of(G) -> np.ndarray:
    """Off-diagonal arc weights ``w[target, source]`` of a network or matrix."""
    A = G.a if isinstance(G, DispersalNetwork) else as_square(G, "A")
    off = np.array(A, dtype=float, copy=True)
    np.fill_diagonal(off, 0.0)
    return off


def laplacian_of(G) -> np.ndarray:
    """``L`` with ``l_ij = -a_ij`` off the diagonal and ``l_ii = sum_{k != i} a_ki``."""
    off = weights_of(G)
    L = -off
    L[np.diag_indices_from(L)] = off.sum(axis=0)
    return L
