import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from specmono import netmat
from specmono.errors import ValidationError
from specmono.netmat import build_network, classify_matrix, scc_blocks, strongly_connected
from specmono.spectral import spectral_bound

from strategies import any_digraph, strong_weights


def test_build_two_patch(example_A):
    G = build_network(2, [[0, 1], [0.5, 0]])
    np.testing.assert_array_equal(G.a, example_A)
    assert G.diag_rule == "auto"
    assert G.arcs() == [(0, 1), (1, 0)]


def test_single_patch_is_zero():
    G = build_network(1, [[0.0]])
    np.testing.assert_array_equal(G.a, [[0.0]])


def test_ring_columns_vanish():
    G = build_network(3, [[0, 0, 1], [1, 0, 0], [0, 1, 0]])
    np.testing.assert_array_equal(G.column_sums(), 0.0)


def test_supplied_diagonal_kept():
    G = build_network(2, [[0, 1], [1, 0]], diag=[-3, -1])
    assert G.diag_rule == "supplied"
    np.testing.assert_array_equal(np.diag(G.a), [-3, -1])


def test_matrix_is_read_only():
    G = build_network(2, [[0, 1], [1, 0]])
    with pytest.raises(ValueError):
        G.a[0, 1] = 5.0


@pytest.mark.parametrize("off, field", [
    ([[0, -1], [1, 0]], "offdiag"),
    ([[0, np.nan], [1, 0]], "offdiag"),
    ([[0, np.inf], [1, 0]], "offdiag"),
    ([[1, 1], [1, 0]], "offdiag"),
])
def test_bad_offdiag_rejected(off, field):
    with pytest.raises(ValidationError) as exc:
        build_network(2, off)
    assert exc.value.field == field


def test_bad_shapes_rejected():
    with pytest.raises(ValidationError):
        build_network(0, np.zeros((0, 0)))
    with pytest.raises(ValidationError):
        build_network(2, np.zeros((3, 3)))
    with pytest.raises(ValidationError):
        build_network(2, np.zeros((2, 2)), diag=[1.0])


def test_triplets_reject_duplicates_and_self_arcs():
    G = netmat.network_from_triplets(2, [(0, 1, 1.0), (1, 0, 0.5)])
    np.testing.assert_array_equal(G.a, [[-0.5, 1.0], [0.5, -1.0]])
    with pytest.raises(ValidationError, match="duplicate"):
        netmat.network_from_triplets(2, [(0, 1, 1.0), (0, 1, 2.0)])
    with pytest.raises(ValidationError, match="self arc"):
        netmat.network_from_triplets(2, [(1, 1, 1.0)])
    with pytest.raises(ValidationError, match="out of range"):
        netmat.network_from_triplets(2, [(0, 2, 1.0)])


def test_classify_example(example_A):
    c = classify_matrix(example_A)
    assert c.quasi_positive and c.laplacian and c.sub_laplacian and c.irreducible
    assert not c.strictly_sub and not c.strongly_sub


def test_classify_strictly_not_strongly():
    c = classify_matrix([[-2, 1], [1, -1]])
    assert c.quasi_positive and c.sub_laplacian and c.strictly_sub
    assert not c.strongly_sub and not c.laplacian


def test_classify_strongly_sub():
    c = classify_matrix([[-2, 1], [1, -3]])
    assert c.strongly_sub and c.strictly_sub and not c.laplacian


def test_classify_reducible():
    c = classify_matrix([[0, 1], [0, 0]])
    assert c.quasi_positive and not c.irreducible


def test_classify_negative_offdiag():
    c = classify_matrix([[-1, -1], [1, -1]])
    assert not c.quasi_positive and not c.sub_laplacian


@given(any_digraph())
def test_flag_implications(W):
    n = W.shape[0]
    rng = np.random.default_rng(int(W.sum() * 7) + n)
    A = W + np.diag(rng.choice([-2.0, -1.0, 0.0], n))
    c = classify_matrix(A)
    assert not c.laplacian or c.sub_laplacian
    assert not c.strongly_sub or c.strictly_sub
    assert not c.strictly_sub or c.sub_laplacian
    assert not (c.laplacian and c.strictly_sub)


@given(strong_weights())
def test_auto_diag_is_laplacian(W):
    G = build_network(W.shape[0], W)
    ones = np.ones(G.n)
    assert np.max(np.abs(ones @ G.a)) <= 1e-12 * max(1.0, np.abs(G.a).max())
    assert classify_matrix(G.a).laplacian


def _reachable(W, s):
    seen, todo = {s}, [s]
    while todo:
        v = todo.pop()
        for t in np.flatnonzero(W[:, v] > 0):
            if int(t) not in seen:
                seen.add(int(t))
                todo.append(int(t))
    return seen


@given(any_digraph())
def test_strong_connectivity_matches_bfs(W):
    n = W.shape[0]
    brute = all(len(_reachable(W, s)) == n for s in range(n))
    assert strongly_connected(W) == brute


@given(any_digraph())
def test_blocks_partition_and_triangularize(W):
    n = W.shape[0]
    dec = scc_blocks(W)
    assert sorted(v for b in dec.blocks for v in b) == list(range(n))
    assert sorted(dec.permutation) == list(range(n))
    pos = {v: k for k, b in enumerate(dec.blocks) for v in b}
    # every arc runs from a later block to an earlier one (or stays inside)
    for i, j in zip(*np.nonzero(W)):
        assert pos[int(i)] <= pos[int(j)]
    for b in dec.blocks:
        idx = np.array(b)
        assert strongly_connected(W[np.ix_(idx, idx)])


def test_connected_two_cycles():
    # cycles {1,2} and {3,4} joined by the arc 1 -> 3
    W = np.zeros((4, 4))
    W[0, 1] = W[1, 0] = W[2, 3] = W[3, 2] = 1.0
    W[2, 0] = 1.0
    dec = scc_blocks(W)
    assert dec.blocks == ((2, 3), (0, 1))
    P = W[np.ix_(dec.permutation, dec.permutation)]
    assert np.all(P[2:, :2] == 0)


@given(st.integers(0, 2**32 - 1), st.integers(2, 8))
def test_blockwise_bound_matches_dense(seed, n):
    rng = np.random.default_rng(seed)
    A = np.where(rng.random((n, n)) < 0.3, rng.random((n, n)), 0.0)
    A[np.diag_indices(n)] = rng.uniform(-2, 1, n)
    dense = float(np.max(np.linalg.eigvals(A).real))
    assert abs(spectral_bound(A) - dense) <= 1e-9 * max(1.0, abs(dense))


def test_laplacian_helpers():
    W = np.array([[0, 2.0], [3.0, 0]])
    L = netmat.laplacian_of(W)
    np.testing.assert_array_equal(L, [[3, -2], [-3, 2]])
    np.testing.assert_array_equal(netmat.laplacian_negative(-L), -L)
