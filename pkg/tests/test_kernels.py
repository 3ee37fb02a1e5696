import numpy as np
import pytest

from logprivacy import kernels

BACKENDS = kernels.available_backends()


@pytest.fixture(params=sorted(BACKENDS))
def backend(request):
    return BACKENDS[request.param]


def arr(xs):
    return np.array(xs, dtype=np.int64)


@pytest.mark.parametrize("a, b, expected", [
    ([], [], 0),
    ([1, 2, 3], [], 3),
    ([], [1, 2], 2),
    ([1, 2, 3], [1, 2, 3], 0),
    ([0, 1, 2, 3], [0, 4, 2, 5], 2),
    ([7, 8, 9], [9, 8, 7], 2),
])
def test_levenshtein(backend, a, b, expected):
    assert backend.levenshtein(arr(a), arr(b)) == expected


def test_levenshtein_many(backend):
    targets = [[1, 2], [], [1, 2, 3, 4], [3]]
    flat = arr([x for t in targets for x in t])
    offsets = arr([0, 2, 2, 6, 7])
    assert backend.levenshtein_many(arr([1, 2, 3]), flat, offsets).tolist() == [1, 3, 1, 2]


def _epoch_inputs(seed):
    rng = np.random.default_rng(seed)
    n, dim, pairs = 6, 8, 300
    w_in = (rng.random((n, dim)) - 0.5) / dim
    w_out = rng.normal(scale=0.1, size=(n, dim))
    centers = rng.integers(0, n, pairs).astype(np.int64)
    contexts = rng.integers(0, n, pairs).astype(np.int64)
    negatives = rng.integers(0, n, (pairs, 4)).astype(np.int64)
    return w_in, w_out, centers, contexts, negatives


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled kernels not built")
def test_backends_agree_bitwise():
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    rng = np.random.default_rng(0)
    for _ in range(50):
        a = rng.integers(0, 4, rng.integers(0, 15)).astype(np.int64)
        b = rng.integers(0, 4, rng.integers(0, 15)).astype(np.int64)
        assert py.levenshtein(a, b) == cy.levenshtein(a, b)
    for seed in range(3):
        w1, o1, c, x, n = _epoch_inputs(seed)
        w2, o2 = w1.copy(), o1.copy()
        s1 = py.sgns_epoch(w1, o1, c, x, n, 0.05, 0.001, 10, 2000)
        s2 = cy.sgns_epoch(w2, o2, c, x, n, 0.05, 0.001, 10, 2000)
        assert s1 == s2 == 310
        assert np.array_equal(w1, w2) and np.array_equal(o1, o2)


def test_sgns_moves_pair_together(backend):
    # one positive pair, no usable negatives: the score of (0, 1) must rise
    w_in = np.full((2, 4), 0.1)
    w_out = np.full((2, 4), 0.1)
    before = w_in[0] @ w_out[1]
    backend.sgns_epoch(w_in, w_out, arr([0] * 20), arr([1] * 20), arr([[1]] * 20), 0.1, 0.1, 0, 20)
    assert w_in[0] @ w_out[1] > before
    # the center of the untouched row is unchanged
    assert np.all(w_in[1] == 0.1)
