import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from siegelkit.errors import GenusMismatchError, MalformedInputError, NotSymplecticError
from siegelkit.symplectic import (
    SymplecticMatrix,
    generators,
    gl_embedding,
    height,
    identity,
    integer_inverse,
    is_symplectic,
    partial_inversion,
    random_real_symplectic,
    random_word,
    sympl_inv,
    sympl_mul,
    translation,
)

genus = st.integers(min_value=1, max_value=3)
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def word(g, seed, length=None):
    rng = np.random.default_rng(seed)
    return random_word(g, length or int(rng.integers(0, 12)), rng)


def test_examples():
    M = SymplecticMatrix([[1, 1], [0, 1]])
    assert M.exact and M.g == 1
    assert height(M) == 1
    assert sympl_inv(M).rows() == [[1, -1], [0, 1]]
    assert is_symplectic(np.array([[0, 1], [-1, 0]]))
    assert not is_symplectic(np.array([[2, 0], [0, 1]]))


def test_rejects_bad_input():
    with pytest.raises(NotSymplecticError):
        SymplecticMatrix([[2, 0], [0, 1]])
    with pytest.raises(MalformedInputError):
        SymplecticMatrix([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    with pytest.raises(MalformedInputError):
        SymplecticMatrix(np.eye(2)[:1])
    with pytest.raises(GenusMismatchError):
        identity(1) @ identity(2)


def test_real_mode_uses_tolerance():
    c, s = np.cos(0.3), np.sin(0.3)
    M = SymplecticMatrix([[c, -s], [s, c]])
    assert not M.exact
    with pytest.raises(NotSymplecticError):
        SymplecticMatrix([[c, -s], [s, c + 1e-6]])
    assert is_symplectic(np.array([[c, -s], [s, c + 1e-12]]))


def test_storage_is_read_only():
    M = identity(2)
    with pytest.raises(ValueError):
        M.entries[0, 0] = 5


def test_generators_fixed_order():
    gens = generators(2)
    # J, three translations, sign flip, swap, shear
    assert len(gens) == 7
    assert gens[0].rows() == [[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]]
    assert gens[1] == translation([[1, 0], [0, 0]])
    assert gens[2] == translation([[0, 1], [1, 0]])
    assert gens[3] == translation([[0, 0], [0, 1]])
    assert [m.rows() for m in generators(1)] == [[[0, 1], [-1, 0]], [[1, 1], [0, 1]], [[-1, 0], [0, -1]]]
    for g in (1, 2, 3):
        for m in generators(g):
            assert is_symplectic(m) and height(m) == 1


def test_generators_reach_height_one_elements():
    # breadth-first search over words, keeping only small matrices
    target = {
        (a, b, c, d)
        for a in (-1, 0, 1) for b in (-1, 0, 1) for c in (-1, 0, 1) for d in (-1, 0, 1)
        if a * d - b * c == 1
    }
    assert len(target) == 20
    gens = generators(1)
    pool = gens + [m.inverse() for m in gens]
    seen = {identity(1).key()}
    frontier = [identity(1)]
    for _ in range(8):
        nxt = []
        for M in frontier:
            for G in pool:
                P = M @ G
                if height(P) <= 3 and P.key() not in seen:
                    seen.add(P.key())
                    nxt.append(P)
        frontier = nxt
    assert target <= seen


@given(genus, seeds, seeds)
def test_closure_and_inverse(g, s1, s2):
    M1, M2 = word(g, s1), word(g, s2)
    P = M1 @ M2
    assert is_symplectic(P)
    assert M1 @ M1.inverse() == identity(g)
    assert M1.inverse() @ M1 == identity(g)
    assert sympl_inv(P) == sympl_mul(sympl_inv(M2), sympl_inv(M1))


@given(genus, seeds, seeds, seeds)
def test_associativity(g, s1, s2, s3):
    A, B, C = word(g, s1), word(g, s2), word(g, s3)
    assert (A @ B) @ C == A @ (B @ C)


@given(genus, seeds, seeds)
def test_height_relations(g, s1, s2):
    M1, M2 = word(g, s1), word(g, s2)
    # inverse entries are the entries of M up to sign and position
    assert height(M1.inverse()) == height(M1)
    # each entry of a product is a sum of 2g products
    assert height(M1 @ M2) <= 2 * g * height(M1) * height(M2)


def test_no_overflow_in_long_words():
    rng = np.random.default_rng(7)
    M = random_word(2, 400, rng)
    assert is_symplectic(M)
    assert isinstance(height(M), int)


@given(st.integers(1, 3), seeds)
def test_gl_embedding_and_inverse(g, seed):
    rng = np.random.default_rng(seed)
    U = np.eye(g, dtype=int)
    for _ in range(6):
        E = np.eye(g, dtype=int)
        if g > 1:
            i, j = rng.choice(g, 2, replace=False)
            E[i, j] = int(rng.integers(-2, 3))
        else:
            E[0, 0] = -1
        U = U @ E
    Ui = integer_inverse(U)
    assert np.array_equal(np.asarray(U @ Ui, dtype=int), np.eye(g, dtype=int))
    assert is_symplectic(gl_embedding(U))


def test_integer_inverse_rejects_non_unimodular():
    with pytest.raises(MalformedInputError):
        integer_inverse([[2, 0], [0, 1]])


@pytest.mark.parametrize("g", [1, 2, 3])
def test_partial_inversions(g):
    for r in range(1, g + 1):
        assert is_symplectic(partial_inversion(r, g))


def test_random_real_symplectic():
    rng = np.random.default_rng(3)
    for g in (1, 2, 3):
        M = random_real_symplectic(g, rng)
        assert not M.exact and is_symplectic(M.entries, 1e-9)
