import numpy as np
import pytest

from eacw.channels import depolarizing, identity, product, random_channel
from eacw.coding.encoding import (
    build_encoding_family,
    mutual_approx_gap,
    scrambled_average,
    scrambling_target,
    verify_entropy_invariance,
    verify_scrambling,
)
from eacw.coding.types import enumerate_types
from eacw.linalg import ResourceError, maximally_mixed, random_density, random_pure, trace_norm


def test_types_examples():
    t = enumerate_types(1, 2)
    assert [x.counts for x in t] == [(1, 0), (0, 1)] and all(x.dim == 1 for x in t)
    t = enumerate_types(2, 2)
    assert [x.counts for x in t] == [(2, 0), (1, 1), (0, 2)]
    assert [x.dim for x in t] == [1, 2, 1]
    t = enumerate_types(3, 3)
    assert sum(x.dim for x in t) == 27 and len(t) <= 4**3
    with pytest.raises(ResourceError):
        enumerate_types(13, 3)


@pytest.mark.parametrize("k,d", [(1, 3), (3, 2), (4, 3), (5, 2)])
def test_types_complete(k, d):
    t = enumerate_types(k, d)
    seqs = [s for x in t for s in x.sequences]
    assert len(seqs) == len(set(seqs)) == d**k
    assert len(t) <= (k + 1) ** d
    assert all(x.dim == x.multinomial() for x in t)
    p = np.array([0.5, 0.3, 0.2][:d]) / np.sum([0.5, 0.3, 0.2][:d])
    assert abs(sum(x.probability(p) for x in t) - 1) <= 1e-12


def test_family_examples():
    fam = build_encoding_family(np.diag([0.7, 0.3]), 1)
    # two one-dimensional blocks: the only unitaries are +-1
    assert fam.size == 2 * 2
    fam = build_encoding_family(maximally_mixed(2), 2)
    assert fam.letter_sizes == (2, 8, 2)
    assert fam.size == 2 * 8 * 2
    for x in fam.letters():
        u = fam.unitary(x)
        assert np.allclose(u @ u.conj().T, np.eye(4))
    # the d=2 block carries the Pauli set
    vs = fam.block_unitaries[1]
    gram = np.array([[np.trace(a.conj().T @ b) for b in vs] for a in vs])
    assert np.max(np.abs(gram - 2 * np.eye(4))) <= 1e-9


def test_scrambling_examples():
    fam = build_encoding_family(np.diag([1.0, 0.0]), 1)
    psi = fam.purification_k()
    assert np.allclose(scrambled_average(fam), np.outer(psi, psi.conj()))
    assert verify_scrambling(build_encoding_family(np.diag([0.7, 0.3]), 2)) <= 1e-9
    fam = build_encoding_family(maximally_mixed(2), 2)
    target = sum(t.dim / 4 * np.kron(b @ b.conj().T / t.dim, b @ b.conj().T / t.dim)
                 for t, b in zip(fam.types, fam.block_bases))
    assert np.allclose(scrambling_target(fam), target)
    assert verify_scrambling(fam) <= 1e-9


def test_scrambling_paths_agree():
    sigma = random_density(2, np.random.default_rng(1))
    fam = build_encoding_family(sigma, 2)
    explicit = scrambled_average(fam, explicit_limit=10**6)
    blockwise = scrambled_average(fam, explicit_limit=0)
    assert trace_norm(explicit - blockwise) <= 1e-12


def test_entropy_invariance_examples():
    rng = np.random.default_rng(2)
    fam = build_encoding_family(random_density(2, rng), 2)
    ch = product(depolarizing(0.2, 2), depolarizing(0.2, 2))
    ident = tuple((0, 0) for _ in fam.types)
    assert verify_entropy_invariance(fam, ch, ident)[2] <= 1e-12
    for _ in range(5):
        assert verify_entropy_invariance(fam, ch, fam.random_letter(rng))[2] <= 1e-9
    with pytest.raises(ValueError):
        verify_entropy_invariance(fam, identity(2), ident)


def test_mutual_gap_examples():
    pure = np.outer(random_pure(2, np.random.default_rng(3)), random_pure(2, np.random.default_rng(3)).conj())
    r = mutual_approx_gap(pure, 1, depolarizing(0.3, 2))
    assert r["holds"] and r["exhaustive"]
    r = mutual_approx_gap(random_density(2, np.random.default_rng(4)), 2, depolarizing(0.3, 2))
    assert r["gap"] <= 4 * np.log2(3)
    r = mutual_approx_gap(random_density(2, np.random.default_rng(5)), 3,
                          random_channel(2, 2, np.random.default_rng(6)))
    assert r["holds"]
    assert r["chi"] <= r["kI"] + 1e-9
