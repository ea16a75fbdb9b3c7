import itertools

import numpy as np
import pytest

from eacw.channels import ChannelSet, counterexample_pair, depolarizing, identity, random_channel
from eacw.coding.codes import (
    EACode,
    avqc_code_from_compound,
    basis_toy_code,
    controlled_code,
    counterexample_bound,
    counterexample_code,
    counterexample_exact,
    derandomisation_curve,
    evaluate_code_avqc,
    evaluate_code_compound,
    max_from_avg,
    message_errors,
    permuted_code,
    permuted_word,
    random_pairs,
    relabel,
    toy_code,
)
from eacw.linalg import ResourceError, ValidationError


def qubit_set(seed):
    rng = np.random.default_rng(seed)
    return ChannelSet((random_channel(2, 2, rng, 2), random_channel(2, 2, rng, 2)))


def test_code_invariants():
    good = basis_toy_code([[1, 0], [0, 1]])
    with pytest.raises(ValidationError):
        EACode(1, 2, 2, good.resource, 1, good.encoders, np.array([np.eye(2), np.eye(2)]))
    with pytest.raises(ValidationError):
        EACode(1, 2, 2, good.resource, 1, good.encoders, np.array([np.diag([1.2, 0]), np.diag([0, 1])]))
    with pytest.raises(ValidationError):
        EACode(1, 2, 2, np.array([1.0, 1.0]), 1, good.encoders, good.povm)


def test_compound_evaluation_examples():
    perfect = basis_toy_code([[1, 0], [0, 1]])
    rep = evaluate_code_compound(perfect, ChannelSet((identity(2),)))
    assert rep.average == rep.maximal == 0
    flat = basis_toy_code([[0.5, 0.5], [0.5, 0.5]])
    rep = evaluate_code_compound(flat, ChannelSet((identity(2), depolarizing(0.4, 2))))
    assert np.allclose(rep.per_message, 0.5) and abs(rep.maximal - 0.5) <= 1e-12


def test_report_invariants_on_random_codes():
    rng = np.random.default_rng(0)
    cs = qubit_set(1)
    for _ in range(10):
        rep = evaluate_code_compound(toy_code(rng, m=3), cs)
        assert 0 <= rep.average <= rep.maximal <= 1
        assert abs(rep.average - rep.per_message.mean()) <= 1e-12


def test_avqc_evaluation_examples():
    rng = np.random.default_rng(2)
    code = toy_code(rng, n=2)
    single = ChannelSet((depolarizing(0.2, 2),))
    assert abs(evaluate_code_avqc(code, single).average - evaluate_code_compound(code, single).average) <= 1e-12
    flat = basis_toy_code([[0.5, 0.5], [0.5, 0.5]])
    rep = evaluate_code_avqc(flat, ChannelSet((identity(2), depolarizing(0.4, 2))))
    assert len({round(v[0], 12) for v in rep.by_index.values()}) == 1
    assert len(rep.by_index) == 2


def test_avqc_guard():
    code = counterexample_code(1)
    big = ChannelSet(tuple(counterexample_pair().channels) * 10)
    assert evaluate_code_avqc(code, big)
    with pytest.raises(ResourceError):
        evaluate_code_avqc(counterexample_code(8), ChannelSet(tuple(counterexample_pair().channels) * 3))


def test_counterexample_examples():
    cs = counterexample_pair()
    c1 = counterexample_code(1)
    assert c1.M == 5 and sorted(c1.codewords) == [(i,) for i in range(5)]
    rep = evaluate_code_compound(c1, cs)
    assert abs(rep.by_index[0][0] - 2 / 5) <= 1e-15
    assert 2 / 5 <= counterexample_bound(1) == 3 / 5
    c3 = counterexample_code(3)
    assert c3.M == 53
    rep = evaluate_code_compound(c3, cs)
    assert all(avg < 0.5 for avg, _ in rep.by_index.values())
    assert abs(rep.by_index[0][0] - 26 / 53) <= 1e-12
    with pytest.raises(ValidationError):
        counterexample_code(9)


@pytest.mark.parametrize("n", [1, 2])
def test_counterexample_dense_matches_structured(n):
    cs = counterexample_pair()
    code = counterexample_code(n)
    dense = code.dense()
    assert dense.M == code.M and dense.L == 1
    for ch in cs:
        a = code.message_errors([ch] * n)
        b = message_errors(dense, [ch] * n)
        assert np.max(np.abs(a - b)) <= 1e-12
    # mixed words agree as well
    for word in itertools.product(cs.channels, repeat=n):
        assert np.max(np.abs(code.message_errors(word) - message_errors(dense, word))) <= 1e-12
    assert abs(evaluate_code_compound(dense, cs).average - counterexample_exact(n)) <= 1e-12


def test_relabel_and_controlled_identity():
    rng = np.random.default_rng(3)
    code = toy_code(rng, m=3)
    ch = depolarizing(0.1, 2)
    assert np.allclose(message_errors(relabel(code, [2, 0, 1]), [ch]), message_errors(code, [ch])[[2, 0, 1]])
    with pytest.raises(ValidationError):
        relabel(code, [0, 0, 1])
    one = controlled_code([code])
    assert np.max(np.abs(message_errors(one, [ch]) - message_errors(code, [ch]))) <= 1e-12


def test_max_from_avg_examples():
    flat = basis_toy_code([[0.5, 0.5], [0.5, 0.5]])
    conv = max_from_avg(flat)
    assert np.allclose(message_errors(conv, [identity(2)]), 0.5)
    toy = basis_toy_code([[0.9, 0.3], [0.1, 0.7]])
    assert np.allclose(message_errors(toy, [identity(2)]), [0.1, 0.3])
    conv = max_from_avg(toy)
    assert conv.L == 2 * toy.L
    assert np.max(np.abs(message_errors(conv, [identity(2)]) - 0.2)) <= 1e-12
    conv = max_from_avg(counterexample_code(1).dense())
    assert abs(evaluate_code_compound(conv, counterexample_pair()).by_index[0][1] - 2 / 5) <= 1e-12
    assert evaluate_code_compound(conv, counterexample_pair()).maximal <= 2 / 5 + 1e-12


def test_permuted_code_examples():
    rng = np.random.default_rng(4)
    cs = qubit_set(5)
    code = toy_code(rng, n=2, m=3)
    same = permuted_code(code, [0, 1], [0, 1, 2])
    assert np.allclose(same.povm, code.povm)
    for ch in cs:
        a = message_errors(permuted_code(code, [1, 0]), [ch, ch])
        assert np.max(np.abs(a - message_errors(code, [ch, ch]))) <= 1e-10
    s1, s2 = cs.channels
    a = message_errors(permuted_code(code, [1, 0]), [s1, s2])
    b = message_errors(code, [s2, s1])
    assert np.max(np.abs(a - b)) <= 1e-10


def test_permuted_code_word_identity():
    rng = np.random.default_rng(6)
    cs = qubit_set(7)
    code = toy_code(rng, n=3, m=2)
    for sigma in itertools.permutations(range(3)):
        alpha = [1, 0]
        pc = permuted_code(code, sigma, alpha)
        for word in itertools.product(range(2), repeat=3):
            t = permuted_word(word, sigma)
            a = message_errors(pc, [cs[s] for s in word])
            b = message_errors(code, [cs[s] for s in t])[alpha]
            assert np.max(np.abs(a - b)) <= 1e-10


def test_avqc_code_from_compound_examples():
    rng = np.random.default_rng(8)
    cs = qubit_set(9)
    code = toy_code(rng, n=2)
    one = avqc_code_from_compound(code, [([0, 1], [0, 1])])
    for word in itertools.product(cs.channels, repeat=2):
        assert np.max(np.abs(message_errors(one, word) - message_errors(code, word))) <= 1e-12
    sym = ChannelSet((depolarizing(0.2, 2),))
    both = avqc_code_from_compound(code, [([1, 0], [1, 0]), ([1, 0], [1, 0])])
    assert abs(evaluate_code_avqc(both, sym).average - evaluate_code_avqc(code, sym).average) <= 1e-12


def test_avqc_code_from_compound_n3():
    rng = np.random.default_rng(10)
    cs = qubit_set(11)
    code = toy_code(rng, n=3)
    pairs = random_pairs(3, code.M, 6, seed=0)
    new = avqc_code_from_compound(code, pairs)
    assert new.L == 6 * code.L and new.M == code.M
    rep = evaluate_code_avqc(new, cs)
    assert len(rep.by_index) == 8
    for word in rep.by_index:
        chans = [cs[s] for s in word]
        mean = np.mean([message_errors(permuted_code(code, s, a), chans) for s, a in pairs], axis=0)
        assert np.max(np.abs(mean - message_errors(new, chans))) <= 1e-10
    curve = derandomisation_curve(code, cs, [1, 2], seed=0)
    assert [r["K"] for r in curve] == [1, 2]
