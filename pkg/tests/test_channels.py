import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eacw.channels import (
    Channel,
    ChannelSet,
    CqChannel,
    apply,
    choi,
    choi_to_kraus,
    counterexample_pair,
    cq_apply,
    depolarizing,
    identity,
    measure_prepare,
    mix,
    product,
    random_channel,
    tensor_apply,
)
from eacw.linalg import (
    ResourceError,
    ValidationError,
    maximally_entangled,
    maximally_mixed,
    projector,
    random_density,
)

seeds = st.integers(0, 2**32 - 1)
E = np.eye(5)


def e(i):
    return np.outer(E[i], E[i])


def test_channel_validation():
    with pytest.raises(ValidationError):
        Channel(np.array([[[1.0, 0], [0, 0.5]]]))
    with pytest.raises(ValidationError):
        ChannelSet(())
    with pytest.raises(ValidationError):
        ChannelSet((identity(2), identity(3)))
    with pytest.raises(ValidationError):
        depolarizing(1.5, 2)


def test_apply_examples():
    rng = np.random.default_rng(0)
    rho = random_density(3, rng)
    assert np.allclose(apply(identity(3), rho), rho)
    assert np.allclose(apply(depolarizing(1.0, 3), rho), maximally_mixed(3))
    with pytest.raises(ValidationError):
        apply(identity(2), rho)


@given(seeds, st.integers(1, 4))
def test_random_channel_preserves_trace(seed, r):
    rng = np.random.default_rng(seed)
    ch = random_channel(2, 3, rng, r)
    out = apply(ch, random_density(2, rng))
    assert abs(np.trace(out) - 1) <= 1e-10
    assert np.linalg.eigvalsh(out)[0] >= -1e-10


def test_choi_examples():
    j = choi(identity(2))
    assert np.linalg.matrix_rank(j, tol=1e-10) == 1
    assert np.allclose(j, projector(maximally_entangled(2)))
    assert np.allclose(choi(depolarizing(1.0, 2)), np.eye(4) / 4)


@settings(max_examples=25)
@given(seeds)
def test_choi_round_trip(seed):
    rng = np.random.default_rng(seed)
    ch = random_channel(2, 2, rng, 3)
    back = choi_to_kraus(choi(ch), 2)
    rho = random_density(2, rng)
    assert np.max(np.abs(apply(ch, rho) - apply(back, rho))) <= 1e-9


def test_choi_to_kraus_rejects_non_psd():
    with pytest.raises(ValidationError):
        choi_to_kraus(np.diag([0.6, 0.6, -0.2, 0.0]), 2)


def test_mix_examples():
    cs = counterexample_pair()
    rho = random_density(5, np.random.default_rng(1))
    assert np.allclose(apply(mix(cs, [1, 0]), rho), apply(cs[0], rho))
    same = ChannelSet((cs[0], cs[0]))
    assert np.allclose(apply(mix(same, [0.5, 0.5]), rho), apply(cs[0], rho))
    assert np.allclose(apply(mix(cs, [0.5, 0.5]), e(0)), 0.5 * e(0) + 0.5 * e(2))
    with pytest.raises(ValidationError):
        mix(cs, [0.7, 0.7])


@given(seeds, st.floats(0, 1))
def test_mix_is_convex_combination(seed, t):
    rng = np.random.default_rng(seed)
    cs = ChannelSet((random_channel(2, 2, rng), random_channel(2, 2, rng)))
    rho = random_density(2, rng)
    want = t * apply(cs[0], rho) + (1 - t) * apply(cs[1], rho)
    assert np.max(np.abs(apply(mix(cs, [t, 1 - t]), rho) - want)) <= 1e-10


@given(seeds, st.floats(0, 1), st.integers(2, 4))
def test_depolarizing_formula(seed, g, d):
    rho = random_density(d, np.random.default_rng(seed))
    want = (1 - g) * rho + g * np.eye(d) / d
    assert np.max(np.abs(apply(depolarizing(g, d), rho) - want)) <= 1e-12


def test_depolarizing_examples():
    assert np.allclose(apply(depolarizing(0.0, 2), np.diag([0.3, 0.7])), np.diag([0.3, 0.7]))
    assert np.allclose(apply(depolarizing(0.5, 2), np.diag([1.0, 0.0])), np.diag([0.75, 0.25]))


def test_counterexample_pair():
    n1, n2 = counterexample_pair()
    assert np.allclose(apply(n1, e(3)), e(2))
    assert np.allclose(apply(n2, e(0)), e(2))
    assert np.allclose(apply(n1, np.outer(E[0], E[1])), 0)
    for i in (0, 1):
        assert np.allclose(apply(n1, e(i)), e(i))
    for i in (3, 4):
        assert np.allclose(apply(n2, e(i)), e(i))


def test_counterexample_channels_entanglement_breaking():
    for ch in counterexample_pair():
        out = tensor_apply([ch], projector(maximally_entangled(5)), extra_dims=[5])
        pt = out.reshape(5, 5, 5, 5).transpose(0, 3, 2, 1).reshape(25, 25)
        assert np.linalg.eigvalsh(pt)[0] >= -1e-9


def test_tensor_apply_examples():
    rng = np.random.default_rng(5)
    rho = random_density(4, rng)
    assert np.allclose(tensor_apply([identity(2), identity(2)], rho), rho)
    a, b = random_channel(2, 3, rng), random_channel(2, 2, rng)
    r, s = random_density(2, rng), random_density(2, rng)
    out = tensor_apply([a, b], np.kron(r, s))
    assert np.max(np.abs(out - np.kron(apply(a, r), apply(b, s)))) <= 1e-10
    n1 = counterexample_pair()[0]
    assert np.allclose(tensor_apply([n1, n1], np.kron(e(3), e(4))), np.kron(e(2), e(2)))


def test_tensor_apply_matches_product_channel():
    rng = np.random.default_rng(6)
    a, b = random_channel(2, 2, rng), random_channel(3, 2, rng)
    rho = random_density(6, rng)
    assert np.max(np.abs(tensor_apply([a, b], rho) - apply(product(a, b), rho))) <= 1e-10


def test_tensor_apply_guard():
    with pytest.raises(ResourceError):
        tensor_apply([identity(2)] * 7, np.eye(128) / 128, guard_dim=64)


def test_cq_apply():
    rng = np.random.default_rng(7)
    w = CqChannel((random_density(2, rng), random_density(2, rng)))
    assert np.allclose(cq_apply(w, [1]), w[1])
    assert np.max(np.abs(cq_apply(w, [0, 1]) - np.kron(w[0], w[1]))) <= 1e-12
    const = CqChannel((w[0], w[0]))
    assert np.allclose(cq_apply(const, [0, 1, 1]), np.kron(np.kron(w[0], w[0]), w[0]))
    with pytest.raises(ValidationError):
        cq_apply(w, [2])


def test_measure_prepare_is_cptp():
    ch = measure_prepare([1, 1, 0], 3, 2)
    assert ch.dim_in == 3 and ch.dim_out == 2
    assert np.allclose(apply(ch, maximally_mixed(3)), np.diag([1 / 3, 2 / 3]))
