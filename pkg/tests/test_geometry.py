import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eacw.channels import Channel, ChannelSet, apply, counterexample_pair, depolarizing, identity, random_channel
from eacw.geometry import diamond_norm_diff, evaluate_witness, hausdorff_distance
from eacw.linalg import ValidationError, random_density, trace_norm


def preparation(state):
    # constant channel on a qubit: x -> tr(x) state
    w, u = np.linalg.eigh(state)
    ks = [np.sqrt(max(l, 0)) * np.outer(u[:, i], np.eye(2)[j]) for i, l in enumerate(w) for j in range(2)]
    return Channel(np.array(ks))


def depolarized(ch, g):
    dep = depolarizing(g, ch.dim_out)
    return Channel(np.array([a @ b for a in dep.kraus for b in ch.kraus]))


def test_diamond_examples():
    ch = random_channel(2, 2, np.random.default_rng(0))
    assert diamond_norm_diff(ch, ch).lower <= 1e-12
    est = diamond_norm_diff(identity(2), depolarizing(1.0, 2))
    assert abs(est.lower - 1.5) <= 1e-9
    est = diamond_norm_diff(preparation(np.diag([1.0, 0.0])), preparation(np.diag([0.0, 1.0])))
    assert abs(est.lower - 2.0) <= 1e-9


def _sampling_oracle(n, m, samples=100_000, seed=0):
    rng = np.random.default_rng(seed)
    d = n.dim_in
    best, best_psi = -1.0, None
    for chunk in range(samples // 10_000):
        v = rng.standard_normal((10_000, d * d)) + 1j * rng.standard_normal((10_000, d * d))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        a = v.reshape(-1, d, d)

        def out(ch):
            w = np.einsum("sri,kai->skra", a, ch.kraus)  # (1 (x) K) psi
            w = w.reshape(w.shape[0], w.shape[1], -1)
            return np.einsum("ski,skj->sij", w, w.conj())

        diff = out(n) - out(m)
        vals = np.abs(np.linalg.eigvalsh(diff)).sum(axis=1)
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, best_psi = vals[i], v[i]
    return best, best_psi


def test_diamond_matches_sampling_oracle():
    n, m = identity(2), depolarizing(1.0, 2)
    oracle, _ = _sampling_oracle(n, m)
    est = diamond_norm_diff(n, m)
    assert est.lower >= oracle - 1e-4
    assert abs(est.lower - oracle) <= 1e-2  # the sampled best is a lower estimate itself
    assert abs(est.lower - 1.5) <= 1e-4


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_diamond_invariants(seed):
    rng = np.random.default_rng(seed)
    n, m = random_channel(2, 2, rng), random_channel(2, 2, rng)
    est = diamond_norm_diff(n, m, starts=8, seed=seed)
    assert 0 <= est.lower <= est.upper + 1e-7
    assert abs(evaluate_witness(n, m, est.witness) - est.lower) <= 1e-9
    for _ in range(20):
        rho = random_density(2, rng)
        assert est.lower >= trace_norm(apply(n, rho) - apply(m, rho)) - 1e-9


def test_diamond_dimension_mismatch():
    with pytest.raises(ValidationError):
        diamond_norm_diff(identity(2), identity(3))


def test_hausdorff_examples():
    cs = counterexample_pair()
    assert hausdorff_distance(cs, cs) == 0
    dup = ChannelSet(cs.channels + (cs[0],))
    assert hausdorff_distance(cs, dup) == 0
    noisy = ChannelSet(tuple(depolarized(c, 0.1) for c in cs))
    per = [diamond_norm_diff(c, depolarized(c, 0.1)).lower for c in cs]
    got = hausdorff_distance(cs, noisy)
    # each noisy image is closest to its own source here
    assert abs(got - max(per)) <= 1e-9


def test_hausdorff_symmetric_and_triangle():
    rng = np.random.default_rng(3)
    a, b, c = (ChannelSet((random_channel(2, 2, rng),)) for _ in range(3))
    ab, ba = hausdorff_distance(a, b), hausdorff_distance(b, a)
    assert abs(ab - ba) <= 1e-9
    assert hausdorff_distance(a, c) <= ab + hausdorff_distance(b, c) + 1e-6
