"""Entropic quantities: channel mutual information and Holevo quantity."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channels import Channel, CqChannel, apply, check_probability, tensor_apply
from .linalg import (
    ValidationError,
    check_density,
    check_pure,
    entropy_of_spectrum,
    hermitian_log2,
    partial_trace,
    projector,
    purify,
    von_neumann_entropy,
)


@dataclass(frozen=True)
class MutualInfoResult:
    value: float
    entropy_terms: tuple[float, float, float]

    def __float__(self) -> float:
        return self.value


def mutual_information(rho, channel: Channel, purification: np.ndarray | None = None) -> MutualInfoResult:
    """``I(rho, N) = S(rho) + S(N(rho)) - S((N (x) id)(psi))``.

    ``psi`` defaults to the canonical purification of ``rho``; any other
    purification on input (x) reference may be passed instead.
    """
    rho = check_density(rho)
    d = rho.shape[0]
    if d != channel.dim_in:
        raise ValidationError(f"state dimension {d} does not match channel input {channel.dim_in}")
    psi = purify(rho) if purification is None else check_pure(purification)
    if psi.size % d:
        raise ValidationError("purification dimension is not a multiple of the input dimension")
    ref = psi.size // d
    joint = tensor_apply([channel], projector(psi), extra_dims=[ref])
    s_in = von_neumann_entropy(rho)
    s_out = von_neumann_entropy(apply(channel, rho), validate=False)
    s_joint = von_neumann_entropy(joint, validate=False)
    return MutualInfoResult(s_in + s_out - s_joint, (s_in, s_out, s_joint))


def _entropy(m: np.ndarray) -> float:
    return entropy_of_spectrum(np.clip(np.linalg.eigvalsh((m + m.conj().T) / 2), 0.0, None))


def mi_value(rho: np.ndarray, channel: Channel) -> float:
    """Fast path for ``I(rho, N)`` via the complementary channel.

    For a pure joint state of output, reference and environment the joint
    output entropy equals the environment entropy, so no purification is
    built. Agrees with :func:`mutual_information` to rounding.
    """
    return _entropy(rho) + _entropy(apply(channel, rho)) - _entropy(channel.complementary(rho))


def mi_gradient(rho: np.ndarray, channel: Channel) -> tuple[float, np.ndarray]:
    """Value and Hermitian gradient of ``rho -> I(rho, N)`` (bits).

    The gradient ``G`` satisfies ``dI = tr(G dX)`` for traceless Hermitian
    ``dX`` at full-rank ``rho``; terms proportional to the identity are dropped.
    """
    out = apply(channel, rho)
    env = channel.complementary(rho)
    val = _entropy(rho) + _entropy(out) - _entropy(env)
    g = -hermitian_log2(rho) - channel.adjoint(hermitian_log2(out)) + channel.complementary_adjoint(hermitian_log2(env))
    return val, (g + g.conj().T) / 2


def holevo_quantity(p, w: CqChannel) -> float:
    """``chi(p, W) = S(sum_x p(x) W(x)) - sum_x p(x) S(W(x))``."""
    p = check_probability(p, w.alphabet_size)
    avg = sum(px * wx for px, wx in zip(p, w.outputs))
    return _entropy(avg) - float(sum(px * _entropy(wx) for px, wx in zip(p, w.outputs) if px > 0))


def holevo_of_states(states: Sequence[np.ndarray], p=None) -> float:
    """Holevo quantity of an ensemble given directly as a list of states."""
    n = len(states)
    p = np.full(n, 1.0 / n) if p is None else check_probability(p, n)
    avg = np.zeros_like(states[0])
    for px, st in zip(p, states):
        avg = avg + px * st
    return _entropy(avg) - float(sum(px * _entropy(st) for px, st in zip(p, states) if px > 0))


def check_subadditivity(rho12, ch1: Channel, ch2: Channel) -> tuple[float, float, float]:
    """Both sides of ``I(rho, N1 (x) N2) <= I(rho_1, N1) + I(rho_2, N2)`` and the slack."""
    from .channels import product

    rho12 = check_density(rho12)
    dims = [ch1.dim_in, ch2.dim_in]
    if rho12.shape[0] != dims[0] * dims[1]:
        raise ValidationError("joint state does not match the channel input dimensions")
    lhs = mutual_information(rho12, product(ch1, ch2)).value
    r1 = partial_trace(rho12, dims, [0])
    r2 = partial_trace(rho12, dims, [1])
    rhs = mutual_information(r1, ch1).value + mutual_information(r2, ch2).value
    return lhs, rhs, rhs - lhs


def holevo_vs_mutual(psi, encoders: Sequence[Channel], channel: Channel, q, dim_a: int) -> tuple[float, float, float]:
    """Both sides of ``chi(q, V) <= I(tau_bar, N)`` for EA encoders on a pure resource.

    ``psi`` lives on K_A (x) K_B with ``dim K_A = dim_a``; each encoder maps
    K_A into the channel input. ``V(m) = (N o E_m (x) id)(psi)``.
    """
    psi = check_pure(psi)
    q = check_probability(q, len(encoders))
    if psi.size % dim_a:
        raise ValidationError("resource dimension is not a multiple of dim_a")
    dim_b = psi.size // dim_a
    big = projector(psi)
    rho_a = partial_trace(big, [dim_a, dim_b], [0])
    states = []
    for e in encoders:
        if e.dim_in != dim_a or e.dim_out != channel.dim_in:
            raise ValidationError("encoder dimensions do not fit resource and channel")
        states.append(tensor_apply([e], big, extra_dims=[dim_b]))
    tau = sum(qm * apply(e, rho_a) for qm, e in zip(q, encoders))
    outs = [tensor_apply([channel], s, extra_dims=[dim_b]) for s in states]
    chi = holevo_of_states(outs, q)
    mi = mutual_information((tau + tau.conj().T) / 2, channel).value
    return chi, mi, mi - chi
