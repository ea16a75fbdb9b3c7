"""Quantum channels in Kraus form, channel sets and classical-quantum channels."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .linalg import (
    ResourceError,
    ValidationError,
    check_density,
    maximally_entangled,
    projector,
    weyl_operators,
)

TP_TOL = 1e-10
CP_TOL = 1e-9
DEFAULT_GUARD_DIM = 4096


@dataclass(frozen=True, eq=False)
class Channel:
    """CPTP map ``rho -> sum_i K_i rho K_i^dag``.

    ``kraus`` has shape ``(r, dim_out, dim_in)``. Trace preservation is
    validated at construction; complete positivity is automatic in Kraus form.
    """

    kraus: np.ndarray
    name: str = ""

    def __post_init__(self):
        k = np.asarray(self.kraus, dtype=complex)
        if k.ndim == 2:
            k = k[None]
        if k.ndim != 3 or k.shape[0] == 0:
            raise ValidationError(f"Kraus family must have shape (r, out, in), got {k.shape}")
        object.__setattr__(self, "kraus", k)
        s = np.einsum("kji,kjl->il", k.conj(), k)
        dev = np.max(np.abs(s - np.eye(k.shape[2])))
        if dev > TP_TOL:
            raise ValidationError(f"channel {self.name!r} is not trace preserving (deviation {dev:.3g})")

    @property
    def dim_in(self) -> int:
        return self.kraus.shape[2]

    @property
    def dim_out(self) -> int:
        return self.kraus.shape[1]

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return apply(self, rho)

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        k = self.kraus
        return (k.conj().transpose(0, 2, 1) @ y @ k).sum(axis=0)

    def complementary(self, rho: np.ndarray) -> np.ndarray:
        """Environment output ``[tr(K_i rho K_j^dag)]_ij`` of the Stinespring isometry."""
        k = self.kraus
        r = k.shape[0]
        return (k @ rho).reshape(r, -1) @ k.conj().reshape(r, -1).T

    def complementary_adjoint(self, y: np.ndarray) -> np.ndarray:
        # sum_ij y_ji K_j^dag K_i
        k = self.kraus
        r, dout, din = k.shape
        b = np.tensordot(y, k, axes=(1, 0))
        return k.conj().reshape(r * dout, din).T @ b.reshape(r * dout, din)


@dataclass(frozen=True)
class ChannelSet:
    """Finite indexed family of channels with common input and output dimension."""

    channels: tuple
    labels: tuple = field(default=())

    def __post_init__(self):
        chans = tuple(self.channels)
        if not chans:
            raise ValidationError("channel set must be nonempty")
        labels = tuple(self.labels) if self.labels else tuple(str(i) for i in range(len(chans)))
        if len(labels) != len(chans):
            raise ValidationError("labels and channels differ in length")
        d_in, d_out = chans[0].dim_in, chans[0].dim_out
        for c in chans:
            if (c.dim_in, c.dim_out) != (d_in, d_out):
                raise ValidationError("all channels in a set must share dimensions")
        object.__setattr__(self, "channels", chans)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.channels)

    def __iter__(self):
        return iter(self.channels)

    def __getitem__(self, i) -> Channel:
        return self.channels[i]

    @property
    def dim_in(self) -> int:
        return self.channels[0].dim_in

    @property
    def dim_out(self) -> int:
        return self.channels[0].dim_out


@dataclass(frozen=True, eq=False)
class CqChannel:
    """Classical-quantum channel: letter ``x`` maps to the state ``outputs[x]``."""

    outputs: tuple

    def __post_init__(self):
        outs = tuple(check_density(o, f"W({i})") for i, o in enumerate(self.outputs))
        if not outs:
            raise ValidationError("cq channel needs at least one letter")
        if len({o.shape for o in outs}) != 1:
            raise ValidationError("cq channel outputs must share a dimension")
        object.__setattr__(self, "outputs", outs)

    @property
    def alphabet_size(self) -> int:
        return len(self.outputs)

    @property
    def dim(self) -> int:
        return self.outputs[0].shape[0]

    def __getitem__(self, x) -> np.ndarray:
        return self.outputs[x]


def apply(channel: Channel, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (channel.dim_in, channel.dim_in):
        raise ValidationError(f"state of shape {rho.shape} does not fit channel input {channel.dim_in}")
    k = channel.kraus
    return (k @ rho @ k.conj().transpose(0, 2, 1)).sum(axis=0)


def apply_on_factor(x: np.ndarray, dims: Sequence[int], i: int, kraus: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Apply a Kraus family to tensor factor ``i`` of the operator ``x``.

    Returns the new operator and the updated list of factor dimensions.
    """
    dims = [int(d) for d in dims]
    kraus = np.asarray(kraus)
    if kraus.shape[2] != dims[i]:
        raise ValidationError(f"factor {i} has dimension {dims[i]}, channel expects {kraus.shape[2]}")
    left = int(np.prod(dims[:i]))
    right = int(np.prod(dims[i + 1:]))
    t = x.reshape(left, dims[i], right, left, dims[i], right)
    t = np.einsum("kab,lbrmcs,kdc->larmds", kraus, t, kraus.conj(), optimize=True)
    new_dims = dims.copy()
    new_dims[i] = kraus.shape[1]
    d = int(np.prod(new_dims))
    return t.reshape(d, d), new_dims


def tensor_apply(channels: Sequence[Channel], rho, guard_dim: int = DEFAULT_GUARD_DIM,
                 extra_dims: Sequence[int] = ()) -> np.ndarray:
    """Apply ``N_1 (x) ... (x) N_n`` factor by factor.

    ``extra_dims`` lists trailing factors (e.g. a reference system) that are
    left untouched. The product Kraus family is never formed.
    """
    dims = [c.dim_in for c in channels] + [int(d) for d in extra_dims]
    rho = np.asarray(rho, dtype=complex)
    if int(np.prod(dims)) != rho.shape[0]:
        raise ValidationError(f"state dimension {rho.shape[0]} does not match factors {dims}")
    out_dim = int(np.prod([c.dim_out for c in channels])) * int(np.prod(extra_dims or [1]))
    if max(out_dim, rho.shape[0]) > guard_dim:
        raise ResourceError(f"dimension {max(out_dim, rho.shape[0])} exceeds guard {guard_dim}; raise --guard-dim")
    x = rho
    for i, c in enumerate(channels):
        x, dims = apply_on_factor(x, dims, i, c.kraus)
    return x


def choi(channel: Channel) -> np.ndarray:
    """Normalised Choi matrix ``(N (x) id)(Phi)`` on output (x) reference, trace one."""
    d = channel.dim_in
    phi = projector(maximally_entangled(d))
    return tensor_apply([channel], phi, extra_dims=[d])


def choi_to_kraus(j: np.ndarray, dim_in: int, tol: float = CP_TOL) -> Channel:
    """Inverse of :func:`choi` for a normalised Choi matrix on output (x) reference."""
    j = np.asarray(j, dtype=complex)
    j = (j + j.conj().T) / 2
    w, u = np.linalg.eigh(j)
    if w[0] < -tol:
        raise ValidationError(f"Choi matrix is not positive semidefinite (min eigenvalue {w[0]:.3g})")
    dim_out = j.shape[0] // dim_in
    ops = []
    for lam, v in zip(w[::-1], u.T[::-1]):
        if lam <= tol:
            continue
        # column v reshaped to (out, ref): K[a, i] = sqrt(d * lam) * v[a, i]
        ops.append(np.sqrt(dim_in * lam) * v.reshape(dim_out, dim_in))
    return Channel(np.array(ops))


def product(*chans: Channel) -> Channel:
    """Tensor product channel; Kraus family is the product family."""
    ks = chans[0].kraus
    for c in chans[1:]:
        ks = np.einsum("iab,jcd->ijacbd", ks, c.kraus).reshape(
            ks.shape[0] * c.kraus.shape[0],
            ks.shape[1] * c.kraus.shape[1],
            ks.shape[2] * c.kraus.shape[2],
        )
    return Channel(ks, name="(x)".join(c.name for c in chans))


def product_set(a: ChannelSet, b: ChannelSet) -> ChannelSet:
    chans, labels = [], []
    for la, ca in zip(a.labels, a.channels):
        for lb, cb in zip(b.labels, b.channels):
            chans.append(product(ca, cb))
            labels.append(f"{la}*{lb}")
    return ChannelSet(tuple(chans), tuple(labels))


def check_probability(p, n: int | None = None, tol: float = 1e-12) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or (n is not None and p.size != n):
        raise ValidationError(f"probability vector of length {n} expected, got shape {p.shape}")
    if np.any(p < 0) or abs(p.sum() - 1.0) > tol:
        raise ValidationError(f"invalid probability vector {p}")
    return p


def mix(chset: ChannelSet, p) -> Channel:
    """Convex combination ``sum_s p(s) N_s`` via the union of scaled Kraus families."""
    p = check_probability(p, len(chset))
    ops = [np.sqrt(ps) * c.kraus for ps, c in zip(p, chset.channels) if ps > 0]
    return Channel(np.concatenate(ops), name="mix")


def identity(d: int) -> Channel:
    return Channel(np.eye(d, dtype=complex)[None], name=f"id{d}")


def depolarizing(gamma: float, d: int) -> Channel:
    """``x -> (1 - gamma) x + gamma tr(x) I/d``, Kraus form from the Weyl basis."""
    if not 0.0 <= gamma <= 1.0:
        raise ValidationError(f"depolarizing parameter {gamma} outside [0, 1]")
    ws = weyl_operators(d)
    coef = [np.sqrt(1 - gamma + gamma / d**2)] + [np.sqrt(gamma) / d] * (d * d - 1)
    ops = [c * w for c, w in zip(coef, ws) if c > 0]
    return Channel(np.array(ops), name=f"depol{gamma:g}")


def measure_prepare(targets: Sequence[int], d_in: int, d_out: int, name: str = "") -> Channel:
    """Basis measure-and-prepare: basis vector ``i`` is mapped to ``targets[i]``.

    One Kraus operator ``|target><source|`` per source basis vector.
    """
    ops = np.zeros((d_in, d_out, d_in), dtype=complex)
    for src, tgt in enumerate(targets):
        ops[src, tgt, src] = 1.0
    return Channel(ops, name=name)


def counterexample_pair() -> ChannelSet:
    """The two entanglement-breaking channels on C^5 with disjoint capacity-achieving sets.

    N1 keeps e1, e2 and sends e3, e4, e5 to e3; N2 keeps e4, e5 and sends
    e1, e2, e3 to e3 (zero-based indices in code).
    """
    n1 = measure_prepare([0, 1, 2, 2, 2], 5, 5, name="N1")
    n2 = measure_prepare([2, 2, 2, 3, 4], 5, 5, name="N2")
    return ChannelSet((n1, n2), ("N1", "N2"))


def random_channel(d_in: int, d_out: int, rng: np.random.Generator, n_kraus: int = 3) -> Channel:
    g = rng.standard_normal((n_kraus * d_out, d_in)) + 1j * rng.standard_normal((n_kraus * d_out, d_in))
    q, _ = np.linalg.qr(g)
    return Channel(q.reshape(n_kraus, d_out, d_in), name="random")


def cq_apply(w: CqChannel, word: Sequence[int]) -> np.ndarray:
    """``W(x_1) (x) ... (x) W(x_n)``."""
    out = np.ones((1, 1), dtype=complex)
    for x in word:
        if not 0 <= int(x) < w.alphabet_size:
            raise ValidationError(f"letter {x} outside alphabet of size {w.alphabet_size}")
        out = np.kron(out, w.outputs[int(x)])
    return out
