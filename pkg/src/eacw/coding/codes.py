"""Entanglement-assisted codes and their exact error evaluation.

An :class:`EACode` is stored densely: a pure resource on ``K_A (x) K_B``,
one encoder channel ``K_A -> H_A^(x)n`` per message and one POVM element on
``H_B^(x)n (x) K_B`` per message. The deficit ``I - sum_m D_m`` is an abort
outcome and counts as an error.

The counterexample code has a structured form (:class:`BasisCode`) whose
errors are products of per-letter transition probabilities; it converts to
the dense form for small blocklengths.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..channels import Channel, ChannelSet, tensor_apply
from ..linalg import (
    ResourceError,
    ValidationError,
    check_pure,
    maximally_entangled,
    permute_factors,
    permute_vector,
    projector,
)

WORD_GUARD = 10**5
DIM_GUARD = 4096


@dataclass(frozen=True, eq=False)
class EACode:
    n: int
    dim_a: int           # channel input dimension per use
    dim_b: int           # channel output dimension per use
    resource: np.ndarray  # pure vector on K_A (x) K_B
    dim_ka: int
    encoders: tuple      # Channel K_A -> H_A^(x)n
    povm: np.ndarray     # (M, D, D), D = dim_b**n * dim_kb

    def __post_init__(self):
        psi = check_pure(self.resource, "resource")
        object.__setattr__(self, "resource", psi)
        if psi.size % self.dim_ka:
            raise ValidationError("resource dimension is not a multiple of dim_ka")
        object.__setattr__(self, "encoders", tuple(self.encoders))
        povm = np.asarray(self.povm, dtype=complex)
        object.__setattr__(self, "povm", povm)
        if povm.shape[0] != len(self.encoders):
            raise ValidationError("one POVM element per message required")
        d_out = self.dim_b ** self.n * self.dim_kb
        if povm.shape[1:] != (d_out, d_out):
            raise ValidationError(f"POVM elements must be {d_out}x{d_out}, got {povm.shape[1:]}")
        for e in self.encoders:
            if e.dim_in != self.dim_ka or e.dim_out != self.dim_a ** self.n:
                raise ValidationError("encoder dimensions do not match resource and blocklength")
        for m, el in enumerate(povm):
            if np.max(np.abs(el - el.conj().T)) > 1e-10:
                raise ValidationError(f"POVM element {m} is not Hermitian")
            w = np.linalg.eigvalsh((el + el.conj().T) / 2)
            if w[0] < -1e-10 or w[-1] > 1 + 1e-10:
                raise ValidationError(f"POVM element {m} not between 0 and I (spectrum [{w[0]:.3g}, {w[-1]:.3g}])")
        top = np.linalg.eigvalsh(povm.sum(axis=0))[-1]
        if top > 1 + 1e-9:
            raise ValidationError(f"POVM elements sum above identity (largest eigenvalue {top:.12g})")

    @property
    def M(self) -> int:
        return len(self.encoders)

    @property
    def L(self) -> int:
        return self.dim_ka

    @property
    def dim_kb(self) -> int:
        return self.resource.size // self.dim_ka

    @property
    def rate(self) -> float:
        return float(np.log2(self.M) / self.n)

    @property
    def entanglement_rate(self) -> float:
        return float(np.log2(self.L) / self.n)


@dataclass
class ErrorReport:
    average: float
    maximal: float
    per_message: np.ndarray
    worst_index: object
    by_index: dict = field(default_factory=dict)


# --------------------------------------------------------------------------
# evaluation

def message_errors(code: EACode, word: Sequence[Channel], guard_dim: int = DIM_GUARD) -> np.ndarray:
    """Exact ``tr(D_m^c (N_{s^n} o E_m (x) id)(Psi))`` for every message."""
    if len(word) != code.n:
        raise ValidationError(f"word of length {len(word)} for blocklength {code.n}")
    big = projector(code.resource)
    kb = code.dim_kb
    errs = np.empty(code.M)
    for m, (enc, d_m) in enumerate(zip(code.encoders, code.povm)):
        st = tensor_apply([enc], big, extra_dims=[kb], guard_dim=guard_dim)
        st = tensor_apply(list(word), st, extra_dims=[kb], guard_dim=guard_dim)
        errs[m] = 1.0 - np.trace(d_m @ st).real
    return np.clip(errs, 0.0, 1.0)


def _report(per_index: dict) -> ErrorReport:
    by = {i: (float(e.mean()), float(e.max())) for i, e in per_index.items()}
    worst = None
    for i, (avg, _) in by.items():
        if worst is None or avg > by[worst][0]:
            worst = i
    return ErrorReport(
        average=by[worst][0],
        maximal=max(v[1] for v in by.values()),
        per_message=per_index[worst],
        worst_index=worst,
        by_index=by,
    )


def evaluate_code_compound(code, chset: ChannelSet) -> ErrorReport:
    """Average and maximal error against every memoryless ``N_s^(x)n``."""
    per = {}
    for s, ch in enumerate(chset.channels):
        per[s] = _errors_any(code, [ch] * code.n)
    return _report(per)


def evaluate_code_avqc(code, chset: ChannelSet) -> ErrorReport:
    """Average and maximal error against every word ``s^n``; ``worst_index`` is the worst word."""
    n_words = len(chset) ** code.n
    if n_words > WORD_GUARD:
        raise ResourceError(f"{n_words} channel words exceed the guard {WORD_GUARD}")
    per = {}
    for word in itertools.product(range(len(chset)), repeat=code.n):
        per[word] = _errors_any(code, [chset.channels[s] for s in word])
    return _report(per)


def _errors_any(code, word) -> np.ndarray:
    if isinstance(code, BasisCode):
        return code.message_errors(word)
    return message_errors(code, word)


# --------------------------------------------------------------------------
# structured basis codes

@dataclass(frozen=True, eq=False)
class BasisCode:
    """Codewords are computational-basis product states; decoding is the projective
    measurement onto the codeword basis states (no entanglement, ``L = 1``)."""

    n: int
    d: int
    codewords: tuple[tuple[int, ...], ...]

    @property
    def M(self) -> int:
        return len(self.codewords)

    @property
    def L(self) -> int:
        return 1

    @property
    def rate(self) -> float:
        return float(np.log2(self.M) / self.n)

    def message_errors(self, word: Sequence[Channel]) -> np.ndarray:
        """``1 - prod_i <v_i| N_{s_i}(|v_i><v_i|) |v_i>`` per codeword ``v``."""
        stay = []
        for ch in word:
            k = ch.kraus
            # T[x] = <x|N(|x><x|)|x> = sum_k |K_k[x, x]|^2
            stay.append(np.sum(np.abs(np.einsum("kxx->kx", k)) ** 2, axis=0))
        cw = np.array(self.codewords)
        probs = np.ones(self.M)
        for i in range(self.n):
            probs *= stay[i][cw[:, i]]
        return np.clip(1.0 - probs, 0.0, 1.0)

    def dense(self) -> EACode:
        dim = self.d ** self.n
        if dim > DIM_GUARD:
            raise ResourceError(f"dense form needs dimension {dim} > {DIM_GUARD}")
        encs, povm = [], np.zeros((self.M, dim, dim), dtype=complex)
        for m, v in enumerate(self.codewords):
            idx = int(np.ravel_multi_index(v, [self.d] * self.n))
            prep = np.zeros((1, dim, 1), dtype=complex)
            prep[0, idx, 0] = 1.0
            encs.append(Channel(prep, name=f"prep{v}"))
            povm[m, idx, idx] = 1.0
        return EACode(self.n, self.d, self.d, np.ones(1, dtype=complex), 1, tuple(encs), povm)


def counterexample_code(n: int) -> BasisCode:
    """Codewords ``{1,2,3}^n  U  {3,4,5}^n`` (zero-based ``{0,1,2}`` and ``{2,3,4}``), ``2*3^n - 1`` of them."""
    if not 1 <= n <= 8:
        raise ValidationError("counterexample code supports 1 <= n <= 8")
    low = set(itertools.product((0, 1, 2), repeat=n))
    high = set(itertools.product((2, 3, 4), repeat=n))
    return BasisCode(n, 5, tuple(sorted(low | high)))


def counterexample_bound(n: int) -> float:
    """The published bound ``3^n / (2*3^n - 1)`` on the average error."""
    return 3**n / (2 * 3**n - 1)


def counterexample_exact(n: int) -> float:
    """Directly counted average error ``(3^n - 1) / (2*3^n - 1)``."""
    return (3**n - 1) / (2 * 3**n - 1)


# --------------------------------------------------------------------------
# code transformations

def relabel(code: EACode, alpha: Sequence[int]) -> EACode:
    """Message ``m`` now uses the encoder and decoder of message ``alpha[m]``."""
    alpha = list(alpha)
    if sorted(alpha) != list(range(code.M)):
        raise ValidationError("alpha must be a permutation of the messages")
    return EACode(code.n, code.dim_a, code.dim_b, code.resource, code.dim_ka,
                  tuple(code.encoders[a] for a in alpha), code.povm[alpha])


def permuted_code(code: EACode, sigma: Sequence[int], alpha: Sequence[int] | None = None) -> EACode:
    """Conjugate encoders and decoders by the tensor-factor permutation ``sigma``.

    ``U_sigma x_1 (x) ... (x) x_n = x_{sigma(1)} (x) ... (x) x_{sigma(n)}``
    on the channel inputs and outputs; messages are relabelled by ``alpha``.
    Against the word ``s`` this code behaves like the original against the
    word ``t`` with ``t[sigma[j]] = s[j]``.
    """
    sigma = [int(x) for x in sigma]
    if sorted(sigma) != list(range(code.n)):
        raise ValidationError("sigma must be a permutation of the block positions")
    base = code if alpha is None else relabel(code, alpha)
    n, da = code.n, code.dim_a
    encs = []
    for e in base.encoders:
        k = e.kraus.reshape((e.kraus.shape[0],) + (da,) * n + (code.dim_ka,))
        k = k.transpose([0] + [1 + s for s in sigma] + [n + 1])
        encs.append(Channel(k.reshape(e.kraus.shape), name=e.name))
    dims = [code.dim_b] * n + [code.dim_kb]
    order = sigma + [n]
    povm = np.array([permute_factors(d, dims, order) for d in base.povm])
    return EACode(n, da, code.dim_b, code.resource, code.dim_ka, tuple(encs), povm)


def permuted_word(word: Sequence[int], sigma: Sequence[int]) -> tuple[int, ...]:
    """The word ``t`` with ``t[sigma[j]] = word[j]``."""
    t = [0] * len(word)
    for j, s in enumerate(sigma):
        t[s] = word[j]
    return tuple(t)


def controlled_code(codes: Sequence[EACode]) -> EACode:
    """Share a maximally entangled index ``k`` of dimension ``K`` and run code ``k``.

    Resource ``Psi (x) Phi_K``; encoder ``E_m = sum_k E^(k)_m o <e_k| . |e_k>``
    and decoder ``D_m = sum_k D^(k)_m (x) |e_k><e_k|``. The error of message
    ``m`` on any word is the mean over ``k`` of the component codes' errors.
    """
    c0 = codes[0]
    kk = len(codes)
    for c in codes:
        if (c.n, c.dim_a, c.dim_b, c.dim_ka, c.M) != (c0.n, c0.dim_a, c0.dim_b, c0.dim_ka, c0.M) or \
                not np.array_equal(c.resource, c0.resource):
            raise ValidationError("controlled codes must share blocklength, resource and message set")
    ka, kb = c0.dim_ka, c0.dim_kb
    d_out = c0.dim_b ** c0.n * kb * kk
    if d_out > DIM_GUARD or ka * kk > DIM_GUARD:
        raise ResourceError(f"controlled code needs dimension {max(d_out, ka * kk)} > {DIM_GUARD}")
    # resource on (K_A x C^K) x (K_B x C^K)
    joint = np.kron(c0.resource, maximally_entangled(kk))
    resource = permute_vector(joint, [ka, kb, kk, kk], [0, 2, 1, 3])
    basis = np.eye(kk, dtype=complex)
    encs, povm = [], []
    for m in range(c0.M):
        ops = []
        for k, c in enumerate(codes):
            for f in c.encoders[m].kraus:
                ops.append(np.kron(f, basis[k][None, :]))
        encs.append(Channel(np.array(ops), name=f"ctrl{m}"))
        povm.append(sum(np.kron(c.povm[m], np.outer(basis[k], basis[k])) for k, c in enumerate(codes)))
    return EACode(c0.n, c0.dim_a, c0.dim_b, resource, ka * kk, tuple(encs), np.array(povm))


def max_from_avg(code: EACode) -> EACode:
    """Run the code under a shared uniformly random cyclic shift of the messages.

    Every message of the result has error equal to the source code's average
    error, for every channel.
    """
    m = code.M
    return controlled_code([relabel(code, [(i + k) % m for i in range(m)]) for k in range(m)])


def avqc_code_from_compound(code: EACode, pairs: Sequence[tuple[Sequence[int], Sequence[int]]]) -> EACode:
    """Derandomise over ``K = len(pairs)`` (block permutation, message permutation) pairs."""
    return controlled_code([permuted_code(code, s, a) for s, a in pairs])


def random_pairs(n: int, m: int, k: int, seed: int) -> list[tuple[list[int], list[int]]]:
    rng = np.random.default_rng(seed)
    return [(list(rng.permutation(n)), list(rng.permutation(m))) for _ in range(k)]


# --------------------------------------------------------------------------
# small toy codes

def basis_toy_code(povm_diag: Sequence[Sequence[float]]) -> EACode:
    """Single-use unassisted code: message ``m`` prepares ``|m>``, decoder is diagonal.

    ``povm_diag[m]`` is the diagonal of ``D_m``; against the identity channel
    the error of message ``m`` is ``1 - povm_diag[m][m]``.
    """
    diag = np.asarray(povm_diag, dtype=float)
    m, d = diag.shape
    if m > d:
        raise ValidationError("need at least as many basis states as messages")
    encs = []
    for i in range(m):
        prep = np.zeros((1, d, 1), dtype=complex)
        prep[0, i, 0] = 1.0
        encs.append(Channel(prep, name=f"prep{i}"))
    povm = np.array([np.diag(row).astype(complex) for row in diag])
    return EACode(1, d, d, np.ones(1, dtype=complex), 1, tuple(encs), povm)


def toy_code(rng: np.random.Generator, d: int = 2, m: int = 2, n: int = 1, ka: int = 2) -> EACode:
    """Random EA code: random pure resource, random isometric encoders, random complete POVM."""
    from ..linalg import random_pure, random_unitary

    if d ** n < ka:
        raise ValidationError("toy code needs d^n >= ka")
    resource = random_pure(ka * ka, rng)
    encs = [Channel(random_unitary(d ** n, rng)[:, :ka][None], name="iso") for _ in range(m)]
    dim = d ** n * ka
    gs = [rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)) for _ in range(m)]
    ps = [g @ g.conj().T for g in gs]
    w, u = np.linalg.eigh(sum(ps))
    inv = (u / np.sqrt(w)) @ u.conj().T
    povm = np.array([inv @ p @ inv for p in ps])
    povm = (povm + povm.conj().transpose(0, 2, 1)) / 2
    return EACode(n, d, d, resource, ka, tuple(encs), povm)


def derandomisation_curve(code: EACode, chset: ChannelSet, ks: Sequence[int], seed: int = 0) -> list[dict]:
    """Worst-word average error of the derandomised code for each number ``K`` of seeded pairs."""
    rows = []
    for k in ks:
        new = avqc_code_from_compound(code, random_pairs(code.n, code.M, int(k), seed))
        rep = evaluate_code_avqc(new, chset)
        rows.append({"K": int(k), "L": new.L, "worst_average": rep.average, "worst_maximal": rep.maximal,
                     "worst_word": "-".join(str(s) for s in rep.worst_index)})
    return rows
