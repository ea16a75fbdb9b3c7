"""Random cq codes decoded with the pretty-good (square-root) measurement."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..channels import CqChannel, check_probability, cq_apply
from ..linalg import ResourceError, ValidationError, pinv_sqrt_psd
from .codes import ErrorReport

DIM_GUARD = 4096


@dataclass(frozen=True, eq=False)
class CqCode:
    n: int
    codewords: tuple[tuple[int, ...], ...]
    povm: np.ndarray

    @property
    def M(self) -> int:
        return len(self.codewords)


def pretty_good_measurement(states) -> np.ndarray:
    """``D_m = S^-1/2 rho_m S^-1/2`` with ``S = sum_m rho_m`` inverted on its support."""
    states = np.asarray(states, dtype=complex)
    inv = pinv_sqrt_psd(states.sum(axis=0))
    povm = inv @ states @ inv
    return (povm + povm.conj().transpose(0, 2, 1)) / 2


def pgm_code_search(v: CqChannel, n: int, m: int, seed: int, p=None) -> tuple[CqCode, ErrorReport]:
    """Draw ``m`` codewords i.i.d. from ``p^n`` and decode with the PGM; errors are exact."""
    if m < 1 or n < 1:
        raise ValidationError("need n >= 1 and M >= 1")
    if v.dim ** n > DIM_GUARD:
        raise ResourceError(f"output dimension {v.dim ** n} exceeds the guard {DIM_GUARD}")
    p = np.full(v.alphabet_size, 1 / v.alphabet_size) if p is None else check_probability(p, v.alphabet_size)
    rng = np.random.default_rng(seed)
    words = tuple(tuple(int(x) for x in rng.choice(v.alphabet_size, n, p=p)) for _ in range(m))
    states = np.array([cq_apply(v, w) for w in words])
    povm = pretty_good_measurement(states)
    errs = np.clip(1.0 - np.einsum("mij,mji->m", povm, states).real, 0.0, 1.0)
    report = ErrorReport(float(errs.mean()), float(errs.max()), errs, 0, {0: (float(errs.mean()), float(errs.max()))})
    return CqCode(n, words, povm), report


def best_of_seeds(v: CqChannel, n: int, m: int, seeds: int = 32, p=None) -> tuple[int, CqCode, ErrorReport]:
    best = None
    for seed in range(seeds):
        code, rep = pgm_code_search(v, n, m, seed, p)
        if best is None or rep.average < best[2].average:
            best = (seed, code, rep)
    return best
