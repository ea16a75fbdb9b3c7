"""Robustification: i.i.d.-average guarantees per type imply permutation-average guarantees."""
from __future__ import annotations

import itertools
import math

import numpy as np

from ..linalg import ResourceError, ValidationError

WORD_GUARD = 10**5


def _orbits(n_letters: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Word table (|S|^n, n) and the type (orbit) index of each word."""
    words = np.array(list(itertools.product(range(n_letters), repeat=n)), dtype=int).reshape(-1, n)
    counts = np.stack([(words == s).sum(axis=1) for s in range(n_letters)], axis=1)
    _, orbit = np.unique(counts, axis=0, return_inverse=True)
    return counts, orbit.reshape(-1)


def robustification_check(f_table, n_letters: int, n: int, gamma: float) -> tuple[bool, bool, float]:
    """Check one instance of the robustification implication.

    ``f_table`` lists ``f(s^n)`` in lexicographic word order. The hypothesis
    ``sum_s f(s) prod_i q(s_i) >= 1 - gamma`` is checked for every type
    ``q = counts / n``. The permutation average of ``f`` at ``s^n`` is the
    mean of ``f`` over the type class of ``s^n``, and the conclusion asks
    it to be ``>= 1 - (n+1)^|S| gamma`` for all words. Returns
    ``(hypothesis_holds, conclusion_holds, lhs_min)`` where ``lhs_min`` is
    the smallest permutation average.
    """
    if n_letters ** n > WORD_GUARD:
        raise ResourceError(f"|S|^n = {n_letters ** n} exceeds the guard {WORD_GUARD}")
    if n > 8:
        raise ResourceError("robustification check supports n <= 8")
    f = np.asarray(f_table, dtype=float).reshape(-1)
    if f.size != n_letters ** n or np.any(f < 0) or np.any(f > 1):
        raise ValidationError(f"f must be a table of {n_letters ** n} values in [0, 1]")
    counts, orbit = _orbits(n_letters, n)
    n_orb = orbit.max() + 1
    reps = np.zeros((n_orb, n_letters), dtype=int)
    reps[orbit] = counts
    sums = [math.fsum(f[orbit == o]) for o in range(n_orb)]
    sizes = np.bincount(orbit, minlength=n_orb)
    hyp = True
    for q_counts in reps:
        q = q_counts / n
        # probability of one word of type t under q^n
        total = math.fsum(sums[o] * math.prod(q[s] ** reps[o, s] for s in range(n_letters)) for o in range(n_orb))
        if total < 1 - gamma:
            hyp = False
            break
    means = np.array(sums) / sizes
    lhs_min = float(means.min())
    concl = bool(lhs_min >= 1 - (n + 1) ** n_letters * gamma)
    return hyp, concl, lhs_min


def tight_gamma(f_table, n_letters: int, n: int) -> float:
    """Smallest ``gamma`` for which the hypothesis holds."""
    f = np.asarray(f_table, dtype=float).reshape(-1)
    counts, orbit = _orbits(n_letters, n)
    worst = 0.0
    for q_counts in np.unique(counts, axis=0):
        q = q_counts / n
        probs = np.prod(q[None, :] ** counts, axis=1)
        worst = max(worst, 1.0 - math.fsum(f * probs))
    return worst


def robustification_sweep(n_letters: int, n: int, trials: int, seed: int = 0) -> dict:
    """Random ``f`` tables (close to one, with a few low spikes) at their tight ``gamma``.

    Counts instances where the hypothesis holds but the conclusion fails.
    """
    rng = np.random.default_rng(seed)
    size = n_letters ** n
    holds = counter = 0
    worst_margin = math.inf
    for _ in range(trials):
        f = 1.0 - rng.uniform(0, 1e-3, size)
        spikes = rng.integers(0, min(size, 4) + 1)
        f[rng.choice(size, spikes, replace=False)] = rng.uniform(0, 1, spikes)
        gamma = tight_gamma(f, n_letters, n) + 1e-12
        hyp, concl, lhs = robustification_check(f, n_letters, n, gamma)
        if hyp:
            holds += 1
            worst_margin = min(worst_margin, lhs - (1 - (n + 1) ** n_letters * gamma))
            if not concl:
                counter += 1
    return {"S": n_letters, "n": n, "trials": trials, "hypothesis_held": holds,
            "counterexamples": counter, "min_margin": worst_margin}
