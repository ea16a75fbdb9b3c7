"""Entanglement-assisted capacities as concave-convex saddle points.

Every capacity here is ``sup_rho inf_p F(rho, p)`` with ``F`` concave in the
input state and convex in the adversary's mixture ``p``:

* single channel: no adversary;
* compound set:   ``F = sum_s p(s) I(rho, N_s)`` (linear in ``p``);
* AVQC:           ``F = I(rho, sum_s p(s) N_s)`` (convex in ``p``).

The solver climbs the primal function ``g(rho) = inf_p F(rho, p)`` and
separately descends the dual ``h(p) = sup_rho F(rho, p)``. The difference
``h(p_hat) - g(rho_hat)`` is reported as ``certified_gap``.
"""
from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from .channels import Channel, ChannelSet, apply, mix, product_set, tensor_apply
from .info import mi_value
from .linalg import (
    ResourceError,
    binary_entropy,
    check_density,
    entropy_of_spectrum,
    hermitian_log2,
    maximally_mixed,
    projector,
    purify,
    random_density,
)

log = logging.getLogger(__name__)

LN2 = np.log(2.0)


class ConvergenceError(RuntimeError):
    """Solver hit its iteration budget; ``result`` holds the best iterate."""

    def __init__(self, msg: str, result: "CapacityResult"):
        super().__init__(msg)
        self.result = result


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-6
    max_iter: int = 5000
    restarts: int = 8
    seed: int = 0
    armijo: float = 1e-4
    shrink: float = 0.5
    grow: float = 1.5
    step0: float = 1.0
    gap_tol: float = 1e-4
    guard_dim: int = 4096

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")


@dataclass
class CapacityResult:
    value: float
    optimizer_state: np.ndarray
    worst_mixture: np.ndarray
    iterations: int
    certified_gap: float
    upper: float = float("nan")
    converged: bool = True
    stationarity: float = float("nan")
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "value": float(self.value),
            "iterations": int(self.iterations),
            "certified_gap": float(self.certified_gap),
            "worst_mixture": [float(x) for x in self.worst_mixture],
            "optimizer_diag": [float(x) for x in np.real(np.diag(self.optimizer_state))],
            "upper": float(self.upper),
            "converged": bool(self.converged),
        }


def _threads() -> int:
    n = int(os.environ.get("EACW_THREADS", "0") or 0)
    return n if n > 0 else (os.cpu_count() or 1)


# --------------------------------------------------------------------------
# matrix exponentiated-gradient ascent

def _state_from_log(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``rho = exp(h)/tr exp(h)`` and its base-2 logarithm."""
    w, u = np.linalg.eigh((h + h.conj().T) / 2)
    w = w - w.max()
    w = np.maximum(w, -600.0)
    z = np.exp(w)
    lz = np.log(z.sum())
    rho = (u * (z / z.sum())) @ u.conj().T
    log2rho = (u * ((w - lz) / LN2)) @ u.conj().T
    return (rho + rho.conj().T) / 2, log2rho


def _log_of(rho: np.ndarray, floor: float = 1e-14) -> np.ndarray:
    w, u = np.linalg.eigh((rho + rho.conj().T) / 2)
    return (u * np.log(np.maximum(w, floor))) @ u.conj().T


def fw_gap(rho: np.ndarray, g: np.ndarray) -> float:
    """Frank-Wolfe gap ``lambda_max(G) - tr(rho G)``; bounds suboptimality of a concave objective."""
    return float(np.linalg.eigvalsh(g)[-1] - np.trace(rho @ g).real)


Objective = Callable[[np.ndarray, np.ndarray], tuple[float, np.ndarray]]


def certified_upper(fgrad: Objective, rho: np.ndarray, deltas=(0.0, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2)) -> float:
    """Upper bound on ``max F`` from concavity: ``F(r) + FW gap(r)`` at any state ``r``.

    Near-singular iterates give huge gradients, so the bound is also taken at
    ``(1 - delta) rho + delta I/d`` and the smallest one is returned.
    """
    d = rho.shape[0]
    best = np.inf
    for delta in deltas:
        r = (1 - delta) * rho + delta * maximally_mixed(d)
        val, g = fgrad(r, hermitian_log2(r))
        best = min(best, val + max(fw_gap(r, g), 0.0))
    return float(best)


@dataclass
class AscentResult:
    rho: np.ndarray
    value: float
    iterations: int
    gap: float
    converged: bool


def meg_ascent(fgrad: Objective, rho0: np.ndarray, cfg: SolverConfig, max_iter: int | None = None,
               tol: float | None = None) -> AscentResult:
    """Maximise a concave function of a density matrix by exponentiated gradient.

    ``fgrad(rho, log2rho)`` returns the value and a Hermitian gradient. Steps
    are chosen by Armijo backtracking. Stops when the Frank-Wolfe gap drops
    below ``tol`` or the value improves by less than ``tol/10`` over 25
    consecutive iterations.
    """
    tol = cfg.tol if tol is None else tol
    max_iter = cfg.max_iter if max_iter is None else max_iter
    h = _log_of(rho0)
    rho, l2 = _state_from_log(h)
    val, g = fgrad(rho, l2)
    eta = cfg.step0
    history = [val]
    gap = fw_gap(rho, g)
    it = 0
    for it in range(1, max_iter + 1):
        if gap <= tol:
            return AscentResult(rho, val, it, gap, True)
        gc = g - np.trace(rho @ g).real * np.eye(len(g))
        accepted = False
        for _ in range(60):
            h_new = h + eta * LN2 * gc
            rho_new, l2_new = _state_from_log(h_new)
            val_new, g_new = fgrad(rho_new, l2_new)
            if val_new >= val + cfg.armijo * np.trace(g @ (rho_new - rho)).real:
                accepted = True
                break
            eta *= cfg.shrink
        if not accepted:
            # step underflow: no ascent direction left at working precision
            return AscentResult(rho, val, it, gap, True)
        h, rho, val, g = h_new, rho_new, val_new, g_new
        eta = min(eta * cfg.grow, 1e4)
        gap = fw_gap(rho, g)
        history.append(val)
        if len(history) > 25 and history[-1] - history[-26] < tol / 10:
            return AscentResult(rho, val, it, gap, True)
    return AscentResult(rho, val, it, gap, gap <= tol)


def _initial_states(d: int, cfg: SolverConfig) -> list[np.ndarray]:
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)
    out = [maximally_mixed(d)]
    for ss in seeds[1:]:
        rng = np.random.default_rng(ss)
        # interior: blend with the maximally mixed state
        out.append(0.5 * random_density(d, rng) + 0.5 * maximally_mixed(d))
    return out


def _run_restarts(fn, starts):
    n = min(_threads(), len(starts))
    if n <= 1:
        return [fn(s) for s in starts]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, starts))


def _best(results):
    # max value, earliest restart on ties
    best = 0
    for i, r in enumerate(results):
        if r.value > results[best].value:
            best = i
    return results[best]


def _single_objective(channel: Channel) -> Objective:
    def f(rho, l2):
        return mi_gradient_with_log(rho, l2, channel)
    return f


def mi_gradient_with_log(rho: np.ndarray, log2rho: np.ndarray, channel: Channel) -> tuple[float, np.ndarray]:
    """Like :func:`mi_gradient` but reuses a known ``log2 rho`` (finite even for tiny eigenvalues)."""
    out = apply(channel, rho)
    env = channel.complementary(rho)
    w = np.clip(np.linalg.eigvalsh(rho), 0.0, None)
    val = entropy_of_spectrum(w) + _ent(out) - _ent(env)
    g = -log2rho - channel.adjoint(hermitian_log2(out)) + channel.complementary_adjoint(hermitian_log2(env))
    return val, (g + g.conj().T) / 2


def _ent(m):
    return entropy_of_spectrum(np.clip(np.linalg.eigvalsh((m + m.conj().T) / 2), 0.0, None))


# --------------------------------------------------------------------------
# single channel

def ea_capacity_single(channel: Channel, cfg: SolverConfig = SolverConfig()) -> CapacityResult:
    """``max_rho I(rho, N)`` with a Frank-Wolfe optimality certificate."""
    f = _single_objective(channel)
    results = _run_restarts(lambda r0: meg_ascent(f, r0, cfg), _initial_states(channel.dim_in, cfg))
    best = _best(results)
    iters = sum(r.iterations for r in results)
    res = CapacityResult(
        value=best.value,
        optimizer_state=best.rho,
        worst_mixture=np.ones(1),
        iterations=iters,
        certified_gap=0.0,
        upper=max(certified_upper(f, best.rho), best.value),
        converged=best.converged,
        stationarity=best.gap,
    )
    if not best.converged:
        raise ConvergenceError(f"no restart converged within {cfg.max_iter} iterations", res)
    return res


# --------------------------------------------------------------------------
# simplex helpers

def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    k = np.nonzero(u * np.arange(1, len(v) + 1) > (css - 1))[0][-1]
    theta = (css[k] - 1) / (k + 1.0)
    return np.maximum(v - theta, 0.0)


def minimize_on_simplex(fun: Callable[[np.ndarray], float], grad: Callable[[np.ndarray], np.ndarray],
                        n: int, tol: float = 1e-10, max_iter: int = 500, p0: np.ndarray | None = None
                        ) -> tuple[np.ndarray, float]:
    """Minimise a convex function on the simplex.

    Two letters reduce to a bounded scalar search; otherwise projected
    gradient descent with Armijo backtracking.
    """
    if n == 1:
        p = np.ones(1)
        return p, fun(p)
    if n == 2:
        r = minimize_scalar(lambda t: fun(np.array([t, 1 - t])), bounds=(0.0, 1.0), method="bounded",
                            options={"xatol": tol})
        cands = [np.array([r.x, 1 - r.x]), np.array([1.0, 0.0]), np.array([0.0, 1.0])]
        vals = [fun(c) for c in cands]
        i = int(np.argmin(vals))
        return cands[i], vals[i]
    p = np.full(n, 1.0 / n) if p0 is None else np.asarray(p0, dtype=float)
    val = fun(p)
    step = 1.0
    for _ in range(max_iter):
        g = grad(p)
        improved = False
        for _ in range(50):
            q = project_simplex(p - step * g)
            vq = fun(q)
            if vq <= val + 1e-4 * g @ (q - p):
                improved = True
                break
            step *= 0.5
        if not improved or np.max(np.abs(q - p)) < tol:
            if improved and vq < val:
                p, val = q, vq
            break
        p, val = q, vq
        step = min(step * 2.0, 1e3)
    return p, val


# --------------------------------------------------------------------------
# compound and arbitrarily varying sets

class _Saddle:
    """Shared machinery for the two adversarial capacities."""

    def __init__(self, chset: ChannelSet, cfg: SolverConfig):
        self.set = chset
        self.cfg = cfg
        self.d = chset.dim_in
        self.candidates: list[np.ndarray] = []
        self.iterations = 0
        self._warm = maximally_mixed(self.d)

    # subclass hooks -----------------------------------------------------
    def dual_objective(self, p) -> Objective:  # pragma: no cover - abstract
        raise NotImplementedError

    def primal(self, rho) -> tuple[float, np.ndarray]:  # pragma: no cover - abstract
        raise NotImplementedError

    def dual_gradient(self, rho, p) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    # --------------------------------------------------------------------
    def dual_value(self, p: np.ndarray) -> float:
        """``h(p) = max_rho F(rho, p)``, warm-started from the previous solve."""
        r = meg_ascent(self.dual_objective(p), self._warm, self.cfg, tol=self.cfg.tol / 10)
        self.iterations += r.iterations
        self._warm = 0.999 * r.rho + 0.001 * maximally_mixed(self.d)
        self.candidates.append(r.rho)
        self._last = (p.copy(), r.rho)
        return r.value

    def _dual_grad(self, p: np.ndarray) -> np.ndarray:
        self.dual_value(p)
        return self.dual_gradient(self._last[1], p)

    def solve_dual(self) -> tuple[np.ndarray, float]:
        n = len(self.set)
        return minimize_on_simplex(self.dual_value, self._dual_grad, n, tol=1e-9, max_iter=300)

    def primal_objective(self) -> Objective:
        def f(rho, l2):
            val, p = self.primal(rho)
            g = self.primal_supergradient(rho, l2, p)
            return val, g
        return f

    def primal_supergradient(self, rho, l2, p) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def solve(self) -> CapacityResult:
        cfg = self.cfg
        p_hat, upper = self.solve_dual()
        # re-evaluate at p_hat; the inner Frank-Wolfe gap turns the ascent value into an upper bound
        h_val = self.dual_value(p_hat)
        upper = max(certified_upper(self.dual_objective(p_hat), self._last[1]), h_val)
        # dual maximisers sit near the saddle; random restarts add nothing for a concave primal
        starts = [c for c in self.candidates[-3:]] + [maximally_mixed(self.d)]
        starts = [0.999 * s + 0.001 * maximally_mixed(self.d) for s in starts]
        f = self.primal_objective()
        runs = _run_restarts(lambda r0: meg_ascent(f, r0, cfg), starts)
        self.iterations += sum(r.iterations for r in runs)
        pool = [(self.primal(r.rho)[0], r.rho) for r in runs]
        pool += [(self.primal(c)[0], c) for c in self.candidates]
        value, rho_hat = max(pool, key=lambda t: t[0])
        value, rho_hat = self._refine_pairs(value, rho_hat)
        _, worst = self.primal(rho_hat)
        gap = upper - value
        res = CapacityResult(
            value=value,
            optimizer_state=rho_hat,
            worst_mixture=self.report_mixture(worst, p_hat),
            iterations=self.iterations,
            certified_gap=gap,
            upper=upper,
            converged=gap <= cfg.gap_tol,
            extra={"dual_mixture": p_hat},
        )
        if not res.converged:
            raise ConvergenceError(f"sup-inf and inf-sup differ by {gap:.3g} > gap_tol {cfg.gap_tol}", res)
        return res

    def _refine_pairs(self, value: float, rho_hat: np.ndarray) -> tuple[float, np.ndarray]:
        """Concave line searches between the incumbent and recent dual maximisers."""
        for c in self.candidates[-8:]:
            r = minimize_scalar(lambda t: -self.primal((1 - t) * rho_hat + t * c)[0], bounds=(0.0, 1.0),
                                method="bounded", options={"xatol": 1e-10})
            if -r.fun > value:
                value, rho_hat = -r.fun, (1 - r.x) * rho_hat + r.x * c
        return value, rho_hat

    def report_mixture(self, worst, p_hat) -> np.ndarray:
        return worst


class _Compound(_Saddle):
    def dual_objective(self, p) -> Objective:
        chans = [(ps, c) for ps, c in zip(p, self.set.channels) if ps > 0]

        def f(rho, l2):
            val, g = 0.0, 0.0
            for ps, c in chans:
                v, gs = mi_gradient_with_log(rho, l2, c)
                val += ps * v
                g = g + ps * gs
            return val, g
        return f

    def dual_gradient(self, rho, p) -> np.ndarray:
        return np.array([mi_value(rho, c) for c in self.set.channels])

    def primal(self, rho) -> tuple[float, np.ndarray]:
        vals = np.array([mi_value(rho, c) for c in self.set.channels])
        return float(vals.min()), vals

    def primal_supergradient(self, rho, l2, vals) -> np.ndarray:
        active = np.nonzero(vals <= vals.min() + 1e-9)[0]
        g = 0.0
        for s in active:
            g = g + mi_gradient_with_log(rho, l2, self.set.channels[s])[1]
        return g / len(active)

    def report_mixture(self, vals, p_hat) -> np.ndarray:
        e = np.zeros(len(self.set))
        e[int(np.argmin(vals))] = 1.0
        return e


class _Avqc(_Saddle):
    def __init__(self, chset, cfg):
        super().__init__(chset, cfg)
        self._p_warm = np.full(len(chset), 1.0 / len(chset))

    def dual_objective(self, p) -> Objective:
        ch = mix(self.set, p)

        def f(rho, l2):
            return mi_gradient_with_log(rho, l2, ch)
        return f

    def _pieces(self, rho):
        psi = purify(check_density((rho + rho.conj().T) / 2 / np.trace(rho).real))
        big = projector(psi)
        outs = [apply(c, rho) for c in self.set.channels]
        joints = [tensor_apply([c], big, extra_dims=[self.d], guard_dim=self.cfg.guard_dim) for c in self.set.channels]
        return outs, joints

    def dual_gradient(self, rho, p) -> np.ndarray:
        outs, joints = self._pieces(rho)
        return _mixture_mi_grad(outs, joints, p)

    def primal(self, rho) -> tuple[float, np.ndarray]:
        rho = (rho + rho.conj().T) / 2
        outs, joints = self._pieces(rho)
        s_in = _ent(rho)

        def fun(p):
            return s_in + _ent(sum(ps * o for ps, o in zip(p, outs))) - _ent(sum(ps * j for ps, j in zip(p, joints)))

        p, val = minimize_on_simplex(fun, lambda p: _mixture_mi_grad(outs, joints, p), len(self.set),
                                     tol=1e-10, p0=self._p_warm)
        self._p_warm = p
        return float(val), p

    def primal_supergradient(self, rho, l2, p) -> np.ndarray:
        return mi_gradient_with_log(rho, l2, mix(self.set, p))[1]


def _mixture_mi_grad(outs, joints, p) -> np.ndarray:
    """Gradient in ``p`` of ``I(rho, sum_s p_s N_s)`` from per-channel outputs and joint states."""
    lo = hermitian_log2(sum(ps * o for ps, o in zip(p, outs)))
    lj = hermitian_log2(sum(ps * j for ps, j in zip(p, joints)))
    return np.array([-np.trace(o @ lo).real + np.trace(j @ lj).real for o, j in zip(outs, joints)])


def compound_capacity(chset: ChannelSet, cfg: SolverConfig = SolverConfig()) -> CapacityResult:
    """``sup_rho min_s I(rho, N_s)``; ``worst_mixture`` flags the attaining channel."""
    if len(chset) == 1:
        return ea_capacity_single(chset.channels[0], cfg)
    return _Compound(chset, cfg).solve()


def avqc_capacity(chset: ChannelSet, cfg: SolverConfig = SolverConfig()) -> CapacityResult:
    """``sup_rho inf_{N in conv(set)} I(rho, N)``; ``worst_mixture`` is the attaining mixture."""
    if len(chset) == 1:
        return ea_capacity_single(chset.channels[0], cfg)
    return _Avqc(chset, cfg).solve()


def inner_value(kind: str, chset: ChannelSet, rho: np.ndarray, cfg: SolverConfig = SolverConfig()) -> float:
    """Recompute ``inf`` over the adversary at a fixed input state."""
    if kind == "single":
        return mi_value(rho, chset.channels[0])
    solver = (_Compound if kind == "compound" else _Avqc)(chset, cfg)
    return solver.primal(rho)[0]


# --------------------------------------------------------------------------
# corollaries

def additivity_check(set_a: ChannelSet, set_b: ChannelSet, cfg: SolverConfig = SolverConfig()):
    """AVQC capacities of both sets and of the product set, with ``|C_AB - C_A - C_B|``."""
    dim = set_a.dim_in * set_b.dim_in * set_a.dim_out * set_b.dim_out
    if dim > cfg.guard_dim:
        raise ResourceError(f"product dimension {dim} exceeds guard {cfg.guard_dim}")
    cap_a = avqc_capacity(set_a, cfg).value
    cap_b = avqc_capacity(set_b, cfg).value
    cap_ab = avqc_capacity(product_set(set_a, set_b), cfg).value
    return cap_a, cap_b, cap_ab, abs(cap_ab - cap_a - cap_b)


def continuity_bound(set_a: ChannelSet, set_b: ChannelSet, cfg: SolverConfig = SolverConfig(), distance=None):
    """Check ``|C(A) - C(B)| <= 6 D log2(d_A) + h(D)`` with ``D`` the Hausdorff diamond distance."""
    from .geometry import hausdorff_distance

    cap_a = avqc_capacity(set_a, cfg).value
    cap_b = avqc_capacity(set_b, cfg).value
    d = hausdorff_distance(set_a, set_b, seed=cfg.seed) if distance is None else distance
    bound = 6 * d * np.log2(set_a.dim_in) + binary_entropy(d)
    return cap_a, cap_b, d, bound, bool(abs(cap_a - cap_b) <= bound + 1e-6)
