"""Signal recovery from invariant moments by quasi-Newton least squares.

The objective in the time-domain variables x is

    w1 * (m1(x) - m1_target)**2
  + w2 * ||power(x) - power_target||**2
  + w3 * sum over canonical (k1, k2) of |third(x) - third_target|**2

and its gradient is exact: each term's Wirtinger derivative with respect to
the Fourier coefficients is assembled and pulled back through the unitary
DFT (the DFT matrix is symmetric, so the pullback is another forward
transform followed by 2*Re).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .invariants import InvariantMoments, canonical_triples
from .signals import GroupElement, Signal, apply_group, group_elements, random_unit_signal

__all__ = [
    "RecoveryConfig",
    "RecoveryResult",
    "loss_and_gradient",
    "recover",
    "recover_multi",
    "align_and_error",
]


@dataclass(frozen=True)
class RecoveryConfig:
    """Optimizer settings for moment-matching recovery."""

    group: str
    weights: tuple[float, float, float] = (1.0, 1.0, 1.0)
    third_only: bool = False  # drop the degree-1/2 terms (weights (0, 0, w3))
    max_iters: int = 5000
    grad_tol: float = 1e-10
    loss_tol: float = 0.0  # extra stop: objective at or below this value
    init_step: float = 1.0
    backtrack: float = 0.5
    sufficient_decrease: float = 1e-4
    memory: int = 10
    init_seed: int = 0

    def __post_init__(self):
        w1, w2, w3 = self.weights
        if min(w1, w2, w3) < 0:
            raise ValueError("weights must be nonnegative")
        if w3 <= 0:
            raise ValueError("the third-moment weight must be positive")
        if self.grad_tol <= 0:
            raise ValueError("grad_tol must be positive")
        if self.loss_tol < 0:
            raise ValueError("loss_tol must be >= 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not 0 < self.backtrack < 1:
            raise ValueError("backtrack contraction must lie in (0, 1)")

    def effective_weights(self) -> tuple[float, float, float]:
        w1, w2, w3 = self.weights
        return (0.0, 0.0, w3) if self.third_only else (w1, w2, w3)


@dataclass(eq=False)
class RecoveryResult:
    estimate: Signal
    loss_trace: list[float]
    iterations: int
    aligned_error: Optional[float] = None
    best_group_element: Optional[GroupElement] = None
    failed: bool = False

    @property
    def final_loss(self) -> float:
        return self.loss_trace[-1]

    def to_json_dict(self) -> dict:
        g = self.best_group_element
        return {
            "estimate": [float(v) for v in self.estimate.values],
            "loss_trace": [float(v) for v in self.loss_trace],
            "iterations": self.iterations,
            "aligned_error": self.aligned_error,
            "group_element": None if g is None else {"rot": g.rot, "refl": bool(g.refl)},
        }


class _LossContext:
    """Precomputed index arrays and targets for fast repeated evaluation."""

    def __init__(self, target: InvariantMoments, cfg: RecoveryConfig):
        if cfg.group != target.group:
            raise ValueError(f"config group {cfg.group!r} does not match moments group {target.group!r}")
        self.n = target.n
        self.group = target.group
        self.w1, self.w2, self.w3 = cfg.effective_weights()
        triples = canonical_triples(self.group, self.n)
        self.k1 = np.array([t[0] for t in triples])
        self.k2 = np.array([t[1] for t in triples])
        self.k3 = np.array([t[2] for t in triples])
        if self.group == "cyclic":
            self.k12 = (self.k1 + self.k2) % self.n
        else:
            self.k1n = (-self.k1) % self.n
            self.k2n = (-self.k2) % self.n
            self.k3n = (-self.k3) % self.n
        self.m1_t = target.m1
        self.power_t = target.power
        self.third_t = target.third_vector()

    def _third(self, f: np.ndarray) -> np.ndarray:
        if self.group == "cyclic":
            return f[self.k1] * f[self.k2] * np.conj(f[self.k12])
        fwd = f[self.k1] * f[self.k2] * f[self.k3]
        rev = f[self.k1n] * f[self.k2n] * f[self.k3n]
        return 0.5 * (fwd + rev)

    def loss(self, x: np.ndarray) -> float:
        f = np.fft.fft(x, norm="ortho")
        h0 = f[0] - self.m1_t
        dp = np.abs(f) ** 2 - self.power_t
        h3 = self._third(f) - self.third_t
        return float(self.w1 * abs(h0) ** 2 + self.w2 * np.sum(dp**2)
                     + self.w3 * np.sum(np.abs(h3) ** 2))

    def loss_grad(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        n = self.n
        f = np.fft.fft(x, norm="ortho")
        h0 = f[0] - self.m1_t
        dp = np.abs(f) ** 2 - self.power_t
        h3 = self._third(f) - self.third_t
        loss = float(self.w1 * abs(h0) ** 2 + self.w2 * np.sum(dp**2)
                     + self.w3 * np.sum(np.abs(h3) ** 2))

        gf = np.zeros(n, dtype=complex)
        gf[0] += self.w1 * np.conj(h0)
        gf += self.w2 * 2.0 * dp * np.conj(f)
        hb = np.conj(h3)
        if self.group == "cyclic":
            c3 = np.conj(f[self.k12])
            _scatter(gf, self.k1, self.w3 * hb * f[self.k2] * c3, n)
            _scatter(gf, self.k2, self.w3 * hb * f[self.k1] * c3, n)
            _scatter(gf, self.k12, self.w3 * h3 * np.conj(f[self.k1] * f[self.k2]), n)
        else:
            c = 0.5 * self.w3 * hb
            _scatter(gf, self.k1, c * f[self.k2] * f[self.k3], n)
            _scatter(gf, self.k2, c * f[self.k1] * f[self.k3], n)
            _scatter(gf, self.k3, c * f[self.k1] * f[self.k2], n)
            _scatter(gf, self.k1n, c * f[self.k2n] * f[self.k3n], n)
            _scatter(gf, self.k2n, c * f[self.k1n] * f[self.k3n], n)
            _scatter(gf, self.k3n, c * f[self.k1n] * f[self.k2n], n)
        grad = 2.0 * np.fft.fft(gf, norm="ortho").real
        return loss, grad


def _scatter(acc: np.ndarray, idx: np.ndarray, vals: np.ndarray, n: int) -> None:
    acc += np.bincount(idx, weights=vals.real, minlength=n)
    acc += 1j * np.bincount(idx, weights=vals.imag, minlength=n)


def loss_and_gradient(x: Signal, target: InvariantMoments, cfg: RecoveryConfig) -> tuple[float, np.ndarray]:
    """Loss and its exact time-domain gradient at x."""
    if x.n != target.n:
        raise ValueError(f"signal length {x.n} does not match moments length {target.n}")
    return _LossContext(target, cfg).loss_grad(x.values)


def _two_loop(g: np.ndarray, pairs: list[tuple[np.ndarray, np.ndarray, float]]) -> np.ndarray:
    """L-BFGS two-loop recursion: returns -H @ g."""
    q = g.copy()
    alphas = []
    for s, y, rho in reversed(pairs):
        a = rho * np.dot(s, q)
        q -= a * y
        alphas.append(a)
    if pairs:
        s, y, _ = pairs[-1]
        q *= np.dot(s, y) / np.dot(y, y)
    for (s, y, rho), a in zip(pairs, reversed(alphas)):
        b = rho * np.dot(y, q)
        q += (a - b) * s
    return -q


def recover(target: InvariantMoments, cfg: RecoveryConfig,
            truth: Optional[Signal] = None) -> RecoveryResult:
    """Quasi-Newton descent from a seeded random unit-norm initialization.

    Limited-memory BFGS direction with Armijo backtracking; terminates on
    gradient norm below cfg.grad_tol or cfg.max_iters accepted steps.  A
    non-finite loss is reported as a failed trial rather than raised.
    """
    ctx = _LossContext(target, cfg)
    x = random_unit_signal(ctx.n, cfg.init_seed).values.copy()
    fx, g = ctx.loss_grad(x)
    trace = [fx]
    if not np.isfinite(fx):
        return _finish(Signal(x), trace, 0, truth, target.group, failed=True)

    pairs: list[tuple[np.ndarray, np.ndarray, float]] = []
    best_f, best_x = fx, x.copy()
    iterations = 0
    min_step = 1e-20
    c1 = cfg.sufficient_decrease
    while iterations < cfg.max_iters:
        if fx <= cfg.loss_tol or np.linalg.norm(g) < cfg.grad_tol:
            break
        d = _two_loop(g, pairs)
        gd = np.dot(g, d)
        if not np.isfinite(gd) or gd >= 0:
            pairs.clear()
            d = -g
            gd = -np.dot(g, g)
        t = cfg.init_step
        accepted = False
        while t >= min_step:
            ft = ctx.loss(x + t * d)
            if np.isfinite(ft) and ft <= fx + c1 * t * gd:
                accepted = True
                break
            t *= cfg.backtrack
        if not accepted:
            if pairs:
                pairs.clear()  # retry the step along steepest descent
                continue
            break  # no decrease along -g: numerically stationary
        xt = x + t * d
        _, gt = ctx.loss_grad(xt)
        s, yv = xt - x, gt - g
        x, fx, g = xt, ft, gt
        iterations += 1
        trace.append(fx)
        if fx < best_f:
            best_f, best_x = fx, x.copy()
        sy = np.dot(s, yv)
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(yv):
            pairs.append((s, yv, 1.0 / sy))
            if len(pairs) > cfg.memory:
                pairs.pop(0)
    return _finish(Signal(best_x), trace, iterations, truth, target.group, failed=False)


def _finish(estimate: Signal, trace, iterations, truth, group, failed) -> RecoveryResult:
    aligned_error = None
    best_g = None
    if truth is not None and not failed:
        best_g, aligned_error = align_and_error(truth, estimate, group)
    return RecoveryResult(estimate=estimate, loss_trace=trace, iterations=iterations,
                          aligned_error=aligned_error, best_group_element=best_g,
                          failed=failed)


def recover_multi(target: InvariantMoments, cfg: RecoveryConfig, inits: int,
                  seed: int, report: str = "best",
                  truth: Optional[Signal] = None) -> RecoveryResult:
    """Run several random initializations; report the best-loss trial or the
    aligned average of all non-failed estimates."""
    if inits < 1:
        raise ValueError("need at least one initialization")
    if report not in ("best", "mean"):
        raise ValueError(f"report must be 'best' or 'mean', got {report!r}")
    results = []
    for i in range(inits):
        sub = int(np.random.SeedSequence([int(seed), i]).generate_state(1, np.uint64)[0])
        cfg_i = _with_seed(cfg, sub)
        results.append(recover(target, cfg_i, truth=truth))
    ok = [r for r in results if not r.failed]
    if not ok:
        return results[0]
    best = min(ok, key=lambda r: r.final_loss)
    if report == "best" or len(ok) == 1:
        return best
    # align every estimate to the best one before averaging
    acc = np.zeros(target.n)
    for r in ok:
        g, _ = align_and_error(best.estimate, r.estimate, target.group)
        acc += apply_group(g, r.estimate).values
    mean = Signal(acc / len(ok))
    aligned_error = None
    best_g = None
    if truth is not None:
        best_g, aligned_error = align_and_error(truth, mean, target.group)
    return RecoveryResult(estimate=mean, loss_trace=best.loss_trace,
                          iterations=best.iterations, aligned_error=aligned_error,
                          best_group_element=best_g, failed=False)


def _with_seed(cfg: RecoveryConfig, seed: int) -> RecoveryConfig:
    return dataclasses.replace(cfg, init_seed=seed)


def align_and_error(truth: Signal, estimate: Signal, group: str) -> tuple[GroupElement, float]:
    """Best group element g minimizing ||truth - g.estimate|| and the relative error.

    Ties break to the first element in canonical order (rot ascending,
    plain before reflected).
    """
    if truth.n != estimate.n:
        raise ValueError(f"length mismatch: truth {truth.n}, estimate {estimate.n}")
    tnorm = truth.norm()
    if tnorm == 0.0:
        raise ValueError("cannot align against a zero truth vector")
    best_g, best_d = None, np.inf
    for g in group_elements(group, truth.n):
        d = float(np.linalg.norm(truth.values - apply_group(g, estimate).values))
        if d < best_d:
            best_g, best_d = g, d
    return best_g, best_d / tnorm
