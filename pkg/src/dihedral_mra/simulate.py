"""Noisy group-translated observations and debiased invariant-moment estimates.

Debiasing (unitary DFT, per-coordinate time-domain noise variance sigma**2,
so every Fourier coefficient of the noise has variance sigma**2):

* degree 1: mean of y_hat[0] is unbiased;
* degree 2: E|y_hat[l]|**2 = |f[l]|**2 + sigma**2, subtract sigma**2;
* degree 3, entry with implied triple (k1, k2, k3): the Gaussian cross terms
  contribute sigma**2 * m1 * z where z is the number of zero frequencies in
  the triple (z is 0, 1 or 3 since two zeros force a third).  Entries with no
  zero frequency are unbiased because odd Gaussian moments vanish and no two
  of the three frequencies sum to 0 mod n.

These formulas are exercised against Monte-Carlo oracles in the test suite.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .invariants import InvariantMoments, canonical_triples
from .signals import GROUPS, Signal, group_order

__all__ = [
    "ObservationSet",
    "sample_observations",
    "estimate_moments",
    "estimator_noise_scaling",
    "save_observations",
    "load_observations",
]

# Samples are generated in independently seeded chunks so that generation can
# run chunk-parallel while remaining deterministic; each sample's randomness
# is a fixed slice of the stream keyed by (master_seed, _OBS_TAG, chunk).
CHUNK = 4096
_OBS_TAG = 0x0B5E
_ESTIMATE_CHUNK = 8192


@dataclass(frozen=True, eq=False)
class ObservationSet:
    """N noisy group translates of one signal, with full generation metadata."""

    n: int
    group: str
    sigma: float
    samples: np.ndarray  # shape (N, n)
    master_seed: int
    exhaustive: bool = False
    seed_rule: str = f"default_rng([master_seed, {_OBS_TAG}, chunk]), chunk size {CHUNK}"

    def __post_init__(self):
        if self.group not in GROUPS:
            raise ValueError(f"unknown group {self.group!r}")
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 2 or s.shape[1] != self.n:
            raise ValueError("samples must be a 2-d array of rows of length n")
        if s.shape[0] < 1:
            raise ValueError("observation set must contain at least one sample")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def count(self) -> int:
        return self.samples.shape[0]


def _translate_rows(x: np.ndarray, rot: np.ndarray, refl: np.ndarray) -> np.ndarray:
    """Rows x[(sign * (j + rot)) % n] for per-row rotation/reflection."""
    n = x.size
    j = np.arange(n)[None, :]
    sign = np.where(refl[:, None], -1, 1)
    perm = (sign * (j + rot[:, None])) % n
    return x[perm]


def sample_observations(
    x: Signal,
    sigma: float,
    N: int,
    group: str,
    master_seed: int,
    exhaustive: bool = False,
) -> ObservationSet:
    """Draw N samples g_i . x + eps_i with uniform g_i and N(0, sigma**2 I) noise.

    With ``exhaustive=True`` the group elements are enumerated in canonical
    order instead of sampled; N must then equal the group order.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if N < 1:
        raise ValueError(f"need at least one sample, got N={N}")
    n = x.n
    order = group_order(group, n)
    if exhaustive and N != order:
        raise ValueError(f"exhaustive mode needs N == |G| == {order}, got N={N}")

    rows = np.empty((N, n))
    for start in range(0, N, CHUNK):
        stop = min(start + CHUNK, N)
        m = stop - start
        rng = np.random.default_rng([master_seed, _OBS_TAG, start // CHUNK])
        if exhaustive:
            idx = np.arange(start, stop)
        else:
            idx = rng.integers(0, order, size=m)
        # canonical enumeration order is rot-major with the plain element first
        if group == "cyclic":
            rot, refl = idx, np.zeros(m, dtype=bool)
        else:
            rot, refl = idx // 2, (idx % 2).astype(bool)
        rows[start:stop] = _translate_rows(x.values, rot, refl)
        if sigma > 0:
            rows[start:stop] += sigma * rng.standard_normal((m, n))
    return ObservationSet(n=n, group=group, sigma=float(sigma), samples=rows,
                          master_seed=int(master_seed), exhaustive=exhaustive)


def estimate_moments(obs: ObservationSet) -> InvariantMoments:
    """Debiased Fourier-domain empirical moments of an observation set."""
    n, group, sigma = obs.n, obs.group, obs.sigma
    N = obs.count
    triples = canonical_triples(group, n)
    k1 = np.array([t[0] for t in triples])
    k2 = np.array([t[1] for t in triples])
    k3 = np.array([t[2] for t in triples])

    sum_f0 = 0.0
    sum_pow = np.zeros(n)
    sum_third = np.zeros(len(triples), dtype=complex)
    for start in range(0, N, _ESTIMATE_CHUNK):
        Y = np.fft.fft(obs.samples[start:start + _ESTIMATE_CHUNK], axis=1, norm="ortho")
        sum_f0 += float(np.sum(Y[:, 0].real))
        sum_pow += np.sum(np.abs(Y) ** 2, axis=0)
        if group == "cyclic":
            prod = Y[:, k1] * Y[:, k2] * np.conj(Y[:, (k1 + k2) % n])
        else:
            fwd = Y[:, k1] * Y[:, k2] * Y[:, k3]
            rev = Y[:, (-k1) % n] * Y[:, (-k2) % n] * Y[:, (-k3) % n]
            prod = 0.5 * (fwd + rev)
        sum_third += np.sum(prod, axis=0)

    m1 = sum_f0 / N
    power = sum_pow / N - sigma**2
    zeros = (k1 == 0).astype(int) + (k2 == 0).astype(int) + (k3 == 0).astype(int)
    third_vec = sum_third / N - sigma**2 * m1 * zeros
    third = {(int(a), int(b)): complex(v) for a, b, v in zip(k1, k2, third_vec)}
    return InvariantMoments(group=group, n=n, m1=m1, power=power, third=third,
                            sigma_used=sigma)


def estimator_noise_scaling(
    x: Signal,
    sigmas,
    N: int,
    trials: int,
    seed: int,
    group: str = "dihedral",
) -> dict[float, float]:
    """Pooled std of debiased third-moment entries across trials, per sigma.

    The dominant large-sigma noise term in each entry is the cubic noise
    product, so the returned stds scale like sigma**3 / sqrt(N).
    """
    sigmas = [float(s) for s in sigmas]
    if any(b <= a for a, b in zip(sigmas, sigmas[1:])):
        raise ValueError("sigmas must be strictly increasing")
    if any(s < 1 for s in sigmas):
        raise ValueError("noise-scaling sigmas must all be >= 1")
    if trials < 2:
        raise ValueError("need at least two trials to estimate a std")

    out = {}
    for si, sigma in enumerate(sigmas):
        ests = []
        for t in range(trials):
            obs = sample_observations(x, sigma, N, group,
                                      master_seed=_derive(seed, si, t))
            ests.append(estimate_moments(obs).third_vector())
        E = np.array(ests)  # (trials, entries)
        dev = E - E.mean(axis=0, keepdims=True)
        pooled = np.sqrt(np.sum(np.abs(dev) ** 2) / ((trials - 1) * E.shape[1]))
        out[sigma] = float(pooled)
    return out


def _derive(*parts) -> int:
    """Fold integer parts into a single 64-bit sub-seed."""
    ss = np.random.SeedSequence([int(p) for p in parts])
    return int(ss.generate_state(1, np.uint64)[0])


def save_observations(obs: ObservationSet, out_dir) -> None:
    """Persist samples as CSV (one sample per row) plus a JSON sidecar."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "samples.csv", "w") as fh:
        for row in obs.samples:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    meta = {
        "n": obs.n,
        "group": obs.group,
        "sigma": obs.sigma,
        "N": obs.count,
        "master_seed": obs.master_seed,
        "exhaustive": obs.exhaustive,
        "seed_rule": obs.seed_rule,
    }
    (out / "observations.json").write_text(json.dumps(meta, indent=2) + "\n")


def load_observations(in_dir) -> ObservationSet:
    src = Path(in_dir)
    meta_path = src / "observations.json"
    if not meta_path.exists():
        raise ValueError(f"{src}: missing observations.json sidecar")
    meta = json.loads(meta_path.read_text())
    samples = np.loadtxt(src / "samples.csv", delimiter=",", ndmin=2)
    obs = ObservationSet(
        n=int(meta["n"]),
        group=meta["group"],
        sigma=float(meta["sigma"]),
        samples=samples,
        master_seed=int(meta["master_seed"]),
        exhaustive=bool(meta.get("exhaustive", False)),
    )
    if obs.count != int(meta["N"]):
        raise ValueError(f"{src}: sample count {obs.count} does not match sidecar N={meta['N']}")
    return obs
