"""Low-degree invariant moments of signals under cyclic and dihedral actions.

All third-order quantities are indexed by frequency pairs (k1, k2) with the
third frequency k3 = (-k1 - k2) % n implied.  Two index pairs give the same
polynomial equation whenever the frequency multisets {k1, k2, k3} agree
(and, for the dihedral group, also when they agree after negating all three
frequencies mod n).  ``distinct_indices`` returns one lexicographic
representative per equation class; all maps of third-order entries are keyed
by those representatives.

The dihedral third moment is normalized as the group average, i.e. half of
the sum of the two reflected products.  This makes the Fourier-domain
formula literally equal to the order-3 group-averaged tensor coefficient, so
a single brute-force oracle validates every moment.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .signals import (
    GROUPS,
    FourierSignal,
    Signal,
    apply_group,
    dft,
    group_elements,
    group_order,
)

__all__ = [
    "InvariantMoments",
    "distinct_indices",
    "canonical_triples",
    "canonical_pair",
    "power_spectrum",
    "polynomial_power_spectrum",
    "cyclic_bispectrum",
    "dihedral_third_moment",
    "compute_moments",
    "brute_force_moment",
    "unitary_moment",
    "phase_factor",
    "phase_cosine",
    "ZERO_TOL",
]

# Moduli below this threshold count as vanishing Fourier coefficients.
ZERO_TOL = 1e-9

# Largest length accepted by the dense brute-force tensor oracles.
ORACLE_MAX_N = 64


def _canonical_triple(group: str, n: int, k1: int, k2: int) -> tuple[int, int, int]:
    t = tuple(sorted((k1 % n, k2 % n, (-k1 - k2) % n)))
    if group == "dihedral":
        tn = tuple(sorted(((-t[0]) % n, (-t[1]) % n, (-t[2]) % n)))
        if tn < t:
            t = tn
    return t


@lru_cache(maxsize=None)
def canonical_triples(group: str, n: int) -> tuple[tuple[int, int, int], ...]:
    """Sorted representative triples (k1, k2, k3) of the distinct equations."""
    if group not in GROUPS:
        raise ValueError(f"unknown group {group!r}, expected one of {GROUPS}")
    if n < 2:
        raise ValueError(f"signal length must be >= 2, got {n}")
    seen = set()
    for k1 in range(n):
        for k2 in range(n):
            seen.add(_canonical_triple(group, n, k1, k2))
    return tuple(sorted(seen))


def distinct_indices(group: str, n: int) -> list[tuple[int, int]]:
    """Canonical deduplicated (k1, k2) index set, lexicographically ordered."""
    return [(t[0], t[1]) for t in canonical_triples(group, n)]


def canonical_pair(group: str, n: int, k1: int, k2: int) -> tuple[int, int]:
    """Representative pair of the equation class containing (k1, k2)."""
    t = _canonical_triple(group, n, k1, k2)
    return (t[0], t[1])


def power_spectrum(f: FourierSignal) -> np.ndarray:
    """Entrywise squared moduli |f[l]|**2 (degree-2 invariant of a real signal)."""
    return np.abs(f.coeffs) ** 2


def polynomial_power_spectrum(f: FourierSignal) -> np.ndarray:
    """Degree-2 polynomial invariant entries f[l] * f[(n-l) % n].

    Coincides with the power spectrum on real-origin spectra but stays the
    correct polynomial invariant for complex vectors.
    """
    c = f.coeffs
    return c * c[(-np.arange(f.n)) % f.n]


def cyclic_bispectrum(f: FourierSignal) -> dict[tuple[int, int], complex]:
    """Bispectrum entries f[k1] f[k2] conj(f[k1+k2]) over the canonical cyclic set."""
    c = f.coeffs
    n = f.n
    out = {}
    for k1, k2 in distinct_indices("cyclic", n):
        out[(k1, k2)] = complex(c[k1] * c[k2] * np.conj(c[(k1 + k2) % n]))
    return out


def dihedral_third_moment(f: FourierSignal) -> dict[tuple[int, int], complex]:
    """Reflection-averaged third moment over the canonical dihedral set.

    Entry (k1, k2) is (f[k1] f[k2] f[k3] + f[-k1] f[-k2] f[-k3]) / 2 with
    k3 = (-k1 - k2) % n and all indices mod n.  No conjugation is used, so
    the formula is valid for complex spectra as well; on real-origin spectra
    every entry is real.
    """
    c = f.coeffs
    n = f.n
    out = {}
    for k1, k2 in distinct_indices("dihedral", n):
        k3 = (-k1 - k2) % n
        fwd = c[k1] * c[k2] * c[k3]
        rev = c[(-k1) % n] * c[(-k2) % n] * c[(-k3) % n]
        out[(k1, k2)] = complex(0.5 * (fwd + rev))
    return out


@dataclass
class InvariantMoments:
    """Degree 1..3 invariant moments of a length-n signal under one group.

    ``third`` maps canonical (k1, k2) pairs (in ``distinct_indices`` order)
    to complex entries; ``sigma_used`` records the noise level subtracted
    during estimation (0 for exact moments).
    """

    group: str
    n: int
    m1: float
    power: np.ndarray
    third: dict[tuple[int, int], complex]
    sigma_used: float = 0.0

    def __post_init__(self):
        if self.group not in GROUPS:
            raise ValueError(f"unknown group {self.group!r}")
        self.power = np.asarray(self.power, dtype=float)
        if self.power.shape != (self.n,):
            raise ValueError("power spectrum length does not match n")
        expected = distinct_indices(self.group, self.n)
        if list(self.third.keys()) != expected:
            # normalize key order; reject unknown keys
            if set(self.third.keys()) != set(expected):
                raise ValueError("third-moment keys do not match the canonical index set")
            self.third = {k: self.third[k] for k in expected}

    def third_vector(self) -> np.ndarray:
        return np.array(list(self.third.values()), dtype=complex)

    def third_entry(self, k1: int, k2: int) -> complex:
        """Entry at any (k1, k2), looked up through its canonical representative."""
        return self.third[canonical_pair(self.group, self.n, k1, k2)]

    def to_json_dict(self) -> dict:
        return {
            "group": self.group,
            "n": self.n,
            "sigma_used": self.sigma_used,
            "m1": self.m1,
            "power": [float(p) for p in self.power],
            "third": [
                {"k1": k1, "k2": k2, "re": v.real, "im": v.imag}
                for (k1, k2), v in self.third.items()
            ],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "InvariantMoments":
        third = {(int(e["k1"]), int(e["k2"])): complex(e["re"], e["im"]) for e in d["third"]}
        return cls(
            group=d["group"],
            n=int(d["n"]),
            m1=float(d["m1"]),
            power=np.array(d["power"], dtype=float),
            third=third,
            sigma_used=float(d.get("sigma_used", 0.0)),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "InvariantMoments":
        try:
            d = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: not a valid moments JSON file ({exc})") from exc
        return cls.from_json_dict(d)


def compute_moments(x: Signal, group: str, sigma_used: float = 0.0) -> InvariantMoments:
    """Exact invariant moments of a signal (Fourier-domain formulas)."""
    f = dft(x)
    third = cyclic_bispectrum(f) if group == "cyclic" else dihedral_third_moment(f)
    return InvariantMoments(
        group=group,
        n=x.n,
        m1=float(f.coeffs[0].real),
        power=power_spectrum(f),
        third=third,
        sigma_used=sigma_used,
    )


def _check_oracle_size(x: Signal, d: int) -> None:
    if d not in (1, 2, 3):
        raise ValueError(f"tensor degree must be 1, 2 or 3, got {d}")
    if x.n > ORACLE_MAX_N:
        raise ValueError(f"brute-force oracle limited to n <= {ORACLE_MAX_N}, got {x.n}")


def brute_force_moment(x: Signal, d: int, group: str) -> np.ndarray:
    """Dense order-d tensor average of (g.x)^{(x) d} over the whole group.

    Test oracle only; cost O(|G| n**d).
    """
    _check_oracle_size(x, d)
    n = x.n
    acc = np.zeros((n,) * d)
    for g in group_elements(group, n):
        y = apply_group(g, x).values
        t = y
        for _ in range(d - 1):
            t = np.multiply.outer(t, y)
        acc += t
    return acc / group_order(group, n)


def unitary_moment(x: Signal, d: int, group: str) -> np.ndarray:
    """Average of (g.x)^{(x) d-1} (x) conj(g.x); equals the polynomial tensor on reals."""
    _check_oracle_size(x, d)
    n = x.n
    acc = np.zeros((n,) * d, dtype=complex)
    for g in group_elements(group, n):
        y = apply_group(g, x).values.astype(complex)
        t = np.conj(y)
        for _ in range(d - 1):
            t = np.multiply.outer(y, t)
        acc += t
    return acc / group_order(group, n)


def _require_moduli(f: FourierSignal, indices, tol: float = ZERO_TOL):
    for idx in indices:
        if abs(f.coeffs[idx % f.n]) <= tol:
            raise ValueError(f"vanishing Fourier coefficient at l={idx % f.n}")


def phase_factor(f: FourierSignal, i: int, j: int) -> complex:
    """Unit-modulus phase offset exp(1j*(theta_i + theta_j - theta_{i+j})).

    Defined only when the three referenced moduli exceed ZERO_TOL.
    """
    n = f.n
    _require_moduli(f, (i, j, i + j))
    z = f.coeffs[i % n] * f.coeffs[j % n] * np.conj(f.coeffs[(i + j) % n])
    return complex(z / abs(z))


def phase_cosine(f: FourierSignal, i: int, j: int) -> float:
    """cos(theta_i + theta_j - theta_{i+j}), the reflection-invariant phase datum."""
    return phase_factor(f, i, j).real
