"""Real signals, the unitary DFT, and the cyclic/dihedral group actions.

Conventions (fixed once, used everywhere):

* DFT is unitary with kernel sign -1:  f[l] = n**-0.5 * sum_j x[j] exp(-2*pi*1j*j*l/n).
  This makes Parseval exact and gives additive Gaussian noise a flat variance
  of sigma**2 per Fourier coefficient.
* The rotation generator acts by a left shift, (r.x)[i] = x[(i+1) % n], so that
  in the Fourier domain r multiplies coefficient l by exp(+2*pi*1j*l/n).
* The reflection s fixes index 0:  (s.x) = (x[0], x[n-1], ..., x[1]).
* A group element is written in the canonical form r**rot * s**refl, i.e. the
  reflection (if any) is applied first, then the rotation.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "Signal",
    "FourierSignal",
    "GroupElement",
    "GROUPS",
    "dft",
    "idft",
    "apply_group",
    "apply_group_fourier",
    "fourier_action",
    "group_order",
    "group_elements",
    "random_unit_signal",
    "save_signal_csv",
    "load_signal_csv",
    "save_fourier_csv",
    "load_fourier_csv",
]

GROUPS = ("cyclic", "dihedral")

# Tolerance for the conjugate-symmetry certificate of real-origin spectra.
CONJ_TOL = 1e-12


def _check_group(group: str) -> str:
    if group not in GROUPS:
        raise ValueError(f"unknown group {group!r}, expected one of {GROUPS}")
    return group


@dataclass(frozen=True, eq=False)
class Signal:
    """A real vector of length n >= 2; entries are finite and immutable."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1:
            raise ValueError(f"signal must be one-dimensional, got shape {v.shape}")
        if v.size < 2:
            raise ValueError(f"signal length must be >= 2, got {v.size}")
        if not np.all(np.isfinite(v)):
            raise ValueError("signal entries must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


@dataclass(frozen=True, eq=False)
class FourierSignal:
    """Complex Fourier coefficients indexed l = 0..n-1.

    ``real_origin`` certifies that the vector is the DFT of a real signal,
    i.e. coeffs[(n-l) % n] == conj(coeffs[l]); this is validated on
    construction.  Non-real-origin spectra are allowed (real_origin=False)
    and are used for the complex counterexample checks.
    """

    coeffs: np.ndarray
    real_origin: bool = True

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size < 2:
            raise ValueError("Fourier coefficients must be a 1-d vector of length >= 2")
        if not np.all(np.isfinite(c)):
            raise ValueError("Fourier coefficients must be finite")
        if self.real_origin:
            n = c.size
            rev = c[(-np.arange(n)) % n]
            scale = max(1.0, float(np.max(np.abs(c))))
            if not np.allclose(rev, np.conj(c), rtol=CONJ_TOL, atol=CONJ_TOL * scale):
                raise ValueError("coefficients violate conjugate symmetry for a real-origin spectrum")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def n(self) -> int:
        return self.coeffs.size


@dataclass(frozen=True, order=True)
class GroupElement:
    """Element r**rot * s**refl of the dihedral group D_n (refl=False: cyclic part).

    The dataclass ordering (rot ascending, reflection last) is the canonical
    enumeration order used for tie-breaking in alignment.
    """

    rot: int
    refl: bool = False

    def compose(self, other: "GroupElement", n: int) -> "GroupElement":
        """Product self * other under the relation s r = r**-1 s."""
        sign = -1 if self.refl else 1
        return GroupElement((self.rot + sign * other.rot) % n, self.refl ^ other.refl)

    def inverse(self, n: int) -> "GroupElement":
        if self.refl:
            return self  # reflections are involutions: (r**a s)**2 = e
        return GroupElement((-self.rot) % n, False)


def group_order(group: str, n: int) -> int:
    _check_group(group)
    return n if group == "cyclic" else 2 * n


def group_elements(group: str, n: int):
    """All elements in canonical order: rot ascending, plain before reflected."""
    _check_group(group)
    for rot in range(n):
        yield GroupElement(rot, False)
        if group == "dihedral":
            yield GroupElement(rot, True)


def dft(x: Signal) -> FourierSignal:
    """Unitary DFT of a real signal; the result carries a real-origin certificate."""
    return FourierSignal(np.fft.fft(x.values, norm="ortho"), real_origin=True)


def idft(f: FourierSignal) -> Signal:
    """Inverse unitary DFT back to a real signal.

    Raises ValueError if the coefficients are not (numerically) the spectrum
    of a real vector.
    """
    z = np.fft.ifft(f.coeffs, norm="ortho")
    scale = max(1.0, float(np.max(np.abs(z))))
    if np.max(np.abs(z.imag)) > 1e-9 * scale:
        raise ValueError("spectrum is not conjugate-symmetric; inverse transform is not real")
    return Signal(z.real)


def _reflect(values: np.ndarray) -> np.ndarray:
    # (s.x)[i] = x[(-i) % n]
    return np.roll(values[::-1], 1)


def apply_group(g: GroupElement, x: Signal) -> Signal:
    """Apply g = r**rot * s**refl in the time domain (reflection first)."""
    n = x.n
    if not 0 <= g.rot < n:
        raise ValueError(f"rotation exponent {g.rot} out of range for length {n}")
    v = x.values
    if g.refl:
        v = _reflect(v)
    return Signal(np.roll(v, -g.rot))


def fourier_action(g: GroupElement, coeffs: np.ndarray, n: int) -> np.ndarray:
    """Raw coefficient action: reflection reverses indices, rotation modulates."""
    if not 0 <= g.rot < n:
        raise ValueError(f"rotation exponent {g.rot} out of range for length {n}")
    c = coeffs
    if g.refl:
        c = c[(-np.arange(n)) % n]
    return c * np.exp(2j * np.pi * g.rot * np.arange(n) / n)


def apply_group_fourier(g: GroupElement, f: FourierSignal) -> FourierSignal:
    """Apply g in the Fourier domain; preserves the real-origin certificate."""
    return FourierSignal(fourier_action(g, f.coeffs, f.n), real_origin=f.real_origin)


def random_unit_signal(n: int, rng_seed) -> Signal:
    """I.i.d. standard normal entries scaled to unit l2 norm; deterministic per seed."""
    if n < 2:
        raise ValueError(f"signal length must be >= 2, got {n}")
    rng = np.random.default_rng(rng_seed)
    v = rng.standard_normal(n)
    while not np.linalg.norm(v) > 0.0:  # probability-zero degenerate draw
        v = rng.standard_normal(n)
    return Signal(v / np.linalg.norm(v))


def save_signal_csv(x: Signal, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "value"])
        for i, v in enumerate(x.values):
            w.writerow([i, repr(float(v))])


def load_signal_csv(path) -> Signal:
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["index", "value"]:
        raise ValueError(f"{path}: expected signal CSV with header 'index,value'")
    values = np.empty(len(rows) - 1)
    for i, row in enumerate(rows[1:]):
        if len(row) != 2 or int(row[0]) != i:
            raise ValueError(f"{path}: malformed row {i + 1}, expected 'index,value' with index {i}")
        values[i] = float(row[1])
    return Signal(values)


def save_fourier_csv(f: FourierSignal, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "re", "im"])
        for i, c in enumerate(f.coeffs):
            w.writerow([i, repr(float(c.real)), repr(float(c.imag))])


def load_fourier_csv(path, real_origin: bool = True) -> FourierSignal:
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["index", "re", "im"]:
        raise ValueError(f"{path}: expected Fourier CSV with header 'index,re,im'")
    coeffs = np.empty(len(rows) - 1, dtype=complex)
    for i, row in enumerate(rows[1:]):
        if len(row) != 3 or int(row[0]) != i:
            raise ValueError(f"{path}: malformed row {i + 1}, expected 'index,re,im' with index {i}")
        coeffs[i] = float(row[1]) + 1j * float(row[2])
    return FourierSignal(coeffs, real_origin=real_origin)
