"""Machine verification of the combinatorial linear-algebra facts behind the
conjugate-sign analysis, in exact integer/rational arithmetic.

For a band limit k, the linear forms x_{ij} = x_i + x_j - x_{i+j} over the
pairs 1 <= i <= j, i + j <= k all annihilate the vector (1, 2, ..., k).  The
checks here establish, exactly:

* the forms span that hyperplane (rank k - 1) for every k >= 2;
* for k >= 4 the spanning set is excessive (any single form can be removed);
* for k >= 4 there is an integer dependency with every coefficient nonzero.

Floating point is inadmissible for these statements, so ranks use
fraction-free (Bareiss) elimination on Python integers and nullspaces use
rational row reduction with denominators cleared at the end.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from math import gcd

import numpy as np

from .invariants import (
    ZERO_TOL,
    canonical_pair,
    cyclic_bispectrum,
    dihedral_third_moment,
    polynomial_power_spectrum,
)
from .signals import FourierSignal, fourier_action, group_elements

__all__ = [
    "FormMatrix",
    "form_matrix",
    "xij_rank",
    "is_excessive",
    "find_nonzero_annihilator",
    "condition_star_probe",
    "verify_counterexamples",
    "run_theory_suite",
]

_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71)


@dataclass(frozen=True)
class FormMatrix:
    """Integer matrix of the forms x_i + x_j - x_{i+j} in the basis x_1..x_k."""

    k: int
    pairs: tuple[tuple[int, int], ...]
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        weights = range(1, self.k + 1)
        for row in self.rows:
            if any(e not in (-1, 0, 1, 2) for e in row):
                raise AssertionError("form coefficients must lie in {-1, 0, 1, 2}")
            if sum(w * e for w, e in zip(weights, row)) != 0:
                raise AssertionError("form is not orthogonal to (1, 2, ..., k)")


def form_matrix(k: int) -> FormMatrix:
    if k < 2:
        raise ValueError(f"need k >= 2, got {k}")
    pairs = [(i, j) for i in range(1, k + 1) for j in range(i, k + 1) if i + j <= k]
    rows = []
    for i, j in pairs:
        row = [0] * k
        row[i - 1] += 1
        row[j - 1] += 1
        row[i + j - 1] -= 1
        rows.append(tuple(row))
    return FormMatrix(k=k, pairs=tuple(pairs), rows=tuple(rows))


def _bareiss_rank(rows) -> int:
    """Exact rank by fraction-free Gaussian elimination over the integers."""
    m = [list(r) for r in rows]
    if not m:
        return 0
    n_rows, n_cols = len(m), len(m[0])
    rank = 0
    prev = 1
    for col in range(n_cols):
        piv = next((i for i in range(rank, n_rows) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        p = m[rank][col]
        for i in range(rank + 1, n_rows):
            mi = m[i]
            f = mi[col]
            for j in range(col, n_cols):
                mi[j] = (p * mi[j] - f * m[rank][j]) // prev
        prev = p
        rank += 1
        if rank == min(n_rows, n_cols):
            break
    return rank


def _dependency_basis(rows) -> list[list[int]]:
    """Integer basis of the left dependencies {w : sum_r w_r * rows[r] = 0}.

    Rational row reduction of the transpose; each free variable yields one
    basis vector, denominators cleared and gcd-reduced.
    """
    m = len(rows)
    k = len(rows[0])
    a = [[Fraction(rows[r][c]) for r in range(m)] for c in range(k)]  # k x m
    pivots: list[int] = []
    row = 0
    for col in range(m):
        piv = next((i for i in range(row, k) if a[i][col] != 0), None)
        if piv is None:
            continue
        a[row], a[piv] = a[piv], a[row]
        inv = 1 / a[row][col]
        a[row] = [v * inv for v in a[row]]
        for i in range(k):
            if i != row and a[i][col] != 0:
                f = a[i][col]
                a[i] = [vi - f * vr for vi, vr in zip(a[i], a[row])]
        pivots.append(col)
        row += 1
        if row == k:
            break
    free = [c for c in range(m) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * m
        vec[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            vec[pc] = -a[r][fc]
        den = 1
        for v in vec:
            den = den * v.denominator // gcd(den, v.denominator)
        ints = [int(v * den) for v in vec]
        g = 0
        for v in ints:
            g = gcd(g, abs(v))
        basis.append([v // g for v in ints] if g > 1 else ints)
    return basis


def xij_rank(k: int) -> tuple[int, bool]:
    """Exact rank of the form matrix and whether it spans the hyperplane."""
    fm = form_matrix(k)
    rank = _bareiss_rank(fm.rows)
    return rank, rank == k - 1


def is_excessive(k: int) -> bool:
    """True iff removing any single form still leaves rank k - 1.

    A row is removable exactly when it appears with a nonzero coefficient in
    some dependency, so one dependency-basis computation answers all
    deletions at once.
    """
    fm = form_matrix(k)
    if _bareiss_rank(fm.rows) != k - 1:
        return False
    basis = _dependency_basis(fm.rows)
    m = len(fm.rows)
    return all(any(vec[r] != 0 for vec in basis) for r in range(m))


def find_nonzero_annihilator(k: int) -> list[int]:
    """Integer coefficients, all nonzero, annihilating every form row.

    Takes combinations of a dependency basis with coefficients p**t for
    successive primes p; each zero-coordinate constraint is a nonzero
    polynomial in p, so some prime in the fixed sequence must escape all of
    them.  The result is verified by exact dot products before returning.
    """
    if k < 4:
        raise ValueError(f"an all-nonzero annihilator is only guaranteed for k >= 4, got k={k}")
    fm = form_matrix(k)
    basis = _dependency_basis(fm.rows)
    if not basis:
        raise ValueError(f"the forms for k={k} admit no dependency at all")
    m = len(fm.rows)
    for p in _PRIMES:
        w = [sum(p**t * vec[r] for t, vec in enumerate(basis)) for r in range(m)]
        if all(v != 0 for v in w):
            for c in range(k):
                if sum(w[r] * fm.rows[r][c] for r in range(m)) != 0:
                    raise AssertionError("annihilator failed exact verification")
            g = 0
            for v in w:
                g = gcd(g, abs(v))
            if g > 1:
                w = [v // g for v in w]
            if w[0] < 0:
                w = [-v for v in w]
            return w
    raise AssertionError(f"no all-nonzero combination found for k={k} within the prime sequence")


def condition_star_probe(f: FourierSignal, exp_bound: int, subset_bound: int) -> list[dict]:
    """Bounded falsifier for the no-phase-resonance genericity condition.

    Searches nonempty subsets S (|S| <= subset_bound) of the canonical pairs
    (i, j), 1 <= i <= j, i + j <= k, and nonzero exponents in
    [-exp_bound, exp_bound] for multiplicative relations between the
    conjugated and unconjugated phase data, i.e.

        sum over S of 2 * n_ij * (theta_i + theta_j - theta_{i+j})  ==  0 (mod 2*pi)

    within 1e-9.  An empty result means no relation was found within the
    bounds; it is not a proof that none exists.
    """
    if exp_bound < 1 or subset_bound < 1:
        raise ValueError("exp_bound and subset_bound must be >= 1")
    n = f.n
    k = (n - 1) // 2
    for l in range(1, k + 1):
        if abs(f.coeffs[l]) <= ZERO_TOL:
            raise ValueError(f"vanishing Fourier coefficient at l={l}")
    theta = np.angle(f.coeffs)
    pairs = [(i, j) for i in range(1, k + 1) for j in range(i, k + 1) if i + j <= k]
    gamma = {(i, j): theta[i] + theta[j] - theta[i + j] for i, j in pairs}
    exps = [e for e in range(-exp_bound, exp_bound + 1) if e != 0]

    violations = []
    for size in range(1, min(subset_bound, len(pairs)) + 1):
        for subset in combinations(pairs, size):
            g = np.array([gamma[p] for p in subset])
            for assign in product(exps, repeat=size):
                s = 2.0 * float(np.dot(assign, g))
                wrapped = abs((s + np.pi) % (2.0 * np.pi) - np.pi)
                if wrapped < 1e-9:
                    violations.append({
                        "pairs": list(subset),
                        "exponents": list(assign),
                        "phase_sum": s,
                    })
    return violations


def _orbit_distance(fa: np.ndarray, fb: np.ndarray, n: int) -> float:
    """Min over the dihedral group of ||fa - g.fb|| in coefficient space."""
    best = np.inf
    for g in group_elements("dihedral", n):
        best = min(best, float(np.linalg.norm(fa - fourier_action(g, fb, n))))
    return best


def verify_counterexamples() -> list[dict]:
    """Machine-check the two length-5 pairs that defeat degree-3 separation.

    (a) spectra (1, 1, 0, 0, 1) and (1, 1/2, 0, 0, 2): identical dihedral
        polynomial invariants of degree <= 3, yet distinct orbits (the second
        vector is complex); vanishing coefficients are what makes this
        possible.
    (b) spectra (1, i, -i, i, -i) and (1, -i, -i, i, i): identical dihedral
        invariants, distinct real orbits, but distinguishable cyclic
        bispectra - so the failure is specific to the reflection averaging.
    """
    checks = []
    n = 5

    fa = FourierSignal(np.array([1, 1, 0, 0, 1], dtype=complex), real_origin=True)
    fb = FourierSignal(np.array([1, 0.5, 0, 0, 2], dtype=complex), real_origin=False)
    third_diff = _dict_max_diff(dihedral_third_moment(fa), dihedral_third_moment(fb))
    power_diff = float(np.max(np.abs(polynomial_power_spectrum(fa) - polynomial_power_spectrum(fb))))
    m1_diff = abs(fa.coeffs[0] - fb.coeffs[0])
    inv_diff = max(third_diff, power_diff, m1_diff)
    dist_a = _orbit_distance(fa.coeffs, fb.coeffs, n)
    checks.append({
        "name": "vanishing-coefficient pair: equal degree<=3 dihedral invariants",
        "pair": "a",
        "pass": bool(inv_diff < 1e-12),
        "witness": {"max_invariant_diff": inv_diff},
    })
    checks.append({
        "name": "vanishing-coefficient pair: orbits are distinct",
        "pair": "a",
        "pass": bool(dist_a > 0.1),
        "witness": {"orbit_distance": dist_a},
    })

    f1 = FourierSignal(np.array([1, 1j, -1j, 1j, -1j]), real_origin=True)
    f2 = FourierSignal(np.array([1, -1j, -1j, 1j, 1j]), real_origin=True)
    third_diff_b = _dict_max_diff(dihedral_third_moment(f1), dihedral_third_moment(f2))
    power_diff_b = float(np.max(np.abs(polynomial_power_spectrum(f1) - polynomial_power_spectrum(f2))))
    dist_b = _orbit_distance(f1.coeffs, f2.coeffs, n)
    b1, b2 = cyclic_bispectrum(f1), cyclic_bispectrum(f2)
    key = canonical_pair("cyclic", n, 1, 2)
    bisp_gap = abs(b1[key] - b2[key])
    low_degree_nonzero = abs(f1.coeffs[0]) > 0 and np.all(np.abs(polynomial_power_spectrum(f1)) > 0)
    checks.append({
        "name": "unit-modulus pair: equal dihedral invariants",
        "pair": "b",
        "pass": bool(max(third_diff_b, power_diff_b) < 1e-12),
        "witness": {"max_invariant_diff": max(third_diff_b, power_diff_b)},
    })
    checks.append({
        "name": "unit-modulus pair: orbits are distinct",
        "pair": "b",
        "pass": bool(dist_b > 0.1),
        "witness": {"orbit_distance": dist_b},
    })
    checks.append({
        "name": "unit-modulus pair: cyclic bispectra differ at the (1,2) class",
        "pair": "b",
        "pass": bool(abs(bisp_gap - 2.0) < 1e-12),
        "witness": {"entry": list(key), "gap": bisp_gap,
                    "values": [[b1[key].real, b1[key].imag], [b2[key].real, b2[key].imag]]},
    })
    checks.append({
        "name": "unit-modulus pair: degree-1 and degree-2 invariants nonvanishing",
        "pair": "b",
        "pass": bool(low_degree_nonzero),
        "witness": {"m1": abs(f1.coeffs[0]),
                    "min_power": float(np.min(np.abs(polynomial_power_spectrum(f1))))},
    })
    return checks


def _dict_max_diff(a: dict, b: dict) -> float:
    return max(abs(a[k] - b[k]) for k in a)


def run_theory_suite(k_max: int = 30) -> dict:
    """Run every exact check up to k_max plus the counterexample pairs."""
    if k_max < 4:
        raise ValueError(f"k_max must be >= 4, got {k_max}")
    checks = []
    for k in range(2, k_max + 1):
        rank, spans = xij_rank(k)
        checks.append({
            "name": "forms span the hyperplane",
            "k": k,
            "pass": bool(spans),
            "witness": {"rank": rank, "expected": k - 1},
        })
    for k in range(3, k_max + 1):
        exc = is_excessive(k)
        expected = k >= 4  # k = 3 is the known exception
        checks.append({
            "name": "excessive spanning set",
            "k": k,
            "pass": bool(exc == expected),
            "witness": {"is_excessive": exc, "expected": expected},
        })
    for k in range(4, k_max + 1):
        w = find_nonzero_annihilator(k)
        checks.append({
            "name": "all-nonzero integer annihilator",
            "k": k,
            "pass": bool(all(v != 0 for v in w)),
            "witness": {"coefficients": w if k <= 10 else w[:6] + ["..."]},
        })
    checks.extend(verify_counterexamples())
    return {"k_max": k_max, "all_pass": all(c["pass"] for c in checks), "checks": checks}
