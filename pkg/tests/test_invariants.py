"""Invariant-moment tests against brute-force group-averaged oracles."""

import numpy as np
import pytest

from dihedral_mra.invariants import (
    InvariantMoments,
    brute_force_moment,
    canonical_pair,
    compute_moments,
    cyclic_bispectrum,
    dihedral_third_moment,
    distinct_indices,
    phase_cosine,
    phase_factor,
    polynomial_power_spectrum,
    power_spectrum,
    unitary_moment,
)
from dihedral_mra.signals import (
    FourierSignal,
    Signal,
    apply_group,
    apply_group_fourier,
    dft,
    group_elements,
    random_unit_signal,
)


def unitary_matrix(n):
    return np.fft.fft(np.eye(n), norm="ortho", axis=0)


def tensor_in_fourier(t, n):
    """Change of basis of a dense order-d tensor into Fourier coordinates."""
    f = unitary_matrix(n)
    if t.ndim == 1:
        return np.einsum("i,ai->a", t, f, optimize=True)
    if t.ndim == 2:
        return np.einsum("ij,ai,bj->ab", t, f, f, optimize=True)
    return np.einsum("ijk,ai,bj,ck->abc", t, f, f, f, optimize=True)


class TestDistinctIndices:
    def test_n5_counts(self):
        # a generic real length-5 signal attains exactly one value per class:
        # 7 distinct bispectrum entries and 5 distinct reflection-averaged ones
        assert len(distinct_indices("cyclic", 5)) == 7
        assert len(distinct_indices("dihedral", 5)) == 5

    def test_counts_match_distinct_generic_values(self):
        for group, fn in (("cyclic", cyclic_bispectrum), ("dihedral", dihedral_third_moment)):
            for n in (5, 7, 8):
                f = dft(random_unit_signal(n, 100 + n))
                values = []
                for k1 in range(n):
                    for k2 in range(n):
                        if group == "cyclic":
                            v = f.coeffs[k1] * f.coeffs[k2] * np.conj(f.coeffs[(k1 + k2) % n])
                        else:
                            k3 = (-k1 - k2) % n
                            v = 0.5 * (f.coeffs[k1] * f.coeffs[k2] * f.coeffs[k3]
                                       + f.coeffs[-k1 % n] * f.coeffs[-k2 % n] * f.coeffs[-k3 % n])
                        values.append(v)
                distinct = []
                for v in values:
                    if not any(abs(v - u) < 1e-12 for u in distinct):
                        distinct.append(v)
                assert len(distinct) == len(distinct_indices(group, n)), (group, n)

    def test_large_n_densities(self):
        assert 0.8 <= len(distinct_indices("cyclic", 100)) / (100**2 / 6) <= 1.2
        assert 0.8 <= len(distinct_indices("dihedral", 100)) / (100**2 / 12) <= 1.2

    def test_lexicographic_order(self):
        for group in ("cyclic", "dihedral"):
            idx = distinct_indices(group, 9)
            assert idx == sorted(idx)
            assert len(set(idx)) == len(idx)

    def test_canonical_pair_covers_all(self):
        for group in ("cyclic", "dihedral"):
            canon = set(distinct_indices(group, 11))
            for k1 in range(11):
                for k2 in range(11):
                    assert canonical_pair(group, 11, k1, k2) in canon

    def test_entry_value_constant_on_classes(self):
        n = 11
        f = dft(random_unit_signal(n, 3))
        m = compute_moments(random_unit_signal(n, 3), "cyclic")
        for k1 in range(n):
            for k2 in range(n):
                direct = f.coeffs[k1] * f.coeffs[k2] * np.conj(f.coeffs[(k1 + k2) % n])
                assert abs(m.third_entry(k1, k2) - direct) < 1e-12

    def test_rejects_tiny_n(self):
        with pytest.raises(ValueError):
            distinct_indices("cyclic", 1)
        with pytest.raises(ValueError):
            distinct_indices("parity", 5)


class TestPowerSpectrum:
    def test_unit_modulus_vector(self):
        f = FourierSignal(np.array([1, 1j, -1j, 1j, -1j]), real_origin=True)
        assert np.allclose(power_spectrum(f), 1.0, atol=1e-15)

    def test_group_invariance(self):
        f = dft(random_unit_signal(12, 4))
        p = power_spectrum(f)
        for g in group_elements("dihedral", 12):
            assert np.max(np.abs(power_spectrum(apply_group_fourier(g, f)) - p)) < 1e-12

    def test_matches_brute_force_diagonal(self):
        n = 10
        x = random_unit_signal(n, 6)
        t2 = tensor_in_fourier(brute_force_moment(x, 2, "dihedral"), n)
        p = power_spectrum(dft(x))
        for k in range(n):
            assert abs(t2[k, (-k) % n] - p[k]) < 1e-12


class TestThirdMoments:
    def test_flat_spectrum_bispectrum(self):
        f = FourierSignal(np.ones(6, dtype=complex))
        assert all(abs(v - 1.0) < 1e-15 for v in cyclic_bispectrum(f).values())

    def test_bispectrum_rotation_invariance(self):
        n = 9
        f = dft(random_unit_signal(n, 8))
        b = cyclic_bispectrum(f)
        for g in group_elements("cyclic", n):
            b2 = cyclic_bispectrum(apply_group_fourier(g, f))
            assert max(abs(b[k] - b2[k]) for k in b) < 1e-12

    def test_dihedral_invariance_includes_reflections(self):
        n = 9
        x = random_unit_signal(n, 8)
        t = dihedral_third_moment(dft(x))
        for g in group_elements("dihedral", n):
            t2 = dihedral_third_moment(dft(apply_group(g, x)))
            assert max(abs(t[k] - t2[k]) for k in t) < 1e-12

    def test_real_origin_entries_are_real(self):
        for n in (5, 8, 13):
            t = dihedral_third_moment(dft(random_unit_signal(n, n)))
            assert max(abs(v.imag) for v in t.values()) < 1e-10

    def test_vanishing_coefficient_counterexample_pair(self):
        fa = FourierSignal(np.array([1, 1, 0, 0, 1], dtype=complex), real_origin=True)
        fb = FourierSignal(np.array([1, 0.5, 0, 0, 2], dtype=complex), real_origin=False)
        ta, tb = dihedral_third_moment(fa), dihedral_third_moment(fb)
        assert max(abs(ta[k] - tb[k]) for k in ta) < 1e-12
        assert np.max(np.abs(polynomial_power_spectrum(fa)
                             - polynomial_power_spectrum(fb))) < 1e-12
        # distinct orbits: reflections swap the two outer moduli, nothing more
        assert abs(abs(fa.coeffs[1]) - abs(fb.coeffs[1])) > 0.1

    def test_unit_modulus_counterexample_pair(self):
        f1 = FourierSignal(np.array([1, 1j, -1j, 1j, -1j]), real_origin=True)
        f2 = FourierSignal(np.array([1, -1j, -1j, 1j, 1j]), real_origin=True)
        t1, t2 = dihedral_third_moment(f1), dihedral_third_moment(f2)
        assert max(abs(t1[k] - t2[k]) for k in t1) < 1e-12
        b1, b2 = cyclic_bispectrum(f1), cyclic_bispectrum(f2)
        key = canonical_pair("cyclic", 5, 1, 2)
        assert abs(b1[key] - (-1j)) < 1e-12
        assert abs(b2[key] - 1j) < 1e-12
        assert abs(b1[key] - b2[key]) == pytest.approx(2.0, abs=1e-12)


class TestBruteForceOracles:
    def test_degree_one_projects_to_mean(self):
        x = random_unit_signal(9, 2)
        for group in ("cyclic", "dihedral"):
            t1 = brute_force_moment(x, 1, group)
            assert np.allclose(t1, np.mean(x.values), atol=1e-14)

    def test_degree_two_of_basis_vector(self):
        n = 6
        e0 = Signal(np.eye(n)[0])
        t2 = brute_force_moment(e0, 2, "dihedral")
        assert np.allclose(t2, np.eye(n) / n, atol=1e-14)

    def test_fourier_coefficients_match_third_moment(self):
        n = 9
        x = random_unit_signal(n, 7)
        that = tensor_in_fourier(brute_force_moment(x, 3, "dihedral"), n)
        tm = dihedral_third_moment(dft(x))
        for (k1, k2), v in tm.items():
            assert abs(that[k1, k2, (-k1 - k2) % n] - v) < 1e-12
        # nothing off the constraint set
        mask = np.zeros((n, n, n), dtype=bool)
        for a in range(n):
            for b in range(n):
                mask[a, b, (-a - b) % n] = True
        assert np.max(np.abs(that[~mask])) < 1e-12

    def test_cyclic_oracle_matches_bispectrum(self):
        n = 8
        x = random_unit_signal(n, 9)
        that = tensor_in_fourier(brute_force_moment(x, 3, "cyclic"), n)
        for (k1, k2), v in cyclic_bispectrum(dft(x)).items():
            assert abs(that[k1, k2, (-k1 - k2) % n] - v) < 1e-12

    def test_size_limit(self):
        with pytest.raises(ValueError, match="n <= 64"):
            brute_force_moment(random_unit_signal(65, 0), 2, "cyclic")
        with pytest.raises(ValueError, match="degree"):
            brute_force_moment(random_unit_signal(6, 0), 4, "cyclic")


class TestUnitaryMoment:
    def test_agrees_with_polynomial_on_reals(self):
        x = random_unit_signal(8, 3)
        for group in ("cyclic", "dihedral"):
            for d in (1, 2, 3):
                u = unitary_moment(x, d, group)
                t = brute_force_moment(x, d, group)
                assert np.max(np.abs(u - t)) < 1e-14

    def test_degree_two_of_basis_vector(self):
        n = 5
        u = unitary_moment(Signal(np.eye(n)[0]), 2, "dihedral")
        assert np.max(np.abs(u - np.eye(n) / n)) < 1e-14


class TestPhaseAccessors:
    def test_phase_factor_definition(self):
        n = 11
        f = dft(random_unit_signal(n, 12))
        theta = np.angle(f.coeffs)
        for (i, j) in ((1, 1), (1, 2), (2, 3)):
            want = np.exp(1j * (theta[i] + theta[j] - theta[i + j]))
            assert abs(phase_factor(f, i, j) - want) < 1e-12
            assert phase_cosine(f, i, j) == pytest.approx(np.cos(theta[i] + theta[j] - theta[i + j]))

    def test_requires_nonvanishing_moduli(self):
        coeffs = np.zeros(7, dtype=complex)
        coeffs[0] = 1.0
        coeffs[1] = 1.0
        coeffs[6] = 1.0
        f = FourierSignal(coeffs)
        with pytest.raises(ValueError, match="vanishing"):
            phase_factor(f, 1, 1)


class TestMomentsContainer:
    def test_json_round_trip(self, tmp_path):
        m = compute_moments(random_unit_signal(10, 5), "dihedral")
        p = tmp_path / "m.json"
        m.save(p)
        back = InvariantMoments.load(p)
        assert back.group == m.group and back.n == m.n
        assert back.m1 == m.m1
        assert np.array_equal(back.power, m.power)
        assert list(back.third) == list(m.third)
        assert np.array_equal(back.third_vector(), m.third_vector())

    def test_third_keys_in_canonical_order(self):
        m = compute_moments(random_unit_signal(9, 1), "cyclic")
        assert list(m.third.keys()) == distinct_indices("cyclic", 9)

    def test_key_validation(self):
        with pytest.raises(ValueError, match="canonical"):
            InvariantMoments(group="cyclic", n=5, m1=0.0, power=np.zeros(5),
                             third={(0, 0): 0j})

    def test_malformed_file_rejected(self, tmp_path):
        p = tmp_path / "junk.json"
        p.write_text("{not json")
        with pytest.raises(ValueError, match="moments"):
            InvariantMoments.load(p)


class TestInvarianceSuite:
    def test_all_moments_invariant_all_elements(self):
        rng = np.random.default_rng(0)
        for n in range(4, 33):
            x = Signal(rng.standard_normal(n))
            for group in ("cyclic", "dihedral"):
                ref = compute_moments(x, group)
                for g in group_elements(group, n):
                    moved = compute_moments(apply_group(g, x), group)
                    assert abs(moved.m1 - ref.m1) < 1e-10
                    assert np.max(np.abs(moved.power - ref.power)) < 1e-10
                    assert np.max(np.abs(moved.third_vector() - ref.third_vector())) < 1e-10
