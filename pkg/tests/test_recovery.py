"""Loss/gradient correctness and quasi-Newton recovery behavior."""

import numpy as np
import pytest

from dihedral_mra.invariants import compute_moments
from dihedral_mra.recovery import (
    RecoveryConfig,
    align_and_error,
    loss_and_gradient,
    recover,
    recover_multi,
)
from dihedral_mra.signals import GroupElement, Signal, apply_group, random_unit_signal


def finite_difference_gradient(fn, x, h=1e-6):
    g = np.zeros_like(x)
    for i in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (fn(xp) - fn(xm)) / (2 * h)
    return g


class TestLossAndGradient:
    @pytest.mark.parametrize("group", ["cyclic", "dihedral"])
    def test_zero_at_orbit_points(self, group):
        n = 17
        truth = random_unit_signal(n, 5)
        target = compute_moments(truth, group)
        cfg = RecoveryConfig(group=group)
        for g in (GroupElement(0, False), GroupElement(4, False), GroupElement(7, group == "dihedral")):
            loss, grad = loss_and_gradient(apply_group(g, truth), target, cfg)
            assert loss < 1e-20
            assert np.linalg.norm(grad) < 1e-9

    @pytest.mark.parametrize("group", ["cyclic", "dihedral"])
    @pytest.mark.parametrize("third_only", [False, True])
    def test_gradient_matches_finite_differences(self, group, third_only):
        rng = np.random.default_rng(3)
        for n in (5, 21, 50):
            truth = random_unit_signal(n, 17)
            target = compute_moments(truth, group)
            cfg = RecoveryConfig(group=group, third_only=third_only)
            for _ in range(3):
                x = Signal(rng.standard_normal(n))
                _, analytic = loss_and_gradient(x, target, cfg)
                numeric = finite_difference_gradient(
                    lambda v: loss_and_gradient(Signal(v), target, cfg)[0], x.values.copy())
                rel = np.linalg.norm(analytic - numeric) / np.linalg.norm(numeric)
                assert rel < 1e-6, (group, third_only, n, rel)

    def test_loss_invariant_under_group(self):
        n = 12
        truth = random_unit_signal(n, 1)
        target = compute_moments(truth, "dihedral")
        cfg = RecoveryConfig(group="dihedral")
        x = random_unit_signal(n, 99)
        base, _ = loss_and_gradient(x, target, cfg)
        for g in (GroupElement(3, False), GroupElement(5, True)):
            moved, _ = loss_and_gradient(apply_group(g, x), target, cfg)
            assert abs(moved - base) < 1e-12 * max(1.0, base)

    def test_dimension_mismatch(self):
        target = compute_moments(random_unit_signal(8, 0), "cyclic")
        with pytest.raises(ValueError, match="length"):
            loss_and_gradient(random_unit_signal(9, 0), target, RecoveryConfig(group="cyclic"))

    def test_config_validation(self):
        with pytest.raises(ValueError, match="third-moment weight"):
            RecoveryConfig(group="cyclic", weights=(1.0, 1.0, 0.0))
        with pytest.raises(ValueError, match="nonnegative"):
            RecoveryConfig(group="cyclic", weights=(-1.0, 1.0, 1.0))
        with pytest.raises(ValueError, match="grad_tol"):
            RecoveryConfig(group="cyclic", grad_tol=0.0)
        with pytest.raises(ValueError, match="loss_tol"):
            RecoveryConfig(group="cyclic", loss_tol=-1.0)


class TestRecover:
    def test_trace_never_increases(self):
        target = compute_moments(random_unit_signal(21, 5), "dihedral")
        res = recover(target, RecoveryConfig(group="dihedral", init_seed=2))
        diffs = np.diff(res.loss_trace)
        assert np.all(diffs <= 0)

    def test_deterministic(self):
        target = compute_moments(random_unit_signal(15, 5), "cyclic")
        cfg = RecoveryConfig(group="cyclic", init_seed=8)
        a = recover(target, cfg)
        b = recover(target, cfg)
        assert a.loss_trace == b.loss_trace
        assert np.array_equal(a.estimate.values, b.estimate.values)

    def test_exact_recovery_cyclic(self):
        truth = random_unit_signal(21, 5)
        target = compute_moments(truth, "cyclic")
        res = recover(target, RecoveryConfig(group="cyclic", init_seed=1), truth=truth)
        assert res.aligned_error < 1e-6
        assert not res.failed

    def test_best_of_inits_dihedral(self):
        truth = random_unit_signal(21, 5)
        target = compute_moments(truth, "dihedral")
        cfg = RecoveryConfig(group="dihedral")
        res = recover_multi(target, cfg, inits=8, seed=3, truth=truth)
        assert res.aligned_error < 1e-6

    def test_loss_tol_stops_early(self):
        truth = random_unit_signal(30, 5)
        target = compute_moments(truth, "cyclic")
        loose = recover(target, RecoveryConfig(group="cyclic", init_seed=4, loss_tol=1e-4))
        tight = recover(target, RecoveryConfig(group="cyclic", init_seed=4))
        assert loose.final_loss <= 1e-4
        assert loose.iterations < tight.iterations

    def test_nonfinite_target_reports_failed_trial(self):
        truth = random_unit_signal(8, 0)
        target = compute_moments(truth, "cyclic")
        target.power = target.power.copy()
        target.power[1] = np.inf
        res = recover(target, RecoveryConfig(group="cyclic", init_seed=0))
        assert res.failed
        assert res.aligned_error is None

    def test_mean_report(self):
        truth = random_unit_signal(15, 5)
        target = compute_moments(truth, "cyclic")
        cfg = RecoveryConfig(group="cyclic")
        res = recover_multi(target, cfg, inits=4, seed=9, report="mean", truth=truth)
        assert res.aligned_error < 1e-5

    def test_multi_validation(self):
        target = compute_moments(random_unit_signal(8, 0), "cyclic")
        cfg = RecoveryConfig(group="cyclic")
        with pytest.raises(ValueError, match="initialization"):
            recover_multi(target, cfg, inits=0, seed=0)
        with pytest.raises(ValueError, match="report"):
            recover_multi(target, cfg, inits=1, seed=0, report="median")

    def test_result_json_dict(self):
        truth = random_unit_signal(8, 3)
        target = compute_moments(truth, "cyclic")
        res = recover(target, RecoveryConfig(group="cyclic", init_seed=1), truth=truth)
        d = res.to_json_dict()
        assert len(d["estimate"]) == 8
        assert d["iterations"] == res.iterations
        assert d["group_element"] is not None


class TestAlignAndError:
    def test_recovers_inverse_element(self):
        truth = random_unit_signal(11, 7)
        g = GroupElement(4, True)
        est = apply_group(g, truth)
        got, err = align_and_error(truth, est, "dihedral")
        assert err <= 1e-12
        assert got.compose(g, 11) == GroupElement(0, False)

    def test_small_perturbation_stays_at_identity(self):
        truth = random_unit_signal(12, 3)
        delta = 1e-6 * random_unit_signal(12, 5).values
        est = Signal(truth.values + delta)
        g, err = align_and_error(truth, est, "dihedral")
        assert g == GroupElement(0, False)
        assert err == pytest.approx(np.linalg.norm(delta) / truth.norm(), abs=1e-9)

    def test_dihedral_never_worse_than_cyclic(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            a = Signal(rng.standard_normal(9))
            b = Signal(rng.standard_normal(9))
            _, ec = align_and_error(a, b, "cyclic")
            _, ed = align_and_error(a, b, "dihedral")
            assert ed <= ec + 1e-15

    def test_zero_truth_rejected(self):
        with pytest.raises(ValueError, match="zero truth"):
            align_and_error(Signal(np.zeros(4)), random_unit_signal(4, 0), "cyclic")

    def test_tie_breaks_to_canonical_order(self):
        const = Signal(np.ones(6))
        g, err = align_and_error(const, const, "dihedral")
        assert g == GroupElement(0, False)
        assert err <= 1e-15

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            align_and_error(random_unit_signal(4, 0), random_unit_signal(5, 0), "cyclic")
