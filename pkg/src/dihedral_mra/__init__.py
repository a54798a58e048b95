"""Orbit recovery for cyclic and dihedral multi-reference alignment.

The package computes low-degree invariant moments of real signals under
circular shifts (and reflections), estimates them with noise debiasing from
simulated observations, recovers signals from third-order moments by
quasi-Newton least squares or direct phase marching, verifies the exact
combinatorial facts behind the conjugate-sign analysis, and reproduces the
error-versus-length experiments.
"""

__version__ = "0.1.0"

from .invariants import (
    InvariantMoments,
    brute_force_moment,
    compute_moments,
    cyclic_bispectrum,
    dihedral_third_moment,
    distinct_indices,
    phase_cosine,
    phase_factor,
    power_spectrum,
    unitary_moment,
)
from .marching import (
    VanishingCoefficientError,
    dihedral_sign_search,
    frequency_marching_cyclic,
    sign_assignment_count,
)
from .recovery import (
    RecoveryConfig,
    RecoveryResult,
    align_and_error,
    loss_and_gradient,
    recover,
    recover_multi,
)
from .signals import (
    FourierSignal,
    GroupElement,
    Signal,
    apply_group,
    apply_group_fourier,
    dft,
    group_elements,
    group_order,
    idft,
    random_unit_signal,
)
from .simulate import (
    ObservationSet,
    estimate_moments,
    estimator_noise_scaling,
    sample_observations,
)
from .theory import (
    condition_star_probe,
    find_nonzero_annihilator,
    is_excessive,
    run_theory_suite,
    verify_counterexamples,
    xij_rank,
)

__all__ = [name for name in dir() if not name.startswith("_")]
