import math

import numpy as np
import pytest

from rapidstab import (
    LtiSystem,
    NotObservableError,
    WeightProfile,
    conjugate_generator,
    decay_bound,
    demo_system,
    eigen_discriminant_2x2,
    growth_bound,
    infinite_horizon_gramian,
    riccati_residual,
    spectral_abscissa,
    synthesize,
    truncated_gramian,
    weighted_gramian,
)
from _suite import suite_systems

OSC = demo_system("oscillator")
SCALAR = demo_system("scalar")
SCALAR_GRAM = (2.0 - math.exp(-1.0)) / 2.0


def truncated_oscillator_loop(omega, k):
    """Closed-form loop matrix for the exponentially weighted Gramian
    truncated at k*pi: [[0, 1], [-1 - 4w^2/D, -4w/D]], D = 1 - e^{-2w k pi}."""
    D = 1.0 - math.exp(-2.0 * omega * k * math.pi)
    return np.array([[0.0, 1.0],
                     [-1.0 - 4.0 * omega**2 / D, -4.0 * omega / D]])


def test_synthesize_scalar_standard():
    law = synthesize(SCALAR, omega=0.5, T0=1.0)
    np.testing.assert_allclose(law.gain, [[-1.0 / SCALAR_GRAM]], atol=1e-4)
    np.testing.assert_allclose(law.closed_loop, [[-1.0 / SCALAR_GRAM]], atol=1e-4)
    assert law.variant == "standard"
    assert law.knot == 1.0


def test_synthesize_truncated_oscillator_closed_form():
    law = synthesize(OSC, omega=0.5, T0=math.pi, variant="truncated")
    np.testing.assert_allclose(law.closed_loop, truncated_oscillator_loop(0.5, 1),
                               atol=1e-9)


def test_synthesize_infinite_horizon_oscillator():
    # gram^{-1} = [[3, 1], [1, 2]] from the hand-solved Gramian, so the
    # feedback zeroes nothing in row 1 and the loop is [[0,1],[-2,-2]]
    law = synthesize(OSC, omega=0.5, T0=math.pi, variant="infinite-horizon")
    np.testing.assert_allclose(law.closed_loop, [[0.0, 1.0], [-2.0, -2.0]],
                               atol=1e-10)
    assert law.knot == math.inf


def test_law_reconstructs_closed_loop():
    for variant in ("standard", "truncated", "infinite-horizon"):
        law = synthesize(OSC, omega=0.5, T0=math.pi, variant=variant)
        rebuilt = OSC.A + OSC.B @ law.gain
        assert np.linalg.norm(law.closed_loop - rebuilt) <= 1e-12


def test_synthesize_validation():
    with pytest.raises(ValueError):
        synthesize(OSC, omega=0.5, T0=2.0, T=1.0)
    with pytest.raises(ValueError):
        synthesize(OSC, omega=0.5, T0=1.0, variant="cubic")
    bad = LtiSystem(A=np.array([[0.0, 1.0], [-1.0, 0.0]]), B=np.zeros((2, 1)))
    with pytest.raises(NotObservableError):
        synthesize(bad, omega=0.5, T0=1.0)


def test_conjugate_generator_scalar():
    g = weighted_gramian(SCALAR, WeightProfile(omega=0.5, knot=1.0))
    conjugated, err = conjugate_generator(SCALAR, g)
    np.testing.assert_allclose(conjugated, [[-1.0 / SCALAR_GRAM]], atol=1e-4)
    assert err <= 1e-10


def test_conjugate_generator_oscillator():
    g = weighted_gramian(OSC, WeightProfile(omega=0.5, knot=math.pi))
    _, err = conjugate_generator(OSC, g)
    assert err <= 1e-8


def test_conjugate_generator_variant_mismatch():
    with pytest.raises(ValueError):
        conjugate_generator(OSC, truncated_gramian(OSC, 0.5, math.pi))


def test_spectral_abscissa_examples():
    loop = truncated_oscillator_loop(0.5, 1)
    # real part of the conjugate pair is tr/2 = -2w/D = -1.045166...
    np.testing.assert_allclose(spectral_abscissa(loop),
                               -1.0 / (1.0 - math.exp(-math.pi)), atol=1e-12)
    assert abs(spectral_abscissa(OSC.A)) <= 1e-12
    np.testing.assert_allclose(
        spectral_abscissa(np.array([[0.0, 1.0], [-2.0, -2.0]])), -1.0, atol=1e-10)
    with pytest.raises(ValueError):
        spectral_abscissa(np.ones((2, 3)))


def test_discriminant_examples():
    assert eigen_discriminant_2x2(truncated_oscillator_loop(0.5, 1)) < 0.0
    assert eigen_discriminant_2x2(np.diag([1.0, 2.0])) == pytest.approx(1.0)
    assert eigen_discriminant_2x2(np.array([[0.0, 1.0], [-2.0, -2.0]])) \
        == pytest.approx(-4.0)
    with pytest.raises(ValueError):
        eigen_discriminant_2x2(np.eye(3))


def test_decay_bound_oscillator_at_knot():
    bound = decay_bound(OSC, omega=0.5, T0=math.pi, T=math.pi)
    assert bound.c == 1.0
    assert abs(bound.gamma) <= 1e-12
    np.testing.assert_allclose(bound.c2_T0, math.pi / 2, rtol=1e-10)
    c1 = (1.0 + math.sin(1.0)) / 2.0  # closed-form top eigenvalue at horizon 1
    np.testing.assert_allclose(bound.c1_half_omega, c1, rtol=1e-8)
    alpha = c1 / (math.pi / 2)  # 0.586159 at omega = 1/2
    np.testing.assert_allclose(bound.alpha, alpha, rtol=1e-8)
    np.testing.assert_allclose(bound.phi_T, 1.0, rtol=1e-12)
    np.testing.assert_allclose(bound.exponent, -1.0 + alpha, atol=1e-5)
    assert bound.c_prime >= 1.0


def test_decay_bound_oscillator_longer_plateau():
    bound = decay_bound(OSC, omega=0.5, T0=math.pi, T=math.pi + 3.0)
    alpha = (1.0 + math.sin(1.0)) / 2.0 / (math.pi / 2)
    # phi contracts to e^{-3}: exponent -0.970818...
    np.testing.assert_allclose(bound.exponent, -1.0 + alpha * math.exp(-3.0),
                               atol=1e-5)


def test_decay_bound_limit_is_twice_omega():
    bound = decay_bound(OSC, omega=0.5, T0=math.pi, T=math.pi + 40.0)
    np.testing.assert_allclose(bound.exponent, -1.0, atol=1e-9)


def test_decay_bound_validation():
    with pytest.raises(ValueError):
        decay_bound(OSC, omega=0.5, T0=2.0, T=1.0)


@pytest.mark.parametrize("omega", [0.3, 1.0])
def test_standard_loop_beats_prescribed_rate(omega):
    for sys, T0 in suite_systems():
        law = synthesize(sys, omega=omega, T0=T0)
        assert spectral_abscissa(law.closed_loop) <= -omega + 1e-9, sys.label


def test_bound_dominates_abscissa_along_sweep():
    for dk in range(5):
        T = math.pi + dk
        law = synthesize(OSC, omega=0.5, T0=math.pi, T=T)
        bound = decay_bound(OSC, omega=0.5, T0=math.pi, T=T)
        assert spectral_abscissa(law.closed_loop) <= bound.exponent + 1e-9


def test_bound_dominates_for_nonconservative_system():
    # gamma > 0 here, so the bound is slack but must still dominate
    rng = np.random.default_rng(41)
    sys = LtiSystem(A=0.5 * rng.standard_normal((3, 3)),
                    B=rng.standard_normal((3, 2)), label="generic")
    assert growth_bound(sys).gamma > 0.0
    for T in (2.0, 3.0):
        law = synthesize(sys, omega=0.4, T0=2.0, T=T)
        bound = decay_bound(sys, omega=0.4, T0=2.0, T=T)
        assert spectral_abscissa(law.closed_loop) <= bound.exponent + 1e-9


def test_similarity_follows_riccati_certificate():
    for sys, T0 in suite_systems():
        g = weighted_gramian(sys, WeightProfile(omega=0.5, knot=T0))
        assert riccati_residual(sys, g) <= 1e-9
        _, err = conjugate_generator(sys, g)
        assert err <= 1e-8, sys.label


def test_infinite_horizon_conservative_rate():
    omega = 0.5
    law = synthesize(OSC, omega=omega, T0=math.pi, variant="infinite-horizon")
    np.testing.assert_allclose(spectral_abscissa(law.closed_loop), -2 * omega,
                               atol=1e-10)  # exact for the oscillator
    skew = demo_system("skew(6,3)")
    law = synthesize(skew, omega=omega, T0=math.pi, variant="infinite-horizon")
    assert spectral_abscissa(law.closed_loop) <= -2 * omega + 1e-8


@pytest.mark.parametrize("sysname", ["oscillator", "skew(4,7)"])
def test_loop_invariant_under_control_scaling(sysname):
    # scaling B by s scales the Gramian by s^2 and leaves A + BF unchanged
    sys = demo_system(sysname)
    scaled = LtiSystem(A=sys.A, B=3.7 * sys.B, label="scaled")
    law = synthesize(sys, omega=0.5, T0=math.pi)
    law_scaled = synthesize(scaled, omega=0.5, T0=math.pi)
    assert np.linalg.norm(law.closed_loop - law_scaled.closed_loop) <= 1e-10


def test_infinite_gramian_inverse_matches_hand_solution():
    g = infinite_horizon_gramian(OSC, 0.5)
    np.testing.assert_allclose(np.linalg.inv(g.gram), [[3.0, 1.0], [1.0, 2.0]],
                               atol=1e-10)
