use proptest::prelude::*;

use squeeze_core::dynamics::{no_control_squeezing, OpenSystem};
use squeeze_core::feedback::simple_loop_closed_form;
use squeeze_core::monitoring::{
    default_initial_state, efficiency_threshold, homodyne_closed_form, homodyne_riccati,
    riccati_matrices, riccati_steady_state, GeneralDyneMeasurement,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn no_control_states_are_physical(r in -0.99..0.99f64, gamma in 0.1..10.0f64, nbar in 1.0..5.0f64) {
        let s = OpenSystem::no_control(r * gamma, gamma, nbar).unwrap().steady_state().unwrap();
        prop_assert!(s.is_physical());
        // Vacuum-input bound without control.
        prop_assert!(s.sigma11() > nbar / 2.0);
    }

    #[test]
    fn monitoring_never_hurts(r in 0.0..0.95f64, zeta in 0.01..1.0f64, nbar in 1.0..5.0f64) {
        let hd = homodyne_closed_form(r, 1.0, zeta, nbar).unwrap();
        let none = no_control_squeezing(r, 1.0, nbar).unwrap();
        prop_assert!(hd.sigma11 <= none + 1e-12);
    }

    #[test]
    fn monitored_squeezing_improves_with_efficiency(
        r in 0.0..0.99f64, z1 in 0.01..1.0f64, z2 in 0.01..1.0f64, nbar in 1.0..5.0f64,
    ) {
        let (lo, hi) = if z1 <= z2 { (z1, z2) } else { (z2, z1) };
        let a = homodyne_closed_form(r, 1.0, lo, nbar).unwrap().sigma11;
        let b = homodyne_closed_form(r, 1.0, hi, nbar).unwrap().sigma11;
        prop_assert!(b <= a + 1e-12, "σ(ζ={hi}) = {b} > σ(ζ={lo}) = {a}");
    }

    #[test]
    fn riccati_state_is_diagonal_and_physical(r in 0.05..0.95f64, zeta in 0.05..1.0f64, nbar in 1.0..4.0f64) {
        let s = homodyne_riccati(r, 1.0, zeta, nbar).unwrap().sigma;
        prop_assert!(s.sigma12().abs() < 1e-9);
        prop_assert!(s.is_physical());
    }

    /// Below the threshold the monitored state is above `N̄/2`, above it below.
    #[test]
    fn threshold_splits_efficiencies(r in 0.5001..0.9999f64, zeta in 0.001..1.0f64, nbar in 1.0..3.0f64) {
        let t = efficiency_threshold(r, 1.0, nbar).unwrap().unwrap();
        prop_assume!((zeta - t).abs() > 1e-9);
        let s = homodyne_closed_form(r, 1.0, zeta, nbar).unwrap().sigma11;
        prop_assert_eq!(s < nbar / 2.0, zeta >= t);
    }

    #[test]
    fn simple_loop_never_beats_half_noise(r in 0.01..1.99f64, root in 0.0..1.0f64, nbar in 1.0..3.0f64) {
        if let Ok(s) = simple_loop_closed_form(r, 1.0, root * root, nbar) {
            prop_assert!(s > nbar / 2.0);
        }
    }
}

/// The finite-`z` measurement converges to the analytic homodyne limit.
#[test]
fn regularized_homodyne_converges() {
    for (chi, zeta, nbar) in [(0.3, 0.4, 1.0), (0.8, 0.9, 2.0), (0.6, 0.2, 5.0)] {
        let exact = homodyne_closed_form(chi, 1.0, zeta, nbar).unwrap();
        let sys = OpenSystem::no_control(chi, 1.0, nbar).unwrap();
        let mut prev = f64::INFINITY;
        for z in [1e-6, 1e-8, 1e-10] {
            let meas = GeneralDyneMeasurement::homodyne_regularized(zeta, z, 1).unwrap();
            let rs = riccati_matrices(&sys, &meas).unwrap();
            let s = riccati_steady_state(&rs, &default_initial_state(&sys))
                .unwrap()
                .sigma;
            let dev = ((s.sigma11() - exact.sigma11) / exact.sigma11)
                .abs()
                .max(((s.sigma22() - exact.sigma22) / exact.sigma22).abs());
            // The regularizer perturbs the state at first order in z.
            assert!(dev < 1e2 * z, "z = {z}: relative deviation {dev}");
            assert!(dev <= prev, "z = {z}: deviation grew to {dev}");
            prev = dev;
        }
    }
}

/// The anti-squeezed quadrature blows up at the instability, whatever ζ is.
#[test]
fn antisqueezing_diverges_at_threshold() {
    for zeta in [0.1, 0.5, 1.0] {
        for k in 1..=6 {
            let gap = 10f64.powi(-k);
            let s = homodyne_closed_form(1.0 - gap, 1.0, zeta, 1.0).unwrap();
            assert!(
                (s.sigma22 * gap - 1.0).abs() < 1e-8,
                "ζ = {zeta}, gap = {gap}"
            );
        }
        let numeric = homodyne_riccati(0.99, 1.0, zeta, 1.0).unwrap().sigma;
        assert!((numeric.sigma22() - 100.0).abs() < 1e-6);
    }
    assert!(homodyne_closed_form(1.0, 1.0, 0.5, 1.0).is_err());
}
