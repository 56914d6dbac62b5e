use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use squeeze_core::dynamics::{CouplingMatrix, OpenSystem, QuadraticHamiltonian};
use squeeze_core::feedback::{build_feedback, verify_3db_certificate, FeedbackTopology};
use squeeze_core::symplectic::{
    grouped_to_interleaved, interleaved_to_grouped, is_passive, random_passive,
    random_passive_with, PassiveTransform,
};
use squeeze_core::{max_norm, Matrix};

fn hamiltonian(a: f64, b: f64, c: f64) -> QuadraticHamiltonian {
    QuadraticHamiltonian::new(DMatrix::from_row_slice(2, 2, &[a, b, b, c])).unwrap()
}

fn omega1() -> Matrix {
    DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ordering_round_trip(modes in 1usize..5, seed in any::<u64>()) {
        let dim = 2 * modes;
        let m = DMatrix::from_fn(dim, dim, |i, j| ((seed as f64) * 1e-3 + (i * dim + j) as f64).sin());
        let back = grouped_to_interleaved(&interleaved_to_grouped(&m).unwrap()).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn passive_maps_compose(modes in 1usize..5, s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = random_passive(modes, s1).unwrap();
        let b = random_passive(modes, s2).unwrap();
        prop_assert!(is_passive(&(a.matrix() * b.matrix()), 1e-12).unwrap());
        prop_assert!(is_passive(&a.matrix().transpose(), 1e-12).unwrap());
    }

    /// Any two completions of the same fed-back rows give the same loop.
    #[test]
    fn completion_invariance(
        l in 1usize..4, m in 1usize..4, n_anc in 0usize..4,
        seed in any::<u64>(),
        h in (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64),
    ) {
        prop_assume!(m < l + n_anc);
        let modes = l + n_anc;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = random_passive_with(modes, &mut rng).unwrap();
        let p = random_passive_with(modes - m, &mut rng).unwrap();
        let mut mix = Matrix::identity(2 * modes, 2 * modes);
        mix.view_mut((2 * m, 2 * m), (2 * (modes - m), 2 * (modes - m))).copy_from(p.matrix());
        let z2 = PassiveTransform::new(&mix * z.matrix(), l).unwrap();

        let topo = FeedbackTopology::new(l, m, n_anc, 1.0).unwrap();
        let hs = hamiltonian(h.0, h.1, h.2);
        let a = build_feedback(topo, &z, &hs, 1.5).unwrap();
        let b = build_feedback(topo, &z2, &hs, 1.5).unwrap();
        prop_assert!(max_norm(&(a.coupling() - b.coupling())) < 1e-12);
        prop_assert!(max_norm(&(a.hamiltonian() - b.hamiltonian())) < 1e-12);
        prop_assert_eq!(a.is_stable(), b.is_stable());
        if let (Ok(sa), Ok(sb)) = (a.steady_state(), b.steady_state()) {
            prop_assert!(max_norm(&(sa.matrix() - sb.matrix())) < 1e-12);
        }
    }

    /// With `E = 0` nothing is fed back onto the system: the loop is the bare
    /// system coupled to `l + m` independent ports.
    #[test]
    fn zero_e_block_reduces_to_independent_ports(
        l in 1usize..4, m in 1usize..3, extra in 0usize..2,
        seed in any::<u64>(),
        h in (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64),
        nbar in 1.0..3.0f64,
    ) {
        let n_anc = m + extra;
        let modes = l + n_anc;
        let p = random_passive(n_anc, seed).unwrap();
        let mut inner = Matrix::identity(2 * modes, 2 * modes);
        inner.view_mut((2 * l, 2 * l), (2 * n_anc, 2 * n_anc)).copy_from(p.matrix());
        // Output j < m takes ancilla j, outputs m..m+l take the ports.
        let mut perm = Matrix::zeros(2 * modes, 2 * modes);
        let source = |out: usize| if out < m { l + out } else if out < m + l { out - m } else { out };
        for out in 0..modes {
            let src = source(out);
            perm[(2 * out, 2 * src)] = 1.0;
            perm[(2 * out + 1, 2 * src + 1)] = 1.0;
        }
        let z = PassiveTransform::new(&perm * &inner, l).unwrap();
        prop_assert!(max_norm(&z.blocks(m).unwrap().e) < 1e-15);

        let gamma = 0.8;
        let hs = hamiltonian(h.0, h.1, h.2);
        let lp = build_feedback(FeedbackTopology::new(l, m, n_anc, gamma).unwrap(), &z, &hs, nbar).unwrap();

        let ports = l + m;
        let mut c = Matrix::zeros(2, 2 * ports);
        for k in 0..ports {
            c.view_mut((0, 2 * k), (2, 2)).copy_from(&(omega1().transpose() * gamma.sqrt()));
        }
        let bare = OpenSystem::new(hs, CouplingMatrix::new(c).unwrap(), nbar).unwrap();
        prop_assert!(max_norm(&(lp.drift() - bare.drift())) < 1e-12);
        prop_assert!(max_norm(&(lp.diffusion() - bare.diffusion())) < 1e-12);
        prop_assert!((lp.epsilon()).abs() < 1e-15);
    }

    /// The central claim on arbitrary loops: stable implies `min eig σ∞ > N̄/2`.
    #[test]
    fn stable_loops_respect_the_bound(
        l in 1usize..4, m in 1usize..4, n_anc in 0usize..4,
        seed in any::<u64>(),
        h in (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64),
        nbar in 1.0..3.0f64,
    ) {
        prop_assume!(m <= l + n_anc);
        let z = random_passive(l + n_anc, seed).unwrap();
        let topo = FeedbackTopology::new(l, m, n_anc, 1.0).unwrap();
        let lp = build_feedback(topo, &z, &hamiltonian(h.0, h.1, h.2), nbar).unwrap();
        if lp.is_stable() {
            let cert = verify_3db_certificate(&lp).unwrap();
            prop_assert!(cert.holds(), "margin {}", cert.margin);
            prop_assert!(lp.steady_state().unwrap().is_physical());
        }
    }
}

/// Single-mode passive maps are rotations; Haar measure makes the angle uniform.
#[test]
fn haar_single_mode_angle_is_uniform() {
    let n = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut u: Vec<f64> = (0..n)
        .map(|_| {
            let z = random_passive_with(1, &mut rng).unwrap();
            let z = z.matrix();
            let theta = z[(0, 1)].atan2(z[(0, 0)]);
            (theta + std::f64::consts::PI) / (2.0 * std::f64::consts::PI)
        })
        .collect();
    u.sort_by(f64::total_cmp);
    let ks = u
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let lo = x - i as f64 / n as f64;
            let hi = (i + 1) as f64 / n as f64 - x;
            lo.max(hi)
        })
        .fold(0.0_f64, f64::max);
    // 1% critical value of the one-sample Kolmogorov-Smirnov statistic.
    let critical = 1.628 / (n as f64).sqrt();
    assert!(ks < critical, "KS statistic {ks} exceeds {critical}");
}

/// Haar two-mode maps: `|U₁₁|²` is uniform on `[0, 1]` for `U(2)`.
#[test]
fn haar_two_mode_transmissivity_is_uniform() {
    let n = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(78);
    let mut t: Vec<f64> = (0..n)
        .map(|_| {
            let z = random_passive_with(2, &mut rng).unwrap();
            let z = z.matrix();
            z[(0, 0)].powi(2) + z[(0, 1)].powi(2)
        })
        .collect();
    t.sort_by(f64::total_cmp);
    let ks = t
        .iter()
        .enumerate()
        .map(|(i, &x)| (x - i as f64 / n as f64).max((i + 1) as f64 / n as f64 - x))
        .fold(0.0_f64, f64::max);
    assert!(ks < 1.628 / (n as f64).sqrt(), "KS statistic {ks}");
}
