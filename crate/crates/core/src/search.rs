//! Randomized certification of the `N̄/2` bound and regime sweeps.
//!
//! Every trial draws from its own ChaCha stream `(seed, trial index)`, so
//! results do not depend on how trials are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    check_nbar, check_rate, min_real_eigenvalue, no_control_squeezing, squeezing_db,
    QuadraticHamiltonian,
};
use crate::feedback::{
    build_feedback, optimal_eta, simple_loop_closed_form, verify_3db_certificate, BoundCertificate,
    FeedbackLoop, FeedbackTopology,
};
use crate::monitoring::homodyne_closed_form;
use crate::symplectic::{beam_splitter, random_passive_with, PassiveTransform};
use crate::{max_norm, Error, Matrix, Result};

/// Tolerance for the diffusion and trace identities checked on every loop.
pub const IDENTITY_TOLERANCE: f64 = 1e-10;

/// Slack on `min Re λ > 2β`.
pub const FRONTIER_SLACK: f64 = 1e-12;

/// Distance from the simple-loop optimum used in regime sweeps.
pub const CF_OPTIMUM_MARGIN: f64 = 1e-4;

/// Relative slack when comparing a homodyne value against `N̄/2`.
pub const WINNER_TIE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyLimits {
    pub max_direct: usize,
    pub max_feedback: usize,
    pub max_ancillas: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub limits: TopologyLimits,
    /// Loops sampled, stable or not.
    pub trials: usize,
    pub seed: u64,
    /// Entries of `H_S` are uniform in `[-scale, scale]`.
    pub hamiltonian_scale: f64,
    /// Noise levels; each trial picks one uniformly.
    pub nbars: Vec<f64>,
    pub gamma: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            limits: TopologyLimits {
                max_direct: 3,
                max_feedback: 3,
                max_ancillas: 3,
            },
            trials: 10_000,
            seed: 0,
            hamiltonian_scale: 5.0,
            nbars: vec![1.0, 2.0],
            gamma: 1.0,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if !(self.hamiltonian_scale > 0.0 && self.hamiltonian_scale.is_finite()) {
            return Err(Error::Config(format!(
                "hamiltonian scale must be positive, got {}",
                self.hamiltonian_scale
            )));
        }
        if self.limits.max_direct == 0 || self.limits.max_feedback == 0 {
            return Err(Error::Config(
                "topology limits need at least one direct and one fed-back port".into(),
            ));
        }
        if self.nbars.is_empty() {
            return Err(Error::Config("at least one noise level is required".into()));
        }
        for &n in &self.nbars {
            check_nbar(n)?;
        }
        check_rate("coupling rate γ", self.gamma)
    }
}

/// The generator for trial `index` of a campaign seeded with `seed`.
pub fn trial_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Everything drawn for one trial.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialSample {
    pub topology: FeedbackTopology,
    pub transform: PassiveTransform,
    pub hamiltonian: QuadraticHamiltonian,
    pub nbar: f64,
}

pub fn sample_trial(cfg: &SearchConfig, index: usize) -> Result<TrialSample> {
    let mut rng = trial_rng(cfg.seed, index);
    let lim = cfg.limits;
    let (l, m, n_anc) = loop {
        let l = rng.random_range(1..=lim.max_direct);
        let m = rng.random_range(1..=lim.max_feedback);
        let n_anc = rng.random_range(0..=lim.max_ancillas);
        if m <= l + n_anc {
            break (l, m, n_anc);
        }
    };
    let topology = FeedbackTopology::new(l, m, n_anc, cfg.gamma)?;
    let nbar = cfg.nbars[rng.random_range(0..cfg.nbars.len())];
    let transform = random_passive_with(l + n_anc, &mut rng)?.with_ports(l)?;
    let s = cfg.hamiltonian_scale;
    let (a, b, c) = (
        rng.random_range(-s..=s),
        rng.random_range(-s..=s),
        rng.random_range(-s..=s),
    );
    let hamiltonian = QuadraticHamiltonian::new(Matrix::from_row_slice(2, 2, &[a, b, b, c]))?;
    Ok(TrialSample {
        topology,
        transform,
        hamiltonian,
        nbar,
    })
}

/// Compact description of a certified loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopDescriptor {
    pub trial: usize,
    pub direct_ports: usize,
    pub feedback_ports: usize,
    pub ancillas: usize,
    pub nbar: f64,
    pub epsilon: f64,
    pub hamiltonian: [[f64; 2]; 2],
    pub min_eig: f64,
    pub margin: f64,
}

/// Deviations of a loop from the structural identities
/// `D = δ·1`, `tr A = 2β`, and `min Re λ > 2β`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub diffusion_deviation: f64,
    pub trace_deviation: f64,
    pub min_real_eigenvalue: f64,
    pub two_beta: f64,
}

impl IdentityCheck {
    pub fn of(lp: &FeedbackLoop) -> Self {
        let delta_id = Matrix::identity(2, 2) * lp.delta();
        Self {
            diffusion_deviation: max_norm(&(lp.diffusion() - delta_id)),
            trace_deviation: (lp.drift().trace() - 2.0 * lp.beta()).abs(),
            min_real_eigenvalue: min_real_eigenvalue(lp.drift()),
            two_beta: 2.0 * lp.beta(),
        }
    }

    pub fn identities_hold(&self) -> bool {
        self.diffusion_deviation < IDENTITY_TOLERANCE && self.trace_deviation < IDENTITY_TOLERANCE
    }

    /// Only meaningful for stable loops.
    pub fn frontier_holds(&self) -> bool {
        self.min_real_eigenvalue > self.two_beta - FRONTIER_SLACK
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TrialOutcome {
    Unstable {
        identities: IdentityCheck,
    },
    Certified {
        descriptor: LoopDescriptor,
        identities: IdentityCheck,
    },
}

pub fn run_trial(cfg: &SearchConfig, index: usize) -> Result<TrialOutcome> {
    let sample = sample_trial(cfg, index)?;
    let lp = build_feedback(
        sample.topology,
        &sample.transform,
        &sample.hamiltonian,
        sample.nbar,
    )?;
    let identities = IdentityCheck::of(&lp);
    if !lp.is_stable() {
        return Ok(TrialOutcome::Unstable { identities });
    }
    let cert = verify_3db_certificate(&lp)?;
    let h = sample.hamiltonian.matrix();
    Ok(TrialOutcome::Certified {
        descriptor: LoopDescriptor {
            trial: index,
            direct_ports: sample.topology.direct_ports,
            feedback_ports: sample.topology.feedback_ports,
            ancillas: sample.topology.ancillas,
            nbar: sample.nbar,
            epsilon: lp.epsilon(),
            hamiltonian: [[h[(0, 0)], h[(0, 1)]], [h[(1, 0)], h[(1, 1)]]],
            min_eig: cert.min_eig,
            margin: cert.margin,
        },
        identities,
    })
}

/// Smallest margin seen for one `(l, m, n_anc)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopologyMinimum {
    pub direct_ports: usize,
    pub feedback_ports: usize,
    pub ancillas: usize,
    pub stable: usize,
    pub min_margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub trials: usize,
    pub seed: u64,
    pub stable: usize,
    pub unstable: usize,
    /// Stable loops with `min eig σ∞ ≤ N̄/2`.
    pub violations: usize,
    pub min_margin: f64,
    pub argmin: LoopDescriptor,
    /// Loops failing `D = δ·1` or `tr A = 2β` at [`IDENTITY_TOLERANCE`].
    pub identity_failures: usize,
    /// Stable loops with `min Re λ ≤ 2β`.
    pub frontier_violations: usize,
    pub max_diffusion_deviation: f64,
    pub max_trace_deviation: f64,
    pub per_topology: Vec<TopologyMinimum>,
}

/// Samples `cfg.trials` loops and certifies every stable one.
pub fn random_bound_search(cfg: &SearchConfig) -> Result<SearchReport> {
    cfg.validate()?;
    let outcomes: Vec<Result<TrialOutcome>> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| run_trial(cfg, i))
        .collect();

    let mut stable = 0;
    let mut unstable = 0;
    let mut violations = 0;
    let mut identity_failures = 0;
    let mut frontier_violations = 0;
    let mut max_diffusion_deviation = 0.0_f64;
    let mut max_trace_deviation = 0.0_f64;
    let mut argmin: Option<LoopDescriptor> = None;
    let mut per_topology: Vec<TopologyMinimum> = Vec::new();

    for outcome in outcomes {
        let identities = match outcome? {
            TrialOutcome::Unstable { identities } => {
                unstable += 1;
                identities
            }
            TrialOutcome::Certified {
                descriptor,
                identities,
            } => {
                stable += 1;
                if !(descriptor.margin > 0.0) {
                    violations += 1;
                }
                if !identities.frontier_holds() {
                    frontier_violations += 1;
                }
                let key = (
                    descriptor.direct_ports,
                    descriptor.feedback_ports,
                    descriptor.ancillas,
                );
                match per_topology
                    .iter_mut()
                    .find(|t| (t.direct_ports, t.feedback_ports, t.ancillas) == key)
                {
                    Some(t) => {
                        t.stable += 1;
                        t.min_margin = t.min_margin.min(descriptor.margin);
                    }
                    None => per_topology.push(TopologyMinimum {
                        direct_ports: key.0,
                        feedback_ports: key.1,
                        ancillas: key.2,
                        stable: 1,
                        min_margin: descriptor.margin,
                    }),
                }
                if argmin.as_ref().is_none_or(|a| descriptor.margin < a.margin) {
                    argmin = Some(descriptor);
                }
                identities
            }
        };
        if !identities.identities_hold() {
            identity_failures += 1;
        }
        max_diffusion_deviation = max_diffusion_deviation.max(identities.diffusion_deviation);
        max_trace_deviation = max_trace_deviation.max(identities.trace_deviation);
    }

    let argmin = argmin.ok_or(Error::Inconclusive { trials: cfg.trials })?;
    per_topology.sort_by_key(|t| (t.direct_ports, t.feedback_ports, t.ancillas));
    Ok(SearchReport {
        trials: cfg.trials,
        seed: cfg.seed,
        stable,
        unstable,
        violations,
        min_margin: argmin.margin,
        argmin,
        identity_failures,
        frontier_violations,
        max_diffusion_deviation,
        max_trace_deviation,
        per_topology,
    })
}

/// Certificates along the simple-loop family `√η = 1 − χ/(2γ) − offset`,
/// which approaches the bound as `offset → 0`.
pub fn directed_bound_probe(
    chi: f64,
    gamma: f64,
    nbar: f64,
    offsets: &[f64],
) -> Result<Vec<(f64, BoundCertificate)>> {
    let topology = FeedbackTopology::simple(gamma)?;
    let h = QuadraticHamiltonian::squeezing(chi);
    offsets
        .iter()
        .map(|&off| {
            let eta = optimal_eta(chi, gamma, off)?;
            let lp = build_feedback(topology, &beam_splitter(eta)?, &h, nbar)?;
            Ok((off, verify_3db_certificate(&lp)?))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontierReport {
    pub sampled: usize,
    pub stable: usize,
    /// Smallest `Re λ₁` over stable loops.
    pub min_real: Option<f64>,
    /// Stable loops with `Re λ₁ ≤ 2β`.
    pub violations: usize,
}

/// Samples Haar interferometers for `topology` with `H_S = -(χ/2)σ_x` and
/// tracks the most negative drift eigenvalue against `2β`.
pub fn stability_frontier(
    chi: f64,
    topology: &FeedbackTopology,
    samples: usize,
    seed: u64,
) -> Result<FrontierReport> {
    let h = QuadraticHamiltonian::squeezing(chi);
    let checks: Vec<Result<Option<IdentityCheck>>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let z = random_passive_with(topology.interferometer_modes(), &mut rng)?;
            let lp = build_feedback(*topology, &z, &h, 1.0)?;
            Ok(lp.is_stable().then(|| IdentityCheck::of(&lp)))
        })
        .collect();
    let mut report = FrontierReport {
        sampled: samples,
        stable: 0,
        min_real: None,
        violations: 0,
    };
    for check in checks {
        if let Some(c) = check? {
            report.stable += 1;
            if !c.frontier_holds() {
                report.violations += 1;
            }
            report.min_real = Some(
                report
                    .min_real
                    .map_or(c.min_real_eigenvalue, |m| m.min(c.min_real_eigenvalue)),
            );
        }
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Winner {
    None,
    CoherentFeedback,
    Homodyne,
}

impl Winner {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::CoherentFeedback => "coherent_feedback",
            Self::Homodyne => "homodyne",
        }
    }
}

/// One point of the regime comparison. Absent values mark unstable regimes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub chi: f64,
    pub gamma: f64,
    pub nbar: f64,
    pub zeta: f64,
    /// Loop transmissivity used for the coherent-feedback value.
    pub eta: Option<f64>,
    pub sigma11_none: Option<f64>,
    pub sigma11_cf: Option<f64>,
    /// The same loop built through the general feedback framework.
    pub sigma11_general_cf: Option<f64>,
    pub sigma11_hd: Option<f64>,
    pub db_none: Option<f64>,
    pub db_cf: Option<f64>,
    pub db_hd: Option<f64>,
    pub winner: Winner,
    /// Every regime produced a stable value.
    pub stable: bool,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl SweepRecord {
    pub const CSV_HEADER: [&'static str; 10] = [
        "chi",
        "gamma",
        "nbar",
        "zeta",
        "eta",
        "sigma11_none",
        "sigma11_cf",
        "sigma11_hd",
        "winner",
        "stable",
    ];

    pub fn csv_fields(&self) -> Vec<String> {
        vec![
            self.chi.to_string(),
            self.gamma.to_string(),
            self.nbar.to_string(),
            self.zeta.to_string(),
            fmt_opt(self.eta),
            fmt_opt(self.sigma11_none),
            fmt_opt(self.sigma11_cf),
            fmt_opt(self.sigma11_hd),
            self.winner.as_str().to_string(),
            self.stable.to_string(),
        ]
    }
}

/// Best loop transmissivity for the sweep: near the optimum for `χ > 0`,
/// no feedback otherwise.
pub fn sweep_eta(chi: f64, gamma: f64) -> Option<f64> {
    if chi > 0.0 {
        optimal_eta(chi, gamma, CF_OPTIMUM_MARGIN).ok()
    } else {
        Some(0.0)
    }
}

/// Homodyne wins when it reaches the infimum `N̄/2` of every passive loop;
/// otherwise the coherent loop wins if it improves on no control.
pub fn pick_winner(nbar: f64, none: Option<f64>, cf: Option<f64>, hd: Option<f64>) -> Winner {
    let cf_floor = nbar / 2.0;
    if hd.is_some_and(|h| h <= cf_floor * (1.0 + WINNER_TIE_TOLERANCE)) {
        return Winner::Homodyne;
    }
    match (cf, none) {
        (Some(c), Some(n)) if c < n && hd.is_none_or(|h| c < h) => Winner::CoherentFeedback,
        (Some(c), None) if hd.is_none_or(|h| c < h) => Winner::CoherentFeedback,
        _ => match (hd, none) {
            (Some(h), Some(n)) if h < n => Winner::Homodyne,
            _ => Winner::None,
        },
    }
}

pub fn sweep_point(chi: f64, gamma: f64, zeta: f64, nbar: f64) -> Result<SweepRecord> {
    check_rate("coupling rate γ", gamma)?;
    check_nbar(nbar)?;
    if !(zeta > 0.0 && zeta <= 1.0) {
        return Err(Error::OutOfRange(format!(
            "detection efficiency must lie in (0, 1], got {zeta}"
        )));
    }
    let none = no_control_squeezing(chi, gamma, nbar).ok();
    let eta = sweep_eta(chi, gamma);
    let cf = eta.and_then(|e| simple_loop_closed_form(chi, gamma, e, nbar).ok());
    let general_cf = match eta {
        Some(e) => {
            let lp = build_feedback(
                FeedbackTopology::simple(gamma)?,
                &beam_splitter(e)?,
                &QuadraticHamiltonian::squeezing(chi),
                nbar,
            )?;
            lp.steady_state().ok().map(|s| s.sigma11())
        }
        None => None,
    };
    let hd = homodyne_closed_form(chi, gamma, zeta, nbar)
        .ok()
        .map(|h| h.sigma11);
    let db = |v: Option<f64>| v.and_then(|x| squeezing_db(x).ok());
    Ok(SweepRecord {
        chi,
        gamma,
        nbar,
        zeta,
        eta,
        sigma11_none: none,
        sigma11_cf: cf,
        sigma11_general_cf: general_cf,
        sigma11_hd: hd,
        db_none: db(none),
        db_cf: db(cf),
        db_hd: db(hd),
        winner: pick_winner(nbar, none, cf, hd),
        stable: none.is_some() && cf.is_some() && hd.is_some(),
    })
}

/// Regime comparison over a `χ × ζ × N̄` grid, χ outermost.
pub fn regime_comparison_sweep(
    chi_grid: &[f64],
    gamma: f64,
    zeta_grid: &[f64],
    nbar_grid: &[f64],
) -> Result<Vec<SweepRecord>> {
    let points: Vec<(f64, f64, f64)> = chi_grid
        .iter()
        .flat_map(|&chi| {
            zeta_grid
                .iter()
                .flat_map(move |&zeta| nbar_grid.iter().map(move |&nbar| (chi, zeta, nbar)))
        })
        .collect();
    points
        .par_iter()
        .map(|&(chi, zeta, nbar)| sweep_point(chi, gamma, zeta, nbar))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn small_config(trials: usize) -> SearchConfig {
        SearchConfig {
            trials,
            seed: 42,
            ..SearchConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(small_config(0).validate().is_err());
        let mut cfg = small_config(1);
        cfg.hamiltonian_scale = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = small_config(1);
        cfg.nbars = vec![0.5];
        assert!(cfg.validate().is_err());
        assert!(small_config(1).validate().is_ok());
    }

    #[test]
    fn trials_are_reproducible() {
        let cfg = small_config(1);
        assert_eq!(
            sample_trial(&cfg, 0).unwrap(),
            sample_trial(&cfg, 0).unwrap()
        );
        assert_ne!(
            sample_trial(&cfg, 0).unwrap().transform,
            sample_trial(&cfg, 1).unwrap().transform
        );
    }

    #[test]
    fn small_campaign_has_no_violations() {
        let report = random_bound_search(&small_config(400)).unwrap();
        assert_eq!(report.stable + report.unstable, 400);
        assert!(report.stable > 0);
        assert_eq!(report.violations, 0);
        assert_eq!(report.identity_failures, 0);
        assert_eq!(report.frontier_violations, 0);
        assert!(report.min_margin > 0.0);
        let again = random_bound_search(&small_config(400)).unwrap();
        assert_eq!(report, again);
    }

    #[test]
    fn single_trial_campaign_is_deterministic_or_inconclusive() {
        let cfg = small_config(1);
        match (random_bound_search(&cfg), random_bound_search(&cfg)) {
            (Ok(a), Ok(b)) => assert_eq!(a, b),
            (Err(Error::Inconclusive { trials: 1 }), Err(Error::Inconclusive { trials: 1 })) => {}
            other => panic!("runs disagree: {other:?}"),
        }
    }

    #[test]
    fn directed_probe_approaches_bound() {
        let probe = directed_bound_probe(0.5, 1.0, 1.0, &[1e-2, 1e-3, 1e-4]).unwrap();
        let margins: Vec<f64> = probe.iter().map(|(_, c)| c.margin).collect();
        assert!(margins.iter().all(|&m| m > 0.0));
        assert!(margins.windows(2).all(|w| w[1] < w[0]));
        assert!(margins[2] < 1e-2);
    }

    #[test]
    fn frontier_of_sampled_loops() {
        let top = FeedbackTopology::new(2, 2, 1, 1.0).unwrap();
        let report = stability_frontier(0.5, &top, 300, 9).unwrap();
        assert_eq!(report.violations, 0);
        assert!(report.stable > 0);
    }

    #[test]
    fn frontier_without_feedback_is_exact() {
        // E = 0 on l = m = 1: the drift is -(l+m)γ/2·1 plus the Hamiltonian part.
        let chi = 0.6;
        let lp = build_feedback(
            FeedbackTopology::simple(1.0).unwrap(),
            &beam_splitter(0.0).unwrap(),
            &QuadraticHamiltonian::squeezing(chi),
            1.0,
        )
        .unwrap();
        let mut eig: Vec<f64> = lp.drift_eigenvalues().iter().map(|l| l.re).collect();
        eig.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(eig[0], -1.0 - chi / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eig[1], -1.0 + chi / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn near_lossless_loop_is_near_marginal() {
        let lp = build_feedback(
            FeedbackTopology::simple(1.0).unwrap(),
            &beam_splitter((1.0 - 1e-6_f64).powi(2)).unwrap(),
            &QuadraticHamiltonian::squeezing(0.0),
            1.0,
        )
        .unwrap();
        let c = IdentityCheck::of(&lp);
        assert!(c.min_real_eigenvalue < 0.0 && c.min_real_eigenvalue > -1e-5);
    }

    #[test]
    fn sweep_examples() {
        let weak = sweep_point(0.3, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(weak.winner, Winner::CoherentFeedback);
        let strong = sweep_point(0.9, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(strong.winner, Winner::Homodyne);
        assert_abs_diff_eq!(strong.sigma11_hd.unwrap(), 0.1, epsilon = 1e-12);
        for chi in [0.1, 0.5, 0.9] {
            let hot = sweep_point(chi, 1.0, 0.5, 2.0).unwrap();
            assert!(hot.sigma11_cf.unwrap() >= 1.0);
        }
        let flat = sweep_point(0.0, 1.0, 1.0, 1.5).unwrap();
        assert_eq!(flat.sigma11_none, Some(1.5));
        assert_eq!(flat.sigma11_cf, Some(1.5));
        assert_eq!(flat.sigma11_hd, Some(1.5));
        assert_eq!(flat.winner, Winner::None);
    }

    #[test]
    fn sweep_marks_unstable_points() {
        let rec = sweep_point(1.5, 1.0, 1.0, 1.0).unwrap();
        assert!(!rec.stable);
        assert_eq!(rec.sigma11_none, None);
        assert_eq!(rec.sigma11_hd, None);
        assert!(rec.sigma11_cf.is_some());
        assert_eq!(rec.csv_fields().len(), SweepRecord::CSV_HEADER.len());
    }

    #[test]
    fn sweep_general_framework_agrees() {
        let recs = regime_comparison_sweep(&[0.2, 0.6], 1.0, &[0.5], &[1.0, 2.0]).unwrap();
        assert_eq!(recs.len(), 4);
        for r in &recs {
            assert_abs_diff_eq!(
                r.sigma11_cf.unwrap(),
                r.sigma11_general_cf.unwrap(),
                epsilon = 1e-10
            );
        }
        assert_eq!((recs[0].chi, recs[0].nbar), (0.2, 1.0));
        assert_eq!((recs[3].chi, recs[3].nbar), (0.6, 2.0));
    }
}
