use serde::Serialize;
use squeeze_core::dynamics::{
    evolve_covariance, no_control_squeezing, squeezing_db, CovarianceMatrix, OpenSystem,
    QuadraticHamiltonian,
};
use squeeze_core::feedback::{
    build_feedback, simple_loop_closed_form, verify_3db_certificate, FeedbackTopology,
};
use squeeze_core::monitoring::{
    efficiency_threshold, homodyne_closed_form, homodyne_riccati, monitoring_rows, MonitoringRow,
};
use squeeze_core::search::{
    pick_winner, random_bound_search, regime_comparison_sweep, sweep_eta, IdentityCheck,
    SweepRecord, Winner, IDENTITY_TOLERANCE,
};
use squeeze_core::symplectic::beam_splitter;

use crate::config::{Format, RunConfig};
use crate::output::{csv_document, json_document};
use crate::CliError;

/// Rendered output plus whether the command's checks all passed.
pub struct Outcome {
    pub body: String,
    pub passed: bool,
}

impl Outcome {
    fn ok(body: String) -> Self {
        Self { body, passed: true }
    }
}

fn render<T: Serialize>(
    cfg: &RunConfig,
    command: &str,
    header: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
    json: &T,
) -> Result<String, CliError> {
    match cfg.format {
        Format::Csv => csv_document(header, rows),
        Format::Json => json_document(command, header, json),
    }
}

pub fn compare(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let chi = cfg.chi_points("0.1:0.9:9");
    let zeta = match &cfg.grid_zeta {
        Some(g) => g.points(),
        None => crate::config::Grid::parse("0.1:1:10")?.points(),
    };
    let nbar = cfg.nbar_points();
    eprintln!(
        "compare: {} χ × {} ζ × {} N̄ points",
        chi.len(),
        zeta.len(),
        nbar.len()
    );
    let rows = monitoring_rows(&chi, cfg.gamma, &zeta, &nbar)?;
    let body = render(
        cfg,
        "compare",
        &MonitoringRow::CSV_HEADER,
        rows.iter().map(MonitoringRow::csv_fields),
        &rows,
    )?;
    Ok(Outcome::ok(body))
}

pub fn sweep(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let chi = cfg.chi_points("0.05:0.95:19");
    let zeta = cfg.zeta_points();
    let nbar = cfg.nbar_points();
    eprintln!(
        "sweep: {} χ × {} ζ × {} N̄ points",
        chi.len(),
        zeta.len(),
        nbar.len()
    );
    let records = regime_comparison_sweep(&chi, cfg.gamma, &zeta, &nbar)?;
    let body = render(
        cfg,
        "sweep",
        &SweepRecord::CSV_HEADER,
        records.iter().map(SweepRecord::csv_fields),
        &records,
    )?;
    Ok(Outcome::ok(body))
}

const BOUND_HEADER: [&str; 10] = [
    "trials",
    "seed",
    "stable",
    "unstable",
    "violations",
    "min_margin",
    "identity_failures",
    "frontier_violations",
    "max_diffusion_deviation",
    "max_trace_deviation",
];

pub fn bound_search(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let search = cfg.search_config();
    eprintln!(
        "bound-search: {} trials, seed {}",
        search.trials, search.seed
    );
    let report = random_bound_search(&search)?;
    eprintln!(
        "bound-search: {} stable, {} unstable, {} violations, min margin {}",
        report.stable, report.unstable, report.violations, report.min_margin
    );
    let row = vec![
        report.trials.to_string(),
        report.seed.to_string(),
        report.stable.to_string(),
        report.unstable.to_string(),
        report.violations.to_string(),
        report.min_margin.to_string(),
        report.identity_failures.to_string(),
        report.frontier_violations.to_string(),
        report.max_diffusion_deviation.to_string(),
        report.max_trace_deviation.to_string(),
    ];
    let body = render(
        cfg,
        "bound-search",
        &BOUND_HEADER,
        std::iter::once(row),
        &report,
    )?;
    Ok(Outcome {
        body,
        passed: report.violations == 0
            && report.identity_failures == 0
            && report.frontier_violations == 0,
    })
}

#[derive(Serialize)]
struct RegimeValue {
    regime: &'static str,
    sigma11: Option<f64>,
    db: Option<f64>,
    stable: bool,
}

impl RegimeValue {
    fn new(regime: &'static str, sigma11: Option<f64>) -> Self {
        Self {
            regime,
            sigma11,
            db: sigma11.and_then(|s| squeezing_db(s).ok()),
            stable: sigma11.is_some(),
        }
    }

    fn fields(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        vec![
            self.regime.to_string(),
            opt(self.sigma11),
            opt(self.db),
            self.stable.to_string(),
        ]
    }
}

#[derive(Serialize)]
struct PointReport {
    chi: f64,
    gamma: f64,
    nbar: f64,
    zeta: f64,
    eta: Option<f64>,
    threshold: Option<f64>,
    regimes: Vec<RegimeValue>,
    winner: Winner,
}

pub fn point(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (chi, gamma, nbar, zeta) = (cfg.chi, cfg.gamma, cfg.nbar, cfg.zeta);
    // The bare system must be stable for a point comparison to make sense.
    let none = no_control_squeezing(chi, gamma, nbar)?;
    let eta = cfg.eta.or_else(|| sweep_eta(chi, gamma));
    let cf = eta.and_then(|e| simple_loop_closed_form(chi, gamma, e, nbar).ok());
    let general = match eta {
        Some(e) => build_feedback(
            FeedbackTopology::simple(gamma)?,
            &beam_splitter(e)?,
            &QuadraticHamiltonian::squeezing(chi),
            nbar,
        )?
        .steady_state()
        .ok()
        .map(|s| s.sigma11()),
        None => None,
    };
    let hd = homodyne_closed_form(chi, gamma, zeta, nbar)?.sigma11;
    let threshold = if chi > 0.0 {
        efficiency_threshold(chi, gamma, nbar)?
    } else {
        None
    };
    let report = PointReport {
        chi,
        gamma,
        nbar,
        zeta,
        eta,
        threshold,
        regimes: vec![
            RegimeValue::new("none", Some(none)),
            RegimeValue::new("simple_cf", cf),
            RegimeValue::new("general_cf", general),
            RegimeValue::new("homodyne", Some(hd)),
        ],
        winner: pick_winner(nbar, Some(none), cf, Some(hd)),
    };
    let body = render(
        cfg,
        "point",
        &["regime", "sigma11", "db", "stable"],
        report.regimes.iter().map(RegimeValue::fields),
        &report,
    )?;
    Ok(Outcome::ok(body))
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    value: f64,
    reference: f64,
    deviation: f64,
    tolerance: f64,
    pass: bool,
}

impl Check {
    fn new(name: &'static str, value: f64, reference: f64, tolerance: f64) -> Self {
        let deviation = (value - reference).abs();
        Self {
            name,
            value,
            reference,
            deviation,
            tolerance,
            pass: deviation <= tolerance,
        }
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.name.to_string(),
            self.value.to_string(),
            self.reference.to_string(),
            self.deviation.to_string(),
            self.tolerance.to_string(),
            self.pass.to_string(),
        ]
    }
}

/// Cross-checks every solver against its independent counterpart at one point.
pub fn verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (chi, gamma, nbar, zeta) = (cfg.chi, cfg.gamma, cfg.nbar, cfg.zeta);
    let sys = OpenSystem::no_control(chi, gamma, nbar)?;
    let lyap = sys.steady_state()?;
    let closed = no_control_squeezing(chi, gamma, nbar)?;
    let gap = gamma - chi.abs();
    let evolved = evolve_covariance(
        &CovarianceMatrix::thermal(1, nbar),
        &sys.drift(),
        &sys.diffusion(),
        40.0 / gap,
        0.01 / gamma,
    )?;

    let eta = cfg.eta.or_else(|| sweep_eta(chi, gamma)).unwrap_or(0.0);
    let lp = build_feedback(
        FeedbackTopology::simple(gamma)?,
        &beam_splitter(eta)?,
        &QuadraticHamiltonian::squeezing(chi),
        nbar,
    )?;
    let cf_closed = simple_loop_closed_form(chi, gamma, eta, nbar)?;
    let cf_general = lp.steady_state()?.sigma11();
    let cert = verify_3db_certificate(&lp)?;
    let ids = IdentityCheck::of(&lp);

    let hd_closed = homodyne_closed_form(chi, gamma, zeta, nbar)?;
    let hd_numeric = homodyne_riccati(chi, gamma, zeta, nbar)?.sigma;

    let checks = vec![
        Check::new("no_control_lyapunov", lyap.sigma11(), closed, 1e-10),
        Check::new(
            "no_control_evolution",
            evolved.sigma11(),
            lyap.sigma11(),
            1e-8,
        ),
        Check::new("simple_cf_general", cf_general, cf_closed, 1e-10),
        Check::new(
            "diffusion_identity",
            ids.diffusion_deviation,
            0.0,
            IDENTITY_TOLERANCE,
        ),
        Check::new(
            "trace_identity",
            ids.trace_deviation,
            0.0,
            IDENTITY_TOLERANCE,
        ),
        Check {
            pass: cert.holds(),
            ..Check::new("bound_margin", cert.margin, 0.0, f64::INFINITY)
        },
        Check::new(
            "homodyne_sigma11",
            hd_numeric.sigma11(),
            hd_closed.sigma11,
            1e-6,
        ),
        Check::new(
            "homodyne_sigma22",
            hd_numeric.sigma22(),
            hd_closed.sigma22,
            1e-6,
        ),
        Check::new("homodyne_sigma12", hd_numeric.sigma12(), 0.0, 1e-9),
    ];
    let passed = checks.iter().all(|c| c.pass);
    for c in checks.iter().filter(|c| !c.pass) {
        eprintln!("verify: {} failed (deviation {})", c.name, c.deviation);
    }
    let body = render(
        cfg,
        "verify",
        &[
            "check",
            "value",
            "reference",
            "deviation",
            "tolerance",
            "pass",
        ],
        checks.iter().map(Check::fields),
        &checks,
    )?;
    Ok(Outcome { body, passed })
}
