//! Run configuration: flags override the config file, which overrides defaults.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;
use squeeze_core::search::{SearchConfig, TopologyLimits};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Inclusive linear grid written `start:stop:steps`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Grid {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let bad = || {
            CliError::Usage(format!(
                "grid must look like start:stop:steps, got {text:?}"
            ))
        };
        let parts: Vec<&str> = text.trim().split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(bad());
        };
        let start: f64 = a.trim().parse().map_err(|_| bad())?;
        let stop: f64 = b.trim().parse().map_err(|_| bad())?;
        let steps: usize = n.trim().parse().map_err(|_| bad())?;
        if !start.is_finite() || !stop.is_finite() {
            return Err(bad());
        }
        if steps == 0 {
            return Err(CliError::Usage(format!("grid {text:?} is empty")));
        }
        Ok(Self { start, stop, steps })
    }

    pub fn single(value: f64) -> Self {
        Self {
            start: value,
            stop: value,
            steps: 1,
        }
    }

    /// Points `start + (stop - start)·i/(steps - 1)`, snapped to 12 significant
    /// digits so that `0.05:0.95:19` yields exactly 0.5 rather than 0.49999999999999994.
    pub fn points(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let last = self.steps - 1;
        (0..self.steps)
            .map(|i| {
                let x = self.start + (self.stop - self.start) * i as f64 / last as f64;
                format!("{x:.11e}").parse().expect("formatted float parses")
            })
            .collect()
    }
}

/// Flags shared by every subcommand.
#[derive(Args, Clone, Debug, Default)]
pub struct Flags {
    /// Squeezing strength χ.
    #[arg(long, allow_hyphen_values = true)]
    pub chi: Option<f64>,
    /// Port coupling rate γ.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Input noise level N̄ (1 is vacuum).
    #[arg(long)]
    pub nbar: Option<f64>,
    /// Homodyne detection efficiency ζ.
    #[arg(long)]
    pub zeta: Option<f64>,
    /// Feedback beam-splitter transmissivity; omitted means near-optimal.
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// χ grid as start:stop:steps.
    #[arg(long, value_name = "A:B:N")]
    pub grid_chi: Option<String>,
    /// ζ grid as start:stop:steps.
    #[arg(long, value_name = "A:B:N")]
    pub grid_zeta: Option<String>,
    /// N̄ grid as start:stop:steps.
    #[arg(long, value_name = "A:B:N")]
    pub grid_nbar: Option<String>,
    /// Bound for the entries of sampled system Hamiltonians.
    #[arg(long)]
    pub scale: Option<f64>,
    #[arg(long)]
    pub max_direct: Option<usize>,
    #[arg(long)]
    pub max_feedback: Option<usize>,
    #[arg(long)]
    pub max_ancillas: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; standard output when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Flat key-value file (TOML syntax) supplying any of the options above.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

/// The same keys as [`Flags`], read from a file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    chi: Option<f64>,
    gamma: Option<f64>,
    nbar: Option<f64>,
    zeta: Option<f64>,
    eta: Option<f64>,
    trials: Option<usize>,
    seed: Option<u64>,
    #[serde(alias = "grid-chi")]
    grid_chi: Option<String>,
    #[serde(alias = "grid-zeta")]
    grid_zeta: Option<String>,
    #[serde(alias = "grid-nbar")]
    grid_nbar: Option<String>,
    scale: Option<f64>,
    #[serde(alias = "max-direct")]
    max_direct: Option<usize>,
    #[serde(alias = "max-feedback")]
    max_feedback: Option<usize>,
    #[serde(alias = "max-ancillas")]
    max_ancillas: Option<usize>,
    format: Option<Format>,
    out: Option<PathBuf>,
}

fn read_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub chi: f64,
    pub gamma: f64,
    pub nbar: f64,
    pub zeta: f64,
    pub eta: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    pub grid_chi: Option<Grid>,
    pub grid_zeta: Option<Grid>,
    pub grid_nbar: Option<Grid>,
    pub scale: f64,
    pub limits: TopologyLimits,
    pub format: Format,
    pub out: Option<PathBuf>,
    /// N̄ was given explicitly rather than defaulted.
    pub nbar_explicit: bool,
}

impl RunConfig {
    pub fn resolve(flags: &Flags) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => read_file_config(path)?,
            None => FileConfig::default(),
        };
        let defaults = SearchConfig::default();
        let grid =
            |flag: &Option<String>, file: &Option<String>| -> Result<Option<Grid>, CliError> {
                flag.as_ref()
                    .or(file.as_ref())
                    .map(|g| Grid::parse(g))
                    .transpose()
            };
        let nbar = flags.nbar.or(file.nbar);
        let cfg = Self {
            chi: flags.chi.or(file.chi).unwrap_or(0.5),
            gamma: flags.gamma.or(file.gamma).unwrap_or(defaults.gamma),
            nbar: nbar.unwrap_or(1.0),
            zeta: flags.zeta.or(file.zeta).unwrap_or(1.0),
            eta: flags.eta.or(file.eta),
            trials: flags.trials.or(file.trials).unwrap_or(defaults.trials),
            seed: flags.seed.or(file.seed).unwrap_or(defaults.seed),
            grid_chi: grid(&flags.grid_chi, &file.grid_chi)?,
            grid_zeta: grid(&flags.grid_zeta, &file.grid_zeta)?,
            grid_nbar: grid(&flags.grid_nbar, &file.grid_nbar)?,
            scale: flags
                .scale
                .or(file.scale)
                .unwrap_or(defaults.hamiltonian_scale),
            limits: TopologyLimits {
                max_direct: flags
                    .max_direct
                    .or(file.max_direct)
                    .unwrap_or(defaults.limits.max_direct),
                max_feedback: flags
                    .max_feedback
                    .or(file.max_feedback)
                    .unwrap_or(defaults.limits.max_feedback),
                max_ancillas: flags
                    .max_ancillas
                    .or(file.max_ancillas)
                    .unwrap_or(defaults.limits.max_ancillas),
            },
            format: flags.format.or(file.format).unwrap_or(Format::Csv),
            out: flags.out.clone().or(file.out),
            nbar_explicit: nbar.is_some(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let usage = |msg: String| Err(CliError::Usage(msg));
        if !self.chi.is_finite() {
            return usage(format!("χ must be finite, got {}", self.chi));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return usage(format!("γ must be positive, got {}", self.gamma));
        }
        if !(self.nbar >= 1.0 && self.nbar.is_finite()) {
            return usage(format!("N̄ must be at least 1, got {}", self.nbar));
        }
        if !(self.zeta > 0.0 && self.zeta <= 1.0) {
            return usage(format!("ζ must lie in (0, 1], got {}", self.zeta));
        }
        if let Some(eta) = self.eta {
            if !(0.0..1.0).contains(&eta) {
                return usage(format!("η must lie in [0, 1), got {eta}"));
            }
        }
        if self.trials == 0 {
            return usage("trials must be at least 1".into());
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return usage(format!("scale must be positive, got {}", self.scale));
        }
        Ok(())
    }

    pub fn chi_points(&self, default: &str) -> Vec<f64> {
        self.grid_chi
            .clone()
            .unwrap_or_else(|| Grid::parse(default).expect("built-in grid"))
            .points()
    }

    pub fn zeta_points(&self) -> Vec<f64> {
        self.grid_zeta
            .clone()
            .unwrap_or(Grid::single(self.zeta))
            .points()
    }

    pub fn nbar_points(&self) -> Vec<f64> {
        self.grid_nbar
            .clone()
            .unwrap_or(Grid::single(self.nbar))
            .points()
    }

    pub fn search_config(&self) -> SearchConfig {
        SearchConfig {
            limits: self.limits,
            trials: self.trials,
            seed: self.seed,
            hamiltonian_scale: self.scale,
            nbars: if self.nbar_explicit {
                vec![self.nbar]
            } else {
                SearchConfig::default().nbars
            },
            gamma: self.gamma,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn grid_points() {
        let g = Grid::parse("0.05:0.95:19").unwrap();
        let p = g.points();
        assert_eq!(p.len(), 19);
        assert_eq!(p[0], 0.05);
        assert_eq!(p[18], 0.95);
        assert_eq!(p[9], 0.5);
        assert_eq!(p[7], 0.4);
        assert_eq!(Grid::parse("2:3:1").unwrap().points(), vec![2.0]);
        assert!(Grid::parse("0:1:0").is_err());
        assert!(Grid::parse("0:1").is_err());
        assert!(Grid::parse("a:1:3").is_err());
    }

    #[test]
    fn flags_override_file() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(
            file,
            "chi = 0.7\ngamma = 2.0\nseed = 11\ngrid_chi = \"0.1:0.2:2\""
        )
        .unwrap();
        let flags = Flags {
            chi: Some(0.3),
            config: Some(file.path().to_path_buf()),
            ..Flags::default()
        };
        let cfg = RunConfig::resolve(&flags).unwrap();
        assert_eq!(cfg.chi, 0.3);
        assert_eq!(cfg.gamma, 2.0);
        assert_eq!(cfg.seed, 11);
        assert_eq!(cfg.grid_chi, Some(Grid::parse("0.1:0.2:2").unwrap()));
        assert_eq!(cfg.zeta, 1.0);
        assert!(!cfg.nbar_explicit);
        assert_eq!(cfg.search_config().nbars, vec![1.0, 2.0]);
    }

    #[test]
    fn unknown_file_keys_are_rejected() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "chii = 0.7").unwrap();
        let flags = Flags {
            config: Some(file.path().to_path_buf()),
            ..Flags::default()
        };
        assert!(matches!(
            RunConfig::resolve(&flags),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn invalid_values_are_usage_errors() {
        for flags in [
            Flags {
                trials: Some(0),
                ..Flags::default()
            },
            Flags {
                nbar: Some(0.5),
                ..Flags::default()
            },
            Flags {
                zeta: Some(0.0),
                ..Flags::default()
            },
            Flags {
                gamma: Some(-1.0),
                ..Flags::default()
            },
            Flags {
                eta: Some(1.0),
                ..Flags::default()
            },
        ] {
            assert!(matches!(
                RunConfig::resolve(&flags),
                Err(CliError::Usage(_))
            ));
        }
    }
}
