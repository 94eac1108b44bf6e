//! Run configuration read from a single JSON document.
//!
//! Matrices are nested row arrays. Complex ladder couplings are `{re, im}`
//! objects. All quantities are dimensionless with `[q, p] = i`.

use std::path::Path;

use gaussbomb_core::phase_space::{validate_state_with, GaussianState};
use gaussbomb_core::thermal::{ladder_coupling, rwa_coupling, Dynamics};
use gaussbomb_core::{JointSetup, Matrix, OscillatorBathSetup, Tolerances, Vector};
use num_complex::Complex64;
use serde::Deserialize;

use crate::exit::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Discrete,
    Interpolated,
    Both,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub setup: SetupConfig,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default = "one")]
    pub steps: usize,
    pub dt: f64,
    /// Grid points per step for interpolated output.
    #[serde(default = "one")]
    pub substeps: usize,
    #[serde(default)]
    pub initial_state: Option<StateConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub order: Option<usize>,
    /// Step rule for `thermalize`.
    #[serde(default)]
    pub dynamics: Option<Dynamics>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub search: Option<SearchConfig>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetupConfig {
    Joint {
        #[serde(rename = "F_S")]
        f_s: Vec<Vec<f64>>,
        #[serde(rename = "alpha_S", default)]
        alpha_s: Option<Vec<f64>>,
        #[serde(rename = "F_A")]
        f_a: Vec<Vec<f64>>,
        #[serde(rename = "alpha_A", default)]
        alpha_a: Option<Vec<f64>>,
        #[serde(rename = "G")]
        g: Vec<Vec<f64>>,
        /// Defaults to the ancilla vacuum.
        #[serde(default)]
        ancilla: Option<StateConfig>,
    },
    OscillatorBath {
        #[serde(rename = "E_S")]
        e_s: f64,
        #[serde(rename = "E_A")]
        e_a: f64,
        #[serde(rename = "nu_A")]
        nu_a: f64,
        coupling: CouplingConfig,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CouplingConfig {
    Matrix(Vec<Vec<f64>>),
    Rwa {
        g1: f64,
        #[serde(default)]
        gw: f64,
    },
    Ladder {
        g: ComplexConfig,
        #[serde(default)]
        h: ComplexConfig,
    },
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexConfig {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

/// Random joint setups drawn from the run seed.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub count: usize,
    #[serde(default = "one")]
    pub system_modes: usize,
    #[serde(default = "one")]
    pub ancilla_modes: usize,
    #[serde(default = "default_nu_min")]
    pub nu_min: f64,
    #[serde(default = "default_nu_max")]
    pub nu_max: f64,
}

fn default_nu_min() -> f64 {
    1.1
}

fn default_nu_max() -> f64 {
    3.0
}

/// Grid over position-coupled single-mode setups with vacuum ancillae.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    pub energies: Vec<f64>,
    pub couplings: Vec<f64>,
    pub steps: Vec<f64>,
}

/// The configured interaction, resolved into core types.
#[derive(Debug, Clone)]
pub enum Setup {
    Joint(JointSetup),
    Bath(OscillatorBathSetup),
}

impl Setup {
    pub fn joint(&self) -> CliResult<JointSetup> {
        match self {
            Setup::Joint(j) => Ok(j.clone()),
            Setup::Bath(b) => b.to_joint().map_err(CliError::config),
        }
    }

    pub fn system_modes(&self) -> usize {
        match self {
            Setup::Joint(j) => j.system_dim() / 2,
            Setup::Bath(_) => 1,
        }
    }
}

pub fn load(path: &Path) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> CliResult<RunConfig> {
    let cfg: RunConfig =
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))?;
    if cfg.steps == 0 {
        return Err(CliError::Usage("config: steps must be at least 1".into()));
    }
    if cfg.substeps == 0 {
        return Err(CliError::Usage("config: substeps must be at least 1".into()));
    }
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
        return Err(CliError::Usage(format!("config: dt must be positive, got {}", cfg.dt)));
    }
    Ok(cfg)
}

fn matrix(rows: &[Vec<f64>], what: &str) -> CliResult<Matrix> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(CliError::Usage(format!("config: {what} has rows of unequal length")));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(Matrix::from_row_slice(rows.len(), ncols, &flat))
}

fn state(s: &StateConfig, what: &str, tol: &Tolerances) -> CliResult<GaussianState> {
    let st = GaussianState::new(Vector::from_vec(s.mean.clone()), matrix(&s.cov, what)?)
        .map_err(CliError::config)?;
    let check = validate_state_with(&st, tol).map_err(CliError::config)?;
    if !check.valid {
        return Err(CliError::Usage(format!(
            "config: {what} violates the uncertainty principle (margin {:e})",
            check.min_eig
        )));
    }
    Ok(st)
}

impl RunConfig {
    pub fn setup(&self) -> CliResult<Setup> {
        match &self.setup {
            SetupConfig::Joint { f_s, alpha_s, f_a, alpha_a, g, ancilla } => {
                let f_s = matrix(f_s, "F_S")?;
                let f_a = matrix(f_a, "F_A")?;
                let zeros = |n: usize| Vector::zeros(n);
                let ancilla = match ancilla {
                    Some(a) => state(a, "ancilla", &self.tolerances)?,
                    None => GaussianState::vacuum(f_a.nrows().max(2) / 2),
                };
                let j = JointSetup {
                    alpha_s: alpha_s.clone().map_or_else(|| zeros(f_s.nrows()), Vector::from_vec),
                    alpha_a: alpha_a.clone().map_or_else(|| zeros(f_a.nrows()), Vector::from_vec),
                    f_s,
                    f_a,
                    g: matrix(g, "G")?,
                    ancilla,
                    dt: self.dt,
                };
                j.validate().map_err(CliError::config)?;
                Ok(Setup::Joint(j))
            }
            SetupConfig::OscillatorBath { e_s, e_a, nu_a, coupling } => {
                let g = match coupling {
                    CouplingConfig::Matrix(m) => matrix(m, "coupling")?,
                    CouplingConfig::Rwa { g1, gw } => rwa_coupling(*g1, *gw),
                    CouplingConfig::Ladder { g, h } => {
                        ladder_coupling(Complex64::new(g.re, g.im), Complex64::new(h.re, h.im))
                    }
                };
                let s = OscillatorBathSetup { e_s: *e_s, e_a: *e_a, nu_a: *nu_a, g, dt: self.dt };
                s.validate().map_err(CliError::config)?;
                Ok(Setup::Bath(s))
            }
        }
    }

    /// The configured initial system state, or the vacuum of the right size.
    pub fn initial_state(&self, setup: &Setup) -> CliResult<GaussianState> {
        let n = setup.system_modes();
        match &self.initial_state {
            None => Ok(GaussianState::vacuum(n)),
            Some(s) => {
                let st = state(s, "initial_state", &self.tolerances)?;
                if st.dim() != 2 * n {
                    return Err(CliError::Usage(format!(
                        "config: initial_state has dimension {}, the system has {}",
                        st.dim(),
                        2 * n
                    )));
                }
                Ok(st)
            }
        }
    }
}
