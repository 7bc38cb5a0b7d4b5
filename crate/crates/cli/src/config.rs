//! Job configuration: one JSON document per invocation, unknown fields
//! rejected, unit-suffixed physical quantities converted at parse time.

use serde::{Deserialize, Serialize};

use qctl_core::bangbang;
use qctl_core::spin::{ChainSpec, Coupling, Frame, HyperfineParams};

use crate::CliError;

/// A complex matrix as an array of rows of `[re, im]` pairs.
pub type MatrixRows = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actuator: Option<ActuatorSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthesis: Option<SynthesisSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse: Option<PulseSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ft: Option<FtSection>,
}

impl JobConfig {
    /// Parses a config document, mapping syntax and schema violations to
    /// the invalid-input exit path.
    pub fn from_str(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Invalid(format!("config: {e}")))
    }

    pub fn chain(&self) -> Result<&ChainSection, CliError> {
        self.chain
            .as_ref()
            .ok_or_else(|| CliError::Invalid("config needs a `chain` section".into()))
    }

    pub fn synthesis(&self) -> Result<&SynthesisSection, CliError> {
        self.synthesis
            .as_ref()
            .ok_or_else(|| CliError::Invalid("config needs a `synthesis` section".into()))
    }

    pub fn pulse(&self) -> Result<&PulseSection, CliError> {
        self.pulse
            .as_ref()
            .ok_or_else(|| CliError::Invalid("config needs a `pulse` section".into()))
    }

    pub fn simulate(&self) -> Result<&SimulateSection, CliError> {
        self.simulate
            .as_ref()
            .ok_or_else(|| CliError::Invalid("config needs a `simulate` section".into()))
    }

    pub fn ft(&self) -> Result<&FtSection, CliError> {
        self.ft
            .as_ref()
            .ok_or_else(|| CliError::Invalid("config needs an `ft` section".into()))
    }

    /// Actuator switch position, defaulting to the first coupling.
    pub fn actuator_r(&self) -> usize {
        self.actuator.as_ref().map_or(1, |a| a.r)
    }
}

/// How the chain couplings are specified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingKind {
    /// Site energies `E` and couplings `d` given directly.
    Explicit,
    /// Isotropic exchange constants `J`, reduced to the excitation block.
    Heisenberg,
    /// XY exchange constants `J`.
    Xy,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    #[serde(rename = "N")]
    pub n: usize,
    pub coupling: CouplingKind,
    #[serde(rename = "E", default, skip_serializing_if = "Option::is_none")]
    pub e: Option<Vec<f64>>,
    #[serde(rename = "d", default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<f64>>,
    #[serde(rename = "J", default, skip_serializing_if = "Option::is_none")]
    pub j: Option<Vec<f64>>,
}

impl ChainSection {
    /// Resolves the section into a chain model, with field-name
    /// diagnostics for anything missing or contradictory.
    pub fn to_chain_spec(&self) -> Result<ChainSpec, CliError> {
        let spec = match self.coupling {
            CouplingKind::Explicit => {
                if self.j.is_some() {
                    return Err(CliError::Invalid(
                        "chain: field `J` is not used with explicit coupling; give `E` and `d`"
                            .into(),
                    ));
                }
                let e = self.e.clone().ok_or_else(|| {
                    CliError::Invalid("chain: explicit coupling requires field `E`".into())
                })?;
                let d = self.d.clone().ok_or_else(|| {
                    CliError::Invalid("chain: explicit coupling requires field `d`".into())
                })?;
                ChainSpec::new(e, d).map_err(CliError::from)?
            }
            CouplingKind::Heisenberg | CouplingKind::Xy => {
                if self.e.is_some() || self.d.is_some() {
                    return Err(CliError::Invalid(
                        "chain: fields `E` and `d` are not used with exchange coupling; give `J`"
                            .into(),
                    ));
                }
                let j = self.j.as_ref().ok_or_else(|| {
                    CliError::Invalid("chain: exchange coupling requires field `J`".into())
                })?;
                let coupling = match self.coupling {
                    CouplingKind::Heisenberg => Coupling::Heisenberg,
                    _ => Coupling::Xy,
                };
                qctl_core::spin::heisenberg_to_chain(j, self.n, coupling)
                    .map_err(CliError::from)?
            }
        };
        if spec.n() != self.n {
            return Err(CliError::Invalid(format!(
                "chain: `N` is {} but the coupling data describe {} sites",
                self.n,
                spec.n()
            )));
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ActuatorSection {
    pub r: usize,
}

fn default_fidelity_goal() -> f64 {
    bangbang::DEFAULT_FIDELITY_GOAL
}
fn default_max_segments() -> usize {
    bangbang::DEFAULT_MAX_SEGMENTS
}
fn default_restarts() -> usize {
    bangbang::DEFAULT_RESTARTS
}
fn default_time_cap() -> f64 {
    bangbang::DEFAULT_TIME_CAP
}
fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesisSection {
    pub gate: String,
    #[serde(default = "default_fidelity_goal")]
    pub fidelity_goal: f64,
    #[serde(default = "default_max_segments")]
    pub max_segments: usize,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_time_cap")]
    pub total_time_cap: f64,
}

/// Reference frame for the electron-nuclear pulse problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameKind {
    Lab,
    #[default]
    ElectronRotating,
}

impl From<FrameKind> for Frame {
    fn from(value: FrameKind) -> Self {
        match value {
            FrameKind::Lab => Frame::Lab,
            FrameKind::ElectronRotating => Frame::ElectronRotating,
        }
    }
}

fn default_nu_s_ghz() -> f64 {
    HyperfineParams::default().nu_s_ghz
}
fn default_nu_n_mhz() -> f64 {
    HyperfineParams::default().nu_n_mhz
}
fn default_a_zx_mhz() -> f64 {
    HyperfineParams::default().a_zx_mhz
}
fn default_a_zz_mhz() -> f64 {
    HyperfineParams::default().a_zz_mhz
}
fn default_segments() -> usize {
    100
}
fn default_horizon_ns() -> f64 {
    100.0
}
fn default_u_max_mhz() -> f64 {
    100.0
}
fn default_iters() -> usize {
    500
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSection {
    #[serde(rename = "nu_s_GHz", default = "default_nu_s_ghz")]
    pub nu_s_ghz: f64,
    #[serde(rename = "nu_n_MHz", default = "default_nu_n_mhz")]
    pub nu_n_mhz: f64,
    #[serde(rename = "A_zx_MHz", default = "default_a_zx_mhz")]
    pub a_zx_mhz: f64,
    #[serde(rename = "A_zz_MHz", default = "default_a_zz_mhz")]
    pub a_zz_mhz: f64,
    #[serde(default)]
    pub frame: FrameKind,
    #[serde(default = "default_segments")]
    pub segments: usize,
    #[serde(default = "default_horizon_ns")]
    pub horizon_ns: f64,
    #[serde(rename = "u_max_MHz", default = "default_u_max_mhz")]
    pub u_max_mhz: f64,
    #[serde(default = "default_iters")]
    pub iters: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl PulseSection {
    pub fn hyperfine(&self) -> HyperfineParams {
        HyperfineParams {
            nu_s_ghz: self.nu_s_ghz,
            nu_n_mhz: self.nu_n_mhz,
            a_zx_mhz: self.a_zx_mhz,
            a_zz_mhz: self.a_zz_mhz,
        }
    }
}

/// How the measurement current acts back on the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackKind {
    Off,
    CurrentProportional,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FeedbackSection {
    pub mode: FeedbackKind,
    #[serde(default)]
    pub gain: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actuator: Option<MatrixRows>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    #[serde(rename = "H")]
    pub h: MatrixRows,
    #[serde(default)]
    pub collapse_ops: Vec<MatrixRows>,
    #[serde(default)]
    pub channels: Vec<MatrixRows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feedback: Option<FeedbackSection>,
    pub rho0: MatrixRows,
    #[serde(rename = "T")]
    pub t: f64,
    pub dt: f64,
    #[serde(default)]
    pub trajectories: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FtSection {
    #[serde(rename = "U_T")]
    pub u_t: String,
    #[serde(rename = "U_R")]
    pub u_r: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
}
