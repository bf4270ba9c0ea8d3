//! Linear and cubic nonlinear Schrödinger solves on a space-time lattice.

mod linear;
mod monitor;
mod nonlinear;

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use linear::{
    linear_residual, solve_linear, solve_linear_adjoint, solve_linear_dense, solve_linear_duhamel, solve_linear_traced,
};
pub use monitor::{propagator_bound, stability_monitor, StabilityReport};
pub use nonlinear::{
    linear_solve_norm, nonlinearity, solve_nonlinear, solve_nonlinear_from, ContractionCheck, IterationReport,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BcMode {
    /// `u = 0` on the parabolic boundary.
    Zero,
    /// Boundary and initial values are read from supplied data.
    Sampled,
}

impl FromStr for BcMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(BcMode::Zero),
            "sampled" => Ok(BcMode::Sampled),
            other => Err(Error::InvalidArgument(format!("unknown boundary mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Nonlinearity {
    /// `|u|² = Σ_j |u^j|²`
    Modulus,
    /// `|u|² = Σ_j (u^j)²`, complex in general.
    Literal,
}

impl FromStr for Nonlinearity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "modulus" => Ok(Nonlinearity::Modulus),
            "literal" => Ok(Nonlinearity::Literal),
            other => Err(Error::InvalidArgument(format!("unknown nonlinearity mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorOptions {
    /// Per-step l₂ growth above which a march is flagged.
    pub growth_threshold: f64,
}

impl Default for MonitorOptions {
    fn default() -> Self {
        MonitorOptions { growth_threshold: 1.1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub bc: BcMode,
    pub nonlinearity: Nonlinearity,
    pub max_iters: usize,
    /// Tolerance on `‖u_{n+1} − u_n‖₂`.
    pub tol: f64,
    pub strict_mesh: bool,
    pub monitor: MonitorOptions,
    /// Power iterations for the contraction constant; 0 skips the check.
    pub contraction_iters: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            bc: BcMode::Zero,
            nonlinearity: Nonlinearity::Modulus,
            max_iters: 20,
            tol: 1e-10,
            strict_mesh: false,
            monitor: MonitorOptions::default(),
            contraction_iters: 60,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}
