use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::linear::{solve_linear_adjoint, solve_linear_traced};
use super::monitor::StabilityReport;
use super::{BcMode, Nonlinearity, SolveOptions};
use crate::algebra::CQuat;
use crate::error::{Error, Result};
use crate::lattice::{l2_norm, Field};
use crate::potentials::{power_norm, NormEstimate};

/// `|u|²u + f` pointwise.
pub fn nonlinearity(u: &Field<CQuat>, f: &Field<CQuat>, mode: Nonlinearity) -> Result<Field<CQuat>> {
    u.zip_map(f, |a, b| a * squared_modulus(&a, mode) + b)
}

fn squared_modulus(u: &CQuat, mode: Nonlinearity) -> Complex64 {
    match mode {
        Nonlinearity::Modulus => Complex64::new(u.norm_sqr(), 0.0),
        Nonlinearity::Literal => u.0.iter().map(|c| c * c).sum(),
    }
}

/// Smallness conditions of the fixed-point theorem, evaluated with the
/// operator norm `C` of the linear solve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionCheck {
    pub c: f64,
    pub c_converged: bool,
    pub f_norm: f64,
    /// `1/(36C)`
    pub f_bound: f64,
    pub f_ok: bool,
    pub u0_norm: f64,
    /// `1/(6C) + W`, `W = (1/(36C) − ‖f‖/C)^{1/2}`; NaN when `W` is not real.
    pub u0_bound: f64,
    pub u0_ok: bool,
}

impl ContractionCheck {
    pub fn evaluate(c: NormEstimate, f_norm: f64, u0_norm: f64) -> Self {
        let cc = c.value;
        let f_bound = 1.0 / (36.0 * cc);
        let w2 = f_bound - f_norm / cc;
        let u0_bound = if w2 >= 0.0 { 1.0 / (6.0 * cc) + w2.sqrt() } else { f64::NAN };
        ContractionCheck {
            c: cc,
            c_converged: c.converged,
            f_norm,
            f_bound,
            f_ok: f_norm <= f_bound,
            u0_norm,
            u0_bound,
            u0_ok: u0_norm <= u0_bound,
        }
    }

    pub fn satisfied(&self) -> bool {
        self.f_ok && self.u0_ok
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub iterations: usize,
    /// `‖u_{n+1} − u_n‖₂` per iteration.
    pub diffs: Vec<f64>,
    /// `‖u_n‖₂` per iteration.
    pub norms: Vec<f64>,
    pub contraction: Option<ContractionCheck>,
    pub converged: bool,
    pub diverged: bool,
    pub message: Option<String>,
    /// Stability report of the last linear solve.
    pub stability: Option<StabilityReport>,
}

/// Operator norm of the zero-data linear solve, `C_{h,τ}`.
pub fn linear_solve_norm(grid: crate::lattice::GridSpec, max_iters: usize) -> Result<NormEstimate> {
    let opts = SolveOptions { bc: BcMode::Zero, ..SolveOptions::default() };
    power_norm(
        grid,
        1,
        max_iters,
        1e-6,
        |f| solve_linear_traced(f, None, &opts).map(|(u, _)| u),
        |v| Ok(solve_linear_adjoint(v)),
    )
}

pub fn solve_nonlinear(
    f: &Field<CQuat>,
    boundary: Option<&Field<CQuat>>,
    opts: &SolveOptions,
) -> Result<(Field<CQuat>, IterationReport)> {
    solve_nonlinear_from(f, boundary, None, opts)
}

/// Fixed-point iteration `u_{n+1} = S(|u_n|²u_n + f)` from `u0` (zero when
/// `None`), where `S` is [`solve_linear`](super::solve_linear).
pub fn solve_nonlinear_from(
    f: &Field<CQuat>,
    boundary: Option<&Field<CQuat>>,
    u0: Option<&Field<CQuat>>,
    opts: &SolveOptions,
) -> Result<(Field<CQuat>, IterationReport)> {
    opts.validate()?;
    let grid = *f.grid();
    grid.check_mesh(opts.strict_mesh)?;
    let mut u = match u0 {
        Some(u0) => {
            f.check_same_grid(u0)?;
            u0.clone()
        }
        None => Field::zeros(grid),
    };
    let contraction = if opts.contraction_iters > 0 {
        let c = linear_solve_norm(grid, opts.contraction_iters)?;
        let check = ContractionCheck::evaluate(c, l2_norm(f), l2_norm(&u));
        if !check.satisfied() {
            log::warn!(
                "contraction conditions not met: |f| = {:.3e} vs {:.3e}, |u0| = {:.3e} vs {:.3e}",
                check.f_norm,
                check.f_bound,
                check.u0_norm,
                check.u0_bound
            );
        }
        Some(check)
    } else {
        None
    };
    let mut report = IterationReport {
        iterations: 0,
        diffs: Vec::new(),
        norms: Vec::new(),
        contraction,
        converged: false,
        diverged: false,
        message: None,
        stability: None,
    };
    let mut growing = 0;
    for it in 1..=opts.max_iters {
        let rhs = nonlinearity(&u, f, opts.nonlinearity)?;
        let (next, stab) = match solve_linear_traced(&rhs, boundary, opts) {
            Ok(x) => x,
            Err(Error::Instability { level }) => {
                report.iterations = it;
                report.diverged = true;
                report.message = Some(format!("linear solve overflowed at time level {level} in iteration {it}"));
                return Ok((u, report));
            }
            Err(e) => return Err(e),
        };
        let diff = l2_norm(&next.sub(&u)?);
        report.iterations = it;
        report.norms.push(l2_norm(&next));
        report.stability = Some(stab);
        if !diff.is_finite() {
            report.diverged = true;
            report.message = Some(format!("non-finite iterate in iteration {it}"));
            return Ok((u, report));
        }
        if let Some(&last) = report.diffs.last() {
            growing = if diff > last { growing + 1 } else { 0 };
        }
        report.diffs.push(diff);
        u = next;
        if diff < opts.tol {
            report.converged = true;
            break;
        }
        if growing >= 3 {
            report.diverged = true;
            report.message = Some(format!("iterate differences grew for 3 consecutive iterations (last {diff:.3e})"));
            break;
        }
    }
    if !report.converged && !report.diverged {
        report.message = Some(format!("no convergence within {} iterations", opts.max_iters));
    }
    Ok((u, report))
}
