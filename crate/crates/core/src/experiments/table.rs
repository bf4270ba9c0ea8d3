use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ExampleSpec;
use crate::error::{Error, Result};
use crate::lattice::{slice_l1_error, ErrorMode, GridSpec};
use crate::solver::{solve_nonlinear, BcMode, IterationReport, Nonlinearity, SolveOptions};

/// Instants at which slice errors are tabulated.
pub const TABLE_TIMES: [f64; 6] = [0.0, 0.4, 0.8, 1.2, 1.6, 2.0];

const COLUMN_NAMES: [&str; 6] = ["t0", "t04", "t08", "t12", "t16", "t2"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowReport {
    pub iterations: usize,
    pub converged: bool,
    pub diverged: bool,
    pub contraction_satisfied: Option<bool>,
    pub solve_norm: Option<f64>,
    pub stability_flagged: bool,
    pub message: Option<String>,
    pub diffs: Vec<f64>,
}

impl RowReport {
    fn from_iteration(r: &IterationReport) -> Self {
        RowReport {
            iterations: r.iterations,
            converged: r.converged,
            diverged: r.diverged,
            contraction_satisfied: r.contraction.map(|c| c.satisfied()),
            solve_norm: r.contraction.map(|c| c.c),
            stability_flagged: r.stability.as_ref().is_some_and(|s| s.flagged),
            message: r.message.clone(),
            diffs: r.diffs.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub n: usize,
    pub m: usize,
    pub h: f64,
    pub tau: f64,
    /// Time level used for each tabulated instant.
    pub levels: [usize; 6],
    pub errors: [f64; 6],
    /// Set when the fixed-point iteration diverged or did not converge.
    pub flagged: bool,
    pub report: RowReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorTable {
    pub example: u8,
    pub bc: BcMode,
    pub nonlinearity: Nonlinearity,
    pub error_mode: ErrorMode,
    pub tol: f64,
    pub max_iters: usize,
    pub rows: Vec<ErrorRow>,
}

impl ErrorTable {
    pub fn error(&self, row: usize, t: f64) -> Option<f64> {
        let col = column(t)?;
        self.rows.get(row).map(|r| r.errors[col])
    }

    /// Wide CSV with one `#` comment line per preamble entry.
    pub fn to_csv(&self, preamble: &[String]) -> String {
        let mut s = String::new();
        for line in preamble {
            let _ = writeln!(s, "# {line}");
        }
        let _ = writeln!(
            s,
            "# example={} bc={} nonlinearity={} error_mode={}",
            self.example,
            label(&self.bc),
            label(&self.nonlinearity),
            label(&self.error_mode)
        );
        for r in self.rows.iter().filter(|r| r.flagged) {
            let _ = writeln!(s, "# flagged N={} M={}: {}", r.n, r.m, r.report.message.as_deref().unwrap_or("not converged"));
        }
        let _ = writeln!(s, "N,M,{}", COLUMN_NAMES.join(","));
        for r in &self.rows {
            let errs: Vec<String> = r.errors.iter().map(|e| format!("{e:.10e}")).collect();
            let _ = writeln!(s, "{},{},{}", r.n, r.m, errs.join(","));
        }
        s
    }

    /// Long format `N,M,t,error`, one line per tabulated value.
    pub fn to_long_csv(&self, preamble: &[String]) -> String {
        let mut s = String::new();
        for line in preamble {
            let _ = writeln!(s, "# {line}");
        }
        s.push_str("N,M,t,error\n");
        for r in &self.rows {
            for (t, e) in TABLE_TIMES.iter().zip(&r.errors) {
                let _ = writeln!(s, "{},{},{t},{e:.10e}", r.n, r.m);
            }
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn column(t: f64) -> Option<usize> {
    TABLE_TIMES.iter().position(|&c| (c - t).abs() < 1e-9)
}

fn label<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
}

/// Solves the example on every `(N, M)` grid and tabulates slice errors at
/// the nearest time level to each of [`TABLE_TIMES`]. Rows run concurrently.
pub fn run_example(spec: &ExampleSpec, grids: &[(usize, usize)], opts: &SolveOptions, mode: ErrorMode) -> Result<ErrorTable> {
    opts.validate()?;
    let specs = grids.iter().map(|&(n, m)| spec.grid(n, m)).collect::<Result<Vec<_>>>()?;
    if opts.strict_mesh {
        for g in &specs {
            g.check_mesh(true)?;
        }
    }
    let rows = specs.par_iter().map(|&g| run_row(spec, g, opts, mode)).collect::<Result<Vec<_>>>()?;
    Ok(ErrorTable {
        example: spec.id,
        bc: opts.bc,
        nonlinearity: opts.nonlinearity,
        error_mode: mode,
        tol: opts.tol,
        max_iters: opts.max_iters,
        rows,
    })
}

fn run_row(spec: &ExampleSpec, g: GridSpec, opts: &SolveOptions, mode: ErrorMode) -> Result<ErrorRow> {
    let exact = spec.sample_exact(g);
    let f = spec.sample_rhs(g, opts.nonlinearity);
    let boundary = match opts.bc {
        BcMode::Zero => None,
        BcMode::Sampled => Some(&exact),
    };
    let (u, report) = solve_nonlinear(&f, boundary, opts)?;
    let levels = TABLE_TIMES.map(|t| g.nearest_level(t));
    let mut errors = [0.0; 6];
    for (e, &k) in errors.iter_mut().zip(&levels) {
        *e = slice_l1_error(&u, &exact, k, mode)?;
    }
    let report = RowReport::from_iteration(&report);
    if report.diverged {
        log::warn!("N={} M={}: {}", g.n, g.m, report.message.as_deref().unwrap_or("diverged"));
    }
    Ok(ErrorRow {
        n: g.n,
        m: g.m,
        h: g.h(),
        tau: g.tau(),
        levels,
        errors,
        flagged: report.diverged || !report.converged,
        report,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Space,
    Time,
}

impl std::str::FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "space" => Ok(Axis::Space),
            "time" => Ok(Axis::Time),
            other => Err(Error::InvalidArgument(format!("unknown axis {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderFit {
    pub axis: Axis,
    pub t: f64,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
    pub points: usize,
}

/// Least-squares slope of `log(error)` against `log(h)` or `log(τ)` in the
/// column for instant `t`. Flagged rows and non-positive errors are skipped.
pub fn observed_order(table: &ErrorTable, axis: Axis, t: f64) -> Result<OrderFit> {
    let col = column(t).ok_or_else(|| Error::InvalidArgument(format!("no error column for t = {t}")))?;
    let pts: Vec<(f64, f64)> = table
        .rows
        .iter()
        .filter(|r| !r.flagged && r.errors[col] > 0.0 && r.errors[col].is_finite())
        .map(|r| {
            let x = match axis {
                Axis::Space => r.h,
                Axis::Time => r.tau,
            };
            (x.ln(), r.errors[col].ln())
        })
        .collect();
    let distinct = {
        let mut xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        xs.len()
    };
    if distinct < 3 {
        return Err(Error::InsufficientData { needed: 3, got: distinct });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Ok(OrderFit { axis, t, slope, intercept, residual, points: pts.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(power: f64) -> ErrorTable {
        let rows = [8usize, 12, 16, 24]
            .iter()
            .map(|&n| {
                let h = 10.0 / n as f64;
                let e = 0.3 * h.powf(power);
                ErrorRow {
                    n,
                    m: n * n,
                    h,
                    tau: 2.0 / (n * n) as f64,
                    levels: [0; 6],
                    errors: [0.0, e, e, e, e, e],
                    flagged: false,
                    report: RowReport {
                        iterations: 1,
                        converged: true,
                        diverged: false,
                        contraction_satisfied: None,
                        solve_norm: None,
                        stability_flagged: false,
                        message: None,
                        diffs: vec![],
                    },
                }
            })
            .collect();
        ErrorTable {
            example: 1,
            bc: BcMode::Zero,
            nonlinearity: Nonlinearity::Modulus,
            error_mode: ErrorMode::Weighted,
            tol: 1e-10,
            max_iters: 20,
            rows,
        }
    }

    #[test]
    fn exact_power_laws() {
        for p in [2.0, 8.0] {
            let fit = observed_order(&synthetic(p), Axis::Space, 0.4).unwrap();
            assert!((fit.slope - p).abs() < 0.01, "{fit:?}");
            assert!(fit.residual < 1e-10);
            let tfit = observed_order(&synthetic(p), Axis::Time, 0.4).unwrap();
            assert!((tfit.slope - p / 2.0).abs() < 0.01);
        }
    }

    #[test]
    fn too_few_rows() {
        let mut t = synthetic(2.0);
        t.rows.truncate(2);
        assert!(matches!(observed_order(&t, Axis::Space, 0.4), Err(Error::InsufficientData { .. })));
        // zero errors at t = 0 are unusable
        assert!(observed_order(&synthetic(2.0), Axis::Space, 0.0).is_err());
        assert!(observed_order(&synthetic(2.0), Axis::Space, 0.5).is_err());
    }

    #[test]
    fn exports() {
        let t = synthetic(2.0);
        let csv = t.to_csv(&["config a=5".into()]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# config a=5");
        assert!(lines.contains(&"N,M,t0,t04,t08,t12,t16,t2"));
        assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 5);
        let long = t.to_long_csv(&[]);
        assert_eq!(long.lines().count(), 1 + 6 * 4);
        assert!(long.starts_with("N,M,t,error\n8,64,0,"));
        let back: ErrorTable = serde_json::from_str(&t.to_json().unwrap()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn small_run_is_deterministic() {
        let spec = ExampleSpec::new(3).unwrap();
        let opts = SolveOptions { contraction_iters: 0, ..SolveOptions::default() };
        let a = run_example(&spec, &[(6, 60), (8, 85)], &opts, ErrorMode::Weighted).unwrap();
        let b = run_example(&spec, &[(6, 60), (8, 85)], &opts, ErrorMode::Weighted).unwrap();
        assert_eq!(a.to_csv(&[]), b.to_csv(&[]));
        assert_eq!(a.rows[0].errors[0], 0.0);
        assert!(a.rows.iter().all(|r| r.errors.iter().all(|e| e.is_finite() && *e >= 0.0)));
        assert_eq!(a.rows[1].levels[5], 85);
    }
}
