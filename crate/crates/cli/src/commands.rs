use std::fs;
use std::path::Path;

use dschro::experiments::{observed_order, run_example, Axis, ExampleSpec, TABLE_TIMES};
use dschro::fundamental::{l1_distance, FundamentalKind, FundamentalTable, TableExtent};
use dschro::lattice::{io, l2_norm, slice_l1_error, Field, GridSpec};
use dschro::potentials::{estimate_norm, TeodorescuPlan};
use dschro::solver::{linear_solve_norm, propagator_bound, solve_nonlinear, BcMode, ContractionCheck};
use dschro::algebra::CQuat;
use serde_json::json;

use crate::config::RunConfig;
use crate::verify;
use crate::Failure;

/// Residual checks in `fundsol` use at most this many time levels.
const RESIDUAL_STEPS: usize = 24;

/// Teodorescu norms in `study` are skipped above this many lattice points.
const STUDY_NORM_POINTS: usize = 5_000;

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Run(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::Run(format!("cannot write {}: {e}", path.display())))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn preamble(cfg: &RunConfig) -> Vec<String> {
    cfg.entries().into_iter().map(|e| format!("config {e}")).collect()
}

fn csv_with_preamble(cfg: &RunConfig, header: &str, rows: &[String]) -> String {
    let mut s: String = preamble(cfg).iter().map(|l| format!("# {l}\n")).collect();
    s.push_str(header);
    s.push('\n');
    for r in rows {
        s.push_str(r);
        s.push('\n');
    }
    s
}

fn to_json(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialize") + "\n"
}

fn spec(cfg: &RunConfig) -> Result<ExampleSpec, Failure> {
    let mut s = ExampleSpec::new(cfg.example)?;
    s.a = cfg.a;
    s.t = cfg.t;
    Ok(s)
}

pub fn verify(cfg: &RunConfig) -> Result<bool, Failure> {
    let suites: Vec<&str> = if cfg.only == "all" {
        verify::SUITES.to_vec()
    } else {
        let picked: Vec<&str> = cfg.only.split(',').map(str::trim).collect();
        if let Some(bad) = picked.iter().find(|s| !verify::SUITES.contains(s)) {
            return Err(Failure::Config(format!("unknown suite {bad:?}; expected one of {}", verify::SUITES.join(", "))));
        }
        verify::SUITES.iter().copied().filter(|s| picked.contains(s)).collect()
    };
    let mut checks = Vec::new();
    for s in suites {
        let got = verify::run(cfg, s);
        for c in &got {
            let status = if c.passed { "ok" } else { "FAILED" };
            println!("{:<14} {:<28} {:>12.3e} <= {:<9.1e} {status}", c.suite, c.name, c.value, c.tolerance);
            if let Some(n) = &c.note {
                println!("{:<14} {:<28} note: {n}", "", "");
            }
        }
        checks.extend(got);
    }
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| format!("{}/{}", c.suite, c.name)).collect();
    write(&cfg.out, "verify.json", &to_json(&json!({ "config": cfg, "checks": checks, "failed": failed })))?;
    if failed.is_empty() {
        println!("all checks passed");
        Ok(true)
    } else {
        eprintln!("failing invariants: {}", failed.join(", "));
        Ok(false)
    }
}

pub fn fundsol(cfg: &RunConfig) -> Result<bool, Failure> {
    let mut rows = Vec::new();
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    let mut last = f64::INFINITY;
    for level in 0..cfg.levels {
        let cells = cfg.base_cells << level;
        let h = cfg.half_width / cells as f64;
        let tau = cfg.ratio * h * h;
        if cfg.ratio >= dschro::lattice::MESH_RATIO_BOUND {
            if cfg.strict_mesh {
                return Err(Failure::Config(format!(
                    "mesh ratio {:.6} violates the bound {:.6}",
                    cfg.ratio,
                    dschro::lattice::MESH_RATIO_BOUND
                )));
            }
            if level == 0 {
                warnings.push(format!("mesh ratio {:.6} is not below 1/(6 pi^2)", cfg.ratio));
            }
        }
        let dist = l1_distance(h, tau, cfg.half_width, cfg.horizon)?;
        let steps = dist.levels.min(RESIDUAL_STEPS);
        let table = FundamentalTable::build(h, tau, FundamentalKind::Backward, TableExtent { radius: cells.max(steps + 2), steps })?;
        let res = table.residual_check();
        if dist.distance >= last {
            warnings.push(format!("level {level}: l1 distance {:.6e} did not decrease from {last:.6e}", dist.distance));
        }
        last = dist.distance;
        println!("level {level}: h={h:.6} tau={tau:.6e} levels={} l1={:.6e} residual={:.3e}", dist.levels, dist.distance, res.max_rel);
        rows.push(format!(
            "{level},{h:.10e},{tau:.10e},{},{:.10e},{:.6e},{steps}",
            dist.levels, dist.distance, res.max_rel
        ));
        records.push(json!({ "level": level, "distance": dist, "residual": res, "residual_steps": steps }));
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    let csv = csv_with_preamble(cfg, "level,h,tau,levels,l1_distance,residual_max_rel,residual_steps", &rows);
    write(&cfg.out, "fundsol.csv", &csv)?;
    write(&cfg.out, "fundsol.json", &to_json(&json!({ "config": cfg, "levels": records, "warnings": warnings })))?;
    Ok(true)
}

pub fn solve(cfg: &RunConfig) -> Result<bool, Failure> {
    let opts = cfg.solve_options();
    let (f, exact) = match &cfg.rhs {
        Some(path) => {
            if cfg.bc == BcMode::Sampled {
                return Err(Failure::Config("sampled boundary data needs an example, not an rhs file".into()));
            }
            let file = fs::File::open(path).map_err(|e| Failure::Config(format!("cannot open {}: {e}", path.display())))?;
            let f: Field<CQuat> = io::read_binary(std::io::BufReader::new(file))?;
            (f, None)
        }
        None => {
            let s = spec(cfg)?;
            let &(n, m) = cfg.grids.first().ok_or_else(|| Failure::Config("no grid given".into()))?;
            let g = s.grid(n, m)?;
            (s.sample_rhs(g, cfg.nl), Some(s.sample_exact(g)))
        }
    };
    let g = *f.grid();
    let boundary = if cfg.bc == BcMode::Sampled { exact.as_ref() } else { None };
    let (u, report) = solve_nonlinear(&f, boundary, &opts)?;
    let errors = match &exact {
        Some(ex) => {
            let mut out = Vec::new();
            for t in TABLE_TIMES {
                let k = g.nearest_level(t);
                out.push(json!({ "t": t, "level": k, "error": slice_l1_error(&u, ex, k, cfg.error_mode)? }));
            }
            Some(out)
        }
        None => None,
    };
    println!(
        "N={} M={}: {} iterations, converged={}, diverged={}",
        g.n, g.m, report.iterations, report.converged, report.diverged
    );
    fs::create_dir_all(&cfg.out).map_err(|e| Failure::Run(e.to_string()))?;
    let file = fs::File::create(cfg.out.join("solution.bin")).map_err(|e| Failure::Run(e.to_string()))?;
    io::write_binary(&u, std::io::BufWriter::new(file))?;
    write(&cfg.out, "solve.json", &to_json(&json!({ "config": cfg, "grid": g, "report": report, "errors": errors })))?;
    Ok(!(cfg.strict && !report.converged))
}

pub fn example(cfg: &RunConfig) -> Result<bool, Failure> {
    let s = spec(cfg)?;
    let table = run_example(&s, &cfg.grids, &cfg.solve_options(), cfg.error_mode)?;
    let pre = preamble(cfg);
    let id = s.id;
    write(&cfg.out, &format!("example{id}.csv"), &table.to_csv(&pre))?;
    write(&cfg.out, &format!("example{id}_long.csv"), &table.to_long_csv(&pre))?;
    let mut orders = Vec::new();
    for axis in [Axis::Space, Axis::Time] {
        for &t in &TABLE_TIMES[1..] {
            match observed_order(&table, axis, t) {
                Ok(fit) => {
                    println!("order {axis:?} t={t}: slope {:.4} (fit residual {:.2e})", fit.slope, fit.residual);
                    orders.push(json!(fit));
                }
                Err(e) => orders.push(json!({ "axis": axis, "t": t, "error": e.to_string() })),
            }
        }
    }
    print!("{}", table.to_csv(&[]));
    write(&cfg.out, &format!("example{id}.json"), &to_json(&json!({ "config": cfg, "table": table, "orders": orders })))?;
    let flagged = table.rows.iter().filter(|r| r.flagged).count();
    if flagged > 0 {
        eprintln!("{flagged} row(s) flagged: fixed-point iteration did not converge");
    }
    Ok(!(cfg.strict && flagged > 0))
}

/// Operator norms and fixed-point smallness bounds on each configured grid.
pub fn study(cfg: &RunConfig) -> Result<bool, Failure> {
    let s = spec(cfg)?;
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for &(n, m) in &cfg.grids {
        let g: GridSpec = s.grid(n, m)?;
        g.check_mesh(cfg.strict_mesh)?;
        let c = linear_solve_norm(g, cfg.contraction_iters.max(1))?;
        let f_norm = l2_norm(&s.sample_rhs(g, cfg.nl));
        let check = ContractionCheck::evaluate(c, f_norm, 0.0);
        let t_norm = if g.len() <= STUDY_NORM_POINTS {
            Some(estimate_norm(&TeodorescuPlan::new(g, cfg.strategy)?, 1)?.value)
        } else {
            None
        };
        let shown = t_norm.map_or("".to_string(), |v| format!("{v:.6e}"));
        rows.push(format!(
            "{n},{m},{:.10e},{:.10e},{:.6e},{},{:.6e},{:.6e},{shown},{:.6e},{:.6e},{}",
            g.h(),
            g.tau(),
            g.ratio(),
            g.mesh_ok(),
            propagator_bound(g.tau(), g.h()),
            check.c,
            check.f_norm,
            check.f_bound,
            check.f_ok
        ));
        println!("N={n} M={m}: C={:.4e} |f|={:.4e} bound={:.4e}", check.c, check.f_norm, check.f_bound);
        records.push(json!({ "grid": g, "solve_norm": c, "teodorescu_norm": t_norm, "contraction": check }));
    }
    let header = "N,M,h,tau,ratio,mesh_ok,propagator_bound,solve_norm,teodorescu_norm,f_norm,f_bound,f_ok";
    write(&cfg.out, "study.csv", &csv_with_preamble(cfg, header, &rows))?;
    write(&cfg.out, "study.json", &to_json(&json!({ "config": cfg, "grids": records })))?;
    Ok(true)
}
