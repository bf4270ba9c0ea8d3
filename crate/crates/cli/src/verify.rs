//! Invariant suites behind `dschro verify`.

use dschro::algebra::{gamma, CQuat, Mat16, Vec16, WittKind};
use dschro::fundamental::{FundamentalKind, FundamentalTable, TableExtent};
use dschro::lattice::{parabolic_dirac, star_laplacian, time_diff, Field, GridSpec, TimeSign};
use dschro::potentials::{dirac_interior, Strategy, TeodorescuPlan};
use dschro::solver::{solve_linear, solve_linear_dense, solve_linear_duhamel, SolveOptions};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::RunConfig;

pub const SUITES: [&str; 6] = ["mesh", "algebra", "factorization", "fundamental", "right_inverse", "oracle"];

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub note: Option<String>,
}

impl Check {
    fn new(suite: &'static str, name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check { suite, name: name.into(), value, tolerance, passed: value <= tolerance, note: None }
    }

    fn failed(suite: &'static str, name: impl Into<String>, note: String) -> Self {
        Check { suite, name: name.into(), value: f64::NAN, tolerance: 0.0, passed: false, note: Some(note) }
    }
}

pub fn run(cfg: &RunConfig, suite: &str) -> Vec<Check> {
    match suite {
        "mesh" => mesh(cfg),
        "algebra" => algebra(),
        "factorization" => factorization(),
        "fundamental" => fundamental(),
        "right_inverse" => right_inverse(cfg),
        "oracle" => oracle(cfg),
        _ => unreachable!("suite names are validated"),
    }
}

fn random_vec16(g: GridSpec, seed: u64) -> Field<Vec16> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vals = (0..g.len())
        .map(|_| Vec16(std::array::from_fn(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))))
        .collect();
    Field::from_vec(g, vals).expect("length matches grid")
}

fn random_quat(g: GridSpec, seed: u64) -> Field<CQuat> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vals = (0..g.len())
        .map(|_| CQuat(std::array::from_fn(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))))
        .collect();
    Field::from_vec(g, vals).expect("length matches grid")
}

fn mesh(cfg: &RunConfig) -> Vec<Check> {
    let g = match GridSpec::with_ratio(1.0, 5, 0.02, cfg.ratio) {
        Ok(g) => g,
        Err(e) => return vec![Check::failed("mesh", "mesh_ratio", e.to_string())],
    };
    match g.check_mesh(cfg.strict_mesh) {
        Ok(ok) => {
            let mut c = Check::new("mesh", "mesh_ratio", g.ratio(), f64::INFINITY);
            if !ok {
                c.note = Some("ratio above 1/(6 pi^2); continuing because strict_mesh is off".into());
            }
            vec![c]
        }
        Err(e) => vec![Check::failed("mesh", "mesh_ratio", e.to_string())],
    }
}

fn algebra() -> Vec<Check> {
    let mut anti = 0.0f64;
    for i in 1..4 {
        for j in 1..4 {
            let (a, b) = (CQuat::basis(i), CQuat::basis(j));
            let expect = if i == j { CQuat::ONE * -2.0 } else { CQuat::ZERO };
            anti = anti.max((a * b + b * a - expect).norm());
        }
    }
    let gp = gamma(WittKind::Plus);
    let gm = gamma(WittKind::Minus);
    let witt = [(gp * gp).norm(), (gm * gm).norm(), (gp * gm + gm * gp - Mat16::identity()).norm()]
        .into_iter()
        .fold(0.0, f64::max);
    vec![
        Check::new("algebra", "quaternion_anticommutation", anti, 1e-13),
        Check::new("algebra", "witt_relations", witt, 1e-13),
    ]
}

fn factorization() -> Vec<Check> {
    let g = GridSpec::new(1.0, 4, 6, 0.05).expect("valid grid");
    let mut worst = [0.0f64; 2];
    for seed in 0..20 {
        let u = random_vec16(g, seed);
        let lap = star_laplacian(&u);
        let dt = time_diff(&u);
        for (s, sign) in [TimeSign::Plus, TimeSign::Minus].into_iter().enumerate() {
            let dd = parabolic_dirac(&parabolic_dirac(&u, sign), sign);
            let rhs = Field::from_fn(g, |i, k| dt.at(i, k) * Complex64::new(0.0, sign.factor()) - lap.at(i, k));
            let err = dd.sub(&rhs).expect("same grid").max_modulus_where(|i, _| !g.on_spatial_boundary(i));
            worst[s] = worst[s].max(err / u.max_modulus());
        }
    }
    vec![
        Check::new("factorization", "dirac_squared_plus", worst[0], 1e-12),
        Check::new("factorization", "dirac_squared_minus", worst[1], 1e-12),
    ]
}

fn fundamental() -> Vec<Check> {
    let (h, tau) = (0.25, 0.9 * dschro::lattice::MESH_RATIO_BOUND * 0.0625);
    let ext = TableExtent { radius: 34, steps: 32 };
    [FundamentalKind::Backward, FundamentalKind::Forward]
        .into_iter()
        .map(|kind| match FundamentalTable::build(h, tau, kind, ext) {
            Ok(t) => Check::new("fundamental", format!("residual_{kind:?}").to_lowercase(), t.residual_check().max_rel, 1e-12),
            Err(e) => Check::failed("fundamental", format!("residual_{kind:?}").to_lowercase(), e.to_string()),
        })
        .collect()
}

fn right_inverse(cfg: &RunConfig) -> Vec<Check> {
    let g = GridSpec::new(1.0, 5, 6, 0.03).expect("valid grid");
    let plan = match TeodorescuPlan::new(g, cfg.strategy) {
        Ok(p) => p,
        Err(e) => return vec![Check::failed("right_inverse", "dirac_after_teodorescu", e.to_string())],
    };
    let mut worst = 0.0f64;
    for seed in 0..20 {
        let u = random_vec16(g, 100 + seed);
        let dtu = match plan.apply(&u) {
            Ok(tu) => parabolic_dirac(&tu, TimeSign::Minus),
            Err(e) => return vec![Check::failed("right_inverse", "dirac_after_teodorescu", e.to_string())],
        };
        let err = dtu.sub(&u).expect("same grid").max_modulus_where(|i, k| dirac_interior(&g, i, k));
        worst = worst.max(err / u.max_modulus());
    }
    let mut c = Check::new("right_inverse", "dirac_after_teodorescu", worst, 1e-10);
    if cfg.strategy != Strategy::Naive {
        c.note = Some(format!("strategy {:?}", cfg.strategy).to_lowercase());
    }
    vec![c]
}

fn oracle(cfg: &RunConfig) -> Vec<Check> {
    let g = GridSpec::new(1.0, 5, 10, 0.02).expect("valid grid");
    let f = random_quat(g, 4);
    let opts = SolveOptions { strict_mesh: cfg.strict_mesh, ..SolveOptions::default() };
    let run = || -> dschro::Result<(f64, f64)> {
        let a = solve_linear(&f, None, &opts)?;
        let b = solve_linear_duhamel(&f)?;
        let c = solve_linear_dense(&f)?;
        let s = a.max_modulus();
        Ok((a.sub(&b)?.max_modulus() / s, a.sub(&c)?.max_modulus() / s))
    };
    match run() {
        Ok((d, l)) => vec![Check::new("oracle", "march_vs_duhamel", d, 1e-10), Check::new("oracle", "march_vs_dense", l, 1e-10)],
        Err(e) => vec![Check::failed("oracle", "march_vs_duhamel", e.to_string())],
    }
}
