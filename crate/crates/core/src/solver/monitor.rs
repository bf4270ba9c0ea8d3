use serde::{Deserialize, Serialize};

/// Per-step growth summary of a time march.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// l₂ norm of each time slice, `k = 0..=M`.
    pub trace: Vec<f64>,
    /// Largest ratio of consecutive nonzero slice norms.
    pub max_growth: f64,
    /// `max_growth^M`.
    pub projected_amplification: f64,
    /// Spectral bound `(1 + (τλ_max)²)^{1/2}` of `1 − iτΔ_h`, `λ_max = 12/h²`.
    pub propagator_bound: f64,
    pub threshold: f64,
    pub flagged: bool,
}

pub fn propagator_bound(tau: f64, h: f64) -> f64 {
    let lambda = 12.0 / (h * h);
    (1.0 + (tau * lambda).powi(2)).sqrt()
}

pub fn stability_monitor(trace: &[f64], tau: f64, h: f64, threshold: f64) -> StabilityReport {
    let max_growth = trace
        .windows(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .fold(1.0f64, f64::max);
    let steps = trace.len().saturating_sub(1) as i32;
    let flagged = max_growth > threshold;
    if flagged {
        log::info!("per-step norm growth {max_growth:.4} exceeds threshold {threshold:.4}");
    }
    StabilityReport {
        trace: trace.to_vec(),
        max_growth,
        projected_amplification: max_growth.powi(steps),
        propagator_bound: propagator_bound(tau, h),
        threshold,
        flagged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::CQuat;
    use crate::lattice::{Field, GridSpec, MESH_RATIO_BOUND};
    use crate::solver::{solve_linear_traced, BcMode, SolveOptions};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn flat_zero_trace() {
        let r = stability_monitor(&[0.0; 5], 0.1, 0.5, 1.1);
        assert_eq!(r.max_growth, 1.0);
        assert!(!r.flagged);
    }

    /// Initial data `Π sin(π j i/N)` for one sine mode `j`, marched with `f = 0`.
    fn single_mode_growth(ratio: f64, j: usize) -> StabilityReport {
        let n = 8;
        let g = GridSpec::with_ratio(1.0, n, 0.05, ratio).unwrap();
        let init = Field::from_fn(g, |i, _| {
            let s: f64 = i.iter().map(|&c| (PI * (j * c) as f64 / n as f64).sin()).product();
            CQuat::scalar(Complex64::new(s, 0.0))
        });
        let opts = SolveOptions { bc: BcMode::Sampled, ..SolveOptions::default() };
        let data = Field::from_fn(g, |i, k| if k == 0 { init.at(i, 0) } else { CQuat::ZERO });
        solve_linear_traced(&Field::zeros(g), Some(&data), &opts).unwrap().1
    }

    #[test]
    fn single_mode_respects_spectral_bound() {
        let r = single_mode_growth(0.9 * MESH_RATIO_BOUND, 7);
        assert!(r.max_growth <= r.propagator_bound * (1.0 + 1e-12));
        assert!(r.max_growth > 1.0);
        assert!(!r.flagged);
    }

    #[test]
    fn coarse_time_step_is_flagged() {
        let r = single_mode_growth(10.0 * MESH_RATIO_BOUND, 7);
        assert!(r.flagged);
        assert!(r.projected_amplification > 10.0);
    }
}
