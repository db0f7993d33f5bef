//! Desk-scale checks of the limit behaviour of `I_n` and `B_n` under random
//! and grid inputs, with Gaussian and non-Gaussian intrusions.

use std::sync::Arc;

use intrusion_core::stochastic::{draw_intrusions, grid, outputs_with_intrusions, sample_inputs, SeededRng};
use intrusion_core::{
    compute_b0, limit_i, sample_stats, InputModel, IntrusionModel, IntrusionSampler, Seed, StatTriple,
    TransferFunction,
};

/// `±s` with equal probability; `E|ε₂ − ε₁| = s`.
struct Rademacher(f64);

impl IntrusionSampler for Rademacher {
    fn name(&self) -> &str {
        "rademacher"
    }
    fn sample(&self, rng: &mut SeededRng) -> f64 {
        if rng.next_u64() >> 63 == 0 {
            -self.0
        } else {
            self.0
        }
    }
    fn mean_abs_difference(&self) -> Option<f64> {
        Some(self.0)
    }
}

/// Centered exponential with rate 1/s: skewed, yet `ε₂ − ε₁` is symmetric.
/// `E|ε₂ − ε₁| = s` (the difference is Laplace with scale s).
struct CenteredExponential(f64);

impl IntrusionSampler for CenteredExponential {
    fn name(&self) -> &str {
        "centered_exponential"
    }
    fn sample(&self, rng: &mut SeededRng) -> f64 {
        -self.0 * rng.uniform_open().ln() - self.0
    }
    fn mean_abs_difference(&self) -> Option<f64> {
        Some(self.0)
    }
}

fn intrusions() -> Vec<IntrusionModel> {
    vec![
        IntrusionModel::Gaussian { sigma2: 0.01 },
        IntrusionModel::Custom(Arc::new(Rademacher(0.1))),
        IntrusionModel::Custom(Arc::new(CenteredExponential(0.1))),
    ]
}

fn wavy() -> TransferFunction {
    // 3x - 9x^2 + 6x^3 on [0, 1.4]: two turning points
    TransferFunction::polynomial(vec![0.0, 3.0, -9.0, 6.0], 0.0, 1.4).unwrap()
}

fn stats_at(h: &TransferFunction, input: &InputModel, intrusion: &IntrusionModel, n: usize, seed: u64) -> StatTriple {
    let seed = Seed::new(seed);
    let x = sample_inputs(input, n, seed).unwrap();
    let eps = draw_intrusions(intrusion, n, seed).unwrap();
    sample_stats(&outputs_with_intrusions(h, &x, &eps).unwrap()).unwrap()
}

#[test]
fn clean_random_inputs_keep_b_bounded() {
    let h = TransferFunction::quadratic(0.0, 1.0).unwrap();
    let (pos, neg) = h.variation();
    let input = InputModel::ScaledBeta { alpha: 2.0, beta: 3.0, scale: 1.0 };
    for n in [100, 1_000, 10_000] {
        let t = stats_at(&h, &input, &IntrusionModel::Degenerate, n, 11);
        // the sample path never varies more than h itself
        assert!(t.b * (n as f64).sqrt() <= pos + neg + 1e-12, "n = {n}");
    }
}

#[test]
fn intrusions_make_b_grow_like_root_n() {
    let h = TransferFunction::quadratic(0.0, 1.0).unwrap();
    let input = InputModel::Uniform01;
    let n = 20_000;
    for model in intrusions() {
        let c = model.mean_abs_difference().unwrap();
        let t = stats_at(&h, &input, &model, n, 12);
        let rate = t.b / (n as f64).sqrt();
        assert!((rate - c).abs() / c < 0.05, "{model:?}: B_n/sqrt(n) = {rate}, expected {c}");
    }
}

#[test]
fn intrusions_drive_ratio_to_half() {
    for h in [TransferFunction::quadratic(0.0, 1.0).unwrap(), TransferFunction::identity(0.0, 1.0).unwrap()] {
        for model in intrusions() {
            let t = stats_at(&h, &InputModel::Uniform01, &model, 20_000, 13);
            assert!((t.i - 0.5).abs() < 0.01, "{} {model:?}: I = {}", h.name(), t.i);
        }
    }
}

#[test]
fn clean_random_inputs_approach_the_limit() {
    // I_n - I(h) is driven by how close the extreme inputs get to the
    // window ends. A Beta(3, 2) density vanishes like x^2 at 0, so the
    // smallest input is only ~n^(-1/3) from the end and convergence is slow.
    let cases = [
        (TransferFunction::quadratic(0.0, 1.0).unwrap(), InputModel::ScaledBeta { alpha: 2.0, beta: 2.0, scale: 1.0 }, 2e-3),
        (TransferFunction::quadratic(0.0, 1.6).unwrap(), InputModel::ScaledBeta { alpha: 3.0, beta: 2.0, scale: 1.6 }, 3e-2),
        (wavy(), InputModel::ScaledBeta { alpha: 2.0, beta: 2.0, scale: 1.4 }, 2e-3),
        (wavy(), InputModel::ScaledBeta { alpha: 1.0, beta: 1.0, scale: 1.4 }, 1e-3),
    ];
    for (h, input, tol) in cases {
        let limit = limit_i(&h).unwrap();
        let t = stats_at(&h, &input, &IntrusionModel::Degenerate, 20_000, 14);
        assert!((t.i - limit).abs() < tol, "{}: I = {}, limit {limit}", h.name(), t.i);
    }
}

#[test]
fn grid_inputs_keep_clean_b_bounded() {
    for h in [TransferFunction::quadratic(0.0, 1.0).unwrap(), wavy()] {
        let (a, b) = h.domain();
        let (pos, neg) = h.variation();
        for n in [10, 100, 1_000, 10_000] {
            let b0 = compute_b0(&h, &grid(a, b, n).unwrap()).unwrap();
            assert!(b0 * (n as f64).sqrt() <= pos + neg + 1e-9, "{} n = {n}", h.name());
        }
    }
}

#[test]
fn grid_inputs_with_intrusions_approach_half() {
    let h = wavy();
    let (a, b) = h.domain();
    let input = InputModel::DeterministicGrid { a, b };
    for model in intrusions() {
        let t = stats_at(&h, &input, &model, 20_000, 15);
        assert!((t.i - 0.5).abs() < 0.01, "{model:?}: I = {}", t.i);
        let c = model.mean_abs_difference().unwrap();
        assert!((t.b / 20_000f64.sqrt() - c).abs() / c < 0.05);
    }
}

#[test]
fn clean_grid_inputs_approach_the_limit() {
    for h in [TransferFunction::quadratic(0.0, 1.0).unwrap(), wavy()] {
        let (a, b) = h.domain();
        let limit = limit_i(&h).unwrap();
        let t = stats_at(&h, &InputModel::DeterministicGrid { a, b }, &IntrusionModel::Degenerate, 2_000, 0);
        assert!((t.i - limit).abs() < 1e-4, "{}: I = {}, limit {limit}", h.name(), t.i);
    }
}
