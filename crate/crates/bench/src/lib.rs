//! Shared inputs for the benchmarks.

use intrusion_core::stochastic::{generate_outputs, sample_inputs};
use intrusion_core::{IntrusionModel, InputModel, PairedSample, Seed, TransferFunction};

/// `n` noisy quadratic observations on `[0, 1]` with Beta(2, 3) inputs.
pub fn noisy_sample(n: usize, seed: u64) -> PairedSample {
    let h = TransferFunction::quadratic(0.0, 1.0).expect("valid window");
    let input = InputModel::ScaledBeta { alpha: 2.0, beta: 3.0, scale: 1.0 };
    let seed = Seed::new(seed);
    let x = sample_inputs(&input, n, seed).expect("valid input model");
    generate_outputs(&h, &x, &IntrusionModel::Gaussian { sigma2: 0.01 }, seed).expect("inputs in window")
}
