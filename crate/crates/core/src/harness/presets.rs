//! The eight reference scenarios. Seeds are fixed but arbitrary: runs show
//! the characteristic trend shapes, not any particular sample path.

use super::{Scenario, TransferSpec};
use crate::detector::TrendParams;
use crate::error::{Error, Result};
use crate::stochastic::{InputModel, IntrusionModel};

/// `(alpha, beta)` of the three panels of the beta-input scenarios.
pub const BETA_SHAPES: [(f64, f64); 3] = [(2.0, 3.0), (2.0, 2.0), (3.0, 2.0)];

/// Variance of the Gaussian intrusions in every noisy scenario.
pub const NOISE_SIGMA2: f64 = 0.01;

pub const PRESET_NAMES: [&str; 8] = [
    "fig3",
    "fig4",
    "fig5",
    "fig6",
    "fig7_noisy",
    "fig7_clean",
    "fig8_rand",
    "fig8_grid",
];

fn beta_panels(scale: f64) -> Vec<InputModel> {
    BETA_SHAPES
        .iter()
        .map(|&(alpha, beta)| InputModel::ScaledBeta { alpha, beta, scale })
        .collect()
}

fn quadratic(b: f64) -> TransferSpec {
    TransferSpec { name: "quadratic".into(), a: 0.0, b, coeffs: Vec::new() }
}

fn scenario(name: &str, panels: Vec<InputModel>, b: f64, noisy: bool, seed: u64) -> Scenario {
    Scenario {
        name: name.into(),
        panels,
        transfer: quadratic(b),
        intrusion: if noisy {
            IntrusionModel::Gaussian { sigma2: NOISE_SIGMA2 }
        } else {
            IntrusionModel::Degenerate
        },
        n_max: 300,
        seed,
        replications: 1,
        params: TrendParams::default(),
    }
}

/// Every preset, in catalog order.
pub fn list_presets() -> Vec<Scenario> {
    const WIDE: f64 = 8.0 / 5.0;
    vec![
        scenario("fig3", beta_panels(1.0), 1.0, false, 303),
        scenario("fig4", beta_panels(1.0), 1.0, true, 404),
        scenario("fig5", beta_panels(WIDE), WIDE, true, 505),
        scenario("fig6", beta_panels(WIDE), WIDE, false, 606),
        scenario("fig7_noisy", vec![InputModel::DeterministicGrid { a: 0.0, b: WIDE }], WIDE, true, 707),
        scenario("fig7_clean", vec![InputModel::DeterministicGrid { a: 0.0, b: WIDE }], WIDE, false, 708),
        scenario("fig8_rand", vec![InputModel::Uniform01], 1.0, true, 808),
        scenario("fig8_grid", vec![InputModel::DeterministicGrid { a: 0.0, b: 1.0 }], 1.0, true, 809),
    ]
}

pub fn preset(name: &str) -> Result<Scenario> {
    list_presets()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::UnknownPreset(name.to_string()))
}
