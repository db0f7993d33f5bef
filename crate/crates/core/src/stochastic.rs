//! Reproducible inputs, intrusion variables and compromised outputs.
//!
//! Every draw comes from ChaCha8 keyed by a 64-bit seed. A replication
//! index selects a pair of ChaCha streams, one for inputs and one for
//! intrusions, so the two sequences never share state. Variates are
//! produced by fixed algorithms implemented here (Box–Muller normals,
//! Marsaglia–Tsang gammas, beta as a gamma ratio) rather than a library
//! default that could change between versions.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::stats::PairedSample;
use crate::transfer::TransferFunction;

/// Master seed plus replication index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Seed {
    pub value: u64,
    pub replication: u64,
}

impl Seed {
    pub fn new(value: u64) -> Self {
        Self { value, replication: 0 }
    }

    pub fn replication(self, k: u64) -> Self {
        Self { replication: k, ..self }
    }

    pub fn input_rng(&self) -> SeededRng {
        SeededRng::new(self.value, 2 * self.replication)
    }

    pub fn intrusion_rng(&self) -> SeededRng {
        SeededRng::new(self.value, 2 * self.replication + 1)
    }
}

impl fmt::Display for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/rep{}", self.value, self.replication)
    }
}

/// A ChaCha8 stream with the variate generators used across the crate.
#[derive(Debug, Clone)]
pub struct SeededRng {
    rng: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl SeededRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng, spare_normal: None }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on the open interval `(0, 1)`.
    pub fn uniform_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal by Box–Muller; the second variate of each pair is
    /// kept for the next call.
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.uniform_open();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * PI * u2;
        self.spare_normal = Some(r * theta.sin());
        r * theta.cos()
    }

    /// Gamma(shape, 1) by Marsaglia–Tsang. Shapes below one are boosted:
    /// `G(k) = G(k + 1)·U^{1/k}`.
    pub fn gamma(&mut self, shape: f64) -> f64 {
        if shape < 1.0 {
            let g = self.gamma(shape + 1.0);
            return g * self.uniform_open().powf(1.0 / shape);
        }
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / (9.0 * d).sqrt();
        loop {
            let z = self.standard_normal();
            let v = 1.0 + c * z;
            if v <= 0.0 {
                continue;
            }
            let v = v * v * v;
            let u = self.uniform_open();
            if u < 1.0 - 0.0331 * z.powi(4) || u.ln() < 0.5 * z * z + d * (1.0 - v + v.ln()) {
                return d * v;
            }
        }
    }

    /// Beta(alpha, beta) as `X / (X + Y)` for independent gammas.
    pub fn beta(&mut self, alpha: f64, beta: f64) -> f64 {
        let x = self.gamma(alpha);
        let y = self.gamma(beta);
        x / (x + y)
    }
}

/// How inputs are produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InputModel {
    /// `scale · Beta(alpha, beta)`, supported on `[0, scale]`.
    ScaledBeta { alpha: f64, beta: f64, scale: f64 },
    Uniform01,
    /// The equispaced design `a + (b − a)(i − 1)/(n − 1)`, rebuilt for each `n`.
    DeterministicGrid { a: f64, b: f64 },
}

impl InputModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            InputModel::ScaledBeta { alpha, beta, scale } => {
                if !(alpha > 0.0 && beta > 0.0 && scale > 0.0) || !(alpha * beta * scale).is_finite() {
                    return Err(Error::BadParameters(format!(
                        "beta inputs need alpha, beta, scale > 0 (got {alpha}, {beta}, {scale})"
                    )));
                }
            }
            InputModel::Uniform01 => {}
            InputModel::DeterministicGrid { a, b } => {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return Err(Error::BadParameters(format!("grid needs a < b (got {a}, {b})")));
                }
            }
        }
        Ok(())
    }

    /// The closed interval that holds every input.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            InputModel::ScaledBeta { scale, .. } => (0.0, scale),
            InputModel::Uniform01 => (0.0, 1.0),
            InputModel::DeterministicGrid { a, b } => (a, b),
        }
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self, InputModel::DeterministicGrid { .. })
    }

    /// Short label used in artifact file names.
    pub fn tag(&self) -> String {
        match *self {
            InputModel::ScaledBeta { alpha, beta, .. } => format!("{alpha}_{beta}"),
            InputModel::Uniform01 => "uniform".into(),
            InputModel::DeterministicGrid { .. } => "grid".into(),
        }
    }
}

/// A zero-mean, finite-variance intrusion distribution supplied by the caller.
pub trait IntrusionSampler: Send + Sync {
    fn name(&self) -> &str;
    fn sample(&self, rng: &mut SeededRng) -> f64;
    /// `E|ε₂ − ε₁|`, when known in closed form.
    fn mean_abs_difference(&self) -> Option<f64> {
        None
    }
}

/// Distribution of the additive intrusions.
#[derive(Clone)]
pub enum IntrusionModel {
    /// No intrusion: `ε ≡ 0`.
    Degenerate,
    Gaussian { sigma2: f64 },
    Custom(Arc<dyn IntrusionSampler>),
}

impl fmt::Debug for IntrusionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntrusionModel::Degenerate => write!(f, "Degenerate"),
            IntrusionModel::Gaussian { sigma2 } => write!(f, "Gaussian {{ sigma2: {sigma2} }}"),
            IntrusionModel::Custom(s) => write!(f, "Custom({})", s.name()),
        }
    }
}

impl PartialEq for IntrusionModel {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (IntrusionModel::Degenerate, IntrusionModel::Degenerate) => true,
            (IntrusionModel::Gaussian { sigma2: a }, IntrusionModel::Gaussian { sigma2: b }) => a == b,
            (IntrusionModel::Custom(a), IntrusionModel::Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl IntrusionModel {
    pub fn validate(&self) -> Result<()> {
        if let IntrusionModel::Gaussian { sigma2 } = *self {
            if !(sigma2 >= 0.0 && sigma2.is_finite()) {
                return Err(Error::BadParameters(format!("intrusion variance must be >= 0 (got {sigma2})")));
            }
        }
        Ok(())
    }

    pub fn is_degenerate(&self) -> bool {
        match *self {
            IntrusionModel::Degenerate => true,
            IntrusionModel::Gaussian { sigma2 } => sigma2 == 0.0,
            IntrusionModel::Custom(_) => false,
        }
    }

    /// `E|ε₂ − ε₁|`, the per-step growth rate of `B_n / √n` under intrusion.
    /// For `N(0, σ²)` the difference is `N(0, 2σ²)`, giving `2σ/√π`.
    pub fn mean_abs_difference(&self) -> Option<f64> {
        match self {
            IntrusionModel::Degenerate => Some(0.0),
            IntrusionModel::Gaussian { sigma2 } => Some(2.0 * sigma2.sqrt() / PI.sqrt()),
            IntrusionModel::Custom(s) => s.mean_abs_difference(),
        }
    }

    pub fn draw(&self, rng: &mut SeededRng) -> f64 {
        match self {
            IntrusionModel::Degenerate => 0.0,
            IntrusionModel::Gaussian { sigma2 } => {
                let z = rng.standard_normal();
                if *sigma2 == 0.0 {
                    0.0
                } else {
                    sigma2.sqrt() * z
                }
            }
            IntrusionModel::Custom(s) => s.sample(rng),
        }
    }
}

/// `n` inputs from `model`; grid designs ignore the seed.
pub fn sample_inputs(model: &InputModel, n: usize, seed: Seed) -> Result<Vec<f64>> {
    model.validate()?;
    match *model {
        InputModel::DeterministicGrid { a, b } => grid(a, b, n),
        InputModel::Uniform01 => {
            if n == 0 {
                return Err(Error::TooShort { needed: 1, got: 0 });
            }
            let mut rng = seed.input_rng();
            Ok((0..n).map(|_| rng.uniform()).collect())
        }
        InputModel::ScaledBeta { alpha, beta, scale } => {
            if n == 0 {
                return Err(Error::TooShort { needed: 1, got: 0 });
            }
            let mut rng = seed.input_rng();
            Ok((0..n).map(|_| scale * rng.beta(alpha, beta)).collect())
        }
    }
}

/// `x_i = a + (b − a)(i − 1)/(n − 1)` for `i = 1..=n`.
pub fn grid(a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::TooShort { needed: 2, got: n });
    }
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::BadParameters(format!("grid needs a < b (got {a}, {b})")));
    }
    let last = (n - 1) as f64;
    // rounding may push the last point past b
    Ok((0..n).map(|i| (a + (b - a) * i as f64 / last).min(b)).collect())
}

/// The first `n` intrusion variables of the seed's intrusion stream.
pub fn draw_intrusions(model: &IntrusionModel, n: usize, seed: Seed) -> Result<Vec<f64>> {
    model.validate()?;
    let mut rng = seed.intrusion_rng();
    Ok((0..n).map(|_| model.draw(&mut rng)).collect())
}

/// Pairs `(x_i, h(x_i) + ε_i)` with `ε_i` from the intrusion stream.
pub fn generate_outputs(
    h: &TransferFunction,
    x: &[f64],
    intrusion: &IntrusionModel,
    seed: Seed,
) -> Result<PairedSample> {
    let eps = draw_intrusions(intrusion, x.len(), seed)?;
    outputs_with_intrusions(h, x, &eps)
}

/// Pairs `(x_i, h(x_i) + ε_i)` for given intrusions.
pub fn outputs_with_intrusions(h: &TransferFunction, x: &[f64], eps: &[f64]) -> Result<PairedSample> {
    let (a, b) = h.domain();
    if let Some(&bad) = x.iter().find(|&&v| !(a..=b).contains(&v)) {
        return Err(Error::DomainViolation { x: bad, a, b });
    }
    if x.len() != eps.len() {
        return Err(Error::BadParameters("inputs and intrusions differ in length".into()));
    }
    PairedSample::new(x.iter().zip(eps).map(|(&xi, &e)| (xi, h.eval(xi) + e)).collect())
}
