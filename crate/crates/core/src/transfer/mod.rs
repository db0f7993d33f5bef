//! Static transfer functions `h` on a window `[a, b]`.

pub mod quad;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Absolute tolerance of the variation integrals.
pub const QUAD_TOL: f64 = 1e-10;
/// Intervals in the sign scan of `h'` that precedes quadrature.
pub const SIGN_SCAN_INTERVALS: usize = 1024;
/// Width to which sign changes of `h'` are bisected.
pub const ROOT_WIDTH: f64 = 1e-12;
/// Below this total variation the transfer function counts as flat.
pub const DEGENERATE_VARIATION: f64 = 1e-12;
/// Probe points for the analytic-vs-numeric derivative check.
pub const DERIVATIVE_PROBES: usize = 101;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    /// `1 − (x − 4/5)²`
    Quadratic,
    Identity,
    /// Ascending-degree coefficients.
    Polynomial(Vec<f64>),
    Custom { eval: RealFn, deriv: Option<RealFn> },
}

/// A transfer function `h` with its window `[a, b]`.
///
/// Immutable once built, so it can be shared freely across threads.
#[derive(Clone)]
pub struct TransferFunction {
    name: String,
    a: f64,
    b: f64,
    kind: Kind,
}

impl fmt::Debug for TransferFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("TransferFunction");
        d.field("name", &self.name).field("a", &self.a).field("b", &self.b);
        if let Kind::Polynomial(c) = &self.kind {
            d.field("coeffs", c);
        }
        d.finish()
    }
}

fn check_window(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::BadParameters(format!("transfer window [{a}, {b}] must satisfy a < b")));
    }
    Ok(())
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn horner_deriv(coeffs: &[f64], x: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (k, &c)| acc * x + k as f64 * c)
}

impl TransferFunction {
    /// Names accepted by [`TransferFunction::from_registry`].
    pub const REGISTRY: [&'static str; 3] = ["quadratic", "identity", "polynomial"];

    pub fn quadratic(a: f64, b: f64) -> Result<Self> {
        check_window(a, b)?;
        Ok(Self { name: "quadratic".into(), a, b, kind: Kind::Quadratic })
    }

    pub fn identity(a: f64, b: f64) -> Result<Self> {
        check_window(a, b)?;
        Ok(Self { name: "identity".into(), a, b, kind: Kind::Identity })
    }

    pub fn polynomial(coeffs: Vec<f64>, a: f64, b: f64) -> Result<Self> {
        check_window(a, b)?;
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::BadParameters("polynomial needs finite coefficients".into()));
        }
        Ok(Self { name: "polynomial".into(), a, b, kind: Kind::Polynomial(coeffs) })
    }

    /// Wraps arbitrary closures. Without `deriv`, derivatives fall back to
    /// central differences with step `1e-6·(b − a)`.
    pub fn custom<E, D>(name: impl Into<String>, a: f64, b: f64, eval: E, deriv: Option<D>) -> Result<Self>
    where
        E: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        check_window(a, b)?;
        let h = Self {
            name: name.into(),
            a,
            b,
            kind: Kind::Custom {
                eval: Arc::new(eval),
                deriv: deriv.map(|d| Arc::new(d) as RealFn),
            },
        };
        if let Some(x) = h.probes().find(|&x| !h.eval(x).is_finite()) {
            return Err(Error::BadParameters(format!("{} is not finite at x = {x}", h.name)));
        }
        Ok(h)
    }

    /// Looks up a built-in by name. `coeffs` is only read for `polynomial`.
    pub fn from_registry(name: &str, a: f64, b: f64, coeffs: &[f64]) -> Result<Self> {
        match name {
            "quadratic" => Self::quadratic(a, b),
            "identity" => Self::identity(a, b),
            "polynomial" => Self::polynomial(coeffs.to_vec(), a, b),
            other => Err(Error::UnknownTransfer(other.to_string())),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    /// Polynomial coefficients, if this is a polynomial.
    pub fn coeffs(&self) -> Option<&[f64]> {
        match &self.kind {
            Kind::Polynomial(c) => Some(c),
            _ => None,
        }
    }

    pub fn has_analytic_derivative(&self) -> bool {
        !matches!(self.kind, Kind::Custom { deriv: None, .. })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Quadratic => {
                let d = x - 4.0 / 5.0;
                1.0 - d * d
            }
            Kind::Identity => x,
            Kind::Polynomial(c) => horner(c, x),
            Kind::Custom { eval, .. } => eval(x),
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Quadratic => -2.0 * (x - 4.0 / 5.0),
            Kind::Identity => 1.0,
            Kind::Polynomial(c) => horner_deriv(c, x),
            Kind::Custom { deriv: Some(d), .. } => d(x),
            Kind::Custom { deriv: None, .. } => self.numeric_deriv(x),
        }
    }

    /// Central difference with step `1e-6·(b − a)`.
    pub fn numeric_deriv(&self, x: f64) -> f64 {
        let step = 1e-6 * (self.b - self.a);
        (self.eval(x + step) - self.eval(x - step)) / (2.0 * step)
    }

    fn probes(&self) -> impl Iterator<Item = f64> + '_ {
        let last = (DERIVATIVE_PROBES - 1) as f64;
        (0..DERIVATIVE_PROBES).map(move |k| self.a + (self.b - self.a) * k as f64 / last)
    }

    /// Largest gap between the analytic derivative and central differences
    /// over the probe points.
    pub fn derivative_discrepancy(&self) -> f64 {
        self.probes()
            .map(|x| (self.deriv(x) - self.numeric_deriv(x)).abs())
            .fold(0.0, f64::max)
    }

    /// `x ↦ h(a + b − x)` on the same window.
    pub fn reflected(&self) -> TransferFunction {
        let (a, b) = (self.a, self.b);
        let inner = self.clone();
        let inner_d = self.clone();
        TransferFunction {
            name: format!("{}_reflected", self.name),
            a,
            b,
            kind: Kind::Custom {
                eval: Arc::new(move |x| inner.eval(a + b - x)),
                deriv: Some(Arc::new(move |x| -inner_d.deriv(a + b - x))),
            },
        }
    }

    /// `x ↦ scale·h(x) + shift`.
    pub fn affine(&self, scale: f64, shift: f64) -> TransferFunction {
        let inner = self.clone();
        let inner_d = self.clone();
        TransferFunction {
            name: format!("{}_affine", self.name),
            a: self.a,
            b: self.b,
            kind: Kind::Custom {
                eval: Arc::new(move |x| scale * inner.eval(x) + shift),
                deriv: Some(Arc::new(move |x| scale * inner_d.deriv(x))),
            },
        }
    }

    /// Points where `h'` vanishes or changes sign, found by a scan followed
    /// by bisection, framed by the window endpoints.
    pub fn derivative_breakpoints(&self) -> Vec<f64> {
        let (a, b) = (self.a, self.b);
        let d = |x: f64| self.deriv(x);
        let mut breaks = vec![a];
        let step = (b - a) / SIGN_SCAN_INTERVALS as f64;
        let mut prev_x = a;
        let mut prev = d(a);
        for k in 1..=SIGN_SCAN_INTERVALS {
            let x = if k == SIGN_SCAN_INTERVALS { b } else { a + step * k as f64 };
            let cur = d(x);
            if cur == 0.0 && k < SIGN_SCAN_INTERVALS {
                breaks.push(x);
            } else if prev != 0.0 && cur != 0.0 && (prev > 0.0) != (cur > 0.0) {
                breaks.push(quad::bisect(&d, prev_x, x, ROOT_WIDTH));
            }
            prev_x = x;
            prev = cur;
        }
        breaks.push(b);
        breaks.dedup();
        breaks
    }

    /// Positive and negative variation, `∫(h')_+` and `∫(h')_−`, over `[a, b]`.
    pub fn variation(&self) -> (f64, f64) {
        let breaks = self.derivative_breakpoints();
        let pieces = (breaks.len() - 1) as f64;
        let tol = QUAD_TOL / pieces;
        let mut pos = 0.0;
        let mut neg = 0.0;
        for w in breaks.windows(2) {
            pos += quad::adaptive_simpson(&|x| self.deriv(x).max(0.0), w[0], w[1], tol);
            neg += quad::adaptive_simpson(&|x| (-self.deriv(x)).max(0.0), w[0], w[1], tol);
        }
        (pos, neg)
    }
}

/// The no-intrusion limit `I(h) = ∫(h')_+ / ∫|h'|`: the share of the total
/// variation of `h` that is upward.
pub fn limit_i(h: &TransferFunction) -> Result<f64> {
    let (pos, neg) = h.variation();
    let total = pos + neg;
    if total < DEGENERATE_VARIATION {
        return Err(Error::DegenerateTransfer);
    }
    Ok(pos / total)
}

/// Whether `h(a) = h(b)` within `tol`, by default `1e-9·max(1, |h(a)|)`.
/// Exactly in this case a clean system also drives `I_n` to one half.
pub fn endpoint_equal(h: &TransferFunction, tol: Option<f64>) -> bool {
    let (a, b) = h.domain();
    endpoint_values_equal(h.eval(a), h.eval(b), tol)
}

/// [`endpoint_equal`] for endpoint values supplied directly.
pub fn endpoint_values_equal(ha: f64, hb: f64, tol: Option<f64>) -> bool {
    let tol = tol.unwrap_or(1e-9 * ha.abs().max(1.0));
    (ha - hb).abs() <= tol
}

#[cfg(test)]
mod tests {
    use super::*;

    // Antiderivative oracle: h is increasing on [0, 4/5] and decreasing after.
    fn quadratic_limit_oracle(a: f64, b: f64) -> f64 {
        let h = |x: f64| 1.0 - (x - 0.8) * (x - 0.8);
        let peak = 0.8f64.clamp(a, b);
        let up = h(peak) - h(a);
        let down = h(peak) - h(b);
        up / (up + down)
    }

    #[test]
    fn quadratic_limits() {
        let h = TransferFunction::quadratic(0.0, 1.0).unwrap();
        assert!((quadratic_limit_oracle(0.0, 1.0) - 16.0 / 17.0).abs() < 1e-15);
        assert!((limit_i(&h).unwrap() - 16.0 / 17.0).abs() < 1e-10);
        let h = TransferFunction::quadratic(0.0, 1.6).unwrap();
        assert!((limit_i(&h).unwrap() - 0.5).abs() < 1e-10);
        for &(a, b) in &[(0.1, 0.5), (0.5, 1.4), (-1.0, 3.0), (0.9, 2.0)] {
            let h = TransferFunction::quadratic(a, b).unwrap();
            assert!((limit_i(&h).unwrap() - quadratic_limit_oracle(a, b)).abs() < 1e-10, "[{a}, {b}]");
        }
    }

    #[test]
    fn identity_limit_is_one() {
        for &(a, b) in &[(0.0, 1.0), (-3.0, -1.0), (2.0, 50.0)] {
            let h = TransferFunction::identity(a, b).unwrap();
            assert!((limit_i(&h).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_transfer_is_degenerate() {
        let h = TransferFunction::polynomial(vec![3.0], 0.0, 1.0).unwrap();
        assert_eq!(limit_i(&h), Err(Error::DegenerateTransfer));
    }

    #[test]
    fn cubic_with_two_turning_points() {
        // h = x³ − x on [−1, 1.5]: rises to 2/(3√3), falls to −2/(3√3), rises to 1.875
        let h = TransferFunction::polynomial(vec![0.0, -1.0, 0.0, 1.0], -1.0, 1.5).unwrap();
        let peak = 2.0 / (3.0 * 3f64.sqrt());
        let up = peak + (1.875 + peak);
        let down = 2.0 * peak;
        assert!((limit_i(&h).unwrap() - up / (up + down)).abs() < 1e-10);
    }

    #[test]
    fn endpoint_checks() {
        assert!(endpoint_equal(&TransferFunction::quadratic(0.0, 1.6).unwrap(), None));
        assert!(!endpoint_equal(&TransferFunction::quadratic(0.0, 1.0).unwrap(), None));
        assert!(!endpoint_equal(&TransferFunction::identity(0.0, 1.0).unwrap(), None));
        let h = TransferFunction::quadratic(0.0, 1.0).unwrap();
        assert!((h.eval(0.0) - 0.36).abs() < 1e-15 && (h.eval(1.0) - 0.96).abs() < 1e-15);
        assert!(endpoint_equal(&h, Some(0.7)));
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let fs = [
            TransferFunction::quadratic(0.0, 1.6).unwrap(),
            TransferFunction::identity(-2.0, 2.0).unwrap(),
            TransferFunction::polynomial(vec![1.0, -2.0, 0.5, 0.25], -1.0, 2.0).unwrap(),
        ];
        for h in &fs {
            assert!(h.derivative_discrepancy() < 1e-6, "{}", h.name());
        }
    }

    #[test]
    fn custom_without_derivative_uses_differences() {
        let h = TransferFunction::custom("sine", 0.0, 3.0, f64::sin, None::<fn(f64) -> f64>).unwrap();
        assert!(!h.has_analytic_derivative());
        assert!((h.deriv(1.0) - 1f64.cos()).abs() < 1e-6);
        // ∫(cos)_+ over [0, 3] = 1, ∫(cos)_− = 1 − sin 3
        let expected = 1.0 / (2.0 - 3f64.sin());
        assert!((limit_i(&h).unwrap() - expected).abs() < 1e-8);
    }

    #[test]
    fn custom_must_be_finite() {
        let r = TransferFunction::custom("log", 0.0, 1.0, f64::ln, None::<fn(f64) -> f64>);
        assert!(matches!(r, Err(Error::BadParameters(_))));
    }

    #[test]
    fn registry_lookup() {
        let p = TransferFunction::from_registry("polynomial", 0.0, 1.0, &[1.0, 2.0]).unwrap();
        assert_eq!(p.eval(0.5), 2.0);
        assert!(matches!(
            TransferFunction::from_registry("cubic", 0.0, 1.0, &[]),
            Err(Error::UnknownTransfer(_))
        ));
        assert!(TransferFunction::quadratic(1.0, 1.0).is_err());
    }

    #[test]
    fn scan_catches_root_on_grid_point() {
        // on [0, 1.6] the peak at 0.8 is exactly the middle scan point
        let h = TransferFunction::quadratic(0.0, 1.6).unwrap();
        let br = h.derivative_breakpoints();
        assert_eq!(br.len(), 3);
        assert!((br[1] - 0.8).abs() < 1e-12);
    }
}
