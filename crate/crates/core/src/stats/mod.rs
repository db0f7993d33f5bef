//! Concomitant-difference statistics.
//!
//! Pairs `(x, y)` are sorted by `x`; the reordered `y` values are the
//! concomitants. Over their consecutive differences `Δ` we compute
//!
//! ```text
//! A_n = (1/√n) Σ (Δ)_+      B_n = (1/√n) Σ |Δ|      I_n = A_n / B_n
//! ```
//!
//! Without intrusions `B_n` stays bounded and `I_n` settles at the ratio of
//! positive to total variation of the transfer function. Additive iid noise
//! makes `B_n` grow like `√n` and pulls `I_n` towards one half.

mod incremental;
mod sum;

use std::io::Write;

use crate::error::{Error, Result};
use crate::fmt::sig12;
use crate::transfer::TransferFunction;

pub use incremental::{incremental_trajectory, IncrementalStats};
pub use sum::CompensatedSum;

/// Above this many differences the batch sums switch to compensated summation.
pub const COMPENSATION_THRESHOLD: usize = 10_000;

/// Arrival-ordered `(x, y)` observations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PairedSample {
    pairs: Vec<(f64, f64)>,
}

impl PairedSample {
    /// Rejects empty samples and non-finite values. Ties in `x` are left for
    /// [`concomitant_sort`] to report.
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::TooShort { needed: 1, got: 0 });
        }
        if let Some(&(x, y)) = pairs.iter().find(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::BadParameters(format!("non-finite observation ({x}, {y})")));
        }
        Ok(Self { pairs })
    }

    pub fn from_xy(x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::BadParameters(format!(
                "x and y lengths differ ({} vs {})",
                x.len(),
                y.len()
            )));
        }
        Self::new(x.iter().copied().zip(y.iter().copied()).collect())
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The first `n` arrivals.
    pub fn prefix(&self, n: usize) -> Result<PairedSample> {
        PairedSample::new(self.pairs[..n.min(self.pairs.len())].to_vec())
    }

    pub fn map_y(&self, f: impl Fn(f64) -> f64) -> PairedSample {
        PairedSample {
            pairs: self.pairs.iter().map(|&(x, y)| (x, f(y))).collect(),
        }
    }

    pub fn reversed(&self) -> PairedSample {
        let mut pairs = self.pairs.clone();
        pairs.reverse();
        PairedSample { pairs }
    }
}

/// `y` values reordered by ascending `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcomitantSeries {
    y_ordered: Vec<f64>,
}

impl ConcomitantSeries {
    /// Wraps values that are already in concomitant order.
    pub fn from_ordered(y_ordered: Vec<f64>) -> Self {
        Self { y_ordered }
    }

    pub fn values(&self) -> &[f64] {
        &self.y_ordered
    }

    pub fn len(&self) -> usize {
        self.y_ordered.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y_ordered.is_empty()
    }
}

/// `A_n`, `B_n` and `I_n = A_n / B_n` for a sample of size `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatTriple {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub i: f64,
}

/// One row of a trajectory. `i` is `None` where `B_n = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub i: Option<f64>,
}

impl TrajectoryPoint {
    pub fn triple(&self) -> Option<StatTriple> {
        self.i.map(|i| StatTriple { n: self.n, a: self.a, b: self.b, i })
    }
}

impl From<StatTriple> for TrajectoryPoint {
    fn from(t: StatTriple) -> Self {
        Self { n: t.n, a: t.a, b: t.b, i: Some(t.i) }
    }
}

/// Statistics over growing sample sizes, strictly increasing in `n`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    pub fn new(points: Vec<TrajectoryPoint>) -> Result<Self> {
        if points.windows(2).any(|w| w[0].n >= w[1].n) {
            return Err(Error::BadParameters(
                "trajectory points must have strictly increasing n".into(),
            ));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[TrajectoryPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn last(&self) -> Option<&TrajectoryPoint> {
        self.points.last()
    }

    pub fn at(&self, n: usize) -> Option<&TrajectoryPoint> {
        self.points
            .binary_search_by_key(&n, |p| p.n)
            .ok()
            .map(|k| &self.points[k])
    }

    /// Multiplies every `A` and `B` by `factor`; `I` is unchanged.
    pub fn scaled(&self, factor: f64) -> Trajectory {
        Trajectory {
            points: self
                .points
                .iter()
                .map(|p| TrajectoryPoint { a: p.a * factor, b: p.b * factor, ..*p })
                .collect(),
        }
    }

    /// Writes `n,A,B,I` rows. Each entry of `comments` becomes a leading
    /// `# ` line ahead of the mandatory header.
    pub fn write_csv<W: Write>(&self, mut w: W, comments: &[String]) -> std::io::Result<()> {
        for c in comments {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "n,A,B,I")?;
        for p in &self.points {
            let i = p.i.map(sig12).unwrap_or_default();
            writeln!(w, "{},{},{},{}", p.n, sig12(p.a), sig12(p.b), i)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self, comments: &[String]) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, comments).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is ascii")
    }
}

/// Sorts `y` by ascending `x`.
pub fn concomitant_sort(sample: &PairedSample) -> Result<ConcomitantSeries> {
    let mut pairs = sample.pairs.clone();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::DuplicateInput { x: w[0].0 });
    }
    Ok(ConcomitantSeries {
        y_ordered: pairs.into_iter().map(|(_, y)| y).collect(),
    })
}

/// Sums of positive parts and of absolute values of consecutive differences.
pub(crate) fn difference_sums(y: &[f64]) -> (f64, f64) {
    let diffs = y.windows(2).map(|w| w[1] - w[0]);
    if y.len().saturating_sub(1) > COMPENSATION_THRESHOLD {
        let mut pos = CompensatedSum::new();
        let mut abs = CompensatedSum::new();
        for d in diffs {
            pos.add(d.max(0.0));
            abs.add(d.abs());
        }
        (pos.value(), abs.value())
    } else {
        let mut pos = 0.0;
        let mut abs = 0.0;
        for d in diffs {
            pos += d.max(0.0);
            abs += d.abs();
        }
        (pos, abs)
    }
}

fn point_from_ordered(y: &[f64]) -> TrajectoryPoint {
    let n = y.len();
    let (pos, abs) = difference_sums(y);
    let root = (n as f64).sqrt();
    let a = pos / root;
    let b = abs / root;
    let i = if abs > 0.0 { Some(pos / abs) } else { None };
    TrajectoryPoint { n, a, b, i }
}

/// `A_n`, `B_n` and `I_n` of a concomitant series.
pub fn compute_stats(series: &ConcomitantSeries) -> Result<StatTriple> {
    let n = series.len();
    if n < 2 {
        return Err(Error::TooShort { needed: 2, got: n });
    }
    point_from_ordered(&series.y_ordered)
        .triple()
        .ok_or(Error::NoVariation)
}

/// Statistics of a sample in one call.
pub fn sample_stats(sample: &PairedSample) -> Result<StatTriple> {
    compute_stats(&concomitant_sort(sample)?)
}

/// The no-intrusion reference `B_n^0 = (1/√n) Σ |h(x_(i)) − h(x_(i−1))|`
/// over sorted inputs. Bounded for a transfer function in reasonable order.
pub fn compute_b0(h: &TransferFunction, x_sorted: &[f64]) -> Result<f64> {
    let (a, b) = h.domain();
    if let Some(&x) = x_sorted.iter().find(|&&x| !(a..=b).contains(&x)) {
        return Err(Error::DomainViolation { x, a, b });
    }
    if let Some(w) = x_sorted.windows(2).find(|w| w[0] >= w[1]) {
        return Err(if w[0] == w[1] {
            Error::DuplicateInput { x: w[0] }
        } else {
            Error::BadParameters("inputs must be sorted ascending".into())
        });
    }
    let n = x_sorted.len();
    if n < 2 {
        return Ok(0.0);
    }
    let y: Vec<f64> = x_sorted.iter().map(|&x| h.eval(x)).collect();
    let (_, abs) = difference_sums(&y);
    Ok(abs / (n as f64).sqrt())
}

/// Statistics of every arrival prefix of length `2..=N`.
///
/// Each point is computed exactly as [`compute_stats`] would compute it on
/// that prefix; prefixes with `B_n = 0` carry an undefined `I`.
pub fn prefix_trajectory(sample: &PairedSample) -> Result<Trajectory> {
    let n_total = sample.len();
    if n_total < 2 {
        return Err(Error::TooShort { needed: 2, got: n_total });
    }
    let mut xs: Vec<f64> = Vec::with_capacity(n_total);
    let mut ys: Vec<f64> = Vec::with_capacity(n_total);
    let mut points = Vec::with_capacity(n_total - 1);
    for &(x, y) in sample.pairs() {
        match xs.binary_search_by(|probe| probe.total_cmp(&x)) {
            Ok(_) => return Err(Error::DuplicateInput { x }),
            Err(k) => {
                xs.insert(k, x);
                ys.insert(k, y);
            }
        }
        if ys.len() >= 2 {
            points.push(point_from_ordered(&ys));
        }
    }
    Ok(Trajectory { points })
}

/// Statistics of ordered outputs where each sample size `n` has its own
/// input design, as with an equispaced grid that is rebuilt for every `n`.
pub fn trajectory_from_designs<F>(sizes: impl IntoIterator<Item = usize>, mut ordered_outputs: F) -> Result<Trajectory>
where
    F: FnMut(usize) -> Result<Vec<f64>>,
{
    let mut points = Vec::new();
    for n in sizes {
        let y = ordered_outputs(n)?;
        if y.len() != n {
            return Err(Error::BadParameters(format!("design for n = {n} produced {} outputs", y.len())));
        }
        if n >= 2 {
            points.push(point_from_ordered(&y));
        }
    }
    Trajectory::new(points)
}
