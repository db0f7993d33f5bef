use std::collections::BTreeMap;
use std::ops::Bound::{Excluded, Unbounded};

use ordered_float::OrderedFloat;

use super::{CompensatedSum, PairedSample, StatTriple, Trajectory, TrajectoryPoint};
use crate::error::{Error, Result};

/// Running `Σ(Δ)_+` and `Σ|Δ|` under out-of-order insertion.
///
/// Inserting `x` between neighbours `l < x < r` removes the bridged
/// difference `y_r − y_l` and adds `y_x − y_l` and `y_r − y_x`, so each
/// insert costs one ordered-map lookup.
///
/// Sums are compensated, and each sum snaps back to exactly zero whenever
/// no difference contributes to it, so monotone or flat data cannot leave
/// rounding residue behind.
#[derive(Debug, Clone, Default)]
pub struct IncrementalStats {
    points: BTreeMap<OrderedFloat<f64>, f64>,
    pos: CompensatedSum,
    abs: CompensatedSum,
    n_positive: usize,
    n_nonzero: usize,
}

impl IncrementalStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn add_diff(&mut self, d: f64) {
        if d > 0.0 {
            self.pos.add(d);
            self.n_positive += 1;
        }
        if d != 0.0 {
            self.abs.add(d.abs());
            self.n_nonzero += 1;
        }
    }

    fn remove_diff(&mut self, d: f64) {
        if d > 0.0 {
            self.pos.add(-d);
            self.n_positive -= 1;
        }
        if d != 0.0 {
            self.abs.add(-d.abs());
            self.n_nonzero -= 1;
        }
    }

    /// Adds one observation and returns the statistics of the enlarged set.
    /// On a duplicate `x` the state is left untouched.
    pub fn insert(&mut self, x: f64, y: f64) -> Result<TrajectoryPoint> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::BadParameters(format!("non-finite observation ({x}, {y})")));
        }
        let key = OrderedFloat(x);
        if self.points.contains_key(&key) {
            return Err(Error::DuplicateInput { x });
        }
        let left = self.points.range(..key).next_back().map(|(_, &v)| v);
        let right = self.points.range((Excluded(key), Unbounded)).next().map(|(_, &v)| v);
        if let (Some(l), Some(r)) = (left, right) {
            self.remove_diff(r - l);
        }
        if let Some(l) = left {
            self.add_diff(y - l);
        }
        if let Some(r) = right {
            self.add_diff(r - y);
        }
        if self.n_positive == 0 {
            self.pos.reset();
        }
        if self.n_nonzero == 0 {
            self.abs.reset();
        }
        self.points.insert(key, y);
        Ok(self.current())
    }

    pub fn current(&self) -> TrajectoryPoint {
        let n = self.points.len();
        let pos = self.pos.value();
        let abs = self.abs.value();
        let root = (n as f64).sqrt();
        if n < 2 || self.n_nonzero == 0 {
            return TrajectoryPoint { n, a: 0.0, b: 0.0, i: None };
        }
        TrajectoryPoint { n, a: pos / root, b: abs / root, i: Some(pos / abs) }
    }

    pub fn triple(&self) -> Result<StatTriple> {
        let n = self.len();
        if n < 2 {
            return Err(Error::TooShort { needed: 2, got: n });
        }
        self.current().triple().ok_or(Error::NoVariation)
    }

    /// Raw `(Σ(Δ)_+, Σ|Δ|)`.
    pub fn sums(&self) -> (f64, f64) {
        (self.pos.value(), self.abs.value())
    }
}

/// Same contract as [`super::prefix_trajectory`] but O(log n) per arrival;
/// points agree with batch recomputation to rounding.
pub fn incremental_trajectory(sample: &PairedSample) -> Result<Trajectory> {
    if sample.len() < 2 {
        return Err(Error::TooShort { needed: 2, got: sample.len() });
    }
    let mut state = IncrementalStats::new();
    let mut points = Vec::with_capacity(sample.len() - 1);
    for &(x, y) in sample.pairs() {
        let p = state.insert(x, y)?;
        if p.n >= 2 {
            points.push(p);
        }
    }
    Trajectory::new(points)
}
