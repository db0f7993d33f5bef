//! Trend classification of `I_n` and `B_n`, and the rule-of-thumb decision.
//!
//! The decision table:
//!
//! | I_n trend            | B_n trend   | endpoints `h(a) = h(b)` | case          | decision |
//! |----------------------|-------------|-------------------------|---------------|----------|
//! | away, decisive       | any         | not consulted           | `1i`          | absent   |
//! | away, vague          | bounded     | not consulted           | `1ii`         | absent   |
//! | away, vague          | otherwise   | not consulted           | error         |          |
//! | towards 1/2          | growing     | not consulted           | `2i`          | present  |
//! | towards 1/2          | bounded     | not consulted           | `2ii`         | absent   |
//! | towards 1/2          | ambiguous   | differ                  | `2iii_present`| present  |
//! | towards 1/2          | ambiguous   | equal                   | `2iii_rerun`  | rerun on a deterministic grid |

use std::fmt;

use crate::error::{Error, Result};
use crate::fmt::sig12;
use crate::stats::Trajectory;

/// Thresholds that turn "decisively" and "vaguely" into numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrendParams {
    /// Share of the trajectory forming the tail window.
    pub tail_fraction: f64,
    /// Mean `|I − 1/2|` up to which `I_n` counts as approaching one half.
    pub half_band: f64,
    /// Mean `|I − 1/2|` up to which the approach is decisive.
    pub decisive_band: f64,
    /// Window ratio at or above which `B_n` grows decisively.
    pub growth_ratio_hi: f64,
    /// Window ratio at or below which `B_n` is bounded.
    pub growth_ratio_lo: f64,
    pub min_tail_points: usize,
}

impl Default for TrendParams {
    fn default() -> Self {
        Self {
            tail_fraction: 0.25,
            half_band: 0.05,
            decisive_band: 0.02,
            growth_ratio_hi: 1.3,
            growth_ratio_lo: 1.05,
            min_tail_points: 20,
        }
    }
}

impl TrendParams {
    pub fn validate(&self) -> Result<()> {
        let p = self;
        let ok = p.tail_fraction > 0.0
            && p.tail_fraction <= 1.0
            && p.decisive_band > 0.0
            && p.decisive_band < p.half_band
            && p.growth_ratio_lo > 0.0
            && p.growth_ratio_lo < p.growth_ratio_hi
            && p.min_tail_points > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::BadParameters(format!("inconsistent trend parameters: {}", p.describe())))
        }
    }

    /// `key=value` form, echoed into output headers.
    pub fn describe(&self) -> String {
        format!(
            "tail_fraction={} half_band={} decisive_band={} growth_ratio_hi={} growth_ratio_lo={} min_tail_points={}",
            self.tail_fraction,
            self.half_band,
            self.decisive_band,
            self.growth_ratio_hi,
            self.growth_ratio_lo,
            self.min_tail_points
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ITrendKind {
    ToHalfDecisive,
    ToHalfVague,
    AwayDecisive,
    AwayVague,
}

impl ITrendKind {
    pub const ALL: [ITrendKind; 4] = [
        ITrendKind::ToHalfDecisive,
        ITrendKind::ToHalfVague,
        ITrendKind::AwayDecisive,
        ITrendKind::AwayVague,
    ];

    pub fn towards_half(self) -> bool {
        matches!(self, ITrendKind::ToHalfDecisive | ITrendKind::ToHalfVague)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ITrend {
    pub kind: ITrendKind,
    /// Mean `|I_k − 1/2|` over the tail window.
    pub tail_mean_deviation: f64,
    pub tail_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BTrendKind {
    GrowingDecisive,
    BoundedDecisive,
    Ambiguous,
}

impl BTrendKind {
    pub const ALL: [BTrendKind; 3] = [BTrendKind::GrowingDecisive, BTrendKind::BoundedDecisive, BTrendKind::Ambiguous];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BTrend {
    pub kind: BTrendKind,
    /// Mean `B` over the last window divided by mean `B` over the same
    /// window of the half-length trajectory. About `√2` under `√n` growth.
    pub ratio: f64,
    /// Least-squares slope of `B_k` on `√k` over the last window.
    pub slope: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    IntrusionAbsent,
    IntrusionPresent,
    InterruptAndRerunDeterministic,
}

impl Decision {
    pub fn label(self) -> &'static str {
        match self {
            Decision::IntrusionAbsent => "absent",
            Decision::IntrusionPresent => "present",
            Decision::InterruptAndRerunDeterministic => "rerun_deterministic",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Decision::IntrusionAbsent => 0,
            Decision::IntrusionPresent => 10,
            Decision::InterruptAndRerunDeterministic => 20,
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Which branch of the rule produced the decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleCase {
    AwayDecisive,
    AwayVagueBounded,
    HalfGrowing,
    HalfBounded,
    HalfAmbiguousEndpointsDiffer,
    HalfAmbiguousEndpointsEqual,
}

impl RuleCase {
    pub fn label(self) -> &'static str {
        match self {
            RuleCase::AwayDecisive => "1i",
            RuleCase::AwayVagueBounded => "1ii",
            RuleCase::HalfGrowing => "2i",
            RuleCase::HalfBounded => "2ii",
            RuleCase::HalfAmbiguousEndpointsDiffer => "2iii_present",
            RuleCase::HalfAmbiguousEndpointsEqual => "2iii_rerun",
        }
    }

    pub fn decision(self) -> Decision {
        match self {
            RuleCase::AwayDecisive | RuleCase::AwayVagueBounded | RuleCase::HalfBounded => Decision::IntrusionAbsent,
            RuleCase::HalfGrowing | RuleCase::HalfAmbiguousEndpointsDiffer => Decision::IntrusionPresent,
            RuleCase::HalfAmbiguousEndpointsEqual => Decision::InterruptAndRerunDeterministic,
        }
    }
}

impl fmt::Display for RuleCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub decision: Decision,
    pub case: RuleCase,
    pub i_trend: ITrend,
    pub b_trend: BTrend,
    /// Whether `h(a) = h(b)`; `None` when the rule did not consult it.
    pub endpoints_equal: Option<bool>,
    pub rationale: Vec<String>,
}

impl Verdict {
    /// Single-line machine-readable form.
    pub fn record(&self) -> String {
        let endpoint = match self.endpoints_equal {
            Some(true) => "true",
            Some(false) => "false",
            None => "n/a",
        };
        format!(
            "decision={} case={} i_dev={} b_ratio={} endpoint={}",
            self.decision,
            self.case,
            sig12(self.i_trend.tail_mean_deviation),
            sig12(self.b_trend.ratio),
            endpoint
        )
    }

    pub fn exit_code(&self) -> i32 {
        self.decision.exit_code()
    }
}

fn mean(v: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, k) = v.fold((0.0, 0usize), |(s, k), x| (s + x, k + 1));
    (k > 0).then(|| s / k as f64)
}

/// Classifies the approach of `I_n` to one half over the tail window,
/// skipping prefixes where `I` is undefined.
pub fn assess_i_trend(traj: &Trajectory, p: &TrendParams) -> Result<ITrend> {
    p.validate()?;
    let defined: Vec<f64> = traj.points().iter().filter_map(|q| q.i).collect();
    if defined.len() < p.min_tail_points {
        return Err(Error::InsufficientData(format!(
            "{} defined I_n values, need at least {}",
            defined.len(),
            p.min_tail_points
        )));
    }
    let window = p
        .min_tail_points
        .max((p.tail_fraction * defined.len() as f64).ceil() as usize)
        .min(defined.len());
    let tail = &defined[defined.len() - window..];
    let d = mean(tail.iter().map(|i| (i - 0.5).abs())).expect("tail is nonempty");
    let kind = if d <= p.decisive_band {
        ITrendKind::ToHalfDecisive
    } else if d <= p.half_band {
        ITrendKind::ToHalfVague
    } else if d >= 2.0 * p.half_band {
        ITrendKind::AwayDecisive
    } else {
        ITrendKind::AwayVague
    };
    Ok(ITrend { kind, tail_mean_deviation: d, tail_points: window })
}

/// Compares `B` over the last window with `B` over the same window of the
/// half-length trajectory, and fits a slope on `√k` as a sign guard.
pub fn assess_b_trend(traj: &Trajectory, p: &TrendParams) -> Result<BTrend> {
    p.validate()?;
    let pts = traj.points();
    if pts.len() < 2 * p.min_tail_points {
        return Err(Error::InsufficientData(format!(
            "{} trajectory points, need at least {}",
            pts.len(),
            2 * p.min_tail_points
        )));
    }
    let big_n = pts.last().expect("nonempty").n as f64;
    let start = big_n * (1.0 - p.tail_fraction);
    let recent: Vec<(f64, f64)> = pts
        .iter()
        .filter(|q| q.n as f64 > start)
        .map(|q| ((q.n as f64).sqrt(), q.b))
        .collect();
    let earlier = mean(
        pts.iter()
            .filter(|q| q.n as f64 > 0.5 * start && q.n as f64 <= 0.5 * big_n)
            .map(|q| q.b),
    );
    let (Some(recent_mean), Some(earlier_mean)) = (mean(recent.iter().map(|r| r.1)), earlier) else {
        return Err(Error::InsufficientData("empty comparison window for B_n".into()));
    };
    let ratio = if earlier_mean > 0.0 {
        recent_mean / earlier_mean
    } else if recent_mean > 0.0 {
        f64::INFINITY
    } else {
        1.0
    };
    let slope = {
        let sx = mean(recent.iter().map(|r| r.0)).expect("nonempty");
        let (num, den) = recent.iter().fold((0.0, 0.0), |(num, den), &(s, b)| {
            (num + (s - sx) * (b - recent_mean), den + (s - sx) * (s - sx))
        });
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    };
    let kind = if ratio >= p.growth_ratio_hi && slope > 0.0 {
        BTrendKind::GrowingDecisive
    } else if ratio <= p.growth_ratio_lo {
        BTrendKind::BoundedDecisive
    } else {
        BTrendKind::Ambiguous
    };
    Ok(BTrend { kind, ratio, slope })
}

fn describe_i(it: &ITrend) -> String {
    format!(
        "I_n trend {:?}: mean |I_n - 1/2| over the last {} defined points is {}",
        it.kind,
        it.tail_points,
        sig12(it.tail_mean_deviation)
    )
}

fn describe_b(bt: &BTrend) -> String {
    format!(
        "B_n trend {:?}: window ratio {}, slope on sqrt(n) {}",
        bt.kind,
        sig12(bt.ratio),
        sig12(bt.slope)
    )
}

/// Applies the rule of thumb. `endpoint_differs` (whether `h(a) ≠ h(b)`)
/// is only consulted when `I_n` approaches one half and the growth of
/// `B_n` is ambiguous.
pub fn rule_of_thumb(it: &ITrend, bt: &BTrend, endpoint_differs: Option<bool>) -> Result<Verdict> {
    let mut rationale = vec![describe_i(it), describe_b(bt)];
    let mut endpoints_equal = None;
    let case = match (it.kind, bt.kind) {
        (ITrendKind::AwayDecisive, _) => {
            rationale.push("I_n decisively tends to a limit other than 1/2".into());
            RuleCase::AwayDecisive
        }
        (ITrendKind::AwayVague, BTrendKind::BoundedDecisive) => {
            rationale.push("I_n seems to stay away from 1/2 and B_n is bounded".into());
            RuleCase::AwayVagueBounded
        }
        (ITrendKind::AwayVague, _) => {
            // Escalating to the approach-to-1/2 branch would need d <= half_band,
            // which an AwayVague label excludes.
            return Err(Error::InsufficientData(format!(
                "I_n vaguely stays away from 1/2 (mean deviation {}) while B_n is not bounded; \
                 the rule gives no decision here, collect more data",
                sig12(it.tail_mean_deviation)
            )));
        }
        (_, BTrendKind::GrowingDecisive) => {
            rationale.push("I_n approaches 1/2 and B_n grows decisively".into());
            RuleCase::HalfGrowing
        }
        (_, BTrendKind::BoundedDecisive) => {
            rationale.push("I_n approaches 1/2 but B_n is bounded".into());
            RuleCase::HalfBounded
        }
        (_, BTrendKind::Ambiguous) => match endpoint_differs {
            None => return Err(Error::EndpointInfoRequired),
            Some(true) => {
                endpoints_equal = Some(false);
                rationale.push("growth of B_n is ambiguous; h(a) != h(b), so a limit of 1/2 implies intrusion".into());
                RuleCase::HalfAmbiguousEndpointsDiffer
            }
            Some(false) => {
                endpoints_equal = Some(true);
                rationale.push(
                    "growth of B_n is ambiguous and h(a) = h(b); interrupt and rerun on deterministic grid inputs"
                        .into(),
                );
                RuleCase::HalfAmbiguousEndpointsEqual
            }
        },
    };
    Ok(Verdict {
        decision: case.decision(),
        case,
        i_trend: *it,
        b_trend: *bt,
        endpoints_equal,
        rationale,
    })
}

/// Both trend assessments followed by [`rule_of_thumb`].
pub fn detect(traj: &Trajectory, p: &TrendParams, endpoint_differs: Option<bool>) -> Result<Verdict> {
    let it = assess_i_trend(traj, p)?;
    let bt = assess_b_trend(traj, p)?;
    rule_of_thumb(&it, &bt, endpoint_differs)
}
