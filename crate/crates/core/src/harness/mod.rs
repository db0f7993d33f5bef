//! Scenario runs, replication studies and their on-disk artifacts.
//!
//! Files written to the output directory:
//!
//! - `<scenario>_<panel>_rep<k>.csv`: trajectory of replication `k`, where
//!   `<panel>` is `<alpha>_<beta>` for beta inputs, `uniform` or `grid`
//! - `<scenario>_report.txt`: replay header, one verdict record per run and
//!   per-panel aggregates

pub mod config;
pub mod presets;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::detector::{detect, TrendParams, Verdict};
use crate::error::{Error, Result};
use crate::fmt::sig12;
use crate::stats::{prefix_trajectory, trajectory_from_designs, Trajectory, TrajectoryPoint};
use crate::stochastic::{
    draw_intrusions, generate_outputs, grid, sample_inputs, InputModel, IntrusionModel, Seed,
};
use crate::transfer::{endpoint_equal, TransferFunction};

pub use config::{from_config, to_config};
pub use presets::{list_presets, preset};

/// A registry transfer function with its window.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferSpec {
    pub name: String,
    pub a: f64,
    pub b: f64,
    pub coeffs: Vec<f64>,
}

impl TransferSpec {
    pub fn build(&self) -> Result<TransferFunction> {
        TransferFunction::from_registry(&self.name, self.a, self.b, &self.coeffs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    /// One trajectory per panel; panels differ only in their input model.
    pub panels: Vec<InputModel>,
    pub transfer: TransferSpec,
    pub intrusion: IntrusionModel,
    pub n_max: usize,
    pub seed: u64,
    pub replications: usize,
    pub params: TrendParams,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.n_max < 2 {
            return Err(Error::Config(format!("n_max must be at least 2 (got {})", self.n_max)));
        }
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.panels.is_empty() {
            return Err(Error::Config("scenario has no input panels".into()));
        }
        let h = self.transfer.build().map_err(|e| Error::Config(e.to_string()))?;
        for p in &self.panels {
            p.validate().map_err(|e| Error::Config(e.to_string()))?;
            if p.support() != h.domain() {
                return Err(Error::Config(format!(
                    "input support {:?} does not match transfer window {:?}",
                    p.support(),
                    h.domain()
                )));
            }
        }
        self.intrusion.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.params.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    /// First 16 hex digits of the SHA-256 of the serialized scenario.
    pub fn hash(&self) -> String {
        let text = to_config(self).unwrap_or_else(|_| format!("{self:?}"));
        Sha256::digest(text.as_bytes())
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Seed for one panel and replication. Panel 0 uses the master seed.
    pub fn seed_for(&self, panel: usize, replication: usize) -> Seed {
        Seed::new(self.seed ^ (panel as u64).wrapping_mul(GOLDEN)).replication(replication as u64)
    }

    pub fn panel_tag(&self, panel: usize) -> String {
        self.panels[panel].tag()
    }

    pub fn csv_file_name(&self, panel: usize, replication: usize) -> String {
        format!("{}_{}_rep{}.csv", self.name, self.panel_tag(panel), replication)
    }

    pub fn report_file_name(&self) -> String {
        format!("{}_report.txt", self.name)
    }

    fn replay_header(&self) -> String {
        format!(
            "scenario={} seed={} hash={} n_max={}",
            self.name,
            self.seed,
            self.hash(),
            self.n_max
        )
    }
}

/// Trajectory and verdict of one panel in one replication.
#[derive(Debug, Clone)]
pub struct PanelRun {
    pub panel: usize,
    pub tag: String,
    pub replication: usize,
    pub seed: Seed,
    pub trajectory: Trajectory,
    pub verdict: Result<Verdict>,
}

impl PanelRun {
    pub fn final_point(&self) -> &TrajectoryPoint {
        self.trajectory.last().expect("trajectories have at least one point")
    }

    fn csv_comments(&self, s: &Scenario) -> Vec<String> {
        vec![
            format!("{} panel={} replication={} seed={}", s.replay_header(), self.tag, self.replication, self.seed),
            format!("params {}", s.params.describe()),
        ]
    }

    fn record_line(&self) -> String {
        let p = self.final_point();
        let i = p.i.map(sig12).unwrap_or_else(|| "undefined".into());
        let verdict = match &self.verdict {
            Ok(v) => v.record(),
            Err(e) => format!("error={e}"),
        };
        format!("rep{} n={} A={} B={} I={} {}", self.replication, p.n, sig12(p.a), sig12(p.b), i, verdict)
    }
}

/// Trajectory of one panel. Random inputs form nested prefixes of a
/// single arrival stream; a grid is rebuilt for every `n` and meets the
/// first `n` intrusions of the stream.
pub fn simulate_trajectory(
    input: &InputModel,
    h: &TransferFunction,
    intrusion: &IntrusionModel,
    n_max: usize,
    seed: Seed,
) -> Result<Trajectory> {
    match *input {
        InputModel::DeterministicGrid { a, b } => {
            let eps = draw_intrusions(intrusion, n_max, seed)?;
            trajectory_from_designs(2..=n_max, |n| {
                let x = grid(a, b, n)?;
                Ok(x.iter().zip(&eps).map(|(&xi, &e)| h.eval(xi) + e).collect())
            })
        }
        _ => {
            let x = sample_inputs(input, n_max, seed)?;
            prefix_trajectory(&generate_outputs(h, &x, intrusion, seed)?)
        }
    }
}

/// Runs every panel of one replication without touching the filesystem.
pub fn simulate_replication(s: &Scenario, replication: usize) -> Result<Vec<PanelRun>> {
    s.validate()?;
    let h = s.transfer.build()?;
    let differs = !endpoint_equal(&h, None);
    (0..s.panels.len())
        .map(|panel| run_panel(s, &h, differs, panel, replication))
        .collect()
}

fn run_panel(s: &Scenario, h: &TransferFunction, differs: bool, panel: usize, replication: usize) -> Result<PanelRun> {
    let seed = s.seed_for(panel, replication);
    let trajectory = simulate_trajectory(&s.panels[panel], h, &s.intrusion, s.n_max, seed)?;
    let verdict = detect(&trajectory, &s.params, Some(differs));
    Ok(PanelRun { panel, tag: s.panel_tag(panel), replication, seed, trajectory, verdict })
}

fn write_csv(dir: &Path, s: &Scenario, run: &PanelRun) -> Result<PathBuf> {
    let path = dir.join(s.csv_file_name(run.panel, run.replication));
    fs::write(&path, run.trajectory.to_csv_string(&run.csv_comments(s)))?;
    Ok(path)
}

/// Result of [`run_scenario`].
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub runs: Vec<PanelRun>,
    pub files: Vec<PathBuf>,
}

/// Replication 0 of every panel: writes one CSV per panel plus the report.
pub fn run_scenario(s: &Scenario, out_dir: &Path) -> Result<ScenarioRun> {
    let runs = simulate_replication(s, 0)?;
    fs::create_dir_all(out_dir)?;
    let mut files = runs.iter().map(|r| write_csv(out_dir, s, r)).collect::<Result<Vec<_>>>()?;
    let report = summarize(s, runs.clone(), 1);
    let path = out_dir.join(s.report_file_name());
    fs::write(&path, report.render())?;
    files.push(path);
    Ok(ScenarioRun { runs, files })
}

/// Least-squares `c` in `B_n ≈ c·√n` over `n ∈ [N/2, N]`.
pub fn growth_constant(traj: &Trajectory) -> Option<f64> {
    let big_n = traj.last()?.n as f64;
    let (num, den) = traj
        .points()
        .iter()
        .filter(|p| p.n as f64 >= 0.5 * big_n)
        .fold((0.0, 0.0), |(num, den), p| (num + p.b * (p.n as f64).sqrt(), den + p.n as f64));
    (den > 0.0).then(|| num / den)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthFit {
    /// Growth constant averaged over replications.
    pub mean_c: f64,
    /// `E|ε₂ − ε₁|`, the theoretical constant.
    pub expected: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone)]
pub struct PanelReport {
    pub tag: String,
    pub runs: Vec<PanelRun>,
    /// Decision labels (and `error`) to counts; sums to the run count.
    pub frequencies: BTreeMap<String, usize>,
    pub growth: Option<GrowthFit>,
}

impl PanelReport {
    pub fn count(&self, label: &str) -> usize {
        self.frequencies.get(label).copied().unwrap_or(0)
    }

    /// Mean of the final `I_n` over runs where it is defined.
    pub fn mean_final_i(&self) -> Option<f64> {
        let v: Vec<f64> = self.runs.iter().filter_map(|r| r.final_point().i).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    /// Mean `|I_n − 1/2|` at sample size `n`.
    pub fn mean_half_deviation_at(&self, n: usize) -> Option<f64> {
        let v: Vec<f64> = self
            .runs
            .iter()
            .filter_map(|r| r.trajectory.at(n).and_then(|p| p.i))
            .map(|i| (i - 0.5).abs())
            .collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }
}

#[derive(Debug, Clone)]
pub struct ReplicationReport {
    pub scenario: Scenario,
    pub replications: usize,
    pub panels: Vec<PanelReport>,
}

impl ReplicationReport {
    pub fn render(&self) -> String {
        let s = &self.scenario;
        let mut out = String::new();
        let mut line = |l: String| {
            out.push_str(&l);
            out.push('\n');
        };
        line(format!("# {} replications={}", s.replay_header(), self.replications));
        line(format!("# params {}", s.params.describe()));
        for p in &self.panels {
            line(format!("panel {}", p.tag));
            for r in &p.runs {
                line(format!("  {}", r.record_line()));
            }
            let freq: Vec<String> = p.frequencies.iter().map(|(k, v)| format!("{k}={v}")).collect();
            line(format!("  frequencies {}", freq.join(" ")));
            if let Some(i) = p.mean_final_i() {
                line(format!("  mean_final_I={}", sig12(i)));
            }
            if let Some(g) = &p.growth {
                line(format!(
                    "  growth_fit c={} expected={} relative_error={}",
                    sig12(g.mean_c),
                    sig12(g.expected),
                    sig12(g.relative_error)
                ));
            }
        }
        out
    }
}

fn summarize(s: &Scenario, runs: Vec<PanelRun>, replications: usize) -> ReplicationReport {
    let expected = s.intrusion.mean_abs_difference().filter(|&c| c > 0.0);
    let panels = (0..s.panels.len())
        .map(|panel| {
            let runs: Vec<PanelRun> = runs.iter().filter(|r| r.panel == panel).cloned().collect();
            let mut frequencies = BTreeMap::new();
            for label in ["absent", "present", "rerun_deterministic", "error"] {
                frequencies.insert(label.to_string(), 0);
            }
            for r in &runs {
                let key = r.verdict.as_ref().map(|v| v.decision.label()).unwrap_or("error");
                *frequencies.get_mut(key).expect("all labels preset") += 1;
            }
            let growth = expected.map(|expected| {
                let cs: Vec<f64> = runs.iter().filter_map(|r| growth_constant(&r.trajectory)).collect();
                let mean_c = cs.iter().sum::<f64>() / cs.len().max(1) as f64;
                GrowthFit { mean_c, expected, relative_error: (mean_c - expected).abs() / expected }
            });
            PanelReport { tag: s.panel_tag(panel), runs, frequencies, growth }
        })
        .collect();
    ReplicationReport { scenario: s.clone(), replications, panels }
}

/// `k` independent replications of every panel, run in parallel. Results
/// do not depend on scheduling. With `out_dir`, every trajectory and the
/// report are written there.
pub fn run_replications(s: &Scenario, k: usize, out_dir: Option<&Path>) -> Result<ReplicationReport> {
    if k == 0 {
        return Err(Error::BadParameters("need at least one replication".into()));
    }
    s.validate()?;
    let h = s.transfer.build()?;
    let differs = !endpoint_equal(&h, None);
    let jobs: Vec<(usize, usize)> = (0..s.panels.len()).flat_map(|p| (0..k).map(move |r| (p, r))).collect();
    let runs = jobs
        .par_iter()
        .map(|&(panel, rep)| run_panel(s, &h, differs, panel, rep))
        .collect::<Result<Vec<_>>>()?;
    let report = summarize(s, runs, k);
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
        report
            .panels
            .par_iter()
            .flat_map(|p| p.runs.par_iter())
            .map(|r| write_csv(dir, s, r).map(|_| ()))
            .collect::<Result<Vec<()>>>()?;
        fs::write(dir.join(s.report_file_name()), report.render())?;
    }
    Ok(report)
}
