//! `intrusion`: command-line front end. Every subcommand parses its
//! arguments, calls the library and formats the result.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use intrusion_core::fmt::sig12;
use intrusion_core::harness::{config, list_presets};
use intrusion_core::io::read_pairs_file;
use intrusion_core::{
    detect, endpoint_equal, endpoint_values_equal, limit_i, prefix_trajectory, preset, run_replications,
    run_scenario, Error, TransferFunction, Trajectory, TrendParams,
};

const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_ENDPOINT: u8 = 66;
const EXIT_DEGENERATE: u8 = 67;
const EXIT_OTHER: u8 = 68;
const EXIT_IO: u8 = 74;

#[derive(Parser)]
#[command(name = "intrusion", version, about = "Detect intrusions in control-system outputs from concomitant statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trajectory of (A_n, B_n, I_n) over the prefixes of an `x,y` file.
    Analyze {
        /// CSV with header `x,y`, rows in arrival order.
        input: PathBuf,
        /// Write the trajectory here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        trend: TrendArgs,
    },
    /// Apply the rule of thumb to an `x,y` file.
    ///
    /// Exit status: 0 absent, 10 present, 20 rerun with deterministic inputs.
    Detect {
        input: PathBuf,
        /// h(a), the transfer function at the left end of its window.
        #[arg(long, requires = "hb", conflicts_with = "transfer")]
        ha: Option<f64>,
        /// h(b), the transfer function at the right end of its window.
        #[arg(long, requires = "ha")]
        hb: Option<f64>,
        #[command(flatten)]
        transfer: OptTransferArgs,
        #[command(flatten)]
        trend: TrendArgs,
    },
    /// Limit of I_n without intrusions for a registered transfer function.
    Limit {
        #[command(flatten)]
        transfer: TransferArgs,
    },
    /// Run a preset or a scenario file and write trajectories and a report.
    Simulate {
        /// Preset name (see `scenarios`).
        #[arg(long, conflicts_with = "config", required_unless_present = "config")]
        scenario: Option<String>,
        /// Scenario file in `key = value` format.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the scenario's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Number of replications; overrides the scenario's count.
        #[arg(long)]
        replications: Option<usize>,
        #[command(flatten)]
        trend: TrendArgs,
    },
    /// List the presets, or print one as a scenario file.
    Scenarios {
        #[arg(long)]
        show: Option<String>,
    },
}

#[derive(Args)]
struct TransferArgs {
    /// Registered transfer function: quadratic, identity or polynomial.
    #[arg(long)]
    transfer: String,
    #[arg(long, allow_negative_numbers = true)]
    a: f64,
    #[arg(long, allow_negative_numbers = true)]
    b: f64,
    /// Polynomial coefficients, ascending degree.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    coeffs: Vec<f64>,
}

impl TransferArgs {
    fn build(&self) -> Result<TransferFunction, Error> {
        TransferFunction::from_registry(&self.transfer, self.a, self.b, &self.coeffs)
    }
}

#[derive(Args)]
struct OptTransferArgs {
    /// Registered transfer function supplying h(a) and h(b).
    #[arg(long, requires_all = ["a", "b"])]
    transfer: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    coeffs: Vec<f64>,
}

/// Trend thresholds. Unset flags keep the defaults shown, or for
/// `simulate` the values of the scenario.
#[derive(Args)]
struct TrendArgs {
    /// Share of the trajectory forming the tail window [default: 0.25]
    #[arg(long)]
    tail_fraction: Option<f64>,
    /// Mean |I - 1/2| counted as approaching one half [default: 0.05]
    #[arg(long)]
    half_band: Option<f64>,
    /// Mean |I - 1/2| counted as a decisive approach [default: 0.02]
    #[arg(long)]
    decisive_band: Option<f64>,
    /// B window ratio for decisive growth [default: 1.3]
    #[arg(long)]
    growth_ratio_hi: Option<f64>,
    /// B window ratio for boundedness [default: 1.05]
    #[arg(long)]
    growth_ratio_lo: Option<f64>,
    /// Minimum tail window length [default: 20]
    #[arg(long)]
    min_tail_points: Option<usize>,
}

impl TrendArgs {
    fn over(&self, base: TrendParams) -> TrendParams {
        TrendParams {
            tail_fraction: self.tail_fraction.unwrap_or(base.tail_fraction),
            half_band: self.half_band.unwrap_or(base.half_band),
            decisive_band: self.decisive_band.unwrap_or(base.decisive_band),
            growth_ratio_hi: self.growth_ratio_hi.unwrap_or(base.growth_ratio_hi),
            growth_ratio_lo: self.growth_ratio_lo.unwrap_or(base.growth_ratio_lo),
            min_tail_points: self.min_tail_points.unwrap_or(base.min_tail_points),
        }
    }

    fn params(&self) -> Result<TrendParams, Error> {
        let p = self.over(TrendParams::default());
        p.validate()?;
        Ok(p)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::DuplicateInput { .. } | Error::TooShort { .. } | Error::Config(_) => EXIT_DATA,
        Error::EndpointInfoRequired => EXIT_ENDPOINT,
        Error::DegenerateTransfer => EXIT_DEGENERATE,
        Error::UnknownPreset(_) | Error::UnknownTransfer(_) | Error::BadParameters(_) => EXIT_USAGE,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_OTHER,
    }
}

fn final_line(t: &Trajectory) -> String {
    match t.last() {
        Some(p) => format!(
            "final n={} A={} B={} I={}",
            p.n,
            sig12(p.a),
            sig12(p.b),
            p.i.map(sig12).unwrap_or_else(|| "undefined".into())
        ),
        None => "final n=0".into(),
    }
}

fn analyze(input: &Path, out: Option<&Path>, trend: &TrendArgs) -> Result<u8, Error> {
    let params = trend.params()?;
    let traj = prefix_trajectory(&read_pairs_file(input)?)?;
    let comments = vec![format!("input={}", input.display()), format!("params {}", params.describe())];
    let stdout = io::stdout();
    match out {
        Some(path) => {
            fs::write(path, traj.to_csv_string(&comments))?;
            println!("{}", final_line(&traj));
        }
        None => {
            let mut w = BufWriter::new(stdout.lock());
            traj.write_csv(&mut w, &comments)?;
            writeln!(w, "# {}", final_line(&traj))?;
            w.flush()?;
        }
    }
    Ok(0)
}

fn detect_cmd(input: &Path, ha: Option<f64>, hb: Option<f64>, t: &OptTransferArgs, trend: &TrendArgs) -> Result<u8, Error> {
    let params = trend.params()?;
    let endpoint_differs = match (ha, hb, &t.transfer) {
        (Some(ha), Some(hb), _) => Some(!endpoint_values_equal(ha, hb, None)),
        (_, _, Some(name)) => {
            let (a, b) = (t.a.expect("clap requires --a"), t.b.expect("clap requires --b"));
            let h = TransferFunction::from_registry(name, a, b, &t.coeffs)?;
            Some(!endpoint_equal(&h, None))
        }
        _ => None,
    };
    let traj = prefix_trajectory(&read_pairs_file(input)?)?;
    let v = detect(&traj, &params, endpoint_differs)?;
    println!("{}", v.record());
    println!("# params {}", params.describe());
    println!("# {}", final_line(&traj));
    for r in &v.rationale {
        println!("#   {r}");
    }
    Ok(v.exit_code() as u8)
}

fn limit(t: &TransferArgs) -> Result<u8, Error> {
    let h = t.build()?;
    let i = limit_i(&h)?;
    println!("I={i:.10}");
    println!("endpoints_equal={}", endpoint_equal(&h, None));
    Ok(0)
}

fn simulate(
    scenario: Option<&str>,
    config_path: Option<&Path>,
    seed: Option<u64>,
    out: &Path,
    replications: Option<usize>,
    trend: &TrendArgs,
) -> Result<u8, Error> {
    let mut s = match (scenario, config_path) {
        (Some(name), _) => preset(name)?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            config::from_config(&text)?
        }
        (None, None) => unreachable!("clap requires --scenario or --config"),
    };
    if let Some(seed) = seed {
        s.seed = seed;
    }
    if let Some(k) = replications {
        s.replications = k;
    }
    s.params = trend.over(s.params);
    s.validate()?;
    if s.replications == 1 {
        let run = run_scenario(&s, out)?;
        for r in &run.runs {
            let record = match &r.verdict {
                Ok(v) => v.record(),
                Err(e) => format!("error={e}"),
            };
            println!("{} {} {}", r.tag, final_line(&r.trajectory), record);
        }
        for f in &run.files {
            println!("wrote {}", f.display());
        }
    } else {
        let report = run_replications(&s, s.replications, Some(out))?;
        print!("{}", report.render());
        println!("wrote {}", out.join(s.report_file_name()).display());
    }
    Ok(0)
}

fn scenarios(show: Option<&str>) -> Result<u8, Error> {
    match show {
        Some(name) => print!("{}", config::to_config(&preset(name)?)?),
        None => {
            for s in list_presets() {
                let tags: Vec<String> = (0..s.panels.len()).map(|k| s.panel_tag(k)).collect();
                println!(
                    "{:<11} inputs={} transfer={}[{},{}] intrusion={:?} seed={}",
                    s.name,
                    tags.join("|"),
                    s.transfer.name,
                    s.transfer.a,
                    s.transfer.b,
                    s.intrusion,
                    s.seed
                );
            }
        }
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Error> {
    match &cli.command {
        Command::Analyze { input, out, trend } => analyze(input, out.as_deref(), trend),
        Command::Detect { input, ha, hb, transfer, trend } => detect_cmd(input, *ha, *hb, transfer, trend),
        Command::Limit { transfer } => limit(transfer),
        Command::Simulate { scenario, config, seed, out, replications, trend } => {
            simulate(scenario.as_deref(), config.as_deref(), *seed, out, *replications, trend)
        }
        Command::Scenarios { show } => scenarios(show.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
