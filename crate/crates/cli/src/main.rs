mod config;
mod plot;

use std::f64::consts::LN_2;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qchannel_core::discretizer::{self, EnergyConstraint, GridSpec};
use qchannel_core::gaussian::{self, GaussianChannelSpec, GaussianStates, OptimalGaussianPrior};
use qchannel_core::{montecarlo, reliability, Error};

use plot::{Chart, Series};

const MAX_GRID: usize = 10_000;

#[derive(Parser, Debug)]
#[command(name = "qchannel", version, about = "Capacities, Holevo quantities and error exponents of bosonic channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form Gaussian-channel capacity and its entropy terms.
    Capacity(CommonArgs),
    /// Photon and discretized Gaussian Holevo quantities against the capacity.
    Equivalence {
        #[command(flatten)]
        common: CommonArgs,
        /// Discretization level.
        #[arg(long, default_value_t = 4)]
        level: usize,
        /// Radius of the discretized disc.
        #[arg(long, default_value_t = 4.0, allow_negative_numbers = true)]
        radius: f64,
    },
    /// Random-coding and expurgated exponents over a rate grid (noise 0).
    Exponents {
        #[command(flatten)]
        common: CommonArgs,
        /// Smallest rate, nats per use [default: capacity / 100].
        #[arg(long, allow_negative_numbers = true)]
        rate_min: Option<f64>,
        /// Largest rate, nats per use [default: capacity].
        #[arg(long, allow_negative_numbers = true)]
        rate_max: Option<f64>,
        /// Number of grid points.
        #[arg(long, default_value_t = 100)]
        rate_count: usize,
    },
    /// Monte Carlo error of random shell codes under square-root decoding.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Code rate, nats per use.
        #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
        rate: f64,
        /// Comma-separated word lengths.
        #[arg(long, value_delimiter = ',', default_value = "4,8,16")]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Shell width: codewords satisfy n E - delta < |x|^2 <= n E.
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        delta: f64,
    },
    /// Holevo quantity of discretized Gaussian priors level by level.
    Discretize {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated discretization levels.
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        levels: Vec<usize>,
        #[arg(long, default_value_t = 4.0, allow_negative_numbers = true)]
        radius: f64,
    },
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// Mean input photon number E.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    energy: f64,
    /// Mean thermal noise photon number N.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    noise: f64,
    /// Fock-space truncation, 8..=512.
    #[arg(long, default_value_t = 64)]
    dim: usize,
    /// Seed for Monte Carlo runs.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Report entropies, rates and exponents in bits instead of nats.
    #[arg(long)]
    bits: bool,
    /// Also write an SVG plot next to the CSV output.
    #[arg(long)]
    plot: bool,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Domain(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Domain(_) => 3,
            Failure::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Domain(m) => write!(f, "{m}"),
            Failure::Io(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_) => Failure::Usage(e.to_string()),
            Error::Io(_) | Error::Csv(_) => Failure::Io(e.to_string()),
            _ => Failure::Domain(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(format!("io error: {e}"))
    }
}

type Outcome = std::result::Result<(), Failure>;

fn usage<T>(msg: impl Into<String>) -> std::result::Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

impl CommonArgs {
    fn validate(&self) -> Outcome {
        if !(8..=512).contains(&self.dim) {
            return usage(format!("--dim must lie in [8, 512], got {}", self.dim));
        }
        if self.plot && self.output.is_none() {
            return usage("--plot needs --output; the SVG is written next to the CSV");
        }
        Ok(())
    }

    fn spec(&self) -> std::result::Result<GaussianChannelSpec, Failure> {
        Ok(GaussianChannelSpec::new(self.noise, self.energy)?)
    }

    fn scale(&self) -> f64 {
        if self.bits {
            LN_2.recip()
        } else {
            1.0
        }
    }

    fn unit(&self) -> &'static str {
        if self.bits {
            "bits"
        } else {
            "nats"
        }
    }

    fn writer(&self) -> std::result::Result<Box<dyn Write>, Failure> {
        Ok(match &self.output {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).map_err(|e| Failure::Io(format!("cannot create {}: {e}", p.display())))?,
            )),
            None => Box::new(io::stdout().lock()),
        })
    }

    fn write_plot(&self, chart: &Chart) -> Outcome {
        if let (true, Some(out)) = (self.plot, &self.output) {
            let path = plot_path(out);
            std::fs::write(&path, chart.to_svg())
                .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?;
        }
        Ok(())
    }
}

fn plot_path(output: &Path) -> PathBuf {
    output.with_extension("svg")
}

/// `count` evenly spaced points on `[lo, hi]`.
fn grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect()
}

fn cmd_capacity(a: &CommonArgs) -> Outcome {
    a.validate()?;
    let spec = a.spec()?;
    let k = a.scale();
    let h_out = gaussian::max_output_entropy(&spec);
    let h_noise = gaussian::thermal_entropy(spec.noise);
    let c = gaussian::gaussian_capacity(&spec);
    let mut w = a.writer()?;
    writeln!(w, "energy,noise,h_output,h_noise,capacity,unit")?;
    writeln!(w, "{},{},{},{},{},{}", spec.budget, spec.noise, h_out * k, h_noise * k, c * k, a.unit())?;
    w.flush()?;
    let top = 2.0 * spec.budget.max(1.0);
    let points = grid(0.0, top, 101)
        .into_iter()
        .map(|e| (e, (gaussian::thermal_entropy(spec.noise + e) - h_noise) * k))
        .collect();
    a.write_plot(&Chart {
        title: format!("Capacity at N = {}", spec.noise),
        x_label: "E".into(),
        y_label: format!("C ({})", a.unit()),
        log_y: false,
        series: vec![Series { label: "C(E)".into(), points }],
    })
}

fn cmd_equivalence(a: &CommonArgs, level: usize, radius: f64) -> Outcome {
    a.validate()?;
    if a.plot {
        return usage("equivalence produces no plot");
    }
    let grid = GridSpec::new(level, radius);
    grid.validate()?;
    let mut report = gaussian::equivalence_check(&a.spec()?, a.dim, &grid)?;
    let k = a.scale();
    report.capacity *= k;
    report.photon_delta_h *= k;
    report.gaussian_delta_h *= k;
    report.max_deviation *= k;
    let mut w = a.writer()?;
    writeln!(w, "{}", gaussian::EquivalenceReport::CSV_HEADER.join(","))?;
    writeln!(w, "{}", report.csv_record().join(","))?;
    w.flush()?;
    Ok(())
}

fn cmd_exponents(a: &CommonArgs, rate_min: Option<f64>, rate_max: Option<f64>, count: usize) -> Outcome {
    a.validate()?;
    if count == 0 {
        return usage("empty rate grid: --rate-count must be at least 1");
    }
    if count > MAX_GRID {
        return usage(format!("--rate-count must be at most {MAX_GRID}, got {count}"));
    }
    if a.noise != 0.0 {
        return Err(Failure::Domain(
            "domain error: closed-form exponents need pure signals, so --noise must be 0".into(),
        ));
    }
    a.spec()?;
    let c = reliability::capacity(a.energy);
    let lo = rate_min.unwrap_or(c / 100.0);
    let hi = rate_max.unwrap_or(c);
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return usage(format!("rate grid needs finite rate-min <= rate-max, got [{lo}, {hi}]"));
    }
    let curve = reliability::exponent_curve(a.energy, &grid(lo, hi, count))?;
    let mut w = a.writer()?;
    curve.write_csv(&mut w, a.bits)?;
    w.flush()?;
    let k = a.scale();
    let series = |label: &str, f: fn(&reliability::ExponentRecord) -> f64| Series {
        label: label.into(),
        points: curve.records.iter().map(|r| (r.rate * k, f(r) * k)).collect(),
    };
    a.write_plot(&Chart {
        title: format!("Error exponents at E = {}", a.energy),
        x_label: format!("R ({})", a.unit()),
        y_label: format!("exponent ({})", a.unit()),
        log_y: false,
        series: vec![series("E_r", |r| r.e_r.value), series("E_ex", |r| r.e_ex.value)],
    })
}

fn cmd_simulate(a: &CommonArgs, rate: f64, n_list: &[usize], trials: usize, delta: f64) -> Outcome {
    a.validate()?;
    if n_list.is_empty() || n_list.contains(&0) {
        return usage("--n-list needs positive word lengths");
    }
    if n_list.len() > MAX_GRID {
        return usage(format!("--n-list may hold at most {MAX_GRID} entries"));
    }
    if trials == 0 {
        return usage("--trials must be at least 1");
    }
    let reports = montecarlo::run_experiment(a.energy, rate, n_list, trials, delta, a.seed)?;
    let mut w = a.writer()?;
    montecarlo::write_reports_csv(&reports, &mut w, a.bits)?;
    w.flush()?;
    let series = |label: &str, f: fn(&montecarlo::MCReport) -> f64| Series {
        label: label.into(),
        points: reports.iter().map(|r| (r.n as f64, f(r))).collect(),
    };
    a.write_plot(&Chart {
        title: format!("Square-root decoding, E = {}, R = {rate}", a.energy),
        x_label: "n".into(),
        y_label: "error probability".into(),
        log_y: true,
        series: vec![
            series("SRM error", |r| r.mean_error),
            series("random-coding bound", |r| r.random_coding_bound),
            series("expurgated bound", |r| r.expurgated_bound),
        ],
    })
}

fn cmd_discretize(a: &CommonArgs, levels: &[usize], radius: f64) -> Outcome {
    a.validate()?;
    if levels.is_empty() {
        return usage("--levels is empty");
    }
    if levels.len() > MAX_GRID {
        return usage(format!("--levels may hold at most {MAX_GRID} entries"));
    }
    let spec = a.spec()?;
    let template = GridSpec::new(levels[0], radius);
    for &l in levels {
        GridSpec { level: l, ..template }.validate()?;
    }
    let prior = OptimalGaussianPrior::new(spec.budget)?;
    let states = GaussianStates::new(spec.noise, a.dim)?;
    let mut report =
        discretizer::convergence_report(&prior, &states, &EnergyConstraint, spec.budget, levels, &template)?;
    if report.degenerate_level_set {
        eprintln!("warning: degenerate level set: the signal entropy is constant on every cell, so entropy slicing had no effect");
    }
    let k = a.scale();
    report.target *= k;
    for row in &mut report.rows {
        row.delta_h *= k;
        row.deficit *= k;
    }
    let mut w = a.writer()?;
    report.write_csv(&mut w)?;
    w.flush()?;
    a.write_plot(&Chart {
        title: format!("Discretization deficit, E = {}, N = {}", spec.budget, spec.noise),
        x_label: "level".into(),
        y_label: format!("deficit ({})", a.unit()),
        log_y: true,
        series: vec![Series {
            label: "target - delta_h".into(),
            points: report.rows.iter().map(|r| (r.level as f64, r.deficit)).collect(),
        }],
    })
}

fn run(cli: Cli) -> Outcome {
    match &cli.command {
        Command::Capacity(a) => cmd_capacity(a),
        Command::Equivalence { common, level, radius } => cmd_equivalence(common, *level, *radius),
        Command::Exponents { common, rate_min, rate_max, rate_count } => {
            cmd_exponents(common, *rate_min, *rate_max, *rate_count)
        }
        Command::Simulate { common, rate, n_list, trials, delta } => {
            cmd_simulate(common, *rate, n_list, *trials, *delta)
        }
        Command::Discretize { common, levels, radius } => cmd_discretize(common, levels, *radius),
    }
}

fn main() -> ExitCode {
    let args = match config::merge(std::env::args().collect()) {
        Ok(a) => a,
        Err(m) => {
            eprintln!("usage error: {m}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("qchannel: {f}");
            ExitCode::from(f.code())
        }
    }
}
