//! `chordwalk`: run flux-constant experiments and print one record per trial.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use chordwalk::{
    emit, estimate_speed, run_experiment, Dimension, Error, ExperimentConfig, Mode, OutputFormat, SampleMode,
    SpeedEstimateInput,
};
use clap::Parser;

const EXIT_USAGE: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "chordwalk", version, about = "Estimate the boundary-flux constant K by random walks")]
struct Args {
    /// ball_walk, chords, equivalence, s2_cap or speed
    #[arg(long, default_value = "ball_walk")]
    mode: Mode,

    /// Dimensions, e.g. `1-10`, `2,3,5` or `1..4,8`
    #[arg(long, default_value = "1-10", value_parser = parse_dims)]
    dims: Dims,

    #[arg(long, default_value_t = 20)]
    trials: u32,

    #[arg(long, default_value_t = 20_000)]
    walkers: u64,

    #[arg(long, default_value_t = 2_000)]
    steps: u64,

    #[arg(long, default_value_t = 0.01)]
    dt: f64,

    #[arg(long, default_value_t = 1.0)]
    radius: f64,

    /// Cap colatitude in radians (s2_cap mode)
    #[arg(long)]
    theta: Option<f64>,

    #[arg(long, default_value_t = 1993)]
    seed: u64,

    #[arg(long, default_value = "direct")]
    sample_mode: SampleMode,

    /// Threads used inside each trial; output does not depend on it
    #[arg(long, default_value_t = 1)]
    workers: usize,

    #[arg(long, default_value = "csv")]
    format: OutputFormat,

    /// Output file; standard output when absent
    #[arg(long)]
    out: Option<PathBuf>,

    /// Record wall-clock time per trial
    #[arg(long)]
    timing: bool,

    /// Observed capture count; with the three flags below, speed mode
    /// inverts field data instead of simulating
    #[arg(long, requires_all = ["density", "trap_area", "duration"])]
    trapped: Option<f64>,

    #[arg(long)]
    density: Option<f64>,

    #[arg(long)]
    trap_area: Option<f64>,

    #[arg(long)]
    duration: Option<f64>,
}

#[derive(Clone, Debug)]
struct Dims(Vec<Dimension>);

fn parse_dims(s: &str) -> Result<Dims, String> {
    let mut dims = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bounds = part
            .split_once("..=")
            .or_else(|| part.split_once(".."))
            .or_else(|| part.split_once('-'));
        let (lo, hi) = match bounds {
            Some((a, b)) => (parse_dim(a)?, parse_dim(b)?),
            None => {
                let n = parse_dim(part)?;
                (n, n)
            }
        };
        if lo > hi {
            return Err(format!("empty range `{part}`"));
        }
        for n in lo..=hi {
            dims.push(Dimension::new(n).map_err(|e| e.to_string())?);
        }
    }
    if dims.is_empty() {
        return Err("no dimensions given".into());
    }
    Ok(Dims(dims))
}

fn parse_dim(s: &str) -> Result<u32, String> {
    s.trim().parse().map_err(|_| format!("`{s}` is not a dimension"))
}

fn is_usage(err: &Error) -> bool {
    matches!(
        err,
        Error::Config(_) | Error::Domain(_) | Error::NonPositive { .. } | Error::DimensionOutOfRange(_)
    )
}

fn open_output(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", p.display())))?;
            Box::new(BufWriter::new(file))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(args: Args) -> Result<(), Error> {
    if let Some(m) = args.trapped {
        if args.mode != Mode::Speed {
            return Err(Error::Config("--trapped is only meaningful with --mode speed".into()));
        }
        let dimension = match args.dims.0.as_slice() {
            [d] => *d,
            _ => Dimension::new(3)?,
        };
        let c = estimate_speed(&SpeedEstimateInput {
            m,
            rho: args.density.expect("required by clap"),
            area: args.trap_area.expect("required by clap"),
            t: args.duration.expect("required by clap"),
            dimension,
        })?;
        let mut out = open_output(&args.out)?;
        writeln!(out, "{}", chordwalk::report::fmt_sig9(c))?;
        out.flush()?;
        return Ok(());
    }

    let config = ExperimentConfig {
        mode: args.mode,
        dims: args.dims.0,
        trials: args.trials,
        walkers: args.walkers,
        steps: args.steps,
        dt: args.dt,
        radius: args.radius,
        theta: args.theta,
        seed: args.seed,
        sample_mode: args.sample_mode,
        workers: args.workers,
        output: args.format,
        timing: args.timing,
    };
    config.validate()?;
    // open before the run so a bad path fails fast
    let mut out = open_output(&args.out)?;
    let records = run_experiment(&config)?;
    emit(&records, config.output, &mut out)?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("chordwalk: {e}");
            ExitCode::from(if is_usage(&e) { EXIT_USAGE } else { EXIT_RUNTIME })
        }
    }
}
