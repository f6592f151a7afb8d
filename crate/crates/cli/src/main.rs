use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use log::info;

use peelkit::enumerate::EnumerationBound;
use peelkit::harness::{self, Command, ExperimentConfig, ResultBundle};

#[derive(clap::Args, Debug)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Enumeration bound N.
    #[arg(long)]
    bound: Option<u32>,
    /// Strip width.
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Parser, Debug)]
#[command(
    name = "peelkit",
    version,
    about = "Strip peeling experiments on hyperbolic surfaces"
)]
struct Args {
    #[arg(value_parser = ["build", "spectrum", "peel", "metric", "verify"])]
    command: String,
    #[command(flatten)]
    common: Common,
}

const EXIT_INPUT: u8 = 1;
const EXIT_VERIFY: u8 = 2;

fn load(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(n) = common.bound {
        cfg.bound = EnumerationBound::new(n)?;
    }
    if let Some(eps) = common.eps {
        cfg.peel.eps = eps;
    }
    if let Some(out) = &common.out {
        cfg.output_dir = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn report(bundle: &ResultBundle, files: &[PathBuf]) {
    for s in &bundle.surfaces {
        let lengths: Vec<String> = s.boundary_lengths.iter().map(|&l| harness::fmt_sig15(l)).collect();
        println!("{} ({}): boundary [{}]", s.label, s.topology, lengths.join(", "));
    }
    for m in &bundle.metrics {
        println!(
            "{} = {} (argmax {})",
            m.kind.tag(),
            harness::fmt_sig15(m.value),
            m.argmax
        );
    }
    for r in &bundle.verification {
        println!(
            "{}: {} ({} cases, {} failures)",
            r.suite,
            if r.passed() { "PASS" } else { "FAIL" },
            r.cases,
            r.failures
        );
        for c in r.checks.iter().filter(|c| !c.passed) {
            println!(
                "  {} = {} vs {}",
                c.name,
                harness::fmt_sig15(c.value),
                harness::fmt_sig15(c.threshold)
            );
        }
    }
    for (phase, t) in &bundle.timing {
        info!("{phase} took {t:.3?}");
    }
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn run(args: &Args) -> Result<bool> {
    let command: Command = args.command.parse()?;
    let cfg = load(&args.common)?;
    let bundle = harness::run(command, &cfg)?;
    let out = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    let files = harness::write_outputs(&bundle, &out).with_context(|| format!("writing to {}", out.display()))?;
    report(&bundle, &files);
    Ok(bundle.passed())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_INPUT);
        }
    };
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::from(EXIT_VERIFY)
        }
        Err(e) => {
            match e.downcast_ref::<peelkit::error::Error>() {
                Some(pe) => eprintln!("error: {}: {e:#}", pe.kind()),
                None => eprintln!("error: {e:#}"),
            }
            ExitCode::from(EXIT_INPUT)
        }
    }
}
