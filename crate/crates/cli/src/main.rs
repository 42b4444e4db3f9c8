//! One binary wiring the whole workflow: run the certification schedule,
//! re-check stored certificates, query the `phi` bound, emit the bound
//! curves, and work with concrete family pairs.
//!
//! Data goes to stdout (or `--out`); progress and diagnostics go to
//! stderr. Exit status: 0 on success, 1 when a verification fails, 2 on
//! usage or domain errors.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use cancellative::curves;
use cancellative::families::{self, FamilyPair};
use cancellative::phi::{self, Regime};
use cancellative::pipeline;
use cancellative::{BoundCertificate64, PhiQuery64, Schedule64};

#[derive(Parser)]
#[command(name = "cancellative", version, about = "Certified bounds for cancellative pairs of set families")]
struct Cli {
    /// Worker threads for parallel checks (0 = all available cores)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Suppress progress output
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the certification schedule and write the certificate
    Bound {
        /// Number of grid intervals
        #[arg(long, default_value_t = pipeline::DEFAULT_INTERVALS)]
        n_intervals: usize,
        /// Margin each step must clear
        #[arg(long, default_value_t = pipeline::DEFAULT_DELTA)]
        delta: f64,
        /// Right end of the ratio grid
        #[arg(long, default_value_t = pipeline::LAMBDA_CEILING)]
        lambda_max: f64,
        /// Certificate file (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Independently re-verify a stored certificate
    Check {
        cert: PathBuf,
    },
    /// Bound phi(gamma, x); one JSON object per line
    Phi {
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        x: f64,
        /// Also run the grid oracle at this resolution
        #[arg(long)]
        oracle: Option<usize>,
    },
    /// Emit the upper/lower bound curves as CSV
    Curve {
        #[arg(long)]
        cert: PathBuf,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// CSV file (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a family-pair file for the cancellative property
    Verify {
        file: PathBuf,
        /// Also require the recovering property
        #[arg(long)]
        recovering: bool,
    },
    /// Exhaustively search for the maximal pair product
    Search {
        /// Ground-set size
        #[arg(long)]
        n: u32,
        /// Restrict to k-uniform pairs
        #[arg(long)]
        k: Option<u32>,
        /// Write the witness pair to this file
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Write a named construction as a family-pair file
    Construct {
        /// Product of M one-per-class blocks of size 3
        #[arg(long, value_name = "M")]
        triple_blocks: Option<u32>,
        /// Power sets of a split ground set: N and the size of the first part
        #[arg(long, num_args = 2, value_names = ["N", "S1"])]
        powerset_split: Option<Vec<u32>>,
        /// Output file (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        // ignore a second initialization (tests drive main repeatedly)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Bound { n_intervals, delta, lambda_max, out } => {
            cmd_bound(n_intervals, delta, lambda_max, out.as_deref(), cli.quiet)
        }
        Cmd::Check { cert } => cmd_check(&cert),
        Cmd::Phi { gamma, x, oracle } => cmd_phi(gamma, x, oracle),
        Cmd::Curve { cert, samples, out } => cmd_curve(&cert, samples, out.as_deref()),
        Cmd::Verify { file, recovering } => cmd_verify(&file, recovering),
        Cmd::Search { n, k, emit } => cmd_search(n, k, emit.as_deref()),
        Cmd::Construct { triple_blocks, powerset_split, out } => {
            cmd_construct(triple_blocks, powerset_split, out.as_deref())
        }
    }
}

fn cmd_bound(
    n_intervals: usize,
    delta: f64,
    lambda_max: f64,
    out: Option<&Path>,
    quiet: bool,
) -> Result<ExitCode> {
    let schedule = Schedule64::uniform(n_intervals, lambda_max, delta)?;
    let tick = (n_intervals / 20).max(1);
    let cert = pipeline::run_schedule_with(&schedule, |i, step| {
        if !quiet && (i + 1) % tick == 0 {
            eprintln!(
                "interval {}/{}: lambda = {:.6}, rho = {:.9}",
                i + 1,
                n_intervals,
                step.lambda_hi,
                step.rho_out
            );
        }
    })?;
    write_output(out, |mut w| cert.write_text(&mut w))?;
    eprintln!(
        "final_rho = {:.9}, theorem_bound = {}",
        cert.final_rho(),
        cert.theorem_bound()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_check(path: &Path) -> Result<ExitCode> {
    let cert = read_certificate(path)?;
    let report = pipeline::verify_certificate_report(&cert);
    for note in &report.notes {
        eprintln!("note: {note}");
    }
    if report.ok() {
        eprintln!(
            "certificate OK: {} steps, final_rho = {:.9}, theorem_bound = {}",
            cert.steps().len(),
            cert.final_rho(),
            cert.theorem_bound()
        );
        Ok(ExitCode::SUCCESS)
    } else {
        for (step, msg) in &report.failures {
            match step {
                Some(i) => eprintln!("FAIL step {i}: {msg}"),
                None => eprintln!("FAIL: {msg}"),
            }
        }
        let steps = report.failed_steps();
        if !steps.is_empty() {
            eprintln!("failing steps: {steps:?}");
        }
        Ok(ExitCode::from(1))
    }
}

fn cmd_phi(gamma: f64, x: f64, oracle: Option<usize>) -> Result<ExitCode> {
    let query = PhiQuery64::new(gamma, x)?;
    let bound = phi::phi_upper(&query);
    let regime = match bound.regime() {
        Regime::ClosedForm => "closed_form",
        Regime::Infeasible => "infeasible",
        Regime::LagrangianFallback => "lagrangian_fallback",
    };
    let mut obj = json!({
        "gamma": gamma,
        "x": x,
        "regime": regime,
        "value": bound.value().is_finite().then_some(bound.value()),
    });
    if let Some(cert) = bound.certificate() {
        obj["p0"] = json!(cert.p0);
        obj["q0"] = json!(cert.q0);
        obj["kappa"] = json!(cert.kappa);
        obj["psi"] = json!(cert.psi);
    }
    println!("{obj}");
    if let Some(resolution) = oracle {
        if phi::is_feasible(&query) {
            let est = phi::phi_oracle(&query, resolution)?;
            println!(
                "{}",
                json!({
                    "oracle_lower": est.lower,
                    "oracle_upper_hint": est.upper_hint,
                    "resolution": resolution,
                })
            );
        } else {
            eprintln!("oracle skipped: query is infeasible");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_curve(cert_path: &Path, samples: usize, out: Option<&Path>) -> Result<ExitCode> {
    let cert = read_certificate(cert_path)?;
    let report = pipeline::verify_certificate_report(&cert);
    if !report.ok() {
        for (step, msg) in &report.failures {
            match step {
                Some(i) => eprintln!("FAIL step {i}: {msg}"),
                None => eprintln!("FAIL: {msg}"),
            }
        }
        return Ok(ExitCode::from(1));
    }
    let points = curves::emit_curve(&cert, samples)?;
    write_output(out, |mut w| curves::write_csv(&points, &mut w))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(path: &Path, recovering: bool) -> Result<ExitCode> {
    let pair = read_family_pair(path)?;
    let cancellative = pair.is_cancellative();
    println!("cancellative: {cancellative}");
    let mut pass = cancellative;
    if recovering {
        let rec = pair.is_recovering();
        println!("recovering: {rec}");
        pass = pass && rec;
    }
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_search(n: u32, k: Option<u32>, emit: Option<&Path>) -> Result<ExitCode> {
    let result = match k {
        Some(k) => families::exhaustive_max_ck(n, k)?,
        None => families::exhaustive_max_c(n)?,
    };
    println!("value={}", result.value);
    eprintln!(
        "witness: |A| = {}, |B| = {}",
        result.witness.a().len(),
        result.witness.b().len()
    );
    if let Some(path) = emit {
        let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
        result.witness.write_text(&mut w)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_construct(
    triple_blocks: Option<u32>,
    powerset_split: Option<Vec<u32>>,
    out: Option<&Path>,
) -> Result<ExitCode> {
    let pair = match (triple_blocks, powerset_split) {
        (Some(m), None) => families::triple_blocks(m)?,
        (None, Some(args)) => {
            let [n, s1]: [u32; 2] = args
                .try_into()
                .map_err(|_| anyhow::anyhow!("--powerset-split takes exactly two values"))?;
            families::powerset_split(n, s1)?
        }
        _ => bail!("choose exactly one of --triple-blocks or --powerset-split"),
    };
    write_output(out, |mut w| pair.write_text(&mut w))?;
    Ok(ExitCode::SUCCESS)
}

fn read_certificate(path: &Path) -> Result<BoundCertificate64> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let cert = BoundCertificate64::read_text(&mut BufReader::new(file))
        .with_context(|| format!("parsing {}", path.display()))?;
    Ok(cert)
}

fn read_family_pair(path: &Path) -> Result<FamilyPair> {
    let mut text = String::new();
    File::open(path)
        .with_context(|| format!("opening {}", path.display()))?
        .read_to_string(&mut text)?;
    let pair = FamilyPair::read_text(&mut text.as_bytes())
        .with_context(|| format!("parsing {}", path.display()))?;
    Ok(pair)
}

fn write_output<F>(out: Option<&Path>, body: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match out {
        Some(path) => {
            let mut w = BufWriter::new(
                File::create(path).with_context(|| format!("creating {}", path.display()))?,
            );
            body(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            body(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}
