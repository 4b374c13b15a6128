use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use spinchain::chain::BasisState;
use spinchain::compiler::{compile, resolve_block};
use spinchain::experiments::{
    run_protocol_experiment, sweep, write_series_csv, write_states_csv, write_summary_csv, GateTemplate, SweepConfig,
    SweepPoint, SweepRecord,
};
use spinchain::protocols::{blocks, Gate};
use spinchain::{symbolic_verify, ChainConfig, CompositeParams, Error, Execution, IdealGate, SymbolicPhase};

#[derive(Parser)]
#[command(name = "spinchain", version, about = "Pulse compiler and simulator for Ising spin-chain gates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Chain config file (key = value); defaults to L=7, δω=1e4, J=1, k=2.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Larmor-frequency step between neighboring qubits, in units of J.
    #[arg(long, global = true)]
    delta_omega: Option<f64>,
    /// 2πk suppression order of the rf amplitude.
    #[arg(long, global = true)]
    k: Option<u32>,
    /// Output file (sweep: output directory); stdout by default.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Lower a gate to a pulse program.
    Compile {
        #[arg(long)]
        gate: String,
    },
    /// Run a gate on a seeded random superposition and report errors.
    Simulate {
        #[arg(long)]
        gate: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Run a grid of experiments; writes states.csv, summary.csv and series.csv
    /// into --out (a directory).
    Sweep {
        /// e.g. "L=4..7;delta_omega=1e4,2e4;k=2;seed=1;gate=cn 0 last"
        #[arg(long)]
        grid: String,
        /// Run grid points one at a time.
        #[arg(long)]
        sequential: bool,
    },
    /// Exact symbolic check of every elementary protocol in the gate.
    Verify {
        #[arg(long)]
        gate: String,
    },
    /// Print the composite-pulse parameters.
    InspectParams {
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Text,
}

enum Failure {
    /// Output closed early (e.g. piped into `head`).
    Closed,
    Usage(String),
    Io(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Csv(_) => Failure::Io(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::BrokenPipe {
            return Failure::Closed;
        }
        Failure::Io(e.to_string())
    }
}

fn chain(cli: &Cli) -> Result<ChainConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => ChainConfig::from_file(p)?,
        None => ChainConfig::standard(7, 1e4)?,
    };
    if let Some(d) = cli.delta_omega {
        cfg = cfg.with_delta_omega(d)?;
    }
    if let Some(k) = cli.k {
        cfg = cfg.with_k(k)?;
    }
    for a in cfg.advisories() {
        eprintln!("warning: {a}");
    }
    Ok(cfg)
}

/// Gate descriptor; `last` stands for qubit L−1.
fn gate(desc: &str, cfg: &ChainConfig) -> Result<Gate, Failure> {
    Ok(GateTemplate(desc.to_string()).resolve(cfg.len)?)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn format_or(cli: &Cli, default: Format, allowed: &[Format]) -> Result<Format, Failure> {
    let f = cli.format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(Failure::Usage("this subcommand does not support the requested --format".into()))
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = chain(cli)?;
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Compile { gate: desc } => {
            let fmt = format_or(cli, Format::Text, &[Format::Text, Format::Json])?;
            let prog = compile(&gate(desc, &cfg)?, &cfg)?;
            let mut w = output(out)?;
            match fmt {
                Format::Json => writeln!(w, "{}", prog.to_json()?)?,
                _ => write!(w, "{}", prog.to_text())?,
            }
            w.flush()?;
        }
        Command::Simulate { gate: desc, seed } => {
            let fmt = format_or(cli, Format::Json, &[Format::Json, Format::Csv, Format::Text])?;
            let report = run_protocol_experiment(&cfg, &gate(desc, &cfg)?, *seed)?;
            let record = SweepRecord {
                point: SweepPoint {
                    len: cfg.len,
                    delta_omega: cfg.delta_omega,
                    k: cfg.k,
                    seed: *seed,
                    gate: desc.clone(),
                },
                report: Ok(report.clone()),
            };
            let mut w = output(out)?;
            match fmt {
                Format::Json => writeln!(w, "{}", serde_json::to_string_pretty(&record).map_err(Error::from)?)?,
                Format::Csv => write_states_csv(std::slice::from_ref(&record), &mut w)?,
                Format::Text => {
                    writeln!(w, "gate = {desc}")?;
                    writeln!(w, "seed = {seed}")?;
                    writeln!(w, "q_pulse_count = {}", report.q_pulse_count)?;
                    writeln!(w, "mu = {:e}", report.mu)?;
                    writeln!(w, "max_phase_error = {:e} rad", report.max_phase_error)?;
                    writeln!(w, "phase_spread = {:e} rad", report.phase_spread)?;
                    writeln!(w, "max_prob_error = {:e}", report.prob_errors.iter().fold(0.0f64, |m, p| m.max(*p)))?;
                    writeln!(w, "norm_drift = {:e}", report.norm_drift)?;
                }
            }
            w.flush()?;
        }
        Command::Sweep { grid, sequential } => {
            let fmt = format_or(cli, Format::Csv, &[Format::Csv, Format::Json])?;
            let mut grid: SweepConfig = grid.parse()?;
            grid.w = cfg.w;
            grid.j = cfg.j;
            let exec = if *sequential { Execution::Sequential } else { Execution::Parallel };
            let records = sweep(&grid, exec)?;
            let dir = out.unwrap_or(Path::new("."));
            fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
            match fmt {
                Format::Json => {
                    let mut w = output(Some(&dir.join("sweep.json")))?;
                    writeln!(w, "{}", serde_json::to_string_pretty(&records).map_err(Error::from)?)?;
                    w.flush()?;
                }
                _ => {
                    write_states_csv(&records, output(Some(&dir.join("states.csv")))?)?;
                    write_summary_csv(&records, output(Some(&dir.join("summary.csv")))?)?;
                    write_series_csv(&records, output(Some(&dir.join("series.csv")))?)?;
                }
            }
            let failed = records.iter().filter(|r| r.report.is_err()).count();
            eprintln!("{} grid points, {failed} failed", records.len());
        }
        Command::Verify { gate: desc } => {
            let fmt = format_or(cli, Format::Text, &[Format::Text, Format::Json])?;
            verify(&cfg, &gate(desc, &cfg)?, fmt, out)?;
        }
        Command::InspectParams { rho } => {
            format_or(cli, Format::Text, &[Format::Text])?;
            let params = CompositeParams::for_chain(&cfg, *rho)?;
            let mut w = output(out)?;
            write!(w, "{params}")?;
            w.flush()?;
        }
    }
    Ok(())
}

fn verify(cfg: &ChainConfig, g: &Gate, fmt: Format, out: Option<&Path>) -> Result<(), Failure> {
    let mut w = output(out)?;
    let mut seen: Vec<Gate> = Vec::new();
    let mut failed = Vec::new();
    let mut reports = Vec::new();
    for block in blocks(g, cfg.len)? {
        if seen.contains(&block.gate) {
            continue;
        }
        seen.push(block.gate);
        let ideal = IdealGate::new(block.gate, SymbolicPhase::zero());
        let mut report = symbolic_verify(&block.pulses, &ideal, cfg.len, cfg.k)?;
        let mut repaired = false;
        if !report.passed() {
            if let Ok((fixed, _)) = resolve_block(&block, cfg) {
                report = symbolic_verify(&fixed.pulses, &ideal, cfg.len, cfg.k)?;
                repaired = true;
            }
        }
        if fmt == Format::Text {
            writeln!(w, "protocol {} ({} Q pulses, k = {})", block.gate, block.pulses.len(), cfg.k)?;
            if repaired {
                writeln!(w, "  printed phases do not verify for k = {}; showing phase-equalized pulses", cfg.k)?;
            }
            for row in &report.rows {
                let label = BasisState(row.initial).label(cfg.len);
                let status = match (&row.unverifiable, row.relative.first()) {
                    (Some(why), _) => format!("UNVERIFIABLE ({why})"),
                    (None, Some(p)) if row.matches_ideal => format!("phase = {}", p.reduced()),
                    _ => "wrong output state".to_string(),
                };
                writeln!(w, "  |{label}⟩  {status}")?;
            }
            let verdict = if report.passed() { "PASS" } else { "FAIL" };
            match &report.common_phase {
                Some(p) => writeln!(w, "all {} configurations: phase = {p}, {verdict}", report.rows.len())?,
                None => writeln!(w, "all {} configurations: phases differ, {verdict}", report.rows.len())?,
            }
        }
        if !report.passed() {
            failed.push(block.gate.to_string());
        }
        reports.push(report);
    }
    if fmt == Format::Json {
        writeln!(w, "{}", serde_json::to_string_pretty(&reports).map_err(Error::from)?)?;
    }
    w.flush()?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(format!("verification failed for: {}", failed.join(", "))))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            eprintln!("error: {}", msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: "));
            return ExitCode::from(1);
        }
    };
    match run(&cli) {
        Ok(()) | Err(Failure::Closed) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Verification(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
