//! Command-line front end. Exit status: 0 for success or an affirmative
//! verdict, 1 for a negative verdict, 2 for unreadable or invalid input.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use laminar::complex::{
    collapse_bubble, collapse_confirmed_bubbles, cycle_core, decompose_chains_cycles,
    find_bubble_candidates, find_removable_disks, find_sink_disks, make_efficient,
    BranchedSurfaceComplex, ChainTerminal, SectorId,
};
use laminar::holonomy::rational::{from_decimal, to_text, Q};
use laminar::io::dot::export_dot;
use laminar::io::generators::from_expr;
use laminar::io::{parse, serialize};
use laminar::lamination::{build_lamination_certificate, check_certificate, LaminationCertificate};
use laminar::splitting::{certify_laminar, parse_split_script, run_split_script, LaminarVerdict, Region};

const FIXTURE_ENV: &str = "LAMINAR_FIXTURES";
const CHECK_SAMPLES: usize = 64;

#[derive(Parser)]
#[command(name = "laminar", version, about = "Combinatorial branched surfaces and lamination certificates")]
struct Cli {
    /// Tolerance for sampled holonomy residuals (`p/q`, decimal or `1e-k`).
    #[arg(long, global = true, default_value = "1e-12", value_parser = parse_epsilon)]
    epsilon: Q,
    /// Where to write the produced complex, certificate, DOT text or trace.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check structural invariants and print warnings.
    Validate { input: String },
    /// List sink disks; exits 1 when there is one.
    SinkDisks { input: String },
    /// List removable disks; exits 1 when there is one.
    Removable { input: String },
    /// Delete removable disks until none are left.
    MakeEfficient { input: String },
    /// List bubble candidates and whether each is confirmed trivial.
    Bubbles { input: String },
    /// Collapse confirmed trivial bubbles, or the given pair.
    Collapse {
        input: String,
        /// Collapse this pair, asserting it bounds a trivial bubble.
        #[arg(long, num_args = 2, value_names = ["S1", "S2"])]
        pair: Option<Vec<SectorId>>,
    },
    /// Maximal chain and cycle decomposition of the disk sectors.
    Chains { input: String },
    /// Core annulus or Mobius band of every cycle.
    Cores { input: String },
    /// Build a lamination certificate, or check one with `--check`.
    Laminate {
        /// A complex, or a certificate when checking.
        input: String,
        #[arg(long)]
        check: bool,
    },
    /// Replay a splitting script from a safe region.
    Split {
        input: String,
        #[arg(long)]
        script: PathBuf,
        /// Comma-separated sector ids of the starting safe region.
        #[arg(long, value_delimiter = ',')]
        region: Vec<SectorId>,
    },
    /// DOT graph of the disk out-edges with chains and cycles.
    ExportDot { input: String },
}

fn parse_epsilon(s: &str) -> Result<Q, String> {
    let q = from_decimal(s)?;
    if q <= Q::from_integer(0.into()) {
        return Err("epsilon must be positive".into());
    }
    Ok(q)
}

/// A failure carrying its exit status.
struct Failure {
    code: u8,
    message: String,
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

fn negative(message: impl Into<String>) -> Failure {
    Failure { code: 1, message: message.into() }
}

/// Resolves a path, trying the fixture directory when the path itself is
/// missing.
fn locate(input: &str) -> Result<PathBuf, Failure> {
    let direct = PathBuf::from(input);
    if direct.exists() {
        return Ok(direct);
    }
    if let Ok(dir) = std::env::var(FIXTURE_ENV) {
        let dir = PathBuf::from(dir);
        let stripped = Path::new(input).strip_prefix("fixtures").unwrap_or(Path::new(input));
        for candidate in [dir.join(input), dir.join(stripped)] {
            if candidate.exists() {
                return Ok(candidate);
            }
        }
    }
    Err(input_error(format!("{input}: no such file")))
}

fn read(input: &str) -> Result<String, Failure> {
    let path = locate(input)?;
    std::fs::read_to_string(&path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

/// Reads a complex from a file or a `gen:` expression and validates it.
fn load(input: &str) -> Result<BranchedSurfaceComplex, Failure> {
    let b = if input.starts_with("gen:") {
        from_expr(input).map_err(|e| input_error(format!("{input}: {e}")))?
    } else {
        parse(&read(input)?).map_err(|e| input_error(format!("{input}: {e}")))?
    };
    let problems = b.validate();
    if !problems.is_empty() {
        let lines: Vec<String> = problems.iter().map(|v| format!("  {v}")).collect();
        return Err(input_error(format!("{input}: invalid complex\n{}", lines.join("\n"))));
    }
    Ok(b)
}

fn ids<'a>(it: impl IntoIterator<Item = &'a SectorId>) -> String {
    let v: Vec<String> = it.into_iter().map(ToString::to_string).collect();
    if v.is_empty() {
        "none".into()
    } else {
        v.join(" ")
    }
}

/// Writes to `--out` when given, otherwise prints.
fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| input_error(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { input } => {
            let text = if input.starts_with("gen:") { None } else { Some(read(&input)?) };
            let b = match text {
                Some(t) => parse(&t).map_err(|e| input_error(format!("{input}: {e}")))?,
                None => from_expr(&input).map_err(|e| input_error(format!("{input}: {e}")))?,
            };
            let diagnostics = b.diagnose();
            for d in &diagnostics {
                println!("{d}");
            }
            let errors = b.validate().len();
            if errors > 0 {
                return Err(input_error(format!("{input}: {errors} violation(s)")));
            }
            println!("valid: {} sectors, {} edges, {} vertices", b.sectors.len(), b.edges.len(), b.vertices.len());
        }
        Command::SinkDisks { input } => {
            let found = find_sink_disks(&load(&input)?);
            println!("sink disks: {}", ids(&found));
            if !found.is_empty() {
                return Err(negative(""));
            }
        }
        Command::Removable { input } => {
            let found = find_removable_disks(&load(&input)?);
            println!("removable disks: {}", ids(&found));
            if !found.is_empty() {
                return Err(negative(""));
            }
        }
        Command::MakeEfficient { input } => {
            let steps = make_efficient(&load(&input)?).map_err(|e| negative(e.to_string()))?;
            let deleted: Vec<SectorId> = steps.iter().filter_map(|s| s.deleted).collect();
            eprintln!("deleted: {}", ids(&deleted));
            let last = &steps.last().expect("at least the input").complex;
            emit(&cli.out, &serialize(last))?;
        }
        Command::Bubbles { input } => {
            let b = load(&input)?;
            let found = find_bubble_candidates(&b);
            for (x, y) in &found {
                let state = if b.trivial_bubbles.contains(&(*x, *y)) { "confirmed trivial" } else { "unconfirmed" };
                println!("bubble candidate: {x} {y} ({state})");
            }
            if found.is_empty() {
                println!("bubble candidates: none");
            } else {
                return Err(negative(""));
            }
        }
        Command::Collapse { input, pair } => {
            let b = load(&input)?;
            let result = match pair.as_deref() {
                Some([x, y]) => collapse_bubble(&b, (*x, *y), true),
                _ => collapse_confirmed_bubbles(&b),
            };
            let c = result.map_err(|e| negative(e.to_string()))?;
            emit(&cli.out, &serialize(&c))?;
        }
        Command::Chains { input } => {
            let d = decompose_chains_cycles(&load(&input)?).map_err(|e| negative(e.to_string()))?;
            let mut text = String::new();
            for (disk, edge) in &d.out_edge {
                let _ = writeln!(text, "out-edge {disk} -> {edge}");
            }
            for c in &d.cycles {
                let _ = writeln!(text, "cycle: {}", ids(c));
            }
            for c in &d.chains {
                let (what, s) = match c.terminal {
                    ChainTerminal::Cycle(s) => ("cycle disk", s),
                    ChainTerminal::NonDisk(s) => ("non-disk", s),
                    ChainTerminal::Chain(s) => ("chain disk", s),
                };
                let _ = writeln!(text, "chain: {} -> {what} {s}", ids(&c.disks));
            }
            let _ = writeln!(text, "{} cycle(s), {} chain(s)", d.cycles.len(), d.chains.len());
            emit(&cli.out, &text)?;
        }
        Command::Cores { input } => {
            let b = load(&input)?;
            let d = decompose_chains_cycles(&b).map_err(|e| negative(e.to_string()))?;
            for c in &d.cycles {
                let core = cycle_core(&b, c, &d.out_edge).map_err(|e| negative(e.to_string()))?;
                println!("cycle {}: {:?}, {} tail(s)", ids(c), core.kind, core.tails().len());
            }
            if d.cycles.is_empty() {
                println!("no cycles");
            }
        }
        Command::Laminate { input, check: true } => {
            let cert = LaminationCertificate::from_json(&read(&input)?).map_err(|e| input_error(e.to_string()))?;
            let report = check_certificate(&cert, CHECK_SAMPLES).map_err(|e| negative(e.to_string()))?;
            println!(
                "certificate accepted: {} steps, {} witnesses, max residual {}",
                report.steps,
                report.witnesses,
                to_text(&report.max_residual)
            );
            println!("{}", cert.verdict);
        }
        Command::Laminate { input, check: false } => {
            let b = load(&input)?;
            let cert = build_lamination_certificate(&b, &cli.epsilon).map_err(|e| negative(e.to_string()))?;
            match &cli.out {
                Some(path) => {
                    emit(&cli.out, &cert.to_json())?;
                    eprintln!("certificate written to {}", path.display());
                    println!("{}: {} steps", cert.verdict, cert.steps().len());
                }
                None => println!("{}", cert.to_json()),
            }
        }
        Command::Split { input, script, region } => {
            let b = load(&input)?;
            let text = std::fs::read_to_string(&script)
                .map_err(|e| input_error(format!("{}: {e}", script.display())))?;
            let moves = parse_split_script(&text).map_err(|e| input_error(format!("{}: {e}", script.display())))?;
            let start: Region = region.into_iter().collect();
            let trace = run_split_script(&b, &start, &moves).map_err(|e| match e {
                laminar::splitting::SplitError::UnknownSector(_) => input_error(e.to_string()),
                other => negative(other.to_string()),
            })?;
            for (i, snap) in trace.iter().enumerate() {
                println!("step {i}: {} sectors, safe region {}", snap.complex.sectors.len(), ids(&snap.region));
            }
            if let Some(dir) = &cli.out {
                std::fs::create_dir_all(dir).map_err(|e| input_error(format!("{}: {e}", dir.display())))?;
                for (i, snap) in trace.iter().enumerate() {
                    let path = dir.join(format!("step{i:03}"));
                    std::fs::write(&path, snap.to_text())
                        .map_err(|e| input_error(format!("{}: {e}", path.display())))?;
                }
            }
            let last = trace.last().expect("non-empty trace");
            match certify_laminar(&last.complex, &last.region).map_err(|e| input_error(e.to_string()))? {
                LaminarVerdict::LaminarConditional { .. } => println!("laminar, conditional on the asserted hypotheses"),
                LaminarVerdict::Incomplete { uncovered, missing, .. } => {
                    println!("not certified: uncovered {}; missing {}", ids(&uncovered), missing.join(", "));
                }
                LaminarVerdict::NotSafe { violators } => println!("not safe: {}", ids(&violators)),
            }
        }
        Command::ExportDot { input } => {
            let b = load(&input)?;
            let d = decompose_chains_cycles(&b).map_err(|e| negative(e.to_string()))?;
            emit(&cli.out, &export_dot(&b, &d))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("{}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}
