//! `brouwer-lab`: generate instances, compose the reductions, verify each
//! layer exhaustively, and measure solver query counts.
//!
//! Exit codes: 0 when every check passes, 1 on an invariant failure, 2 on
//! usage errors, exceeded caps and I/O errors.

mod experiments;
mod instance;
mod suites;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use brouwer_core::solver::Sampling;
use brouwer_core::toc::enumerate_valid;
use brouwer_core::{Error, GridPoint, Toc, TocSpec};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use experiments::{BenchConfig, SolveConfig, SolverSel};
use instance::{Descriptor, Instance, InstanceArgs, LayerSel, Source, SourceKind};
use suites::Caps;

/// A command failure with its exit code.
#[derive(Debug)]
pub struct Fail {
    code: u8,
    msg: String,
}

impl Fail {
    pub fn usage(msg: impl Into<String>) -> Self {
        Fail {
            code: 2,
            msg: msg.into(),
        }
    }

    pub fn invariant(msg: impl Into<String>) -> Self {
        Fail {
            code: 1,
            msg: msg.into(),
        }
    }
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInstance(_)
            | Error::Inversion(_)
            | Error::Inconsistent(_)
            | Error::OverlapMismatch => Fail::invariant(e.to_string()),
            _ => Fail::usage(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "brouwer-lab",
    version,
    about = "Hard discrete Brouwer instances from Trees-of-Connectors"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a JSON descriptor that rebuilds the instance deterministically.
    Generate {
        #[command(flatten)]
        inst: InstanceArgs,
        /// Layer recorded in the descriptor.
        #[arg(long, value_enum)]
        layer: Option<LayerSel>,
        /// Write every valid ToC of the given shape instead of one instance.
        #[arg(long)]
        enumerate: bool,
        #[arg(long, default_value_t = 100_000)]
        toc_cap: u128,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the exhaustive checks of one layer and print a JSON report.
    Verify {
        #[command(flatten)]
        inst: InstanceArgs,
        /// Defaults to the descriptor's layer, then to zp.
        #[arg(long, value_enum)]
        layer: Option<LayerSel>,
        #[arg(long, default_value_t = 10_000_000)]
        max_cells: u64,
        /// Negate the Brouwer value at this point, e.g. `3,5`.
        #[arg(long, value_name = "POINT")]
        flip: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize the reduction chain: sides, starts, ends and the zero.
    Reduce {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a solver and print one JSON line per repetition.
    Solve {
        #[command(flatten)]
        inst: InstanceArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value_t = 1)]
        reps: u64,
        /// Seed of the sampling stream; repetition `k` uses stream `k`.
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
        /// Include wall-clock times, which makes output nondeterministic.
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solver query counts over a range of sizes, as CSV.
    Bench {
        #[arg(long, value_enum, default_value = "toc")]
        source: SourceKind,
        /// Comma-separated sizes.
        #[arg(long, value_delimiter = ',', default_value = "2,3")]
        n: Vec<i64>,
        #[arg(long)]
        d: Option<usize>,
        /// Instances per size, with seeds `seed, seed+1, ...`.
        #[arg(long, default_value_t = 5)]
        reps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        cycles: usize,
        #[command(flatten)]
        solver: SolverArgs,
        /// Emit one mean/median row per size instead of one row per run.
        #[arg(long)]
        aggregate: bool,
        /// Worker threads; defaults to the available parallelism.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Drive random ToC queries and check the tail-balance bound after each.
    Keylemma {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        d: usize,
        /// Threshold slack; defaults to `24^-d`.
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        reps: u64,
        #[arg(long, default_value_t = 100_000)]
        toc_cap: u128,
        /// Include every knowledge state in the output.
        #[arg(long)]
        records: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print `S[T]` or `Q[T]` in the text format, or check a string file.
    Strings {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, value_enum, default_value = "s")]
        which: WhichSel,
        /// Check this file instead of printing.
        #[arg(long, value_name = "FILE")]
        check: Option<PathBuf>,
        /// With --check, also compare the file with the instance's string.
        #[arg(long = "match", requires = "check")]
        match_instance: bool,
        #[arg(long, default_value_t = 10_000_000)]
        max_cells: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, clap::Args)]
struct SolverArgs {
    #[arg(long, value_enum, default_value = "brute")]
    solver: SolverSel,
    /// Defaults to zp for brute and sample, cgp for follow.
    #[arg(long, value_enum)]
    layer: Option<LayerSel>,
    /// Sample budget.
    #[arg(long, default_value_t = 1000)]
    budget: u64,
    /// Sample with replacement.
    #[arg(long)]
    replacement: bool,
    /// Disable the answer caches; lower-layer counts then include repeats.
    #[arg(long)]
    no_cache: bool,
}

impl SolverArgs {
    fn config(&self) -> SolveConfig {
        SolveConfig {
            solver: self.solver,
            layer: self.layer.unwrap_or(self.solver.default_layer()),
            budget: self.budget,
            sampling: if self.replacement {
                Sampling::WithReplacement
            } else {
                Sampling::WithoutReplacement
            },
            cache: !self.no_cache,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum WhichSel {
    S,
    Q,
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Fail> {
    let res = match out {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    res.map_err(|e| Fail::usage(format!("writing output: {e}")))
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn json_line<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string(v).expect("records serialize");
    s.push('\n');
    s
}

fn csv_text<T: Serialize>(rows: &[T]) -> Result<String, Fail> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)
            .map_err(|e| Fail::usage(format!("csv: {e}")))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Fail::usage(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn parse_point(s: &str) -> Result<GridPoint, Fail> {
    let s = s.trim();
    let wrapped = if s.starts_with('(') {
        s.to_string()
    } else {
        format!("({s})")
    };
    wrapped
        .parse()
        .map_err(|e: Error| Fail::usage(format!("--flip: {e}")))
}

/// The command-line spelling of a value-enum variant.
pub fn flag_name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value()
        .map_or_else(String::new, |p| p.get_name().to_string())
}

/// `Ok(false)` means some check failed.
fn run(cmd: Cmd) -> Result<bool, Fail> {
    match cmd {
        Cmd::Generate {
            inst,
            layer,
            enumerate,
            toc_cap,
            out,
        } => {
            let mut desc = inst.descriptor()?;
            desc.layer = layer.or(desc.layer);
            if enumerate {
                let Source::Toc(t) = &desc.source else {
                    return Err(Fail::usage("--enumerate needs --source toc"));
                };
                let all = enumerate_valid(TocSpec::new(t.n, t.d)?, toc_cap)?;
                let descs: Vec<Descriptor> = all
                    .iter()
                    .map(|toc| Descriptor {
                        source: Source::Toc(toc.descriptor()),
                        layer: desc.layer,
                    })
                    .collect();
                emit(out.as_deref(), &json(&descs))?;
            } else {
                Instance::load(&desc)?;
                emit(out.as_deref(), &json(&desc))?;
            }
            Ok(true)
        }
        Cmd::Verify {
            inst,
            layer,
            max_cells,
            flip,
            out,
        } => {
            let desc = inst.descriptor()?;
            let layer = layer.or(desc.layer).unwrap_or(LayerSel::Zp);
            let flip = flip.as_deref().map(parse_point).transpose()?;
            let report = suites::verify(&desc, layer, &Caps { max_cells }, flip)?;
            emit(out.as_deref(), &json(&report))?;
            Ok(report.pass)
        }
        Cmd::Reduce { inst, out } => {
            let summary = experiments::reduce(&inst.descriptor()?)?;
            emit(out.as_deref(), &json(&summary))?;
            Ok(summary.consistent)
        }
        Cmd::Solve {
            inst,
            solver,
            reps,
            rng_seed,
            timing,
            out,
        } => {
            let desc = inst.descriptor()?;
            let instance = Instance::load(&desc)?;
            let cfg = solver.config();
            cfg.check(&instance)?;
            let mut text = String::new();
            let mut all_ok = true;
            for rep in 0..reps {
                let mut rec = experiments::solve_once(&instance, &cfg, rep, rng_seed)?;
                if !timing {
                    rec.wall_time_s = None;
                }
                // A sampler that runs out of budget has not failed a check.
                all_ok &= rec.success || cfg.solver == SolverSel::Sample;
                text.push_str(&json_line(&rec));
            }
            emit(out.as_deref(), &text)?;
            Ok(all_ok)
        }
        Cmd::Bench {
            source,
            n,
            d,
            reps,
            seed,
            cycles,
            solver,
            aggregate,
            jobs,
            out,
        } => {
            let cfg = BenchConfig {
                source,
                ns: n,
                d,
                cycles,
                first_seed: seed,
                reps,
                jobs: jobs
                    .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |p| p.get())),
                solve: solver.config(),
            };
            let rows = experiments::bench(&cfg)?;
            let text = if aggregate {
                csv_text(&experiments::aggregate(&rows, &cfg))?
            } else {
                csv_text(&rows)?
            };
            emit(out.as_deref(), &text)?;
            Ok(true)
        }
        Cmd::Keylemma {
            n,
            d,
            beta,
            steps,
            seed,
            reps,
            toc_cap,
            records,
            out,
        } => {
            let spec = TocSpec::new(n, d)?;
            let beta = beta.unwrap_or_else(|| 24f64.powi(-(d as i32)));
            let summaries =
                experiments::keylemma(spec, beta, steps, seed..seed + reps, toc_cap, records)?;
            let text: String = summaries.iter().map(json_line).collect();
            emit(out.as_deref(), &text)?;
            Ok(summaries.iter().all(|s| s.violations.is_empty()))
        }
        Cmd::Strings {
            inst,
            which,
            check,
            match_instance,
            max_cells,
            out,
        } => {
            let desc = inst.descriptor()?;
            let Source::Toc(t) = &desc.source else {
                return Err(Fail::usage("strings needs --source toc"));
            };
            let toc = Toc::from_descriptor(t)?;
            let caps = Caps { max_cells };
            match check {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| Fail::usage(format!("{}: {e}", path.display())))?;
                    let report =
                        suites::check_string_text(&text, match_instance.then_some(&toc), &caps)?;
                    emit(out.as_deref(), &json(&report))?;
                    Ok(report.pass)
                }
                None => {
                    if !toc.is_valid() {
                        return Err(Fail::invariant("the ToC is not valid"));
                    }
                    let s = match which {
                        WhichSel::S => brouwer_core::toc::build_s(&toc)?,
                        WhichSel::Q => brouwer_core::toc::build_q(&toc)?,
                    };
                    emit(out.as_deref(), &s.to_text(toc.spec().d))?;
                    Ok(true)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("brouwer-lab: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
