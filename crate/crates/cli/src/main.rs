//! `pathdec`: generate digraphs, decompose them into paths, verify
//! decompositions and run consistency experiments.

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use pathdec_core::decomposer::{perfect_decompose, verify_paths, DecomposeOptions, Mode};
use pathdec_core::generator::{gen_dnp, gen_example_class};
use pathdec_core::io::{parse_edge_list, parse_paths, write_edge_list, write_paths};
use pathdec_core::oracle::{is_consistent_capped, OracleError, DEFAULT_EDGE_CAP};
use pathdec_core::rng::derive_seed;
use pathdec_core::Digraph;

const EXIT_USAGE: u8 = 64;
const EXIT_NO_INPUT: u8 = 66;

#[derive(Parser)]
#[command(name = "pathdec", version, about = "Decompose digraphs into as few paths as their excess allows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random digraph as an edge list.
    Generate {
        #[arg(long)]
        n: usize,
        /// Edge probability for `dnp`.
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Class::Dnp)]
        class: Class,
        /// Bipartite degree for `example`.
        #[arg(long)]
        t: Option<usize>,
        /// Degree cap of the Eulerian part for `example`.
        #[arg(long, default_value_t = 0)]
        euler_deg: usize,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decompose an edge list into paths.
    Decompose {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ModeArg::Strict)]
        mode: ModeArg,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        cprime: f64,
        /// Print one line per merge to standard error.
        #[arg(long)]
        trace: bool,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a path file against an edge list.
    Verify {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        paths: PathBuf,
    },
    /// Estimate how often D(n, p) has path number equal to its excess.
    Montecarlo {
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        p_list: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Method::Oracle)]
        method: Method,
        /// Largest edge count the exact search accepts.
        #[arg(long, default_value_t = DEFAULT_EDGE_CAP)]
        cap: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Class {
    Dnp,
    Example,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Strict,
    Permissive,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Oracle,
    Constructive,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Oracle => "oracle",
            Method::Constructive => "constructive",
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Generate {
            n,
            p,
            seed,
            class,
            t,
            euler_deg,
            out,
        } => generate(n, p, seed, class, t, euler_deg, out),
        Command::Decompose {
            input,
            seed,
            mode,
            kappa,
            lambda,
            cprime,
            trace,
            out,
        } => {
            let opts = DecomposeOptions {
                mode: match mode {
                    ModeArg::Strict => Mode::Strict,
                    ModeArg::Permissive => Mode::Permissive,
                },
                seed,
                kappa,
                lambda,
                c_prime: cprime,
                trace,
                ..DecomposeOptions::default()
            };
            decompose(&input, &opts, out)
        }
        Command::Verify { graph, paths } => verify(&graph, &paths),
        Command::Montecarlo {
            n_list,
            p_list,
            trials,
            seed,
            method,
            cap,
        } => montecarlo(&n_list, &p_list, trials, seed, method, cap),
    }
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE)
}

fn emit(text: &str, out: Option<PathBuf>) -> ExitCode {
    let result = match out {
        Some(path) => fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(73)
        }
    }
}

fn read_graph(path: &PathBuf) -> Result<Digraph, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_edge_list(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn generate(
    n: usize,
    p: Option<f64>,
    seed: u64,
    class: Class,
    t: Option<usize>,
    euler_deg: usize,
    out: Option<PathBuf>,
) -> ExitCode {
    let d = match class {
        Class::Dnp => {
            let Some(p) = p else {
                return usage("--class dnp needs --p");
            };
            gen_dnp(n, p, seed)
        }
        Class::Example => {
            let Some(t) = t else {
                return usage("--class example needs --t");
            };
            gen_example_class(n, t, euler_deg, seed)
        }
    };
    match d {
        Ok(d) => emit(&write_edge_list(&d), out),
        Err(e) => usage(e),
    }
}

fn decompose(input: &PathBuf, opts: &DecomposeOptions, out: Option<PathBuf>) -> ExitCode {
    let d = match read_graph(input) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_NO_INPUT);
        }
    };
    match perfect_decompose(&d, opts) {
        Ok(run) => {
            for ev in &run.trace {
                eprintln!("{ev}");
            }
            eprint!("{}", run.report);
            emit(&write_paths(&run.decomposition.paths), out)
        }
        Err(report) => {
            eprint!("{report}");
            ExitCode::from(if report.is_verification_failure() { 3 } else { 2 })
        }
    }
}

fn verify(graph: &PathBuf, paths: &PathBuf) -> ExitCode {
    let d = match read_graph(graph) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_NO_INPUT);
        }
    };
    let raw = match fs::read_to_string(paths)
        .map_err(|e| e.to_string())
        .and_then(|t| parse_paths(&t).map_err(|e| e.to_string()))
    {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}: {e}", paths.display());
            return ExitCode::from(EXIT_NO_INPUT);
        }
    };
    let report = verify_paths(&d, &raw);
    print!("{report}");
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

/// Wilson score interval at 95% confidence.
fn wilson(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let n = trials as f64;
    let phat = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (phat + z * z / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

fn trial_seed(seed: u64, n: usize, p: f64, i: usize) -> u64 {
    derive_seed(derive_seed(derive_seed(seed, n as u64), p.to_bits()), i as u64)
}

fn consistent_by_construction(d: &Digraph, seed: u64) -> bool {
    if d.edge_count() == 0 {
        return true;
    }
    let opts = DecomposeOptions {
        mode: Mode::Permissive,
        seed,
        ..DecomposeOptions::default()
    };
    perfect_decompose(d, &opts).is_ok()
}

fn montecarlo(n_list: &[usize], p_list: &[f64], trials: usize, seed: u64, method: Method, cap: usize) -> ExitCode {
    if let Some(p) = p_list.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return usage(format!("p = {p} is not a probability"));
    }
    if matches!(method, Method::Oracle) && cap > 64 {
        return usage("--cap must be at most 64");
    }
    let pool = match std::env::var("PATHDEC_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        Some(k) => rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let pool = match pool {
        Ok(p) => p,
        Err(e) => return usage(e),
    };
    let mut csv = String::from("n,p,trials,fraction,ci_lo,ci_hi,method\n");
    for &n in n_list {
        for &p in p_list {
            let outcomes: Vec<Result<bool, OracleError>> = pool.install(|| {
                (0..trials)
                    .into_par_iter()
                    .map(|i| {
                        let s = trial_seed(seed, n, p, i);
                        let d = gen_dnp(n, p, s).expect("p checked");
                        match method {
                            Method::Oracle => is_consistent_capped(&d, cap),
                            Method::Constructive => Ok(consistent_by_construction(&d, s)),
                        }
                    })
                    .collect()
            });
            if outcomes.iter().any(|r| r.is_err()) {
                csv.push_str(&format!("{n},{p},{trials},skipped,,,{}\n", method.name()));
                continue;
            }
            let hits = outcomes.iter().filter(|r| matches!(r, Ok(true))).count();
            let fraction = if trials == 0 { 0.0 } else { hits as f64 / trials as f64 };
            let (lo, hi) = wilson(hits, trials);
            csv.push_str(&format!("{n},{p},{trials},{fraction:.6},{lo:.6},{hi:.6},{}\n", method.name()));
        }
    }
    emit(&csv, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_interval_brackets_the_estimate() {
        let (lo, hi) = wilson(50, 100);
        assert!(lo < 0.5 && 0.5 < hi);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
        assert_eq!(wilson(0, 10).0, 0.0);
        assert_eq!(wilson(10, 10).1, 1.0);
    }
}
