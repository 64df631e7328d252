//! `qmpl`: evaluate q-deformed multiple polylogarithms, tabulate them, and
//! run the identity verification suites.
//!
//! Exit codes: 0 success, 1 a verification reported `Fail`, 2 usage or
//! parse error, 3 computation error (domain, divergence, truncation, ...).
//! Errors are printed to stderr as `{"error": {"kind": .., "message": ..}}`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qmpl::harness::{
    eval_command, eval_csv, parse_grid, reports_csv, run_all, run_suite, runs_csv, table_command, table_csv, to_json,
    EvalKind, ModeName, OutputFormat, RunConfig, Suite, TableKind, CONFIG_ENV,
};
use qmpl::noncomm::{verify_ordered_closure, zeta_word_normal_form, OrderedSymbol, ZetaWord};
use qmpl::{Composition, QmplError, Scalar};
use serde_json::json;

#[derive(Parser)]
#[command(name = "qmpl", version, about = "q-deformed multiple polylogarithms and their identities")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalOpts {
    /// TOML file with run defaults.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,
    /// Float precision in bits.
    #[arg(long, global = true)]
    precision: Option<u32>,
    /// Series cutoff K.
    #[arg(long, global = true)]
    trunc: Option<usize>,
    /// Pick the smallest cutoff (at least --trunc) whose tail bound is below this.
    #[arg(long, global = true)]
    tail_target: Option<f64>,
    /// Largest Jackson lattice.
    #[arg(long, global = true)]
    lattice_cap: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Float,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one series.
    Eval {
        /// qmpl, classical or qmzv.
        kind: String,
        /// Composition, e.g. 1,2.
        #[arg(long)]
        comp: String,
        /// Arguments, comma separated; omit for qmzv.
        #[arg(long, default_value = "")]
        z: String,
        #[arg(long)]
        q: Option<String>,
    },
    /// Normal form of a product of ζ_q words, e.g. `zeta "3;2"` or `zeta 3 2`.
    Zeta {
        /// Words with letters separated by `;`; they are multiplied in order.
        words: Vec<String>,
    },
    /// Tabulate over a grid of q.
    Table {
        /// qmzv_grid or limit_sweep.
        kind: String,
        #[arg(long)]
        comp: String,
        #[arg(long, default_value = "")]
        z: String,
        /// Comma-separated q values; `1-2^-4..12` expands to a sweep.
        #[arg(long, default_value = "")]
        grid: String,
    },
    /// Run a verification suite, or `all`.
    Verify {
        suite: String,
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
    /// Check closure of a product of two ordered q-MPLs.
    Closure {
        /// First factor as `comp@vars`, e.g. `1@1` or `1,1@1,2`.
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, default_value_t = 12)]
        degree_cap: u32,
    },
}

enum Failure {
    Usage(QmplError),
    Compute(QmplError),
}

impl From<QmplError> for Failure {
    fn from(e: QmplError) -> Self {
        match e {
            QmplError::Usage(_) | QmplError::Parse(_) => Failure::Usage(e),
            _ => Failure::Compute(e),
        }
    }
}

fn config(g: &GlobalOpts) -> Result<RunConfig, QmplError> {
    let mut cfg = match &g.config {
        Some(p) if !p.as_os_str().is_empty() => RunConfig::load(p)?,
        _ => RunConfig::default(),
    };
    if let Some(m) = g.mode {
        cfg.mode = match m {
            ModeArg::Exact => ModeName::Exact,
            ModeArg::Float => ModeName::Float,
        };
    }
    if let Some(p) = g.precision {
        cfg.precision_bits = p;
    }
    if let Some(k) = g.trunc {
        cfg.trunc = k;
    }
    if let Some(t) = g.tail_target {
        cfg.tail_target = Some(t);
    }
    if let Some(l) = g.lattice_cap {
        cfg.lattice_cap = l;
    }
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(f) = g.format {
        cfg.format = match f {
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Csv => OutputFormat::Csv,
        };
    }
    cfg.validated()
}

fn scalars(text: &str, cfg: &RunConfig) -> Result<Vec<Scalar>, QmplError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| Scalar::parse(s, cfg.scalar_mode()))
        .collect()
}

fn symbol(text: &str) -> Result<OrderedSymbol, QmplError> {
    let (comp, vars) = text
        .split_once('@')
        .ok_or_else(|| QmplError::Parse(format!("expected comp@vars, got '{text}'")))?;
    let comp: Composition = comp.parse()?;
    let vars = vars
        .split(',')
        .map(|v| {
            v.trim()
                .trim_start_matches('z')
                .parse::<u32>()
                .map_err(|_| QmplError::Parse(format!("bad variable id '{v}'")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    OrderedSymbol::from_vars(&comp, &vars)
}

/// Returns the rendered output and whether every check passed.
fn run(cmd: &Command, cfg: &RunConfig) -> Result<(String, bool), Failure> {
    let csv = cfg.format == OutputFormat::Csv;
    match cmd {
        Command::Eval { kind, comp, z, q } => {
            let kind: EvalKind = kind.parse()?;
            let comp: Composition = comp.parse()?;
            let z = scalars(z, cfg)?;
            let q = q.as_deref().map(|s| Scalar::parse(s, cfg.scalar_mode())).transpose()?;
            let out = eval_command(kind, &comp, &z, q.as_ref(), cfg)?;
            Ok((if csv { eval_csv(&out)? } else { to_json(&out)? }, true))
        }
        Command::Zeta { words } => {
            let mut product = ZetaWord::empty();
            for w in words {
                let w: ZetaWord = w.parse()?;
                product.letters.extend(w.letters);
            }
            let normal = zeta_word_normal_form(&product);
            let text = if csv {
                let letters: Vec<String> = normal.letters.iter().map(ToString::to_string).collect();
                format!("q_exponent,letters,text\r\n{},\"{}\",\"{}\"\r\n", normal.q_exponent, letters.join(";"), normal)
            } else {
                to_json(&json!({
                    "input": product.to_string(),
                    "normal_form": normal,
                    "text": normal.to_string(),
                }))?
            };
            Ok((text, true))
        }
        Command::Table { kind, comp, z, grid } => {
            let kind: TableKind = kind.parse()?;
            let comp: Composition = comp.parse()?;
            let z = scalars(z, cfg)?;
            let grid = parse_grid(grid, cfg.scalar_mode())?;
            let t = table_command(kind, &comp, &z, &grid, cfg)?;
            Ok((if csv { table_csv(&t)? } else { to_json(&t)? }, true))
        }
        Command::Verify { suite, count } => {
            let runs = if suite == "all" {
                run_all(*count, cfg)
            } else {
                vec![run_suite(suite.parse::<Suite>()?, *count, cfg)]
            };
            let ok = runs.iter().all(|r| r.all_passed());
            Ok((if csv { runs_csv(&runs)? } else { to_json(&runs)? }, ok))
        }
        Command::Closure { a, b, degree_cap } => {
            let (a, b) = (symbol(a)?, symbol(b)?);
            let report = verify_ordered_closure(&a, &b, *degree_cap)?;
            let ok = report.passed();
            let text = if csv {
                reports_csv("closure", std::slice::from_ref(&report))?
            } else {
                to_json(&report)?
            };
            Ok((text, ok))
        }
    }
}

fn error_json(e: &QmplError) -> String {
    json!({ "error": { "kind": e.kind(), "message": e.to_string() } }).to_string()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match config(&cli.global) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            return ExitCode::from(2);
        }
    };
    match run(&cli.command, &cfg) {
        Ok((text, ok)) => {
            let written = match &cli.global.out {
                Some(p) => std::fs::write(p, &text).map_err(|e| QmplError::Io(format!("{}: {e}", p.display()))),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("{}", error_json(&e));
                return ExitCode::from(3);
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(e)) => {
            eprintln!("{}", error_json(&e));
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("{}", error_json(&e));
            ExitCode::from(3)
        }
    }
}
