//! Command-line front end: monomial listings, count tables, consequence
//! matrices, the submaximal-rank search, and family classification.
//!
//! Exit codes: 0 success, 1 usage error, 2 verification failure
//! (classification gap), 3 internal error.

mod manifest;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde_json::json;

use opident_core::consequences::{build_matrix, build_template};
use opident_core::families::{
    builtin, classify_solutions, param_grid, parse_templates_jsonl, CoverageReport,
};
use opident_core::monomials::{count_monomials, enumerate_monomials};
use opident_core::operad::OperatorPolynomial;
use opident_core::search::{
    read_solutions_csv, run_search, write_solutions_csv, GcdFilter, ScreenMode, SearchConfig,
    DEFAULT_SCREENING_PRIME, DEFAULT_SPECIALIZATION_PRIME,
};

use manifest::RunManifest;

const EXIT_USAGE: i32 = 1;
const EXIT_VERIFICATION: i32 = 2;
const EXIT_INTERNAL: i32 = 3;

#[derive(Parser)]
#[command(
    name = "opident",
    version,
    about = "Exact enumeration and rank screening of operator identities on n-ary associative algebras"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the operator monomials of one (arity, degree, multiplicity)
    /// in lex order with 1-based indices and Dyck words.
    Monomials(MonomialsArgs),
    /// Print the monomial count triangle N(weight, multiplicity).
    Narayana(NarayanaArgs),
    /// Emit the matrix of consequences, symbolic or at a coefficient vector.
    Matrix(MatrixArgs),
    /// Exhaustive search for coefficient vectors of submaximal rank.
    Search(SearchArgs),
    /// Verify solutions against family templates (exit 2 on any gap).
    Classify(ClassifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ListFormat {
    Text,
    Csv,
    Json,
}

#[derive(Args)]
struct MonomialsArgs {
    #[arg(long, default_value_t = 3)]
    arity: u32,
    #[arg(long)]
    degree: u32,
    #[arg(long)]
    multiplicity: u32,
    #[arg(long, value_enum, default_value = "text")]
    format: ListFormat,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct NarayanaArgs {
    #[arg(long, default_value_t = 3)]
    arity: u32,
    #[arg(long, default_value_t = 5)]
    max_weight: u32,
    #[arg(long, value_enum, default_value = "text")]
    format: ListFormat,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MatrixMode {
    Symbolic,
    Vector,
}

#[derive(Args)]
struct MatrixArgs {
    #[arg(long, default_value_t = 3)]
    arity: u32,
    #[arg(long)]
    degree: u32,
    #[arg(long)]
    multiplicity: u32,
    #[arg(long, value_enum, default_value = "symbolic")]
    mode: MatrixMode,
    /// Comma-separated integer coefficients (vector mode).
    #[arg(long, allow_hyphen_values = true)]
    vector: Option<String>,
    #[arg(long, value_enum, default_value = "text")]
    format: ListFormat,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GcdFilterArg {
    Off,
    Solutions,
    Prefilter,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScreenArg {
    Modular,
    Rational,
}

#[derive(Clone, Copy, ValueEnum)]
enum SearchFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, default_value_t = 3)]
    arity: u32,
    #[arg(long)]
    degree: u32,
    #[arg(long)]
    multiplicity: u32,
    /// Comma-separated coefficient set.
    #[arg(long, default_value = "0,1,-1,2,-2", allow_hyphen_values = true)]
    coeff_set: String,
    #[arg(long, value_enum, default_value = "solutions")]
    gcd_filter: GcdFilterArg,
    /// Screening prime for the modular rank.
    #[arg(long, default_value_t = DEFAULT_SCREENING_PRIME)]
    prime: u64,
    /// Specialization prime for the generic-rank computation.
    #[arg(long, default_value_t = DEFAULT_SPECIALIZATION_PRIME)]
    spec_prime: u64,
    #[arg(long, default_value_t = 5)]
    trials: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads (default: OPIDENT_THREADS or all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Confirm survivors with exact rational rank.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    rational_confirmation: bool,
    #[arg(long, value_enum, default_value = "modular")]
    screen: ScreenArg,
    /// Print progress to stderr.
    #[arg(long)]
    progress: bool,
    #[arg(long, value_enum, default_value = "csv")]
    format: SearchFormat,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Solutions CSV as written by `search` (a1,...,aN,rank_mod,rank_rational).
    #[arg(long)]
    solutions: PathBuf,
    /// Family templates (JSON lines); defaults to the built-in tables
    /// matching the solution vector length.
    #[arg(long)]
    templates: Option<PathBuf>,
    /// Parameter range searched during matching, inclusive.
    #[arg(long, default_value = "-2..2", allow_hyphen_values = true)]
    param_range: String,
    /// Grid step denominator: parameters run over k/denominator.
    #[arg(long, default_value_t = 2)]
    param_denominator: u32,
    #[arg(long, value_enum, default_value = "text")]
    format: ListFormat,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            return code;
        }
    };
    let started = Instant::now();
    let result = match cli.command {
        Command::Monomials(args) => cmd_monomials(args, started),
        Command::Narayana(args) => cmd_narayana(args, started),
        Command::Matrix(args) => cmd_matrix(args, started),
        Command::Search(args) => cmd_search(args, started),
        Command::Classify(args) => cmd_classify(args, started),
    };
    match result {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error);
            failure.code
        }
    }
}

struct Failure {
    code: i32,
    error: anyhow::Error,
}

type CmdResult = Result<i32, Failure>;

fn usage(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        error: error.into(),
    }
}

fn internal(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: EXIT_INTERNAL,
        error: error.into(),
    }
}

fn from_core(error: opident_core::Error) -> Failure {
    // every core error reachable from CLI input is a usage problem
    usage(error)
}

/// Writes the primary output. Files are written via a temporary sibling and
/// renamed, so a failed run leaves no partial output behind.
fn emit(output: Option<&Path>, contents: &[u8]) -> Result<(), Failure> {
    match output {
        None => std::io::stdout()
            .write_all(contents)
            .map_err(|e| internal(anyhow!(e))),
        Some(path) => {
            let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
            let mut tmp = tempfile::NamedTempFile::new_in(dir.unwrap_or(Path::new(".")))
                .map_err(|e| internal(anyhow!(e)))?;
            tmp.write_all(contents).map_err(|e| internal(anyhow!(e)))?;
            tmp.persist(path)
                .map(|_| ())
                .map_err(|e| internal(anyhow!(e.error)))
        }
    }
}

fn finish(
    command: &str,
    config: serde_json::Value,
    started: Instant,
    output: Option<&Path>,
    contents: &[u8],
) -> CmdResult {
    emit(output, contents)?;
    if let Some(path) = output {
        let mut manifest = RunManifest::new(command, config, started.elapsed().as_millis());
        manifest.record_output(path, contents);
        manifest.write(path).map_err(|e| internal(anyhow!(e)))?;
    }
    Ok(0)
}

fn parse_i64_list(input: &str) -> Result<Vec<i64>, Failure> {
    input
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<i64>()
                .with_context(|| format!("invalid integer {s:?}"))
                .map_err(usage)
        })
        .collect()
}

fn cmd_monomials(args: MonomialsArgs, started: Instant) -> CmdResult {
    let mons =
        enumerate_monomials(args.arity, args.degree, args.multiplicity).map_err(from_core)?;
    let mut out = String::new();
    match args.format {
        ListFormat::Text => {
            for (k, m) in mons.iter().enumerate() {
                writeln!(out, "{:>4}  {}  {}", k + 1, m.render(), m.to_dyck()).unwrap();
            }
        }
        ListFormat::Csv => {
            out.push_str("index,monomial,dyck\n");
            for (k, m) in mons.iter().enumerate() {
                writeln!(out, "{},{},{}", k + 1, m.render(), m.to_dyck()).unwrap();
            }
        }
        ListFormat::Json => {
            let rows: Vec<_> = mons
                .iter()
                .enumerate()
                .map(|(k, m)| {
                    json!({
                        "index": k + 1,
                        "monomial": m.render(),
                        "powered": m.render_powered(),
                        "dyck": m.to_dyck().to_string(),
                    })
                })
                .collect();
            out = serde_json::to_string_pretty(&rows).unwrap();
            out.push('\n');
        }
    }
    let config = json!({
        "arity": args.arity,
        "degree": args.degree,
        "multiplicity": args.multiplicity,
        "count": mons.len(),
    });
    finish(
        "monomials",
        config,
        started,
        args.output.as_deref(),
        out.as_bytes(),
    )
}

fn cmd_narayana(args: NarayanaArgs, started: Instant) -> CmdResult {
    let mut rows: Vec<Vec<String>> = Vec::new();
    for w in 0..=args.max_weight {
        let mut row = Vec::new();
        for m in 0..=w {
            row.push(
                count_monomials(args.arity, w, m)
                    .map_err(from_core)?
                    .to_string(),
            );
        }
        rows.push(row);
    }
    let mut out = String::new();
    match args.format {
        ListFormat::Text => {
            let width = rows
                .iter()
                .flat_map(|r| r.iter().map(String::len))
                .max()
                .unwrap_or(1)
                + 2;
            writeln!(
                out,
                "w\\m{}",
                (0..=args.max_weight)
                    .map(|m| format!("{m:>width$}"))
                    .collect::<String>()
            )
            .unwrap();
            for (w, row) in rows.iter().enumerate() {
                write!(out, "{w:<3}").unwrap();
                for value in row {
                    write!(out, "{value:>width$}").unwrap();
                }
                out.push('\n');
            }
        }
        ListFormat::Csv => {
            out.push_str("weight,multiplicity,count\n");
            for (w, row) in rows.iter().enumerate() {
                for (m, value) in row.iter().enumerate() {
                    writeln!(out, "{w},{m},{value}").unwrap();
                }
            }
        }
        ListFormat::Json => {
            let table: Vec<_> = rows
                .iter()
                .enumerate()
                .map(|(w, row)| json!({ "weight": w, "counts": row }))
                .collect();
            out = serde_json::to_string_pretty(&table).unwrap();
            out.push('\n');
        }
    }
    let config = json!({ "arity": args.arity, "max_weight": args.max_weight });
    finish(
        "narayana",
        config,
        started,
        args.output.as_deref(),
        out.as_bytes(),
    )
}

fn cmd_matrix(args: MatrixArgs, started: Instant) -> CmdResult {
    let render = |text: String| text.into_bytes();
    let (contents, shape) = match args.mode {
        MatrixMode::Symbolic => {
            if args.vector.is_some() {
                return Err(usage(anyhow!("--vector is only valid with --mode vector")));
            }
            let template =
                build_template(args.arity, args.degree, args.multiplicity).map_err(from_core)?;
            let bytes = match args.format {
                ListFormat::Text => render(template.render_text()),
                ListFormat::Csv => {
                    let mut buf = Vec::new();
                    template
                        .write_csv(&mut buf)
                        .map_err(|e| internal(anyhow!(e)))?;
                    buf
                }
                ListFormat::Json => {
                    let mut buf = Vec::new();
                    template
                        .write_json(&mut buf)
                        .map_err(|e| internal(anyhow!(e)))?;
                    buf
                }
            };
            (bytes, (template.row_count(), template.column_count()))
        }
        MatrixMode::Vector => {
            let spec = args
                .vector
                .as_deref()
                .ok_or_else(|| usage(anyhow!("--mode vector requires --vector")))?;
            let values = parse_i64_list(spec)?;
            let basis = enumerate_monomials(args.arity, args.degree, args.multiplicity)
                .map_err(from_core)?;
            if basis.len() != values.len() {
                return Err(usage(anyhow!(
                    "vector has {} entries but the basis has {}",
                    values.len(),
                    basis.len()
                )));
            }
            let poly = OperatorPolynomial::new(
                args.arity,
                basis
                    .into_iter()
                    .zip(values.iter().map(|&v| BigRational::from_integer(v.into()))),
            )
            .map_err(from_core)?;
            let matrix = build_matrix(&poly).map_err(from_core)?;
            let bytes = match args.format {
                ListFormat::Text => render(matrix.render_text()),
                ListFormat::Csv => {
                    let mut buf = Vec::new();
                    matrix
                        .write_csv(&mut buf)
                        .map_err(|e| internal(anyhow!(e)))?;
                    buf
                }
                ListFormat::Json => {
                    let mut buf = Vec::new();
                    matrix
                        .write_json(&mut buf)
                        .map_err(|e| internal(anyhow!(e)))?;
                    buf
                }
            };
            (bytes, (matrix.row_count(), matrix.column_count()))
        }
    };
    let config = json!({
        "arity": args.arity,
        "degree": args.degree,
        "multiplicity": args.multiplicity,
        "mode": match args.mode { MatrixMode::Symbolic => "symbolic", MatrixMode::Vector => "vector" },
        "vector": args.vector,
        "rows": shape.0,
        "cols": shape.1,
    });
    finish("matrix", config, started, args.output.as_deref(), &contents)
}

fn cmd_search(args: SearchArgs, started: Instant) -> CmdResult {
    let coefficient_set = parse_i64_list(&args.coeff_set)?;
    let cfg = SearchConfig {
        coefficient_set: coefficient_set.clone(),
        gcd_filter: match args.gcd_filter {
            GcdFilterArg::Off => GcdFilter::Off,
            GcdFilterArg::Solutions => GcdFilter::Solutions,
            GcdFilterArg::Prefilter => GcdFilter::Prefilter,
        },
        screening_prime: args.prime,
        rational_confirmation: args.rational_confirmation,
        screen_mode: match args.screen {
            ScreenArg::Modular => ScreenMode::ModularFirst,
            ScreenArg::Rational => ScreenMode::RationalOnly,
        },
        trials: args.trials,
        seed: args.seed,
        specialization_prime: args.spec_prime,
        threads: args.threads,
        progress: args.progress,
    };
    let template = build_template(args.arity, args.degree, args.multiplicity).map_err(from_core)?;
    let report = run_search(&template, &cfg).map_err(from_core)?;
    for finding in &report.findings {
        eprintln!("finding: {finding}");
    }

    let contents = match args.format {
        SearchFormat::Csv => {
            let mut buf = Vec::new();
            write_solutions_csv(&report.solutions, template.source_dimension(), &mut buf)
                .map_err(|e| internal(anyhow!(e)))?;
            buf
        }
        SearchFormat::Json => {
            let mut buf = serde_json::to_vec_pretty(&report.solutions).unwrap();
            buf.push(b'\n');
            buf
        }
    };
    let config = json!({
        "arity": args.arity,
        "degree": args.degree,
        "multiplicity": args.multiplicity,
        "coefficient_set": coefficient_set,
        "gcd_filter": match args.gcd_filter {
            GcdFilterArg::Off => "off",
            GcdFilterArg::Solutions => "solutions",
            GcdFilterArg::Prefilter => "prefilter",
        },
        "screening_prime": args.prime,
        "specialization_prime": args.spec_prime,
        "trials": args.trials,
        "seed": args.seed,
        "threads": args.threads,
        "rational_confirmation": args.rational_confirmation,
        "screen": match args.screen { ScreenArg::Modular => "modular", ScreenArg::Rational => "rational" },
        "format": match args.format { SearchFormat::Csv => "csv", SearchFormat::Json => "json" },
        "candidates_screened": report.candidates_screened,
        "space_size": report.space_size,
        "generic_rank": report.generic.rank,
        "generic_rank_failure_bound": report.generic.failure_bound.to_string(),
        "threshold": report.threshold,
        "solutions": report.solutions.len(),
        "rank_spectrum": report.spectrum().into_iter().collect::<Vec<_>>(),
        "findings": report.findings,
    });
    eprintln!(
        "search: {} candidates screened, {} solutions, spectrum {:?}, generic rank {} ({})",
        report.candidates_screened,
        report.solutions.len(),
        report.spectrum(),
        report.generic.rank,
        report.generic.note(),
    );
    finish("search", config, started, Some(&args.output), &contents)
}

fn parse_range(input: &str) -> Result<(i64, i64), Failure> {
    let (lo, hi) = input
        .split_once("..")
        .ok_or_else(|| usage(anyhow!("expected lo..hi, got {input:?}")))?;
    let lo = lo
        .trim()
        .parse()
        .with_context(|| format!("invalid range bound {lo:?}"))
        .map_err(usage)?;
    let hi = hi
        .trim()
        .parse()
        .with_context(|| format!("invalid range bound {hi:?}"))
        .map_err(usage)?;
    Ok((lo, hi))
}

fn cmd_classify(args: ClassifyArgs, started: Instant) -> CmdResult {
    let solutions_text = std::fs::read_to_string(&args.solutions)
        .with_context(|| format!("reading {}", args.solutions.display()))
        .map_err(usage)?;
    let solutions = read_solutions_csv(&solutions_text).map_err(from_core)?;
    let vector_len = solutions.first().map(|s| s.vector.len());

    let templates_text = match &args.templates {
        Some(path) => std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))
            .map_err(usage)?,
        None => match vector_len {
            Some(4) => builtin::FAMILIES_DEG3_MULT1.to_string(),
            Some(10) => builtin::FAMILIES_DEG3_MULT2.to_string(),
            Some(other) => {
                return Err(usage(anyhow!(
                    "no built-in templates for vectors of length {other}; pass --templates"
                )))
            }
            None => String::new(),
        },
    };
    let templates = parse_templates_jsonl(&templates_text).map_err(from_core)?;

    let (lo, hi) = parse_range(&args.param_range)?;
    let grid = param_grid(lo, hi, args.param_denominator).map_err(from_core)?;
    let report = classify_solutions(&solutions, &templates, &grid);

    let contents = match args.format {
        ListFormat::Json => {
            let body = json!({
                "solutions": solutions.len(),
                "templates": templates.len(),
                "complete": report.is_complete(),
                "unmatched": report.unmatched.iter().map(|v| v.values().to_vec()).collect::<Vec<_>>(),
                "template_counts": report.template_counts,
                "unused_templates": report.unused_templates,
                "assignments": report
                    .assignments
                    .iter()
                    .map(|(v, labels)| json!({ "vector": v.values(), "families": labels }))
                    .collect::<Vec<_>>(),
            });
            let mut buf = serde_json::to_vec_pretty(&body).unwrap();
            buf.push(b'\n');
            buf
        }
        _ => render_coverage_text(&report, solutions.len(), templates.len()).into_bytes(),
    };
    let config = json!({
        "solutions": args.solutions,
        "templates": args.templates,
        "param_range": [lo, hi],
        "param_denominator": args.param_denominator,
        "complete": report.is_complete(),
    });
    let code = finish(
        "classify",
        config,
        started,
        args.output.as_deref(),
        &contents,
    )?;
    if !report.is_complete() {
        eprintln!(
            "classification gap: {} unmatched solution(s)",
            report.unmatched.len()
        );
        return Ok(EXIT_VERIFICATION);
    }
    Ok(code)
}

fn render_coverage_text(report: &CoverageReport, solutions: usize, templates: usize) -> String {
    let mut out = String::new();
    writeln!(out, "solutions: {solutions}").unwrap();
    writeln!(out, "templates: {templates}").unwrap();
    writeln!(out, "unmatched: {}", report.unmatched.len()).unwrap();
    for vector in &report.unmatched {
        writeln!(out, "  unmatched ({vector})").unwrap();
    }
    for (label, count) in &report.template_counts {
        writeln!(out, "{label}: {count} member(s)").unwrap();
    }
    if !report.unused_templates.is_empty() {
        writeln!(
            out,
            "unused templates: {}",
            report.unused_templates.join(", ")
        )
        .unwrap();
    }
    let multi: BTreeSet<&str> = report
        .assignments
        .iter()
        .filter(|(_, labels)| labels.len() > 1)
        .flat_map(|(_, labels)| labels.iter().map(String::as_str))
        .collect();
    if !multi.is_empty() {
        writeln!(
            out,
            "overlapping families: {}",
            multi.into_iter().collect::<Vec<_>>().join(", ")
        )
        .unwrap();
    }
    out
}
