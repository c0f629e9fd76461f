//! Thin batch interface over the `morsenov` library.
//!
//! One subcommand per capability: `homology` (cell-structure Betti
//! numbers), `morse` (the full gradient-flow analysis of a catalog model),
//! `novikov-invert` (truncated matrix inversion with the invertibility
//! criterion), `verify` (every verification report on a count system),
//! `arnold` (the end-to-end bound pipeline), and `mirror` (the count
//! system synthesised from a model's Morse complex).
//!
//! Exit status: 0 when everything asked for passed, 1 when a check ran to
//! completion and failed, 2 on usage or input errors. File arguments
//! accept `-` for standard input. `--json` replaces the human text with
//! pretty-printed JSON whose keys are sorted, so identical inputs produce
//! byte-identical output.

use std::fmt::Write as _;
use std::io::Read;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use morsenov::chain::{check_chain_homotopy, check_chain_map, ChainComplex};
use morsenov::coherence::{morse_mirror, run_pipeline, CoherenceError, CountSystem};
use morsenov::homology::{homology_rank_lambda, BettiVector, CubicalComplex};
use morsenov::morse::{FlowConfig, MorseModel, MorseSystem};
use morsenov::novikov::{NovikovMatrix, NovikovScalar};
use morsenov::ratio::{format_ratio, parse_ratio};
use morsenov::report::{VerificationReport, Violation};

#[derive(Parser)]
#[command(
    name = "morsenov",
    version,
    about = "Exact Novikov-field linear algebra, Morse complexes, and count verification",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Betti numbers of a catalog model from its cell structure.
    Homology {
        /// Catalog model name, e.g. `torus_2` or `sphere2*torus_1`.
        model: String,
        /// Cell-structure refinement factor.
        #[arg(long, default_value_t = 1)]
        resolution: usize,
        /// Emit JSON instead of a human line.
        #[arg(long)]
        json: bool,
    },
    /// Full analysis of a model: critical points, signed counts, the
    /// chain complex, and the Betti comparison against the cell oracle.
    Morse {
        /// Catalog model name.
        model: String,
        /// JSON file of flow-configuration overrides (`-` for stdin).
        #[arg(long)]
        config: Option<String>,
        /// Emit JSON instead of human tables.
        #[arg(long)]
        json: bool,
    },
    /// Invert a Novikov matrix through a cutoff, reporting the
    /// constant-part invertibility criterion alongside.
    #[command(name = "novikov-invert")]
    NovikovInvert {
        /// Matrix document (`{"matrix": [[..]]}` or a bare 2D array;
        /// entries are rationals or `{"terms": [{"exp", "coeff"}]}`
        /// objects); `-` for stdin.
        #[arg(long)]
        matrix: String,
        /// Exponent cutoff for the inverse, as `p/q` or an integer.
        #[arg(long)]
        cutoff: String,
        /// Emit JSON instead of human tables.
        #[arg(long)]
        json: bool,
    },
    /// Run every verification report on a count system.
    Verify {
        /// Count-system JSON document (`-` for stdin).
        #[arg(long)]
        counts: String,
        /// Emit JSON instead of one summary line per report.
        #[arg(long)]
        json: bool,
    },
    /// Full pipeline on a count system: claims, induced maps,
    /// invertibility, the homotopy identity, and the generator bound.
    Arnold {
        /// Count-system JSON document (`-` for stdin).
        #[arg(long)]
        counts: String,
        /// Comma-separated Betti numbers, e.g. `1,2,1`.
        #[arg(long)]
        betti: String,
        /// Exponent cutoff for the matrix checks, as `p/q` or an integer.
        #[arg(long)]
        cutoff: String,
        /// Emit the JSON verdict instead of stage summaries.
        #[arg(long)]
        json: bool,
    },
    /// Emit the count system mirroring a model's Morse complex (always
    /// JSON; feeds straight into `verify --counts -`).
    Mirror {
        /// Catalog model name.
        model: String,
    },
}

/// A command that could not complete successfully.
enum Failure {
    /// Bad arguments or unreadable/malformed input — exit 2.
    Usage(String),
    /// A check ran to completion and did not pass — exit 1.
    Verification(String),
}

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn verification(e: impl ToString) -> Failure {
    Failure::Verification(e.to_string())
}

fn main() -> ExitCode {
    // Die quietly when a downstream consumer (`head`, a closed pager)
    // hangs up, instead of panicking on the failed write.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Homology {
            model,
            resolution,
            json,
        } => cmd_homology(&model, resolution, json),
        Command::Morse {
            model,
            config,
            json,
        } => cmd_morse(&model, config.as_deref(), json),
        Command::NovikovInvert {
            matrix,
            cutoff,
            json,
        } => cmd_novikov_invert(&matrix, &cutoff, json),
        Command::Verify { counts, json } => cmd_verify(&counts, json),
        Command::Arnold {
            counts,
            betti,
            cutoff,
            json,
        } => cmd_arnold(&counts, &betti, &cutoff, json),
        Command::Mirror { model } => cmd_mirror(&model),
    }
}

// --- input plumbing ---------------------------------------------------------

/// Read a file argument; `-` means standard input.
fn read_input(path: &str) -> Result<String, Failure> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| usage(format!("reading standard input: {e}")))?;
        Ok(buf)
    } else {
        std::fs::read_to_string(path).map_err(|e| usage(format!("reading {path}: {e}")))
    }
}

fn read_json(path: &str) -> Result<Value, Failure> {
    serde_json::from_str(&read_input(path)?)
        .map_err(|e| usage(format!("{path} is not valid JSON: {e}")))
}

fn parse_model(name: &str) -> Result<MorseModel, Failure> {
    MorseModel::parse(name).map_err(usage)
}

fn parse_cutoff(text: &str) -> Result<BigRational, Failure> {
    parse_ratio(text)
        .ok_or_else(|| usage(format!("--cutoff must be a rational like 10 or 5/2, got {text:?}")))
}

fn print_json(value: &Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("JSON values serialise")
    );
}

// --- homology ---------------------------------------------------------------

fn cmd_homology(model: &str, resolution: usize, json: bool) -> Result<(), Failure> {
    let model = parse_model(model)?;
    let betti = CubicalComplex::for_model(&model, resolution)
        .map_err(usage)?
        .betti();
    if json {
        print_json(&json!({
            "betti": betti.0,
            "model": model.name(),
            "resolution": resolution,
        }));
    } else {
        println!(
            "betti({}) at resolution {}: {}",
            model.name(),
            resolution,
            betti
        );
    }
    Ok(())
}

// --- morse ------------------------------------------------------------------

fn cmd_morse(model: &str, config: Option<&str>, json: bool) -> Result<(), Failure> {
    let model = parse_model(model)?;
    let mut cfg = FlowConfig::default();
    if let Some(path) = config {
        cfg = cfg.with_overrides(&read_json(path)?).map_err(usage)?;
    }
    let system = MorseSystem::analyze(model.clone(), cfg).map_err(verification)?;
    let (complex, counts) = system.build_complex().map_err(verification)?;
    let cutoff = BigRational::from_integer(10.into());
    let betti = homology_rank_lambda(&complex, &cutoff).map_err(verification)?;
    let oracle = CubicalComplex::for_model(&model, 1)
        .map_err(usage)?
        .betti();
    let matched = betti == oracle;

    if json {
        print_json(&json!({
            "betti": betti.0,
            "complex": complex.to_json(),
            "counts": counts.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            "oracle": oracle.0,
            "oracle_match": matched,
            "system": system.to_json(),
        }));
    } else {
        println!("{}", human_morse(&system, &complex, &counts, &betti, &oracle));
    }
    if matched {
        Ok(())
    } else {
        Err(verification(format!(
            "Betti numbers {betti} disagree with the cell-structure oracle {oracle}"
        )))
    }
}

fn human_morse(
    system: &MorseSystem,
    complex: &ChainComplex,
    counts: &[morsenov::morse::SignedCount],
    betti: &BettiVector,
    oracle: &BettiVector,
) -> String {
    let mut out = String::new();
    let model = system.model();
    let _ = writeln!(
        out,
        "model: {} (dimension {}, {} critical points)",
        model.name(),
        model.dim(),
        system.points().len()
    );
    let _ = writeln!(out, "critical points:");
    for p in system.points() {
        let coords = p
            .coords
            .iter()
            .map(|x| format!("{x:.6}"))
            .collect::<Vec<_>>()
            .join(", ");
        let _ = writeln!(
            out,
            "  {}  index {}  value {:+.6}  at ({coords})",
            p.id, p.index, p.value
        );
    }
    let _ = writeln!(out, "trajectory counts over adjacent index pairs:");
    for c in counts {
        let _ = writeln!(
            out,
            "  {} -> {}: unsigned {}, signed {}",
            c.from, c.to, c.unsigned, c.signed
        );
    }
    let d = complex.differential().matrix();
    let module = complex.module();
    let mut nonzero = Vec::new();
    for i in 0..d.nrows() {
        for j in 0..d.ncols() {
            if !d.get(i, j).is_zero_exact() {
                nonzero.push(format!(
                    "  d[{}, {}] = {}",
                    module.generator(i).id,
                    module.generator(j).id,
                    d.get(i, j)
                ));
            }
        }
    }
    if nonzero.is_empty() {
        let _ = writeln!(out, "differential: zero");
    } else {
        let _ = writeln!(out, "differential entries:");
        for line in nonzero {
            let _ = writeln!(out, "{line}");
        }
    }
    let _ = writeln!(out, "betti over the Novikov field: {betti}");
    let _ = writeln!(out, "betti from the cell oracle:   {oracle}");
    let _ = write!(
        out,
        "oracle match: {}",
        if betti == oracle { "yes" } else { "NO" }
    );
    out
}

// --- novikov-invert ---------------------------------------------------------

fn matrix_from_json(doc: &Value) -> Result<NovikovMatrix, Failure> {
    let grid = match doc {
        Value::Object(obj) => obj
            .get("matrix")
            .ok_or_else(|| usage("matrix document must have a \"matrix\" field"))?,
        other => other,
    };
    let rows_json = grid
        .as_array()
        .ok_or_else(|| usage("\"matrix\" must be an array of rows"))?;
    let mut rows = Vec::with_capacity(rows_json.len());
    for (i, row) in rows_json.iter().enumerate() {
        let entries = row
            .as_array()
            .ok_or_else(|| usage(format!("row {i} must be an array")))?;
        let mut parsed = Vec::with_capacity(entries.len());
        for (j, entry) in entries.iter().enumerate() {
            parsed.push(
                NovikovScalar::from_json(entry)
                    .map_err(|e| usage(format!("entry ({i}, {j}): {e}")))?,
            );
        }
        rows.push(parsed);
    }
    if rows.is_empty() || rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(usage("matrix must be rectangular and nonempty"));
    }
    Ok(NovikovMatrix::from_rows(rows))
}

fn matrix_to_json(matrix: &NovikovMatrix) -> Value {
    let rows: Vec<Value> = (0..matrix.nrows())
        .map(|i| {
            Value::Array(
                (0..matrix.ncols())
                    .map(|j| matrix.get(i, j).to_json_compact())
                    .collect(),
            )
        })
        .collect();
    Value::Array(rows)
}

fn human_matrix(matrix: &NovikovMatrix) -> String {
    (0..matrix.nrows())
        .map(|i| {
            let row = (0..matrix.ncols())
                .map(|j| matrix.get(i, j).to_string())
                .collect::<Vec<_>>()
                .join(",  ");
            format!("  [ {row} ]")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn cmd_novikov_invert(matrix: &str, cutoff: &str, json: bool) -> Result<(), Failure> {
    let matrix = matrix_from_json(&read_json(matrix)?)?;
    let cutoff = parse_cutoff(cutoff)?;
    let criterion = matrix.invertibility_criterion().map_err(usage)?;
    match matrix.invert(&cutoff) {
        Ok(inverse) => {
            if json {
                print_json(&json!({
                    "criterion": criterion.to_json(),
                    "cutoff": format_ratio(&cutoff),
                    "inverse": matrix_to_json(&inverse),
                }));
            } else {
                println!(
                    "criterion: {}",
                    if criterion.holds() {
                        "holds".to_string()
                    } else {
                        format!("does not hold ({} violations)", criterion.violations.len())
                    }
                );
                println!("inverse through T^{}:", format_ratio(&cutoff));
                println!("{}", human_matrix(&inverse));
            }
            Ok(())
        }
        Err(e) => {
            if json {
                print_json(&json!({
                    "criterion": criterion.to_json(),
                    "error": e.to_string(),
                }));
            } else {
                println!("criterion:");
                if criterion.holds() {
                    println!("  holds");
                } else {
                    for v in &criterion.violations {
                        println!("  {v}");
                    }
                }
            }
            Err(verification(e))
        }
    }
}

// --- verify -----------------------------------------------------------------

/// Every matrix entry and product of two entries lives at an exponent of
/// magnitude at most twice the largest class weight; one more makes every
/// residual term visible to the truncation-aware checks.
fn matrix_check_cutoff(system: &CountSystem) -> BigRational {
    let mut max = BigRational::zero();
    for class in system.index_data().classes() {
        let a = class.omega.abs();
        if a > max {
            max = a;
        }
    }
    BigRational::from_integer(1.into()) + max.clone() + max
}

/// The full report list for a loaded system: the three count identities,
/// then the induced-map identities at matrix level.
fn verification_reports(system: &CountSystem) -> Result<Vec<VerificationReport>, Failure> {
    let mut reports = system.check_claims();
    let maps = system.build_maps().map_err(verification)?;
    let cutoff = matrix_check_cutoff(system);

    reports.push(
        match ChainComplex::new(maps.points.clone(), maps.d.clone()) {
            Ok(_) => VerificationReport::new("differential", Vec::new()),
            Err(e) => VerificationReport::new(
                "differential",
                vec![Violation::new(["d"], e.to_string())],
            ),
        },
    );
    reports.push(
        check_chain_map(&maps.iota, &maps.d, &maps.d, &cutoff).map_err(verification)?,
    );
    let criterion = maps
        .iota
        .matrix()
        .invertibility_criterion()
        .map_err(verification)?;
    reports.push(VerificationReport::new(
        "iota-invertibility",
        criterion
            .violations
            .iter()
            .map(|v| Violation::new(["iota"], v.to_string()))
            .collect(),
    ));
    let round_trip = maps.ssp.after(&maps.pss).map_err(verification)?;
    reports.push(
        check_chain_homotopy(&maps.iota, &round_trip, &maps.h, &maps.d, &maps.d, &cutoff)
            .map_err(verification)?,
    );
    Ok(reports)
}

fn cmd_verify(counts: &str, json: bool) -> Result<(), Failure> {
    let system = CountSystem::from_json(&read_json(counts)?).map_err(usage)?;
    let reports = verification_reports(&system)?;
    let failing: Vec<&str> = reports
        .iter()
        .filter(|r| !r.passed())
        .map(|r| r.identity())
        .collect();
    if json {
        print_json(&json!({
            "reports": reports.iter().map(VerificationReport::to_json).collect::<Vec<_>>(),
            "status": if failing.is_empty() { "pass" } else { "fail" },
        }));
    } else {
        for report in &reports {
            println!("{}", report.summary());
        }
    }
    if failing.is_empty() {
        Ok(())
    } else {
        Err(verification(failing.join(", ")))
    }
}

// --- arnold -----------------------------------------------------------------

fn cmd_arnold(counts: &str, betti: &str, cutoff: &str, json: bool) -> Result<(), Failure> {
    let betti: Vec<usize> = betti
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| usage(format!("--betti must be comma-separated counts, got {t:?}")))
        })
        .collect::<Result<_, _>>()?;
    let cutoff = parse_cutoff(cutoff)?;
    let system = CountSystem::from_json(&read_json(counts)?).map_err(usage)?;
    match run_pipeline(&system, &betti, &cutoff) {
        Ok(verdict) => {
            if json {
                print_json(&verdict.to_json());
            } else {
                println!("{verdict}");
            }
            Ok(())
        }
        Err(CoherenceError::Stage { stage, detail }) => {
            Err(verification(format!("stage {stage}: {detail}")))
        }
        Err(other) => Err(usage(other)),
    }
}

// --- mirror -----------------------------------------------------------------

fn cmd_mirror(model: &str) -> Result<(), Failure> {
    let model = parse_model(model)?;
    let system = MorseSystem::analyze(model, FlowConfig::default()).map_err(verification)?;
    let (complex, _) = system.build_complex().map_err(verification)?;
    let mirror = morse_mirror(&complex).map_err(verification)?;
    print_json(&mirror.to_json());
    Ok(())
}
