//! `rfd`: solve, verify, and realize D-optimal designs for two-level
//! main-effects models where each run's count of active factors is bounded.

mod tables;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use rfd_core::exact::{matrix_to_csv, matrix_to_pm_text};
use rfd_core::information::det_information;
use rfd_core::verify::{
    brute_force_solve, equivalence_check, EquivalenceReport, OracleResult,
    DEFAULT_EQUIVALENCE_TOLERANCE, DEFAULT_ORACLE_MAX_ITER, DEFAULT_ORACLE_TOLERANCE,
    DETERMINANT_AGREEMENT,
};
use rfd_core::{
    exact_efficiency, realize_matrix, round_to_exact, solve, OrbitDesign, OrbitSpace,
    SolutionReport,
};

#[derive(Parser)]
#[command(
    name = "rfd",
    version,
    about = "D-optimal designs for two-level models with a bounded number of active factors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance and print the optimal orbit weights.
    Solve {
        /// Number of factors.
        #[arg(short = 'K', long = "factors")]
        factors: u32,
        /// Smallest admissible count of active factors per run.
        #[arg(short = 'L', long = "lower")]
        lower: u32,
        /// Largest admissible count of active factors per run.
        #[arg(short = 'U', long = "upper")]
        upper: u32,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Check a weight file against the optimality certificate.
    Verify {
        #[arg(short = 'K', long = "factors")]
        factors: u32,
        #[arg(short = 'L', long = "lower")]
        lower: u32,
        #[arg(short = 'U', long = "upper")]
        upper: u32,
        /// JSON file mapping orbit index to weight (number or "p/q").
        weights: PathBuf,
        /// Also run the ascent oracle and compare determinants.
        #[arg(long)]
        oracle: bool,
        /// Certificate slack; overrides the RFD_TOLERANCE variable.
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Solve, apportion N runs, and print the realized design matrix.
    Exact {
        #[arg(short = 'K', long = "factors")]
        factors: u32,
        #[arg(short = 'L', long = "lower")]
        lower: u32,
        #[arg(short = 'U', long = "upper")]
        upper: u32,
        /// Total number of runs to allocate.
        #[arg(short = 'N', long = "runs")]
        runs: u64,
        #[arg(long, value_enum, default_value_t = Format::PmText)]
        format: Format,
    },
    /// Regenerate the reference tables (1, 2, 3, 4, or all).
    Tables {
        which: String,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    PmText,
    Table,
}

enum CliError {
    /// Bad flags, bounds, files, or format combinations: exit 1.
    Invalid(String),
    /// The design failed verification: exit 2.
    Verification(String),
}

impl From<rfd_core::Error> for CliError {
    fn from(e: rfd_core::Error) -> Self {
        CliError::Invalid(e.to_string())
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => {}
        Err(CliError::Invalid(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(1);
        }
        Err(CliError::Verification(msg)) => {
            eprintln!("{msg}");
            std::process::exit(2);
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve {
            factors,
            lower,
            upper,
            format,
        } => cmd_solve(factors, lower, upper, format),
        Command::Verify {
            factors,
            lower,
            upper,
            weights,
            oracle,
            tolerance,
            format,
        } => cmd_verify(factors, lower, upper, &weights, oracle, tolerance, format),
        Command::Exact {
            factors,
            lower,
            upper,
            runs,
            format,
        } => cmd_exact(factors, lower, upper, runs, format),
        Command::Tables { which, format } => cmd_tables(&which, format),
    }
}

fn cmd_solve(factors: u32, lower: u32, upper: u32, format: Format) -> Result<(), CliError> {
    let space = OrbitSpace::new(factors, lower, upper)?;
    let report = solve(space);
    match format {
        Format::Table => print!("{}", render_solution_text(&report)),
        Format::Json => println!("{:#}", solution_json(&report)),
        Format::Csv => print!("{}", render_solution_csv(&report)),
        Format::PmText => {
            return Err(CliError::Invalid(
                "pm-text renders design matrices; use it with `exact` or `tables 4`".into(),
            ))
        }
    }
    Ok(())
}

fn render_solution_text(report: &SolutionReport) -> String {
    let mut out = String::new();
    let space = report.design.space();
    out.push_str(&format!("instance {space}\n"));
    out.push_str(&format!(
        "case {} (discriminant {})\n",
        report.case, report.discriminant
    ));
    out.push_str(&format!("construction {}\n", report.construction));
    out.push_str("orbit weights\n");
    for (&k, &w) in report.design.weights() {
        match report.exact_weights.as_ref().and_then(|m| m.get(&k)) {
            Some(r) => out.push_str(&format!("  {k}  {w:.6}  ({r})\n")),
            None => out.push_str(&format!("  {k}  {w:.6}\n")),
        }
    }
    out.push_str(&format!("efficiency {:.4}\n", report.efficiency));
    let cert = &report.certificate;
    out.push_str(&format!(
        "certificate {}: max sensitivity {:.9} at orbit {}, bound {}\n",
        if cert.pass { "pass" } else { "fail" },
        cert.max_sensitivity,
        cert.argmax_orbit,
        cert.bound,
    ));
    out
}

fn weights_json(design: &OrbitDesign) -> serde_json::Value {
    json!(design
        .weights()
        .iter()
        .map(|(k, w)| (k.to_string(), *w))
        .collect::<BTreeMap<_, _>>())
}

fn solution_json(report: &SolutionReport) -> serde_json::Value {
    let space = report.design.space();
    let exact = report.exact_weights.as_ref().map(|m| {
        m.iter()
            .map(|(k, r)| (k.to_string(), r.to_string()))
            .collect::<BTreeMap<_, _>>()
    });
    json!({
        "factors": space.factors(),
        "lower": space.lower(),
        "upper": space.upper(),
        "case": report.case.label(),
        "discriminant": report.discriminant,
        "construction": report.construction.label(),
        "weights": weights_json(&report.design),
        "exact_weights": exact,
        "efficiency": report.efficiency,
        "certificate": certificate_json(&report.certificate),
    })
}

fn certificate_json(cert: &EquivalenceReport) -> serde_json::Value {
    json!({
        "max_sensitivity": cert.max_sensitivity,
        "argmax_orbit": cert.argmax_orbit,
        "bound": cert.bound,
        "slack_per_orbit": cert
            .slack_per_orbit
            .iter()
            .map(|(k, s)| (k.to_string(), *s))
            .collect::<BTreeMap<_, _>>(),
        "tolerance": cert.tolerance,
        "pass": cert.pass,
    })
}

fn render_solution_csv(report: &SolutionReport) -> String {
    let space = report.design.space();
    let mut out = String::from("factors,lower,upper,case,construction,efficiency,orbit,weight,weight_exact\n");
    for (&k, &w) in report.design.weights() {
        let exact = report
            .exact_weights
            .as_ref()
            .and_then(|m| m.get(&k))
            .map(|r| r.to_string())
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{:.6},{},{},{}\n",
            space.factors(),
            space.lower(),
            space.upper(),
            report.case.label(),
            report.construction.label(),
            report.efficiency,
            k,
            w,
            exact,
        ));
    }
    out
}

fn cmd_verify(
    factors: u32,
    lower: u32,
    upper: u32,
    weights_path: &Path,
    oracle: bool,
    tolerance: Option<f64>,
    format: Format,
) -> Result<(), CliError> {
    let space = OrbitSpace::new(factors, lower, upper)?;
    let design = load_design(space, weights_path)?;
    let tolerance = resolve_tolerance(tolerance)?;
    let report = match equivalence_check(&design, tolerance) {
        Ok(report) => report,
        Err(e @ rfd_core::Error::SingularInformation(_)) => {
            return Err(CliError::Verification(format!(
                "verification failed: {e}"
            )))
        }
        Err(e) => return Err(e.into()),
    };

    let oracle_result = oracle.then(|| {
        brute_force_solve(*design.space(), DEFAULT_ORACLE_MAX_ITER, DEFAULT_ORACLE_TOLERANCE)
    });
    let design_det = det_information(design.moments(), factors);
    // A passing certificate proves optimality, so the oracle can only agree;
    // a larger oracle determinant means the design is not optimal after all.
    let oracle_agrees = oracle_result
        .as_ref()
        .map(|o| o.det <= design_det * (1.0 + DETERMINANT_AGREEMENT))
        .unwrap_or(true);
    let pass = report.pass && oracle_agrees;

    match format {
        Format::Table => print!(
            "{}",
            render_verify_text(&design, &report, design_det, oracle_result.as_ref(), pass)
        ),
        Format::Json => {
            let oracle_json = oracle_result.as_ref().map(|o| {
                json!({
                    "weights": o.weights.iter().map(|(k, w)| (k.to_string(), *w)).collect::<BTreeMap<_, _>>(),
                    "det": o.det,
                    "iterations": o.iterations,
                    "converged": o.converged,
                })
            });
            let value = json!({
                "factors": factors,
                "lower": lower,
                "upper": upper,
                "design": weights_json(&design),
                "design_det": design_det,
                "certificate": certificate_json(&report),
                "oracle": oracle_json,
                "pass": pass,
            });
            println!("{value:#}");
        }
        Format::Csv => print!("{}", render_verify_csv(&design, &report)),
        Format::PmText => {
            return Err(CliError::Invalid(
                "pm-text renders design matrices; use it with `exact` or `tables 4`".into(),
            ))
        }
    }

    if pass {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "verification failed: max sensitivity {:.9} at orbit {} against bound {} \
             (tolerance {:e})",
            report.max_sensitivity, report.argmax_orbit, report.bound, report.tolerance,
        )))
    }
}

fn render_verify_text(
    design: &OrbitDesign,
    report: &EquivalenceReport,
    design_det: f64,
    oracle: Option<&OracleResult>,
    pass: bool,
) -> String {
    let mut out = String::new();
    out.push_str(&format!("instance {}\n", design.space()));
    out.push_str(&format!(
        "bound {} (tolerance {:e})\n",
        report.bound, report.tolerance
    ));
    let mut cells = vec![["orbit", "weight", "sensitivity", "slack"]
        .map(str::to_string)
        .to_vec()];
    for (&k, &slack) in &report.slack_per_orbit {
        cells.push(vec![
            k.to_string(),
            format!("{:.6}", design.weight(k)),
            format!("{:.6}", report.bound - slack),
            format!("{slack:.6}"),
        ]);
    }
    out.push_str(&align_cells(&cells));
    out.push_str(&format!(
        "max sensitivity {:.9} at orbit {}\n",
        report.max_sensitivity, report.argmax_orbit
    ));
    if let Some(o) = oracle {
        out.push_str(&format!(
            "oracle determinant {:.9} after {} iterations ({}); design determinant {:.9}\n",
            o.det,
            o.iterations,
            if o.converged { "converged" } else { "iteration budget reached" },
            design_det,
        ));
    }
    out.push_str(&format!("verdict {}\n", if pass { "pass" } else { "fail" }));
    out
}

fn render_verify_csv(design: &OrbitDesign, report: &EquivalenceReport) -> String {
    let mut out = String::from("orbit,weight,sensitivity,slack\n");
    for (&k, &slack) in &report.slack_per_orbit {
        out.push_str(&format!(
            "{},{},{},{}\n",
            k,
            design.weight(k),
            report.bound - slack,
            slack
        ));
    }
    out
}

fn align_cells(rows: &[Vec<String>]) -> String {
    let columns = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..columns)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|cell| cell.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, cell)| format!("{}{}", " ".repeat(widths[c] - cell.chars().count()), cell))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn cmd_exact(
    factors: u32,
    lower: u32,
    upper: u32,
    runs: u64,
    format: Format,
) -> Result<(), CliError> {
    let space = OrbitSpace::new(factors, lower, upper)?;
    let report = solve(space);
    let exact = round_to_exact(&report.design, runs)?;
    let rows = realize_matrix(&exact)?;
    let efficiency = exact_efficiency(&exact);
    let efficiency_line = match &efficiency {
        Ok(e) => format!("exact efficiency {e:.4}"),
        Err(_) => "exact efficiency undefined (rank-deficient realization)".to_string(),
    };

    match format {
        Format::PmText => {
            print!("{}", matrix_to_pm_text(&rows));
            eprintln!("{efficiency_line}");
        }
        Format::Csv => {
            print!("{}", matrix_to_csv(&rows));
            eprintln!("{efficiency_line}");
        }
        Format::Table => {
            println!("instance {space}, runs {runs}");
            let allocation: Vec<String> = exact
                .orbit_runs()
                .iter()
                .map(|(k, n)| format!("{k}: {n}"))
                .collect();
            println!("orbit runs {{{}}}", allocation.join(", "));
            println!("{efficiency_line}");
            print!("{}", matrix_to_pm_text(&rows));
        }
        Format::Json => {
            let value = json!({
                "factors": factors,
                "lower": lower,
                "upper": upper,
                "runs": runs,
                "orbit_runs": exact
                    .orbit_runs()
                    .iter()
                    .map(|(k, n)| (k.to_string(), *n))
                    .collect::<BTreeMap<_, _>>(),
                "efficiency": efficiency.ok(),
                "rows": rows.iter().map(|p| p.coords().to_vec()).collect::<Vec<_>>(),
            });
            println!("{value:#}");
        }
    }
    Ok(())
}

fn cmd_tables(which: &str, format: Format) -> Result<(), CliError> {
    let selected: Vec<u8> = match which {
        "1" => vec![1],
        "2" => vec![2],
        "3" => vec![3],
        "4" => vec![4],
        "all" => vec![1, 2, 3, 4],
        other => {
            return Err(CliError::Invalid(format!(
                "unknown table {other:?}; choose 1, 2, 3, 4, or all"
            )))
        }
    };
    match format {
        Format::Table => {
            for (i, &t) in selected.iter().enumerate() {
                if selected.len() > 1 {
                    if i > 0 {
                        println!();
                    }
                    println!("Table {t}");
                }
                print!("{}", tables::render_table(t));
            }
        }
        Format::Csv | Format::Json => {
            let [t] = selected[..] else {
                return Err(CliError::Invalid(
                    "csv and json render one table at a time; pick 1, 2, 3, or 4".into(),
                ));
            };
            match format {
                Format::Csv => print!("{}", tables::render_table_csv(t)),
                _ => print!("{}", tables::render_table_json(t)),
            }
        }
        Format::PmText => {
            if selected != [4] {
                return Err(CliError::Invalid(
                    "pm-text renders design matrices; only table 4 is one".into(),
                ));
            }
            print!("{}", tables::render_table(4));
        }
    }
    Ok(())
}

fn load_design(space: OrbitSpace, path: &Path) -> Result<OrbitDesign, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))?;
    let object: serde_json::Map<String, serde_json::Value> = serde_json::from_str(&text)
        .map_err(|e| CliError::Invalid(format!("{} is not a JSON object: {e}", path.display())))?;
    let mut weights = BTreeMap::new();
    for (key, value) in object {
        let orbit: u32 = key
            .parse()
            .map_err(|_| CliError::Invalid(format!("orbit index {key:?} is not an integer")))?;
        let weight = match &value {
            serde_json::Value::Number(n) => n
                .as_f64()
                .ok_or_else(|| CliError::Invalid(format!("weight {n} is not representable")))?,
            serde_json::Value::String(s) => parse_weight_string(s)?,
            other => {
                return Err(CliError::Invalid(format!(
                    "weight for orbit {orbit} must be a number or \"p/q\" string, got {other}"
                )))
            }
        };
        weights.insert(orbit, weight);
    }
    Ok(OrbitDesign::new(space, weights)?)
}

fn parse_weight_string(s: &str) -> Result<f64, CliError> {
    let body = s.trim();
    if let Some((p, q)) = body.split_once('/') {
        let p: i64 = p
            .trim()
            .parse()
            .map_err(|_| CliError::Invalid(format!("bad rational numerator in {s:?}")))?;
        let q: i64 = q
            .trim()
            .parse()
            .map_err(|_| CliError::Invalid(format!("bad rational denominator in {s:?}")))?;
        if q == 0 {
            return Err(CliError::Invalid(format!("zero denominator in {s:?}")));
        }
        return Ok(p as f64 / q as f64);
    }
    body.parse()
        .map_err(|_| CliError::Invalid(format!("weight {s:?} is neither a number nor p/q")))
}

fn resolve_tolerance(flag: Option<f64>) -> Result<f64, CliError> {
    let value = match flag {
        Some(t) => t,
        None => match std::env::var("RFD_TOLERANCE") {
            Ok(text) => text.trim().parse().map_err(|_| {
                CliError::Invalid(format!("RFD_TOLERANCE {text:?} is not a number"))
            })?,
            Err(_) => DEFAULT_EQUIVALENCE_TOLERANCE,
        },
    };
    if !value.is_finite() || value < 0.0 {
        return Err(CliError::Invalid(format!(
            "tolerance must be a finite non-negative number, got {value}"
        )));
    }
    Ok(value)
}
