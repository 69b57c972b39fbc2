//! Command line front end: single scenarios, manifests of scenarios with
//! expected verdicts, numeric verification against exact enumeration, and
//! export of the built-in fixtures.
//!
//! Exit codes: 0 identifiable (or all checks passed), 1 not identifiable by
//! rule closure (or a batch mismatch), 2 inconclusive because a search limit
//! was hit, 64 usage error, 65 malformed input, 66 unreadable file,
//! 70 numeric discrepancy above tolerance.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use docalc_core::engine::{LimitKind, Rule, SearchStats};
use docalc_core::fixtures;
use docalc_core::scenario::Scenario;
use docalc_core::scm::constructions::{find_witness, xor_model, Params};
use docalc_core::scm::{verify_formula, ScmJson};
use docalc_core::{
    identify, CausalGraph, DiscreteScm, Formula, IdentifyResult, QuerySpec, SearchLimits, Verdict,
};

pub const EXIT_IDENTIFIABLE: i32 = 0;
pub const EXIT_NOT_IDENTIFIABLE: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_NO_INPUT: i32 = 66;
pub const EXIT_DISCREPANCY: i32 = 70;

#[derive(Parser, Debug)]
#[command(
    name = "docalc",
    version,
    about = "Decide identifiability of causal effects from several data sources"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the search on one scenario file.
    Run(RunArgs),
    /// Run every scenario listed in a manifest and compare with expected verdicts.
    Batch(BatchArgs),
    /// Evaluate the identifying formula on a model and compare with the exact target.
    Verify(VerifyArgs),
    /// Write the built-in scenarios, manifests and models into a directory.
    ExportFixtures { dir: PathBuf },
}

#[derive(Args, Debug)]
pub struct RunArgs {
    pub scenario: PathBuf,
    /// Print a JSON report instead of text.
    #[arg(long)]
    pub json: bool,
    /// Search limits, e.g. `terms=100000,seconds=10`.
    #[arg(long, value_name = "terms=N,seconds=S", value_parser = parse_limits)]
    pub limits: Option<SearchLimits>,
    /// Also verify the formula on a random binary model, e.g. `seed=7`.
    #[arg(long, value_name = "seed=K", value_parser = parse_seed)]
    pub verify: Option<u64>,
    /// Also verify the formula on the model in this JSON file.
    #[arg(long, value_name = "FILE")]
    pub scm: Option<PathBuf>,
    /// Print the derivation steps.
    #[arg(long)]
    pub trace: bool,
    /// Verify this formula instead of the one found by the search (for testing).
    #[arg(long, value_name = "FILE")]
    pub inject_formula: Option<PathBuf>,
    /// Largest accepted absolute discrepancy.
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
}

#[derive(Args, Debug)]
pub struct BatchArgs {
    pub manifest: PathBuf,
    #[arg(long)]
    pub json: bool,
    #[arg(long, value_name = "terms=N,seconds=S", value_parser = parse_limits)]
    pub limits: Option<SearchLimits>,
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("model").required(true).args(["seed", "scm"])))]
pub struct VerifyArgs {
    pub scenario: PathBuf,
    /// Seed of a random binary model.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Model in JSON form.
    #[arg(long, value_name = "FILE")]
    pub scm: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub inject_formula: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    #[arg(long)]
    pub json: bool,
    #[arg(long, value_name = "terms=N,seconds=S", value_parser = parse_limits)]
    pub limits: Option<SearchLimits>,
}

/// Parses `terms=N,seconds=S`; either part may be omitted.
pub fn parse_limits(s: &str) -> Result<SearchLimits, String> {
    let mut limits = SearchLimits::default();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got `{part}`"))?;
        match key.trim() {
            "terms" => {
                limits.max_terms = value.trim().parse().map_err(|e| format!("terms: {e}"))?
            }
            "seconds" => {
                let secs: f64 = value.trim().parse().map_err(|e| format!("seconds: {e}"))?;
                if !(secs.is_finite() && secs >= 0.0) {
                    return Err("seconds must be a nonnegative number".into());
                }
                limits.max_time = Duration::from_secs_f64(secs);
            }
            other => return Err(format!("unknown limit `{other}`")),
        }
    }
    Ok(limits)
}

pub fn parse_seed(s: &str) -> Result<u64, String> {
    let v = s.strip_prefix("seed=").ok_or("expected seed=K")?;
    v.parse().map_err(|e| format!("seed: {e}"))
}

/// Captured result of one invocation.
#[derive(Debug, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn data(message: impl std::fmt::Display) -> Self {
        Failure {
            code: EXIT_DATA,
            message: message.to_string(),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_NO_INPUT,
        message: format!("cannot read {}: {e}", path.display()),
    })
}

/// Runs the command line given in `args` (program name first).
pub fn execute<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code,
                    stderr: text,
                    ..Default::default()
                }
            } else {
                Outcome {
                    code,
                    stdout: text,
                    ..Default::default()
                }
            };
        }
    };
    let mut out = Outcome::default();
    let result = match cli.command {
        Command::Run(a) => run(&a, &mut out.stdout),
        Command::Batch(a) => batch(&a, &mut out.stdout),
        Command::Verify(a) => verify(&a, &mut out.stdout),
        Command::ExportFixtures { dir } => export_fixtures(&dir, &mut out.stdout),
    };
    match result {
        Ok(code) => out.code = code,
        Err(f) => {
            out.code = f.code;
            out.stderr = format!("error: {}\n", f.message);
        }
    }
    out
}

#[derive(Debug, Serialize)]
pub struct TraceStep {
    pub rule: Rule,
    pub produced: String,
    pub parents: Vec<String>,
    pub params: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct Verification {
    pub model: String,
    pub max_abs_diff: f64,
    pub zero_over_zero: usize,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub label: Option<String>,
    pub identifiable: bool,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<&'static str>,
    pub formula: Option<String>,
    pub injected_formula: Option<String>,
    pub experimental: bool,
    pub trace: Vec<TraceStep>,
    pub stats: SearchStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<Verification>,
}

fn status(v: Verdict) -> (&'static str, Option<&'static str>) {
    match v {
        Verdict::Identifiable => ("identifiable", None),
        Verdict::NotIdentifiable => ("not-identifiable", None),
        Verdict::Inconclusive(LimitKind::Terms) => ("inconclusive", Some("terms")),
        Verdict::Inconclusive(LimitKind::Time) => ("inconclusive", Some("time")),
    }
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Identifiable => EXIT_IDENTIFIABLE,
        Verdict::NotIdentifiable => EXIT_NOT_IDENTIFIABLE,
        Verdict::Inconclusive(_) => EXIT_INCONCLUSIVE,
    }
}

fn build_report(scenario: &Scenario, spec: &QuerySpec, r: &IdentifyResult) -> Report {
    let g = &spec.graph;
    let (status, limit) = status(r.verdict);
    Report {
        label: scenario.label.clone(),
        identifiable: r.identifiable(),
        status,
        limit,
        formula: r.formula.as_ref().map(|f| f.render(g)),
        injected_formula: None,
        experimental: spec.is_experimental(),
        trace: r
            .trace
            .iter()
            .map(|s| TraceStep {
                rule: s.rule,
                produced: s.produced.render(g, "P"),
                parents: s.parents.iter().map(|p| p.render(g, "P")).collect(),
                params: g.names(s.params).into_iter().map(String::from).collect(),
            })
            .collect(),
        stats: r.stats,
        verification: None,
    }
}

fn load_scenario(path: &Path) -> Result<(Scenario, QuerySpec), Failure> {
    let text = read(path)?;
    let scenario =
        Scenario::parse(&text).map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    let spec = scenario
        .to_spec()
        .map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    Ok((scenario, spec))
}

fn load_formula(path: &Path, g: &CausalGraph) -> Result<Formula, Failure> {
    let text = read(path)?;
    let f = Formula::parse(text.trim(), g)
        .map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    f.validate(g)
        .map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    Ok(f)
}

fn load_model(
    seed: Option<u64>,
    scm: Option<&Path>,
    g: &CausalGraph,
) -> Result<(String, DiscreteScm), Failure> {
    match (seed, scm) {
        (_, Some(path)) => {
            let text = read(path)?;
            let json: ScmJson = serde_json::from_str(&text)
                .map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
            let m = DiscreteScm::from_json(&json, g)
                .map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
            Ok((path.display().to_string(), m))
        }
        (Some(seed), None) => Ok((format!("seed={seed}"), DiscreteScm::random_binary(g, seed))),
        (None, None) => unreachable!("caller checks that a model was given"),
    }
}

fn check(
    f: &Formula,
    spec: &QuerySpec,
    model: (String, DiscreteScm),
    tolerance: f64,
) -> Result<Verification, Failure> {
    let rep = verify_formula(f, spec, &model.1).map_err(Failure::data)?;
    Ok(Verification {
        model: model.0,
        max_abs_diff: rep.max_abs_diff,
        zero_over_zero: rep.zero_over_zero,
        tolerance,
        passed: rep.max_abs_diff <= tolerance,
    })
}

fn write_text(report: &Report, show_trace: bool, trace_lines: &[String], out: &mut String) {
    let verdict = match report.status {
        "identifiable" => "TRUE".to_string(),
        "not-identifiable" => "FALSE (not identifiable by rule closure)".to_string(),
        _ => format!(
            "UNKNOWN (search stopped at the {} limit)",
            report.limit.unwrap_or("search")
        ),
    };
    if let Some(label) = &report.label {
        let _ = writeln!(out, "scenario: {label}");
    }
    let _ = writeln!(out, "identifiable: {verdict}");
    if let Some(f) = &report.formula {
        let _ = writeln!(out, "formula: {f}");
    }
    if report.experimental {
        let _ = writeln!(
            out,
            "note: the query fixes a response indicator; such queries are experimental"
        );
    }
    if show_trace {
        let _ = writeln!(out, "derivation:");
        for l in trace_lines {
            let _ = writeln!(out, "  {l}");
        }
    }
    let s = &report.stats;
    let _ = writeln!(
        out,
        "terms: {}, steps: {}, time: {:.3}s",
        s.terms_generated, s.steps_applied, s.wall_time
    );
    if let Some(f) = &report.injected_formula {
        let _ = writeln!(out, "injected formula: {f}");
    }
    if let Some(v) = &report.verification {
        let _ = writeln!(
            out,
            "verification ({}): max abs discrepancy {:.3e} (tolerance {:.0e}): {}",
            v.model,
            v.max_abs_diff,
            v.tolerance,
            if v.passed { "PASS" } else { "FAIL" }
        );
        if v.zero_over_zero > 0 {
            let _ = writeln!(
                out,
                "note: {} entries evaluated 0/0 and were set to 0",
                v.zero_over_zero
            );
        }
    }
}

fn emit(report: &Report, json: bool, show_trace: bool, trace_lines: &[String], out: &mut String) {
    if json {
        out.push_str(&serde_json::to_string_pretty(report).expect("report serializes"));
        out.push('\n');
    } else {
        write_text(report, show_trace, trace_lines, out);
    }
}

fn run(a: &RunArgs, out: &mut String) -> Result<i32, Failure> {
    let (scenario, spec) = load_scenario(&a.scenario)?;
    let injected = a
        .inject_formula
        .as_deref()
        .map(|p| load_formula(p, &spec.graph))
        .transpose()?;
    let r = identify(&spec, a.limits.unwrap_or_default());
    let mut report = build_report(&scenario, &spec, &r);
    report.injected_formula = injected.as_ref().map(|f| f.render(&spec.graph));
    let mut code = verdict_code(r.verdict);
    if a.verify.is_some() || a.scm.is_some() {
        if let Some(f) = injected.as_ref().or(r.formula.as_ref()) {
            let model = load_model(a.verify, a.scm.as_deref(), &spec.graph)?;
            let v = check(f, &spec, model, a.tolerance)?;
            if !v.passed {
                code = EXIT_DISCREPANCY;
            }
            report.verification = Some(v);
        }
    }
    let lines: Vec<String> = r.trace.iter().map(|s| s.render(&spec.graph)).collect();
    emit(&report, a.json, a.trace, &lines, out);
    Ok(code)
}

fn verify(a: &VerifyArgs, out: &mut String) -> Result<i32, Failure> {
    let (scenario, spec) = load_scenario(&a.scenario)?;
    let injected = a
        .inject_formula
        .as_deref()
        .map(|p| load_formula(p, &spec.graph))
        .transpose()?;
    let r = identify(&spec, a.limits.unwrap_or_default());
    let mut report = build_report(&scenario, &spec, &r);
    report.injected_formula = injected.as_ref().map(|f| f.render(&spec.graph));
    let Some(f) = injected.as_ref().or(r.formula.as_ref()) else {
        emit(&report, a.json, false, &[], out);
        return Ok(verdict_code(r.verdict));
    };
    let model = load_model(a.seed, a.scm.as_deref(), &spec.graph)?;
    let v = check(f, &spec, model, a.tolerance)?;
    let code = if v.passed { 0 } else { EXIT_DISCREPANCY };
    report.verification = Some(v);
    emit(&report, a.json, false, &[], out);
    Ok(code)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expect {
    Identifiable,
    NotIdentifiable,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestCell {
    pub row: String,
    pub column: String,
    pub file: PathBuf,
    pub expect: Expect,
    /// Built-in model pair proving a negative verdict, or `uncovered`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub cell: Vec<ManifestCell>,
}

#[derive(Debug, Serialize)]
pub struct CellResult {
    pub row: String,
    pub column: String,
    pub file: String,
    pub expect: Expect,
    pub status: &'static str,
    pub formula: Option<String>,
    pub matches: bool,
    pub wall_time: f64,
}

#[derive(Debug, Serialize)]
pub struct BatchReport {
    pub title: String,
    pub cells: Vec<CellResult>,
    pub mismatches: usize,
}

fn batch(a: &BatchArgs, out: &mut String) -> Result<i32, Failure> {
    let text = read(&a.manifest)?;
    let manifest: Manifest = toml::from_str(&text)
        .map_err(|e| Failure::data(format!("{}: {e}", a.manifest.display())))?;
    let base = a.manifest.parent().unwrap_or(Path::new("."));
    let loaded = manifest
        .cell
        .iter()
        .map(|c| load_scenario(&base.join(&c.file)).map(|(_, spec)| spec))
        .collect::<Result<Vec<_>, _>>()?;
    let limits = a.limits.unwrap_or_default();
    let results: Vec<IdentifyResult> = loaded
        .par_iter()
        .map(|spec| identify(spec, limits))
        .collect();
    let cells: Vec<CellResult> = manifest
        .cell
        .iter()
        .zip(&loaded)
        .zip(&results)
        .map(|((c, spec), r)| {
            let matches = match c.expect {
                Expect::Identifiable => r.verdict == Verdict::Identifiable,
                Expect::NotIdentifiable => r.verdict == Verdict::NotIdentifiable,
            };
            CellResult {
                row: c.row.clone(),
                column: c.column.clone(),
                file: c.file.display().to_string(),
                expect: c.expect,
                status: status(r.verdict).0,
                formula: r.formula.as_ref().map(|f| f.render(&spec.graph)),
                matches,
                wall_time: r.stats.wall_time,
            }
        })
        .collect();
    let mismatches = cells.iter().filter(|c| !c.matches).count();
    let report = BatchReport {
        title: manifest.title.clone(),
        cells,
        mismatches,
    };
    if a.json {
        out.push_str(&serde_json::to_string_pretty(&report).expect("report serializes"));
        out.push('\n');
    } else {
        write_grid(&report, out);
    }
    Ok(if mismatches == 0 {
        0
    } else {
        EXIT_NOT_IDENTIFIABLE
    })
}

fn write_grid(report: &BatchReport, out: &mut String) {
    let mut rows: Vec<&str> = Vec::new();
    let mut cols: Vec<&str> = Vec::new();
    let mut at: BTreeMap<(&str, &str), &CellResult> = BTreeMap::new();
    for c in &report.cells {
        if !rows.contains(&c.row.as_str()) {
            rows.push(&c.row);
        }
        if !cols.contains(&c.column.as_str()) {
            cols.push(&c.column);
        }
        at.insert((&c.row, &c.column), c);
    }
    if !report.title.is_empty() {
        let _ = writeln!(out, "{}", report.title);
    }
    let width = cols
        .iter()
        .map(|c| c.chars().count())
        .max()
        .unwrap_or(1)
        .max(2)
        + 1;
    let _ = write!(out, "{:6}", "");
    for c in &cols {
        let _ = write!(out, "{c:>width$}");
    }
    out.push('\n');
    for r in &rows {
        let _ = write!(out, "{r:6}");
        for c in &cols {
            let mark = match at.get(&(*r, *c)) {
                None => " ".to_string(),
                Some(cell) => {
                    let sym = match cell.status {
                        "identifiable" => "✓",
                        "not-identifiable" => "✗",
                        _ => "?",
                    };
                    if cell.matches {
                        sym.to_string()
                    } else {
                        format!("{sym}!")
                    }
                }
            };
            let _ = write!(out, "{mark:>width$}");
        }
        out.push('\n');
    }
    let _ = writeln!(
        out,
        "{} scenarios, {} mismatches",
        report.cells.len(),
        report.mismatches
    );
    for c in report.cells.iter().filter(|c| !c.matches) {
        let _ = writeln!(
            out,
            "mismatch: row {} column {} ({}): expected {:?}, got {}",
            c.row, c.column, c.file, c.expect, c.status
        );
    }
}

/// Formula that chains two experiments, valid only without confounding of
/// the mediator and the outcome.
pub const CHAIN_FORMULA: &str = "[sum_{Z} [p(Z|do(X))*p(Y|do(Z))]]";

fn export_fixtures(dir: &Path, out: &mut String) -> Result<i32, Failure> {
    let io = |e: std::io::Error| Failure {
        code: EXIT_NO_INPUT,
        message: format!("{}: {e}", dir.display()),
    };
    let mut manifests: BTreeMap<&str, Manifest> = BTreeMap::new();
    let mut written = 0;
    for f in fixtures::all_fixtures() {
        let name = match f.suite {
            "table1" => format!("r{}-{}", f.row, f.column),
            "fig4" => format!("{}-r{}", f.column, f.row),
            _ => f.column.clone(),
        };
        let file = PathBuf::from(f.suite).join(format!("{name}.scenario"));
        let path = dir.join(&file);
        fs::create_dir_all(path.parent().expect("has parent")).map_err(io)?;
        fs::write(&path, f.scenario.to_string()).map_err(io)?;
        written += 1;
        let expect = if f.expect == Some(true) {
            Expect::Identifiable
        } else {
            Expect::NotIdentifiable
        };
        let oracle = if f.suite == "table1" && expect == Expect::NotIdentifiable {
            let spec = f.scenario.to_spec().map_err(Failure::data)?;
            let found = find_witness(&spec, Params::DEFAULT, 1e-12, 1e-3).map_err(Failure::data)?;
            Some(found.map_or_else(
                || "uncovered".to_string(),
                |c| c.construction.name().to_string(),
            ))
        } else {
            None
        };
        let m = manifests.entry(f.suite).or_default();
        m.cell.push(ManifestCell {
            row: f.row.clone(),
            column: f.column.clone(),
            file,
            expect,
            oracle,
        });
    }
    // chain of experiments on the graph where it fails
    let xor = Scenario::new(
        fixtures::GRAPH_1D,
        fixtures::TABLE1_SOURCES[2],
        fixtures::QUERY,
    )
    .with_label("xor-chain");
    let xor_file = PathBuf::from("examples/xor-chain.scenario");
    fs::write(dir.join(&xor_file), xor.to_string()).map_err(io)?;
    written += 1;
    manifests
        .entry("examples")
        .or_default()
        .cell
        .push(ManifestCell {
            row: "1".into(),
            column: "xor-chain".into(),
            file: xor_file,
            expect: Expect::NotIdentifiable,
            oracle: None,
        });
    let g = xor.to_spec().map_err(Failure::data)?.graph;
    let model = xor_model(&g).map_err(Failure::data)?;
    fs::create_dir_all(dir.join("models")).map_err(io)?;
    let json = serde_json::to_string_pretty(&model.to_json()).expect("model serializes");
    fs::write(dir.join("models/xor.json"), json + "\n").map_err(io)?;
    fs::create_dir_all(dir.join("formulas")).map_err(io)?;
    fs::write(
        dir.join("formulas/chain.formula"),
        format!("{CHAIN_FORMULA}\n"),
    )
    .map_err(io)?;
    fs::write(
        dir.join("formulas/salt-reference.formula"),
        format!("{}\n", fixtures::FIG3_REFERENCE),
    )
    .map_err(io)?;
    written += 3;
    let titles = [
        (
            "table1",
            "P(Y|do(X)) from nine source combinations on seven front-door variants",
        ),
        (
            "fig4",
            "P(Y|do(X)) under missing data: selective sampling (a) and case-control (b)",
        ),
        ("examples", "Worked examples"),
    ];
    for (suite, title) in titles {
        let mut m = manifests.remove(suite).unwrap_or_default();
        m.title = title.to_string();
        let mut text = String::new();
        if suite == "table1" {
            text.push_str(
                "# `oracle` names the model pair that proves a negative cell; `uncovered` marks\n",
            );
            text.push_str("# cells whose negative verdict has no built-in witness.\n");
        }
        text.push_str(&toml::to_string(&m).expect("manifest serializes"));
        fs::write(dir.join(format!("{suite}.toml")), text).map_err(io)?;
        written += 1;
    }
    let _ = writeln!(out, "wrote {written} files to {}", dir.display());
    Ok(0)
}
