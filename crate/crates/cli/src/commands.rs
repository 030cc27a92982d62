//! The five subcommands. Each returns the text destined for stdout (or
//! `--out`), the exit status, and any notes for stderr.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cauchy_omega::io::{
    instance_to_json, map_output_to_json, matrix_to_json, parse_instance, parse_matrix,
    report_to_csv, report_to_json,
};
use cauchy_omega::lyapunov::{residual, residual_tolerance, DEFAULT_PANELS};
use cauchy_omega::specmap::verify_selected;
use cauchy_omega::{
    solve_eigenbasis, solve_integral, spectral_map, uniqueness_probe, verify_all, CheckGroup,
    DoubleDouble, Error, LyapunovProblem, Scalar, ScalarMode, Tolerances, VerificationReport,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{OutputFormat, RunConfig};
use crate::exit::{CliError, Status};
use crate::generate::{generate, GenParams};

/// Relative gap allowed between the eigenbasis and integral Lyapunov solvers.
pub const LYAPUNOV_GAP_TOL: f64 = 1e-9;

/// Scaling factors `(t, s)` used by `cond` when it runs the f64 suite.
const DEFAULT_SCALES: (f64, f64) = (2.0, 5.0);

#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub text: String,
    pub status: Status,
    pub notes: Vec<String>,
}

impl Output {
    fn new(text: String, status: Status) -> Self {
        Self {
            text,
            status,
            notes: Vec::new(),
        }
    }
}

/// The `--checks` argument: `all` or a comma-separated list of group names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckList(pub Vec<CheckGroup>);

impl Default for CheckList {
    fn default() -> Self {
        CheckList(CheckGroup::ALL.to_vec())
    }
}

impl FromStr for CheckList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut groups = Vec::new();
        for name in s.split(',').map(str::trim) {
            if name == "all" {
                return Ok(CheckList::default());
            }
            groups.push(name.parse::<CheckGroup>()?);
        }
        Ok(CheckList(groups))
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, &e))
}

fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serializes");
    s.push('\n');
    s
}

fn json_value(text: &str) -> Value {
    serde_json::from_str(text).expect("library writers emit valid JSON")
}

fn json_only(cfg: &RunConfig, command: &str) -> Result<(), CliError> {
    match cfg.format {
        OutputFormat::Json => Ok(()),
        OutputFormat::Csv => Err(CliError::validation(format!(
            "--format csv applies to verify reports only, not to {command}"
        ))),
    }
}

fn map_text<T: Scalar>(text: &str) -> Result<String, Error> {
    let p = parse_instance::<T>(text)?;
    Ok(map_output_to_json(&spectral_map(&p)?))
}

/// Writes `Ω(a, A)` with `U` and the eigensolver diagnostics.
pub fn cmd_map(input: &Path, cfg: &RunConfig) -> Result<Output, CliError> {
    json_only(cfg, "map")?;
    let text = read(input)?;
    let out = match cfg.mode {
        ScalarMode::F64 => map_text::<f64>(&text),
        ScalarMode::Dd => map_text::<DoubleDouble>(&text),
    }
    .map_err(|e| CliError::from_core(e, cfg.mode))?;
    Ok(Output::new(out, Status::Pass))
}

fn verify_text<T: Scalar>(
    text: &str,
    checks: &CheckList,
    scales: (f64, f64),
    tol: &Tolerances,
) -> Result<VerificationReport, Error> {
    let p = parse_instance::<T>(text)?;
    verify_selected(&p, &checks.0, T::of(scales.0), T::of(scales.1), tol)
}

fn verify_file(
    path: &Path,
    checks: &CheckList,
    scales: (f64, f64),
    cfg: &RunConfig,
) -> Result<VerificationReport, CliError> {
    let text = read(path)?;
    let tol = cfg.tolerances();
    match cfg.mode {
        ScalarMode::F64 => verify_text::<f64>(&text, checks, scales, &tol),
        ScalarMode::Dd => verify_text::<DoubleDouble>(&text, checks, scales, &tol),
    }
    .map_err(|e| CliError::from_core(e, cfg.mode))
}

fn render_report(report: &VerificationReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => report_to_json(report),
        OutputFormat::Csv => report_to_csv(report),
    }
}

fn summary(label: &str, report: &VerificationReport) -> String {
    let failed = report
        .checks
        .iter()
        .filter(|c| c.status == cauchy_omega::CheckStatus::Fail)
        .count();
    let inconclusive = report
        .checks
        .iter()
        .filter(|c| c.status == cauchy_omega::CheckStatus::Inconclusive)
        .count();
    format!(
        "{label}: {} checks, {failed} failed, {inconclusive} inconclusive",
        report.checks.len()
    )
}

/// Runs the selected check groups on one instance file, or on every `.json`
/// file of a directory (concurrently, one instance per task).
///
/// `node_scale` and `weight_scale` are the `(t, s)` of the scaling check.
/// A directory run exits 4 if any check failed, otherwise with the status
/// of the first instance that could not be verified, otherwise 3 if any
/// check was inconclusive.
pub fn cmd_verify(
    input: &Path,
    checks: &CheckList,
    node_scale: f64,
    weight_scale: f64,
    cfg: &RunConfig,
) -> Result<Output, CliError> {
    for (flag, x) in [
        ("--node-scale", node_scale),
        ("--weight-scale", weight_scale),
    ] {
        if !(x.is_finite() && x > 0.0) {
            return Err(CliError::validation(format!(
                "{flag} must be positive, got {x}"
            )));
        }
    }
    if checks.0.is_empty() {
        return Err(CliError::validation("--checks selects no check groups"));
    }
    let scales = (node_scale, weight_scale);
    if input.is_dir() {
        return verify_directory(input, checks, scales, cfg);
    }
    let report = verify_file(input, checks, scales, cfg)?;
    let mut out = Output::new(
        render_report(&report, cfg.format),
        Status::of_report(&report),
    );
    out.notes
        .push(summary(&input.display().to_string(), &report));
    Ok(out)
}

fn verify_directory(
    dir: &Path,
    checks: &CheckList,
    scales: (f64, f64),
    cfg: &RunConfig,
) -> Result<Output, CliError> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::io(dir, &e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::validation(format!(
            "{}: no .json instances",
            dir.display()
        )));
    }
    let results: Vec<(String, Result<VerificationReport, CliError>)> = paths
        .par_iter()
        .map(|p| {
            let name = p
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            (name, verify_file(p, checks, scales, cfg))
        })
        .collect();

    let mut notes = Vec::new();
    let mut any_failed = false;
    let mut any_inconclusive = false;
    let mut first_error = None;
    for (name, result) in &results {
        match result {
            Ok(r) => {
                any_failed |= r.any_failed();
                any_inconclusive |= r.any_inconclusive();
                notes.push(summary(name, r));
            }
            Err(e) => {
                first_error.get_or_insert(e.status());
                notes.push(format!("{name}: {e}"));
            }
        }
    }
    let status = if any_failed {
        Status::Failed
    } else if let Some(s) = first_error {
        s
    } else if any_inconclusive {
        Status::Inconclusive
    } else {
        Status::Pass
    };

    let text = match cfg.format {
        OutputFormat::Json => {
            let instances: Vec<Value> = results
                .iter()
                .map(|(name, result)| match result {
                    Ok(r) => {
                        let mut v = json_value(&report_to_json(r));
                        v["path"] = json!(name);
                        v
                    }
                    Err(e) => {
                        json!({"path": name, "error": e.message(), "exit_code": e.exit_code()})
                    }
                })
                .collect();
            to_pretty(&json!({"instances": instances, "overall": status == Status::Pass}))
        }
        OutputFormat::Csv => {
            let mut s = String::from("name,residual,tolerance,passed\n");
            for (name, result) in &results {
                if let Ok(r) = result {
                    for line in report_to_csv(r).lines().skip(1) {
                        s.push_str(&format!("{name}:{line}\n"));
                    }
                }
            }
            s
        }
    };
    Ok(Output {
        text,
        status,
        notes,
    })
}

/// Writes a seeded random instance (seed from the run configuration).
pub fn cmd_gen(params: &GenParams, cfg: &RunConfig) -> Result<Output, CliError> {
    json_only(cfg, "gen")?;
    let p = generate(params, cfg.seed)?;
    Ok(Output::new(instance_to_json(&p), Status::Pass))
}

fn cond_text<T: Scalar>(text: &str) -> Result<Value, Error> {
    let p = parse_instance::<T>(text)?;
    let out = spectral_map(&p)?;
    let b = out.image().nodes();
    Ok(json!({
        "mode": T::MODE.to_string(),
        "n": p.len(),
        "kappa": out.kappa(),
        "b_1": b[0].to_decimal(),
        "b_n": b[b.len() - 1].to_decimal(),
    }))
}

/// The full f64 suite at the default scaling factors; any error counts as
/// not passing.
fn f64_suite_passes(text: &str, tol: &Tolerances) -> bool {
    parse_instance::<f64>(text)
        .and_then(|p| verify_all(&p, DEFAULT_SCALES.0, DEFAULT_SCALES.1, tol))
        .map(|r| r.overall())
        .unwrap_or(false)
}

/// Reports `κ = b_N/b_1`, the extreme eigenvalues and the cheapest scalar
/// mode in which the whole verification suite passes.
pub fn cmd_cond(input: &Path, cfg: &RunConfig) -> Result<Output, CliError> {
    json_only(cfg, "cond")?;
    let text = read(input)?;
    let mut v = match cfg.mode {
        ScalarMode::F64 => cond_text::<f64>(&text),
        ScalarMode::Dd => cond_text::<DoubleDouble>(&text),
    }
    .map_err(|e| CliError::from_core(e, cfg.mode))?;
    let passes = f64_suite_passes(&text, &cfg.tolerances());
    v["f64_suite_passes"] = json!(passes);
    v["recommended_mode"] = json!(if passes { "f64" } else { "dd" });
    Ok(Output::new(to_pretty(&v), Status::Pass))
}

fn lyapunov_text<T: Scalar>(
    x_text: &str,
    k_text: &str,
    oracle: bool,
    tol: &Tolerances,
) -> Result<(Value, Status), Error> {
    let prob = LyapunovProblem::new(parse_matrix::<T>(x_text)?, parse_matrix::<T>(k_text)?)?;
    let y = solve_eigenbasis(&prob)?;
    let mut v = json!({
        "mode": T::MODE.to_string(),
        "n": prob.n(),
        "Y": json_value(&matrix_to_json(&y))["rows"],
        "residual": residual(&prob, &y).to_decimal(),
        "tolerance": residual_tolerance(&prob, &y).to_decimal(),
    });
    let mut status = Status::Pass;
    if oracle {
        let t_max = prob.default_t_max()?;
        let sol = solve_integral(&prob, t_max, DEFAULT_PANELS)?;
        let gap = uniqueness_probe(&prob, &y, &sol.y).as_f64();
        let size = y.max_abs().as_f64();
        let relative = if size > 0.0 { gap / size } else { gap };
        let limit = tol.relative::<T>(LYAPUNOV_GAP_TOL);
        let agrees = relative <= limit;
        if !agrees {
            status = Status::Failed;
        }
        v["oracle"] = json!({
            "gap": gap,
            "relative_gap": relative,
            "tolerance": limit,
            "t_max": t_max.to_decimal(),
            "truncation_bound": sol.truncation_bound.as_f64(),
            "panels": sol.panels,
            "agrees": agrees,
        });
    }
    Ok((v, status))
}

/// Solves `XY + YX = K` in the eigenbasis of `X`; with `oracle` also by
/// quadrature of `∫ e^{−tX} K e^{−tX} dt`, reporting the gap between them.
pub fn cmd_lyapunov(
    x_path: &Path,
    k_path: &Path,
    oracle: bool,
    cfg: &RunConfig,
) -> Result<Output, CliError> {
    json_only(cfg, "lyapunov")?;
    let x_text = read(x_path)?;
    let k_text = read(k_path)?;
    let tol = cfg.tolerances();
    let (v, status) = match cfg.mode {
        ScalarMode::F64 => lyapunov_text::<f64>(&x_text, &k_text, oracle, &tol),
        ScalarMode::Dd => lyapunov_text::<DoubleDouble>(&x_text, &k_text, oracle, &tol),
    }
    .map_err(|e| match e {
        Error::NotPositiveDefinite { .. } => CliError::validation(e.to_string()),
        e => CliError::from_core(e, cfg.mode),
    })?;
    let mut out = Output::new(to_pretty(&v), status);
    if status == Status::Failed {
        out.notes
            .push("eigenbasis and integral solutions disagree beyond tolerance".into());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        fs::File::create(&p)
            .unwrap()
            .write_all(body.as_bytes())
            .unwrap();
        p
    }

    fn cfg(mode: ScalarMode) -> RunConfig {
        RunConfig {
            mode,
            ..RunConfig::default()
        }
    }

    #[test]
    fn check_list_parsing() {
        assert_eq!("all".parse::<CheckList>().unwrap(), CheckList::default());
        assert_eq!(
            "involution, moments".parse::<CheckList>().unwrap().0,
            vec![CheckGroup::Involution, CheckGroup::Moments]
        );
        assert_eq!(
            "scaling,all".parse::<CheckList>().unwrap(),
            CheckList::default()
        );
        assert!("involution,bogus".parse::<CheckList>().is_err());
    }

    #[test]
    fn map_closed_form_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = file(dir.path(), "one.json", r#"{"n":1,"a":[2],"A":[3]}"#);
        let out = cmd_map(&p, &cfg(ScalarMode::F64)).unwrap();
        let v: Value = serde_json::from_str(&out.text).unwrap();
        assert_eq!(v["b"], json!(["0.75"]));
        assert_eq!(v["B"], json!(["3"]));

        let bad = file(dir.path(), "bad.json", r#"{"n":2,"a":[2,1],"A":[1,1]}"#);
        let e = cmd_map(&bad, &cfg(ScalarMode::F64)).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert_eq!(e.message(), "NodesNotStrictlyIncreasing at index 1");

        let e = cmd_map(&dir.path().join("missing.json"), &cfg(ScalarMode::F64)).unwrap_err();
        assert_eq!(e.exit_code(), 1);

        let csv = RunConfig {
            format: OutputFormat::Csv,
            ..RunConfig::default()
        };
        assert_eq!(cmd_map(&p, &csv).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn verify_directory_aggregates() {
        let dir = tempfile::tempdir().unwrap();
        file(dir.path(), "a.json", r#"{"n":1,"a":[1],"A":[2]}"#);
        file(dir.path(), "b.json", r#"{"n":2,"a":[1,2],"A":[1,1]}"#);
        file(dir.path(), "notes.txt", "ignored");
        let out = cmd_verify(
            dir.path(),
            &CheckList::default(),
            2.0,
            5.0,
            &cfg(ScalarMode::Dd),
        )
        .unwrap();
        assert_eq!(out.status, Status::Pass);
        let v: Value = serde_json::from_str(&out.text).unwrap();
        assert_eq!(v["instances"].as_array().unwrap().len(), 2);
        assert_eq!(v["instances"][0]["path"], "a.json");
        assert_eq!(v["overall"], true);

        file(dir.path(), "c.json", r#"{"n":2,"a":[2,1],"A":[1,1]}"#);
        let out = cmd_verify(
            dir.path(),
            &CheckList::default(),
            2.0,
            5.0,
            &cfg(ScalarMode::F64),
        )
        .unwrap();
        assert_eq!(out.status, Status::Validation);
        assert!(out
            .notes
            .iter()
            .any(|n| n.contains("NodesNotStrictlyIncreasing")));
    }

    #[test]
    fn verify_rejects_bad_scales() {
        let dir = tempfile::tempdir().unwrap();
        let p = file(dir.path(), "a.json", r#"{"n":1,"a":[1],"A":[2]}"#);
        let e = cmd_verify(&p, &CheckList::default(), 0.0, 5.0, &cfg(ScalarMode::F64)).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn cond_reports_kappa() {
        let dir = tempfile::tempdir().unwrap();
        let p = file(dir.path(), "two.json", r#"{"n":2,"a":[1,2],"A":[1,1]}"#);
        let out = cmd_cond(&p, &cfg(ScalarMode::F64)).unwrap();
        let v: Value = serde_json::from_str(&out.text).unwrap();
        let kappa = v["kappa"].as_f64().unwrap();
        // Eigenvalues of [[1/2, 1/3], [1/3, 1/4]]: (3/8) ± √(1/64 + 1/9).
        let r = (1.0f64 / 64.0 + 1.0 / 9.0).sqrt();
        assert!((kappa - (0.375 + r) / (0.375 - r)).abs() < 1e-9 * kappa);
        assert_eq!(v["recommended_mode"], "f64");
    }

    #[test]
    fn lyapunov_identity() {
        let dir = tempfile::tempdir().unwrap();
        let i = r#"{"n":2,"rows":[[1,0],[0,1]]}"#;
        let x = file(dir.path(), "x.json", i);
        let k = file(dir.path(), "k.json", i);
        let out = cmd_lyapunov(&x, &k, true, &cfg(ScalarMode::F64)).unwrap();
        assert_eq!(out.status, Status::Pass);
        let v: Value = serde_json::from_str(&out.text).unwrap();
        assert_eq!(v["Y"], json!([["0.5", "0"], ["0", "0.5"]]));
        assert_eq!(v["oracle"]["agrees"], true);

        let singular = file(dir.path(), "s.json", r#"{"n":2,"rows":[[1,0],[0,0]]}"#);
        let e = cmd_lyapunov(&singular, &k, false, &cfg(ScalarMode::F64)).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
