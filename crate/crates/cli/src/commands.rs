//! The four subcommands: `compute` (one density, one parameter point),
//! `sweep`/`chart` (blackbody complexity tables), and `verify` (invariant
//! suite).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use fisher_renyi::complexity::{self, ComplexityReport, EvalPath};
use fisher_renyi::density::grid_density_from_csv_path;
use fisher_renyi::{blackbody, verify};
use fisher_renyi::{
    BlackbodySpec, Chart, CheckResult, DensityModel, Error, ExtremumKind, GenGaussianSpec,
    ParamPair, Result, StepDensity,
};

use crate::emit;
use crate::settings::{DensityKind, Format, Route, Settings};

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

// ---------------------------------------------------------------------------
// Density construction.
// ---------------------------------------------------------------------------

fn required_file<'a>(s: &'a Settings, kind: &str) -> Result<&'a Path> {
    s.file
        .as_deref()
        .ok_or_else(|| parse_err(format!("the {kind} density needs --file")))
}

/// Parse a step-density file: key=value lines with comma-separated lists
/// `edges = x0,x1,...,xn` and `heights = h0,...,h(n-1)`.
fn step_from_file(path: &Path) -> Result<DensityModel> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
    let mut edges: Option<Vec<f64>> = None;
    let mut heights: Option<Vec<f64>> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            parse_err(format!(
                "{}:{}: expected key=value, got {line:?}",
                path.display(),
                i + 1
            ))
        })?;
        let list: Vec<f64> = value
            .split(',')
            .map(|v| {
                v.trim().parse::<f64>().map_err(|_| {
                    parse_err(format!(
                        "{}:{}: expected a comma-separated number list",
                        path.display(),
                        i + 1
                    ))
                })
            })
            .collect::<Result<_>>()?;
        match key.trim() {
            "edges" => edges = Some(list),
            "heights" => heights = Some(list),
            other => {
                return Err(parse_err(format!(
                    "{}:{}: unknown key {other:?} (expected edges or heights)",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    let edges = edges.ok_or_else(|| parse_err(format!("{}: missing edges=", path.display())))?;
    let heights =
        heights.ok_or_else(|| parse_err(format!("{}: missing heights=", path.display())))?;
    StepDensity::new(edges, heights)?.model()
}

fn build_model(s: &Settings) -> Result<DensityModel> {
    match s.density {
        DensityKind::Blackbody => BlackbodySpec::new(s.d_list[0], s.theta)?.model(),
        DensityKind::GenGaussian => {
            let (p, lam) = match (s.gg_p, s.gg_lambda) {
                (Some(p), Some(lam)) => (p, lam),
                _ => {
                    return Err(parse_err(
                        "the gen-gaussian density needs --gg-p and --gg-lambda".to_string(),
                    ))
                }
            };
            GenGaussianSpec::new(p, lam)?.model()
        }
        DensityKind::Step => step_from_file(required_file(s, "step")?),
        DensityKind::Grid => grid_density_from_csv_path(required_file(s, "grid")?),
    }
}

fn density_label(s: &Settings) -> String {
    match s.density {
        DensityKind::Blackbody => format!("blackbody(d={}, theta={})", s.d_list[0], s.theta),
        DensityKind::GenGaussian => format!(
            "gen-gaussian(p={}, lambda={})",
            s.gg_p.unwrap_or(f64::NAN),
            s.gg_lambda.unwrap_or(f64::NAN)
        ),
        DensityKind::Step => format!("step({})", file_name(s)),
        DensityKind::Grid => format!("grid({})", file_name(s)),
    }
}

fn file_name(s: &Settings) -> String {
    s.file
        .as_deref()
        .map(|p| p.display().to_string())
        .unwrap_or_default()
}

// ---------------------------------------------------------------------------
// compute
// ---------------------------------------------------------------------------

pub fn compute(s: &Settings) -> Result<()> {
    let p = s.p.expect("presence checked at resolve time");
    let lam = s.lambda.expect("presence checked at resolve time");
    if s.density == DensityKind::Blackbody {
        // Gate up front so the violated inequality is reported even on the
        // numeric route (whose quadrature would fail less legibly).
        let violations = complexity::validate_params(p, lam, Some(s.d_list[0]));
        if !violations.is_empty() {
            return Err(Error::InvalidParams(violations));
        }
    }
    let report = match (s.density, s.route) {
        (DensityKind::Blackbody, Route::Analytic) => {
            blackbody::complexity_analytic_report(p, lam, s.d_list[0], &s.quad)?
        }
        // p = 1 has conjugate q = infinity and no Fisher integral
        // representation; auto falls through to the numeric route there.
        (DensityKind::Blackbody, Route::Auto) if p > 1.0 => {
            blackbody::complexity_analytic_report(p, lam, s.d_list[0], &s.quad)?
        }
        (_, Route::Analytic) => {
            return Err(Error::Domain(
                "the analytic route exists only for the blackbody density".to_string(),
            ))
        }
        _ => {
            let model = build_model(s)?;
            complexity::complexity(&model, &ParamPair::new(p, lam)?, &s.quad)?
        }
    };
    emit::deliver(s.out.as_deref(), &report_json(s, &report))
}

fn report_json(s: &Settings, r: &ComplexityReport) -> String {
    let route = match r.path {
        EvalPath::Analytic => "analytic",
        EvalPath::Numeric => "numeric",
    };
    format!(
        "{{\n  \
           \"params\": {{\"p\": {}, \"lambda\": {}, \"density\": {}}},\n  \
           \"components\": {{\"renyi\": {}, \"n_power\": {}, \"fisher\": {}, \"k_fr\": {}}},\n  \
           \"value\": {},\n  \
           \"path\": {},\n  \
           \"error_estimate\": {}\n\
         }}\n",
        emit::json_num(r.params.p),
        emit::json_num(r.params.lam),
        emit::json_str(&density_label(s)),
        emit::json_num(r.renyi),
        emit::json_num(r.n_power),
        emit::json_num(r.fisher),
        emit::json_num(r.k_fr),
        emit::json_num(r.value),
        emit::json_str(route),
        emit::json_num(r.error_estimate),
    )
}

// ---------------------------------------------------------------------------
// sweep / chart
// ---------------------------------------------------------------------------

/// Shared implementation: chart is a sweep restricted to a single dimension.
pub fn sweep(s: &Settings) -> Result<()> {
    let p_axis = s.p_axis()?;
    let lambda_axis = s.lambda_axis()?;
    let charts: Vec<Chart> = s
        .d_list
        .iter()
        .map(|&d| blackbody::chart(&p_axis, &lambda_axis, d, &s.quad))
        .collect::<Result<_>>()?;

    let body = match s.format {
        Format::Json => charts_json(&charts),
        _ => charts_csv(&charts),
    };
    emit::deliver(s.out.as_deref(), &body)?;

    // The extrema sidecar sits next to the output file; stdout runs have no
    // file for it to accompany (use --format json to get extrema inline).
    if let Some(out) = &s.out {
        let sidecar = sidecar_path(out);
        std::fs::write(&sidecar, extrema_json(&charts))
            .map_err(|e| Error::Io(format!("cannot write {}: {e}", sidecar.display())))?;
    }
    Ok(())
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".extrema.json");
    PathBuf::from(name)
}

fn charts_csv(charts: &[Chart]) -> String {
    let rows: usize = charts.iter().map(|c| c.points.len()).sum();
    let mut out = String::with_capacity((rows + 1) * 96);
    out.push_str(emit::CSV_HEADER);
    out.push('\n');
    for chart in charts {
        for pt in &chart.points {
            out.push_str(&emit::csv_row(
                pt.p, pt.lam, chart.d, pt.a_r, pt.a_f, pt.k_fr, pt.c,
            ));
            out.push('\n');
        }
    }
    out
}

fn extrema_rows(charts: &[Chart], indent: &str) -> String {
    let rows: Vec<String> = charts
        .iter()
        .flat_map(|chart| {
            chart.extrema.iter().map(|e| {
                let kind = match e.kind {
                    ExtremumKind::Minimum => "minimum",
                    ExtremumKind::Maximum => "maximum",
                };
                format!(
                    "{indent}{{\"kind\": {}, \"d\": {}, \"p\": {}, \"lambda\": {}, \"C\": {}}}",
                    emit::json_str(kind),
                    emit::json_num(chart.d),
                    emit::json_num(e.p),
                    emit::json_num(e.lam),
                    emit::json_num(e.c)
                )
            })
        })
        .collect();
    rows.join(",\n")
}

fn extrema_json(charts: &[Chart]) -> String {
    let rows = extrema_rows(charts, "    ");
    if rows.is_empty() {
        "{\n  \"extrema\": []\n}\n".to_string()
    } else {
        format!("{{\n  \"extrema\": [\n{rows}\n  ]\n}}\n")
    }
}

fn charts_json(charts: &[Chart]) -> String {
    let mut points = Vec::new();
    for chart in charts {
        for pt in &chart.points {
            points.push(format!(
                "    {{\"p\": {}, \"lambda\": {}, \"d\": {}, \"A_R\": {}, \"A_F\": {}, \
                 \"K_FR\": {}, \"C\": {}}}",
                emit::json_num(pt.p),
                emit::json_num(pt.lam),
                emit::json_num(chart.d),
                emit::json_opt(pt.a_r),
                emit::json_opt(pt.a_f),
                emit::json_opt(pt.k_fr),
                emit::json_opt(pt.c)
            ));
        }
    }
    let extrema = extrema_rows(charts, "    ");
    format!(
        "{{\n  \"points\": [\n{}\n  ],\n  \"extrema\": [{}\n  ]\n}}\n",
        points.join(",\n"),
        if extrema.is_empty() {
            String::new()
        } else {
            format!("\n{extrema}")
        }
    )
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

pub fn verify_suite(s: &Settings) -> Result<ExitCode> {
    let results = verify::run_all(&s.quad);
    let body = match s.format {
        Format::Json => verify_json(&results),
        _ => verify_text(&results),
    };
    emit::deliver(s.out.as_deref(), &body)?;
    if results.iter().all(|r| r.passed) {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}

fn verify_text(results: &[CheckResult]) -> String {
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for r in results {
        let status = if r.passed { "ok  " } else { "FAIL" };
        out.push_str(&format!(
            "{status} {:width$}  worst {:9.3e}  tol {:9.3e}",
            r.name, r.worst, r.tolerance
        ));
        if !r.passed {
            out.push_str(&format!("  {}", r.detail));
        }
        out.push('\n');
    }
    let passed = results.iter().filter(|r| r.passed).count();
    out.push_str(&format!("{passed}/{} checks passed\n", results.len()));
    out
}

fn verify_json(results: &[CheckResult]) -> String {
    let rows: Vec<String> = results
        .iter()
        .map(|r| {
            format!(
                "    {{\"name\": {}, \"passed\": {}, \"worst\": {}, \"tolerance\": {}, \
                 \"detail\": {}}}",
                emit::json_str(&r.name),
                r.passed,
                emit::json_num(r.worst),
                emit::json_num(r.tolerance),
                emit::json_str(&r.detail)
            )
        })
        .collect();
    format!("{{\n  \"checks\": [\n{}\n  ]\n}}\n", rows.join(",\n"))
}
