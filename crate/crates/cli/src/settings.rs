//! Command-line flags, the flat key=value config file, and their merge into
//! one typed [`Settings`] value (flags override file entries, file entries
//! override defaults).

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use fisher_renyi::{Error, GridRange, QuadConfig, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Compute,
    Sweep,
    Chart,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityKind {
    Blackbody,
    GenGaussian,
    Step,
    Grid,
}

/// Evaluation route for `compute` on the blackbody density.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Auto,
    Analytic,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Text,
}

/// Shared flag set; every subcommand takes the same flags so a single config
/// file can drive any of them.
#[derive(Debug, Default, clap::Args)]
pub struct RunArgs {
    /// Flat key=value config file; command-line flags override its entries
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Density family: blackbody | gen-gaussian | step | grid
    #[arg(long, value_name = "KIND")]
    pub density: Option<String>,

    /// Blackbody dimension(s) d > 1; comma-separated list for sweep
    #[arg(long, value_name = "D[,D...]")]
    pub d: Option<String>,

    /// Blackbody temperature scale (the complexity itself is scale-free)
    #[arg(long, value_name = "THETA")]
    pub theta: Option<f64>,

    /// Complexity parameter p >= 1; "inf" selects the total-variation member
    #[arg(long, value_name = "P")]
    pub p: Option<f64>,

    /// Complexity parameter lambda > 1/(1+p)
    #[arg(long, value_name = "LAMBDA")]
    pub lambda: Option<f64>,

    /// Inclusive p range for sweep/chart (N evenly spaced points)
    #[arg(long, value_name = "A:B:N")]
    pub p_range: Option<String>,

    /// Inclusive lambda range for sweep/chart (N evenly spaced points)
    #[arg(long, value_name = "A:B:N")]
    pub lambda_range: Option<String>,

    /// Shape exponent p of a gen-gaussian density
    #[arg(long, value_name = "P")]
    pub gg_p: Option<f64>,

    /// Shape order lambda of a gen-gaussian density
    #[arg(long, value_name = "LAMBDA")]
    pub gg_lambda: Option<f64>,

    /// Density file: edges/heights key=value lines (step) or x,pdf CSV (grid)
    #[arg(long, value_name = "FILE")]
    pub file: Option<PathBuf>,

    /// Output file (default stdout); sweep/chart add <OUT>.extrema.json
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// Output format: csv | json (defaults: compute json, sweep/chart csv,
    /// verify plain text)
    #[arg(long, value_name = "FMT")]
    pub format: Option<String>,

    /// Evaluation route for compute: auto | analytic | numeric
    #[arg(long, value_name = "ROUTE")]
    pub path: Option<String>,

    /// Worker threads (default: machine parallelism); results are joined in
    /// a fixed order, so output never depends on N
    #[arg(long, value_name = "N")]
    pub jobs: Option<usize>,

    /// Absolute quadrature tolerance
    #[arg(long, value_name = "TOL")]
    pub abs_tol: Option<f64>,

    /// Relative quadrature tolerance
    #[arg(long, value_name = "TOL")]
    pub rel_tol: Option<f64>,

    /// Adaptive subdivision budget per integral
    #[arg(long, value_name = "N")]
    pub max_subdivisions: Option<usize>,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct Settings {
    pub command: Command,
    pub density: DensityKind,
    pub d_list: Vec<f64>,
    pub theta: f64,
    pub p: Option<f64>,
    pub lambda: Option<f64>,
    pub p_range: Option<GridRange>,
    pub lambda_range: Option<GridRange>,
    pub gg_p: Option<f64>,
    pub gg_lambda: Option<f64>,
    pub file: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub route: Route,
    pub jobs: Option<usize>,
    pub quad: QuadConfig,
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

const KNOWN_KEYS: &[&str] = &[
    "density",
    "d",
    "theta",
    "p",
    "lambda",
    "p-range",
    "lambda-range",
    "gg-p",
    "gg-lambda",
    "file",
    "out",
    "format",
    "path",
    "jobs",
    "abs-tol",
    "rel-tol",
    "max-subdivisions",
];

/// Read a flat key=value file ('#' starts a comment line; later duplicates
/// win, matching "last flag wins" shells).
fn load_config(path: &Path) -> Result<HashMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = HashMap::new();
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
        let key = key.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(parse_err(format!(
                "{}:{}: unknown key {key:?} (known keys: {})",
                path.display(),
                i + 1,
                KNOWN_KEYS.join(", ")
            )));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

/// "A:B:N" -> inclusive N-point range.
fn parse_range(s: &str, what: &str) -> Result<GridRange> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || parse_err(format!("{what} must be A:B:N (e.g. 1:6:100), got {s:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    GridRange::new(a, b, n)
}

fn parse_d_list(s: &str) -> Result<Vec<f64>> {
    let ds: Vec<f64> = s
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| parse_err(format!("d must be a number or comma list, got {s:?}")))
        })
        .collect::<Result<_>>()?;
    if ds.is_empty() {
        return Err(parse_err("d list must not be empty".to_string()));
    }
    Ok(ds)
}

// Flag value if present, else the config-file entry parsed as T.
fn merged<T: std::str::FromStr>(
    flag: Option<T>,
    file: &HashMap<String, String>,
    key: &str,
    kind: &str,
) -> Result<Option<T>> {
    if flag.is_some() {
        return Ok(flag);
    }
    file.get(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|_| parse_err(format!("config key {key}: expected {kind}, got {v:?}")))
        })
        .transpose()
}

fn merged_string(flag: Option<&str>, file: &HashMap<String, String>, key: &str) -> Option<String> {
    flag.map(str::to_string).or_else(|| file.get(key).cloned())
}

impl Settings {
    pub fn resolve(command: Command, args: &RunArgs) -> Result<Settings> {
        let file = match &args.config {
            Some(p) => load_config(p)?,
            None => HashMap::new(),
        };

        let density = match merged_string(args.density.as_deref(), &file, "density") {
            None => DensityKind::Blackbody,
            Some(s) => match s.as_str() {
                "blackbody" => DensityKind::Blackbody,
                "gen-gaussian" => DensityKind::GenGaussian,
                "step" => DensityKind::Step,
                "grid" => DensityKind::Grid,
                other => {
                    return Err(parse_err(format!(
                        "unknown density {other:?} (expected blackbody, gen-gaussian, step, or grid)"
                    )))
                }
            },
        };

        let d_list = match merged_string(args.d.as_deref(), &file, "d") {
            None => vec![3.0],
            Some(s) => parse_d_list(&s)?,
        };
        let theta = merged(args.theta, &file, "theta", "a number")?.unwrap_or(1.0);
        let p = merged(args.p, &file, "p", "a number")?;
        let lambda = merged(args.lambda, &file, "lambda", "a number")?;
        let p_range = merged_string(args.p_range.as_deref(), &file, "p-range")
            .map(|s| parse_range(&s, "p-range"))
            .transpose()?;
        let lambda_range = merged_string(args.lambda_range.as_deref(), &file, "lambda-range")
            .map(|s| parse_range(&s, "lambda-range"))
            .transpose()?;
        let gg_p = merged(args.gg_p, &file, "gg-p", "a number")?;
        let gg_lambda = merged(args.gg_lambda, &file, "gg-lambda", "a number")?;
        let file_path = args
            .file
            .clone()
            .or_else(|| file.get("file").map(PathBuf::from));
        let out = args
            .out
            .clone()
            .or_else(|| file.get("out").map(PathBuf::from));
        let jobs = merged(args.jobs, &file, "jobs", "a thread count")?;

        let mut quad = QuadConfig::default();
        if let Some(v) = merged(args.abs_tol, &file, "abs-tol", "a number")? {
            quad.abs_tol = v;
        }
        if let Some(v) = merged(args.rel_tol, &file, "rel-tol", "a number")? {
            quad.rel_tol = v;
        }
        if let Some(v) = merged(args.max_subdivisions, &file, "max-subdivisions", "a count")? {
            quad.max_subdivisions = v;
        }

        let format = match merged_string(args.format.as_deref(), &file, "format") {
            None => match command {
                Command::Compute => Format::Json,
                Command::Sweep | Command::Chart => Format::Csv,
                Command::Verify => Format::Text,
            },
            Some(s) => match (s.as_str(), command) {
                ("json", _) => Format::Json,
                ("csv", Command::Sweep | Command::Chart) => Format::Csv,
                ("csv", _) => {
                    return Err(parse_err(
                        "format csv applies to sweep and chart only".to_string(),
                    ))
                }
                (other, _) => {
                    return Err(parse_err(format!(
                        "unknown format {other:?} (expected csv or json)"
                    )))
                }
            },
        };

        let route = match merged_string(args.path.as_deref(), &file, "path") {
            None => Route::Auto,
            Some(s) => match s.as_str() {
                "auto" => Route::Auto,
                "analytic" => Route::Analytic,
                "numeric" => Route::Numeric,
                other => {
                    return Err(parse_err(format!(
                        "unknown evaluation route {other:?} (expected auto, analytic, or numeric)"
                    )))
                }
            },
        };

        let settings = Settings {
            command,
            density,
            d_list,
            theta,
            p,
            lambda,
            p_range,
            lambda_range,
            gg_p,
            gg_lambda,
            file: file_path,
            out,
            format,
            route,
            jobs,
            quad,
        };
        settings.validate_for_command()?;
        Ok(settings)
    }

    fn validate_for_command(&self) -> Result<()> {
        match self.command {
            Command::Compute => {
                if self.p.is_none() || self.lambda.is_none() {
                    return Err(parse_err("compute needs --p and --lambda".to_string()));
                }
                if self.p_range.is_some() || self.lambda_range.is_some() {
                    return Err(parse_err(
                        "compute takes point parameters; sweep and chart take ranges".to_string(),
                    ));
                }
                if self.density == DensityKind::Blackbody && self.d_list.len() != 1 {
                    return Err(parse_err(
                        "compute takes a single dimension d; sweep takes a list".to_string(),
                    ));
                }
            }
            Command::Sweep | Command::Chart => {
                if self.density != DensityKind::Blackbody {
                    return Err(Error::Domain(
                        "sweep and chart tabulate the blackbody surface; \
                         use compute for other densities"
                            .to_string(),
                    ));
                }
                if self.command == Command::Chart && self.d_list.len() != 1 {
                    return Err(parse_err(
                        "chart takes a single dimension d; sweep takes a list".to_string(),
                    ));
                }
                self.axis_spec(self.p, self.p_range, "p")?;
                self.axis_spec(self.lambda, self.lambda_range, "lambda")?;
            }
            Command::Verify => {}
        }
        Ok(())
    }

    fn axis_spec(&self, point: Option<f64>, range: Option<GridRange>, name: &str) -> Result<GridRange> {
        match (point, range) {
            (Some(_), Some(_)) => Err(parse_err(format!(
                "give --{name} or --{name}-range, not both"
            ))),
            (Some(v), None) => {
                if !v.is_finite() {
                    return Err(parse_err(format!(
                        "sweep and chart need finite {name}; the p = inf member is \
                         available through compute"
                    )));
                }
                GridRange::single(v)
            }
            (None, Some(r)) => Ok(r),
            (None, None) => Err(parse_err(format!(
                "{} needs --{name} or --{name}-range",
                match self.command {
                    Command::Chart => "chart",
                    _ => "sweep",
                }
            ))),
        }
    }

    /// The p axis of a sweep/chart grid (single point or range).
    pub fn p_axis(&self) -> Result<GridRange> {
        self.axis_spec(self.p, self.p_range, "p")
    }

    /// The lambda axis of a sweep/chart grid (single point or range).
    pub fn lambda_axis(&self) -> Result<GridRange> {
        self.axis_spec(self.lambda, self.lambda_range, "lambda")
    }
}
