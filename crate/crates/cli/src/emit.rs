//! Deterministic serialization: every float is written as 17-significant-
//! digit scientific notation (exact f64 round-trip), in CSV and JSON alike,
//! so identical configurations produce identical bytes.

use std::io::Write;
use std::path::Path;

use fisher_renyi::{Error, Result};

pub const CSV_HEADER: &str = "p,lambda,d,A_R,A_F,K_FR,C";

/// 17 significant digits, scientific.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV cell: formatted number, or empty for a missing value.
pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// JSON float: bare scientific literal when finite, else a string (JSON has
/// no literal for infinities).
pub fn json_num(v: f64) -> String {
    if v.is_finite() {
        num(v)
    } else {
        format!("\"{v}\"")
    }
}

/// JSON float or null.
pub fn json_opt(v: Option<f64>) -> String {
    v.map(json_num).unwrap_or_else(|| "null".to_string())
}

pub fn json_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub fn csv_row(
    p: f64,
    lam: f64,
    d: f64,
    a_r: Option<f64>,
    a_f: Option<f64>,
    k_fr: Option<f64>,
    c: Option<f64>,
) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        num(p),
        num(lam),
        num(d),
        opt_num(a_r),
        opt_num(a_f),
        opt_num(k_fr),
        opt_num(c)
    )
}

/// Write the body to the output file when one is configured, else to stdout.
pub fn deliver(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|e| Error::Io(format!("cannot write to stdout: {e}")))
        }
    }
}
