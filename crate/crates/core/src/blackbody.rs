//! Analytic fast path for the d-dimensional blackbody spectral density:
//! series evaluation of the Rényi constant A_R(λ,d), the Fisher integral
//! I(q,λ,d) with its closed-form special cases A_F(p,λ,d), assembly of the
//! temperature-free complexity, and (p,λ) chart generation with extremum
//! location.

use crate::complexity::{validate_params, ComplexityReport, EvalPath};
use crate::density::{blackbody_ln_norm, blackbody_mode, BlackbodySpec, DensityModel};
use crate::error::{Error, Result};
use crate::measures::{renyi_entropy_detailed, ParamPair};
use crate::quadrature::{self, QuadConfig, QuadResult};
use crate::reference;
use crate::specfun;
use once_cell::sync::Lazy;
use rayon::prelude::*;
use std::collections::HashMap;
use std::sync::Mutex;

/// How the Fisher constant of a [`BlackbodyConstants`] bundle was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantsMethod {
    /// Finite alternating sum over modified-zeta values.
    ClosedForm,
    /// Adaptive quadrature of the Fisher integral.
    Quadrature,
}

/// The analytic constants entering the blackbody complexity at one (p, λ, d).
#[derive(Debug, Clone, Copy)]
pub struct BlackbodyConstants {
    pub a_r: f64,
    pub a_f: f64,
    pub i_integral: f64,
    pub c_value: f64,
    pub method: ConstantsMethod,
}

fn check_dimension(d: f64) -> Result<()> {
    if !(d > 1.0) || !d.is_finite() {
        return Err(Error::domain(format!(
            "blackbody dimension must satisfy 1 < d < infinity, got d = {d}"
        )));
    }
    Ok(())
}

// Conjugate exponent for the analytic Fisher route; p = 1 (q = ∞) has no
// integral representation and is served by the numeric path.
fn conjugate(p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::domain(format!("requires p >= 1, got p = {p}")));
    }
    if p == 1.0 {
        return Err(Error::domain(
            "p = 1 has conjugate q = infinity: no Fisher integral; use the numeric path"
                .to_string(),
        ));
    }
    Ok(if p.is_infinite() { 1.0 } else { p / (p - 1.0) })
}

/// ln A_R(λ,d); kept in log space because Γ(λd+1) overflows well inside the
/// supported parameter range.
pub(crate) fn a_r_ln(lam: f64, d: f64) -> Result<f64> {
    check_dimension(d)?;
    if !(lam > 0.0) || !lam.is_finite() {
        return Err(Error::domain(format!(
            "A_R requires a finite order lambda > 0, got {lam}"
        )));
    }
    if (lam - 1.0).abs() < 1e-6 {
        return Err(Error::domain(
            "A_R is singular at lambda = 1; the entropy there is the Shannon limit".to_string(),
        ));
    }
    let s = lam * d + 1.0;
    let (ln_zeta, _, _) = specfun::modified_zeta_ln(s, lam, lam)?;
    Ok(specfun::log_gamma(s)? + ln_zeta - lam * blackbody_ln_norm(d)?)
}

/// Rényi constant A_R(λ,d) = Γ(λd+1) ζ_λ(λd+1, λ) / [Γ(d+1) ζ(d+1)]^λ, so
/// that ∫ρ̃^λ = A_R for the reduced (θ = 1) blackbody density.
pub fn a_r(lam: f64, d: f64) -> Result<f64> {
    Ok(a_r_ln(lam, d)?.exp())
}

// Shannon entropy of the reduced density, with its quadrature error; cached
// per dimension since charts hit the same d thousands of times.
static SHANNON_REDUCED: Lazy<Mutex<HashMap<u64, (f64, f64)>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn shannon_reduced(d: f64) -> Result<(f64, f64)> {
    if let Some(&v) = SHANNON_REDUCED.lock().unwrap().get(&d.to_bits()) {
        return Ok(v);
    }
    let model = BlackbodySpec::new(d, 1.0)?.model()?;
    let v = renyi_entropy_detailed(&model, 1.0, &QuadConfig::default())?;
    SHANNON_REDUCED.lock().unwrap().insert(d.to_bits(), v);
    Ok(v)
}

static REDUCED_MODEL: Lazy<Mutex<HashMap<u64, DensityModel>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn reduced_model(d: f64) -> Result<DensityModel> {
    if let Some(m) = REDUCED_MODEL.lock().unwrap().get(&d.to_bits()) {
        return Ok(m.clone());
    }
    let m = BlackbodySpec::new(d, 1.0)?.model()?;
    REDUCED_MODEL.lock().unwrap().insert(d.to_bits(), m.clone());
    Ok(m)
}

/// Rényi entropy of the blackbody density at temperature scale θ:
/// (1−λ)^{−1} ln A_R(λ,d) + ln θ, continued through the numeric Shannon
/// limit at λ = 1.
pub fn renyi_analytic(lam: f64, d: f64, theta: f64) -> Result<f64> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(Error::domain(format!(
            "temperature scale must satisfy 0 < theta < infinity, got {theta}"
        )));
    }
    if (lam - 1.0).abs() < 1e-6 {
        return Ok(shannon_reduced(d)?.0 + theta.ln());
    }
    Ok(a_r_ln(lam, d)? / (1.0 - lam) + theta.ln())
}

/// Fisher integral I(q,λ,d) = ∫₀^∞ x^{q(dλ−d−1)+d} (e^x−1)^{−(qλ+1)}
/// |d(e^x−1)−x e^x|^q dx, evaluated in log form and split at the mode where
/// the kernel changes sign.
pub fn i_integral(q: f64, lam: f64, d: f64, cfg: &QuadConfig) -> Result<QuadResult> {
    check_dimension(d)?;
    if !(q >= 1.0) || !q.is_finite() {
        return Err(Error::domain(format!(
            "Fisher integral requires a finite exponent q >= 1, got {q}"
        )));
    }
    if !(lam > 0.0) || !lam.is_finite() {
        return Err(Error::domain(format!(
            "Fisher integral requires a finite order lambda > 0, got {lam}"
        )));
    }
    let alpha = q * lam - q + 1.0;
    if !(alpha > 0.0) {
        return Err(Error::domain(format!(
            "Fisher integrand does not decay: needs alpha = q*lambda - q + 1 > 0, got {alpha}"
        )));
    }
    let gamma0 = (d - 1.0) * alpha - q;
    if gamma0 <= -1.0 {
        return Err(Error::domain(format!(
            "Fisher integrand behaves as x^{gamma0:.6} at the origin and diverges: \
             needs (d-1)*(q*lambda-q+1) - q > -1, equivalently lambda*p > d/(d-1)"
        )));
    }
    let a_pow = q * (d * lam - d - 1.0) + d;
    let ql1 = q * lam + 1.0;
    let f = move |x: f64| {
        if x <= 0.0 {
            return 0.0;
        }
        let om = -(-x).exp_m1();
        let kernel = d * om - x;
        let ln_f = a_pow * x.ln() + q * kernel.abs().ln() - alpha * x - ql1 * om.ln();
        if ln_f < -745.0 {
            0.0
        } else {
            ln_f.exp()
        }
    };
    let mode = blackbody_mode(d)?;
    let head_cfg = QuadConfig {
        endpoint_power_hint: Some(gamma0),
        ..*cfg
    };
    let head = quadrature::integrate(f, 0.0, mode, &head_cfg)?;
    // Rescale the tail so the transformed integrand's mass sits away from
    // t = 1; the decay rate is e^{−αx} against the power x^{a_pow}.
    let tail_scale = (1.0 + a_pow.max(0.0)) / alpha;
    let g = move |u: f64| tail_scale * f(mode + tail_scale * u);
    let tail_cfg = QuadConfig {
        endpoint_power_hint: None,
        ..*cfg
    };
    let tail = quadrature::integrate(g, 0.0, f64::INFINITY, &tail_cfg)?;
    Ok(QuadResult {
        value: head.value + tail.value,
        error_estimate: head.error_estimate + tail.error_estimate,
        subdivisions_used: head.subdivisions_used + tail.subdivisions_used,
    })
}

/// Fisher constant A_F(p,λ,d) = I(q,λ,d) / [Γ(d+1) ζ(d+1)]^{qλ−q+1} by
/// quadrature of the Fisher integral.
pub fn a_f_quadrature(p: f64, lam: f64, d: f64, cfg: &QuadConfig) -> Result<f64> {
    let q = conjugate(p)?;
    let alpha = q * lam - q + 1.0;
    let i = i_integral(q, lam, d, cfg)?;
    Ok((i.value.ln() - alpha * blackbody_ln_norm(d)?).exp())
}

fn choose(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    let mut c = 1.0;
    for j in 0..k {
        c = c * (n - j) as f64 / (j + 1) as f64;
    }
    c
}

/// Closed-form A_F for even integer conjugate q, integer qλ, and integer
/// dimension inside the convergence region d > λp/(λp−1):
/// [Γ(d+1)ζ(d+1)]^{−α} Σ_{i=0}^{q} (−1)^{q−i} C(q,i) d^i (αd−i)! ζ_{α+q−i}(1+αd−i, α).
pub fn a_f_closed(p: f64, lam: f64, d: f64) -> Result<f64> {
    let q = conjugate(p)?;
    let q_round = q.round();
    if !q.is_finite() || (q - q_round).abs() > 1e-9 || q_round < 2.0 || (q_round as i64) % 2 != 0
    {
        return Err(Error::domain(format!(
            "closed form needs an even integer conjugate q, got q = {q} (p = {p})"
        )));
    }
    let ql = q_round * lam;
    if (ql - ql.round()).abs() > 1e-9 || ql.round() < 1.0 {
        return Err(Error::domain(format!(
            "closed form needs q*lambda to be a positive integer, got q*lambda = {ql}"
        )));
    }
    if (d - d.round()).abs() > 1e-9 {
        return Err(Error::domain(format!(
            "closed form needs an integer dimension, got d = {d}"
        )));
    }
    check_dimension(d)?;
    let lp = lam * p;
    if !(lp > 1.0) || !(d > lp / (lp - 1.0)) {
        return Err(Error::domain(format!(
            "closed form needs d > lambda*p/(lambda*p-1), equivalently lambda*p > d/(d-1); \
             got lambda*p = {lp}, d = {d}"
        )));
    }
    let qi = q_round as u64;
    let alpha = ql.round() - q_round + 1.0;
    let ad = alpha * d.round();
    let ln_norm = blackbody_ln_norm(d)?;
    let mut sum = 0.0;
    for i in 0..=qi {
        let ifl = i as f64;
        let sign = if (qi - i).is_multiple_of(2) { 1.0 } else { -1.0 };
        let factorial = specfun::gamma(ad - ifl + 1.0)?;
        let zeta = specfun::modified_zeta(1.0 + ad - ifl, alpha, alpha + q_round - ifl)?.value;
        sum += sign * choose(qi, i) * d.powf(ifl) * factorial * zeta;
    }
    if !(sum > 0.0) || !sum.is_finite() {
        return Err(Error::Accuracy {
            context: format!(
                "closed-form Fisher constant lost all significance at (p, lambda, d) = \
                 ({p}, {lam}, {d})"
            ),
            best: sum,
            error_estimate: f64::INFINITY,
        });
    }
    Ok((sum.ln() - alpha * ln_norm).exp())
}

// The alternating closed-form sum cancels ~(αd)!/(value·norm^α) digits;
// beyond this many powers of the exponent the quadrature route is more
// accurate.
const CLOSED_FORM_MAX_AD: f64 = 24.0;

fn closed_form_applicable(p: f64, lam: f64, d: f64) -> bool {
    let Ok(q) = conjugate(p) else { return false };
    let qr = q.round();
    if !q.is_finite() || (q - qr).abs() > 1e-9 || qr < 2.0 || (qr as i64) % 2 != 0 {
        return false;
    }
    let ql = qr * lam;
    if (ql - ql.round()).abs() > 1e-9 || ql.round() < 1.0 {
        return false;
    }
    if (d - d.round()).abs() > 1e-9 {
        return false;
    }
    let lp = lam * p;
    if !(lp > 1.0) || !(d > lp / (lp - 1.0)) {
        return false;
    }
    let alpha = ql.round() - qr + 1.0;
    alpha * d.round() <= CLOSED_FORM_MAX_AD
}

// ln A_F with relative error, preferring the closed form where it is exact
// and well conditioned; returns the I value for reporting.
fn a_f_ln(p: f64, lam: f64, d: f64, cfg: &QuadConfig) -> Result<(f64, f64, ConstantsMethod, f64)> {
    let q = conjugate(p)?;
    let alpha = q * lam - q + 1.0;
    let ln_norm = blackbody_ln_norm(d)?;
    if closed_form_applicable(p, lam, d) {
        if let Ok(v) = a_f_closed(p, lam, d) {
            let ln_af = v.ln();
            return Ok((ln_af, 1e-12, ConstantsMethod::ClosedForm, (ln_af + alpha * ln_norm).exp()));
        }
    }
    let i = i_integral(q, lam, d, cfg)?;
    Ok((
        i.value.ln() - alpha * ln_norm,
        i.error_estimate / i.value,
        ConstantsMethod::Quadrature,
        i.value,
    ))
}

/// Fisher factor φ_{p,λ} of the blackbody density at temperature scale θ:
/// A_F(p,λ,d)^{1/(qλ)} / θ.
pub fn fisher_analytic(p: f64, lam: f64, d: f64, theta: f64, cfg: &QuadConfig) -> Result<f64> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(Error::domain(format!(
            "temperature scale must satisfy 0 < theta < infinity, got {theta}"
        )));
    }
    let q = conjugate(p)?;
    let (ln_af, _, _, _) = a_f_ln(p, lam, d, cfg)?;
    Ok((ln_af / (q * lam)).exp() / theta)
}

/// Analytic complexity with the full component decomposition; the θ factors
/// of φ and N cancel exactly, so the result is reported at θ = 1.
pub fn complexity_analytic_report(
    p: f64,
    lam: f64,
    d: f64,
    cfg: &QuadConfig,
) -> Result<ComplexityReport> {
    let violations = validate_params(p, lam, Some(d));
    if !violations.is_empty() {
        return Err(Error::InvalidParams(violations));
    }
    let params = ParamPair::new(p, lam)?;
    let q = conjugate(p)?;
    let (ln_af, af_rel_err, _, _) = a_f_ln(p, lam, d, cfg)?;
    let (renyi, dr) = if (lam - 1.0).abs() < 1e-6 {
        shannon_reduced(d)?
    } else {
        (a_r_ln(lam, d)? / (1.0 - lam), 0.0)
    };
    let k_fr = reference::k_fr(p, lam)?;
    let ln_fisher = ln_af / (q * lam);
    let value = (k_fr.ln() + ln_fisher + renyi).exp();
    Ok(ComplexityReport {
        params,
        renyi,
        n_power: renyi.exp(),
        fisher: ln_fisher.exp(),
        k_fr,
        value,
        path: EvalPath::Analytic,
        error_estimate: value * (af_rel_err / (q * lam) + dr),
    })
}

/// Analytic complexity C^(p,λ) of the d-dimensional blackbody density;
/// dimensionless and temperature-free.
pub fn complexity_analytic(p: f64, lam: f64, d: f64) -> Result<f64> {
    Ok(complexity_analytic_report(p, lam, d, &QuadConfig::default())?.value)
}

/// All analytic constants at one parameter point (λ ≠ 1 so A_R exists).
pub fn constants(p: f64, lam: f64, d: f64, cfg: &QuadConfig) -> Result<BlackbodyConstants> {
    let report = complexity_analytic_report(p, lam, d, cfg)?;
    let (ln_af, _, method, i_value) = a_f_ln(p, lam, d, cfg)?;
    Ok(BlackbodyConstants {
        a_r: a_r(lam, d)?,
        a_f: ln_af.exp(),
        i_integral: i_value,
        c_value: report.value,
        method,
    })
}

/// An inclusive, evenly spaced 1-D grid; `n = 1` denotes the single point
/// `lo`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRange {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl GridRange {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || !(lo <= hi) {
            return Err(Error::domain(format!(
                "range needs finite lo <= hi, got {lo}..{hi}"
            )));
        }
        if n == 0 {
            return Err(Error::domain("range needs at least one point".to_string()));
        }
        if n >= 2 && !(hi > lo) {
            return Err(Error::domain(format!(
                "a {n}-point range needs hi > lo, got {lo}..{hi}"
            )));
        }
        Ok(GridRange { lo, hi, n })
    }

    pub fn single(x: f64) -> Result<Self> {
        GridRange::new(x, x, 1)
    }

    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.n - 1) as f64;
        (0..self.n).map(|i| self.lo + step * i as f64).collect()
    }
}

/// One chart grid point; fields are `None` where the quantity does not exist
/// (invalid parameters, A_R at λ = 1, A_F at p = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    pub p: f64,
    pub lam: f64,
    pub a_r: Option<f64>,
    pub a_f: Option<f64>,
    pub k_fr: Option<f64>,
    pub c: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Minimum,
    Maximum,
}

/// A located and refined interior extremum of the complexity surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub kind: ExtremumKind,
    pub p: f64,
    pub lam: f64,
    pub c: f64,
}

/// Row-major complexity grid (p outer, λ inner) with located extrema.
#[derive(Debug, Clone)]
pub struct Chart {
    pub d: f64,
    pub p_values: Vec<f64>,
    pub lam_values: Vec<f64>,
    pub points: Vec<ChartPoint>,
    pub extrema: Vec<Extremum>,
}

// ln C at a continuous parameter point, or None where undefined; the
// backbone of both grid evaluation and extremum refinement.
fn ln_c_value(p: f64, lam: f64, d: f64, cfg: &QuadConfig) -> Option<f64> {
    if p <= 1.0 || !validate_params(p, lam, Some(d)).is_empty() {
        return None;
    }
    let renyi = if (lam - 1.0).abs() < 1e-6 {
        shannon_reduced(d).ok()?.0
    } else {
        a_r_ln(lam, d).ok()? / (1.0 - lam)
    };
    let q = p / (p - 1.0);
    let (ln_af, _, _, _) = a_f_ln(p, lam, d, cfg).ok()?;
    let k_fr = reference::k_fr(p, lam).ok()?;
    Some(k_fr.ln() + ln_af / (q * lam) + renyi)
}

fn chart_eval(p: f64, lam: f64, d: f64, cfg: &QuadConfig) -> ChartPoint {
    let mut point = ChartPoint {
        p,
        lam,
        a_r: None,
        a_f: None,
        k_fr: None,
        c: None,
    };
    if !validate_params(p, lam, Some(d)).is_empty() {
        return point;
    }
    let near_shannon = (lam - 1.0).abs() < 1e-6;
    let ln_ar = if near_shannon {
        None
    } else {
        a_r_ln(lam, d).ok()
    };
    point.a_r = ln_ar.map(f64::exp);
    point.k_fr = reference::k_fr(p, lam).ok();
    if p == 1.0 {
        // q = ∞: supremum-form Fisher, evaluated numerically on the reduced
        // density (the only chart points off the integral representation).
        point.c = reduced_model(d).ok().and_then(|m| {
            ParamPair::new(p, lam)
                .and_then(|params| crate::complexity::complexity(&m, &params, cfg))
                .ok()
                .map(|r| r.value)
        });
        return point;
    }
    let renyi = if near_shannon {
        match shannon_reduced(d) {
            Ok((s, _)) => s,
            Err(_) => return point,
        }
    } else {
        match ln_ar {
            Some(l) => l / (1.0 - lam),
            None => return point,
        }
    };
    let q = p / (p - 1.0);
    let Ok((ln_af, _, _, _)) = a_f_ln(p, lam, d, cfg) else {
        return point;
    };
    point.a_f = Some(ln_af.exp());
    if let Some(k) = point.k_fr {
        point.c = Some((k.ln() + ln_af / (q * lam) + renyi).exp());
    }
    point
}

// Golden-section argmin of f on [a, b] down to interval width `tol`.
fn golden_argmin(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[allow(clippy::too_many_arguments)]
fn refine_extremum(
    kind: ExtremumKind,
    p0: f64,
    lam0: f64,
    dp: f64,
    dlam: f64,
    p_bounds: (f64, f64),
    lam_bounds: (f64, f64),
    d: f64,
    cfg: &QuadConfig,
) -> Extremum {
    let sgn = match kind {
        ExtremumKind::Minimum => 1.0,
        ExtremumKind::Maximum => -1.0,
    };
    let objective =
        |p: f64, lam: f64| ln_c_value(p, lam, d, cfg).map_or(f64::INFINITY, |v| sgn * v);
    let mut p = p0;
    let mut lam = lam0;
    let mut wp = dp;
    let mut wl = dlam;
    for _ in 0..12 {
        if wp > 0.0 {
            let lo = (p - wp).max(p_bounds.0);
            let hi = (p + wp).min(p_bounds.1);
            p = golden_argmin(&|x| objective(x, lam), lo, hi, 1e-4);
        }
        if wl > 0.0 {
            let lo = (lam - wl).max(lam_bounds.0);
            let hi = (lam + wl).min(lam_bounds.1);
            lam = golden_argmin(&|x| objective(p, x), lo, hi, 1e-4);
        }
        wp *= 0.55;
        wl *= 0.55;
        if wp.max(wl) < 5e-4 {
            break;
        }
    }
    let c = ln_c_value(p, lam, d, cfg).map_or(f64::NAN, f64::exp);
    Extremum { kind, p, lam, c }
}

/// Evaluate the complexity over the (p, λ) grid at dimension d and locate
/// interior extrema, refined by coordinate descent to about 1e-3 per
/// coordinate.  Grid points are evaluated in parallel and assembled in
/// deterministic row-major order; invalid points carry `None` fields.
pub fn chart(
    p_range: &GridRange,
    lam_range: &GridRange,
    d: f64,
    cfg: &QuadConfig,
) -> Result<Chart> {
    check_dimension(d)?;
    let p_values = p_range.values();
    let lam_values = lam_range.values();
    // Warm the per-dimension caches before fanning out.
    if lam_values.iter().any(|l| (l - 1.0).abs() < 1e-6) {
        shannon_reduced(d)?;
    }
    if p_values.contains(&1.0) {
        reduced_model(d)?;
    }
    let coords: Vec<(f64, f64)> = p_values
        .iter()
        .flat_map(|&p| lam_values.iter().map(move |&lam| (p, lam)))
        .collect();
    let points: Vec<ChartPoint> = coords
        .par_iter()
        .map(|&(p, lam)| chart_eval(p, lam, d, cfg))
        .collect();

    let np = p_values.len();
    let nl = lam_values.len();
    let c_at = |i: usize, j: usize| points[i * nl + j].c;
    let p_step = if np > 1 { p_values[1] - p_values[0] } else { 0.0 };
    let lam_step = if nl > 1 { lam_values[1] - lam_values[0] } else { 0.0 };
    let p_bounds = (p_values[0], p_values[np - 1]);
    let lam_bounds = (lam_values[0], lam_values[nl - 1]);

    let mut extrema: Vec<Extremum> = Vec::new();
    // Index-based scan: the neighbor stencil c_at(i±1, j±1) has no iterator
    // form worth its noise.
    #[allow(clippy::needless_range_loop)]
    for i in 0..np {
        for j in 0..nl {
            let Some(c0) = c_at(i, j) else { continue };
            let mut neighbors = Vec::with_capacity(4);
            if np > 1 {
                if i == 0 || i == np - 1 {
                    continue;
                }
                neighbors.push(c_at(i - 1, j));
                neighbors.push(c_at(i + 1, j));
            }
            if nl > 1 {
                if j == 0 || j == nl - 1 {
                    continue;
                }
                neighbors.push(c_at(i, j - 1));
                neighbors.push(c_at(i, j + 1));
            }
            if neighbors.is_empty() || neighbors.iter().any(Option::is_none) {
                continue;
            }
            let kind = if neighbors.iter().all(|n| c0 < n.unwrap()) {
                ExtremumKind::Minimum
            } else if neighbors.iter().all(|n| c0 > n.unwrap()) {
                ExtremumKind::Maximum
            } else {
                continue;
            };
            extrema.push(refine_extremum(
                kind,
                p_values[i],
                lam_values[j],
                p_step,
                lam_step,
                p_bounds,
                lam_bounds,
                d,
                cfg,
            ));
        }
    }

    // Candidates from adjacent cells can refine into the same point; keep
    // the better value of each cluster.
    let mut deduped: Vec<Extremum> = Vec::new();
    for e in extrema {
        if let Some(existing) = deduped.iter_mut().find(|x| {
            x.kind == e.kind && (x.p - e.p).abs() < 5e-3 && (x.lam - e.lam).abs() < 5e-3
        }) {
            let better = match e.kind {
                ExtremumKind::Minimum => e.c < existing.c,
                ExtremumKind::Maximum => e.c > existing.c,
            };
            if better {
                *existing = e;
            }
        } else {
            deduped.push(e);
        }
    }
    deduped.sort_by(|a, b| {
        let ka = matches!(a.kind, ExtremumKind::Maximum) as u8;
        let kb = matches!(b.kind, ExtremumKind::Maximum) as u8;
        ka.cmp(&kb)
            .then(a.p.total_cmp(&b.p))
            .then(a.lam.total_cmp(&b.lam))
    });

    Ok(Chart {
        d,
        p_values,
        lam_values,
        points,
        extrema: deduped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures;
    use approx::assert_relative_eq;

    fn cfg() -> QuadConfig {
        QuadConfig::default()
    }

    fn bb_model(d: f64) -> DensityModel {
        BlackbodySpec::new(d, 1.0).unwrap().model().unwrap()
    }

    #[test]
    fn a_r_matches_frozen_values_and_stays_positive() {
        for (lam, d, want) in [
            (2.0, 3.0, 0.153_553_074_036_600_4),
            (2.5, 4.0, 0.052_712_300_009_435_4),
            (3.0, 5.0, 0.017_229_255_413_867_5),
            (1.5, 3.0, 0.379_917_347_097_891_32),
        ] {
            assert_relative_eq!(a_r(lam, d).unwrap(), want, max_relative = 1e-10);
        }
        for lam in [0.5, 1.2, 2.0, 4.0] {
            for d in [2.0, 3.5, 6.0] {
                assert!(a_r(lam, d).unwrap() > 0.0);
            }
        }
        assert!(a_r(1.0, 3.0).is_err());
        assert!(a_r(2.0, 1.0).is_err());
    }

    #[test]
    fn a_r_agrees_with_direct_quadrature_of_the_power_integral() {
        // ∫ x^{λd} (e^x−1)^{−λ} dx / [Γ(d+1)ζ(d+1)]^λ, integrand in log form.
        for (lam, d) in [(2.0f64, 3.0f64), (2.5, 4.0), (3.0, 5.0)] {
            let f = move |x: f64| {
                if x <= 0.0 {
                    return 0.0;
                }
                let om = -(-x).exp_m1();
                let ln_f = lam * d * x.ln() - lam * (x + om.ln());
                if ln_f < -745.0 {
                    0.0
                } else {
                    ln_f.exp()
                }
            };
            let i = quadrature::integrate(f, 0.0, f64::INFINITY, &cfg()).unwrap();
            let want = (i.value.ln() - lam * blackbody_ln_norm(d).unwrap()).exp();
            assert_relative_eq!(a_r(lam, d).unwrap(), want, max_relative = 1e-10);
        }
    }

    #[test]
    fn renyi_analytic_matches_quadrature_and_is_additive_in_theta() {
        let got = renyi_analytic(2.0, 3.0, 1.0).unwrap();
        assert_relative_eq!(got, 1.873_709_012_519_727_3, max_relative = 1e-10);
        assert_relative_eq!(
            got,
            measures::renyi_entropy(&bb_model(3.0), 2.0, &cfg()).unwrap(),
            max_relative = 1e-8
        );
        assert_relative_eq!(
            renyi_analytic(2.0, 3.0, 10.0).unwrap() - got,
            10.0f64.ln(),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            renyi_analytic(3.0, 3.0, 1.0).unwrap(),
            measures::renyi_entropy(&bb_model(3.0), 3.0, &cfg()).unwrap(),
            max_relative = 1e-8
        );
    }

    #[test]
    fn shannon_limit_of_renyi_analytic() {
        let s = renyi_analytic(1.0, 3.0, 1.0).unwrap();
        assert_relative_eq!(s, 2.036_547_803_433_678_4, max_relative = 1e-8);
        // λ → 1 of the series route approaches the Shannon value.
        for lam in [1.0 - 1e-4, 1.0 + 1e-4] {
            let r = renyi_analytic(lam, 3.0, 1.0).unwrap();
            assert!((r - s).abs() < 1e-3, "lambda {lam}: {r} vs {s}");
        }
    }

    #[test]
    fn fisher_integral_known_values() {
        // α = 1 at (q,λ) = (2,1), so I = A_F·Γ(4)ζ(4) = 3ζ(3).
        let i = i_integral(2.0, 1.0, 3.0, &cfg()).unwrap();
        assert_relative_eq!(i.value, 3.0 * 1.202_056_903_159_594_2, max_relative = 1e-10);
        let i = i_integral(2.0, 2.0, 3.0, &cfg()).unwrap();
        assert_relative_eq!(i.value, 0.892_141_505_529_339_9, max_relative = 1e-9);
        // Non-even q exercises the sign-change split at the mode.
        let i = i_integral(1.5, 1.5, 4.0, &cfg()).unwrap();
        assert_relative_eq!(i.value, 12.140_810_595_806_853, max_relative = 1e-9);
        for (q, lam, d) in [(1.0, 2.0, 3.0), (2.0, 0.9, 3.0), (3.0, 1.2, 2.5)] {
            assert!(i_integral(q, lam, d, &cfg()).unwrap().value > 0.0);
        }
    }

    #[test]
    fn fisher_integral_rejects_divergent_parameters() {
        // Origin divergence: (d−1)α − q = −1.5 at (2, 1, 1.5).
        let err = i_integral(2.0, 1.0, 1.5, &cfg()).unwrap_err();
        assert!(err.to_string().contains("lambda*p > d/(d-1)"), "{err}");
        // Tail divergence: α = −0.2 at (2, 0.4).
        let err = i_integral(2.0, 0.4, 3.0, &cfg()).unwrap_err();
        assert!(err.to_string().contains("alpha"), "{err}");
    }

    #[test]
    fn fisher_constant_by_quadrature() {
        let z3 = specfun::riemann_zeta(3.0).unwrap();
        let z4 = specfun::riemann_zeta(4.0).unwrap();
        assert_relative_eq!(
            a_f_quadrature(2.0, 1.0, 3.0, &cfg()).unwrap(),
            z3 / (2.0 * z4),
            max_relative = 1e-10
        );
        assert_relative_eq!(
            a_f_quadrature(3.0, 1.5, 4.0, &cfg()).unwrap(),
            0.043_784_272_412_079_855,
            max_relative = 1e-9
        );
        // p = ∞ (q = 1) is the total-variation member: A_F = TV(ρ̃^λ)/λ.
        let phi = measures::fisher_total_variation(&bb_model(3.0), 2.0).unwrap();
        assert_relative_eq!(
            a_f_quadrature(f64::INFINITY, 2.0, 3.0, &cfg()).unwrap(),
            phi * phi,
            max_relative = 1e-8
        );
    }

    #[test]
    fn closed_form_matches_standard_case_formula() {
        // (p,λ) = (2,1): A_F = [ζ(d) − (d−3)/(d−1)·ζ(d−1)] / (2ζ(d+1)).
        for (d, frozen) in [
            (3.0, 0.555_313_267_663_073_4),
            (4.0, 0.328_681_335_774_623),
            (5.0, 0.243_657_305_393_497),
            (6.0, 0.195_957_104_231_03),
        ] {
            let closed = a_f_closed(2.0, 1.0, d).unwrap();
            let zd = specfun::riemann_zeta(d).unwrap();
            let zdm = specfun::riemann_zeta(d - 1.0).unwrap();
            let zdp = specfun::riemann_zeta(d + 1.0).unwrap();
            let formula = (zd - (d - 3.0) / (d - 1.0) * zdm) / (2.0 * zdp);
            assert_relative_eq!(closed, formula, max_relative = 1e-10);
            assert_relative_eq!(closed, frozen, max_relative = 1e-8);
            assert_relative_eq!(
                closed,
                a_f_quadrature(2.0, 1.0, d, &cfg()).unwrap(),
                max_relative = 1e-8
            );
        }
    }

    #[test]
    fn closed_form_cross_checks_quadrature_at_order_two() {
        for (d, frozen) in [
            (3.0, 0.003_257_684_710_636_840_4),
            (4.0, 0.001_832_812_321_720_7),
        ] {
            let closed = a_f_closed(2.0, 2.0, d).unwrap();
            assert_relative_eq!(closed, frozen, max_relative = 1e-8);
            assert_relative_eq!(
                closed,
                a_f_quadrature(2.0, 2.0, d, &cfg()).unwrap(),
                max_relative = 1e-8
            );
        }
        // Reassembled through the norm power, the closed form reproduces I.
        let alpha = 3.0;
        let i = a_f_closed(2.0, 2.0, 3.0).unwrap().ln()
            + alpha * blackbody_ln_norm(3.0).unwrap();
        assert_relative_eq!(
            i.exp(),
            i_integral(2.0, 2.0, 3.0, &cfg()).unwrap().value,
            max_relative = 1e-8
        );
    }

    #[test]
    fn closed_form_gates_reject_out_of_domain_requests() {
        assert!(a_f_closed(3.0, 1.5, 4.0).is_err()); // q = 1.5 not even
        assert!(a_f_closed(2.0, 1.3, 3.0).is_err()); // qλ = 2.6 not integer
        assert!(a_f_closed(2.0, 1.0, 3.5).is_err()); // non-integer d
        assert!(a_f_closed(2.0, 1.0, 2.0).is_err()); // d = λp/(λp−1) boundary
    }

    #[test]
    fn analytic_fisher_factor_scales_with_temperature() {
        let z3 = specfun::riemann_zeta(3.0).unwrap();
        let z4 = specfun::riemann_zeta(4.0).unwrap();
        let phi1 = fisher_analytic(2.0, 1.0, 3.0, 1.0, &cfg()).unwrap();
        assert_relative_eq!(phi1, (z3 / (2.0 * z4)).sqrt(), max_relative = 1e-9);
        let phi2 = fisher_analytic(2.0, 1.0, 3.0, 2.0, &cfg()).unwrap();
        assert_relative_eq!(phi2, phi1 / 2.0, max_relative = 1e-14);
        // Cross-check against the numeric functional on the density itself.
        let numeric = measures::fisher_biparam(
            &bb_model(3.0),
            &ParamPair::new(2.0, 2.0).unwrap(),
            &cfg(),
        )
        .unwrap();
        assert_relative_eq!(
            fisher_analytic(2.0, 2.0, 3.0, 1.0, &cfg()).unwrap(),
            numeric,
            max_relative = 1e-7
        );
    }

    #[test]
    fn analytic_complexity_frozen_values() {
        for (p, lam, d, want) in [
            (2.0, 2.0, 3.0, 1.139_769_074_845_456_8),
            (2.0, 1.0, 3.0, 1.381_953_158_961_929_8),
            (2.0, 2.0, 4.0, 1.125_314_143_372_157_6),
            (2.0, 2.0, 5.0, 1.118_544_071_710_024_1),
            (2.0, 2.0, 6.0, 1.113_974_801_481_144_1),
            (3.0, 1.5, 4.0, 1.134_924_777_528_930_0),
            (2.0, 1.5, 3.0, 1.148_762_426_180_742_5),
            (5.0, 3.0, 3.0, 1.185_238_610_798_002_6),
            (2.0, 0.9, 3.0, 1.676_956_880_330_930_5),
            (3.0, 1.0, 3.0, 1.179_548_531_776_629_9),
        ] {
            let got = complexity_analytic(p, lam, d).unwrap();
            assert_relative_eq!(got, want, max_relative = 1e-7);
            assert!(got >= 1.0);
        }
    }

    #[test]
    fn analytic_complexity_decreases_with_dimension() {
        let values: Vec<f64> = [3.0, 4.0, 5.0, 6.0]
            .iter()
            .map(|&d| complexity_analytic(2.0, 2.0, d).unwrap())
            .collect();
        for w in values.windows(2) {
            assert!(w[1] < w[0], "{values:?}");
        }
    }

    #[test]
    fn analytic_complexity_approaches_unity_at_large_order() {
        for (p, frozen) in [
            (1.2, [1.140_395, 1.097_555, 1.063_089]),
            (2.0, [1.112_792, 1.079_017, 1.051_28]),
            (5.0, [1.110_57, 1.072_931, 1.045_726]),
        ] {
            let values: Vec<f64> = [10.0, 20.0, 40.0]
                .iter()
                .map(|&lam| complexity_analytic(p, lam, 3.0).unwrap())
                .collect();
            for (got, want) in values.iter().zip(frozen) {
                assert_relative_eq!(*got, want, max_relative = 1e-5);
            }
            assert!(values[0] > values[1] && values[1] > values[2]);
            assert!(values[2] > 1.0);
        }
    }

    #[test]
    fn analytic_complexity_gates_invalid_parameters() {
        // λp = d/(d−1) exactly: rejected before any integration.
        let err = complexity_analytic(1.5, 1.0, 3.0).unwrap_err();
        match err {
            Error::InvalidParams(v) => {
                assert!(v.iter().any(|m| m.contains("lambda*p > d/(d-1)")), "{v:?}")
            }
            other => panic!("expected InvalidParams, got {other}"),
        }
        assert!(complexity_analytic(2.0, 0.2, 3.0).is_err());
    }

    #[test]
    fn temperature_independence_of_the_numeric_route() {
        let params = ParamPair::new(2.0, 2.0).unwrap();
        let analytic = complexity_analytic(2.0, 2.0, 3.0).unwrap();
        for theta in [1.0, 1e3] {
            let m = BlackbodySpec::new(3.0, theta).unwrap().model().unwrap();
            let numeric = crate::complexity::complexity(&m, &params, &cfg())
                .unwrap()
                .value;
            assert_relative_eq!(numeric, analytic, max_relative = 1e-6);
        }
    }

    #[test]
    fn constants_bundle_reports_method_and_positive_fields() {
        let c = constants(2.0, 2.0, 3.0, &cfg()).unwrap();
        assert_eq!(c.method, ConstantsMethod::ClosedForm);
        assert!(c.a_r > 0.0 && c.a_f > 0.0 && c.i_integral > 0.0 && c.c_value > 0.0);
        assert_relative_eq!(c.c_value, 1.139_769_074_845_456_8, max_relative = 1e-7);
        assert_relative_eq!(
            c.i_integral,
            i_integral(2.0, 2.0, 3.0, &cfg()).unwrap().value,
            max_relative = 1e-8
        );

        let c = constants(2.5, 2.0, 3.0, &cfg()).unwrap();
        assert_eq!(c.method, ConstantsMethod::Quadrature);
        assert!(c.c_value >= 1.0);
    }

    #[test]
    fn grid_ranges_enumerate_inclusive_points() {
        let r = GridRange::new(1.0, 2.0, 5).unwrap();
        let v = r.values();
        assert_eq!(v.len(), 5);
        assert_relative_eq!(v[0], 1.0);
        assert_relative_eq!(v[4], 2.0);
        assert_relative_eq!(v[2], 1.5);
        assert_eq!(GridRange::single(2.0).unwrap().values(), vec![2.0]);
        assert!(GridRange::new(2.0, 1.0, 3).is_err());
        assert!(GridRange::new(1.0, 1.0, 3).is_err());
        assert!(GridRange::new(1.0, 2.0, 0).is_err());
    }

    #[test]
    fn chart_locates_the_paper_minimum() {
        let p_range = GridRange::new(1.8, 2.6, 9).unwrap();
        let lam_range = GridRange::new(1.3, 2.2, 10).unwrap();
        let chart = chart(&p_range, &lam_range, 3.0, &cfg()).unwrap();
        assert_eq!(chart.points.len(), 90);
        // Row-major: p outer, λ inner.
        assert_relative_eq!(chart.points[0].p, 1.8);
        assert_relative_eq!(chart.points[9].p, 1.8);
        assert_relative_eq!(chart.points[9].lam, 2.2);
        assert_relative_eq!(chart.points[10].p, 1.9);
        assert_relative_eq!(chart.points[10].lam, 1.3);
        let min = chart
            .extrema
            .iter()
            .find(|e| e.kind == ExtremumKind::Minimum)
            .expect("minimum in window");
        assert!((min.p - 2.196_838_99).abs() < 2e-2, "p = {}", min.p);
        assert!((min.lam - 1.737_178_69).abs() < 2e-2, "lambda = {}", min.lam);
        assert_relative_eq!(min.c, 1.138_211_386_276_462, max_relative = 1e-5);
    }

    #[test]
    fn chart_emits_missing_fields_for_invalid_and_special_points() {
        // Window straddling the admissibility boundary λp = 3/2 at d = 3.
        let p_range = GridRange::new(1.0, 2.0, 3).unwrap();
        let lam_range = GridRange::new(0.5, 1.0, 2).unwrap();
        let chart = chart(&p_range, &lam_range, 3.0, &cfg()).unwrap();
        let at = |p: f64, lam: f64| {
            chart
                .points
                .iter()
                .find(|pt| (pt.p - p).abs() < 1e-12 && (pt.lam - lam).abs() < 1e-12)
                .unwrap()
        };
        // (1.0, 0.5): λp = 0.5 < 3/2 → fully missing.
        let bad = at(1.0, 0.5);
        assert!(bad.c.is_none() && bad.a_r.is_none() && bad.a_f.is_none() && bad.k_fr.is_none());
        // (2.0, 1.0): valid; Shannon row has no A_R but a complexity value.
        let shannon_row = at(2.0, 1.0);
        assert!(shannon_row.a_r.is_none());
        assert!(shannon_row.c.is_some());
        assert_relative_eq!(
            shannon_row.c.unwrap(),
            1.381_953_158_961_929_8,
            max_relative = 1e-7
        );
        // (1.0, 1.0): λp = 1 < 3/2 → missing despite the Shannon order.
        assert!(at(1.0, 1.0).c.is_none());
        // (1.5, 1.0) is on the boundary exactly → missing.
        assert!(at(1.5, 1.0).c.is_none());
    }

    #[test]
    fn chart_supports_p_one_column_numerically() {
        let p_range = GridRange::single(1.0).unwrap();
        let lam_range = GridRange::new(1.8, 2.6, 3).unwrap();
        let chart = chart(&p_range, &lam_range, 3.0, &cfg()).unwrap();
        for pt in &chart.points {
            assert!(pt.c.is_some(), "{pt:?}");
            assert!(pt.a_f.is_none());
            assert!(pt.c.unwrap() >= 1.0 - 1e-6);
        }
    }

    #[test]
    fn line_chart_finds_interior_minimum_then_maximum() {
        let p_range = GridRange::single(2.0).unwrap();
        let lam_range = GridRange::new(0.9, 3.9, 41).unwrap();
        let chart = chart(&p_range, &lam_range, 3.0, &cfg()).unwrap();
        let minima: Vec<&Extremum> = chart
            .extrema
            .iter()
            .filter(|e| e.kind == ExtremumKind::Minimum)
            .collect();
        let maxima: Vec<&Extremum> = chart
            .extrema
            .iter()
            .filter(|e| e.kind == ExtremumKind::Maximum)
            .collect();
        assert_eq!(minima.len(), 1, "{:?}", chart.extrema);
        assert_eq!(maxima.len(), 1, "{:?}", chart.extrema);
        assert!(minima[0].lam < maxima[0].lam);
        assert!(minima[0].c < maxima[0].c);
    }
}
