//! Entropy-like functionals of an arbitrary density: Rényi entropy and
//! entropy power (with the Shannon limit), the biparametric Fisher
//! information, its total-variation form for p = ∞, and the disequilibrium.

use crate::density::DensityModel;
use crate::error::{Error, Result};
use crate::quadrature::QuadConfig;

/// The (p, λ) parameter pair; the conjugate exponent q with 1/p + 1/q = 1 is
/// always derived, never stored.  `p = f64::INFINITY` is the distinguished
/// total-variation endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamPair {
    pub p: f64,
    pub lam: f64,
}

impl ParamPair {
    pub fn new(p: f64, lam: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::domain(format!(
                "requires p >= 1 (p = infinity allowed), got p = {p}"
            )));
        }
        if !lam.is_finite() || !(lam > 0.0) {
            return Err(Error::domain(format!(
                "requires a finite order lambda > 0, got lambda = {lam}"
            )));
        }
        Ok(ParamPair { p, lam })
    }

    /// Conjugate exponent q = p/(p−1); ∞ at p = 1, 1 at p = ∞.
    pub fn q(&self) -> f64 {
        if self.p == 1.0 {
            f64::INFINITY
        } else if self.p.is_infinite() {
            1.0
        } else {
            self.p / (self.p - 1.0)
        }
    }

    /// 1/q, exact at both endpoints.
    pub fn inv_q(&self) -> f64 {
        if self.p.is_infinite() {
            1.0
        } else {
            1.0 - 1.0 / self.p
        }
    }
}

// Below this pdf value integrand factors ln(ρ) and ρ^{λ-2} are forced to
// zero; the mass there cannot affect results at the tolerances in use.
const PDF_FLOOR: f64 = 1e-300;

fn shannon_entropy_detailed(rho: &DensityModel, cfg: &QuadConfig) -> Result<(f64, f64)> {
    let f = |x: f64| {
        let v = rho.pdf(x);
        if v > PDF_FLOOR {
            -v * v.ln()
        } else {
            0.0
        }
    };
    let r = rho.integrate_adapted(&f, rho.singular_exponents(), cfg)?;
    Ok((r.value, r.error_estimate))
}

fn mapped_exps(rho: &DensityModel, f: impl Fn(f64) -> f64) -> [Option<f64>; 2] {
    let e = rho.singular_exponents();
    [e[0].map(&f), e[1].map(&f)]
}

pub(crate) fn renyi_entropy_detailed(
    rho: &DensityModel,
    lam: f64,
    cfg: &QuadConfig,
) -> Result<(f64, f64)> {
    if !(lam > 0.0) || !lam.is_finite() {
        return Err(Error::domain(format!(
            "Renyi entropy requires order lambda > 0, got {lam}"
        )));
    }
    // (1−λ)^{−1} ln ∫ρ^λ loses every digit as λ → 1; switch to the Shannon
    // limit −∫ρ ln ρ inside a tight window.
    if (lam - 1.0).abs() < 1e-6 {
        return shannon_entropy_detailed(rho, cfg);
    }
    let f = |x: f64| rho.pdf(x).powf(lam);
    let exps = mapped_exps(rho, |c| c * lam);
    let r = rho.integrate_adapted(&f, exps, cfg)?;
    if !(r.value > 0.0) {
        return Err(Error::domain(format!(
            "integral of pdf^lambda is {} for lambda = {lam}; entropy undefined",
            r.value
        )));
    }
    Ok((
        r.value.ln() / (1.0 - lam),
        r.error_estimate / ((1.0 - lam).abs() * r.value),
    ))
}

/// Rényi entropy of order λ (nats): (1−λ)^{−1} ln ∫ρ^λ, continued through
/// the Shannon entropy at λ = 1.
pub fn renyi_entropy(rho: &DensityModel, lam: f64, cfg: &QuadConfig) -> Result<f64> {
    Ok(renyi_entropy_detailed(rho, lam, cfg)?.0)
}

pub(crate) fn renyi_power_detailed(
    rho: &DensityModel,
    lam: f64,
    cfg: &QuadConfig,
) -> Result<(f64, f64)> {
    let (r, dr) = renyi_entropy_detailed(rho, lam, cfg)?;
    let n = r.exp();
    Ok((n, n * dr))
}

/// Rényi entropy power N_λ[ρ] = exp(R_λ[ρ]).
pub fn renyi_power(rho: &DensityModel, lam: f64, cfg: &QuadConfig) -> Result<f64> {
    Ok(renyi_power_detailed(rho, lam, cfg)?.0)
}

fn ensure_no_jumps(rho: &DensityModel, what: &str) -> Result<()> {
    if let Some(j) = rho.jumps().first() {
        return Err(Error::domain(format!(
            "{what} is undefined for densities with jump discontinuities \
             (jump at x = {}); use the p = infinity total-variation form",
            j.x
        )));
    }
    Ok(())
}

// Local power of the Fisher integrand |ρ^{λ-2}ρ'|^q·ρ where the pdf behaves
// as t^c at a support endpoint; errors if the power is not integrable.
fn fisher_endpoint_exponent(c: f64, q: f64, lam: f64) -> Result<f64> {
    let g = if c == 0.0 {
        0.0
    } else {
        q * (c * (lam - 1.0) - 1.0) + c
    };
    if g <= -1.0 {
        return Err(Error::domain(format!(
            "Fisher integrand behaves as t^{g:.6} at a support endpoint and diverges: \
             needs q·(c·(lambda-1)-1)+c > -1 (pdf exponent c = {c}, q = {q}, lambda = {lam})"
        )));
    }
    Ok(g)
}

pub(crate) fn fisher_biparam_detailed(
    rho: &DensityModel,
    params: &ParamPair,
    cfg: &QuadConfig,
) -> Result<(f64, f64)> {
    if params.p.is_infinite() {
        return Err(Error::domain(
            "p = infinity: the Fisher functional is the total-variation form".to_string(),
        ));
    }
    ensure_no_jumps(rho, "the p < infinity Fisher functional")?;
    let lam = params.lam;
    if params.p == 1.0 {
        // q = ∞: the integral mean degenerates to the essential supremum of
        // |ρ^{λ-2}ρ'|.
        let h = |x: f64| {
            let v = rho.pdf(x);
            let dv = rho.pdf_derivative(x);
            if v <= PDF_FLOOR || dv == 0.0 || !dv.is_finite() {
                return 0.0;
            }
            ((lam - 2.0) * v.ln() + dv.abs().ln()).exp()
        };
        let sup = sup_over_support(rho, &h);
        if !sup.is_finite() {
            return Err(Error::domain(format!(
                "sup |pdf^(lambda-2)·pdf'| is not finite for lambda = {lam}"
            )));
        }
        return Ok((sup.powf(1.0 / lam), 0.0));
    }

    let q = params.q();
    let e = rho.singular_exponents();
    let exps = [
        e[0].map(|c| fisher_endpoint_exponent(c, q, lam)).transpose()?,
        e[1].map(|c| fisher_endpoint_exponent(c, q, lam)).transpose()?,
    ];
    // Endpoint-divergent integrands (t^g, -1 < g < 0) amplify the rounding
    // of pdf evaluation close to a support edge into relative noise that no
    // subdivision can average away (~5e-10 at g = -1/2 up to ~1e-6 at
    // g = -0.8); cap the requested relative tolerance at that floor and let
    // the returned error estimate carry the achieved accuracy.
    let eff_cfg = if exps.iter().flatten().any(|&g| g < 0.0) {
        QuadConfig {
            rel_tol: cfg.rel_tol.max(2e-6),
            ..*cfg
        }
    } else {
        *cfg
    };
    // ln-form of |ρ^{λ-2}ρ'|^q·ρ; exp underflows to an honest zero and
    // overflows to +∞, which the integrator reports as non-convergence.
    let f = |x: f64| {
        let v = rho.pdf(x);
        let dv = rho.pdf_derivative(x);
        if v <= PDF_FLOOR || dv == 0.0 || !dv.is_finite() {
            return 0.0;
        }
        let ln_v = v.ln();
        (q * ((lam - 2.0) * ln_v + dv.abs().ln()) + ln_v).exp()
    };
    let r = rho.integrate_adapted(&f, exps, &eff_cfg)?;
    if !(r.value >= 0.0) {
        return Err(Error::domain(format!(
            "Fisher integral evaluated to {}; expected nonnegative",
            r.value
        )));
    }
    let phi = r.value.powf(1.0 / (q * lam));
    let err = if r.value > 0.0 {
        phi * r.error_estimate / (q * lam * r.value)
    } else {
        0.0
    };
    Ok((phi, err))
}

/// Biparametric Fisher information φ_{p,λ}[ρ] = (∫|ρ^{λ-2}ρ'|^q ρ)^{1/(qλ)}
/// for 1 ≤ p < ∞ (at p = 1 the integral degenerates to an essential
/// supremum).  For p = ∞ use [`fisher_total_variation`].
pub fn fisher_biparam(rho: &DensityModel, params: &ParamPair, cfg: &QuadConfig) -> Result<f64> {
    Ok(fisher_biparam_detailed(rho, params, cfg)?.0)
}

pub(crate) fn fisher_total_variation_detailed(
    rho: &DensityModel,
    lam: f64,
    cfg: &QuadConfig,
) -> Result<(f64, f64)> {
    if !(lam > 0.0) || !lam.is_finite() {
        return Err(Error::domain(format!(
            "total-variation Fisher requires lambda > 0, got {lam}"
        )));
    }
    // Smooth variation ∫ρ^{λ-1}|ρ'| plus the jump contributions Σ|Δ(ρ^λ)|/λ:
    // together, TV(ρ^λ)/λ.
    let f = |x: f64| {
        let v = rho.pdf(x);
        let dv = rho.pdf_derivative(x);
        if v <= PDF_FLOOR || dv == 0.0 || !dv.is_finite() {
            return 0.0;
        }
        ((lam - 1.0) * v.ln() + dv.abs().ln()).exp()
    };
    let exps = mapped_exps(rho, |c| if c == 0.0 { 0.0 } else { c * lam - 1.0 });
    let smooth = rho.integrate_adapted(&f, exps, cfg)?;
    let jump_sum: f64 = rho
        .jumps()
        .iter()
        .map(|j| (j.right.powf(lam) - j.left.powf(lam)).abs() / lam)
        .sum();
    let total = smooth.value + jump_sum;
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::domain(format!(
            "total variation of pdf^lambda evaluated to {total}; must be positive and finite"
        )));
    }
    let phi = total.powf(1.0 / lam);
    Ok((phi, phi * smooth.error_estimate / (lam * total)))
}

/// Total-variation Fisher functional (the p = ∞ member):
/// (∫ρ^{λ-1}|ρ'| dx + Σ_jumps |Δ(ρ^λ)|/λ)^{1/λ} = (TV(ρ^λ)/λ)^{1/λ}.
pub fn fisher_total_variation(rho: &DensityModel, lam: f64) -> Result<f64> {
    Ok(fisher_total_variation_detailed(rho, lam, &QuadConfig::default())?.0)
}

pub(crate) fn disequilibrium_detailed(
    rho: &DensityModel,
    cfg: &QuadConfig,
) -> Result<(f64, f64)> {
    let f = |x: f64| {
        let v = rho.pdf(x);
        v * v
    };
    let r = rho.integrate_adapted(&f, mapped_exps(rho, |c| 2.0 * c), cfg)?;
    if !(r.value > 0.0) {
        return Err(Error::domain(format!(
            "disequilibrium evaluated to {}; must be positive",
            r.value
        )));
    }
    Ok((r.value, r.error_estimate))
}

/// Disequilibrium D[ρ] = ∫ρ², the inverse of the order-2 entropy power.
pub fn disequilibrium(rho: &DensityModel, cfg: &QuadConfig) -> Result<f64> {
    Ok(disequilibrium_detailed(rho, cfg)?.0)
}

// Maximum of `h` over the support: dense sampling on each declared-smooth
// panel followed by a golden-section polish around the best sample.
fn sup_over_support(rho: &DensityModel, h: &dyn Fn(f64) -> f64) -> f64 {
    const SAMPLES: usize = 256;
    let scale = rho.guarded_scale();
    let points = rho.split_points();
    let mut best = 0.0f64;
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let to_x: Box<dyn Fn(f64) -> f64> = match (a.is_finite(), b.is_finite()) {
            (true, true) => Box::new(move |s: f64| a + (b - a) * s),
            (true, false) => Box::new(move |s: f64| a + scale * s / (1.0 - s)),
            (false, true) => Box::new(move |s: f64| b - scale * (1.0 - s) / s),
            // split_points guarantees at most one unbounded end per panel
            (false, false) => unreachable!("unsplit doubly infinite panel"),
        };
        let g = |s: f64| h(to_x(s));
        let mut best_s = 0.5;
        let mut best_g = f64::NEG_INFINITY;
        for i in 0..SAMPLES {
            let s = (i as f64 + 0.5) / SAMPLES as f64;
            let v = g(s);
            if v > best_g {
                best_g = v;
                best_s = s;
            }
        }
        let step = 1.0 / SAMPLES as f64;
        let refined = golden_max(&g, (best_s - step).max(1e-12), (best_s + step).min(1.0 - 1e-12));
        best = best.max(best_g.max(refined));
    }
    best
}

fn golden_max(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..80 {
        if fc >= fd {
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
    fc.max(fd)
}
