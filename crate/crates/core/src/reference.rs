//! Closed-form constants of the extremal generalized-Gaussian family
//! G_{p,λ}(x) = a_{p,λ} / e_λ(|x|^p): its normalization constant, Rényi
//! entropy power, biparametric Fisher information, and the complexity
//! normalization factor K_FR(p,λ) built from them.
//!
//! `p = f64::INFINITY` is a distinguished supported value (the family
//! degenerates to the uniform density on [−1, 1]); branch logic switches on
//! it explicitly rather than approximating with a large float.

use crate::error::{Error, Result};
use crate::specfun::{beta, gamma, q_exponential};

/// The four reference constants for one (p, λ) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceConstants {
    /// Normalization constant a_{p,λ}.
    pub a: f64,
    /// Rényi entropy power N_λ of the reference density.
    pub n_power: f64,
    /// Biparametric Fisher information φ_{p,λ} of the reference density.
    pub fisher: f64,
    /// K_FR(p,λ) = 1/(fisher · n_power): the factor that makes the measure
    /// exactly 1 on the reference family.
    pub k_fr: f64,
}

fn check_p(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::domain(format!("requires p >= 1 (p = infinity allowed), got {p}")));
    }
    Ok(())
}

// λ > 1/(1+p), the existence condition for both the reference Fisher
// information and the entropy power (it makes 1 + (1-λ)·(-1/(pλ)) > 0).
fn check_lambda(p: f64, lam: f64) -> Result<()> {
    let bound = if p.is_infinite() { 0.0 } else { 1.0 / (1.0 + p) };
    if !(lam > bound) {
        return Err(Error::domain(format!(
            "requires lambda > 1/(1+p) = {bound}, got lambda = {lam}"
        )));
    }
    Ok(())
}

/// 1/q for the conjugate exponent 1/p + 1/q = 1; exact 0 at p = 1 and
/// exact 1 at p = ∞.
fn inv_q(p: f64) -> f64 {
    if p.is_infinite() {
        1.0
    } else {
        1.0 - 1.0 / p
    }
}

/// Normalization constant a_{p,λ} of the generalized Gaussian, defined for
/// p > 0 and λ > 1 − p (with a_{∞,λ} = 1/2 for the uniform limit).
pub fn a_norm(p: f64, lam: f64) -> Result<f64> {
    if p.is_infinite() {
        return Ok(0.5);
    }
    if !(p > 0.0) {
        return Err(Error::domain(format!("a_norm requires p > 0, got {p}")));
    }
    if !(lam > 1.0 - p) {
        return Err(Error::domain(format!(
            "a_norm requires lambda > 1 - p = {}, got lambda = {lam}",
            1.0 - p
        )));
    }
    if (lam - 1.0).abs() < 1e-9 {
        return Ok(p / (2.0 * gamma(1.0 / p)?));
    }
    if lam < 1.0 {
        let b = beta(1.0 / p, 1.0 / (1.0 - lam) - 1.0 / p)?;
        Ok(p * (1.0 - lam).powf(1.0 / p) / (2.0 * b))
    } else {
        let b = beta(1.0 / p, lam / (lam - 1.0))?;
        Ok(p * (lam - 1.0).powf(1.0 / p) / (2.0 * b))
    }
}

/// Rényi entropy power N_λ[G_{p,λ}] = [a_{p,λ} · e_λ(−1/(pλ))]^{−1}.
pub fn renyi_power_g(p: f64, lam: f64) -> Result<f64> {
    check_p(p)?;
    check_lambda(p, lam)?;
    let a = a_norm(p, lam)?;
    let arg = if p.is_infinite() { 0.0 } else { -1.0 / (p * lam) };
    let e = q_exponential(arg, lam);
    if !e.is_finite() || e <= 0.0 {
        return Err(Error::domain(format!(
            "entropy power undefined: e_lambda(-1/(p*lambda)) clamped for (p, lambda) = ({p}, {lam})"
        )));
    }
    Ok(1.0 / (a * e))
}

/// Biparametric Fisher information φ_{p,λ}[G_{p,λ}] of the reference family,
/// for 1 ≤ p ≤ ∞ and λ > 1/(1+p).
pub fn fisher_g(p: f64, lam: f64) -> Result<f64> {
    check_p(p)?;
    check_lambda(p, lam)?;
    if p.is_infinite() {
        return Ok(2.0f64.powf((1.0 - lam) / lam) * lam.powf(-1.0 / lam));
    }
    let a = a_norm(p, lam)?;
    let iq = inv_q(p);
    let e = q_exponential(-1.0 / (p * lam), lam);
    Ok(p.powf(1.0 / (p * lam)) * lam.powf(-iq / lam) * (a * e.powf(iq)).powf((lam - 1.0) / lam))
}

/// Normalization factor K_FR(p,λ) = [φ_{p,λ}[G] · N_λ[G]]^{−1}, the inverse
/// of the measure's raw value on the extremal family.
pub fn k_fr(p: f64, lam: f64) -> Result<f64> {
    Ok(1.0 / (fisher_g(p, lam)? * renyi_power_g(p, lam)?))
}

/// All four constants at once.
pub fn constants(p: f64, lam: f64) -> Result<ReferenceConstants> {
    let a = if p.is_infinite() { 0.5 } else { a_norm(p, lam)? };
    let n_power = renyi_power_g(p, lam)?;
    let fisher = fisher_g(p, lam)?;
    Ok(ReferenceConstants {
        a,
        n_power,
        fisher,
        k_fr: 1.0 / (fisher * n_power),
    })
}

/// The two independent closed forms of K_FR used as cross-checks of the
/// definitional value: a compact product form (valid everywhere, including
/// p = ∞) and a rational-exponent form (singular at λ = 1, undefined at
/// p = ∞); `None` where a form does not apply.
pub fn k_fr_cross_forms(p: f64, lam: f64) -> Result<(Option<f64>, Option<f64>)> {
    check_p(p)?;
    check_lambda(p, lam)?;
    let a = if p.is_infinite() { 0.5 } else { a_norm(p, lam)? };
    let iq = inv_q(p);
    let arg = if p.is_infinite() { 0.0 } else { -1.0 / (p * lam) };
    let e = q_exponential(arg, lam);
    // [λ^{1/q} p^{−1/p} a e_λ(−1/(pλ))^{(λ−1)/p + 1}]^{1/λ}; p^{1/p} → 1 as p → ∞.
    let p_root = if p.is_infinite() { 1.0 } else { p.powf(1.0 / p) };
    let exp2 = if p.is_infinite() {
        1.0
    } else {
        (lam - 1.0) / p + 1.0
    };
    let product_form = (lam.powf(iq) / p_root * a * e.powf(exp2)).powf(1.0 / lam);

    let rational_form = if p.is_infinite() || (lam - 1.0).abs() < 1e-6 {
        None
    } else {
        // a^{1/λ} [(pλ+λ−1)^{λ−(λ−1)/q} / (p λ^λ)]^{1/(λ−λ²)}.
        let core = (p * lam + lam - 1.0).powf(lam - (lam - 1.0) * iq) / (p * lam.powf(lam));
        Some(a.powf(1.0 / lam) * core.powf(1.0 / (lam - lam * lam)))
    };
    Ok((Some(product_form), rational_form))
}
