//! Scalar special functions: log-gamma, beta, Riemann/Hurwitz zeta, the
//! generalized binomial coefficient, the binomial-weighted zeta series
//! ζ_λ(s,a) = Σ_{n≥0} C(n+λ−1,n)(a+n)^{−s}, and the deformed exponential
//! e_λ(x) = (1+(1−λ)x)_+^{1/(1−λ)}.

use crate::error::{Error, Result};

/// Value of a truncated series together with how it was truncated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesResult {
    pub value: f64,
    pub terms_used: usize,
    /// Estimated truncation error (integral comparison); zero-ish for
    /// closed-form evaluation paths.
    pub tail_bound: f64,
}

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_74;

// Stirling-series coefficients B_{2k} / (2k(2k-1)).
const STIRLING: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
];

// Euler-Maclaurin coefficients B_{2k} / (2k)!.
const EULER_MACLAURIN: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30_240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
    1.0 / 74_724_249_600.0,
];

/// ln Γ(x) for x > 0, by the Stirling series after promoting the argument
/// above 10 with ln Γ(x) = ln Γ(x+1) − ln x.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("log_gamma requires x > 0, got {x}")));
    }
    let mut shift = 0.0;
    let mut z = x;
    while z < 10.0 {
        shift -= z.ln();
        z += 1.0;
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut pw = inv;
    for c in STIRLING {
        series += c * pw;
        pw *= inv2;
    }
    Ok((z - 0.5) * z.ln() - z + LN_SQRT_2PI + series + shift)
}

/// Γ(x) for x > 0.
pub fn gamma(x: f64) -> Result<f64> {
    Ok(log_gamma(x)?.exp())
}

/// B(a,b) = Γ(a)Γ(b)/Γ(a+b) for a, b > 0.
pub fn beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(Error::domain(format!(
            "beta requires positive arguments, got ({a}, {b})"
        )));
    }
    Ok((log_gamma(a)? + log_gamma(b)? - log_gamma(a + b)?).exp())
}

/// ζ(s) for s > 1.
pub fn riemann_zeta(s: f64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(Error::domain(format!(
            "riemann_zeta requires s > 1, got {s}"
        )));
    }
    hurwitz_zeta(s, 1.0)
}

/// Hurwitz zeta ζ(s,a) = Σ_{n≥0} (a+n)^{−s} for s > 1, a > 0, by direct
/// summation of the first terms plus the Euler-Maclaurin tail.
pub fn hurwitz_zeta(s: f64, a: f64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(Error::domain(format!(
            "hurwitz_zeta requires s > 1, got s = {s}"
        )));
    }
    if !(a > 0.0) {
        return Err(Error::domain(format!(
            "hurwitz_zeta requires a > 0, got a = {a}"
        )));
    }
    const N: usize = 24;
    let mut acc = 0.0;
    for n in 0..N {
        acc += (a + n as f64).powf(-s);
    }
    let x = a + N as f64;
    acc += x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // Correction terms B_{2k}/(2k)! * (s)_{2k-1} * x^{-s-2k+1}.
    let mut rising = s;
    let mut xpow = x.powf(-s - 1.0);
    for (k, c) in EULER_MACLAURIN.iter().enumerate() {
        acc += c * rising * xpow;
        let k2 = 2.0 * k as f64;
        rising *= (s + k2 + 1.0) * (s + k2 + 2.0);
        xpow /= x * x;
    }
    Ok(acc)
}

/// Γ(n+λ)/(Γ(λ)Γ(n+1)), the binomial coefficient C(n+λ−1, n) continued in λ.
pub fn gen_binomial(n: u64, lam: f64) -> Result<f64> {
    if !(lam > 0.0) {
        return Err(Error::domain(format!(
            "gen_binomial requires lambda > 0, got {lam}"
        )));
    }
    let nf = n as f64;
    Ok((log_gamma(nf + lam)? - log_gamma(lam)? - log_gamma(nf + 1.0)?).exp())
}

/// ζ_λ(s,a) = Σ_{n≥0} C(n+λ−1,n)(a+n)^{−s}, convergent for s > λ.
///
/// Integer λ with benign cancellation is reduced exactly to a finite
/// combination of Hurwitz zetas (the binomial weight is a polynomial of
/// degree λ−1 in n); otherwise the series is summed directly in scaled form
/// with a relative-term stopping rule and an integral-comparison tail bound,
/// capped at one million terms. `tail_bound` lets callers reject a result
/// whose truncation error is too large for their purpose.
pub fn modified_zeta(s: f64, a: f64, lam: f64) -> Result<SeriesResult> {
    let (ln_value, terms_used, rel_tail) = modified_zeta_ln(s, a, lam)?;
    let value = ln_value.exp();
    Ok(SeriesResult {
        value,
        terms_used,
        tail_bound: rel_tail * value,
    })
}

/// (ln ζ_λ(s,a), terms used, relative tail bound); keeps extreme parameter
/// combinations representable where the plain value would over/underflow.
pub(crate) fn modified_zeta_ln(s: f64, a: f64, lam: f64) -> Result<(f64, usize, f64)> {
    if !(a > 0.0) {
        return Err(Error::domain(format!(
            "modified_zeta requires a > 0, got a = {a}"
        )));
    }
    if !(lam > 0.0) {
        return Err(Error::domain(format!(
            "modified_zeta requires lambda > 0, got lambda = {lam}"
        )));
    }
    if !(s > lam) {
        return Err(Error::domain(format!(
            "modified_zeta diverges: requires s > lambda (term n behaves as \
             n^(lambda-1-s)), got s = {s}, lambda = {lam}"
        )));
    }
    let m = lam.round();
    if (lam - m).abs() < 1e-9 && (1.0..=40.0).contains(&m) {
        // Cancellation in the polynomial reduction grows like (2a)^{m-1}/(m-1)!;
        // fall back to the direct series when that would cost digits.
        let mm = m as usize;
        let blowup = (2.0 * a).powi(mm as i32 - 1) / factorial(mm - 1);
        if blowup < 1e4 {
            return hurwitz_reduction(s, a, mm);
        }
    }
    direct_series_ln(s, a, lam)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

// C(n+m-1, n) = Π_{i=1}^{m-1}(n+i)/(m-1)!.  Expanding the product in powers
// of u = n+a turns the series into Σ_j e_j ζ_H(s-j, a) / (m-1)!.
fn hurwitz_reduction(s: f64, a: f64, m: usize) -> Result<(f64, usize, f64)> {
    let mut coeffs = vec![1.0f64];
    for i in 1..m {
        let shift = i as f64 - a;
        let mut next = vec![0.0; coeffs.len() + 1];
        for (j, c) in coeffs.iter().enumerate() {
            next[j] += c * shift;
            next[j + 1] += c;
        }
        coeffs = next;
    }
    let mut total = 0.0;
    for (j, c) in coeffs.iter().enumerate() {
        if *c != 0.0 {
            total += c * hurwitz_zeta(s - j as f64, a)?;
        }
    }
    let value = total / factorial(m - 1);
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::Accuracy {
            context: format!("modified_zeta({s}, {a}, {m}) lost all precision to cancellation"),
            best: value,
            error_estimate: f64::INFINITY,
        });
    }
    Ok((value.ln(), m, 1e-15))
}

fn direct_series_ln(s: f64, a: f64, lam: f64) -> Result<(f64, usize, f64)> {
    const MAX_TERMS: usize = 1_000_000;
    const REL_TOL: f64 = 1e-15;
    let ln_a = a.ln();
    // Scaled so the n = 0 term is exactly 1: value = a^{-s} * sum.
    let mut sum = 0.0f64;
    let mut ln_b = 0.0f64;
    let mut n = 0usize;
    loop {
        let nf = n as f64;
        let t = (ln_b - s * ((a + nf).ln() - ln_a)).exp();
        sum += t;
        // Integral comparison of the majorant ~ x^{lam-1-s} beyond n.
        let tail = t * (a + nf) / (s - lam);
        if (n > 8 && t < REL_TOL * sum && tail < REL_TOL * sum) || n + 1 >= MAX_TERMS {
            return Ok((sum.ln() - s * ln_a, n + 1, tail / sum));
        }
        ln_b += ((nf + lam) / (nf + 1.0)).ln();
        n += 1;
    }
}

/// Deformed exponential e_λ(x) = (1+(1−λ)x)_+^{1/(1−λ)}; e_1(x) = e^x.
///
/// For λ > 1 and 1+(1−λ)x ≤ 0 the clamped base raised to the negative
/// exponent is +∞ (densities built from 1/e_λ go to zero there).
pub fn q_exponential(x: f64, lam: f64) -> f64 {
    if (lam - 1.0).abs() < 1e-9 {
        return x.exp();
    }
    let base = 1.0 + (1.0 - lam) * x;
    if base <= 0.0 {
        return if lam < 1.0 { 0.0 } else { f64::INFINITY };
    }
    base.powf(1.0 / (1.0 - lam))
}
