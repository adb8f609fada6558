//! Assembly of the biparametric Fisher–Rényi complexity
//! C^(p,λ)[ρ] = K(p,λ) · φ_{p,λ}[ρ] · N_λ[ρ], parameter validity gating,
//! and derived quantities (replication ratio, one-parameter variant).

use crate::density::{replicate, DensityModel};
use crate::error::{Error, Result};
use crate::measures::{
    fisher_biparam_detailed, fisher_total_variation_detailed, renyi_entropy_detailed, ParamPair,
};
use crate::quadrature::QuadConfig;
use crate::reference;

/// Which evaluation route produced a [`ComplexityReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalPath {
    /// Adaptive quadrature on the density's pdf.
    Numeric,
    /// Closed-form/series constants (blackbody fast path).
    Analytic,
}

/// Full decomposition of one complexity evaluation.
#[derive(Debug, Clone)]
pub struct ComplexityReport {
    pub params: ParamPair,
    /// Rényi entropy R_λ[ρ] in nats.
    pub renyi: f64,
    /// Entropy power N_λ[ρ] = exp(R_λ).
    pub n_power: f64,
    /// Fisher factor φ_{p,λ}[ρ] (total-variation form at p = ∞).
    pub fisher: f64,
    /// Normalization constant K(p,λ).
    pub k_fr: f64,
    /// The complexity C = k_fr · fisher · n_power.
    pub value: f64,
    pub path: EvalPath,
    /// First-order propagated quadrature error on `value`.
    pub error_estimate: f64,
}

/// Check the complexity parameters (and optionally the blackbody dimension
/// gate) and return every violated inequality; empty means valid.
pub fn validate_params(p: f64, lam: f64, blackbody_d: Option<f64>) -> Vec<String> {
    let mut violations = Vec::new();
    if !(p >= 1.0) {
        violations.push(format!("requires p >= 1, got p = {p}"));
    }
    let threshold = 1.0 / (1.0 + p);
    if !(lam > threshold) {
        violations.push(format!(
            "requires lambda > 1/(1+p) = {threshold}, got lambda = {lam}"
        ));
    }
    if let Some(d) = blackbody_d {
        if !(d > 1.0) {
            violations.push(format!("requires dimension d > 1, got d = {d}"));
        } else {
            let gate = d / (d - 1.0);
            if !(lam * p > gate) {
                violations.push(format!(
                    "requires lambda*p > d/(d-1) = {gate}, got lambda*p = {}",
                    lam * p
                ));
            }
        }
    }
    violations
}

fn gate(p: f64, lam: f64) -> Result<()> {
    let violations = validate_params(p, lam, None);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidParams(violations))
    }
}

/// Complexity of an arbitrary density at parameters (p, λ).  For p = ∞ the
/// Fisher factor is the total-variation form (see [`complexity_infty`]).
pub fn complexity(
    rho: &DensityModel,
    params: &ParamPair,
    cfg: &QuadConfig,
) -> Result<ComplexityReport> {
    gate(params.p, params.lam)?;
    if params.p.is_infinite() {
        return complexity_infty(rho, params.lam, cfg);
    }
    let (renyi, dr) = renyi_entropy_detailed(rho, params.lam, cfg)?;
    let n_power = renyi.exp();
    let dn = n_power * dr;
    let (fisher, df) = fisher_biparam_detailed(rho, params, cfg)?;
    let k_fr = reference::k_fr(params.p, params.lam)?;
    Ok(ComplexityReport {
        params: *params,
        renyi,
        n_power,
        fisher,
        k_fr,
        value: k_fr * fisher * n_power,
        path: EvalPath::Numeric,
        error_estimate: k_fr * (fisher * dn + n_power * df),
    })
}

/// The p = ∞ member: (λ/2)^{1/λ} · (TV(ρ^λ)/λ)^{1/λ} · N_λ[ρ], minimized by
/// the uniform density (and by every monotone rearrangement).
pub fn complexity_infty(rho: &DensityModel, lam: f64, cfg: &QuadConfig) -> Result<ComplexityReport> {
    let params = ParamPair::new(f64::INFINITY, lam)?;
    let (renyi, dr) = renyi_entropy_detailed(rho, lam, cfg)?;
    let n_power = renyi.exp();
    let dn = n_power * dr;
    let (fisher, df) = fisher_total_variation_detailed(rho, lam, cfg)?;
    let k_fr = reference::k_fr(f64::INFINITY, lam)?;
    Ok(ComplexityReport {
        params,
        renyi,
        n_power,
        fisher,
        k_fr,
        value: k_fr * fisher * n_power,
        path: EvalPath::Numeric,
        error_estimate: k_fr * (fisher * dn + n_power * df),
    })
}

/// One-parameter complexity C^(λ) = (C^(2,λ))^{2λ}.  At λ = 1 this is the
/// Fisher–Shannon measure.
pub fn mono_from_bi(rho: &DensityModel, lam: f64, cfg: &QuadConfig) -> Result<f64> {
    let params = ParamPair::new(2.0, lam)?;
    Ok(complexity(rho, &params, cfg)?.value.powf(2.0 * lam))
}

/// Ratio C[ρ replicated n times]/C[ρ]; the replication law predicts n^{1/λ}.
/// The density must have compact support; copies are laid out far enough
/// apart to be disjoint.
pub fn replication_factor_check(
    rho: &DensityModel,
    n: usize,
    lam: f64,
    p: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    let params = ParamPair::new(p, lam)?;
    let base = complexity(rho, &params, cfg)?.value;
    let support = rho.support();
    if !support.is_bounded() {
        return Err(Error::Composition(
            "replication ratio needs a compactly supported density".to_string(),
        ));
    }
    let width = support.upper - support.lower;
    let centers: Vec<f64> = (0..n).map(|i| 2.0 * width * i as f64).collect();
    let replicated = replicate(rho, n, &centers)?;
    let value = complexity(&replicated, &params, cfg)?.value;
    Ok(value / base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{scaled, translated, BlackbodySpec, GenGaussianSpec, StepDensity};
    use approx::assert_relative_eq;

    fn cfg() -> QuadConfig {
        QuadConfig::default()
    }

    fn gg(p: f64, lam: f64) -> DensityModel {
        GenGaussianSpec::new(p, lam).unwrap().model().unwrap()
    }

    fn steps(edges: Vec<f64>, heights: Vec<f64>) -> DensityModel {
        StepDensity::new(edges, heights).unwrap().model().unwrap()
    }

    #[test]
    fn validate_params_reports_each_violated_inequality() {
        assert!(validate_params(2.0, 1.0, Some(3.0)).is_empty());
        assert!(validate_params(2.0, 0.8, Some(5.0)).is_empty());

        let v = validate_params(2.0, 0.3, None);
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("lambda > 1/(1+p)"), "{v:?}");

        let v = validate_params(1.5, 1.0, Some(3.0));
        assert_eq!(v.len(), 1, "boundary value lambda*p = d/(d-1) must fail strictly: {v:?}");
        assert!(v[0].contains("lambda*p > d/(d-1)"), "{v:?}");

        let v = validate_params(0.5, 0.1, Some(0.5));
        assert_eq!(v.len(), 3);

        // p = ∞ always clears the blackbody gate.
        assert!(validate_params(f64::INFINITY, 0.4, Some(6.0)).is_empty());
    }

    #[test]
    fn dimension_gate_matches_its_algebraic_rearrangement() {
        for lp in [1.1, 1.4, 2.0, 3.5, 10.0] {
            for d in [1.5, 2.0, 3.0, 4.0, 6.0, 25.0] {
                let direct = lp > d / (d - 1.0);
                let rearranged = d > lp / (lp - 1.0);
                assert_eq!(direct, rearranged, "lp = {lp}, d = {d}");
            }
        }
    }

    #[test]
    fn extremal_family_sits_at_the_lower_bound() {
        // Includes the λ = 1 + 1/p member a(1 − |x|^p/p)_+^p, which is the
        // same density written with the exponents expanded.
        for (p, lam) in [
            (2.0, 2.0),
            (3.0, 1.5),
            (1.5, 2.5),
            (2.0, 1.0),
            (2.0, 0.9),
            (1.0, 2.0),
            (5.0, 3.0),
            (3.0, 1.0 + 1.0 / 3.0),
        ] {
            let m = gg(p, lam);
            let params = ParamPair::new(p, lam).unwrap();
            let report = complexity(&m, &params, &cfg()).unwrap();
            assert_relative_eq!(report.value, 1.0, max_relative = 1e-6);
            assert_relative_eq!(
                report.value,
                report.k_fr * report.fisher * report.n_power,
                max_relative = 1e-12
            );
            assert_eq!(report.path, EvalPath::Numeric);
        }
    }

    #[test]
    fn value_is_invariant_under_scaling_and_translation() {
        let base = gg(2.0, 2.0);
        let params = ParamPair::new(2.0, 1.5).unwrap();
        let c0 = complexity(&base, &params, &cfg()).unwrap().value;
        for a in [0.1, 1.0, 7.3] {
            let m = scaled(&base, a).unwrap();
            let c = complexity(&m, &params, &cfg()).unwrap().value;
            assert_relative_eq!(c, c0, max_relative = 1e-6);
        }
        for b in [-5.0, 0.0, 11.0] {
            let m = translated(&base, b).unwrap();
            let c = complexity(&m, &params, &cfg()).unwrap().value;
            assert_relative_eq!(c, c0, max_relative = 1e-6);
        }
        let m = translated(&scaled(&base, 3.0).unwrap(), -2.0).unwrap();
        let c = complexity(&m, &params, &cfg()).unwrap().value;
        assert_relative_eq!(c, c0, max_relative = 1e-6);
    }

    #[test]
    fn numeric_blackbody_value_matches_frozen_reference() {
        let m = BlackbodySpec::new(3.0, 1.0).unwrap().model().unwrap();
        let params = ParamPair::new(2.0, 2.0).unwrap();
        let report = complexity(&m, &params, &cfg()).unwrap();
        assert_relative_eq!(report.value, 1.139_769_074_845_456_8, max_relative = 1e-7);
        let params = ParamPair::new(2.0, 1.0).unwrap();
        let report = complexity(&m, &params, &cfg()).unwrap();
        assert_relative_eq!(report.value, 1.381_953_158_961_929_8, max_relative = 1e-7);
    }

    #[test]
    fn uniform_minimizes_the_total_variation_member() {
        let u = steps(vec![0.0, 1.0], vec![1.0]);
        for lam in [0.5, 1.0, 2.0, 3.0] {
            let report = complexity_infty(&u, lam, &cfg()).unwrap();
            assert_relative_eq!(report.value, 1.0, max_relative = 1e-9);
        }
        // Dispatch through the general entry point agrees.
        let params = ParamPair::new(f64::INFINITY, 2.0).unwrap();
        let report = complexity(&u, &params, &cfg()).unwrap();
        assert_relative_eq!(report.value, 1.0, max_relative = 1e-9);
        assert!(params.q() == 1.0);
    }

    #[test]
    fn monotone_two_step_density_respects_lower_bound() {
        let m = steps(vec![0.0, 1.0, 2.0], vec![0.3, 0.7]);
        for lam in [1.0, 2.0, 3.0] {
            let v = complexity_infty(&m, lam, &cfg()).unwrap().value;
            assert!(v >= 1.0 - 1e-6, "lambda = {lam}: {v}");
        }
    }

    fn permutations4() -> Vec<[usize; 4]> {
        let mut all = Vec::with_capacity(24);
        let mut idx = [0usize, 1, 2, 3];
        fn heap(k: usize, idx: &mut [usize; 4], all: &mut Vec<[usize; 4]>) {
            if k == 1 {
                all.push(*idx);
                return;
            }
            for i in 0..k {
                heap(k - 1, idx, all);
                if k.is_multiple_of(2) {
                    idx.swap(i, k - 1);
                } else {
                    idx.swap(0, k - 1);
                }
            }
        }
        heap(4, &mut idx, &mut all);
        all
    }

    fn is_unimodal(h: &[f64]) -> bool {
        let peak = h
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        h[..=peak].windows(2).all(|w| w[0] <= w[1])
            && h[peak..].windows(2).all(|w| w[0] >= w[1])
    }

    #[test]
    fn step_rearrangements_are_minimized_by_monotone_orderings() {
        let base = [0.1, 0.2, 0.3, 0.4];
        let edges = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let mut results = Vec::new();
        for perm in permutations4() {
            let heights: Vec<f64> = perm.iter().map(|&i| base[i]).collect();
            let m = steps(edges.clone(), heights.clone());
            let v = complexity_infty(&m, 2.0, &cfg()).unwrap().value;
            results.push((heights, v));
        }
        let min = results.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
        assert_relative_eq!(min, 4.0 / 3.0, max_relative = 1e-9);

        let winners: Vec<&(Vec<f64>, f64)> = results
            .iter()
            .filter(|r| r.1 <= min * (1.0 + 1e-9))
            .collect();
        // Every winner is unimodal, and both monotone orderings win.
        assert!(winners.iter().all(|(h, _)| is_unimodal(h)));
        let increasing = vec![0.1, 0.2, 0.3, 0.4];
        let decreasing = vec![0.4, 0.3, 0.2, 0.1];
        assert!(winners.iter().any(|(h, _)| *h == increasing));
        assert!(winners.iter().any(|(h, _)| *h == decreasing));

        let sample = results
            .iter()
            .find(|(h, _)| *h == vec![0.2, 0.1, 0.4, 0.3])
            .unwrap();
        assert_relative_eq!(sample.1, 1.452_966_314_513_557_8, max_relative = 1e-10);
    }

    #[test]
    fn one_parameter_variant_and_fisher_shannon() {
        for lam in [1.0, 2.0] {
            let m = gg(2.0, lam);
            assert_relative_eq!(mono_from_bi(&m, lam, &cfg()).unwrap(), 1.0, max_relative = 1e-5);
        }
        // Fisher–Shannon for a Gaussian: squared C^(2,1) = 1.
        let gauss = gg(2.0, 1.0);
        let c21 = complexity(&gauss, &ParamPair::new(2.0, 1.0).unwrap(), &cfg())
            .unwrap()
            .value;
        assert_relative_eq!(mono_from_bi(&gauss, 1.0, &cfg()).unwrap(), c21 * c21, max_relative = 1e-9);

        let bb = BlackbodySpec::new(3.0, 1.0).unwrap().model().unwrap();
        assert!(mono_from_bi(&bb, 2.0, &cfg()).unwrap() >= 1.0);
    }

    #[test]
    fn replication_scales_complexity_by_the_predicted_power() {
        let base = gg(2.0, 1.5);
        assert_relative_eq!(
            replication_factor_check(&base, 1, 2.0, 2.0, &cfg()).unwrap(),
            1.0,
            max_relative = 1e-9
        );
        assert_relative_eq!(
            replication_factor_check(&base, 2, 1.0, 2.0, &cfg()).unwrap(),
            2.0,
            max_relative = 1e-4
        );
        assert_relative_eq!(
            replication_factor_check(&base, 3, 2.0, 2.0, &cfg()).unwrap(),
            3.0f64.sqrt(),
            max_relative = 1e-4
        );
        // n^{1/λ} → 1: replication asymptotically leaves C unchanged.
        let r10 = replication_factor_check(&base, 2, 10.0, 2.0, &cfg()).unwrap();
        let r50 = replication_factor_check(&base, 2, 50.0, 2.0, &cfg()).unwrap();
        assert_relative_eq!(r10, 2.0f64.powf(0.1), max_relative = 1e-4);
        assert_relative_eq!(r50, 2.0f64.powf(0.02), max_relative = 1e-4);
        assert!((r50 - 1.0).abs() < (r10 - 1.0).abs());
    }

    #[test]
    fn invalid_parameters_are_rejected_before_integration() {
        let m = gg(2.0, 2.0);
        let err = complexity(&m, &ParamPair::new(2.0, 0.2).unwrap(), &cfg()).unwrap_err();
        match err {
            Error::InvalidParams(v) => assert!(v[0].contains("lambda > 1/(1+p)")),
            other => panic!("expected InvalidParams, got {other}"),
        }
    }
}
