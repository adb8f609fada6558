//! Probability densities on the line: the abstraction used by every
//! functional, plus the concrete families — d-dimensional blackbody spectra,
//! generalized Gaussians, step densities, disjoint replicas, tabulated grid
//! densities, and affine (scale/translate) wrappers.

use std::fmt;
use std::io::BufRead;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::{self, QuadConfig, QuadResult};
use crate::reference;
use crate::specfun::{self, q_exponential};

/// Support interval; either side may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub lower: f64,
    pub upper: f64,
}

impl Support {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || !(lower < upper) {
            return Err(Error::domain(format!(
                "support requires lower < upper, got [{lower}, {upper}]"
            )));
        }
        Ok(Support { lower, upper })
    }

    pub fn is_bounded(&self) -> bool {
        self.lower.is_finite() && self.upper.is_finite()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }
}

/// A jump discontinuity of the pdf: one-sided limits at `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub x: f64,
    pub left: f64,
    pub right: f64,
}

/// A one-dimensional probability density with enough declared structure
/// (support, endpoint power behavior, jumps, derivative kinks) for the
/// integrators to handle it accurately.
pub trait Density: Send + Sync {
    fn pdf(&self, x: f64) -> f64;

    fn support(&self) -> Support;

    /// dρ/dx; analytic where available.  The default numeric fallback is a
    /// central difference and must only be trusted at smooth interior points.
    fn pdf_derivative(&self, x: f64) -> f64 {
        quadrature::numeric_derivative(|t| self.pdf(t), x)
    }

    /// Power exponents c with pdf ~ t^c at the finite support endpoints
    /// (t = distance to the endpoint); `None` for infinite or undeclared
    /// endpoints.  c = 0 denotes a jump onto a positive value.
    fn singular_exponents(&self) -> [Option<f64>; 2] {
        [None, None]
    }

    /// Jump discontinuities, including support edges where the pdf lands on
    /// a positive value.
    fn jumps(&self) -> Vec<Jump> {
        Vec::new()
    }

    /// Interior points where the pdf or its derivative is not smooth —
    /// modes, cusps, step edges, grid nodes.  Integrators split here.
    fn interior_kinks(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Characteristic length of the density, used to precondition
    /// integration over unbounded directions.
    fn scale_hint(&self) -> f64 {
        1.0
    }

    /// Characteristic location, used to split doubly infinite supports.
    fn center_hint(&self) -> f64 {
        0.0
    }
}

/// A validated, shareable density: construction checks that the pdf
/// integrates to 1 within 1e-8 over its declared support.
#[derive(Clone)]
pub struct DensityModel {
    inner: Arc<dyn Density>,
}

impl fmt::Debug for DensityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityModel")
            .field("support", &self.support())
            .finish_non_exhaustive()
    }
}

impl DensityModel {
    pub fn new(density: impl Density + 'static) -> Result<Self> {
        let model = DensityModel {
            inner: Arc::new(density),
        };
        let r = model.integrate_adapted(
            &|x| model.pdf(x),
            model.singular_exponents(),
            &QuadConfig::default(),
        )?;
        if (r.value - 1.0).abs() > 1e-8 {
            return Err(Error::domain(format!(
                "density is not normalized: pdf integrates to {:.12e} (must be 1 within 1e-8)",
                r.value
            )));
        }
        Ok(model)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.inner.pdf(x)
    }

    pub fn pdf_derivative(&self, x: f64) -> f64 {
        self.inner.pdf_derivative(x)
    }

    pub fn support(&self) -> Support {
        self.inner.support()
    }

    pub fn singular_exponents(&self) -> [Option<f64>; 2] {
        self.inner.singular_exponents()
    }

    pub fn jumps(&self) -> Vec<Jump> {
        self.inner.jumps()
    }

    pub fn interior_kinks(&self) -> Vec<f64> {
        self.inner.interior_kinks()
    }

    pub fn scale_hint(&self) -> f64 {
        self.inner.scale_hint()
    }

    pub fn center_hint(&self) -> f64 {
        self.inner.center_hint()
    }

    pub(crate) fn guarded_scale(&self) -> f64 {
        let s = self.scale_hint();
        if s.is_finite() && s > 0.0 {
            s
        } else {
            1.0
        }
    }

    /// Ordered panel boundaries covering the support: both support endpoints
    /// plus every declared interior kink and jump position (deduplicated).
    /// A doubly infinite support with no declared structure is split at the
    /// center hint so each panel has at most one unbounded end.
    pub(crate) fn split_points(&self) -> Vec<f64> {
        let sup = self.support();
        let scale = self.guarded_scale();
        let mut splits = self.interior_kinks();
        splits.extend(self.jumps().iter().map(|j| j.x));
        splits.retain(|x| x.is_finite() && *x > sup.lower && *x < sup.upper);
        if splits.is_empty() && !sup.lower.is_finite() && !sup.upper.is_finite() {
            splits.push(self.center_hint());
        }
        splits.sort_by(f64::total_cmp);
        splits.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * scale.max(b.abs()));

        let mut points = Vec::with_capacity(splits.len() + 2);
        points.push(sup.lower);
        points.extend(splits);
        points.push(sup.upper);
        points
    }

    /// Integrate `g` over the support, splitting at declared kinks and jump
    /// positions, regularizing endpoint power behavior (`exps` are the power
    /// exponents of `g`, not of the pdf), and preconditioning unbounded
    /// directions with the density's length scale.
    pub(crate) fn integrate_adapted(
        &self,
        g: &dyn Fn(f64) -> f64,
        exps: [Option<f64>; 2],
        cfg: &QuadConfig,
    ) -> Result<QuadResult> {
        let sup = self.support();
        for (i, e) in exps.iter().enumerate() {
            let endpoint = if i == 0 { sup.lower } else { sup.upper };
            if let Some(c) = e {
                if endpoint.is_finite() && *c <= -1.0 {
                    return Err(Error::domain(format!(
                        "integrand behaves as t^{c} at endpoint {endpoint}: not integrable"
                    )));
                }
            }
        }
        let scale = self.guarded_scale();
        let points = self.split_points();

        let mut total = QuadResult {
            value: 0.0,
            error_estimate: 0.0,
            subdivisions_used: 0,
        };
        let last = points.len() - 2;
        for i in 0..=last {
            let lo_exp = if i == 0 { exps[0] } else { None };
            let hi_exp = if i == last { exps[1] } else { None };
            let r = integrate_segment(g, points[i], points[i + 1], lo_exp, hi_exp, scale, cfg)?;
            total.value += r.value;
            total.error_estimate += r.error_estimate;
            total.subdivisions_used += r.subdivisions_used;
        }
        Ok(total)
    }
}

// Exponents in this range trigger the quadrature power substitution.
fn hint_active(e: Option<f64>) -> bool {
    matches!(e, Some(c) if c > -1.0 && c < 0.5)
}

fn with_hint(cfg: &QuadConfig, e: Option<f64>) -> QuadConfig {
    QuadConfig {
        endpoint_power_hint: e,
        ..*cfg
    }
}

fn integrate_segment(
    g: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    lo_exp: Option<f64>,
    hi_exp: Option<f64>,
    scale: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    match (a.is_finite(), b.is_finite()) {
        (true, true) => {
            if hint_active(lo_exp) && hint_active(hi_exp) {
                let mid = 0.5 * (a + b);
                let l = integrate_segment(g, a, mid, lo_exp, None, scale, cfg)?;
                let r = integrate_segment(g, mid, b, None, hi_exp, scale, cfg)?;
                return Ok(QuadResult {
                    value: l.value + r.value,
                    error_estimate: l.error_estimate + r.error_estimate,
                    subdivisions_used: l.subdivisions_used + r.subdivisions_used,
                });
            }
            if hint_active(hi_exp) {
                // Reflect so the singular endpoint becomes the lower one.
                return quadrature::integrate(
                    |u| g(b - u),
                    0.0,
                    b - a,
                    &with_hint(cfg, hi_exp),
                );
            }
            quadrature::integrate(g, a, b, &with_hint(cfg, lo_exp))
        }
        // Rescale so the compactifying map samples at the density's scale.
        (true, false) => quadrature::integrate(
            |u| scale * g(a + scale * u),
            0.0,
            f64::INFINITY,
            &with_hint(cfg, lo_exp),
        ),
        (false, true) => quadrature::integrate(
            |u| scale * g(b - scale * u),
            0.0,
            f64::INFINITY,
            &with_hint(cfg, hi_exp),
        ),
        (false, false) => quadrature::integrate(g, a, b, &with_hint(cfg, None)),
    }
}

// ---------------------------------------------------------------------------
// Blackbody spectral density.
// ---------------------------------------------------------------------------

/// d-dimensional blackbody spectrum with temperature scale θ = k_B·T/h
/// (units of frequency): ρ(ν) = θ^{−1}·ρ̃(ν/θ) with the reduced density
/// ρ̃(x) = x^d / [Γ(d+1)ζ(d+1)(e^x − 1)].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlackbodySpec {
    pub d: f64,
    pub theta: f64,
}

impl BlackbodySpec {
    pub fn new(d: f64, theta: f64) -> Result<Self> {
        if !d.is_finite() || !(d > 1.0) {
            return Err(Error::domain(format!(
                "blackbody requires dimension d > 1, got {d}"
            )));
        }
        if !theta.is_finite() || !(theta > 0.0) {
            return Err(Error::domain(format!(
                "blackbody requires temperature scale theta > 0, got {theta}"
            )));
        }
        Ok(BlackbodySpec { d, theta })
    }

    pub fn model(&self) -> Result<DensityModel> {
        DensityModel::new(Blackbody::build(*self)?)
    }
}

/// ln[Γ(d+1)ζ(d+1)], the normalization of the reduced spectrum.
pub(crate) fn blackbody_ln_norm(d: f64) -> Result<f64> {
    Ok(specfun::log_gamma(d + 1.0)? + specfun::riemann_zeta(d + 1.0)?.ln())
}

/// Location of the spectral maximum of the reduced density: the root of
/// d·(1 − e^{−x}) = x, which exists and is unique for d > 1.
pub(crate) fn blackbody_mode(d: f64) -> Result<f64> {
    quadrature::find_sign_change(|x| d * (-(-x).exp_m1()) - x, 1e-9, d + 1.0)
}

struct Blackbody {
    d: f64,
    theta: f64,
    ln_norm: f64,
    mode: f64, // in reduced units
}

impl Blackbody {
    fn build(spec: BlackbodySpec) -> Result<Self> {
        Ok(Blackbody {
            d: spec.d,
            theta: spec.theta,
            ln_norm: blackbody_ln_norm(spec.d)?,
            mode: blackbody_mode(spec.d)?,
        })
    }

    // Reduced density; log-space evaluation keeps large d and x representable.
    fn reduced(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let om = -(-x).exp_m1(); // 1 − e^{−x}
        (self.d * x.ln() - x - om.ln() - self.ln_norm).exp()
    }

    // ρ̃'(x) = x^{d−1} e^{−x} (d·(1−e^{−x}) − x) / (1−e^{−x})² / norm.
    fn reduced_derivative(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let om = -(-x).exp_m1();
        let kernel = self.d * om - x;
        let ln_mag = (self.d - 1.0) * x.ln() - x + kernel.abs().ln() - 2.0 * om.ln() - self.ln_norm;
        kernel.signum() * ln_mag.exp()
    }
}

impl Density for Blackbody {
    fn pdf(&self, x: f64) -> f64 {
        self.reduced(x / self.theta) / self.theta
    }

    fn pdf_derivative(&self, x: f64) -> f64 {
        self.reduced_derivative(x / self.theta) / (self.theta * self.theta)
    }

    fn support(&self) -> Support {
        Support {
            lower: 0.0,
            upper: f64::INFINITY,
        }
    }

    fn singular_exponents(&self) -> [Option<f64>; 2] {
        [Some(self.d - 1.0), None]
    }

    fn interior_kinks(&self) -> Vec<f64> {
        vec![self.theta * self.mode]
    }

    fn scale_hint(&self) -> f64 {
        self.theta * (self.d + 1.0)
    }

    fn center_hint(&self) -> f64 {
        self.theta * self.mode
    }
}

/// Blackbody pdf at frequency ν (> 0).
pub fn blackbody_pdf(nu: f64, spec: &BlackbodySpec) -> Result<f64> {
    let spec = BlackbodySpec::new(spec.d, spec.theta)?;
    if !(nu > 0.0) {
        return Err(Error::domain(format!(
            "blackbody pdf requires frequency > 0, got {nu}"
        )));
    }
    Ok(blackbody_pdf_reduced(nu / spec.theta, spec.d)? / spec.theta)
}

/// Reduced (temperature-free) blackbody density ρ̃(x) at x = ν/θ > 0.
pub fn blackbody_pdf_reduced(x: f64, d: f64) -> Result<f64> {
    if !d.is_finite() || !(d > 1.0) {
        return Err(Error::domain(format!(
            "blackbody requires dimension d > 1, got {d}"
        )));
    }
    if !(x > 0.0) {
        return Err(Error::domain(format!(
            "reduced blackbody pdf requires x > 0, got {x}"
        )));
    }
    let om = -(-x).exp_m1();
    Ok((d * x.ln() - x - om.ln() - blackbody_ln_norm(d)?).exp())
}

// ---------------------------------------------------------------------------
// Generalized Gaussian.
// ---------------------------------------------------------------------------

/// The extremal family G_{p,λ}(x) = a_{p,λ}/e_λ(|x|^p): compactly supported
/// on |x| ≤ (λ−1)^{−1/p} for λ > 1, exponential-type at λ = 1, power-tailed
/// for λ < 1.  `p = f64::INFINITY` denotes the uniform density on [−1, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenGaussianSpec {
    pub p: f64,
    pub lam: f64,
}

impl GenGaussianSpec {
    pub fn new(p: f64, lam: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::domain(format!(
                "generalized Gaussian requires p >= 1 (p = infinity allowed), got {p}"
            )));
        }
        if !lam.is_finite() || (p.is_finite() && !(lam > 1.0 - p)) {
            return Err(Error::domain(format!(
                "generalized Gaussian requires lambda > 1 - p for normalizability, \
                 got (p, lambda) = ({p}, {lam})"
            )));
        }
        Ok(GenGaussianSpec { p, lam })
    }

    /// Half-length of the support: (λ−1)^{−1/p} for λ > 1, 1 for p = ∞,
    /// infinite otherwise.
    pub fn support_halfwidth(&self) -> f64 {
        if self.p.is_infinite() {
            1.0
        } else if self.lam > 1.0 {
            (self.lam - 1.0).powf(-1.0 / self.p)
        } else {
            f64::INFINITY
        }
    }

    pub fn model(&self) -> Result<DensityModel> {
        DensityModel::new(GenGaussian::build(*self)?)
    }
}

struct GenGaussian {
    p: f64,
    lam: f64,
    a: f64,
    halfwidth: f64,
}

impl GenGaussian {
    fn build(spec: GenGaussianSpec) -> Result<Self> {
        let spec = GenGaussianSpec::new(spec.p, spec.lam)?;
        Ok(GenGaussian {
            p: spec.p,
            lam: spec.lam,
            a: reference::a_norm(spec.p, spec.lam)?,
            halfwidth: spec.support_halfwidth(),
        })
    }
}

impl Density for GenGaussian {
    fn pdf(&self, x: f64) -> f64 {
        if self.p.is_infinite() {
            return if x.abs() <= 1.0 { 0.5 } else { 0.0 };
        }
        self.a / q_exponential(x.abs().powf(self.p), self.lam)
    }

    fn pdf_derivative(&self, x: f64) -> f64 {
        if self.p.is_infinite() || x == 0.0 || x.abs() >= self.halfwidth {
            return 0.0;
        }
        let (p, lam) = (self.p, self.lam);
        let common = -self.a * p * x.signum() * x.abs().powf(p - 1.0);
        if (lam - 1.0).abs() < 1e-9 {
            common * (-x.abs().powf(p)).exp()
        } else {
            let b = 1.0 + (1.0 - lam) * x.abs().powf(p);
            common * b.powf(1.0 / (lam - 1.0) - 1.0)
        }
    }

    fn support(&self) -> Support {
        Support {
            lower: -self.halfwidth,
            upper: self.halfwidth,
        }
    }

    fn singular_exponents(&self) -> [Option<f64>; 2] {
        if self.p.is_infinite() {
            [Some(0.0), Some(0.0)]
        } else if self.lam > 1.0 {
            // pdf ~ t^{1/(λ−1)} at the support edges.
            let c = 1.0 / (self.lam - 1.0);
            [Some(c), Some(c)]
        } else {
            [None, None]
        }
    }

    fn jumps(&self) -> Vec<Jump> {
        if self.p.is_infinite() {
            vec![
                Jump {
                    x: -1.0,
                    left: 0.0,
                    right: 0.5,
                },
                Jump {
                    x: 1.0,
                    left: 0.5,
                    right: 0.0,
                },
            ]
        } else {
            Vec::new()
        }
    }

    fn interior_kinks(&self) -> Vec<f64> {
        vec![0.0]
    }

    fn scale_hint(&self) -> f64 {
        if self.p.is_infinite() || (self.lam - 1.0).abs() < 1e-9 {
            1.0
        } else {
            (self.lam - 1.0).abs().powf(-1.0 / self.p)
        }
    }
}

/// Generalized-Gaussian pdf at `x`.
pub fn gen_gaussian_pdf(x: f64, spec: &GenGaussianSpec) -> Result<f64> {
    Ok(GenGaussian::build(*spec)?.pdf(x))
}

// ---------------------------------------------------------------------------
// Step densities.
// ---------------------------------------------------------------------------

/// Piecewise-constant density: `heights[i]` on `[edges[i], edges[i+1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDensity {
    edges: Vec<f64>,
    heights: Vec<f64>,
}

impl StepDensity {
    pub fn new(edges: Vec<f64>, heights: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 || heights.len() + 1 != edges.len() {
            return Err(Error::domain(format!(
                "step density needs n+1 edges for n >= 1 heights, got {} edges, {} heights",
                edges.len(),
                heights.len()
            )));
        }
        if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::domain(
                "step density edges must be finite and strictly increasing",
            ));
        }
        if heights.iter().any(|h| !h.is_finite() || *h < 0.0) {
            return Err(Error::domain(
                "step density heights must be finite and nonnegative",
            ));
        }
        let mass: f64 = heights
            .iter()
            .zip(edges.windows(2))
            .map(|(h, w)| h * (w[1] - w[0]))
            .sum();
        if (mass - 1.0).abs() > 1e-8 {
            return Err(Error::domain(format!(
                "step density has total mass {mass:.12e}, must be 1 within 1e-8"
            )));
        }
        Ok(StepDensity { edges, heights })
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    /// Rearrange heights by `perm` (new height i = old height perm[i]).
    /// The result must still have total mass 1 — guaranteed for equal-width
    /// bins, rejected otherwise.
    pub fn permute_heights(&self, perm: &[usize]) -> Result<StepDensity> {
        let n = self.heights.len();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&i| i >= n || std::mem::replace(&mut seen[i], true))
        {
            return Err(Error::domain(format!(
                "not a permutation of 0..{n}: {perm:?}"
            )));
        }
        let heights = perm.iter().map(|&i| self.heights[i]).collect();
        StepDensity::new(self.edges.clone(), heights)
    }

    pub fn model(&self) -> Result<DensityModel> {
        DensityModel::new(self.clone())
    }
}

impl Density for StepDensity {
    fn pdf(&self, x: f64) -> f64 {
        step_pdf(x, self)
    }

    fn pdf_derivative(&self, _x: f64) -> f64 {
        0.0
    }

    fn support(&self) -> Support {
        Support {
            lower: self.edges[0],
            upper: *self.edges.last().expect("validated nonempty"),
        }
    }

    fn singular_exponents(&self) -> [Option<f64>; 2] {
        [Some(0.0), Some(0.0)]
    }

    fn jumps(&self) -> Vec<Jump> {
        let mut out = Vec::new();
        let mut prev = 0.0;
        for (i, &e) in self.edges.iter().enumerate() {
            let next = self.heights.get(i).copied().unwrap_or(0.0);
            if prev != next {
                out.push(Jump {
                    x: e,
                    left: prev,
                    right: next,
                });
            }
            prev = next;
        }
        out
    }

    fn interior_kinks(&self) -> Vec<f64> {
        self.edges[1..self.edges.len() - 1].to_vec()
    }

    fn scale_hint(&self) -> f64 {
        self.edges.last().unwrap() - self.edges[0]
    }

    fn center_hint(&self) -> f64 {
        0.5 * (self.edges[0] + self.edges.last().unwrap())
    }
}

/// Piecewise-constant (right-continuous) evaluation of a step density.
pub fn step_pdf(x: f64, sd: &StepDensity) -> f64 {
    if x < sd.edges[0] || x >= *sd.edges.last().expect("validated nonempty") {
        return 0.0;
    }
    // Last bin whose left edge is <= x.
    let i = sd.edges.partition_point(|&e| e <= x) - 1;
    sd.heights[i]
}

// ---------------------------------------------------------------------------
// Replication.
// ---------------------------------------------------------------------------

struct Replicated {
    base: DensityModel,
    root_n: f64,
    centers: Vec<f64>,
    copies: Vec<(f64, f64)>, // support of each copy, ascending
}

impl Replicated {
    fn copy_index(&self, x: f64) -> Option<usize> {
        self.copies
            .iter()
            .position(|&(lo, hi)| x >= lo && x <= hi)
    }
}

impl Density for Replicated {
    fn pdf(&self, x: f64) -> f64 {
        match self.copy_index(x) {
            Some(m) => self.base.pdf(self.root_n * (x - self.centers[m])) / self.root_n,
            None => 0.0,
        }
    }

    fn pdf_derivative(&self, x: f64) -> f64 {
        match self.copy_index(x) {
            // The chain-rule factor √n cancels the amplitude factor 1/√n.
            Some(m) => self.base.pdf_derivative(self.root_n * (x - self.centers[m])),
            None => 0.0,
        }
    }

    fn support(&self) -> Support {
        Support {
            lower: self.copies[0].0,
            upper: self.copies[self.copies.len() - 1].1,
        }
    }

    fn singular_exponents(&self) -> [Option<f64>; 2] {
        self.base.singular_exponents()
    }

    fn jumps(&self) -> Vec<Jump> {
        let mut out = Vec::new();
        for &b in &self.centers {
            for j in self.base.jumps() {
                out.push(Jump {
                    x: b + j.x / self.root_n,
                    left: j.left / self.root_n,
                    right: j.right / self.root_n,
                });
            }
        }
        out
    }

    fn interior_kinks(&self) -> Vec<f64> {
        let sup = self.support();
        let mut out = Vec::new();
        for (m, &b) in self.centers.iter().enumerate() {
            for k in self.base.interior_kinks() {
                out.push(b + k / self.root_n);
            }
            let (lo, hi) = self.copies[m];
            if lo > sup.lower {
                out.push(lo);
            }
            if hi < sup.upper {
                out.push(hi);
            }
        }
        out
    }

    fn scale_hint(&self) -> f64 {
        self.copies[self.copies.len() - 1].1 - self.copies[0].0
    }

    fn center_hint(&self) -> f64 {
        self.centers.iter().sum::<f64>() / self.centers.len() as f64
    }
}

/// n shifted, √n-squeezed copies of `rho` at the given centers:
/// ρ̃(x) = Σ_m n^{−1/2} ρ(n^{1/2}(x − b_m)).  The copies must not overlap.
pub fn replicate(rho: &DensityModel, n: usize, centers: &[f64]) -> Result<DensityModel> {
    if n == 0 || centers.len() != n {
        return Err(Error::Composition(format!(
            "replication needs one center per copy: n = {n}, centers given = {}",
            centers.len()
        )));
    }
    let base_sup = rho.support();
    if !base_sup.is_bounded() {
        return Err(Error::Composition(
            "replication requires a compactly supported base density".into(),
        ));
    }
    let root_n = (n as f64).sqrt();
    let mut centers: Vec<f64> = centers.to_vec();
    if centers.iter().any(|c| !c.is_finite()) {
        return Err(Error::Composition("replica centers must be finite".into()));
    }
    centers.sort_by(f64::total_cmp);
    let copies: Vec<(f64, f64)> = centers
        .iter()
        .map(|&b| (b + base_sup.lower / root_n, b + base_sup.upper / root_n))
        .collect();
    for w in copies.windows(2) {
        if w[0].1 > w[1].0 {
            return Err(Error::Composition(format!(
                "replica supports overlap: [{}, {}] and [{}, {}]",
                w[0].0, w[0].1, w[1].0, w[1].1
            )));
        }
    }
    DensityModel::new(Replicated {
        base: rho.clone(),
        root_n,
        centers,
        copies,
    })
}

// ---------------------------------------------------------------------------
// Grid densities from CSV.
// ---------------------------------------------------------------------------

const MAX_GRID_KINKS: usize = 512;

struct GridDensity {
    xs: Vec<f64>,
    ys: Vec<f64>,
    kinks: Vec<f64>,
}

impl GridDensity {
    fn segment(&self, x: f64) -> Option<usize> {
        if x < self.xs[0] || x > *self.xs.last().expect("nonempty") {
            return None;
        }
        Some(self.xs.partition_point(|&t| t <= x).clamp(1, self.xs.len() - 1) - 1)
    }
}

impl Density for GridDensity {
    fn pdf(&self, x: f64) -> f64 {
        match self.segment(x) {
            Some(i) => {
                let t = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
                self.ys[i] + t * (self.ys[i + 1] - self.ys[i])
            }
            None => 0.0,
        }
    }

    fn pdf_derivative(&self, x: f64) -> f64 {
        match self.segment(x) {
            Some(i) => (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i]),
            None => 0.0,
        }
    }

    fn support(&self) -> Support {
        Support {
            lower: self.xs[0],
            upper: *self.xs.last().expect("nonempty"),
        }
    }

    fn singular_exponents(&self) -> [Option<f64>; 2] {
        let edge = |y: f64| if y > 0.0 { Some(0.0) } else { Some(1.0) };
        [edge(self.ys[0]), edge(*self.ys.last().expect("nonempty"))]
    }

    fn jumps(&self) -> Vec<Jump> {
        let mut out = Vec::new();
        if self.ys[0] > 0.0 {
            out.push(Jump {
                x: self.xs[0],
                left: 0.0,
                right: self.ys[0],
            });
        }
        let (last_x, last_y) = (*self.xs.last().unwrap(), *self.ys.last().unwrap());
        if last_y > 0.0 {
            out.push(Jump {
                x: last_x,
                left: last_y,
                right: 0.0,
            });
        }
        out
    }

    fn interior_kinks(&self) -> Vec<f64> {
        self.kinks.clone()
    }

    fn scale_hint(&self) -> f64 {
        self.xs.last().unwrap() - self.xs[0]
    }

    fn center_hint(&self) -> f64 {
        0.5 * (self.xs[0] + self.xs.last().unwrap())
    }
}

/// Load a piecewise-linear density from two-column CSV with header `x,pdf`,
/// renormalizing by its trapezoidal integral.
pub fn grid_density_from_csv<R: BufRead>(reader: R) -> Result<DensityModel> {
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    let mut header_seen = false;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if !header_seen {
            let normalized: String = trimmed
                .to_ascii_lowercase()
                .chars()
                .filter(|c| !c.is_whitespace())
                .collect();
            if normalized != "x,pdf" {
                return Err(Error::Parse(format!(
                    "line {}: expected header 'x,pdf', got '{trimmed}'",
                    lineno + 1
                )));
            }
            header_seen = true;
            continue;
        }
        let mut fields = trimmed.split(',');
        let (Some(xs_str), Some(ys_str), None) = (fields.next(), fields.next(), fields.next())
        else {
            return Err(Error::Parse(format!(
                "line {}: expected exactly two comma-separated values, got '{trimmed}'",
                lineno + 1
            )));
        };
        let parse = |s: &str, what: &str| -> Result<f64> {
            s.trim().parse::<f64>().map_err(|_| {
                Error::Parse(format!("line {}: invalid {what} value '{s}'", lineno + 1))
            })
        };
        xs.push(parse(xs_str, "x")?);
        ys.push(parse(ys_str, "pdf")?);
    }
    if !header_seen {
        return Err(Error::Parse("empty file: expected header 'x,pdf'".into()));
    }
    if xs.len() < 2 {
        return Err(Error::Parse(format!(
            "grid density needs at least 2 rows, got {}",
            xs.len()
        )));
    }
    if xs.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Parse("x values must be strictly increasing".into()));
    }
    if ys.iter().any(|y| !y.is_finite() || *y < 0.0) {
        return Err(Error::Parse(
            "pdf values must be finite and nonnegative".into(),
        ));
    }
    let trapz: f64 = xs
        .windows(2)
        .zip(ys.windows(2))
        .map(|(xw, yw)| 0.5 * (xw[1] - xw[0]) * (yw[0] + yw[1]))
        .sum();
    if !(trapz > 0.0) {
        return Err(Error::Parse(
            "grid density has zero total mass; cannot normalize".into(),
        ));
    }
    for y in &mut ys {
        *y /= trapz;
    }

    // Split points: every interior node if few, a strided subset plus the
    // mode if many.
    let interior = 1..xs.len() - 1;
    let mut kinks: Vec<f64> = if xs.len() - 2 <= MAX_GRID_KINKS {
        xs[interior].to_vec()
    } else {
        let stride = (xs.len() - 2).div_ceil(MAX_GRID_KINKS);
        let mut v: Vec<f64> = xs[interior].iter().copied().step_by(stride).collect();
        let argmax = ys
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .expect("nonempty");
        if argmax > 0 && argmax < xs.len() - 1 {
            v.push(xs[argmax]);
        }
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    };
    kinks.retain(|k| k.is_finite());

    DensityModel::new(GridDensity { xs, ys, kinks })
}

/// [`grid_density_from_csv`] reading from a file path.
pub fn grid_density_from_csv_path(path: &std::path::Path) -> Result<DensityModel> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Parse(format!("cannot open {}: {e}", path.display())))?;
    grid_density_from_csv(std::io::BufReader::new(file))
}

// ---------------------------------------------------------------------------
// Affine wrappers.
// ---------------------------------------------------------------------------

struct Scaled {
    base: DensityModel,
    a: f64,
}

impl Density for Scaled {
    fn pdf(&self, x: f64) -> f64 {
        self.a * self.base.pdf(self.a * x)
    }

    fn pdf_derivative(&self, x: f64) -> f64 {
        self.a * self.a * self.base.pdf_derivative(self.a * x)
    }

    fn support(&self) -> Support {
        let s = self.base.support();
        Support {
            lower: s.lower / self.a,
            upper: s.upper / self.a,
        }
    }

    fn singular_exponents(&self) -> [Option<f64>; 2] {
        self.base.singular_exponents()
    }

    fn jumps(&self) -> Vec<Jump> {
        self.base
            .jumps()
            .into_iter()
            .map(|j| Jump {
                x: j.x / self.a,
                left: self.a * j.left,
                right: self.a * j.right,
            })
            .collect()
    }

    fn interior_kinks(&self) -> Vec<f64> {
        self.base
            .interior_kinks()
            .into_iter()
            .map(|k| k / self.a)
            .collect()
    }

    fn scale_hint(&self) -> f64 {
        self.base.scale_hint() / self.a
    }

    fn center_hint(&self) -> f64 {
        self.base.center_hint() / self.a
    }
}

struct Translated {
    base: DensityModel,
    b: f64,
}

impl Density for Translated {
    fn pdf(&self, x: f64) -> f64 {
        self.base.pdf(x - self.b)
    }

    fn pdf_derivative(&self, x: f64) -> f64 {
        self.base.pdf_derivative(x - self.b)
    }

    fn support(&self) -> Support {
        let s = self.base.support();
        Support {
            lower: s.lower + self.b,
            upper: s.upper + self.b,
        }
    }

    fn singular_exponents(&self) -> [Option<f64>; 2] {
        self.base.singular_exponents()
    }

    fn jumps(&self) -> Vec<Jump> {
        self.base
            .jumps()
            .into_iter()
            .map(|j| Jump {
                x: j.x + self.b,
                ..j
            })
            .collect()
    }

    fn interior_kinks(&self) -> Vec<f64> {
        self.base
            .interior_kinks()
            .into_iter()
            .map(|k| k + self.b)
            .collect()
    }

    fn scale_hint(&self) -> f64 {
        self.base.scale_hint()
    }

    fn center_hint(&self) -> f64 {
        self.base.center_hint() + self.b
    }
}

/// The rescaled density x ↦ a·ρ(a·x) for a > 0 (same total mass).
pub fn scaled(rho: &DensityModel, a: f64) -> Result<DensityModel> {
    if !a.is_finite() || !(a > 0.0) {
        return Err(Error::domain(format!("scale factor must be > 0, got {a}")));
    }
    DensityModel::new(Scaled {
        base: rho.clone(),
        a,
    })
}

/// The shifted density x ↦ ρ(x − b).
pub fn translated(rho: &DensityModel, b: f64) -> Result<DensityModel> {
    if !b.is_finite() {
        return Err(Error::domain(format!("shift must be finite, got {b}")));
    }
    DensityModel::new(Translated {
        base: rho.clone(),
        b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;
    use std::io::Cursor;

    #[test]
    fn blackbody_models_normalize_across_scales_and_dimensions() {
        for (d, theta) in [(3.0, 1.0), (4.0, 1.0), (5.5, 1000.0), (2.5, 1e-3), (10.0, 1.0)] {
            BlackbodySpec::new(d, theta).unwrap().model().unwrap();
        }
    }

    #[test]
    fn blackbody_mode_matches_root_oracle() {
        assert_relative_eq!(
            blackbody_mode(3.0).unwrap(),
            2.821_439_372_122_078_7,
            max_relative = 1e-10
        );
        assert_relative_eq!(
            blackbody_mode(5.0).unwrap(),
            4.965_114_231_744_277,
            max_relative = 1e-10
        );
    }

    #[test]
    fn blackbody_small_argument_power_law() {
        // ρ̃(x) → x^{d−1}/[Γ(d+1)ζ(d+1)] as x → 0.
        let d = 3.0;
        let norm = blackbody_ln_norm(d).unwrap().exp();
        let x = 1e-6;
        assert_relative_eq!(
            blackbody_pdf_reduced(x, d).unwrap(),
            x.powi(2) / norm,
            max_relative = 1e-5
        );
    }

    #[test]
    fn blackbody_dimensional_form_is_exactly_scaled_reduced_form() {
        let spec = BlackbodySpec::new(3.0, 250.0).unwrap();
        for nu in [1.0, 250.0, 500.0, 5000.0] {
            let full = blackbody_pdf(nu, &spec).unwrap();
            let reduced = blackbody_pdf_reduced(nu / 250.0, 3.0).unwrap() / 250.0;
            assert_eq!(full, reduced);
        }
        assert!(blackbody_pdf(0.0, &spec).is_err());
        assert!(blackbody_pdf(-1.0, &spec).is_err());
    }

    #[test]
    fn gen_gaussian_known_shapes() {
        let gauss = GenGaussianSpec::new(2.0, 1.0).unwrap();
        for x in [-1.3, 0.0, 0.4, 2.0] {
            assert_relative_eq!(
                gen_gaussian_pdf(x, &gauss).unwrap(),
                (-x * x).exp() / PI.sqrt(),
                max_relative = 1e-13
            );
        }
        let para = GenGaussianSpec::new(2.0, 2.0).unwrap();
        for x in [-0.9, 0.0, 0.5] {
            assert_relative_eq!(
                gen_gaussian_pdf(x, &para).unwrap(),
                0.75 * (1.0 - x * x),
                max_relative = 1e-13
            );
        }
        assert_eq!(gen_gaussian_pdf(1.5, &para).unwrap(), 0.0);
    }

    #[test]
    fn gen_gaussian_symmetry_and_support_rule() {
        for (p, lam) in [(1.0, 2.0), (2.0, 0.8), (2.0, 3.0), (3.0, 1.5), (f64::INFINITY, 2.0)] {
            let spec = GenGaussianSpec::new(p, lam).unwrap();
            for x in [0.3, 0.9, 7.0] {
                assert_eq!(
                    gen_gaussian_pdf(x, &spec).unwrap(),
                    gen_gaussian_pdf(-x, &spec).unwrap()
                );
            }
            let hw = spec.support_halfwidth();
            if lam > 1.0 {
                assert!(hw.is_finite());
                assert_eq!(gen_gaussian_pdf(hw * 1.0001, &spec).unwrap(), 0.0);
                assert!(gen_gaussian_pdf(hw * 0.9999, &spec).unwrap() > 0.0);
            } else {
                assert!(gen_gaussian_pdf(50.0, &spec).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn gen_gaussian_models_normalize() {
        for (p, lam) in [
            (1.0, 2.0),
            (1.5, 2.5),
            (2.0, 0.9),
            (2.0, 1.0),
            (2.0, 2.0),
            (3.0, 1.5),
            (5.0, 3.0),
            (f64::INFINITY, 2.0),
        ] {
            GenGaussianSpec::new(p, lam).unwrap().model().unwrap();
        }
    }

    #[test]
    fn gen_gaussian_derivative_matches_numeric() {
        let g = GenGaussian::build(GenGaussianSpec::new(3.0, 1.5).unwrap()).unwrap();
        for x in [-0.8, -0.2, 0.3, 0.9] {
            assert_relative_eq!(
                g.pdf_derivative(x),
                quadrature::numeric_derivative(|t| g.pdf(t), x),
                max_relative = 1e-6
            );
        }
    }

    #[test]
    fn gen_gaussian_rejects_invalid_parameters() {
        assert!(GenGaussianSpec::new(0.5, 2.0).is_err());
        assert!(GenGaussianSpec::new(2.0, -1.0).is_err()); // lambda == 1 - p
        assert!(GenGaussianSpec::new(2.0, f64::NAN).is_err());
    }

    #[test]
    fn step_density_evaluation_and_permutation() {
        let uniform = StepDensity::new(vec![0.0, 1.0], vec![1.0]).unwrap();
        for x in [0.0, 0.31, 0.999] {
            assert_eq!(step_pdf(x, &uniform), 1.0);
        }
        assert_eq!(step_pdf(-0.1, &uniform), 0.0);
        assert_eq!(step_pdf(1.0, &uniform), 0.0);
        assert_eq!(uniform.permute_heights(&[0]).unwrap(), uniform);

        let sd = StepDensity::new(
            vec![0.0, 1.0, 2.0, 3.0, 4.0],
            vec![0.1, 0.4, 0.3, 0.2],
        )
        .unwrap();
        for perm in [[3, 2, 1, 0], [1, 0, 3, 2], [2, 3, 0, 1]] {
            let permuted = sd.permute_heights(&perm).unwrap();
            permuted.model().unwrap(); // normalization invariant survives
        }
        assert_eq!(step_pdf(2.5, &sd), 0.3);
    }

    #[test]
    fn step_density_rejects_malformed_input() {
        assert!(StepDensity::new(vec![0.0, 1.0], vec![0.5]).is_err()); // mass 1/2
        assert!(StepDensity::new(vec![1.0, 0.0], vec![1.0]).is_err()); // decreasing
        assert!(StepDensity::new(vec![0.0, 1.0], vec![-1.0]).is_err());
        let sd = StepDensity::new(vec![0.0, 0.5, 2.0], vec![1.1, 0.3]).unwrap();
        // Unequal widths: rearranging heights breaks normalization.
        assert!(sd.permute_heights(&[1, 0]).is_err());
        assert!(sd.permute_heights(&[0, 0]).is_err()); // not a permutation
        assert!(sd.permute_heights(&[0]).is_err()); // wrong length
    }

    #[test]
    fn replication_preserves_mass_and_rejects_overlap() {
        let base = GenGaussianSpec::new(2.0, 2.0).unwrap().model().unwrap();
        let two = replicate(&base, 2, &[-10.0, 10.0]).unwrap();
        assert_eq!(two.jumps().len(), 0);
        // Each copy holds mass 1/2 around its center.
        let cfg = QuadConfig::default();
        let left = quadrature::integrate(|x| two.pdf(x), -12.0, 0.0, &cfg).unwrap();
        assert_relative_eq!(left.value, 0.5, max_relative = 1e-9);

        assert!(matches!(
            replicate(&base, 2, &[0.0, 0.5]),
            Err(Error::Composition(_))
        ));
        let gauss = GenGaussianSpec::new(2.0, 1.0).unwrap().model().unwrap();
        assert!(matches!(
            replicate(&gauss, 2, &[-10.0, 10.0]),
            Err(Error::Composition(_))
        ));
        assert!(replicate(&base, 2, &[0.0]).is_err());
    }

    #[test]
    fn single_replica_at_origin_is_identity() {
        let base = GenGaussianSpec::new(2.0, 2.0).unwrap().model().unwrap();
        let one = replicate(&base, 1, &[0.0]).unwrap();
        for x in [-0.9, -0.2, 0.0, 0.7] {
            assert_eq!(one.pdf(x), base.pdf(x));
            assert_eq!(one.pdf_derivative(x), base.pdf_derivative(x));
        }
    }

    #[test]
    fn grid_density_loads_and_interpolates() {
        let csv = "x,pdf\n0,0\n0.5,0.5\n1,1\n1.5,0.5\n2,0\n";
        let m = grid_density_from_csv(Cursor::new(csv)).unwrap();
        assert_relative_eq!(m.pdf(0.75), 0.75, max_relative = 1e-12);
        assert_relative_eq!(m.pdf(1.0), 1.0, max_relative = 1e-12);
        assert_eq!(m.pdf(-0.5), 0.0);
        assert_eq!(m.pdf(2.5), 0.0);
        assert_relative_eq!(m.pdf_derivative(0.25), 1.0, max_relative = 1e-12);
        // Unnormalized input gets trapezoid-rescaled.
        let csv2 = "x,pdf\n0,0\n1,3\n2,0\n";
        let m2 = grid_density_from_csv(Cursor::new(csv2)).unwrap();
        assert_relative_eq!(m2.pdf(1.0), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn grid_density_rejects_malformed_csv() {
        for bad in [
            "a,b\n0,0\n1,1\n",
            "x,pdf\n0,0\n1,2,3\n",
            "x,pdf\n0,zero\n1,1\n",
            "x,pdf\n0,1\n",
            "x,pdf\n1,1\n0,1\n",
            "x,pdf\n0,-1\n1,1\n",
            "x,pdf\n0,0\n1,0\n",
            "",
        ] {
            assert!(
                matches!(grid_density_from_csv(Cursor::new(bad)), Err(Error::Parse(_))),
                "expected parse error for {bad:?}"
            );
        }
    }

    #[test]
    fn affine_wrappers_evaluate_pointwise() {
        let base = GenGaussianSpec::new(2.0, 1.0).unwrap().model().unwrap();
        let half = scaled(&base, 0.5).unwrap();
        assert_relative_eq!(half.pdf(2.0), 0.5 * base.pdf(1.0), max_relative = 1e-14);
        let moved = translated(&base, 3.0).unwrap();
        assert_relative_eq!(moved.pdf(3.4), base.pdf(0.4), max_relative = 1e-14);
        assert!(scaled(&base, 0.0).is_err());
        assert!(translated(&base, f64::INFINITY).is_err());
    }

    #[test]
    fn custom_density_uses_numeric_derivative_fallback() {
        struct Cosine;
        impl Density for Cosine {
            fn pdf(&self, x: f64) -> f64 {
                if x.abs() <= PI / 2.0 {
                    0.5 * x.cos()
                } else {
                    0.0
                }
            }
            fn support(&self) -> Support {
                Support {
                    lower: -PI / 2.0,
                    upper: PI / 2.0,
                }
            }
            fn singular_exponents(&self) -> [Option<f64>; 2] {
                [Some(1.0), Some(1.0)]
            }
            fn interior_kinks(&self) -> Vec<f64> {
                vec![0.0]
            }
        }
        let m = DensityModel::new(Cosine).unwrap();
        assert_relative_eq!(m.pdf_derivative(0.5), -0.5 * 0.5f64.sin(), max_relative = 1e-6);
    }

    #[test]
    fn unnormalized_custom_density_is_rejected() {
        struct Half;
        impl Density for Half {
            fn pdf(&self, x: f64) -> f64 {
                if (0.0..=1.0).contains(&x) {
                    0.5
                } else {
                    0.0
                }
            }
            fn support(&self) -> Support {
                Support {
                    lower: 0.0,
                    upper: 1.0,
                }
            }
        }
        assert!(matches!(DensityModel::new(Half), Err(Error::Domain(_))));
    }
}
