//! Objective functions over `λ` for each parameter-choice rule, and the
//! uniform driver that minimizes them and evaluates the resulting solution.
//!
//! Notation: `rf_k(λ) = λ²/(γ_k²+λ²)` and `ff_k(λ) = γ_k²/(γ_k²+λ²)` for the
//! generalized block `k = r+1..r+q` (1-based). All objectives are built
//! from cached spectral quantities and cost `O(m)` per evaluation, except
//! the series-splitting MSE objective, which costs `O(k0²)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gsvd::GsvdFactors;
use crate::minimize::{minimize_global, GridSpec, MinimumKind};
use crate::picard::{PicardEstimate, PicardMethod};
use crate::tikhonov::{filter_factor, residual_factor, solve, SpectralData};

/// A scalar function of `λ` to be minimized.
pub trait Objective {
    fn value(&self, lambda: f64) -> f64;
}

fn check_k0(s: &SpectralData<'_>, k0: usize) -> Result<()> {
    let (lo, hi) = (s.r() + 1, s.r() + s.q());
    if k0 < lo || k0 > hi {
        return Err(Error::BadK0 { k0, lo, hi });
    }
    Ok(())
}

fn check_s2(s2: f64) -> Result<()> {
    if !(s2 >= 0.0) || !s2.is_finite() {
        return Err(Error::Config(format!("noise variance must be finite and ≥ 0, got {s2}")));
    }
    Ok(())
}

/// `(γ_k, β_k)` for the generalized block, as owned vectors.
fn block(s: &SpectralData<'_>) -> (Vec<f64>, Vec<f64>) {
    s.generalized().unzip()
}

/// Series-splitting estimate of the predictive error,
/// `g(λ) = ρ(λ) − 2Ĉ(λ)` with
/// `Ĉ(λ) = s² Σ_{k<k0} rf_k + Σ_{k≥k0} rf_k β_k² + Σ_{k>r+q} β_k²`.
#[derive(Debug, Clone)]
pub struct SsPmse {
    gamma: Vec<f64>,
    beta: Vec<f64>,
    tail: f64,
    /// Number of generalized indices before `k0`.
    split: usize,
    s2: f64,
}

pub fn obj_ss_pmse(s: &SpectralData<'_>, k0: usize, s2: f64) -> Result<SsPmse> {
    check_k0(s, k0)?;
    check_s2(s2)?;
    let (gamma, beta) = block(s);
    Ok(SsPmse { gamma, beta, tail: s.tail_energy(), split: k0 - s.r() - 1, s2 })
}

impl SsPmse {
    /// The approximation `Ĉ(λ)` of the noise coupling term.
    pub fn coupling(&self, lambda: f64) -> f64 {
        let mut c = self.tail;
        for (i, (&g, &b)) in self.gamma.iter().zip(&self.beta).enumerate() {
            let w = residual_factor(g, lambda);
            c += if i < self.split { self.s2 * w } else { w * b * b };
        }
        c
    }

    pub fn residual(&self, lambda: f64) -> f64 {
        self.gamma
            .iter()
            .zip(&self.beta)
            .map(|(&g, &b)| {
                let w = residual_factor(g, lambda);
                w * w * b * b
            })
            .sum::<f64>()
            + self.tail
    }
}

impl Objective for SsPmse {
    fn value(&self, lambda: f64) -> f64 {
        let mut v = -self.tail;
        for (i, (&g, &b)) in self.gamma.iter().zip(&self.beta).enumerate() {
            let w = residual_factor(g, lambda);
            let c = if i < self.split { self.s2 * w } else { w * b * b };
            v += w * w * b * b - 2.0 * c;
        }
        v
    }
}

/// Series-splitting estimate of the solution error, truncated to indices
/// below `k0`: `ĝ(λ) = ρ̂(λ) − 2D̂(λ)` with
/// `ρ̂ = Σ_{j,k<k0} (y_jᵀy_k)/(σ_jσ_k) · rf_j rf_k β_j β_k` and
/// `D̂ = s² Σ_{k<k0} ‖y_k‖²/σ_k² · rf_k`.
///
/// Indices `k ≤ r` carry no `λ` dependence in `x(λ)` and contribute nothing.
#[derive(Debug, Clone)]
pub struct SsMse {
    gamma: Vec<f64>,
    /// `β_k` for the retained indices.
    beta: Vec<f64>,
    /// `(y_jᵀy_k)/(σ_jσ_k)` for the retained indices.
    gram: DMatrix<f64>,
    s2: f64,
}

pub fn obj_ss_mse(f: &GsvdFactors, s: &SpectralData<'_>, k0: usize, s2: f64) -> Result<SsMse> {
    check_k0(s, k0)?;
    check_s2(s2)?;
    let r = f.r();
    let kept = k0 - r - 1;
    let ys = f.y().columns(r, kept);
    let sigma = &f.sigma().as_slice()[..kept];
    let mut gram = ys.tr_mul(&ys);
    for j in 0..kept {
        for k in 0..kept {
            gram[(j, k)] /= sigma[j] * sigma[k];
        }
    }
    let gamma = f.gamma().as_slice()[..kept].to_vec();
    let beta = s.beta().as_slice()[r..r + kept].to_vec();
    Ok(SsMse { gamma, beta, gram, s2 })
}

impl SsMse {
    pub fn residual(&self, lambda: f64) -> f64 {
        let c = DVector::from_iterator(
            self.gamma.len(),
            self.gamma.iter().zip(&self.beta).map(|(&g, &b)| residual_factor(g, lambda) * b),
        );
        c.dot(&(&self.gram * &c))
    }

    pub fn coupling(&self, lambda: f64) -> f64 {
        self.s2
            * self
                .gamma
                .iter()
                .enumerate()
                .map(|(i, &g)| self.gram[(i, i)] * residual_factor(g, lambda))
                .sum::<f64>()
    }
}

impl Objective for SsMse {
    fn value(&self, lambda: f64) -> f64 {
        self.residual(lambda) - 2.0 * self.coupling(lambda)
    }
}

/// Largest magnitude among the terms of the untruncated double sum
/// `Σ_{j,k=r+1}^{r+q} (y_jᵀy_k)/(σ_jσ_k) · rf_j rf_k β_j β_k`, divided by the
/// largest magnitude among the terms with `j, k < k0`.
pub fn untruncated_term_ratio(f: &GsvdFactors, s: &SpectralData<'_>, k0: usize, lambda: f64) -> Result<f64> {
    check_k0(s, k0)?;
    let (r, q) = (f.r(), f.q());
    let ys = f.y().columns(r, q);
    let gram = ys.tr_mul(&ys);
    let c: Vec<f64> = (0..q)
        .map(|i| residual_factor(f.gamma()[i], lambda) * s.beta()[r + i] / f.sigma()[i])
        .collect();
    let kept = k0 - r - 1;
    let (mut all, mut head) = (0.0f64, 0.0f64);
    for j in 0..q {
        for k in 0..q {
            let t = (gram[(j, k)] * c[j] * c[k]).abs();
            all = all.max(t);
            if j < kept && k < kept {
                head = head.max(t);
            }
        }
    }
    Ok(all / head)
}

/// Distance to the filtered data `b̂ = Σ_{k<k0} β_k u_k`:
/// `f̂(λ) = Σ_{r<k<k0} rf_k² β_k² + Σ_{k0≤k≤r+q} ff_k² β_k²`.
#[derive(Debug, Clone)]
pub struct DataFiltering {
    gamma: Vec<f64>,
    beta: Vec<f64>,
    split: usize,
}

pub fn obj_df(s: &SpectralData<'_>, k0: usize) -> Result<DataFiltering> {
    check_k0(s, k0)?;
    let (gamma, beta) = block(s);
    Ok(DataFiltering { gamma, beta, split: k0 - s.r() - 1 })
}

impl Objective for DataFiltering {
    fn value(&self, lambda: f64) -> f64 {
        self.gamma
            .iter()
            .zip(&self.beta)
            .enumerate()
            .map(|(i, (&g, &b))| {
                let w = if i < self.split { residual_factor(g, lambda) } else { filter_factor(g, lambda) };
                w * w * b * b
            })
            .sum()
    }
}

/// Residual degrees of freedom `T(λ) = m − rank(A) + Σ rf_k` and the
/// squared residual, shared by SURE and GCV.
#[derive(Debug, Clone)]
pub struct Dof {
    gamma: Vec<f64>,
    beta: Vec<f64>,
    tail: f64,
    free: usize,
}

impl Dof {
    fn new(s: &SpectralData<'_>) -> Self {
        let (gamma, beta) = block(s);
        let free = s.m() - s.factors().rank_a();
        Dof { gamma, beta, tail: s.tail_energy(), free }
    }

    pub fn t(&self, lambda: f64) -> f64 {
        self.free as f64 + self.gamma.iter().map(|&g| residual_factor(g, lambda)).sum::<f64>()
    }

    pub fn rho(&self, lambda: f64) -> f64 {
        self.gamma
            .iter()
            .zip(&self.beta)
            .map(|(&g, &b)| {
                let w = residual_factor(g, lambda);
                w * w * b * b
            })
            .sum::<f64>()
            + self.tail
    }
}

/// `T(λ)` on its own.
pub fn residual_dof(s: &SpectralData<'_>, lambda: f64) -> f64 {
    Dof::new(s).t(lambda)
}

/// `SURE(λ) = ρ(λ) + m·s² − 2s²·T(λ)`.
#[derive(Debug, Clone)]
pub struct Sure {
    dof: Dof,
    m: usize,
    s2: f64,
}

pub fn obj_sure(s: &SpectralData<'_>, s2: f64) -> Result<Sure> {
    check_s2(s2)?;
    Ok(Sure { dof: Dof::new(s), m: s.m(), s2 })
}

impl Objective for Sure {
    fn value(&self, lambda: f64) -> f64 {
        self.dof.rho(lambda) + self.m as f64 * self.s2 - 2.0 * self.s2 * self.dof.t(lambda)
    }
}

/// `G(λ) = ρ(λ)/T(λ)²`.
#[derive(Debug, Clone)]
pub struct Gcv {
    dof: Dof,
}

pub fn obj_gcv(s: &SpectralData<'_>) -> Gcv {
    Gcv { dof: Dof::new(s) }
}

impl Gcv {
    pub fn try_value(&self, lambda: f64) -> Result<f64> {
        let t = self.dof.t(lambda);
        if t <= 0.0 {
            return Err(Error::DegenerateT { lambda });
        }
        Ok(self.dof.rho(lambda) / (t * t))
    }

    pub fn dof(&self) -> &Dof {
        &self.dof
    }
}

impl Objective for Gcv {
    fn value(&self, lambda: f64) -> f64 {
        self.try_value(lambda).unwrap_or(f64::INFINITY)
    }
}

/// `MSD(λ) = ‖x_true − x(λ)‖²/‖x_true‖²`.
#[derive(Debug, Clone)]
pub struct Msd<'a> {
    factors: &'a GsvdFactors,
    spectral: SpectralData<'a>,
    x_true: DVector<f64>,
    norm2: f64,
}

pub fn obj_msd<'a>(f: &'a GsvdFactors, s: &SpectralData<'a>, x_true: &DVector<f64>) -> Result<Msd<'a>> {
    if x_true.len() != f.n() {
        return Err(Error::DimensionMismatch(format!("x_true has length {}, expected {}", x_true.len(), f.n())));
    }
    Ok(Msd { factors: f, spectral: s.clone(), x_true: x_true.clone(), norm2: x_true.norm_squared() })
}

impl Objective for Msd<'_> {
    fn value(&self, lambda: f64) -> f64 {
        let x = solve(self.factors, &self.spectral, lambda);
        (&self.x_true - x).norm_squared() / self.norm2
    }
}

/// `‖x_true − x‖²/‖x_true‖²`.
pub fn msd(x_true: &DVector<f64>, x: &DVector<f64>) -> f64 {
    (x_true - x).norm_squared() / x_true.norm_squared()
}

/// Parameter-choice rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "SS_P3")]
    SsP3,
    #[serde(rename = "SS_P2")]
    SsP2,
    #[serde(rename = "SS_PL")]
    SsPl,
    #[serde(rename = "SS_M3")]
    SsM3,
    #[serde(rename = "SS_M2")]
    SsM2,
    #[serde(rename = "SS_ML")]
    SsMl,
    #[serde(rename = "DF")]
    Df,
    #[serde(rename = "GCV")]
    Gcv,
    #[serde(rename = "SURE")]
    Sure,
    #[serde(rename = "OPT")]
    Opt,
}

impl Method {
    pub const ALL: [Method; 10] = [
        Method::SsP3,
        Method::SsP2,
        Method::SsPl,
        Method::SsM3,
        Method::SsM2,
        Method::SsMl,
        Method::Df,
        Method::Gcv,
        Method::Sure,
        Method::Opt,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Method::SsP3 => "SS_P3",
            Method::SsP2 => "SS_P2",
            Method::SsPl => "SS_PL",
            Method::SsM3 => "SS_M3",
            Method::SsM2 => "SS_M2",
            Method::SsMl => "SS_ML",
            Method::Df => "DF",
            Method::Gcv => "GCV",
            Method::Sure => "SURE",
            Method::Opt => "OPT",
        }
    }

    /// Picard estimator feeding this rule, if any.
    pub fn picard_source(&self) -> Option<PicardMethod> {
        match self {
            Method::SsP3 | Method::SsM3 | Method::Df | Method::Sure => Some(PicardMethod::VSequence),
            Method::SsP2 | Method::SsM2 => Some(PicardMethod::LillieforsForward),
            Method::SsPl | Method::SsMl => Some(PicardMethod::LillieforsLegacy),
            Method::Gcv | Method::Opt => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .iter()
            .find(|m| m.label().eq_ignore_ascii_case(s))
            .copied()
            .ok_or_else(|| Error::Config(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub method: Method,
    pub lambda: f64,
    pub x: DVector<f64>,
    /// `None` when no reference solution was supplied.
    pub msd: Option<f64>,
    pub k0_used: Option<usize>,
    pub s2_used: Option<f64>,
    /// The Picard estimate reported noiseless data.
    pub noiseless: bool,
    pub kind: MinimumKind,
    pub objective_value: f64,
    pub objective_trace: Vec<(f64, f64)>,
}

/// Inputs shared by every rule for one data realization.
#[derive(Debug, Clone, Copy)]
pub struct SelectionInput<'a> {
    pub factors: &'a GsvdFactors,
    pub spectral: &'a SpectralData<'a>,
    pub x_true: Option<&'a DVector<f64>>,
    pub grid: &'a GridSpec,
}

/// Builds the objective of `method`, minimizes it and evaluates `x(λ)`.
/// Rules other than GCV and OPT need the Picard estimate from their source
/// estimator; OPT needs `x_true`.
pub fn select(method: Method, input: &SelectionInput<'_>, picard: Option<&PicardEstimate>) -> Result<SelectionResult> {
    let s = input.spectral;
    let need_picard = || {
        picard.ok_or_else(|| Error::Config(format!("{method} needs a Picard estimate")))
    };
    let (minimum, used) = match method {
        Method::SsP3 | Method::SsP2 | Method::SsPl => {
            let p = need_picard()?;
            let o = obj_ss_pmse(s, p.k0, p.s2)?;
            (minimize_global(|l| o.value(l), input.grid), Some(p))
        }
        Method::SsM3 | Method::SsM2 | Method::SsMl => {
            let p = need_picard()?;
            let o = obj_ss_mse(input.factors, s, p.k0, p.s2)?;
            (minimize_global(|l| o.value(l), input.grid), Some(p))
        }
        Method::Df => {
            let p = need_picard()?;
            let o = obj_df(s, p.k0)?;
            (minimize_global(|l| o.value(l), input.grid), Some(p))
        }
        Method::Sure => {
            let p = need_picard()?;
            let o = obj_sure(s, p.s2)?;
            (minimize_global(|l| o.value(l), input.grid), Some(p))
        }
        Method::Gcv => {
            let o = obj_gcv(s);
            o.try_value(input.grid.lo)?;
            (minimize_global(|l| o.value(l), input.grid), None)
        }
        Method::Opt => {
            let x_true = input.x_true.ok_or_else(|| Error::Config("OPT needs x_true".into()))?;
            let o = obj_msd(input.factors, s, x_true)?;
            (minimize_global(|l| o.value(l), input.grid), None)
        }
    };
    let minimum = minimum?;
    let x = solve(input.factors, s, minimum.lambda);
    Ok(SelectionResult {
        method,
        lambda: minimum.lambda,
        msd: input.x_true.map(|xt| msd(xt, &x)),
        x,
        k0_used: used.map(|p| p.k0),
        s2_used: used.map(|p| p.s2),
        noiseless: used.is_some_and(|p| p.noiseless),
        kind: minimum.kind,
        objective_value: minimum.value,
        objective_trace: minimum.trace,
    })
}

/// The rule that minimizes the true solution error.
pub fn oracle_optimal(
    f: &GsvdFactors,
    s: &SpectralData<'_>,
    x_true: &DVector<f64>,
    grid: &GridSpec,
) -> Result<SelectionResult> {
    let input = SelectionInput { factors: f, spectral: s, x_true: Some(x_true), grid };
    select(Method::Opt, &input, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gsvd::compute_gsvd;
    use crate::operators::{add_noise, ProblemKind, Regularizer};
    use crate::picard::{default_step, estimate_v, DEFAULT_EPS};
    use crate::tikhonov::{fourier_coeffs, predicted_data, residual_norm_sq, solve_direct};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lambdas() -> Vec<f64> {
        (0..25).map(|i| 10f64.powf(-12.0 + 0.7 * i as f64)).collect()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    struct Case {
        p: crate::operators::ProblemInstance,
        f: GsvdFactors,
        b: DVector<f64>,
        noise: DVector<f64>,
    }

    fn case(kind: ProblemKind, n: usize, reg: Option<Regularizer>, alpha: f64, seed: u64) -> Case {
        let mut p = kind.generate(n).unwrap();
        if let Some(reg) = reg {
            p = p.with_regularizer(reg).unwrap();
        }
        let f = compute_gsvd(&p.a, &p.l).unwrap();
        let nz = add_noise(&p, alpha, seed).unwrap();
        Case { p, f, b: nz.b, noise: nz.noise }
    }

    #[test]
    fn method_labels_roundtrip() {
        for m in Method::ALL {
            assert_eq!(m.label().parse::<Method>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.label()));
        }
        assert!("SS_X".parse::<Method>().is_err());
    }

    #[test]
    fn bad_k0_rejected() {
        let c = case(ProblemKind::Gravity, 40, None, 1e-2, 1);
        let s = fourier_coeffs(&c.f, &c.b).unwrap();
        let (r, q) = (c.f.r(), c.f.q());
        assert!(matches!(obj_ss_pmse(&s, r, 1.0), Err(Error::BadK0 { .. })));
        assert!(matches!(obj_df(&s, r + q + 1), Err(Error::BadK0 { .. })));
        assert!(matches!(obj_ss_mse(&c.f, &s, 0, 1.0), Err(Error::BadK0 { .. })));
        assert!(obj_ss_pmse(&s, r + 1, -1.0).is_err());
    }

    #[test]
    fn pmse_identity_with_true_noise() {
        let c = case(ProblemKind::Heat, 60, None, 1e-2, 4);
        let s = fourier_coeffs(&c.f, &c.b).unwrap();
        let nu = c.f.u().tr_mul(&c.noise);
        let (r, q) = (c.f.r(), c.f.q());
        for l in lambdas() {
            let mut cc = 0.0;
            for k in r..c.f.m() {
                let w = if k < r + q { residual_factor(c.f.gamma()[k - r], l) } else { 1.0 };
                cc += w * s.beta()[k] * nu[k];
            }
            let lhs = residual_norm_sq(&s, l) - 2.0 * cc + c.noise.norm_squared();
            let ax = &c.p.a * solve(&c.f, &s, l);
            let rhs = (&c.p.b_true - ax).norm_squared();
            assert!(rel(lhs, rhs) < 1e-8, "λ = {l}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn ss_pmse_with_k0_at_lower_bound_ignores_s2() {
        let c = case(ProblemKind::Gravity, 40, None, 1e-2, 2);
        let s = fourier_coeffs(&c.f, &c.b).unwrap();
        let k0 = c.f.r() + 1;
        let a = obj_ss_pmse(&s, k0, 0.0).unwrap();
        let b = obj_ss_pmse(&s, k0, 123.0).unwrap();
        for l in lambdas() {
            assert_eq!(a.value(l), b.value(l));
            assert!(rel(a.value(l), a.residual(l) - 2.0 * a.coupling(l)) < 1e-12);
        }
    }

    #[test]
    fn ss_mse_vanishes_at_zero() {
        let c = case(ProblemKind::Phillips, 40, None, 1e-2, 3);
        let s = fourier_coeffs(&c.f, &c.b).unwrap();
        let o = obj_ss_mse(&c.f, &s, c.f.r() + 10, 0.3).unwrap();
        assert_eq!(o.value(0.0), 0.0);
    }

    /// Reference for `L = I`: with the SVD `A = Σ s̃_k ũ_k ṽ_kᵀ` the
    /// truncated MSE estimate reads
    /// `Σ_{k<k0} [λ⁴/(s̃_k²+λ²)² β̃_k²/s̃_k² − 2s² λ²/(s̃_k²+λ²)/s̃_k²]`.
    #[test]
    fn ss_mse_identity_regularizer_matches_svd_formula() {
        let c = case(ProblemKind::Heat, 60, None, 1e-3, 5);
        let s = fourier_coeffs(&c.f, &c.b).unwrap();
        let svd = c.p.a.clone().svd(true, false);
        let mut pairs: Vec<(f64, f64)> = svd
            .singular_values
            .iter()
            .zip(svd.u.unwrap().column_iter())
            .map(|(&sv, u)| (sv, u.dot(&c.b)))
            .collect();
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let (k0, s2) = (12, 2e-4);
        let o = obj_ss_mse(&c.f, &s, k0, s2).unwrap();
        for l in lambdas() {
            let (mut reference, mut scale) = (0.0, 0.0);
            for &(sv, b) in &pairs[..k0 - 1] {
                let d = sv * sv + l * l;
                let rho = l.powi(4) / (d * d) * b * b / (sv * sv);
                let dd = 2.0 * s2 * l * l / d / (sv * sv);
                reference += rho - dd;
                scale += rho + dd;
            }
            let got = o.value(l);
            assert!((got - reference).abs() <= 1e-8 * scale, "λ = {l}: {got} vs {reference}");
        }
    }

    #[test]
    fn untruncated_sum_is_dominated_by_tail() {
        let c = case(ProblemKind::Gravity, 100, Some(Regularizer::D1), 1e-2, 6);
        let s = fourier_coeffs(&c.f, &c.b).unwrap();
        let est = estimate_v(s.beta().as_slice(), c.f.r(), c.f.q(), DEFAULT_EPS, default_step(100)).unwrap();
        let ratio = untruncated_term_ratio(&c.f, &s, est.k0, 1.0).unwrap();
        assert!(ratio > 1e12, "ratio {ratio:e}");
    }

    #[test]
    fn df_matches_filtered_data_distance() {
        let c = case(ProblemKind::Phillips, 48, Some(Regularizer::D2), 1e-3, 7);
        let s = fourier_coeffs(&c.f, &c.b).unwrap();
        let k0 = c.f.r() + 9;
        let b_hat = c.f.u().columns(0, k0 - 1) * s.beta().rows(0, k0 - 1);
        let o = obj_df(&s, k0).unwrap();
        for l in lambdas() {
            let direct = (&b_hat - predicted_data(&c.f, &s, l)).norm_squared();
            assert!(rel(o.value(l), direct) < 1e-10, "λ = {l}");
        }
        let head: f64 = s.beta().rows(c.f.r(), k0 - 1 - c.f.r()).norm_squared();
        assert!(rel(o.value(1e150), head) < 1e-12);
        let tail: f64 = s.beta().rows(k0 - 1, c.f.rank_a() - k0 + 1).norm_squared();
        assert!(rel(o.value(0.0), tail) < 1e-12);
    }

    #[test]
    fn dof_matches_dense_trace() {
        let mut p = ProblemKind::Phillips.generate(48).unwrap();
        for reg in [Regularizer::D2, Regularizer::Identity] {
            p = p.with_regularizer(reg).unwrap();
            let f = compute_gsvd(&p.a, &p.l).unwrap();
            let s = fourier_coeffs(&f, &p.b_true).unwrap();
            for l in [1e-3, 1e-2, 0.1, 1.0] {
                // H = A (AᵀA + λ²LᵀL)⁻¹ Aᵀ column by column through the dense solver
                let m = p.m();
                let mut trace = 0.0;
                for i in 0..m {
                    let e = DVector::from_fn(m, |k, _| if k == i { 1.0 } else { 0.0 });
                    let x = solve_direct(&p.a, &p.l, &e, l).unwrap();
                    trace += (&p.a * x)[i];
                }
                let t_dense = m as f64 - trace;
                assert!(rel(residual_dof(&s, l), t_dense) < 1e-8, "{reg} λ = {l}");
            }
        }
    }

    #[test]
    fn dof_limits() {
        let c = case(ProblemKind::Gravity, 40, Some(Regularizer::D1), 1e-2, 8);
        let s = fourier_coeffs(&c.f, &c.b).unwrap();
        let free = (c.f.m() - c.f.rank_a()) as f64;
        assert_eq!(residual_dof(&s, 0.0), free);
        assert!(rel(residual_dof(&s, 1e200), (c.f.m() - c.f.r()) as f64) < 1e-12);
        assert!(rel(residual_dof(&s, 1e100), (c.f.m() - c.f.r()) as f64) < 1e-12);
    }

    #[test]
    fn gcv_scales_with_data_and_rejects_zero_dof() {
        let c = case(ProblemKind::Phillips, 40, None, 1e-2, 9);
        let s = fourier_coeffs(&c.f, &c.b).unwrap();
        let scaled = fourier_coeffs(&c.f, &(&c.b * 3.0)).unwrap();
        let (g, h) = (obj_gcv(&s), obj_gcv(&scaled));
        for l in lambdas() {
            assert!(rel(h.value(l), 9.0 * g.value(l)) < 1e-12);
        }
        assert_eq!(c.f.rank_a(), c.f.m());
        assert!(matches!(g.try_value(0.0), Err(Error::DegenerateT { .. })));
    }

    #[test]
    fn argmins_invariant_under_scaling() {
        let c = case(ProblemKind::Gravity, 60, Some(Regularizer::D1), 1e-3, 10);
        let grid = GridSpec::default();
        let s = fourier_coeffs(&c.f, &c.b).unwrap();
        let scaled_b = &c.b * 7.0;
        let s7 = fourier_coeffs(&c.f, &scaled_b).unwrap();
        let p = estimate_v(s.beta().as_slice(), c.f.r(), c.f.q(), DEFAULT_EPS, default_step(60)).unwrap();
        let p7 = estimate_v(s7.beta().as_slice(), c.f.r(), c.f.q(), DEFAULT_EPS, default_step(60)).unwrap();
        assert_eq!(p.k0, p7.k0);
        for method in [Method::SsP3, Method::SsM3, Method::Df, Method::Sure, Method::Gcv] {
            let a = select(method, &SelectionInput { factors: &c.f, spectral: &s, x_true: None, grid: &grid }, Some(&p))
                .unwrap();
            let b = select(method, &SelectionInput { factors: &c.f, spectral: &s7, x_true: None, grid: &grid }, Some(&p7))
                .unwrap();
            assert!((a.lambda.log10() - b.lambda.log10()).abs() < 1e-6, "{method}: {} vs {}", a.lambda, b.lambda);
        }
    }

    #[test]
    fn oracle_dominates_and_reports_consistent_msd() {
        let c = case(ProblemKind::Heat, 60, None, 1e-2, 11);
        let grid = GridSpec::default();
        let s = fourier_coeffs(&c.f, &c.b).unwrap();
        let input = SelectionInput { factors: &c.f, spectral: &s, x_true: Some(&c.p.x_true), grid: &grid };
        let p = estimate_v(s.beta().as_slice(), c.f.r(), c.f.q(), DEFAULT_EPS, default_step(60)).unwrap();
        let opt = select(Method::Opt, &input, None).unwrap();
        assert!(opt.lambda > grid.lo && opt.lambda < grid.hi);
        for m in [Method::SsP3, Method::SsM3, Method::Df, Method::Sure, Method::Gcv] {
            let r = select(m, &input, Some(&p)).unwrap();
            assert!(opt.msd.unwrap() <= r.msd.unwrap() * (1.0 + 1e-12), "{m}");
            let recomputed = (&c.p.x_true - &r.x).norm_squared() / c.p.x_true.norm_squared();
            assert!(rel(r.msd.unwrap(), recomputed) < 1e-12);
            assert!(r.lambda >= grid.lo && r.lambda <= grid.hi);
        }
    }

    #[test]
    fn oracle_noiseless_full_rank_goes_to_zero() {
        let p = ProblemKind::Phillips.generate(32).unwrap();
        let f = compute_gsvd(&p.a, &p.l).unwrap();
        let s = fourier_coeffs(&f, &p.b_true).unwrap();
        let o = obj_msd(&f, &s, &p.x_true).unwrap();
        assert!(o.value(1e-12) < 1e-8);
        let r = oracle_optimal(&f, &s, &p.x_true, &GridSpec::default()).unwrap();
        assert!(r.msd.unwrap() < 1e-8);
    }

    #[test]
    fn missing_inputs_are_config_errors() {
        let c = case(ProblemKind::Gravity, 30, None, 1e-2, 12);
        let s = fourier_coeffs(&c.f, &c.b).unwrap();
        let grid = GridSpec::default();
        let input = SelectionInput { factors: &c.f, spectral: &s, x_true: None, grid: &grid };
        assert!(matches!(select(Method::SsP3, &input, None), Err(Error::Config(_))));
        assert!(matches!(select(Method::Opt, &input, None), Err(Error::Config(_))));
        let r = select(Method::Gcv, &input, None).unwrap();
        assert!(r.msd.is_none() && r.k0_used.is_none());
    }

    #[test]
    fn sure_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let c = case(ProblemKind::Gravity, 30, Some(Regularizer::D1), 1e-2, 13);
        let s = fourier_coeffs(&c.f, &c.b).unwrap();
        let s2 = rng.random::<f64>();
        let o = obj_sure(&s, s2).unwrap();
        let m = c.f.m() as f64;
        let free = (c.f.m() - c.f.rank_a()) as f64;
        assert!(rel(o.value(0.0), residual_norm_sq(&s, 0.0) + m * s2 - 2.0 * s2 * free) < 1e-12);
    }
}
