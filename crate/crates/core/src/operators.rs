//! Test problems, regularization matrices and calibrated Gaussian noise.
//!
//! The one-dimensional problems follow the standard Regularization Tools
//! discretizations (`gravity`, `phillips`, `heat`). The two-dimensional
//! problem is a separable Gaussian blur of a synthetic piecewise-constant
//! phantom.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A discrete ill-posed problem with known solution.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub name: String,
    pub a: DMatrix<f64>,
    pub l: DMatrix<f64>,
    pub x_true: DVector<f64>,
    pub b_true: DVector<f64>,
}

impl ProblemInstance {
    fn new(name: impl Into<String>, a: DMatrix<f64>, l: DMatrix<f64>, x_true: DVector<f64>) -> Self {
        let b_true = &a * &x_true;
        Self { name: name.into(), a, l, x_true, b_true }
    }

    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    pub fn n(&self) -> usize {
        self.a.ncols()
    }

    /// Replaces `L`.
    pub fn with_regularizer(mut self, reg: Regularizer) -> Result<Self> {
        self.l = reg.matrix(self.n())?;
        Ok(self)
    }

    /// `‖A·x_true − b_true‖ / ‖b_true‖`.
    pub fn consistency_residual(&self) -> f64 {
        let nb = self.b_true.norm();
        let r = (&self.a * &self.x_true - &self.b_true).norm();
        if nb > 0.0 {
            r / nb
        } else {
            r
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&ProblemDump::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let d: ProblemDump = serde_json::from_str(s)?;
        d.try_into()
    }
}

/// Dense matrix block: shape header plus row-major values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixBlock {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl From<&DMatrix<f64>> for MatrixBlock {
    fn from(m: &DMatrix<f64>) -> Self {
        let data = (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)])).collect();
        Self { rows: m.nrows(), cols: m.ncols(), data }
    }
}

impl TryFrom<MatrixBlock> for DMatrix<f64> {
    type Error = Error;

    fn try_from(b: MatrixBlock) -> Result<Self> {
        if b.data.len() != b.rows * b.cols {
            return Err(Error::Format(format!(
                "matrix block declares {}×{} but holds {} values",
                b.rows,
                b.cols,
                b.data.len()
            )));
        }
        Ok(DMatrix::from_row_slice(b.rows, b.cols, &b.data))
    }
}

/// JSON container for a [`ProblemInstance`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemDump {
    pub name: String,
    pub a: MatrixBlock,
    pub l: MatrixBlock,
    pub x_true: Vec<f64>,
    pub b_true: Vec<f64>,
}

impl From<&ProblemInstance> for ProblemDump {
    fn from(p: &ProblemInstance) -> Self {
        Self {
            name: p.name.clone(),
            a: (&p.a).into(),
            l: (&p.l).into(),
            x_true: p.x_true.iter().copied().collect(),
            b_true: p.b_true.iter().copied().collect(),
        }
    }
}

impl TryFrom<ProblemDump> for ProblemInstance {
    type Error = Error;

    fn try_from(d: ProblemDump) -> Result<Self> {
        let a: DMatrix<f64> = d.a.try_into()?;
        let l: DMatrix<f64> = d.l.try_into()?;
        if l.ncols() != a.ncols() || d.x_true.len() != a.ncols() || d.b_true.len() != a.nrows() {
            return Err(Error::Format("problem dump has inconsistent shapes".into()));
        }
        Ok(Self {
            name: d.name,
            a,
            l,
            x_true: DVector::from_vec(d.x_true),
            b_true: DVector::from_vec(d.b_true),
        })
    }
}

/// Choice of regularization matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regularizer {
    #[serde(rename = "identity")]
    Identity,
    D1,
    D2,
}

impl Regularizer {
    pub fn matrix(&self, n: usize) -> Result<DMatrix<f64>> {
        match self {
            Regularizer::Identity => Ok(DMatrix::identity(n, n)),
            Regularizer::D1 => deriv_operator(n, 1),
            Regularizer::D2 => deriv_operator(n, 2),
        }
    }
}

impl fmt::Display for Regularizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regularizer::Identity => "identity",
            Regularizer::D1 => "D1",
            Regularizer::D2 => "D2",
        })
    }
}

impl FromStr for Regularizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" | "I" => Ok(Regularizer::Identity),
            "D1" => Ok(Regularizer::D1),
            "D2" => Ok(Regularizer::D2),
            other => Err(Error::Config(format!("unknown regularizer '{other}'"))),
        }
    }
}

/// Named test problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Gravity,
    Phillips,
    Heat,
    Blur,
}

/// Default blur width (pixels) for [`ProblemKind::Blur`].
pub const DEFAULT_BLUR_WIDTH: f64 = 2.0;

impl ProblemKind {
    /// Generates the problem with its default regularizer. For `Blur`, `size`
    /// is the image side.
    pub fn generate(&self, size: usize) -> Result<ProblemInstance> {
        match self {
            ProblemKind::Gravity => gen_gravity(size),
            ProblemKind::Phillips => gen_phillips(size),
            ProblemKind::Heat => gen_heat(size),
            ProblemKind::Blur => gen_blur2d(size, DEFAULT_BLUR_WIDTH),
        }
    }

    /// Regularizer used for this problem in the benchmark suite.
    pub fn default_regularizer(&self) -> Regularizer {
        match self {
            ProblemKind::Gravity => Regularizer::D1,
            ProblemKind::Phillips => Regularizer::D2,
            ProblemKind::Heat | ProblemKind::Blur => Regularizer::Identity,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProblemKind::Gravity => "gravity",
            ProblemKind::Phillips => "phillips",
            ProblemKind::Heat => "heat",
            ProblemKind::Blur => "blur",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gravity" => Ok(ProblemKind::Gravity),
            "phillips" => Ok(ProblemKind::Phillips),
            "heat" => Ok(ProblemKind::Heat),
            "blur" | "mri" => Ok(ProblemKind::Blur),
            other => Err(Error::Config(format!("unknown problem '{other}'"))),
        }
    }
}

/// Finite-difference derivative operator of order 1 (`[-1, 1]` stencil) or
/// 2 (`[1, -2, 1]` stencil), shape `(n − order) × n`.
pub fn deriv_operator(n: usize, order: usize) -> Result<DMatrix<f64>> {
    let stencil: &[f64] = match order {
        1 => &[-1.0, 1.0],
        2 => &[1.0, -2.0, 1.0],
        _ => return Err(Error::BadSize(format!("derivative order must be 1 or 2, got {order}"))),
    };
    if n <= order {
        return Err(Error::BadSize(format!("need n > order, got n = {n}, order = {order}")));
    }
    let mut d = DMatrix::zeros(n - order, n);
    for i in 0..n - order {
        for (j, &c) in stencil.iter().enumerate() {
            d[(i, i + j)] = c;
        }
    }
    Ok(d)
}

/// Phillips' test problem: convolution with `1 + cos(πx/3)` on `[-6, 6]`,
/// Galerkin discretization with box functions.
pub fn gen_phillips(n: usize) -> Result<ProblemInstance> {
    if n < 8 || !n.is_multiple_of(4) {
        return Err(Error::BadSize(format!("phillips needs n ≥ 8 divisible by 4, got {n}")));
    }
    let h = 12.0 / n as f64;
    let n4 = n / 4;
    let w = 4.0 * PI / n as f64;
    let scale = 9.0 / (h * PI * PI);
    let mut first_row = vec![0.0; n];
    for (k, v) in first_row.iter_mut().enumerate().take(n4) {
        let kf = k as f64;
        *v = h + scale * (2.0 * (kf * w).cos() - ((kf + 1.0) * w).cos() - ((kf - 1.0) * w).cos());
    }
    first_row[n4] = h / 2.0 + scale * (w.cos() - 1.0);
    let a = DMatrix::from_fn(n, n, |i, j| first_row[i.abs_diff(j)]);

    let c = PI / 3.0;
    let mut x = DVector::zeros(n);
    for i in 0..n4 {
        let lo = i as f64 * h;
        let hi = (i + 1) as f64 * h;
        let v = (h + ((c * hi).sin() - (c * lo).sin()) / c) / h.sqrt();
        x[2 * n4 + i] = v;
        x[2 * n4 - 1 - i] = v;
    }
    Ok(ProblemInstance::new("phillips", a, deriv_operator(n, 2)?, x))
}

/// Analytic right-hand side of Phillips' problem. The generated instance
/// uses `A·x_true` instead so the system is exactly consistent.
pub fn phillips_analytic_rhs(n: usize) -> Result<DVector<f64>> {
    if n < 8 || !n.is_multiple_of(4) {
        return Err(Error::BadSize(format!("phillips needs n ≥ 8 divisible by 4, got {n}")));
    }
    let h = 12.0 / n as f64;
    let c = PI / 3.0;
    let antiderivative = |t: f64| {
        t * (6.0 - t.abs() / 2.0)
            + ((3.0 - t.abs() / 2.0) * (c * t).sin() - 2.0 / c * ((c * t).cos() - 1.0)) / c
    };
    let mut b = DVector::zeros(n);
    for i in n / 2 + 1..=n {
        let t1 = -6.0 + i as f64 * h;
        let t2 = t1 - h;
        let v = (antiderivative(t1) - antiderivative(t2)) / h.sqrt();
        b[i - 1] = v;
        b[n - i] = v;
    }
    Ok(b)
}

/// Gravity surveying: kernel `d·(d² + (s−t)²)^(−3/2)` with depth `d = 0.25`,
/// midpoint quadrature on `[0, 1]`, solution `sin(πt) + 0.5·sin(2πt)`.
pub fn gen_gravity(n: usize) -> Result<ProblemInstance> {
    if n < 8 {
        return Err(Error::BadSize(format!("gravity needs n ≥ 8, got {n}")));
    }
    let d = 0.25;
    let dt = 1.0 / n as f64;
    let nodes: Vec<f64> = (0..n).map(|i| dt * (i as f64 + 0.5)).collect();
    let a = DMatrix::from_fn(n, n, |i, j| {
        let diff = nodes[i] - nodes[j];
        dt * d / (d * d + diff * diff).powf(1.5)
    });
    let x = DVector::from_iterator(
        n,
        nodes.iter().map(|&t| (PI * t).sin() + 0.5 * (2.0 * PI * t).sin()),
    );
    Ok(ProblemInstance::new("gravity", a, deriv_operator(n, 1)?, x))
}

/// Inverse heat equation as a Volterra equation of the first kind with
/// `κ = 1`; lower-triangular Toeplitz matrix.
pub fn gen_heat(n: usize) -> Result<ProblemInstance> {
    if n < 10 || !n.is_multiple_of(2) {
        return Err(Error::BadSize(format!("heat needs even n ≥ 10, got {n}")));
    }
    let kappa = 1.0;
    let h = 1.0 / n as f64;
    let c = h / (2.0 * kappa * PI.sqrt());
    let d = 1.0 / (4.0 * kappa * kappa);
    let kernel: Vec<f64> = (0..n)
        .map(|i| {
            let t = h / 2.0 + i as f64 * h;
            c * t.powf(-1.5) * (-d / t).exp()
        })
        .collect();
    let a = DMatrix::from_fn(n, n, |i, j| if i >= j { kernel[i - j] } else { 0.0 });
    let mut x = DVector::zeros(n);
    for i in 1..=n / 2 {
        let ti = i as f64 * 20.0 / n as f64;
        x[i - 1] = if ti < 2.0 {
            0.75 * ti * ti / 4.0
        } else if ti < 3.0 {
            0.75 + (ti - 2.0) * (3.0 - ti)
        } else {
            0.75 * (-(ti - 3.0) * 2.0).exp()
        };
    }
    Ok(ProblemInstance::new("heat", a, DMatrix::identity(n, n), x))
}

/// 1D Gaussian blur with zero boundaries. The kernel is truncated to
/// `|i - j| < 4 · width` and normalized so that the retained taps sum to one.
/// A zero width gives the identity.
pub fn gaussian_blur_1d(n: usize, width: f64) -> DMatrix<f64> {
    if width <= 0.0 {
        return DMatrix::identity(n, n);
    }
    let band = (4.0 * width).ceil() as usize;
    let weight = |k: usize| (-((k * k) as f64) / (2.0 * width * width)).exp();
    let total = weight(0) + 2.0 * (1..band).map(weight).sum::<f64>();
    DMatrix::from_fn(n, n, |i, j| {
        let d = i.abs_diff(j);
        if d < band {
            weight(d) / total
        } else {
            0.0
        }
    })
}

/// Piecewise-constant phantom with three gray levels: background 0, a disk
/// at 0.5 and a centered square at 1.
pub fn phantom(side: usize) -> DMatrix<f64> {
    let c = (side as f64 - 1.0) / 2.0;
    let radius = 0.4 * side as f64;
    let half = 0.15 * side as f64;
    DMatrix::from_fn(side, side, |i, j| {
        let (di, dj) = (i as f64 - c, j as f64 - c);
        if di.abs() <= half && dj.abs() <= half {
            1.0
        } else if di * di + dj * dj <= radius * radius {
            0.5
        } else {
            0.0
        }
    })
}

/// Kronecker product `B ⊗ C`.
pub fn kron(b: &DMatrix<f64>, c: &DMatrix<f64>) -> DMatrix<f64> {
    let (br, bc) = b.shape();
    let (cr, cc) = c.shape();
    DMatrix::from_fn(br * cr, bc * cc, |i, j| b[(i / cr, j / cc)] * c[(i % cr, j % cc)])
}

/// Separable Gaussian deblurring of the phantom: `A = T ⊗ T` acting on the
/// column-major vectorized image, `L = I`.
pub fn gen_blur2d(side: usize, blur_width: f64) -> Result<ProblemInstance> {
    if side < 16 {
        return Err(Error::BadSize(format!("blur needs side ≥ 16, got {side}")));
    }
    let t = gaussian_blur_1d(side, blur_width);
    let a = kron(&t, &t);
    let img = phantom(side);
    let x = DVector::from_column_slice(img.as_slice());
    let n = side * side;
    Ok(ProblemInstance::new("blur", a, DMatrix::identity(n, n), x))
}

/// Noisy data `b = b_true + noise` with retained noise vector.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyRealization {
    pub b: DVector<f64>,
    pub noise: DVector<f64>,
    pub s2_true: f64,
    pub seed: u64,
}

/// Adds white Gaussian noise of variance `alpha · max_k b_true,k²`.
pub fn add_noise(p: &ProblemInstance, alpha: f64, seed: u64) -> Result<NoisyRealization> {
    if !(alpha >= 0.0) {
        return Err(Error::Config(format!("noise level must be nonnegative, got {alpha}")));
    }
    let peak = p.b_true.iter().map(|v| v * v).fold(0.0, f64::max);
    let s2_true = alpha * peak;
    let s = s2_true.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = DVector::from_iterator(
        p.m(),
        (0..p.m()).map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            s * z
        }),
    );
    let b = &p.b_true + &noise;
    Ok(NoisyRealization { b, noise, s2_true, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gsvd::{numerical_rank, RankTolerance};

    #[test]
    fn derivative_stencils() {
        let d1 = deriv_operator(5, 1).unwrap();
        assert_eq!(d1.shape(), (4, 5));
        assert_eq!(d1.row(0).iter().copied().collect::<Vec<_>>(), vec![-1.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(d1.row(3).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.0, 0.0, -1.0, 1.0]);
        let ones = DVector::from_element(5, 1.0);
        assert_eq!((&d1 * &ones).norm(), 0.0);

        let d2 = deriv_operator(7, 2).unwrap();
        let ramp = DVector::from_fn(7, |i, _| 0.5 + 2.0 * i as f64);
        assert!((&d2 * &ramp).norm() < 1e-14);
        assert_eq!(numerical_rank(&d2, RankTolerance::Default), 5);
        assert!(deriv_operator(2, 2).is_err());
        assert!(deriv_operator(5, 3).is_err());
    }

    #[test]
    fn size_checks() {
        assert!(gen_phillips(10).is_err());
        assert!(gen_phillips(4).is_err());
        assert!(gen_gravity(7).is_err());
        assert!(gen_heat(8).is_err());
        assert!(gen_heat(11).is_err());
        assert!(gen_blur2d(15, 1.0).is_err());
    }

    #[test]
    fn phillips_is_symmetric_and_consistent() {
        let p = gen_phillips(8).unwrap();
        assert!((&p.a - p.a.transpose()).norm() <= 1e-14);
        for n in [8, 40, 100] {
            assert!(gen_phillips(n).unwrap().consistency_residual() <= 1e-12);
        }
    }

    #[test]
    fn phillips_analytic_rhs_is_close_to_galerkin() {
        let p = gen_phillips(200).unwrap();
        let b = phillips_analytic_rhs(200).unwrap();
        let rel = (&b - &p.b_true).norm() / b.norm();
        assert!(rel < 1e-2, "{rel}");
    }

    #[test]
    fn heat_is_lower_triangular() {
        let p = gen_heat(20).unwrap();
        for i in 0..20 {
            for j in i + 1..20 {
                assert_eq!(p.a[(i, j)], 0.0);
            }
        }
        assert!(p.consistency_residual() <= 1e-12);
        assert_eq!(p.x_true[15], 0.0);
    }

    #[test]
    fn gravity_consistency() {
        let p = gen_gravity(64).unwrap();
        assert!(p.consistency_residual() <= 1e-12);
        assert!((&p.a - p.a.transpose()).norm() <= 1e-14);
    }

    #[test]
    fn zero_width_blur_is_identity() {
        let p = gen_blur2d(16, 0.0).unwrap();
        assert_eq!(p.a, DMatrix::identity(256, 256));
        assert_eq!(p.b_true, p.x_true);
        let tiny = gaussian_blur_1d(16, 1e-3);
        assert!((tiny - DMatrix::<f64>::identity(16, 16)).norm() < 1e-12);
    }

    #[test]
    fn blur_matches_row_column_filtering() {
        let side = 16;
        let p = gen_blur2d(side, 1.5).unwrap();
        let t = gaussian_blur_1d(side, 1.5);
        let img = phantom(side);
        let filtered = &t * &img * t.transpose();
        let diff = (DVector::from_column_slice(filtered.as_slice()) - &p.b_true).norm();
        assert!(diff <= 1e-12 * p.b_true.norm());
    }

    #[test]
    fn phantom_has_three_levels() {
        let img = phantom(32);
        let mut levels: Vec<f64> = img.iter().copied().collect();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        assert_eq!(levels, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn noise_levels_and_determinism() {
        let p = gen_heat(200).unwrap();
        let clean = add_noise(&p, 0.0, 1).unwrap();
        assert_eq!(clean.b, p.b_true);
        assert_eq!(clean.s2_true, 0.0);

        let a = add_noise(&p, 1e-2, 42).unwrap();
        let b = add_noise(&p, 1e-2, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.b, &p.b_true + &a.noise);
        let peak = p.b_true.iter().map(|v| v * v).fold(0.0, f64::max);
        assert_eq!(a.s2_true, 1e-2 * peak);
        let m = p.m() as f64;
        let sample = a.noise.norm_squared() / m;
        assert!((sample - a.s2_true).abs() <= 5.0 * a.s2_true * (2.0 / m).sqrt());
        assert_ne!(add_noise(&p, 1e-2, 43).unwrap().b, a.b);
        assert!(add_noise(&p, -1.0, 1).is_err());
    }

    #[test]
    fn stacked_pairs_have_trivial_common_nullspace() {
        for p in [gen_gravity(40).unwrap(), gen_phillips(40).unwrap(), gen_heat(40).unwrap()] {
            let n = p.n();
            let mut s = DMatrix::zeros(p.m() + p.l.nrows(), n);
            s.rows_mut(0, p.m()).copy_from(&p.a);
            s.rows_mut(p.m(), p.l.nrows()).copy_from(&p.l);
            assert_eq!(numerical_rank(&s, RankTolerance::Default), n, "{}", p.name);
        }
    }

    #[test]
    fn json_roundtrip() {
        let p = gen_gravity(10).unwrap();
        let q = ProblemInstance::from_json(&p.to_json().unwrap()).unwrap();
        assert_eq!(p, q);
        assert!(ProblemInstance::from_json("{\"name\":\"x\"}").is_err());
    }

    #[test]
    fn names_parse() {
        for k in [ProblemKind::Gravity, ProblemKind::Phillips, ProblemKind::Heat, ProblemKind::Blur] {
            assert_eq!(k.name().parse::<ProblemKind>().unwrap(), k);
        }
        assert_eq!("D2".parse::<Regularizer>().unwrap(), Regularizer::D2);
        assert!("D3".parse::<Regularizer>().is_err());
    }
}
