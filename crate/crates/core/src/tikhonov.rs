//! Spectral Tikhonov machinery on top of a [`GsvdFactors`].
//!
//! Everything here works on the Fourier coefficients `β_k = u_kᵀ b`; the
//! matrices `A` and `L` are only touched by [`solve_direct`], which serves as
//! an independent dense reference.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gsvd::GsvdFactors;

/// Tikhonov filter factor `γ² / (γ² + λ²)`, evaluated through the ratio of
/// the smaller to the larger argument so that extreme values do not
/// overflow.
#[inline]
pub fn filter_factor(gamma: f64, lambda: f64) -> f64 {
    let (g, l) = (gamma.abs(), lambda.abs());
    if g == 0.0 && l == 0.0 {
        1.0
    } else if g >= l {
        let t = l / g;
        1.0 / (1.0 + t * t)
    } else {
        let t = g / l;
        t * t / (1.0 + t * t)
    }
}

/// Complementary factor `λ² / (γ² + λ²) = 1 − filter_factor`.
#[inline]
pub fn residual_factor(gamma: f64, lambda: f64) -> f64 {
    let (g, l) = (gamma.abs(), lambda.abs());
    if g == 0.0 && l == 0.0 {
        0.0
    } else if l >= g {
        let t = g / l;
        1.0 / (1.0 + t * t)
    } else {
        let t = l / g;
        t * t / (1.0 + t * t)
    }
}

/// Fourier coefficients of a data vector together with the factors they
/// were computed from.
#[derive(Debug, Clone)]
pub struct SpectralData<'f> {
    factors: &'f GsvdFactors,
    beta: DVector<f64>,
    /// `Σ_{k > r+q} β_k²`
    tail: f64,
}

impl<'f> SpectralData<'f> {
    /// Wraps precomputed coefficients (e.g. scaled or synthetic sequences).
    pub fn from_beta(factors: &'f GsvdFactors, beta: DVector<f64>) -> Result<Self> {
        if beta.len() != factors.m() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} coefficients, got {}",
                factors.m(),
                beta.len()
            )));
        }
        let tail = beta.rows_range(factors.rank_a()..).norm_squared();
        Ok(Self { factors, beta, tail })
    }

    pub fn factors(&self) -> &'f GsvdFactors {
        self.factors
    }

    pub fn beta(&self) -> &DVector<f64> {
        &self.beta
    }

    pub fn m(&self) -> usize {
        self.beta.len()
    }

    pub fn r(&self) -> usize {
        self.factors.r()
    }

    pub fn q(&self) -> usize {
        self.factors.q()
    }

    /// `Σ_{k > r+q} β_k²`, the part of `b` outside `range(A)`.
    pub fn tail_energy(&self) -> f64 {
        self.tail
    }

    /// Iterator over `(γ_k, β_k)` for the generalized block.
    pub fn generalized(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let r = self.factors.r();
        self.factors.gamma().iter().copied().zip(self.beta.iter().skip(r).copied())
    }

    /// Coefficients of `x(λ)` in the `Y` basis (length `r + q`).
    pub fn solution_coefficients(&self, lambda: f64) -> DVector<f64> {
        let f = self.factors;
        let r = f.r();
        DVector::from_fn(f.rank_a(), |k, _| {
            if k < r {
                self.beta[k]
            } else {
                let i = k - r;
                filter_factor(f.gamma()[i], lambda) * self.beta[k] / f.sigma()[i]
            }
        })
    }
}

/// `β = Uᵀ b`.
pub fn fourier_coeffs<'f>(f: &'f GsvdFactors, b: &DVector<f64>) -> Result<SpectralData<'f>> {
    if b.len() != f.m() {
        return Err(Error::DimensionMismatch(format!(
            "data has length {} but A has {} rows",
            b.len(),
            f.m()
        )));
    }
    SpectralData::from_beta(f, f.u().tr_mul(b))
}

/// Tikhonov solution
/// `x(λ) = Σ_{k≤r} β_k y_k + Σ_{k=r+1}^{r+q} γ_k²/(γ_k²+λ²) · β_k/σ_k · y_k`.
///
/// At `λ = 0` tiny `σ_k` produce correspondingly large (finite) components.
pub fn solve(f: &GsvdFactors, s: &SpectralData<'_>, lambda: f64) -> DVector<f64> {
    let coeffs = s.solution_coefficients(lambda);
    f.y().columns(0, f.rank_a()) * coeffs
}

/// Dense reference solution of `(AᵀA + λ²LᵀL) x = Aᵀb`, computed as the
/// least-squares solution of `[A; λL] x ≈ [b; 0]` by Householder QR.
pub fn solve_direct(
    a: &DMatrix<f64>,
    l: &DMatrix<f64>,
    b: &DVector<f64>,
    lambda: f64,
) -> Result<DVector<f64>> {
    let (m, n) = a.shape();
    let p = l.nrows();
    if l.ncols() != n || b.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "A {:?}, L {:?}, b {}",
            a.shape(),
            l.shape(),
            b.len()
        )));
    }
    if m + p < n {
        return Err(Error::SingularSystem);
    }
    let mut stacked = DMatrix::zeros(m + p, n);
    stacked.rows_mut(0, m).copy_from(a);
    stacked.rows_mut(m, p).copy_from(&(l * lambda));
    let mut rhs = DVector::zeros(m + p);
    rhs.rows_mut(0, m).copy_from(b);

    let qr = stacked.qr();
    let r = qr.r();
    let diag_max = r.diagonal().amax();
    let floor = (m + p).max(n) as f64 * f64::EPSILON * diag_max;
    if diag_max == 0.0 || r.diagonal().iter().any(|d| d.abs() <= floor) {
        return Err(Error::SingularSystem);
    }
    qr.q_tr_mul(&mut rhs);
    r.solve_upper_triangular(&rhs.rows(0, n).into_owned()).ok_or(Error::SingularSystem)
}

/// Predicted data `A·x(λ)` assembled from the left basis vectors.
pub fn predicted_data(f: &GsvdFactors, s: &SpectralData<'_>, lambda: f64) -> DVector<f64> {
    let r = f.r();
    let coeffs = DVector::from_fn(f.rank_a(), |k, _| {
        if k < r {
            s.beta()[k]
        } else {
            filter_factor(f.gamma()[k - r], lambda) * s.beta()[k]
        }
    });
    f.u().columns(0, f.rank_a()) * coeffs
}

/// Squared residual norm
/// `ρ(λ) = Σ_{k=r+1}^{r+q} λ⁴/(γ_k²+λ²)² β_k² + Σ_{k>r+q} β_k²`.
pub fn residual_norm_sq(s: &SpectralData<'_>, lambda: f64) -> f64 {
    s.generalized()
        .map(|(g, b)| {
            let w = residual_factor(g, lambda);
            w * w * b * b
        })
        .sum::<f64>()
        + s.tail_energy()
}
