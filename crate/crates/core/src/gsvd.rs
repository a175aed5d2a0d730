//! Generalized singular value decomposition of a matrix pair `(A, L)`.
//!
//! For `A` (m×n) and `L` (p×n) with `N(A) ∩ N(L) = {0}` the factorization is
//!
//! ```text
//! A = U · diag(I_r, S_A, O_A) · Y⁻¹,    L = V · diag(O_L, S_L, I_L) · Y⁻¹
//! ```
//!
//! with `U`, `V` orthogonal, `Y` invertible, `S_A = diag(σ_{r+1..r+q})`
//! decreasing, `S_L = diag(μ_{r+1..r+q})` increasing and `σ_k² + μ_k² = 1`.
//! `r = n − rank(L)` and `q = rank(A) + rank(L) − n`.
//!
//! The decomposition is computed from a Householder QR of the stacked matrix
//! `[A; L] = Q·R` followed by a cosine-sine decomposition of the two row
//! blocks of `Q`. Columns whose cosine exceeds `1/√2` take their sines from
//! an SVD of the corresponding `L` block rather than from column norms, which
//! keeps `V` orthonormal when some `μ_k` are tiny.
//!
//! # Binary container
//!
//! [`GsvdFactors::write_to`] emits a little-endian container:
//!
//! | field   | type                       |
//! |---------|----------------------------|
//! | magic   | 8 bytes, `b"GSVDF64\0"`   |
//! | version | `u32` (currently 1)        |
//! | m n p r q | five `u64`               |
//! | U       | m·m `f64`, row-major       |
//! | V       | p·p `f64`, row-major       |
//! | Y       | n·n `f64`, row-major       |
//! | Y⁻¹     | n·n `f64`, row-major       |
//! | σ       | q `f64`                    |
//! | μ       | q `f64`                    |

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"GSVDF64\0";
const FORMAT_VERSION: u32 = 1;

/// Threshold policy for deciding which singular values count as nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum RankTolerance {
    /// `max(rows, cols) · ulp(s_max)`, where `ulp` is the spacing of
    /// doubles at `s_max`.
    #[default]
    Default,
    /// Fixed absolute threshold.
    Absolute(f64),
    /// `factor · s_max`.
    Relative(f64),
}

impl RankTolerance {
    pub fn threshold(&self, rows: usize, cols: usize, s_max: f64) -> f64 {
        match *self {
            RankTolerance::Default => rows.max(cols) as f64 * ulp(s_max),
            RankTolerance::Absolute(t) => t,
            RankTolerance::Relative(f) => f * s_max,
        }
    }
}

/// Spacing between `x` and the next double of larger magnitude, for
/// finite normal `x`. Zero and subnormals map to the smallest subnormal.
pub fn ulp(x: f64) -> f64 {
    let x = x.abs();
    if !x.is_finite() {
        return f64::NAN;
    }
    if x < f64::MIN_POSITIVE {
        return f64::from_bits(1);
    }
    let pow2 = f64::from_bits(x.to_bits() & 0x7ff0_0000_0000_0000);
    pow2 * f64::EPSILON
}

/// Singular values sorted in decreasing order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Number of singular values strictly above the tolerance.
pub fn numerical_rank(m: &DMatrix<f64>, tol: RankTolerance) -> usize {
    let s = singular_values(m);
    rank_from_singular_values(&s, m.nrows(), m.ncols(), tol)
}

fn rank_from_singular_values(s: &[f64], rows: usize, cols: usize, tol: RankTolerance) -> usize {
    let s_max = s.first().copied().unwrap_or(0.0);
    let t = tol.threshold(rows, cols, s_max);
    s.iter().filter(|&&v| v > t).count()
}

/// 2-norm condition number `s_max / s_min` over all `min(rows, cols)` values.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Factors of the GSVD of `(A, L)`. Immutable once built.
///
/// Column `k` (0-based) of `Y` and `U` pairs with generalized index `k + 1`
/// in the usual 1-based notation; `sigma[i]`, `mu[i]`, `gamma[i]` belong to
/// column `r + i`. Column `k ≥ r` of `Y` pairs with column `p − n + k` of `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct GsvdFactors {
    u: DMatrix<f64>,
    v: DMatrix<f64>,
    y: DMatrix<f64>,
    y_inv: DMatrix<f64>,
    sigma: DVector<f64>,
    mu: DVector<f64>,
    gamma: DVector<f64>,
    r: usize,
    q: usize,
    dims: (usize, usize, usize),
}

impl GsvdFactors {
    /// Assembles factors from explicit parts, checking shapes only.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        u: DMatrix<f64>,
        v: DMatrix<f64>,
        y: DMatrix<f64>,
        y_inv: DMatrix<f64>,
        sigma: DVector<f64>,
        mu: DVector<f64>,
        r: usize,
    ) -> Result<Self> {
        let m = u.nrows();
        let p = v.nrows();
        let n = y.nrows();
        let q = sigma.len();
        let shapes_ok = u.is_square()
            && v.is_square()
            && y.is_square()
            && y_inv.shape() == (n, n)
            && mu.len() == q
            && r + q <= m.min(n)
            && n - r <= p;
        if !shapes_ok {
            return Err(Error::DimensionMismatch(format!(
                "inconsistent GSVD parts: U {:?}, V {:?}, Y {:?}, Y⁻¹ {:?}, |σ| = {}, |μ| = {}, r = {r}",
                u.shape(),
                v.shape(),
                y.shape(),
                y_inv.shape(),
                q,
                mu.len()
            )));
        }
        let gamma = sigma.zip_map(&mu, |s, m| s / m);
        Ok(Self { u, v, y, y_inv, sigma, mu, gamma, r, q, dims: (m, n, p) })
    }

    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }
    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }
    pub fn y(&self) -> &DMatrix<f64> {
        &self.y
    }
    pub fn y_inv(&self) -> &DMatrix<f64> {
        &self.y_inv
    }
    pub fn sigma(&self) -> &DVector<f64> {
        &self.sigma
    }
    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }
    pub fn gamma(&self) -> &DVector<f64> {
        &self.gamma
    }
    /// Dimension of `N(L)`.
    pub fn r(&self) -> usize {
        self.r
    }
    /// Size of the generalized block, `rank(A) + rank(L) − n`.
    pub fn q(&self) -> usize {
        self.q
    }
    pub fn rank_a(&self) -> usize {
        self.r + self.q
    }
    pub fn rank_l(&self) -> usize {
        self.dims.1 - self.r
    }
    /// `(m, n, p)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }
    pub fn m(&self) -> usize {
        self.dims.0
    }
    pub fn n(&self) -> usize {
        self.dims.1
    }

    /// Diagonal value of `U^T A Y` in column `k` (0-based): 1 in the `N(L)`
    /// block, `σ` in the generalized block, 0 beyond.
    pub fn sigma_ext(&self, k: usize) -> f64 {
        if k < self.r {
            1.0
        } else if k < self.r + self.q {
            self.sigma[k - self.r]
        } else {
            0.0
        }
    }

    /// The m×n middle factor of `A`.
    pub fn block_a(&self) -> DMatrix<f64> {
        let (m, n, _) = self.dims;
        let mut d = DMatrix::zeros(m, n);
        for k in 0..self.rank_a() {
            d[(k, k)] = self.sigma_ext(k);
        }
        d
    }

    /// The p×n middle factor of `L`.
    pub fn block_l(&self) -> DMatrix<f64> {
        let (_, n, p) = self.dims;
        let offset = p + self.r - n;
        let mut d = DMatrix::zeros(p, n);
        for k in self.r..n {
            d[(offset + k - self.r, k)] = if k < self.r + self.q { self.mu[k - self.r] } else { 1.0 };
        }
        d
    }

    /// Serializes into the documented binary container.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let (m, n, p) = self.dims;
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        for v in [m, n, p, self.r, self.q] {
            w.write_all(&(v as u64).to_le_bytes())?;
        }
        for mat in [&self.u, &self.v, &self.y, &self.y_inv] {
            for i in 0..mat.nrows() {
                for j in 0..mat.ncols() {
                    w.write_all(&mat[(i, j)].to_le_bytes())?;
                }
            }
        }
        for x in self.sigma.iter().chain(self.mu.iter()) {
            w.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    }

    /// Reads factors written by [`GsvdFactors::write_to`].
    pub fn read_from<R: Read>(mut rd: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        rd.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("not a GSVD container".into()));
        }
        let mut b4 = [0u8; 4];
        rd.read_exact(&mut b4)?;
        let version = u32::from_le_bytes(b4);
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported GSVD container version {version}")));
        }
        let mut header = [0usize; 5];
        for h in header.iter_mut() {
            let mut b8 = [0u8; 8];
            rd.read_exact(&mut b8)?;
            *h = usize::try_from(u64::from_le_bytes(b8))
                .map_err(|_| Error::Format("dimension overflows usize".into()))?;
        }
        let [m, n, p, r, q] = header;
        let mut read_f64 = |count: usize| -> Result<Vec<f64>> {
            let mut out = Vec::with_capacity(count);
            let mut b8 = [0u8; 8];
            for _ in 0..count {
                rd.read_exact(&mut b8)?;
                out.push(f64::from_le_bytes(b8));
            }
            Ok(out)
        };
        let u = DMatrix::from_row_slice(m, m, &read_f64(m * m)?);
        let v = DMatrix::from_row_slice(p, p, &read_f64(p * p)?);
        let y = DMatrix::from_row_slice(n, n, &read_f64(n * n)?);
        let y_inv = DMatrix::from_row_slice(n, n, &read_f64(n * n)?);
        let sigma = DVector::from_vec(read_f64(q)?);
        let mu = DVector::from_vec(read_f64(q)?);
        Self::from_parts(u, v, y, y_inv, sigma, mu, r)
    }
}

/// GSVD with the default rank tolerance.
pub fn compute_gsvd(a: &DMatrix<f64>, l: &DMatrix<f64>) -> Result<GsvdFactors> {
    compute_gsvd_with(a, l, RankTolerance::Default)
}

pub fn compute_gsvd_with(
    a: &DMatrix<f64>,
    l: &DMatrix<f64>,
    tol: RankTolerance,
) -> Result<GsvdFactors> {
    let (m, n) = a.shape();
    let p = l.nrows();
    if l.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "A has {n} columns but L has {}",
            l.ncols()
        )));
    }
    if m == 0 || n == 0 || p == 0 {
        return Err(Error::BadSize(format!("empty matrix pair: m = {m}, n = {n}, p = {p}")));
    }
    if m + p < n {
        return Err(Error::NonTrivialCommonNullspace { rank: m + p, n });
    }

    let mut stacked = DMatrix::zeros(m + p, n);
    stacked.rows_mut(0, m).copy_from(a);
    stacked.rows_mut(m, p).copy_from(l);
    let qr = stacked.qr();
    let q_full = qr.q();
    let r_fac = qr.r();

    // [A; L] and R share singular values.
    let stacked_rank = rank_from_singular_values(&singular_values(&r_fac), m + p, n, tol);
    if stacked_rank < n {
        return Err(Error::NonTrivialCommonNullspace { rank: stacked_rank, n });
    }
    let rank_a = numerical_rank(a, tol);
    let rank_l = numerical_rank(l, tol);
    if rank_l > p {
        return Err(Error::RankExceedsRows { rank: rank_l, p });
    }
    if rank_a + rank_l < n {
        return Err(Error::NonTrivialCommonNullspace { rank: rank_a + rank_l, n });
    }
    let r = n - rank_l;
    let q = rank_a + rank_l - n;

    let q1 = q_full.rows(0, m).into_owned();
    let q2 = q_full.rows(m, p).into_owned();

    // Q1 = U1 · diag(c) · Wᵀ
    let (u1, c_sorted, mut w) = square_right_svd(q1.clone());
    let mut cosines = c_sorted;
    let mut sines = vec![0.0; n];
    let mut u_cols = DMatrix::zeros(m, n);
    let mut v_cols = DMatrix::zeros(p, n);

    let split = cosines.iter().take_while(|&&c| c > std::f64::consts::FRAC_1_SQRT_2).count();

    // Large cosines: take the sines from an SVD of Q2·W_b and rotate W_b to match.
    if split > 0 {
        let zb = &q2 * w.columns(0, split);
        let (vb, sb, x) = square_right_svd(zb);
        let wb = w.columns(0, split) * &x;
        w.columns_mut(0, split).copy_from(&wb);
        let g = &q1 * &wb;
        for k in 0..split {
            let col = g.column(k);
            let c = col.norm();
            cosines[k] = c;
            sines[k] = sb[k];
            if c > 0.0 {
                u_cols.set_column(k, &(col / c));
            }
            v_cols.set_column(k, &vb.column(k));
        }
    }
    // Small cosines: sines are well conditioned as column norms of Q2·W_s.
    for k in split..n {
        let z = &q2 * w.column(k);
        let s = z.norm();
        sines[k] = s;
        if s > 0.0 {
            v_cols.set_column(k, &(z / s));
        }
        u_cols.set_column(k, &u1.column(k));
    }
    for k in 0..n {
        let t = cosines[k].hypot(sines[k]);
        if t > 0.0 {
            cosines[k] /= t;
            sines[k] /= t;
        }
    }

    // Order by the smaller of the pair and rebuild the larger from it, so
    // that the sequences are exactly monotone in floating point.
    let (mut big_c, mut small_c): (Vec<usize>, Vec<usize>) =
        (0..n).partition(|&k| cosines[k] > std::f64::consts::FRAC_1_SQRT_2);
    big_c.sort_by(|&i, &j| sines[i].total_cmp(&sines[j]).then(i.cmp(&j)));
    small_c.sort_by(|&i, &j| cosines[j].total_cmp(&cosines[i]).then(i.cmp(&j)));
    for &k in &big_c {
        cosines[k] = (1.0 - sines[k] * sines[k]).sqrt();
    }
    for &k in &small_c {
        sines[k] = (1.0 - cosines[k] * cosines[k]).sqrt();
    }
    let order: Vec<usize> = big_c.into_iter().chain(small_c).collect();
    let w = permute_columns(&w, &order);
    let u_cols = permute_columns(&u_cols, &order);
    let v_cols = permute_columns(&v_cols, &order);
    let cosines: Vec<f64> = order.iter().map(|&i| cosines[i]).collect();
    let sines: Vec<f64> = order.iter().map(|&i| sines[i]).collect();

    let rank_a = r + q;
    let mut u = DMatrix::zeros(m, m);
    let kept_u = u_cols.columns(0, rank_a).into_owned();
    u.columns_mut(0, rank_a).copy_from(&kept_u);
    u.columns_mut(rank_a, m - rank_a).copy_from(&orthonormal_completion(&kept_u));

    let offset = p + r - n;
    let mut v = DMatrix::zeros(p, p);
    let kept_v = v_cols.columns(r, n - r).into_owned();
    v.columns_mut(offset, n - r).copy_from(&kept_v);
    v.columns_mut(0, offset).copy_from(&orthonormal_completion(&kept_v));

    let y_inv = w.transpose() * &r_fac;
    let y = r_fac.solve_upper_triangular(&w).ok_or(Error::SingularSystem)?;

    let sigma = DVector::from_iterator(q, cosines[r..r + q].iter().copied());
    let mu = DVector::from_iterator(q, sines[r..r + q].iter().copied());
    GsvdFactors::from_parts(u, v, y, y_inv, sigma, mu, r)
}

/// SVD of a d×n matrix giving `U` (d×n), singular values sorted in
/// decreasing order and a square `V` (n×n). Rows are zero-padded when
/// `d < n`; the trailing columns of `U` are then meaningless.
fn square_right_svd(mat: DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let (d, n) = mat.shape();
    let work = if d >= n {
        mat
    } else {
        let mut padded = DMatrix::zeros(n, n);
        padded.rows_mut(0, d).copy_from(&mat);
        padded
    };
    let svd = work.clone().svd_unordered(true, true);
    let mut u = svd.u.expect("U requested");
    let mut v = svd.v_t.expect("Vᵀ requested").transpose();
    // nalgebra's bidiagonal iteration can leave ~1e-10 backward error;
    // polish so that work·V has orthogonal columns to working precision.
    let mut b = &work * &v;
    jacobi_polish(&mut b, &mut v);
    let s = DVector::from_iterator(n, b.column_iter().map(|c| c.norm()));
    for k in 0..n {
        if s[k] > 0.0 {
            let col = b.column(k) / s[k];
            u.set_column(k, &col);
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]).then(i.cmp(&j)));
    let u = permute_columns(&u.rows(0, d).into_owned(), &order);
    let v = permute_columns(&v, &order);
    (u, order.iter().map(|&i| s[i]).collect(), v)
}

/// One-sided Jacobi sweeps on the columns of `b`, accumulating the rotations
/// into `v`, until every pair of columns is orthogonal to working precision.
fn jacobi_polish(b: &mut DMatrix<f64>, v: &mut DMatrix<f64>) {
    const MAX_SWEEPS: usize = 30;
    let (d, n) = b.shape();
    let tol = f64::EPSILON * (d as f64).sqrt();
    let mut norms: Vec<f64> = b.column_iter().map(|c| c.norm_squared()).collect();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let (aii, ajj) = (norms[i], norms[j]);
                if aii == 0.0 || ajj == 0.0 {
                    continue;
                }
                let aij = b.column(i).dot(&b.column(j));
                if aij.abs() <= tol * (aii * ajj).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (ajj - aii) / (2.0 * aij);
                let t = zeta.signum() / (zeta.abs() + zeta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = c * t;
                rotate_columns(b, i, j, c, s);
                rotate_columns(v, i, j, c, s);
                norms[i] = b.column(i).norm_squared();
                norms[j] = b.column(j).norm_squared();
            }
        }
        if !rotated {
            break;
        }
    }
}

/// `[x_i, x_j] ← [c·x_i − s·x_j, s·x_i + c·x_j]`.
fn rotate_columns(mat: &mut DMatrix<f64>, i: usize, j: usize, c: f64, s: f64) {
    let rows = mat.nrows();
    let data = mat.as_mut_slice();
    let (head, tail) = data.split_at_mut(j * rows);
    let xi = &mut head[i * rows..(i + 1) * rows];
    let xj = &mut tail[..rows];
    for (a, b) in xi.iter_mut().zip(xj.iter_mut()) {
        let (p, q) = (*a, *b);
        *a = c * p - s * q;
        *b = s * p + c * q;
    }
}

fn permute_columns(mat: &DMatrix<f64>, order: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(mat.nrows(), order.len(), |i, j| mat[(i, order[j])])
}

/// Orthonormal basis of the complement of the span of orthonormal `basis`
/// columns (d×t), returned as d×(d−t).
fn orthonormal_completion(basis: &DMatrix<f64>) -> DMatrix<f64> {
    let (d, t) = basis.shape();
    if t == 0 {
        return DMatrix::identity(d, d);
    }
    let qr = basis.clone().qr();
    let mut qt = DMatrix::identity(d, d);
    qr.q_tr_mul(&mut qt);
    qt.transpose().columns(t, d - t).into_owned()
}

/// Per-invariant residuals of a set of factors against `(A, L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GsvdReport {
    /// `‖A − U·block_A·Y⁻¹‖_F / ‖A‖_F`.
    pub recon_a: f64,
    /// `‖L − V·block_L·Y⁻¹‖_F / ‖L‖_F`.
    pub recon_l: f64,
    /// `‖UᵀU − I‖_F`.
    pub orth_u: f64,
    /// `‖VᵀV − I‖_F`.
    pub orth_v: f64,
    /// `‖Y·Y⁻¹ − I‖_F`.
    pub y_inverse: f64,
    /// `max |σ_k² + μ_k² − 1|`.
    pub pair_norm: f64,
    /// Adjacent pairs breaking `σ` nonincreasing / `μ` nondecreasing, plus values outside (0, 1].
    pub ordering_violations: usize,
    /// Numerical ranks of `A` and `L` under the default tolerance.
    pub rank_a: usize,
    pub rank_l: usize,
    /// `rank(A) == r + q` and `rank(L) == n − r`.
    pub ranks_consistent: bool,
}

impl GsvdReport {
    pub fn max_reconstruction(&self) -> f64 {
        self.recon_a.max(self.recon_l)
    }

    pub fn max_orthogonality(&self) -> f64 {
        self.orth_u.max(self.orth_v)
    }

    /// All matrix residuals within `tol`, `σ² + μ² = 1` within `pair_tol`,
    /// no ordering violations and consistent ranks.
    pub fn passes(&self, tol: f64, pair_tol: f64) -> bool {
        self.max_reconstruction() <= tol
            && self.max_orthogonality() <= tol
            && self.pair_norm <= pair_tol
            && self.ordering_violations == 0
            && self.ranks_consistent
    }
}

fn orthogonality_defect(q: &DMatrix<f64>) -> f64 {
    let k = q.ncols();
    (q.transpose() * q - DMatrix::<f64>::identity(k, k)).norm()
}

fn relative_residual(target: &DMatrix<f64>, approx: &DMatrix<f64>) -> f64 {
    let diff = (target - approx).norm();
    let scale = target.norm();
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// Measures how well `f` satisfies the GSVD invariants for `(a, l)`.
pub fn verify_factors(f: &GsvdFactors, a: &DMatrix<f64>, l: &DMatrix<f64>) -> Result<GsvdReport> {
    let (m, n, p) = f.dims();
    if a.shape() != (m, n) || l.shape() != (p, n) {
        return Err(Error::DimensionMismatch(format!(
            "factors are for ({m}×{n}, {p}×{n}) but got A {:?}, L {:?}",
            a.shape(),
            l.shape()
        )));
    }
    let recon_a = relative_residual(a, &(f.u() * f.block_a() * f.y_inv()));
    let recon_l = relative_residual(l, &(f.v() * f.block_l() * f.y_inv()));
    let y_inverse = (f.y() * f.y_inv() - DMatrix::<f64>::identity(n, n)).norm();
    let pair_norm = f
        .sigma()
        .iter()
        .zip(f.mu().iter())
        .map(|(s, m)| (s * s + m * m - 1.0).abs())
        .fold(0.0, f64::max);
    let out_of_range = f
        .sigma()
        .iter()
        .chain(f.mu().iter())
        .filter(|&&x| !(x > 0.0 && x <= 1.0))
        .count();
    let sigma_breaks = f.sigma().as_slice().windows(2).filter(|w| w[1] > w[0]).count();
    let mu_breaks = f.mu().as_slice().windows(2).filter(|w| w[1] < w[0]).count();
    let rank_a = numerical_rank(a, RankTolerance::Default);
    let rank_l = numerical_rank(l, RankTolerance::Default);
    Ok(GsvdReport {
        recon_a,
        recon_l,
        orth_u: orthogonality_defect(f.u()),
        orth_v: orthogonality_defect(f.v()),
        y_inverse,
        pair_norm,
        ordering_violations: out_of_range + sigma_breaks + mu_breaks,
        rank_a,
        rank_l,
        ranks_consistent: rank_a == f.rank_a() && rank_l == f.rank_l(),
    })
}
