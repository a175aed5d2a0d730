//! Global minimization over `λ` by a logarithmic grid scan followed by
//! bounded Brent refinement around every strict interior grid minimum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Search domain and refinement settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    /// Absolute tolerance on `λ` for the local refinement.
    pub refine_tol: f64,
    /// Grid points on each side of a minimum spanned by the refinement bracket.
    pub refine_half_width: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { lo: 1e-15, hi: 1e5, points: 1000, refine_tol: 1e-9, refine_half_width: 5 }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo > 0.0 && self.lo < self.hi && self.hi.is_finite()) {
            return Err(Error::Config(format!("grid needs 0 < lo < hi, got [{}, {}]", self.lo, self.hi)));
        }
        if self.points < 3 {
            return Err(Error::Config(format!("grid needs at least 3 points, got {}", self.points)));
        }
        if !(self.refine_tol > 0.0) || self.refine_half_width == 0 {
            return Err(Error::Config("refinement tolerance and window must be positive".into()));
        }
        Ok(())
    }

    /// Logarithmically spaced points with exact endpoints.
    pub fn grid(&self) -> Vec<f64> {
        let (a, b) = (self.lo.log10(), self.hi.log10());
        let last = self.points - 1;
        (0..self.points)
            .map(|i| match i {
                0 => self.lo,
                i if i == last => self.hi,
                i => 10f64.powf(a + (b - a) * i as f64 / last as f64),
            })
            .collect()
    }
}

/// How the returned point was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MinimumKind {
    /// Brent refinement of a strict interior grid minimum.
    Refined,
    /// Best grid value sits at an end of the grid; not refined.
    Boundary,
    /// Best grid value is interior but not strict (a flat stretch); not refined.
    Plateau,
    /// Every grid value is identical.
    Flat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub lambda: f64,
    pub value: f64,
    pub kind: MinimumKind,
    /// Strict interior grid minima that were refined.
    pub basins: usize,
    /// Objective samples on the grid, `(λ, value)`.
    pub trace: Vec<(f64, f64)>,
}

/// Bounded scalar minimization on `[ax, bx]` by golden-section search with
/// parabolic interpolation (Brent). The stopping test uses
/// `tol1 = √ε·|x| + tol_x/3`. Returns `(x, f(x))`.
pub fn fminbnd<F: FnMut(f64) -> f64>(mut f: F, ax: f64, bx: f64, tol_x: f64, max_iter: usize) -> (f64, f64) {
    let c = 0.5 * (3.0 - 5f64.sqrt());
    let sqrt_eps = f64::EPSILON.sqrt();
    let (mut a, mut b) = if ax <= bx { (ax, bx) } else { (bx, ax) };

    let mut xf = a + c * (b - a);
    let (mut v, mut w) = (xf, xf);
    let (mut d, mut e) = (0.0f64, 0.0f64);
    let mut fx = f(xf);
    let (mut fv, mut fw) = (fx, fx);
    let mut xm = 0.5 * (a + b);
    let mut tol1 = sqrt_eps * xf.abs() + tol_x / 3.0;
    let mut tol2 = 2.0 * tol1;

    let mut iter = 0;
    while (xf - xm).abs() > tol2 - 0.5 * (b - a) && iter < max_iter {
        iter += 1;
        let mut golden = true;
        if e.abs() > tol1 {
            golden = false;
            let mut r = (xf - w) * (fx - fv);
            let mut q = (xf - v) * (fx - fw);
            let mut p = (xf - v) * q - (xf - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            r = e;
            e = d;
            if p.abs() < (0.5 * q * r).abs() && p > q * (a - xf) && p < q * (b - xf) {
                d = p / q;
                let x = xf + d;
                if (x - a) < tol2 || (b - x) < tol2 {
                    d = if xm >= xf { tol1 } else { -tol1 };
                }
            } else {
                golden = true;
            }
        }
        if golden {
            e = if xf >= xm { a - xf } else { b - xf };
            d = c * e;
        }
        let step = if d >= 0.0 { d.abs().max(tol1) } else { -d.abs().max(tol1) };
        let x = xf + step;
        let fu = f(x);

        if fu <= fx {
            if x >= xf {
                a = xf;
            } else {
                b = xf;
            }
            v = w;
            fv = fw;
            w = xf;
            fw = fx;
            xf = x;
            fx = fu;
        } else {
            if x < xf {
                a = x;
            } else {
                b = x;
            }
            if fu <= fw || w == xf {
                v = w;
                fv = fw;
                w = x;
                fw = fu;
            } else if fu <= fv || v == xf || v == w {
                v = x;
                fv = fu;
            }
        }
        xm = 0.5 * (a + b);
        tol1 = sqrt_eps * xf.abs() + tol_x / 3.0;
        tol2 = 2.0 * tol1;
    }
    (xf, fx)
}

const MAX_REFINE_ITER: usize = 500;

fn better(cand: (f64, f64), best: (f64, f64)) -> bool {
    cand.1 < best.1 || (cand.1 == best.1 && cand.0 > best.0)
}

/// Scans the grid, refines each strict interior minimum on
/// `[grid[i−h], grid[i+h]]` (clipped to the grid) and returns the overall
/// best point. Ties go to the larger `λ`. A refinement that ends above its
/// grid value is discarded in favour of the grid point.
pub fn minimize_global<F: Fn(f64) -> f64>(objective: F, spec: &GridSpec) -> Result<Minimum> {
    spec.validate()?;
    let grid = spec.grid();
    let values: Vec<f64> = grid.iter().map(|&l| objective(l)).collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteObjective { lambda: grid[i], value: values[i] });
    }
    let n = grid.len();

    let mut best_i = 0;
    for i in 1..n {
        if values[i] <= values[best_i] {
            best_i = i;
        }
    }
    let mut best = (grid[best_i], values[best_i]);
    let mut kind = if values.iter().all(|&v| v == values[0]) {
        MinimumKind::Flat
    } else if best_i == 0 || best_i == n - 1 {
        MinimumKind::Boundary
    } else if values[best_i] < values[best_i - 1] && values[best_i] < values[best_i + 1] {
        MinimumKind::Refined
    } else {
        MinimumKind::Plateau
    };

    let h = spec.refine_half_width;
    let mut basins = 0;
    for i in 1..n - 1 {
        if !(values[i] < values[i - 1] && values[i] < values[i + 1]) {
            continue;
        }
        basins += 1;
        let lo = grid[i.saturating_sub(h)];
        let hi = grid[(i + h).min(n - 1)];
        let (x, fx) = fminbnd(&objective, lo, hi, spec.refine_tol, MAX_REFINE_ITER);
        let cand = if fx.is_finite() && fx <= values[i] { (x, fx) } else { (grid[i], values[i]) };
        if better(cand, best) {
            best = cand;
            kind = MinimumKind::Refined;
        }
    }

    Ok(Minimum {
        lambda: best.0,
        value: best.1,
        kind,
        basins,
        trace: grid.into_iter().zip(values).collect(),
    })
}
