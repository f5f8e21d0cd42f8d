// Guards are written as `!(x > bound)` so that NaN fails them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use nalgebra::DMatrix;

use super::cache::CrossCache;
use super::dataset::{dot, Dataset};
use super::prior::PriorSpec;
use crate::error::ModelError;

/// Condition-number estimate above which a dense build is rejected.
pub const CONDITION_LIMIT: f64 = 1e14;
/// Relative floor on the Schur complement `d` of an added column.
pub const SCHUR_RTOL: f64 = 1e-12;

/// Sufficient statistics of one model.
///
/// With `Z = [1_n X_gamma]` and `Lambda = diag(0, 1/g, ..., 1/g)` this holds
/// `F = (Z^T Z + Lambda)^{-1}`, `Z^T y`, `F Z^T y`, the residual
/// `A = y^T y - y^T Z F Z^T y` and `log |Z^T Z + Lambda|`. Row/column 0 of
/// `F` belongs to the intercept and row `k >= 1` to `cols[k - 1]`.
#[derive(Debug, Clone)]
pub struct SuffStats {
    cols: Vec<usize>,
    f: Vec<f64>,
    zty: Vec<f64>,
    fzty: Vec<f64>,
    a_resid: f64,
    logdet: f64,
    g: f64,
}

impl SuffStats {
    /// Intercept-only model: `F = [1/n]`.
    pub fn null(data: &Dataset, g: f64) -> Result<Self, ModelError> {
        Self::from_scratch(data, g, &[])
    }

    /// Dense build by Cholesky factorization of `Z^T Z + Lambda`.
    pub fn from_scratch(data: &Dataset, g: f64, cols: &[usize]) -> Result<Self, ModelError> {
        let m = cols.len() + 1;
        let mut gram = DMatrix::<f64>::zeros(m, m);
        gram[(0, 0)] = data.n() as f64;
        for (a, &j) in cols.iter().enumerate() {
            gram[(0, a + 1)] = data.col_sum()[j];
            gram[(a + 1, 0)] = data.col_sum()[j];
            for (b, &k) in cols.iter().enumerate().take(a + 1) {
                let mut v = data.cross(j, k);
                if a == b {
                    v += 1.0 / g;
                }
                gram[(a + 1, b + 1)] = v;
                gram[(b + 1, a + 1)] = v;
            }
        }
        let chol = gram.cholesky().ok_or(ModelError::Singular {
            condition: f64::INFINITY,
        })?;
        let l = chol.l_dirty();
        let diag: Vec<f64> = (0..m).map(|i| l[(i, i)]).collect();
        let max = diag.iter().cloned().fold(0.0, f64::max);
        let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        let condition = (max / min).powi(2);
        if !(condition <= CONDITION_LIMIT) {
            return Err(ModelError::Singular { condition });
        }
        let logdet = 2.0 * diag.iter().map(|d| d.ln()).sum::<f64>();
        let inv = chol.inverse();
        let mut f = vec![0.0; m * m];
        for a in 0..m {
            for b in 0..m {
                f[a * m + b] = 0.5 * (inv[(a, b)] + inv[(b, a)]);
            }
        }
        let mut zty = Vec::with_capacity(m);
        zty.push(data.y_sum());
        zty.extend(cols.iter().map(|&j| data.xty()[j]));
        let fzty: Vec<f64> = f.chunks_exact(m).map(|row| dot(row, &zty)).collect();
        let a_resid = data.yty() - dot(&zty, &fzty);
        if !(a_resid > 1e-12 * data.yty()) {
            return Err(ModelError::DegenerateFit(a_resid));
        }
        Ok(Self {
            cols: cols.to_vec(),
            f,
            zty,
            fzty,
            a_resid,
            logdet,
            g,
        })
    }

    /// Included columns in matrix order.
    pub fn cols(&self) -> &[usize] {
        &self.cols
    }

    pub fn p_gamma(&self) -> usize {
        self.cols.len()
    }

    /// Side of `F`, `p_gamma + 1`.
    pub fn dim(&self) -> usize {
        self.cols.len() + 1
    }

    #[inline]
    pub fn f(&self, a: usize, b: usize) -> f64 {
        self.f[a * self.dim() + b]
    }

    /// `F` row-major.
    pub fn f_matrix(&self) -> &[f64] {
        &self.f
    }

    pub fn zty(&self) -> &[f64] {
        &self.zty
    }

    pub fn fzty(&self) -> &[f64] {
        &self.fzty
    }

    pub fn a_resid(&self) -> f64 {
        self.a_resid
    }

    pub fn logdet(&self) -> f64 {
        self.logdet
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    /// Matrix index (>= 1) of column `j`, if included.
    pub fn position(&self, j: usize) -> Option<usize> {
        self.cols.iter().position(|&k| k == j).map(|i| i + 1)
    }

    /// `log m(gamma) = -logdet/2 - (p_gamma/2) log g - (n/2) log A`.
    pub fn log_marginal(&self, n: usize) -> f64 {
        -0.5 * self.logdet
            - 0.5 * self.cols.len() as f64 * self.g.ln()
            - 0.5 * n as f64 * self.a_resid.ln()
    }

    /// `Z^T x_j` in matrix order.
    pub fn z_cross(&self, data: &Dataset, cache: &CrossCache, j: usize) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        v.push(data.col_sum()[j]);
        v.extend(self.cols.iter().map(|&k| cache.pair(data, j, k)));
        v
    }

    fn f_times(&self, v: &[f64]) -> Vec<f64> {
        self.f
            .chunks_exact(self.dim())
            .map(|row| dot(row, v))
            .collect()
    }

    /// Schur complement `d_up`, residual correction `e = x_j^T y - y^T Z F Z^T x_j`
    /// and `F Z^T x_j` for an excluded column.
    fn up_terms(
        &self,
        data: &Dataset,
        cache: &CrossCache,
        j: usize,
    ) -> Result<(f64, f64, Vec<f64>), ModelError> {
        let v = self.z_cross(data, cache, j);
        let u = self.f_times(&v);
        let base = data.col_sq()[j] + 1.0 / self.g;
        let d = base - dot(&v, &u);
        if !(d > SCHUR_RTOL * base) {
            return Err(ModelError::NearSingular { column: j, d });
        }
        let e = data.xty()[j] - dot(&v, &self.fzty);
        Ok((d, e, u))
    }

    /// Includes column `j` by the block (Schur complement) update, `O(p_gamma^2)`
    /// given cached cross products. On error `self` is untouched.
    pub fn add(&mut self, data: &Dataset, cache: &CrossCache, j: usize) -> Result<(), ModelError> {
        if self.cols.contains(&j) {
            return Err(ModelError::Inconsistent(format!(
                "column {j} is already included"
            )));
        }
        let (d, e, u) = self.up_terms(data, cache, j)?;
        let a_new = self.a_resid - e * e / d;
        if !(a_new > 1e-12 * data.yty()) {
            return Err(ModelError::DegenerateFit(a_new));
        }
        let m = self.dim();
        let m1 = m + 1;
        let mut f = vec![0.0; m1 * m1];
        for a in 0..m {
            let ua = u[a] / d;
            for b in 0..m {
                f[a * m1 + b] = self.f[a * m + b] + ua * u[b];
            }
            f[a * m1 + m] = -ua;
            f[m * m1 + a] = -ua;
        }
        f[m * m1 + m] = 1.0 / d;
        let scale = e / d;
        for (b, ua) in self.fzty.iter_mut().zip(&u) {
            *b -= ua * scale;
        }
        self.fzty.push(scale);
        self.zty.push(data.xty()[j]);
        self.f = f;
        self.a_resid = a_new;
        self.logdet += d.ln();
        self.cols.push(j);
        Ok(())
    }

    /// Drops column `j` by the inverse block update, `O(p_gamma^2)`.
    pub fn remove(&mut self, j: usize) -> Result<(), ModelError> {
        let k = self
            .position(j)
            .ok_or_else(|| ModelError::Inconsistent(format!("column {j} is not included")))?;
        let m = self.dim();
        let fkk = self.f[k * m + k];
        if !(fkk > 0.0) {
            return Err(ModelError::Inconsistent(format!(
                "non-positive diagonal {fkk:e} for column {j}"
            )));
        }
        let bk = self.fzty[k];
        let mut f = Vec::with_capacity((m - 1) * (m - 1));
        for a in (0..m).filter(|&a| a != k) {
            let fak = self.f[a * m + k] / fkk;
            for b in (0..m).filter(|&b| b != k) {
                f.push(self.f[a * m + b] - fak * self.f[k * m + b]);
            }
        }
        let fzty: Vec<f64> = (0..m)
            .filter(|&a| a != k)
            .map(|a| self.fzty[a] - self.f[a * m + k] / fkk * bk)
            .collect();
        self.a_resid += bk * bk / fkk;
        self.logdet += fkk.ln();
        self.f = f;
        self.fzty = fzty;
        self.zty.remove(k);
        self.cols.remove(k - 1);
        Ok(())
    }

    /// `log BF_j` for including the excluded column `j`; `self` is not modified.
    pub fn log_bf_up(
        &self,
        data: &Dataset,
        cache: &CrossCache,
        j: usize,
    ) -> Result<f64, ModelError> {
        if self.cols.contains(&j) {
            return Err(ModelError::Inconsistent(format!(
                "column {j} is already included"
            )));
        }
        let (d, e, _) = self.up_terms(data, cache, j)?;
        let q = e * e / (d * self.a_resid);
        if !(q < 1.0) {
            return Err(ModelError::Domain {
                column: j,
                ratio: 1.0 - q,
            });
        }
        Ok(-0.5 * d.ln() - 0.5 * self.g.ln() - 0.5 * data.n() as f64 * (-q).ln_1p())
    }

    /// `log BF_j` for keeping the included column `j`, `O(1)` given `self`.
    pub fn log_bf_down(&self, data: &Dataset, j: usize) -> Result<f64, ModelError> {
        let k = self
            .position(j)
            .ok_or_else(|| ModelError::Inconsistent(format!("column {j} is not included")))?;
        self.log_bf_down_at(data.n(), k)
    }

    fn log_bf_down_at(&self, n: usize, k: usize) -> Result<f64, ModelError> {
        let fkk = self.f(k, k);
        if !(fkk > 0.0) {
            return Err(ModelError::Domain {
                column: self.cols[k - 1],
                ratio: fkk,
            });
        }
        let bk = self.fzty[k];
        // d_down = 1 / F_kk
        Ok(0.5 * fkk.ln() - 0.5 * self.g.ln()
            + 0.5 * n as f64 * (bk * bk / (fkk * self.a_resid)).ln_1p())
    }

    /// Fills `out[j] = p(gamma_j = 1 | gamma_-j, y)` for every column, or the
    /// same conditional under the tempered target `m^t p(gamma)`.
    ///
    /// Excluded columns cost `O(p_gamma^2)` each through the cached cross
    /// products, included ones `O(1)`. Entries whose Bayes factor breaks
    /// down numerically saturate to 0 or 1; the number of saturated entries
    /// is returned.
    pub fn rao_blackwell_row(
        &self,
        data: &Dataset,
        cache: &mut CrossCache,
        prior: &PriorSpec,
        temperature: f64,
        out: &mut [f64],
    ) -> usize {
        let p = data.p();
        assert_eq!(out.len(), p);
        cache.ensure(data, &self.cols);
        let m = self.dim();
        let mut rows: Vec<&[f64]> = Vec::with_capacity(m);
        rows.push(data.col_sum());
        rows.extend(self.cols.iter().map(|&k| cache.get(k).expect("ensured")));

        // quad[j] = v_j^T F v_j and vb[j] = v_j^T F Z^T y with v_j = Z^T x_j.
        let mut quad = vec![0.0; p];
        let mut vb = vec![0.0; p];
        for a in 0..m {
            let ra = rows[a];
            let faa = self.f(a, a);
            let ba = self.fzty[a];
            for ((q, v), &r) in quad.iter_mut().zip(vb.iter_mut()).zip(ra) {
                *q += faa * r * r;
                *v += ba * r;
            }
            for (b, rb) in rows.iter().enumerate().take(a) {
                let c = 2.0 * self.f(a, b);
                for ((q, &x), &z) in quad.iter_mut().zip(ra).zip(*rb) {
                    *q += c * x * z;
                }
            }
        }

        let n = data.n() as f64;
        let half_log_g = 0.5 * self.g.ln();
        let p_gamma = self.cols.len();
        let h_up = prior.conditional_inclusion(p_gamma, p);
        let prior_up = h_up.ln() - (-h_up).ln_1p();
        let mut saturated = 0;
        for j in 0..p {
            let base = data.col_sq()[j] + 1.0 / self.g;
            let d = base - quad[j];
            let e = data.xty()[j] - vb[j];
            out[j] = if !(d > SCHUR_RTOL * base) {
                saturated += 1;
                0.0
            } else {
                let q = e * e / (d * self.a_resid);
                if q < 1.0 {
                    let lbf = -0.5 * d.ln() - half_log_g - 0.5 * n * (-q).ln_1p();
                    logistic(prior_up + temperature * lbf)
                } else {
                    saturated += 1;
                    1.0
                }
            };
        }
        if p_gamma > 0 {
            let h_down = prior.conditional_inclusion(p_gamma - 1, p);
            let prior_down = h_down.ln() - (-h_down).ln_1p();
            for (i, &j) in self.cols.iter().enumerate() {
                out[j] = match self.log_bf_down_at(data.n(), i + 1) {
                    Ok(lbf) => logistic(prior_down + temperature * lbf),
                    Err(_) => {
                        saturated += 1;
                        1.0
                    }
                };
            }
        }
        saturated
    }

    /// Largest relative deviation of `F`, `A` and the log-determinant from
    /// `other`, which must describe the same columns in the same order.
    pub fn max_rel_deviation(&self, other: &Self) -> f64 {
        assert_eq!(self.cols, other.cols);
        let fscale = other.f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let fdev = self
            .f
            .iter()
            .zip(&other.f)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
            / fscale;
        let adev = (self.a_resid - other.a_resid).abs() / other.a_resid.abs();
        let ldev = (self.logdet - other.logdet).abs() / other.logdet.abs().max(1.0);
        fdev.max(adev).max(ldev)
    }
}

#[inline]
fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
