#![allow(dead_code)]

use bvsel::rng::standard_normal;
use bvsel::Dataset;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Dense statistics of one model built the slow way: the Gram matrix from
/// explicit row sums and a Gauss-Jordan inverse with partial pivoting.
pub struct Dense {
    pub f: Vec<Vec<f64>>,
    pub a_resid: f64,
    pub logdet: f64,
    pub log_marginal: f64,
}

pub fn dense(data: &Dataset, g: f64, cols: &[usize]) -> Dense {
    let n = data.n();
    let m = cols.len() + 1;
    let z = |i: usize, a: usize| {
        if a == 0 {
            1.0
        } else {
            data.column(cols[a - 1])[i]
        }
    };
    let mut gram = vec![vec![0.0; m]; m];
    let mut zty = vec![0.0; m];
    for i in 0..n {
        for a in 0..m {
            zty[a] += z(i, a) * data.y()[i];
            for b in 0..m {
                gram[a][b] += z(i, a) * z(i, b);
            }
        }
    }
    for (a, row) in gram.iter_mut().enumerate().skip(1) {
        row[a] += 1.0 / g;
    }
    let (f, logdet) = gauss_jordan(gram);
    let fzty: Vec<f64> = f
        .iter()
        .map(|r| r.iter().zip(&zty).map(|(x, y)| x * y).sum())
        .collect();
    let yty: f64 = data.y().iter().map(|v| v * v).sum();
    let a_resid = yty - zty.iter().zip(&fzty).map(|(x, y)| x * y).sum::<f64>();
    let log_marginal =
        -0.5 * logdet - 0.5 * cols.len() as f64 * g.ln() - 0.5 * n as f64 * a_resid.ln();
    Dense {
        f,
        a_resid,
        logdet,
        log_marginal,
    }
}

/// Inverse and log-determinant of a positive definite matrix.
pub fn gauss_jordan(mut a: Vec<Vec<f64>>) -> (Vec<Vec<f64>>, f64) {
    let m = a.len();
    let mut inv: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| (i == j) as u8 as f64).collect())
        .collect();
    let mut logdet = 0.0;
    for c in 0..m {
        let piv = (c..m)
            .max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))
            .unwrap();
        a.swap(c, piv);
        inv.swap(c, piv);
        let d = a[c][c];
        logdet += d.abs().ln();
        for k in 0..m {
            a[c][k] /= d;
            inv[c][k] /= d;
        }
        for r in 0..m {
            if r != c {
                let factor = a[r][c];
                for k in 0..m {
                    a[r][k] -= factor * a[c][k];
                    inv[r][k] -= factor * inv[c][k];
                }
            }
        }
    }
    (inv, logdet)
}

/// Dense `log m(gamma with j) - log m(gamma without j)`.
pub fn dense_log_bf(data: &Dataset, g: f64, cols: &[usize], j: usize) -> f64 {
    let without: Vec<usize> = cols.iter().copied().filter(|&k| k != j).collect();
    let mut with = without.clone();
    with.push(j);
    dense(data, g, &with).log_marginal - dense(data, g, &without).log_marginal
}

/// Correlated Gaussian design with a sparse signal.
pub fn random_dataset(seed: u64, n: usize, p: usize) -> Dataset {
    let mut rng = StdRng::seed_from_u64(seed);
    let rho: f64 = rng.random_range(0.0..0.7);
    let mut cols = vec![vec![0.0; n]; p];
    for i in 0..n {
        let mut prev = standard_normal(&mut rng);
        for (j, col) in cols.iter_mut().enumerate() {
            let e = standard_normal(&mut rng);
            let v = if j == 0 {
                prev
            } else {
                rho * prev + (1.0 - rho * rho).sqrt() * e
            };
            col[i] = v;
            prev = v;
        }
    }
    let active = rng.random_range(1..=p.min(3));
    let y = (0..n)
        .map(|i| {
            let signal: f64 = (0..active).map(|j| (1.0 + j as f64) * cols[j][i]).sum();
            signal + 1.5 * standard_normal(&mut rng) + 0.7
        })
        .collect();
    Dataset::from_columns(y, cols).unwrap()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Relative error with a unit floor on the scale, for quantities that may
/// sit near zero.
pub fn scaled_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Exact transition matrix of the Metropolis-Hastings chain with fixed
/// proposal `params` on a product target, over the `2^p` models by mask.
pub fn transition_matrix(
    target: &bvsel::idealized::ProductTarget,
    params: &bvsel::ProposalParams,
) -> Vec<Vec<f64>> {
    use bvsel::proposal::{acceptance_prob, log_proposal_prob};
    use bvsel::GammaVector;
    let p = target.p();
    let m = 1usize << p;
    let models: Vec<GammaVector> = (0..m as u64)
        .map(|k| GammaVector::from_mask(p, k))
        .collect();
    let mut mat = vec![vec![0.0; m]; m];
    for x in 0..m {
        let mut off = 0.0;
        for y in 0..m {
            if x == y {
                continue;
            }
            let fwd = log_proposal_prob(params, &models[x], &models[y]);
            if fwd == f64::NEG_INFINITY {
                continue;
            }
            let rev = log_proposal_prob(params, &models[y], &models[x]);
            let a = acceptance_prob(
                target.log_mass(&models[x]),
                target.log_mass(&models[y]),
                fwd,
                rev,
            );
            mat[x][y] = fwd.exp() * a;
            off += mat[x][y];
        }
        mat[x][x] = 1.0 - off;
    }
    mat
}

/// Asymptotic variance of `f` under the chain `mat` with stationary law
/// `pi`, from the fundamental matrix `Z = (I - P + 1 pi^T)^-1`:
/// `sigma^2 = 2 <fc, Z fc>_pi - Var_pi f` with `fc = f - E_pi f`.
pub fn spectral_asym_var(mat: &[Vec<f64>], pi: &[f64], f: &[f64]) -> f64 {
    let m = pi.len();
    let mean: f64 = pi.iter().zip(f).map(|(a, b)| a * b).sum();
    let fc: Vec<f64> = f.iter().map(|v| v - mean).collect();
    let var: f64 = pi.iter().zip(&fc).map(|(a, b)| a * b * b).sum();
    let kernel: Vec<Vec<f64>> = (0..m)
        .map(|x| {
            (0..m)
                .map(|y| (x == y) as u8 as f64 - mat[x][y] + pi[y])
                .collect()
        })
        .collect();
    let (z, _) = gauss_jordan(kernel);
    let zf: Vec<f64> = z
        .iter()
        .map(|r| r.iter().zip(&fc).map(|(a, b)| a * b).sum())
        .collect();
    2.0 * (0..m).map(|x| pi[x] * fc[x] * zf[x]).sum::<f64>() - var
}
