use serde::Serialize;

use crate::error::{Error, Result};

/// Per-variable time-standardized efficiency of sampler A over sampler B.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Efficiency {
    /// `(s2_B t_B) / (s2_A t_A)`; `+inf` when only A has zero variance and
    /// NaN when both do.
    pub ratios: Vec<f64>,
    /// Median over the defined ratios (infinite ones included).
    pub median: f64,
    /// Variables where A had zero variance and B did not.
    pub infinite: usize,
    /// Variables where both had zero variance.
    pub undefined: usize,
}

/// Median of the non-NaN values; NaN for an empty input.
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Per-variable sample variance (divisor `R - 1`) of estimates from `R`
/// replicate runs.
pub fn replicate_variances(estimates: &[Vec<f64>]) -> Result<Vec<f64>> {
    let r = estimates.len();
    if r < 2 {
        return Err(Error::Config(format!(
            "need at least 2 replicates, got {r}"
        )));
    }
    let p = estimates[0].len();
    if estimates.iter().any(|e| e.len() != p) {
        return Err(Error::Config("replicate estimates differ in length".into()));
    }
    Ok((0..p)
        .map(|j| {
            let mean = estimates.iter().map(|e| e[j]).sum::<f64>() / r as f64;
            estimates.iter().map(|e| (e[j] - mean).powi(2)).sum::<f64>() / (r - 1) as f64
        })
        .collect())
}

/// `r_j = (s2_B,j t_B) / (s2_A,j t_A)` and their median.
pub fn relative_efficiency(
    var_a: &[f64],
    time_a: f64,
    var_b: &[f64],
    time_b: f64,
) -> Result<Efficiency> {
    if var_a.len() != var_b.len() {
        return Err(Error::Config("variance vectors differ in length".into()));
    }
    if !(time_a > 0.0 && time_b > 0.0) {
        return Err(Error::Config(format!(
            "times must be positive, got {time_a} and {time_b}"
        )));
    }
    let mut infinite = 0;
    let mut undefined = 0;
    let ratios: Vec<f64> = var_a
        .iter()
        .zip(var_b)
        .map(|(&a, &b)| {
            let num = b * time_b;
            let den = a * time_a;
            if den == 0.0 && num == 0.0 {
                undefined += 1;
                f64::NAN
            } else if den == 0.0 {
                infinite += 1;
                f64::INFINITY
            } else {
                num / den
            }
        })
        .collect();
    Ok(Efficiency {
        median: median(&ratios),
        ratios,
        infinite,
        undefined,
    })
}
