use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Effective sample size with flags for the two special cases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ess {
    pub ess: f64,
    /// Antithetic series: the estimate exceeded `10 N` and was capped.
    pub capped: bool,
    /// Constant series: reported as `N`.
    pub degenerate: bool,
}

/// Autocovariances at lags `0..n` (divisor `n`) via zero-padded FFT.
fn autocovariance(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let len = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = x
        .iter()
        .map(|v| Complex::new(v - mean, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(len)
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    for c in buf.iter_mut() {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    buf.iter()
        .take(n)
        .map(|c| c.re / (len as f64 * n as f64))
        .collect()
}

/// Effective sample size by the initial monotone sequence estimator: sums of
/// adjacent autocorrelation pairs are accumulated while positive and forced
/// to be non-increasing.
pub fn ess_univariate(x: &[f64]) -> Result<Ess> {
    let n = x.len();
    if n < 10 {
        return Err(Error::Config(format!(
            "ESS needs at least 10 values, got {n}"
        )));
    }
    let nf = n as f64;
    let acov = autocovariance(x);
    let scale = x
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    if acov[0] <= 1e-24 * scale * scale {
        return Ok(Ess {
            ess: nf,
            capped: false,
            degenerate: true,
        });
    }
    let rho = |k: usize| acov[k] / acov[0];
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut m = 0;
    while 2 * m + 1 < n {
        let pair = rho(2 * m) + rho(2 * m + 1);
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev);
        sum += pair;
        prev = pair;
        m += 1;
    }
    let tau = -1.0 + 2.0 * sum;
    let cap = 10.0 * nf;
    if tau <= nf / cap {
        return Ok(Ess {
            ess: cap,
            capped: true,
            degenerate: false,
        });
    }
    Ok(Ess {
        ess: nf / tau,
        capped: false,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{standard_normal, stream_rng, uniform, Stream};

    #[test]
    fn autocovariance_matches_direct_sum() {
        let x = [1.0, 3.0, -2.0, 0.5, 4.0, 2.0, -1.0];
        let acov = autocovariance(&x);
        let n = x.len();
        let m = x.iter().sum::<f64>() / n as f64;
        for k in 0..n {
            let direct: f64 =
                (0..n - k).map(|t| (x[t] - m) * (x[t + k] - m)).sum::<f64>() / n as f64;
            assert!((acov[k] - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn iid_bernoulli_near_n() {
        let mut rng = stream_rng(4, Stream::Data);
        let x: Vec<f64> = (0..100_000)
            .map(|_| (uniform(&mut rng) < 0.3) as u8 as f64)
            .collect();
        let e = ess_univariate(&x).unwrap();
        let r = e.ess / x.len() as f64;
        assert!((0.9..=1.1).contains(&r), "ratio {r}");
    }

    #[test]
    fn ar1_matches_closed_form() {
        let mut rng = stream_rng(5, Stream::Data);
        let phi = 0.9;
        let mut v = 0.0;
        let x: Vec<f64> = (0..200_000)
            .map(|_| {
                v = phi * v + standard_normal(&mut rng);
                v
            })
            .collect();
        let r = ess_univariate(&x).unwrap().ess / x.len() as f64;
        let expected = (1.0 - phi) / (1.0 + phi);
        assert!((r / expected - 1.0).abs() < 0.2, "ratio {r}");
    }

    #[test]
    fn alternating_series_is_capped() {
        let x: Vec<f64> = (0..1000)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let e = ess_univariate(&x).unwrap();
        assert!(e.capped);
        assert_eq!(e.ess, 10_000.0);
    }

    #[test]
    fn constant_series_is_degenerate() {
        let e = ess_univariate(&[2.5; 50]).unwrap();
        assert!(e.degenerate);
        assert_eq!(e.ess, 50.0);
        assert!(ess_univariate(&[1.0; 5]).is_err());
    }
}
