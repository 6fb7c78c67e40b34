//! Small statistics toolbox: complex first/second moments, normal
//! quantiles, Kolmogorov–Smirnov distances, and QQ data.

use num_complex::Complex64;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Mean of a complex sample.
pub fn mean(samples: &[Complex64]) -> Complex64 {
    samples.iter().sum::<Complex64>() / samples.len().max(1) as f64
}

/// (variance nu = E|s - mean|^2, pseudo-variance wp = E (s - mean)^2).
pub fn complex_variance(samples: &[Complex64]) -> (f64, Complex64) {
    let m = mean(samples);
    let n = samples.len().max(1) as f64;
    let mut nu = 0.0;
    let mut wp = Complex64::default();
    for s in samples {
        let d = s - m;
        nu += d.norm_sqr();
        wp += d * d;
    }
    (nu / n, wp / n)
}

/// Magnitude of the Pearson-type complex correlation
/// |E (x - mx) conj(y - my)| / sqrt(Var x Var y).
pub fn complex_corr(x: &[Complex64], y: &[Complex64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let (mx, my) = (mean(x), mean(y));
    let mut cov = Complex64::default();
    let (mut vx, mut vy) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        cov += da * db.conj();
        vx += da.norm_sqr();
        vy += db.norm_sqr();
    }
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    cov.norm() / (vx * vy).sqrt()
}

/// Pearson correlation of two real samples.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Sample quantile (linear interpolation) of an unsorted slice.
pub fn quantile(data: &[f64], p: f64) -> f64 {
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, p)
}

/// Sample quantile of pre-sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0);
    let pos = p.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let w = pos - lo as f64;
        sorted[lo] * (1.0 - w) + sorted[hi] * w
    }
}

pub fn median(data: &[f64]) -> f64 {
    quantile(data, 0.5)
}

/// QQ pairs of a real sample: (sorted standardized data, standard normal
/// quantiles at plotting positions (i - 1/2)/n).
pub fn normal_qq_pairs(data: &[f64]) -> Vec<(f64, f64)> {
    let n = data.len();
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.iter().sum::<f64>() / n as f64;
    let sd = (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n as f64).sqrt();
    let sd = if sd > 0.0 { sd } else { 1.0 };
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            ((x - m) / sd, normal_quantile((i as f64 + 0.5) / n as f64))
        })
        .collect()
}

/// Correlation coefficient of the QQ pairs.
pub fn qq_correlation(data: &[f64]) -> f64 {
    let pairs = normal_qq_pairs(data);
    let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    pearson(&x, &y)
}

/// One-sample KS distance of `data` against a CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(data: &[f64], cdf: F) -> f64 {
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i as f64 + 1.0) / n - f).abs());
    }
    d
}

/// KS distance of standardized data against the standard normal.
pub fn ks_normal(data: &[f64]) -> f64 {
    let n = data.len() as f64;
    let m = data.iter().sum::<f64>() / n;
    let sd = (data.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n).sqrt();
    if sd == 0.0 {
        return 1.0;
    }
    ks_distance(data, |x| normal_cdf((x - m) / sd))
}

/// Asymptotic p-value of the one-sample KS statistic
/// (Kolmogorov distribution with the Stephens small-sample correction).
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-8 {
        return 1.0;
    }
    let mut p = 0.0;
    for k in 1..101 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        p += if k % 2 == 1 { term } else { -term };
        if term < 1e-12 {
            break;
        }
    }
    (2.0 * p).clamp(0.0, 1.0)
}

/// Two-sample KS distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < x.len() && j < y.len() {
        // advance through ties on both sides before measuring
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] == v {
            i += 1;
        }
        while j < y.len() && y[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / x.len() as f64 - j as f64 / y.len() as f64).abs());
    }
    d
}

/// Critical two-sample KS distance at level `alpha`.
pub fn ks_two_sample_critical(n: usize, m: usize, alpha: f64) -> f64 {
    let c = (-0.5 * (alpha / 2.0).ln()).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// Estimated variance/pseudo-variance of a complex-normal sample together
/// with a normality statistic; needs at least 30 samples.
pub fn fit_complex_normal(samples: &[Complex64]) -> Result<(f64, Complex64, f64)> {
    if samples.len() < 30 {
        return Err(Error::TooFewSamples { need: 30, got: samples.len() });
    }
    let (nu, wp) = complex_variance(samples);
    let re: Vec<f64> = samples.iter().map(|s| s.re).collect();
    let im: Vec<f64> = samples.iter().map(|s| s.im).collect();
    let fit = ks_normal(&re).max(ks_normal(&im));
    Ok((nu, wp, fit))
}
