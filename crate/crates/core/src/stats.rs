//! Order statistics, slope fits and goodness-of-fit helpers.

use crate::error::{Error, Result};

/// 1-based rank `⌈q·m⌉` of the lower empirical `q`-quantile, clamped to `[1, m]`.
pub fn quantile_rank(q: f64, m: usize) -> usize {
    // absorb representation error in products like 0.1·400
    let raw = (q * m as f64 - 1e-9 * m as f64).ceil();
    (raw.max(1.0) as usize).min(m)
}

/// The `⌈q·m⌉`-th smallest value of `sorted`.
pub fn lower_quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    sorted[quantile_rank(q, sorted.len()) - 1]
}

pub fn sort_f64(xs: &mut [f64]) {
    xs.sort_unstable_by(f64::total_cmp);
}

/// Lower median `⌈m/2⌉`-th order statistic.
pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    sort_f64(&mut v);
    lower_quantile(&v, 0.5)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Degenerate(format!(
            "slope needs at least two paired points, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::Degenerate(
            "log-log slope needs strictly positive finite values".into(),
        ));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    linear_slope(&lx, &ly)
}

fn linear_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all abscissae coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Kolmogorov–Smirnov distance between the sample's empirical CDF and Unif[0,1].
pub fn ks_statistic_uniform(mut xs: Vec<f64>) -> f64 {
    sort_f64(&mut xs);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0f64, |acc, (i, &x)| {
        let hi = (i + 1) as f64 / n - x;
        let lo = x - i as f64 / n;
        acc.max(hi).max(lo)
    })
}

/// Ranks `(lo, hi)` (1-based) bracketing the `q`-quantile of `m` draws with
/// roughly `z`-sigma confidence, from the normal approximation of the
/// binomial count below the true quantile.
pub fn quantile_confidence_ranks(q: f64, m: usize, z: f64) -> (usize, usize) {
    let mf = m as f64;
    let half = z * (mf * q * (1.0 - q)).sqrt();
    let lo = (mf * q - half).floor().max(1.0) as usize;
    let hi = ((mf * q + half).ceil() as usize).clamp(1, m);
    (lo.min(m), hi)
}
