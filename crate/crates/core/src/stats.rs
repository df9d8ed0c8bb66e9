//! Binomial tables and confidence intervals.

/// `Pr(Bin(n, p) = w)` for `w = 0..=n`.
///
/// Ratios `pmf[w+1] / pmf[w]` are chained outward from the mode and the table is
/// normalized, which keeps the relative error near `sqrt(n)` ulps.
pub fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    let mut v = vec![0.0; n + 1];
    if p <= 0.0 {
        v[0] = 1.0;
        return v;
    }
    if p >= 1.0 {
        v[n] = 1.0;
        return v;
    }
    let odds = p / (1.0 - p);
    let mode = (((n + 1) as f64 * p).floor() as usize).min(n);
    v[mode] = 1.0;
    for w in mode..n {
        v[w + 1] = v[w] * ((n - w) as f64 / (w + 1) as f64) * odds;
    }
    for w in (0..mode).rev() {
        v[w] = v[w + 1] * ((w + 1) as f64 / (n - w) as f64) / odds;
    }
    let total: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= total);
    v
}

/// `Pr(Bin(n, p) <= w)` for `w = 0..=n`; the last entry is pinned to 1.
pub fn binomial_cdf(n: usize, p: f64) -> Vec<f64> {
    let pmf = binomial_pmf(n, p);
    let mut acc = 0.0;
    let mut cdf: Vec<f64> = pmf
        .iter()
        .map(|x| {
            acc += x;
            acc.min(1.0)
        })
        .collect();
    cdf[n] = 1.0;
    cdf
}

/// 97.5% standard normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval at 95% for `successes` out of `trials`: `(center, half_width)`.
pub fn wilson(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = Z95 * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    (center, half)
}

/// Normal-approximation 95% half-width of a sample mean from exact integer moments.
pub fn mean_half_width(sum: u128, sum_sq: u128, count: u64) -> f64 {
    if count < 2 {
        return f64::INFINITY;
    }
    let n = count as f64;
    let mean = sum as f64 / n;
    let var = ((sum_sq as f64 - n * mean * mean) / (n - 1.0)).max(0.0);
    Z95 * (var / n).sqrt()
}
