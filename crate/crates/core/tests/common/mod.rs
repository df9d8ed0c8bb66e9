//! Independent oracles shared by the integration tests.

/// `(D_CLE, D_CFE)` for `s` by direct per-symbol products and enumerated divergence probabilities.
#[allow(dead_code)]
pub fn naive_bounds(s: &[usize], p: f64, gamma: f64, limit: f64, grid: &[f64]) -> (f64, f64) {
    let n = s.len();
    let k = s[n - 1];
    let sv = |t: usize| if t == 0 { 0 } else { s[t - 1] };
    let b: Vec<usize> = std::iter::once(0)
        .chain((1..=n).filter(|&t| sv(t) > sv(t - 1)))
        .collect();
    let hf = b.len() - 1;
    let lvl = |h: usize| sv(b[h]);
    let r_of = |h: usize| (1..=n).filter(|&t| sv(t) == lvl(h)).max().unwrap();
    // Pr(τ_h = b_{h'}): enumerate competitor prefixes against the all-zero message.
    let tau = |h: usize| -> Vec<f64> {
        let total = 1u64 << lvl(h);
        let mut counts = vec![0u64; h + 1];
        for mb in 0..total {
            let last = (0..=h).filter(|&hp| mb & ((1u64 << lvl(hp)) - 1) == 0).max().unwrap();
            counts[last] += 1;
        }
        counts.iter().map(|&c| c as f64 / total as f64).collect()
    };
    let r = (1.0 - p) / p;
    let abar = |th: f64, t: usize| 0.5 + 0.5 * r.powf(-th * gamma.powi(t as i32 - 1));
    let a = |th: f64, t: usize| 1.0 - p + p * r.powf(th * gamma.powi(t as i32 - 1));
    let prod = |f: &dyn Fn(usize) -> f64, from: usize, to: usize| (from..=to).map(f).product::<f64>();

    let cle = grid
        .iter()
        .map(|&x| {
            let th = 1.0 / (1.0 + x);
            let mut sum = 2f64.powi(lvl(1) as i32) / limit;
            for h in 1..hf {
                let tau_h = tau(h);
                for hp in 0..=h {
                    let v = 2f64.powi(lvl(h + 1) as i32) * tau_h[hp] / limit;
                    let start = b[hp + 1];
                    if start > r_of(h) {
                        sum += v;
                    } else {
                        let m = prod(&|t| abar(th, t), start, r_of(h)) * prod(&|t| a(th, t), start, n);
                        sum += v * m.powf(x);
                    }
                }
            }
            sum
        })
        .fold(f64::INFINITY, f64::min);
    let tau_full = tau(hf);
    let cfe = grid
        .iter()
        .map(|&x| {
            let th = 1.0 / (1.0 + x);
            (0..hf)
                .map(|h| {
                    let w = 2f64.powi(k as i32) * tau_full[h];
                    (w * prod(&|t| abar(th, t) * a(th, t), b[h + 1], n)).powf(x)
                })
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min);
    (cle, cfe)
}
