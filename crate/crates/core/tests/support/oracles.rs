//! Reference computations that share no code with the library.

use std::f64::consts::PI;

/// Gauss–Hermite nodes and weights for `∫ e^{-t^2} f(t) dt`, by Newton
/// iteration on the orthonormal Hermite recurrence.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let pim4 = PI.powf(-0.25);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-14 {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// BPSK mutual information (bits) on `y = sqrt(snr) x + z`, `z ~ CN(0, 1)`.
///
/// Only `Re z ~ N(0, 1/2)` matters:
/// `I = 1 - E_u log2(1 + exp(-4 snr - 4 sqrt(snr) u))`, and the density of
/// `u` is `e^{-u^2} / sqrt(pi)`, which is the Gauss–Hermite weight.
pub fn bpsk_siso_mi(snr: f64, nodes: usize) -> f64 {
    let (t, w) = gauss_hermite(nodes);
    let a = snr.sqrt();
    let e: f64 = t
        .iter()
        .zip(&w)
        .map(|(&u, &wi)| {
            let arg = -4.0 * a * a - 4.0 * a * u;
            let softplus = if arg > 0.0 {
                arg + (-arg).exp().ln_1p()
            } else {
                arg.exp().ln_1p()
            };
            wi * softplus / std::f64::consts::LN_2
        })
        .sum();
    1.0 - e / PI.sqrt()
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `ln Pr{X = i}` for `X ~ Bin(n, p)`, `i = 0..=n`, by the pmf ratio recursion.
fn binomial_log_pmf(n: u64, p: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut lp = n as f64 * (-p).ln_1p();
    out.push(lp);
    let odds = (p / (1.0 - p)).ln();
    for i in 0..n {
        lp += ((n - i) as f64 / (i + 1) as f64).ln() + odds;
        out.push(lp);
    }
    out
}

/// Exact binomial interval by bisection on binomial tail sums.
pub fn clopper_pearson_by_tails(k: u64, n: u64, confidence: f64) -> (f64, f64) {
    let half = (1.0 - confidence) / 2.0;
    let bisect = |f: &dyn Fn(f64) -> f64| {
        // f is increasing in p; find f(p) = 0.
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let low = if k == 0 {
        0.0
    } else {
        // Pr{X >= k; p} = half, increasing in p.
        bisect(&|p| log_sum_exp(&binomial_log_pmf(n, p)[k as usize..]) - half.ln())
    };
    let high = if k == n {
        1.0
    } else {
        // Pr{X <= k; p} = half, decreasing in p.
        bisect(&|p| half.ln() - log_sum_exp(&binomial_log_pmf(n, p)[..=k as usize]))
    };
    (low, high)
}
