//! Small numerical helpers: stable log-mean-exp, moment summaries,
//! chain diagnostics, and a three-regressor least-squares fit.

use crate::real::Real;

/// log of the arithmetic mean of exp(x_i), computed max-shifted.
///
/// Returns negative infinity when every term is negative infinity (an
/// "impossible observation" under all sampled parameters).
pub fn log_mean_exp<R: Real>(values: &[R]) -> R {
    assert!(!values.is_empty(), "log_mean_exp of an empty slice");
    let max = values.iter().cloned().fold(R::neg_infinity(), R::max);
    if max == R::neg_infinity() {
        return R::neg_infinity();
    }
    let sum: R = values.iter().map(|&v| (v - max).exp()).sum();
    max + (sum / R::of(values.len() as f64)).ln()
}

/// Sample mean.
pub fn mean<R: Real>(values: &[R]) -> R {
    let sum: R = values.iter().cloned().sum();
    sum / R::of(values.len() as f64)
}

/// Unbiased sample variance (n-1 denominator); zero for fewer than two points.
pub fn sample_variance<R: Real>(values: &[R]) -> R {
    let n = values.len();
    if n < 2 {
        return R::zero();
    }
    let m = mean(values);
    let ss: R = values.iter().map(|&v| (v - m) * (v - m)).sum();
    ss / R::of((n - 1) as f64)
}

/// Standard error of the mean: sd/sqrt(n). `None` for n < 2.
pub fn standard_error<R: Real>(values: &[R]) -> Option<R> {
    if values.len() < 2 {
        return None;
    }
    Some((sample_variance(values) / R::of(values.len() as f64)).sqrt())
}

/// Split-R̂ of Gelman et al.: each chain is halved, then the classic
/// potential scale reduction factor is computed over the 2m half-chains.
///
/// Chains shorter than 4 kept draws yield `f64::NAN`.
pub fn split_rhat<R: Real>(chains: &[&[R]]) -> f64 {
    let len = chains.iter().map(|c| c.len()).min().unwrap_or(0);
    if len < 4 {
        return f64::NAN;
    }
    let half = len / 2;
    let mut means = Vec::with_capacity(chains.len() * 2);
    let mut vars = Vec::with_capacity(chains.len() * 2);
    for chain in chains {
        for part in [&chain[..half], &chain[half..2 * half]] {
            means.push(mean(part).to_f64_lossy());
            vars.push(sample_variance(part).to_f64_lossy());
        }
    }
    let m = means.len() as f64;
    let w = vars.iter().sum::<f64>() / m;
    let grand = means.iter().sum::<f64>() / m;
    let b = half as f64 * means.iter().map(|&x| (x - grand).powi(2)).sum::<f64>() / (m - 1.0);
    if w <= 0.0 {
        // All half-chains constant: either perfectly converged (b == 0)
        // or stuck in distinct modes.
        return if b <= 0.0 { 1.0 } else { f64::INFINITY };
    }
    let var_plus = (half as f64 - 1.0) / half as f64 * w + b / half as f64;
    (var_plus / w).sqrt()
}

/// Effective sample size summed over chains, from the initial positive
/// sequence of lag autocorrelations.
pub fn effective_sample_size<R: Real>(chains: &[&[R]]) -> f64 {
    chains.iter().map(|c| chain_ess(c)).sum()
}

fn chain_ess<R: Real>(chain: &[R]) -> f64 {
    let n = chain.len();
    if n < 4 {
        return n as f64;
    }
    let m = mean(chain).to_f64_lossy();
    let var = chain
        .iter()
        .map(|&x| (x.to_f64_lossy() - m).powi(2))
        .sum::<f64>()
        / n as f64;
    if var <= 0.0 {
        return n as f64;
    }
    let max_lag = (n / 2).min(200);
    let mut rho_sum = 0.0;
    for lag in 1..max_lag {
        let mut cov = 0.0;
        for i in 0..n - lag {
            cov += (chain[i].to_f64_lossy() - m) * (chain[i + lag].to_f64_lossy() - m);
        }
        let rho = cov / ((n - lag) as f64) / var;
        if rho < 0.05 {
            break;
        }
        rho_sum += rho;
    }
    n as f64 / (1.0 + 2.0 * rho_sum)
}

/// Ordinary least squares for y ≈ b0 + b1·x1 + b2·x2.
pub struct Ols3 {
    pub coef: [f64; 3],
    pub se: [f64; 3],
    /// Condition estimate of the (column-scaled) normal matrix.
    pub condition: f64,
}

/// Fit the three-regressor model by solving the normal equations.
///
/// Returns `None` when the scaled normal matrix is numerically singular.
pub fn ols3(x1: &[f64], x2: &[f64], y: &[f64]) -> Option<Ols3> {
    let n = y.len();
    assert!(x1.len() == n && x2.len() == n);
    if n < 4 {
        return None;
    }
    // Column norms for scaling, so the condition estimate is meaningful.
    let cols: [Vec<f64>; 3] = [vec![1.0; n], x1.to_vec(), x2.to_vec()];
    let norms: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    if norms.contains(&0.0) {
        return None;
    }
    let mut ata = [[0.0f64; 3]; 3];
    let mut aty = [0.0f64; 3];
    for i in 0..3 {
        for j in 0..3 {
            ata[i][j] = cols[i]
                .iter()
                .zip(&cols[j])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / (norms[i] * norms[j]);
        }
        aty[i] = cols[i].iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / norms[i];
    }
    let (inv, det) = invert3(&ata)?;
    // Frobenius-norm condition estimate of the scaled normal matrix.
    let fro = |m: &[[f64; 3]; 3]| {
        m.iter()
            .flat_map(|r| r.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    };
    let condition = fro(&ata) * fro(&inv);
    if !det.is_finite() || condition > 1e12 {
        return None;
    }
    let mut coef_scaled = [0.0f64; 3];
    for i in 0..3 {
        for j in 0..3 {
            coef_scaled[i] += inv[i][j] * aty[j];
        }
    }
    let coef: Vec<f64> = coef_scaled
        .iter()
        .zip(&norms)
        .map(|(c, nm)| c / nm)
        .collect();
    // Residual variance and classic OLS standard errors.
    let mut rss = 0.0;
    for k in 0..n {
        let fit = coef[0] + coef[1] * x1[k] + coef[2] * x2[k];
        rss += (y[k] - fit).powi(2);
    }
    let sigma2 = rss / (n - 3) as f64;
    let mut se = [0.0f64; 3];
    for i in 0..3 {
        se[i] = (sigma2 * inv[i][i]).max(0.0).sqrt() / norms[i];
    }
    Some(Ols3 {
        coef: [coef[0], coef[1], coef[2]],
        se,
        condition,
    })
}

fn invert3(m: &[[f64; 3]; 3]) -> Option<([[f64; 3]; 3], f64)> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det.abs() < 1e-300 {
        return None;
    }
    let mut inv = [[0.0f64; 3]; 3];
    inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
    inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
    inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
    inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
    inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
    inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
    inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
    inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
    inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
    Some((inv, det))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn log_mean_exp_matches_direct() {
        let vals = [-1.0f64, -2.0, -0.5];
        let direct = (vals.iter().map(|v| v.exp()).sum::<f64>() / 3.0).ln();
        assert_abs_diff_eq!(log_mean_exp(&vals), direct, epsilon = 1e-14);
    }

    #[test]
    fn log_mean_exp_handles_large_magnitudes() {
        // exp(-1e4) underflows; the shift keeps the answer exact.
        let vals = [-10_000.0f64, -10_000.0];
        assert_abs_diff_eq!(log_mean_exp(&vals), -10_000.0, epsilon = 1e-10);
    }

    #[test]
    fn log_mean_exp_all_impossible() {
        let vals = [f64::NEG_INFINITY, f64::NEG_INFINITY];
        assert_eq!(log_mean_exp(&vals), f64::NEG_INFINITY);
    }

    #[test]
    fn moments() {
        let vals = [1.0f64, 2.0, 3.0, 4.0];
        assert_abs_diff_eq!(mean(&vals), 2.5);
        assert_abs_diff_eq!(sample_variance(&vals), 5.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            standard_error(&vals).unwrap(),
            (5.0f64 / 3.0 / 4.0).sqrt(),
            epsilon = 1e-15
        );
        assert!(standard_error(&[1.0f64]).is_none());
    }

    #[test]
    fn rhat_near_one_for_iid_chains() {
        use rand::Rng;
        let mut rng = crate::seed::rng(3, "rhat", &[]);
        let chains: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..500).map(|_| rng.random::<f64>()).collect())
            .collect();
        let views: Vec<&[f64]> = chains.iter().map(|c| c.as_slice()).collect();
        let r = split_rhat(&views);
        assert!((r - 1.0).abs() < 0.05, "rhat {r}");
    }

    #[test]
    fn rhat_detects_separated_chains() {
        let a: Vec<f64> = (0..100).map(|i| (i % 7) as f64 * 0.01).collect();
        let b: Vec<f64> = (0..100).map(|i| 10.0 + (i % 7) as f64 * 0.01).collect();
        let r = split_rhat(&[&a, &b]);
        assert!(r > 3.0, "rhat {r}");
    }

    #[test]
    fn ess_shrinks_with_autocorrelation() {
        use rand::Rng;
        let mut rng = crate::seed::rng(4, "ess", &[]);
        let n = 2000;
        let mut iid = Vec::with_capacity(n);
        let mut ar = Vec::with_capacity(n);
        let mut x = 0.0f64;
        for _ in 0..n {
            let e: f64 = rng.random::<f64>() - 0.5;
            iid.push(e);
            x = 0.9 * x + e;
            ar.push(x);
        }
        let ess_iid = effective_sample_size(&[iid.as_slice()]);
        let ess_ar = effective_sample_size(&[ar.as_slice()]);
        assert!(ess_iid > 0.5 * n as f64, "iid ess {ess_iid}");
        assert!(ess_ar < 0.25 * n as f64, "ar ess {ess_ar}");
    }

    #[test]
    fn ols3_recovers_exact_coefficients() {
        let x1: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let x2: Vec<f64> = (0..20).map(|i| (1.0 + i as f64).ln()).collect();
        let y: Vec<f64> = x1
            .iter()
            .zip(&x2)
            .map(|(a, b)| 2.0 - 0.5 * a + 3.0 * b)
            .collect();
        let fit = ols3(&x1, &x2, &y).unwrap();
        assert_abs_diff_eq!(fit.coef[0], 2.0, epsilon = 1e-8);
        assert_abs_diff_eq!(fit.coef[1], -0.5, epsilon = 1e-8);
        assert_abs_diff_eq!(fit.coef[2], 3.0, epsilon = 1e-8);
    }

    #[test]
    fn ols3_rejects_collinear_columns() {
        let x1: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let x2: Vec<f64> = x1.iter().map(|v| 2.0 * v).collect();
        let y = x1.clone();
        assert!(ols3(&x1, &x2, &y).is_none());
    }
}
