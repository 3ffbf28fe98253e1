//! Tempered-posterior sampling by adaptive random-walk Metropolis with
//! optional parallel tempering.
//!
//! The target is p(w | Xⁿ) ∝ ∏ᵢ p(Xᵢ|w)^β φ(w) on the compact box W;
//! proposals leaving W are rejected through the prior. Each coordinate has
//! its own proposal scale, adapted by Robbins-Monro during burn-in only and
//! frozen afterwards, which preserves detailed balance for the retained
//! draws. With more than one temper level a geometric ladder from β down
//! to β/8 is run with even/odd swap moves, and only the β-level chain is
//! returned.
//!
//! Convergence diagnostics are computed on u(w), not on w: over the zero
//! set {u = 0} the posterior on w is multimodal by construction, while
//! u(w) is identified, so split-R̂ on u is the meaningful check.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Dataset, LikStructure, Model};
use crate::real::Real;
use crate::seed;
use crate::stats;

/// Sampler settings shared by every temperature of an experiment; combined
/// with an inverse temperature and a seed they form a full [`McmcConfig`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McmcSettings {
    pub n_chains: usize,
    pub n_burnin: usize,
    /// Post-burn-in sweeps per chain; every `thin`-th one is retained.
    pub n_draws: usize,
    pub thin: usize,
    /// 1 = plain Metropolis.
    pub n_temper_levels: usize,
    pub target_accept: f64,
}

impl Default for McmcSettings {
    fn default() -> Self {
        McmcSettings {
            n_chains: 4,
            n_burnin: 5_000,
            n_draws: 20_000,
            thin: 4,
            n_temper_levels: 1,
            target_accept: 0.35,
        }
    }
}

impl McmcSettings {
    pub fn config(&self, beta: f64, seed: u64) -> McmcConfig {
        McmcConfig {
            beta,
            n_chains: self.n_chains,
            n_burnin: self.n_burnin,
            n_draws: self.n_draws,
            thin: self.thin,
            n_temper_levels: self.n_temper_levels,
            target_accept: self.target_accept,
            seed,
        }
    }
}

/// Full sampler configuration for one posterior.
#[derive(Debug, Clone)]
pub struct McmcConfig {
    /// Inverse temperature β > 0; β = 1 is strict Bayes.
    pub beta: f64,
    pub n_chains: usize,
    pub n_burnin: usize,
    pub n_draws: usize,
    pub thin: usize,
    pub n_temper_levels: usize,
    pub target_accept: f64,
    pub seed: u64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcSettings::default().config(1.0, 0)
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.beta.is_finite() || self.beta <= 0.0 {
            return Err(Error::InvalidArgument("beta must be in (0, ∞)".into()));
        }
        if self.n_chains == 0 || self.n_draws == 0 || self.thin == 0 {
            return Err(Error::InvalidArgument(
                "n_chains, n_draws, and thin must be positive".into(),
            ));
        }
        if self.n_temper_levels == 0 {
            return Err(Error::InvalidArgument(
                "n_temper_levels must be at least 1".into(),
            ));
        }
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return Err(Error::InvalidArgument(
                "target_accept must be in (0, 1)".into(),
            ));
        }
        Ok(())
    }

    fn kept_per_chain(&self) -> usize {
        self.n_draws / self.thin
    }
}

/// Per-run convergence diagnostics.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Diagnostics {
    /// Post-burn-in acceptance rate of the β-level replica, per chain.
    pub accept_rates: Vec<f64>,
    /// Split-R̂ per coordinate of u(w) (per coordinate of w when the model
    /// has no block structure).
    pub split_rhat: Vec<f64>,
    /// Effective sample size per u coordinate, summed over chains.
    pub ess: Vec<f64>,
    /// Replica-exchange acceptance per adjacent ladder pair; empty without
    /// tempering.
    pub swap_rates: Vec<f64>,
}

/// Pooled post-burn-in draws approximating the tempered posterior.
#[derive(Debug, Clone)]
pub struct PosteriorDraws<R> {
    flat: Vec<R>,
    dim: usize,
    kept_per_chain: usize,
    n_chains: usize,
    pub beta: f64,
    pub diagnostics: Diagnostics,
}

impl<R: Real> PosteriorDraws<R> {
    /// Wrap explicit points (tests, oracles). Chains are not tracked.
    pub fn from_points(points: Vec<Vec<R>>, beta: f64) -> Self {
        assert!(!points.is_empty(), "need at least one draw");
        let dim = points[0].len();
        assert!(points.iter().all(|p| p.len() == dim));
        let kept = points.len();
        PosteriorDraws {
            flat: points.concat(),
            dim,
            kept_per_chain: kept,
            n_chains: 1,
            beta,
            diagnostics: Diagnostics::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.flat.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_chains(&self) -> usize {
        self.n_chains
    }

    pub fn point(&self, i: usize) -> &[R] {
        &self.flat[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[R]> {
        self.flat.chunks_exact(self.dim)
    }

    /// Draws of chain `c`, in order.
    pub fn chain(&self, c: usize) -> impl Iterator<Item = &[R]> {
        let start = c * self.kept_per_chain;
        self.flat[start * self.dim..(start + self.kept_per_chain) * self.dim].chunks_exact(self.dim)
    }

    /// Evenly strided subsample of at most `max` draws, used to bound the
    /// cost of predictive-density evaluations. Chain structure is dropped.
    pub fn thinned(&self, max: usize) -> PosteriorDraws<R> {
        let n = self.len();
        if max == 0 || n <= max {
            return self.clone();
        }
        let stride = n.div_ceil(max);
        let points: Vec<&[R]> = self.iter().step_by(stride).collect();
        let kept = points.len();
        PosteriorDraws {
            flat: points.concat(),
            dim: self.dim,
            kept_per_chain: kept,
            n_chains: 1,
            beta: self.beta,
            diagnostics: self.diagnostics.clone(),
        }
    }
}

/// Posterior-sample mean of h(w).
///
/// A non-finite h value aborts with the offending draw index rather than
/// silently dropping the draw.
pub fn posterior_expectation<R: Real, F: Fn(&[R]) -> R>(
    draws: &PosteriorDraws<R>,
    h: F,
) -> Result<R> {
    if draws.is_empty() {
        return Err(Error::InvalidArgument("no posterior draws".into()));
    }
    let mut sum = R::zero();
    for (i, w) in draws.iter().enumerate() {
        let v = h(w);
        if !v.is_finite() {
            return Err(Error::Estimation {
                draw: i,
                reason: format!("h(w) = {v}"),
            });
        }
        sum += v;
    }
    Ok(sum / R::of(draws.len() as f64))
}

/// The w-dependent part of the log likelihood sum, with a sufficient
/// statistic fast path for Gaussian-mean models.
pub(crate) struct LogLikKernel<'a, R: Real> {
    model: &'a Model<R>,
    data: &'a Dataset<R>,
    sum_obs: Option<Vec<R>>,
}

impl<'a, R: Real> LogLikKernel<'a, R> {
    pub(crate) fn new(model: &'a Model<R>, data: &'a Dataset<R>) -> Self {
        let sum_obs = match model.lik_structure() {
            LikStructure::GaussMean if !data.is_empty() => Some(data.sum_obs()),
            _ => None,
        };
        LogLikKernel {
            model,
            data,
            sum_obs,
        }
    }

    /// Σᵢ log p(Xᵢ|w) up to a w-independent constant.
    pub(crate) fn eval(&self, w: &[R], scratch: &mut [R]) -> R {
        if self.data.is_empty() {
            return R::zero();
        }
        let half = R::of(0.5);
        match (&self.sum_obs, self.model.lik_structure()) {
            (Some(sum), LikStructure::GaussMean) => {
                self.model.obs_mean_into(w, scratch);
                let mut dot = R::zero();
                let mut norm_sq = R::zero();
                for (&m, &s) in scratch.iter().zip(sum) {
                    dot += m * s;
                    norm_sq += m * m;
                }
                dot - half * R::of(self.data.len() as f64) * norm_sq
            }
            _ => {
                let resp = self.model.obs_dim() - 1;
                let mut ss = R::zero();
                for row in self.data.rows() {
                    let r = row[resp] - self.model.regression_mean(&row[..resp], w);
                    ss += r * r;
                }
                -half * ss
            }
        }
    }
}

struct Replica<R> {
    w: Vec<R>,
    kernel: R,
    prior: R,
    beta: R,
    scales: Vec<R>,
    adapt_steps: Vec<f64>,
    accepted: u64,
    proposed: u64,
}

/// Draw from the tempered posterior.
pub fn sample_posterior<R: Real>(
    model: &Model<R>,
    data: &Dataset<R>,
    cfg: &McmcConfig,
) -> Result<PosteriorDraws<R>> {
    cfg.validate()?;
    if !data.is_empty() && data.obs_dim() != model.obs_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.obs_dim(),
            got: data.obs_dim(),
        });
    }
    let kernel = LogLikKernel::new(model, data);
    let kept_per_chain = cfg.kept_per_chain();
    if kept_per_chain == 0 {
        return Err(Error::InvalidArgument(
            "thin exceeds n_draws: no draws would be kept".into(),
        ));
    }

    let chains: Vec<Result<ChainOutput<R>>> = (0..cfg.n_chains)
        .into_par_iter()
        .map(|c| run_chain(model, &kernel, cfg, c))
        .collect();

    let mut flat = Vec::with_capacity(cfg.n_chains * kept_per_chain * model.dim());
    let mut accept_rates = Vec::with_capacity(cfg.n_chains);
    let mut swap_acc = vec![0u64; cfg.n_temper_levels.saturating_sub(1)];
    let mut swap_tot = vec![0u64; cfg.n_temper_levels.saturating_sub(1)];
    for chain in chains {
        let out = chain?;
        flat.extend_from_slice(&out.flat);
        accept_rates.push(out.accept_rate);
        for (i, (a, t)) in out.swap_acc.iter().zip(&out.swap_tot).enumerate() {
            swap_acc[i] += a;
            swap_tot[i] += t;
        }
    }

    let mut draws = PosteriorDraws {
        flat,
        dim: model.dim(),
        kept_per_chain,
        n_chains: cfg.n_chains,
        beta: cfg.beta,
        diagnostics: Diagnostics {
            accept_rates,
            split_rhat: Vec::new(),
            ess: Vec::new(),
            swap_rates: swap_acc
                .iter()
                .zip(&swap_tot)
                .map(|(&a, &t)| if t > 0 { a as f64 / t as f64 } else { f64::NAN })
                .collect(),
        },
    };
    let (rhat, ess) = u_space_diagnostics(model, &draws);
    draws.diagnostics.split_rhat = rhat;
    draws.diagnostics.ess = ess;
    Ok(draws)
}

struct ChainOutput<R> {
    flat: Vec<R>,
    accept_rate: f64,
    swap_acc: Vec<u64>,
    swap_tot: Vec<u64>,
}

fn run_chain<R: Real>(
    model: &Model<R>,
    kernel: &LogLikKernel<'_, R>,
    cfg: &McmcConfig,
    chain_index: usize,
) -> Result<ChainOutput<R>> {
    let mut rng = seed::rng(cfg.seed, "chain", &[chain_index as u64]);
    let d = model.dim();
    let levels = cfg.n_temper_levels;
    let mut scratch = vec![R::zero(); model.obs_dim()];

    // Geometric ladder from β down to β/8; a single level is plain
    // Metropolis at β.
    let ratio = if levels > 1 {
        (1.0f64 / 8.0).powf(1.0 / (levels as f64 - 1.0))
    } else {
        1.0
    };
    let mut replicas: Vec<Replica<R>> = (0..levels)
        .map(|l| {
            let w = model.sample_prior(&mut rng);
            let prior = model.prior_log_density(&w);
            let k = kernel.eval(&w, &mut scratch);
            Replica {
                w,
                kernel: k,
                prior,
                beta: R::of(cfg.beta * ratio.powi(l as i32)),
                scales: vec![model.w_max() * R::of(0.25); d],
                adapt_steps: vec![0.0; d],
                accepted: 0,
                proposed: 0,
            }
        })
        .collect();
    for r in &replicas {
        if !(r.prior + r.kernel).is_finite() {
            return Err(Error::Initialization(format!(
                "log posterior not finite at the prior draw (chain {chain_index})"
            )));
        }
    }

    let scale_lo = model.w_max() * R::of(1e-8);
    let scale_hi = model.w_max() * R::of(4.0);
    let total_sweeps = cfg.n_burnin + cfg.n_draws;
    let mut flat = Vec::with_capacity(cfg.kept_per_chain() * d);
    let mut burnin_accepts_level0 = 0u64;
    let mut swap_acc = vec![0u64; levels.saturating_sub(1)];
    let mut swap_tot = vec![0u64; levels.saturating_sub(1)];

    for sweep in 0..total_sweeps {
        let adapting = sweep < cfg.n_burnin;
        for replica in replicas.iter_mut() {
            replica.sweep(
                model,
                kernel,
                &mut rng,
                &mut scratch,
                adapting,
                cfg.target_accept,
                scale_lo,
                scale_hi,
            );
        }
        if adapting {
            burnin_accepts_level0 = replicas[0].accepted;
        }

        // Replica exchange, alternating even/odd adjacent pairs.
        if levels > 1 {
            let start = sweep % 2;
            let mut l = start;
            while l + 1 < levels {
                let delta = (replicas[l].beta - replicas[l + 1].beta)
                    * (replicas[l + 1].kernel - replicas[l].kernel);
                let accept =
                    delta >= R::zero() || rng.random_range(R::zero()..R::one()) < delta.exp();
                if !adapting {
                    swap_tot[l] += 1;
                }
                if accept {
                    if !adapting {
                        swap_acc[l] += 1;
                    }
                    let (a, b) = replicas.split_at_mut(l + 1);
                    std::mem::swap(&mut a[l].w, &mut b[0].w);
                    std::mem::swap(&mut a[l].kernel, &mut b[0].kernel);
                    std::mem::swap(&mut a[l].prior, &mut b[0].prior);
                }
                l += 2;
            }
        }

        if !adapting {
            let since = sweep - cfg.n_burnin;
            if (since + 1).is_multiple_of(cfg.thin) && flat.len() < cfg.kept_per_chain() * d {
                flat.extend_from_slice(&replicas[0].w);
            }
        }

        if sweep + 1 == cfg.n_burnin && cfg.n_burnin > 0 && burnin_accepts_level0 == 0 {
            return Err(Error::AdaptationFailure(format!(
                "chain {chain_index} accepted nothing during burn-in"
            )));
        }
    }

    let post_accepted = replicas[0].accepted - burnin_accepts_level0;
    let post_proposed = replicas[0].proposed - (cfg.n_burnin * d) as u64;
    let accept_rate = if post_proposed > 0 {
        post_accepted as f64 / post_proposed as f64
    } else {
        f64::NAN
    };
    Ok(ChainOutput {
        flat,
        accept_rate,
        swap_acc,
        swap_tot,
    })
}

impl<R: Real> Replica<R> {
    #[allow(clippy::too_many_arguments)]
    fn sweep<G: Rng>(
        &mut self,
        model: &Model<R>,
        kernel: &LogLikKernel<'_, R>,
        rng: &mut G,
        scratch: &mut [R],
        adapting: bool,
        target_accept: f64,
        scale_lo: R,
        scale_hi: R,
    ) {
        for j in 0..self.w.len() {
            self.proposed += 1;
            let old = self.w[j];
            self.w[j] = old + self.scales[j] * R::std_normal(rng);
            let prior_new = model.prior_log_density(&self.w);
            let mut alpha = R::zero();
            let mut accept = false;
            if prior_new > R::neg_infinity() {
                let kernel_new = kernel.eval(&self.w, scratch);
                let delta = self.beta * (kernel_new - self.kernel) + (prior_new - self.prior);
                alpha = if delta >= R::zero() {
                    R::one()
                } else {
                    delta.exp()
                };
                accept = delta >= R::zero() || rng.random_range(R::zero()..R::one()) < alpha;
                if accept {
                    self.kernel = kernel_new;
                    self.prior = prior_new;
                    self.accepted += 1;
                }
            }
            if !accept {
                self.w[j] = old;
            }
            if adapting {
                self.adapt_steps[j] += 1.0;
                let gamma = self.adapt_steps[j].powf(-0.6);
                let step = gamma * (alpha.to_f64_lossy() - target_accept);
                self.scales[j] = (self.scales[j] * R::of(step.exp()))
                    .max(scale_lo)
                    .min(scale_hi);
            }
        }
    }
}

/// Split-R̂ and ESS per u coordinate (per w coordinate without blocks).
fn u_space_diagnostics<R: Real>(
    model: &Model<R>,
    draws: &PosteriorDraws<R>,
) -> (Vec<f64>, Vec<f64>) {
    let to_u = |w: &[R]| -> Vec<R> {
        match model.blocks() {
            Some(b) => b.u_map(w).expect("draw has model dimension"),
            None => w.to_vec(),
        }
    };
    let g = to_u(draws.point(0)).len();
    let mut rhat = Vec::with_capacity(g);
    let mut ess = Vec::with_capacity(g);
    let per_chain: Vec<Vec<Vec<R>>> = (0..draws.n_chains)
        .map(|c| draws.chain(c).map(to_u).collect())
        .collect();
    for coord in 0..g {
        let series: Vec<Vec<R>> = per_chain
            .iter()
            .map(|chain| chain.iter().map(|u| u[coord]).collect())
            .collect();
        let views: Vec<&[R]> = series.iter().map(|s| s.as_slice()).collect();
        rhat.push(stats::split_rhat(&views));
        ess.push(stats::effective_sample_size(&views));
    }
    (rhat, ess)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn quick_cfg(beta: f64, seed: u64) -> McmcConfig {
        McmcConfig {
            beta,
            n_chains: 2,
            n_burnin: 800,
            n_draws: 4_000,
            thin: 2,
            n_temper_levels: 1,
            target_accept: 0.35,
            seed,
        }
    }

    #[test]
    fn determinism() {
        let model = Model::<f64>::regular(1).unwrap();
        let data = model.sample_dataset(30, 1).unwrap();
        let cfg = quick_cfg(1.0, 9);
        let a = sample_posterior(&model, &data, &cfg).unwrap();
        let b = sample_posterior(&model, &data, &cfg).unwrap();
        assert_eq!(a.flat, b.flat);
        let c = sample_posterior(&model, &data, &quick_cfg(1.0, 10)).unwrap();
        assert_ne!(a.flat, c.flat);
    }

    #[test]
    fn draws_stay_in_support() {
        let model = Model::<f64>::canonical(&[1, 2]).unwrap();
        let data = model.sample_dataset(40, 2).unwrap();
        let draws = sample_posterior(&model, &data, &quick_cfg(1.0, 3)).unwrap();
        assert!(draws.iter().all(|w| model.in_support(w)));
        for &rate in &draws.diagnostics.accept_rates {
            assert!(rate > 0.0 && rate < 1.0, "acceptance {rate}");
        }
    }

    #[test]
    fn conjugate_posterior_moments() {
        // Oracle: posterior N(Σx/(1+n), 1/(1+n)) for unit noise, standard
        // normal prior, β = 1.
        let model = Model::<f64>::conjugate1d();
        let data = model.sample_dataset(50, 11).unwrap();
        let sum_x: f64 = data.rows().map(|r| r[0]).sum();
        let n = data.len() as f64;
        let post_mean = sum_x / (1.0 + n);
        let post_var = 1.0 / (1.0 + n);

        let draws = sample_posterior(&model, &data, &quick_cfg(1.0, 12)).unwrap();
        let xs: Vec<f64> = draws.iter().map(|w| w[0]).collect();
        let ess = draws.diagnostics.ess.iter().sum::<f64>();
        let mean = stats::mean(&xs);
        let var = stats::sample_variance(&xs);
        let se_mean = (var / ess).sqrt();
        assert!(
            (mean - post_mean).abs() < 3.0 * se_mean,
            "mean {mean} vs {post_mean} (se {se_mean})"
        );
        let se_var = var * (2.0 / ess).sqrt();
        assert!(
            (var - post_var).abs() < 3.0 * se_var,
            "var {var} vs {post_var} (se {se_var})"
        );
    }

    #[test]
    fn concentration_scales_with_beta() {
        // Posterior sd of a Normal-mean model shrinks like 1/sqrt(nβ).
        let model = Model::<f64>::regular(1).unwrap();
        let data = model.sample_dataset(10, 13).unwrap();
        let sd_at = |beta: f64| {
            let draws = sample_posterior(&model, &data, &quick_cfg(beta, 14)).unwrap();
            let xs: Vec<f64> = draws.iter().map(|w| w[0]).collect();
            stats::sample_variance(&xs).sqrt()
        };
        let sd_low = sd_at(100.0);
        let sd_high = sd_at(10_000.0);
        let ratio = sd_low / sd_high;
        assert!(
            (ratio - 10.0).abs() < 3.0,
            "sd {sd_low} / {sd_high} = {ratio}, want ≈ 10"
        );
    }

    #[test]
    fn prior_only_is_symmetric() {
        // With no data the sampler explores the prior.
        let model = Model::<f64>::canonical(&[1, 1]).unwrap();
        let data = Dataset::empty(model.obs_dim());
        let draws = sample_posterior(&model, &data, &quick_cfg(1.0, 15)).unwrap();
        let mean_w1 = posterior_expectation(&draws, |w| w[0]).unwrap();
        let xs: Vec<f64> = draws.iter().map(|w| w[0]).collect();
        let ess = draws.diagnostics.ess[0].max(4.0);
        let se = (stats::sample_variance(&xs) / ess).sqrt();
        assert!(mean_w1.abs() < 4.0 * se, "mean {mean_w1}, se {se}");
    }

    #[test]
    fn expectation_basics() {
        let draws = PosteriorDraws::from_points(vec![vec![1.0f64, 2.0], vec![3.0, 4.0]], 1.0);
        assert_abs_diff_eq!(posterior_expectation(&draws, |_| 1.0).unwrap(), 1.0);
        assert_abs_diff_eq!(posterior_expectation(&draws, |w| w[0]).unwrap(), 2.0);
        let err = posterior_expectation(&draws, |w| if w[0] > 2.0 { f64::NAN } else { w[0] });
        assert!(matches!(err, Err(Error::Estimation { draw: 1, .. })));
    }

    #[test]
    fn tempering_agrees_with_plain_chain() {
        let model = Model::<f64>::example1();
        let data = model.sample_dataset(60, 16).unwrap();
        let plain = sample_posterior(&model, &data, &quick_cfg(1.0, 17)).unwrap();
        let mut cfg = quick_cfg(1.0, 18);
        cfg.n_temper_levels = 4;
        let tempered = sample_posterior(&model, &data, &cfg).unwrap();
        assert!(!tempered.diagnostics.swap_rates.is_empty());

        // Posterior mean of K(w) must agree between the two samplers.
        let k_plain = posterior_expectation(&plain, |w| model.kl(w)).unwrap();
        let k_temp = posterior_expectation(&tempered, |w| model.kl(w)).unwrap();
        let spread = |d: &PosteriorDraws<f64>| {
            let ks: Vec<f64> = d.iter().map(|w| model.kl(w)).collect();
            let ess: f64 = d.diagnostics.ess.iter().sum::<f64>().max(8.0);
            (stats::sample_variance(&ks) / ess.min(ks.len() as f64)).sqrt()
        };
        let se = (spread(&plain).powi(2) + spread(&tempered).powi(2)).sqrt();
        assert!(
            (k_plain - k_temp).abs() < 4.0 * se,
            "{k_plain} vs {k_temp} (se {se})"
        );
    }

    #[test]
    fn thinned_subsampling() {
        let points: Vec<Vec<f64>> = (0..100).map(|i| vec![i as f64]).collect();
        let draws = PosteriorDraws::from_points(points, 1.0);
        let sub = draws.thinned(10);
        assert!(sub.len() <= 10 && sub.len() >= 9, "len {}", sub.len());
        assert_eq!(sub.point(0)[0], 0.0);
        let full = draws.thinned(1000);
        assert_eq!(full.len(), 100);
    }

    #[test]
    fn whole_pipeline_instantiates_at_f32() {
        let model = Model::<f32>::canonical(&[1, 1]).unwrap();
        let data = model.sample_dataset(20, 1).unwrap();
        let cfg = McmcConfig {
            n_chains: 1,
            n_burnin: 200,
            n_draws: 400,
            thin: 2,
            seed: 2,
            ..Default::default()
        };
        let draws = sample_posterior(&model, &data, &cfg).unwrap();
        assert_eq!(draws.len(), 200);
        assert!(draws.iter().all(|w| model.in_support(w)));
        let k = posterior_expectation(&draws, |w| model.kl(w)).unwrap();
        assert!(k.is_finite() && k >= 0.0);
    }

    #[test]
    fn non_finite_data_is_an_initialization_error() {
        let model = Model::<f64>::regular(1).unwrap();
        let data = Dataset::from_rows(&[vec![f64::NAN]], 0).unwrap();
        let err = sample_posterior(&model, &data, &quick_cfg(1.0, 1));
        assert!(matches!(err, Err(Error::Initialization(_))), "{err:?}");
    }

    #[test]
    fn config_validation() {
        let cfg = McmcConfig {
            beta: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = McmcConfig {
            target_accept: 1.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = McmcConfig {
            thin: 0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
