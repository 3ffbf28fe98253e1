//! The two birational invariants, estimated three independent ways.
//!
//! * Symbolically: each block contributes a pole of order Δdⱼ at z = -1/2
//!   to its zeta factor ζⱼ(z) = ∫ ∏(wᵢ)^{2z} dwᵢ, and blocks share no
//!   variable, so poles add: λ = g/2 exactly, with multiplicity
//!   m = Σ Δdⱼ - (g-1) = d - g + 1. Exact rational arithmetic.
//! * From the temperature dependence of the posterior-mean empirical loss:
//!   n·E[E_w[K_n]] = λ/β - ν, a 2×2 linear system in (λ, ν) across two
//!   inverse temperatures.
//! * From the large-t behaviour of the Laplace integral
//!   Z(t) = ∫ exp(-t·K(w)) φ(w) dw ≈ C·t^(-λ)·(log t)^(m-1), estimated by
//!   importance-sampled Monte Carlo stratified near the zero set {u = 0}
//!   and fitted by regressing log Z on (1, log t, log log t).
//!
//! A fourth route, ν = (β/2)·lim E[V_n], is the plug-in from the
//! functional-variance average.

use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::blocks::BlockStructure;
use crate::error::{Error, Result};
use crate::model::Model;
use crate::real::Real;
use crate::seed;
use crate::stats;

/// How an invariant estimate was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Symbolic,
    TwoBeta,
    LaplaceFit,
    VnAverage,
}

/// A (λ̂, ν̂, m̂) estimate with the uncertainties the method provides.
#[derive(Debug, Clone, Serialize)]
pub struct InvariantEstimate {
    pub lambda: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_se: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu_se: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multiplicity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multiplicity_se: Option<f64>,
    pub method: Method,
}

/// Exact pole data of the zeta function for a block structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicRlct {
    /// λ = g/2, reduced.
    pub lambda: Ratio<u64>,
    /// Order of the pole at z = -λ: m = d - g + 1.
    pub multiplicity: usize,
    /// Per-block thresholds (1/2 each); λ is their sum.
    pub per_block: Vec<Ratio<u64>>,
}

impl SymbolicRlct {
    pub fn estimate(&self) -> InvariantEstimate {
        let lambda = *self.lambda.numer() as f64 / *self.lambda.denom() as f64;
        InvariantEstimate {
            lambda,
            lambda_se: None,
            // λ = ν in the quasi-regular case, so the symbolic route pins
            // both invariants.
            nu: Some(lambda),
            nu_se: None,
            multiplicity: Some(self.multiplicity as f64),
            multiplicity_se: None,
            method: Method::Symbolic,
        }
    }
}

impl std::fmt::Display for SymbolicRlct {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "lambda = {}", self.lambda)?;
        if self.per_block.len() > 1 {
            write!(f, " (= ")?;
            for (i, r) in self.per_block.iter().enumerate() {
                if i > 0 {
                    write!(f, " + ")?;
                }
                write!(f, "{r}")?;
            }
            write!(f, ")")?;
        }
        write!(f, ", m = {}", self.multiplicity)
    }
}

/// Exact λ and m from the block structure.
pub fn rlct_symbolic(blocks: &BlockStructure) -> SymbolicRlct {
    let g = blocks.num_blocks();
    let d = blocks.dim();
    SymbolicRlct {
        lambda: Ratio::new(g as u64, 2),
        multiplicity: d - g + 1,
        per_block: vec![Ratio::new(1, 2); g],
    }
}

/// ν = β·v̄/2 from a replication average of the functional variance.
pub fn estimate_nu_from_v(v_bar: f64, beta: f64) -> f64 {
    assert!(v_bar >= 0.0, "V_n averages are non-negative");
    assert!(beta > 0.0, "beta must be positive");
    beta * v_bar / 2.0
}

/// [`estimate_nu_from_v`] packaged with its propagated standard error.
pub fn nu_from_v_average(v_bar: f64, v_se: Option<f64>, beta: f64) -> InvariantEstimate {
    let nu = estimate_nu_from_v(v_bar, beta);
    InvariantEstimate {
        lambda: nu,
        lambda_se: v_se.map(|s| beta * s / 2.0),
        nu: Some(nu),
        nu_se: v_se.map(|s| beta * s / 2.0),
        multiplicity: None,
        multiplicity_se: None,
        method: Method::VnAverage,
    }
}

/// A replication average of E_w[K_n] at one inverse temperature.
#[derive(Debug, Clone, Copy)]
pub struct TemperedLoss {
    /// Mean of E_w[K_n(w)] over replicates.
    pub ewkn: f64,
    /// Standard error of that mean, when available.
    pub se: Option<f64>,
    pub beta: f64,
}

/// Invert n·E[E_w[K_n]] = λ/β - ν across two temperatures.
///
/// Standard errors propagate linearly through the solve when both inputs
/// carry one.
pub fn solve_lambda_nu_two_beta(
    a: &TemperedLoss,
    b: &TemperedLoss,
    n: usize,
) -> Result<InvariantEstimate> {
    if a.beta <= 0.0 || b.beta <= 0.0 {
        return Err(Error::InvalidArgument(
            "temperatures must be positive".into(),
        ));
    }
    if a.beta == b.beta {
        return Err(Error::SingularSystem(format!(
            "both averages are at beta = {}",
            a.beta
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let nf = n as f64;
    let delta = 1.0 / a.beta - 1.0 / b.beta;
    // λ = c·(e₁ - e₂), ν = λ/β₁ - n·e₁: both linear in the inputs.
    let c = nf / delta;
    let lambda = c * (a.ewkn - b.ewkn);
    let nu = lambda / a.beta - nf * a.ewkn;
    let (lambda_se, nu_se) = match (a.se, b.se) {
        (Some(sa), Some(sb)) => {
            let l_se = c.abs() * (sa * sa + sb * sb).sqrt();
            let ca = c / a.beta - nf;
            let cb = -c / a.beta;
            let n_se = ((ca * sa).powi(2) + (cb * sb).powi(2)).sqrt();
            (Some(l_se), Some(n_se))
        }
        _ => (None, None),
    };
    Ok(InvariantEstimate {
        lambda,
        lambda_se,
        nu: Some(nu),
        nu_se,
        multiplicity: None,
        multiplicity_se: None,
        method: Method::TwoBeta,
    })
}

/// Settings for the Laplace-integral regression.
#[derive(Debug, Clone)]
pub struct LaplaceConfig {
    /// Ascending t grid spanning at least three decades.
    pub t_grid: Vec<f64>,
    /// Monte Carlo points per grid value (at least 10⁵).
    pub mc_per_t: usize,
    pub seed: u64,
}

impl LaplaceConfig {
    /// 12 log-spaced points in [10², 10⁵] at 10⁵ points each: wide enough
    /// to separate the log t and log log t regressors.
    pub fn new(seed: u64) -> Self {
        LaplaceConfig {
            t_grid: log_spaced(1e2, 1e5, 12),
            mc_per_t: 100_000,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.t_grid.len() < 4 {
            return Err(Error::InvalidArgument(
                "t grid needs at least 4 points".into(),
            ));
        }
        if self.t_grid.windows(2).any(|w| w[0] >= w[1]) || self.t_grid[0] <= 0.0 {
            return Err(Error::InvalidArgument(
                "t grid must be positive ascending".into(),
            ));
        }
        let span = self.t_grid.last().unwrap() / self.t_grid[0];
        // Slack below 10³ so a grid of exactly three decades passes the
        // check despite rounding in its construction.
        if span < 995.0 {
            return Err(Error::IllConditioned(format!(
                "t grid spans a factor of {span:.1}; need at least 3 decades to \
                 separate log t from log log t"
            )));
        }
        // The log-log regressor also needs log t > 0 throughout.
        if self.t_grid[0] <= 1.0 {
            return Err(Error::InvalidArgument("t grid must start above 1".into()));
        }
        if self.mc_per_t < 100_000 {
            return Err(Error::InvalidArgument(
                "mc_per_t must be at least 1e5 for a stable Z estimate".into(),
            ));
        }
        Ok(())
    }
}

/// Log-spaced grid, endpoints included.
pub fn log_spaced(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2 && lo > 0.0 && hi > lo);
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (llo + (lhi - llo) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

/// λ̂ and m̂ from the slope and log-log coefficient of log Z(t).
pub fn laplace_fit<R: Real>(model: &Model<R>, cfg: &LaplaceConfig) -> Result<InvariantEstimate> {
    cfg.validate()?;
    let t_max = *cfg.t_grid.last().unwrap();
    let sampler = ZeroSetSampler::new(model, t_max);
    let estimates: Vec<Result<(f64, f64)>> = cfg
        .t_grid
        .par_iter()
        .enumerate()
        .map(|(i, &t)| {
            sampler.z_estimate(
                model,
                t,
                cfg.mc_per_t,
                seed::derive(cfg.seed, "laplace", &[i as u64]),
            )
        })
        .collect();

    let mut log_z = Vec::with_capacity(cfg.t_grid.len());
    for (i, est) in estimates.into_iter().enumerate() {
        let (z, _se) = est?;
        if !z.is_finite() || z <= 0.0 {
            return Err(Error::Underflow(format!(
                "Z({}) estimated as {z}; raise mc_per_t",
                cfg.t_grid[i]
            )));
        }
        log_z.push(z.ln());
    }
    let x1: Vec<f64> = cfg.t_grid.iter().map(|t| t.ln()).collect();
    let x2: Vec<f64> = x1.iter().map(|lt| lt.ln()).collect();
    let fit = stats::ols3(&x1, &x2, &log_z).ok_or_else(|| {
        Error::IllConditioned("log t and log log t are collinear over this grid".into())
    })?;
    Ok(InvariantEstimate {
        lambda: -fit.coef[1],
        lambda_se: Some(fit.se[1]),
        nu: None,
        nu_se: None,
        multiplicity: Some(1.0 + fit.coef[2]),
        multiplicity_se: Some(fit.se[2]),
        method: Method::LaplaceFit,
    })
}

/// One importance-sampled estimate of Z(t) = E_φ[exp(-t·K(w))] with its
/// standard error. Exposed so brute-force cross-checks can target a single
/// grid point.
pub fn z_estimate<R: Real>(
    model: &Model<R>,
    t: f64,
    mc: usize,
    stream_seed: u64,
) -> Result<(f64, f64)> {
    ZeroSetSampler::new(model, t).z_estimate(model, t, mc, stream_seed)
}

/// Mixture proposal over the parameter box that concentrates mass in tubes
/// around the zero set {u(w) = 0}.
///
/// With probability 0.3 a point is uniform on W. Otherwise, within every
/// block one coordinate is drawn from a dyadic scale mixture of centered
/// uniforms (half-widths w_max·2⁰ … w_max·2^-(L-1)) and the rest stay
/// uniform; making one factor per block small is exactly what shrinks that
/// block's u coordinate, and the scale mixture spreads its mass across the
/// octaves that matter for t up to t_max. Models without blocks fall back
/// to all-singleton blocks, i.e. shrinkage towards the origin. The mixture
/// density is available in closed form, so the importance weights are
/// exact and the estimator is unbiased regardless of proposal quality.
struct ZeroSetSampler {
    blocks: BlockStructure,
    w_max: f64,
    levels: u32,
    uniform_weight: f64,
}

impl ZeroSetSampler {
    fn new<R: Real>(model: &Model<R>, t_max: f64) -> Self {
        let blocks = model
            .blocks()
            .cloned()
            .unwrap_or_else(|| BlockStructure::singletons(model.dim()).expect("d >= 1"));
        let w_max = model.w_max().to_f64_lossy();
        // Smallest dyadic scale a factor below the narrowest tube width
        // t_max^(-1/2).
        let levels = ((w_max * t_max.sqrt()).log2().ceil() as i64 + 2).clamp(4, 26) as u32;
        ZeroSetSampler {
            blocks,
            w_max,
            levels,
            uniform_weight: 0.3,
        }
    }

    fn sample<G: Rng>(&self, rng: &mut G, w: &mut [f64]) {
        if rng.random::<f64>() < self.uniform_weight {
            for v in w.iter_mut() {
                *v = rng.random_range(-self.w_max..self.w_max);
            }
            return;
        }
        for j in 0..self.blocks.num_blocks() {
            let range = self.blocks.range(j);
            for i in range.clone() {
                w[i] = rng.random_range(-self.w_max..self.w_max);
            }
            let pick = rng.random_range(range.start..range.end);
            let level = rng.random_range(0..self.levels);
            let half_width = self.w_max * 0.5f64.powi(level as i32);
            w[pick] = rng.random_range(-half_width..half_width);
        }
    }

    /// Proposal density at w.
    fn density(&self, w: &[f64]) -> f64 {
        let unif1 = 1.0 / (2.0 * self.w_max);
        let d = self.blocks.dim();
        let uniform_part = unif1.powi(d as i32);
        let mut tube_part = 1.0;
        for j in 0..self.blocks.num_blocks() {
            let range = self.blocks.range(j);
            let size = range.len();
            let mut block_density = 0.0;
            for pick in range.clone() {
                let mut dens = self.scale_mixture_density(w[pick]);
                for i in range.clone() {
                    if i != pick {
                        dens *= unif1;
                    }
                }
                block_density += dens;
            }
            tube_part *= block_density / size as f64;
        }
        self.uniform_weight * uniform_part + (1.0 - self.uniform_weight) * tube_part
    }

    /// Density of the dyadic scale mixture of centered uniforms.
    fn scale_mixture_density(&self, x: f64) -> f64 {
        let r = x.abs() / self.w_max;
        if r > 1.0 {
            return 0.0;
        }
        // Levels with half-width >= |x|: 0..=l_max.
        let l_max = if r == 0.0 {
            self.levels - 1
        } else {
            ((-r.log2()).floor() as i64).clamp(0, self.levels as i64 - 1) as u32
        };
        // Σ_{l=0}^{l_max} 2^l / (2 w_max) / L
        let sum = (2.0f64.powi(l_max as i32 + 1) - 1.0) / self.levels as f64;
        sum / (2.0 * self.w_max)
    }

    fn z_estimate<R: Real>(
        &self,
        model: &Model<R>,
        t: f64,
        mc: usize,
        stream_seed: u64,
    ) -> Result<(f64, f64)> {
        if mc < 2 {
            return Err(Error::InvalidArgument("mc must be at least 2".into()));
        }
        let mut rng = seed::rng(stream_seed, "z-batch", &[]);
        let d = self.blocks.dim();
        let mut w = vec![0.0f64; d];
        let mut w_r = vec![R::zero(); d];
        let mut sum = 0.0f64;
        let mut sum_sq = 0.0f64;
        for _ in 0..mc {
            self.sample(&mut rng, &mut w);
            for (dst, &src) in w_r.iter_mut().zip(&w) {
                *dst = R::of(src);
            }
            let prior = model.prior_log_density(&w_r).to_f64_lossy();
            let k = model.kl(&w_r).to_f64_lossy();
            let term = if prior == f64::NEG_INFINITY {
                0.0
            } else {
                (prior - t * k).exp() / self.density(&w)
            };
            sum += term;
            sum_sq += term * term;
        }
        let mf = mc as f64;
        let mean = sum / mf;
        let var = (sum_sq / mf - mean * mean).max(0.0);
        Ok((mean, (var / mf).sqrt()))
    }
}
