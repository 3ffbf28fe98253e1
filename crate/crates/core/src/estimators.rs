//! The four per-training-set statistics of Bayes learning:
//!
//! * G_n — generalization error, the KL divergence from the truth to the
//!   Bayes predictive distribution, estimated by fresh-sample Monte Carlo;
//! * T_n — training error, the average log density ratio of truth to
//!   predictive over the training set;
//! * V_n — functional variance, the summed posterior variance of the log
//!   model density at each training point;
//! * E_w[K_n] — posterior mean of the empirical loss.
//!
//! All quantities are in nats. The predictive density is only available
//! through posterior draws, so log p(x|Xⁿ) is a max-shifted exponential
//! average of log p(x|w) over the sample.

use crate::error::{Error, Result};
use crate::mcmc::PosteriorDraws;
use crate::model::{Dataset, LikStructure, Model};
use crate::real::{Real, LN_2PI};
use crate::seed;
use crate::stats::log_mean_exp;

/// The statistics of one (training set, β) run.
#[derive(Debug, Clone)]
pub struct ErrorRecord<R> {
    pub g_n: R,
    pub t_n: R,
    pub v_n: R,
    /// Posterior mean of the empirical loss K_n(w).
    pub ewkn: R,
    pub n: usize,
    pub beta: f64,
    /// Monte Carlo standard error of the G_n estimate.
    pub mc_se: R,
}

impl<R: Real> ErrorRecord<R> {
    pub fn is_finite(&self) -> bool {
        self.g_n.is_finite()
            && self.t_n.is_finite()
            && self.v_n.is_finite()
            && self.ewkn.is_finite()
            && self.mc_se.is_finite()
    }
}

/// log p(x | Xⁿ) = log E_w[p(x|w)] over the posterior sample.
///
/// Returns negative infinity when every draw assigns zero density to x
/// (an impossible observation); callers treat that as estimation failure.
pub fn predictive_log_density<R: Real>(model: &Model<R>, draws: &PosteriorDraws<R>, x: &[R]) -> R {
    assert!(!draws.is_empty(), "predictive density needs draws");
    let logs: Vec<R> = draws.iter().map(|w| model.log_p(x, w)).collect();
    log_mean_exp(&logs)
}

/// Per-draw observation means, precomputed once so the predictive loops
/// of Gaussian-mean models cost O(obs_dim) per (point, draw).
enum PredictiveEvaluator<'a, R: Real> {
    GaussMean {
        means: Vec<R>,
        obs_dim: usize,
    },
    Regression {
        model: &'a Model<R>,
        draws: &'a PosteriorDraws<R>,
    },
}

impl<'a, R: Real> PredictiveEvaluator<'a, R> {
    fn new(model: &'a Model<R>, draws: &'a PosteriorDraws<R>) -> Self {
        match model.lik_structure() {
            LikStructure::GaussMean => {
                let obs_dim = model.obs_dim();
                let mut means = vec![R::zero(); draws.len() * obs_dim];
                for (i, w) in draws.iter().enumerate() {
                    model.obs_mean_into(w, &mut means[i * obs_dim..(i + 1) * obs_dim]);
                }
                PredictiveEvaluator::GaussMean { means, obs_dim }
            }
            LikStructure::Regression => PredictiveEvaluator::Regression { model, draws },
        }
    }

    /// log p(x|Xⁿ), writing per-draw log densities into `buf`.
    fn log_predictive(&self, x: &[R], buf: &mut Vec<R>) -> R {
        buf.clear();
        match self {
            PredictiveEvaluator::GaussMean { means, obs_dim } => {
                let half = R::of(0.5);
                let norm = -half * R::of(*obs_dim as f64) * R::of(LN_2PI);
                for mean in means.chunks_exact(*obs_dim) {
                    let mut ss = R::zero();
                    for (&xi, &mi) in x.iter().zip(mean) {
                        let r = xi - mi;
                        ss += r * r;
                    }
                    buf.push(norm - half * ss);
                }
            }
            PredictiveEvaluator::Regression { model, draws } => {
                for w in draws.iter() {
                    buf.push(model.log_p(x, w));
                }
            }
        }
        log_mean_exp(buf)
    }
}

/// Fresh-sample Monte Carlo estimate of G_n with its standard error.
///
/// The evaluation stream is derived from `eval_seed` and is disjoint from
/// the training and MCMC streams by construction of the seed ledger.
pub fn generalization_error<R: Real>(
    model: &Model<R>,
    draws: &PosteriorDraws<R>,
    n_eval: usize,
    eval_seed: u64,
) -> Result<(R, R)> {
    if n_eval < 2 {
        return Err(Error::InvalidArgument("n_eval must be at least 2".into()));
    }
    if draws.is_empty() {
        return Err(Error::InvalidArgument("no posterior draws".into()));
    }
    let eval = PredictiveEvaluator::new(model, draws);
    let mut rng = seed::rng(eval_seed, "gen-eval", &[]);
    let mut x = vec![R::zero(); model.obs_dim()];
    let mut buf: Vec<R> = Vec::with_capacity(draws.len());
    let mut sum = R::zero();
    let mut sum_sq = R::zero();
    for i in 0..n_eval {
        model.draw_observation(&mut rng, &mut x);
        let pred = eval.log_predictive(&x, &mut buf);
        if pred == R::neg_infinity() {
            return Err(Error::Estimation {
                draw: i,
                reason: "predictive density vanished at a fresh observation".into(),
            });
        }
        let term = model.log_q(&x) - pred;
        if !term.is_finite() {
            return Err(Error::Estimation {
                draw: i,
                reason: format!("non-finite G_n term {term}"),
            });
        }
        sum += term;
        sum_sq += term * term;
    }
    let nf = R::of(n_eval as f64);
    let mean = sum / nf;
    let var = (sum_sq / nf - mean * mean).max(R::zero());
    let se = (var / R::of((n_eval - 1) as f64)).sqrt();
    Ok((mean, se))
}

/// T_n = (1/n) Σᵢ [log q(Xᵢ) - log p(Xᵢ|Xⁿ)].
pub fn training_error<R: Real>(
    model: &Model<R>,
    data: &Dataset<R>,
    draws: &PosteriorDraws<R>,
) -> Result<R> {
    let eval = PredictiveEvaluator::new(model, draws);
    let mut buf = Vec::with_capacity(draws.len());
    let mut sum = R::zero();
    for (i, x) in data.rows().enumerate() {
        let pred = eval.log_predictive(x, &mut buf);
        let term = model.log_q(x) - pred;
        if !term.is_finite() {
            return Err(Error::Estimation {
                draw: i,
                reason: format!("non-finite T_n term {term}"),
            });
        }
        sum += term;
    }
    Ok(sum / R::of(data.len() as f64))
}

/// V_n = Σᵢ { E_w[(log p(Xᵢ|w))²] - E_w[log p(Xᵢ|w)]² }.
pub fn functional_variance<R: Real>(
    model: &Model<R>,
    data: &Dataset<R>,
    draws: &PosteriorDraws<R>,
) -> Result<R> {
    let table = log_p_table(model, data, draws)?;
    Ok(table.v_n())
}

/// Posterior mean of K_n(w) = (1/n) Σᵢ [log q(Xᵢ) - log p(Xᵢ|w)].
pub fn posterior_mean_empirical_loss<R: Real>(
    model: &Model<R>,
    data: &Dataset<R>,
    draws: &PosteriorDraws<R>,
) -> Result<R> {
    let table = log_p_table(model, data, draws)?;
    Ok(table.ewkn())
}

/// The WAIC-style estimate of G_n from training quantities alone:
/// T_n + β·V_n/n.
pub fn gen_from_train<R: Real>(record: &ErrorRecord<R>) -> R {
    record.t_n + R::of(record.beta) * record.v_n / R::of(record.n as f64)
}

/// Per-(draw, datum) log densities with the row/column reductions the
/// estimators need. Draws index rows.
struct LogPTable<R> {
    values: Vec<R>,
    log_q: Vec<R>,
    n_draws: usize,
    n_data: usize,
}

fn log_p_table<R: Real>(
    model: &Model<R>,
    data: &Dataset<R>,
    draws: &PosteriorDraws<R>,
) -> Result<LogPTable<R>> {
    if draws.is_empty() || data.is_empty() {
        return Err(Error::InvalidArgument(
            "estimators need non-empty draws and data".into(),
        ));
    }
    let n = data.len();
    let m = draws.len();
    let mut values = vec![R::zero(); m * n];
    for (mi, w) in draws.iter().enumerate() {
        let row = &mut values[mi * n..(mi + 1) * n];
        for (i, x) in data.rows().enumerate() {
            let lp = model.log_p(x, w);
            if !lp.is_finite() {
                return Err(Error::Estimation {
                    draw: mi,
                    reason: format!("log p(X_{i}|w) = {lp}"),
                });
            }
            row[i] = lp;
        }
    }
    let log_q = data.rows().map(|x| model.log_q(x)).collect();
    Ok(LogPTable {
        values,
        log_q,
        n_draws: m,
        n_data: n,
    })
}

impl<R: Real> LogPTable<R> {
    fn v_n(&self) -> R {
        let m = R::of(self.n_draws as f64);
        let mut total = R::zero();
        for i in 0..self.n_data {
            let mut sum = R::zero();
            let mut sum_sq = R::zero();
            for mi in 0..self.n_draws {
                let v = self.values[mi * self.n_data + i];
                sum += v;
                sum_sq += v * v;
            }
            let mean = sum / m;
            total += (sum_sq / m - mean * mean).max(R::zero());
        }
        total
    }

    fn ewkn(&self) -> R {
        let lq_sum: R = self.log_q.iter().cloned().sum();
        let mut total = R::zero();
        for mi in 0..self.n_draws {
            let row = &self.values[mi * self.n_data..(mi + 1) * self.n_data];
            let lp_sum: R = row.iter().cloned().sum();
            total += (lq_sum - lp_sum) / R::of(self.n_data as f64);
        }
        total / R::of(self.n_draws as f64)
    }

    fn t_n(&self) -> R {
        let mut col = vec![R::zero(); self.n_draws];
        let mut sum = R::zero();
        for i in 0..self.n_data {
            for (mi, slot) in col.iter_mut().enumerate() {
                *slot = self.values[mi * self.n_data + i];
            }
            sum += self.log_q[i] - log_mean_exp(&col);
        }
        sum / R::of(self.n_data as f64)
    }
}

/// Compute a full [`ErrorRecord`] in one pass over the draws.
///
/// T_n, V_n, and E_w[K_n] use every pooled draw; the G_n predictive uses
/// at most `predictive_cap` evenly strided draws (0 = no cap), which keeps
/// the fresh-sample loop affordable without measurable bias at the 1/n
/// scale of interest.
pub fn compute_record<R: Real>(
    model: &Model<R>,
    data: &Dataset<R>,
    draws: &PosteriorDraws<R>,
    n_eval: usize,
    eval_seed: u64,
    predictive_cap: usize,
) -> Result<ErrorRecord<R>> {
    let table = log_p_table(model, data, draws)?;
    let t_n = table.t_n();
    let v_n = table.v_n();
    let ewkn = table.ewkn();
    let g_draws = if predictive_cap > 0 {
        draws.thinned(predictive_cap)
    } else {
        draws.clone()
    };
    let (g_n, mc_se) = generalization_error(model, &g_draws, n_eval, eval_seed)?;
    let record = ErrorRecord {
        g_n,
        t_n,
        v_n,
        ewkn,
        n: data.len(),
        beta: draws.beta,
        mc_se,
    };
    if !record.is_finite() {
        return Err(Error::Estimation {
            draw: 0,
            reason: "non-finite field in error record".into(),
        });
    }
    Ok(record)
}
