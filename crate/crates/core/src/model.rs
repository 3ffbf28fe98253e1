//! The model zoo: true distribution, parametric density, prior, and an
//! exact K(w) evaluator for each built-in model.
//!
//! All built-ins place the true parameter at the origin, use a compact box
//! W = [-w_max, w_max]^d, and draw covariates from the standard normal.
//! The canonical family observes z ~ N(u(w), I) directly, so K(w) is
//! ½‖u(w)‖² by construction; the regression examples evaluate K(w) by
//! Gauss-Hermite quadrature over the covariate distribution.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::blocks::BlockStructure;
use crate::error::{Error, Result};
use crate::quad::{GaussHermite, DEFAULT_NODES};
use crate::real::{Real, LN_2PI};
use crate::seed;

/// Declarative model selection, as it appears in experiment configs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// One of `canonical`, `example1`, `example2`, `example3`, `regular`,
    /// `conjugate1d`.
    pub name: String,
    /// Block sizes; required for `canonical`, optional consistency check
    /// for `example1`/`example3`/`regular`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<usize>>,
    /// Parameter dimension; required for `regular`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    /// Half-width of the parameter box; model default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Canonical,
    Example1,
    Example2,
    Example3,
    Regular,
    Conjugate1d,
}

/// How the likelihood depends on the parameter; the sampler picks a
/// sufficient-statistic fast path for Gaussian-mean observation models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LikStructure {
    /// x ~ N(mean(w), I) with mean(w) of observation dimension.
    GaussMean,
    /// Observation is (covariates..., response) with unit-variance
    /// Gaussian noise around a nonlinear regression mean.
    Regression,
}

/// A statistical model of the zoo: immutable after construction and safe
/// to share across worker threads.
#[derive(Debug, Clone)]
pub struct Model<R: Real> {
    kind: Kind,
    name: String,
    d: usize,
    obs_dim: usize,
    w_max: R,
    blocks: Option<BlockStructure>,
    quad: Option<GaussHermite<R>>,
}

impl<R: Real> Model<R> {
    /// z ~ N(u(w), I): K(w) = ½‖u(w)‖² exactly.
    pub fn canonical(sizes: &[usize]) -> Result<Self> {
        let blocks = BlockStructure::new(sizes)?;
        Ok(Model {
            kind: Kind::Canonical,
            name: format!("canonical{blocks}"),
            d: blocks.dim(),
            obs_dim: blocks.num_blocks(),
            w_max: R::one(),
            blocks: Some(blocks),
            quad: None,
        })
    }

    /// Regression y = a·x² + b·tanh(cx) + noise; quasi-regular with
    /// u = (a, bc), g = 2.
    pub fn example1() -> Self {
        Model {
            kind: Kind::Example1,
            name: "example1".into(),
            d: 3,
            obs_dim: 2,
            w_max: R::one(),
            blocks: Some(BlockStructure::new(&[1, 2]).expect("static blocks")),
            quad: Some(GaussHermite::new(DEFAULT_NODES)),
        }
    }

    /// Regression y = a·x + b·tanh(cx) + noise; singular but *not*
    /// quasi-regular (x and tanh(cx)/c degenerate as c → 0), so no block
    /// structure is attached and no invariant values are claimed.
    pub fn example2() -> Self {
        Model {
            kind: Kind::Example2,
            name: "example2".into(),
            d: 3,
            obs_dim: 2,
            w_max: R::one(),
            blocks: None,
            quad: Some(GaussHermite::new(DEFAULT_NODES)),
        }
    }

    /// Two-covariate regression with four sine units; quasi-regular with
    /// u = (a₁b₁, a₂b₂, a₃b₃, a₄b₄), g = 4. The parameter layout is
    /// (a₁, b₁, a₂, b₂, a₃, b₃, a₄, b₄) so the size-2 blocks produce the
    /// aᵢbᵢ products of the local linearization aᵢ·sin(bᵢx) ≈ aᵢbᵢ·x.
    pub fn example3() -> Self {
        Model {
            kind: Kind::Example3,
            name: "example3".into(),
            d: 8,
            obs_dim: 3,
            w_max: R::one(),
            blocks: Some(BlockStructure::new(&[2, 2, 2, 2]).expect("static blocks")),
            quad: Some(GaussHermite::new(DEFAULT_NODES)),
        }
    }

    /// Normal mean model x ~ N(w, I_d): the regular baseline with
    /// λ = ν = d/2, embedded as all-singleton blocks.
    pub fn regular(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("regular model needs d >= 1".into()));
        }
        Ok(Model {
            kind: Kind::Regular,
            name: format!("regular({d})"),
            d,
            obs_dim: d,
            w_max: R::one(),
            blocks: Some(BlockStructure::singletons(d)?),
            quad: None,
        })
    }

    /// 1-D Normal mean with a standard normal prior: every posterior
    /// quantity has a conjugate closed form, which the test suite uses as
    /// an oracle for the sampler and the error estimators.
    ///
    /// The box is widened to ±10 so the truncation of the Gaussian prior
    /// is far below double precision.
    pub fn conjugate1d() -> Self {
        Model {
            kind: Kind::Conjugate1d,
            name: "conjugate1d".into(),
            d: 1,
            obs_dim: 1,
            w_max: R::of(10.0),
            blocks: Some(BlockStructure::singletons(1).expect("static blocks")),
            quad: None,
        }
    }

    /// Build a model from its config record.
    pub fn from_config(cfg: &ModelConfig) -> Result<Self> {
        let mut model = match cfg.name.as_str() {
            "canonical" => {
                let sizes = cfg.blocks.as_ref().ok_or_else(|| {
                    Error::InvalidArgument("canonical model needs `blocks`".into())
                })?;
                Model::canonical(sizes)?
            }
            "example1" => Model::example1(),
            "example2" => Model::example2(),
            "example3" => Model::example3(),
            "regular" => {
                let d = cfg
                    .d
                    .ok_or_else(|| Error::InvalidArgument("regular model needs `d`".into()))?;
                Model::regular(d)?
            }
            "conjugate1d" => Model::conjugate1d(),
            other => {
                return Err(Error::InvalidArgument(format!("unknown model `{other}`")));
            }
        };
        if let Some(sizes) = &cfg.blocks {
            if cfg.name != "canonical" {
                let expected = model.blocks.as_ref().map(BlockStructure::sizes);
                if expected != Some(sizes.as_slice()) {
                    return Err(Error::InvalidArgument(format!(
                        "blocks {sizes:?} inconsistent with model `{}`",
                        cfg.name
                    )));
                }
            }
        }
        if let Some(d) = cfg.d {
            if d != model.d {
                return Err(Error::InvalidArgument(format!(
                    "d = {d} inconsistent with model `{}` (d = {})",
                    cfg.name, model.d
                )));
            }
        }
        if let Some(w_max) = cfg.w_max {
            model = model.with_w_max(R::of(w_max))?;
        }
        Ok(model)
    }

    /// Override the half-width of the parameter box.
    pub fn with_w_max(mut self, w_max: R) -> Result<Self> {
        if !w_max.is_finite() || w_max <= R::zero() {
            return Err(Error::InvalidArgument("w_max must be positive".into()));
        }
        self.w_max = w_max;
        Ok(self)
    }

    /// Force a block structure onto the model. Intended for probing the
    /// sandwich condition on models that do not satisfy it (example2).
    pub fn with_blocks(mut self, sizes: &[usize]) -> Result<Self> {
        let blocks = BlockStructure::new(sizes)?;
        if blocks.dim() != self.d {
            return Err(Error::InvalidArgument(format!(
                "blocks {sizes:?} sum to {}, model has d = {}",
                blocks.dim(),
                self.d
            )));
        }
        self.blocks = Some(blocks);
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Parameter dimension d.
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Observation dimension N.
    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    pub fn w_max(&self) -> R {
        self.w_max
    }

    pub fn blocks(&self) -> Option<&BlockStructure> {
        self.blocks.as_ref()
    }

    /// (λ, ν, m) when the theory pins them down: λ = ν = g/2 and
    /// m = d - g + 1 for models carrying their natural block structure.
    pub fn known_invariants(&self) -> Option<(f64, f64, usize)> {
        if self.kind == Kind::Example2 {
            return None;
        }
        self.blocks.as_ref().map(|b| {
            let g = b.num_blocks();
            (g as f64 / 2.0, g as f64 / 2.0, self.d - g + 1)
        })
    }

    pub(crate) fn lik_structure(&self) -> LikStructure {
        match self.kind {
            Kind::Canonical | Kind::Regular | Kind::Conjugate1d => LikStructure::GaussMean,
            Kind::Example1 | Kind::Example2 | Kind::Example3 => LikStructure::Regression,
        }
    }

    /// Mean of the observation for Gaussian-mean models.
    pub(crate) fn obs_mean_into(&self, w: &[R], out: &mut [R]) {
        debug_assert_eq!(w.len(), self.d);
        debug_assert_eq!(out.len(), self.obs_dim);
        match self.kind {
            Kind::Canonical => {
                self.blocks
                    .as_ref()
                    .expect("canonical model has blocks")
                    .u_map_into(w, out);
            }
            Kind::Regular | Kind::Conjugate1d => out.copy_from_slice(w),
            _ => unreachable!("obs_mean_into on a regression model"),
        }
    }

    /// Regression mean m(covariates, w) for the example models.
    pub(crate) fn regression_mean(&self, cov: &[R], w: &[R]) -> R {
        match self.kind {
            Kind::Example1 => w[0] * cov[0] * cov[0] + w[1] * (w[2] * cov[0]).tanh(),
            Kind::Example2 => w[0] * cov[0] + w[1] * (w[2] * cov[0]).tanh(),
            Kind::Example3 => {
                let (x, y) = (cov[0], cov[1]);
                w[0] * (w[1] * x).sin()
                    + w[2] * x * (w[3] * x).sin()
                    + w[4] * (w[5] * y).sin()
                    + w[6] * y * (w[7] * y).sin()
            }
            _ => unreachable!("regression_mean on a Gaussian-mean model"),
        }
    }

    /// Is w inside the parameter box W?
    pub fn in_support(&self, w: &[R]) -> bool {
        w.iter().all(|&v| v.abs() <= self.w_max)
    }

    /// log φ(w): uniform on the box for all models except `conjugate1d`,
    /// whose prior is standard normal (truncated at ±10, a correction
    /// below double precision).
    pub fn prior_log_density(&self, w: &[R]) -> R {
        if !self.in_support(w) {
            return R::neg_infinity();
        }
        match self.kind {
            Kind::Conjugate1d => -R::of(0.5) * w[0] * w[0] - R::of(0.5) * R::of(LN_2PI),
            _ => -R::of(self.d as f64) * (R::of(2.0) * self.w_max).ln(),
        }
    }

    /// One draw from the prior.
    pub fn sample_prior<G: Rng + ?Sized>(&self, rng: &mut G) -> Vec<R> {
        match self.kind {
            Kind::Conjugate1d => loop {
                let w = R::std_normal(rng);
                if w.abs() <= self.w_max {
                    return vec![w];
                }
            },
            _ => (0..self.d)
                .map(|_| rng.random_range(-self.w_max..self.w_max))
                .collect(),
        }
    }

    /// log p(x | w).
    pub fn log_p(&self, x: &[R], w: &[R]) -> R {
        debug_assert_eq!(x.len(), self.obs_dim);
        debug_assert_eq!(w.len(), self.d);
        let half = R::of(0.5);
        let ln_2pi = R::of(LN_2PI);
        match self.lik_structure() {
            LikStructure::GaussMean => {
                let mut mean = vec![R::zero(); self.obs_dim];
                self.obs_mean_into(w, &mut mean);
                let mut ss = R::zero();
                for (&xi, &mi) in x.iter().zip(&mean) {
                    let r = xi - mi;
                    ss += r * r;
                }
                -half * R::of(self.obs_dim as f64) * ln_2pi - half * ss
            }
            LikStructure::Regression => {
                let (cov, y) = x.split_at(self.obs_dim - 1);
                let resid = y[0] - self.regression_mean(cov, w);
                self.covariate_log_density(cov) - half * ln_2pi - half * resid * resid
            }
        }
    }

    /// log q(x): the true density (the model at the origin).
    pub fn log_q(&self, x: &[R]) -> R {
        debug_assert_eq!(x.len(), self.obs_dim);
        let half = R::of(0.5);
        let ln_2pi = R::of(LN_2PI);
        match self.lik_structure() {
            LikStructure::GaussMean => {
                let ss: R = x.iter().map(|&v| v * v).sum();
                -half * R::of(self.obs_dim as f64) * ln_2pi - half * ss
            }
            LikStructure::Regression => {
                let (cov, y) = x.split_at(self.obs_dim - 1);
                self.covariate_log_density(cov) - half * ln_2pi - half * y[0] * y[0]
            }
        }
    }

    fn covariate_log_density(&self, cov: &[R]) -> R {
        let half = R::of(0.5);
        let ln_2pi = R::of(LN_2PI);
        let ss: R = cov.iter().map(|&v| v * v).sum();
        -half * R::of(cov.len() as f64) * ln_2pi - half * ss
    }

    /// K(w) = ∫ q log(q / p(·|w)): closed form where available, fixed-node
    /// Gauss-Hermite quadrature over the covariates otherwise.
    pub fn kl(&self, w: &[R]) -> R {
        debug_assert_eq!(w.len(), self.d);
        let half = R::of(0.5);
        match self.kind {
            Kind::Canonical => {
                let u = self
                    .blocks
                    .as_ref()
                    .expect("canonical model has blocks")
                    .u_map(w)
                    .expect("dimension checked");
                half * u.iter().map(|&v| v * v).sum()
            }
            Kind::Regular | Kind::Conjugate1d => half * w.iter().map(|&v| v * v).sum(),
            Kind::Example1 | Kind::Example2 => {
                let quad = self.quad.as_ref().expect("regression quadrature");
                half * quad.expectation(|x| {
                    let m = self.regression_mean(&[x], w);
                    m * m
                })
            }
            Kind::Example3 => {
                let quad = self.quad.as_ref().expect("regression quadrature");
                half * quad.expectation_2d(|x, y| {
                    let m = self.regression_mean(&[x, y], w);
                    m * m
                })
            }
        }
    }

    pub(crate) fn draw_observation<G: Rng + ?Sized>(&self, rng: &mut G, out: &mut [R]) {
        // Every built-in truth is the model at w = 0, where all observed
        // coordinates reduce to independent standard normals.
        for v in out.iter_mut() {
            *v = R::std_normal(rng);
        }
    }

    /// n i.i.d. observations from the true distribution q, reproducible
    /// from the seed.
    pub fn sample_dataset(&self, n: usize, data_seed: u64) -> Result<Dataset<R>> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "dataset needs at least one observation".into(),
            ));
        }
        let mut rng = seed::rng(data_seed, "observations", &[]);
        let mut data = vec![R::zero(); n * self.obs_dim];
        for i in 0..n {
            self.draw_observation(
                &mut rng,
                &mut data[i * self.obs_dim..(i + 1) * self.obs_dim],
            );
        }
        Ok(Dataset {
            data,
            obs_dim: self.obs_dim,
            n,
            seed: data_seed,
        })
    }
}

/// A training set: n observations of fixed dimension plus the seed that
/// produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<R> {
    data: Vec<R>,
    obs_dim: usize,
    n: usize,
    seed: u64,
}

impl<R: Real> Dataset<R> {
    /// Empty dataset: the posterior degenerates to the prior. Used to
    /// sample the prior through the MCMC machinery.
    pub fn empty(obs_dim: usize) -> Self {
        Dataset {
            data: Vec::new(),
            obs_dim,
            n: 0,
            seed: 0,
        }
    }

    /// Assemble a dataset from explicit rows (tests and oracles).
    pub fn from_rows(rows: &[Vec<R>], seed: u64) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidArgument("dataset needs rows".into()));
        }
        let obs_dim = rows[0].len();
        if rows.iter().any(|r| r.len() != obs_dim) {
            return Err(Error::InvalidArgument(
                "all observations must share one dimension".into(),
            ));
        }
        Ok(Dataset {
            data: rows.concat(),
            obs_dim,
            n: rows.len(),
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn obs(&self, i: usize) -> &[R] {
        &self.data[i * self.obs_dim..(i + 1) * self.obs_dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[R]> {
        self.data.chunks_exact(self.obs_dim)
    }

    /// Sum of observation vectors: the sufficient statistic of the
    /// Gaussian-mean likelihoods.
    pub(crate) fn sum_obs(&self) -> Vec<R> {
        let mut sum = vec![R::zero(); self.obs_dim];
        for row in self.rows() {
            for (s, &v) in sum.iter_mut().zip(row) {
                *s += v;
            }
        }
        sum
    }
}

/// Observed sandwich-bound statistics: the extreme ratios K(w)/‖u(w)‖²
/// over a uniform probe of the parameter box.
#[derive(Debug, Clone, Serialize)]
pub struct SandwichCheck {
    /// Smallest observed ratio (estimate of c₁).
    pub c1: f64,
    /// Largest observed ratio (estimate of c₂).
    pub c2: f64,
    /// Whether the bound looks non-degenerate: both ratios finite and
    /// positive, and c₁/c₂ above [`SANDWICH_DEGENERACY`].
    pub holds: bool,
    /// c₁/c₂, the observed conditioning of the bound.
    pub condition: f64,
    /// Points skipped because ‖u(w)‖² = 0 (the bound is vacuous there).
    pub skipped: usize,
    pub trials: usize,
}

/// Ratio c₁/c₂ below which the sandwich is reported as degenerate. A
/// finite uniform probe always yields strictly positive ratios, so the
/// min/max alone cannot falsify the bound; what distinguishes a genuine
/// quasi-regular model is that the ratio band stays bounded away from
/// zero as the box grows (example1 sits near 0.13 at w_max = 1, while
/// example2 with forced blocks collapses below 1e-5).
pub const SANDWICH_DEGENERACY: f64 = 1e-2;

/// Probe the quasi-regular sandwich c₁‖u‖² ≤ K(w) ≤ c₂‖u‖² by uniform
/// sampling of the parameter box.
pub fn check_sandwich<R: Real>(
    model: &Model<R>,
    trials: usize,
    probe_seed: u64,
) -> Result<SandwichCheck> {
    let blocks = model.blocks().ok_or_else(|| {
        Error::UnsupportedModel(format!("{} has no block structure", model.name()))
    })?;
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let mut rng = seed::rng(probe_seed, "sandwich", &[]);
    let mut c1 = f64::INFINITY;
    let mut c2 = f64::NEG_INFINITY;
    let mut skipped = 0usize;
    for _ in 0..trials {
        let w: Vec<R> = (0..model.dim())
            .map(|_| rng.random_range(-model.w_max()..model.w_max()))
            .collect();
        let u = blocks.u_map(&w)?;
        let norm_sq: R = u.iter().map(|&v| v * v).sum();
        if norm_sq == R::zero() {
            skipped += 1;
            continue;
        }
        let ratio = (model.kl(&w) / norm_sq).to_f64_lossy();
        c1 = c1.min(ratio);
        c2 = c2.max(ratio);
    }
    if skipped == trials {
        return Err(Error::InvalidArgument(
            "every probe point had u(w) = 0".into(),
        ));
    }
    let condition = if c2 > 0.0 { c1 / c2 } else { f64::NAN };
    let holds = c1.is_finite() && c2.is_finite() && c1 > 0.0 && condition >= SANDWICH_DEGENERACY;
    Ok(SandwichCheck {
        c1,
        c2,
        holds,
        condition,
        skipped,
        trials,
    })
}

/// The zoo as shown by `list-models`.
pub fn builtin_models() -> Vec<ModelDescription> {
    vec![
        ModelDescription {
            name: "canonical(<blocks>)".into(),
            d: None,
            g: None,
            note: "z ~ N(u(w), I); K = ½‖u‖²; λ = ν = g/2, m = d-g+1".into(),
        },
        ModelDescription {
            name: "example1".into(),
            d: Some(3),
            g: Some(2),
            note: "y = a·x² + b·tanh(cx) + e; quasi-regular, λ = ν = 1, m = 2".into(),
        },
        ModelDescription {
            name: "example2".into(),
            d: Some(3),
            g: None,
            note: "y = a·x + b·tanh(cx) + e; not quasi-regular; λ unknown".into(),
        },
        ModelDescription {
            name: "example3".into(),
            d: Some(8),
            g: Some(4),
            note: "four sine units over two covariates; λ = ν = 2, m = 5".into(),
        },
        ModelDescription {
            name: "regular(<d>)".into(),
            d: None,
            g: None,
            note: "x ~ N(w, I_d); regular baseline, λ = ν = d/2, m = 1".into(),
        },
        ModelDescription {
            name: "conjugate1d".into(),
            d: Some(1),
            g: Some(1),
            note: "1-D Normal mean, Normal prior; closed-form oracle; λ = ν = 1/2".into(),
        },
    ]
}

/// One `list-models` row.
#[derive(Debug, Clone, Serialize)]
pub struct ModelDescription {
    pub name: String,
    pub d: Option<usize>,
    pub g: Option<usize>,
    pub note: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn random_point<R: Real>(model: &Model<R>, rng: &mut impl Rng) -> Vec<R> {
        (0..model.dim())
            .map(|_| rng.random_range(-model.w_max()..model.w_max()))
            .collect()
    }

    #[test]
    fn canonical_kl_closed_form() {
        let m = Model::<f64>::canonical(&[1, 2]).unwrap();
        let k = m.kl(&[0.1, 0.2, 0.3]);
        assert_abs_diff_eq!(k, 0.5 * (0.1f64.powi(2) + 0.06f64.powi(2)), epsilon = 1e-18);
        assert_abs_diff_eq!(k, 0.00680, epsilon = 1e-15);
    }

    #[test]
    fn canonical_kl_equals_half_u_norm_everywhere() {
        let m = Model::<f64>::canonical(&[2, 3]).unwrap();
        let mut rng = crate::seed::rng(5, "test", &[]);
        for _ in 0..100 {
            let w = random_point(&m, &mut rng);
            let u = m.blocks().unwrap().u_map(&w).unwrap();
            let half_norm = 0.5 * u.iter().map(|v| v * v).sum::<f64>();
            assert_eq!(m.kl(&w), half_norm);
        }
    }

    #[test]
    fn kl_nonnegative_and_zero_at_origin() {
        let models: Vec<Model<f64>> = vec![
            Model::canonical(&[1, 2]).unwrap(),
            Model::example1(),
            Model::example2(),
            Model::example3(),
            Model::regular(3).unwrap(),
            Model::conjugate1d(),
        ];
        let mut rng = crate::seed::rng(6, "test", &[]);
        for m in &models {
            let origin = vec![0.0; m.dim()];
            assert_abs_diff_eq!(m.kl(&origin), 0.0, epsilon = 1e-12);
            for _ in 0..50 {
                let w = random_point(m, &mut rng);
                let k = m.kl(&w);
                assert!(k >= -1e-12, "{}: K({w:?}) = {k}", m.name());
            }
        }
    }

    #[test]
    fn example1_quadrature_matches_moment_closed_form() {
        // K(a, 0, c) = ½ a² E[x⁴] = (3/2) a²: forced by E[x⁴] = 3.
        let m = Model::<f64>::example1();
        for a in [0.1, 0.4, -0.9] {
            assert_abs_diff_eq!(m.kl(&[a, 0.0, 0.7]), 1.5 * a * a, epsilon = 1e-6);
        }
        assert_abs_diff_eq!(m.kl(&[0.0, 0.0, 0.0]), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn log_densities_are_consistent() {
        // log q must equal log p at the origin.
        let models: Vec<Model<f64>> = vec![
            Model::canonical(&[1, 2]).unwrap(),
            Model::example1(),
            Model::example3(),
            Model::regular(2).unwrap(),
            Model::conjugate1d(),
        ];
        let mut rng = crate::seed::rng(7, "test", &[]);
        for m in &models {
            let origin = vec![0.0; m.dim()];
            let mut x = vec![0.0; m.obs_dim()];
            for _ in 0..20 {
                m.draw_observation(&mut rng, &mut x);
                assert_abs_diff_eq!(m.log_q(&x), m.log_p(&x, &origin), epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn dataset_determinism() {
        let m = Model::<f64>::regular(1).unwrap();
        let a = m.sample_dataset(5, 7).unwrap();
        let b = m.sample_dataset(5, 7).unwrap();
        assert_eq!(a, b);
        let c = m.sample_dataset(5, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sample_mean_and_variance_of_truth() {
        // example1: zero-mean response.
        let m = Model::<f64>::example1();
        let n = 100_000;
        let ds = m.sample_dataset(n, 1).unwrap();
        let mean_y = ds.rows().map(|r| r[1]).sum::<f64>() / n as f64;
        assert!(mean_y.abs() < 4.0 / (n as f64).sqrt(), "mean y = {mean_y}");

        // canonical((1,1)): unit variance per coordinate.
        let m = Model::<f64>::canonical(&[1, 1]).unwrap();
        let ds = m.sample_dataset(n, 2).unwrap();
        for j in 0..2 {
            let col: Vec<f64> = ds.rows().map(|r| r[j]).collect();
            let var = crate::stats::sample_variance(&col);
            assert!((0.97..=1.03).contains(&var), "var[{j}] = {var}");
        }
    }

    #[test]
    fn sandwich_canonical_is_exactly_half() {
        let m = Model::<f64>::canonical(&[1, 2]).unwrap();
        let s = check_sandwich(&m, 10_000, 3).unwrap();
        assert_eq!(s.c1, 0.5);
        assert_eq!(s.c2, 0.5);
        assert!(s.holds);
    }

    #[test]
    fn sandwich_example1_holds() {
        let m = Model::<f64>::example1();
        let s = check_sandwich(&m, 10_000, 4).unwrap();
        assert!(s.holds, "{s:?}");
        assert!(s.c1 > 0.0 && s.c2.is_finite());
        // Analytic band: K = (3/2)a² + ½ b² E[tanh²(cx)], so ratios live in
        // roughly [0.19, 1.5] on the unit box.
        assert!(s.c1 > 0.1 && s.c2 < 1.6, "{s:?}");
    }

    #[test]
    fn sandwich_holds_on_all_quasi_regular_builtins() {
        for (model, trials) in [
            (Model::<f64>::canonical(&[2, 1]).unwrap(), 4_000),
            (Model::<f64>::example1(), 4_000),
            (Model::<f64>::example3(), 2_000),
            (Model::<f64>::regular(3).unwrap(), 4_000),
            (Model::<f64>::conjugate1d(), 4_000),
        ] {
            let s = check_sandwich(&model, trials, 6).unwrap();
            assert!(s.holds, "{}: {s:?}", model.name());
        }
    }

    #[test]
    fn sandwich_example2_degenerates() {
        let m = Model::<f64>::example2().with_blocks(&[1, 2]).unwrap();
        let s = check_sandwich(&m, 10_000, 5).unwrap();
        assert!(!s.holds, "{s:?}");
        // Widening the box probes deeper into the c → 0 degeneracy.
        let wide = Model::<f64>::example2()
            .with_blocks(&[1, 2])
            .unwrap()
            .with_w_max(3.0)
            .unwrap();
        let s_wide = check_sandwich(&wide, 10_000, 5).unwrap();
        assert!(!s_wide.holds, "{s_wide:?}");
    }

    #[test]
    fn sandwich_needs_blocks() {
        let m = Model::<f64>::example2();
        assert!(matches!(
            check_sandwich(&m, 100, 0),
            Err(Error::UnsupportedModel(_))
        ));
    }

    #[test]
    fn config_round_trip_and_errors() {
        let cfg = ModelConfig {
            name: "canonical".into(),
            blocks: Some(vec![1, 2]),
            d: None,
            w_max: None,
        };
        let m = Model::<f64>::from_config(&cfg).unwrap();
        assert_eq!(m.name(), "canonical(1,2)");
        assert_eq!(m.dim(), 3);

        let bad = ModelConfig {
            name: "nope".into(),
            blocks: None,
            d: None,
            w_max: None,
        };
        assert!(matches!(
            Model::<f64>::from_config(&bad),
            Err(Error::InvalidArgument(_))
        ));

        let inconsistent = ModelConfig {
            name: "example1".into(),
            blocks: Some(vec![2, 1]),
            d: None,
            w_max: None,
        };
        assert!(Model::<f64>::from_config(&inconsistent).is_err());

        let consistent = ModelConfig {
            name: "example3".into(),
            blocks: Some(vec![2, 2, 2, 2]),
            d: None,
            w_max: None,
        };
        assert!(Model::<f64>::from_config(&consistent).is_ok());
    }

    #[test]
    fn known_invariants() {
        assert_eq!(
            Model::<f64>::example1().known_invariants(),
            Some((1.0, 1.0, 2))
        );
        assert_eq!(
            Model::<f64>::example3().known_invariants(),
            Some((2.0, 2.0, 5))
        );
        assert_eq!(
            Model::<f64>::regular(4).unwrap().known_invariants(),
            Some((2.0, 2.0, 1))
        );
        assert_eq!(Model::<f64>::example2().known_invariants(), None);
        // Forcing blocks on example2 must not make it claim invariants.
        let forced = Model::<f64>::example2().with_blocks(&[1, 2]).unwrap();
        assert_eq!(forced.known_invariants(), None);
    }

    #[test]
    fn prior_is_finite_on_the_box() {
        let models: Vec<Model<f64>> =
            vec![Model::canonical(&[1, 1]).unwrap(), Model::conjugate1d()];
        let mut rng = crate::seed::rng(8, "test", &[]);
        for m in &models {
            for _ in 0..100 {
                let w = m.sample_prior(&mut rng);
                assert!(m.in_support(&w));
                assert!(m.prior_log_density(&w).is_finite());
            }
            let outside = vec![m.w_max() * 1.01; m.dim()];
            assert_eq!(m.prior_log_density(&outside), f64::NEG_INFINITY);
        }
    }

    #[test]
    fn generic_over_f32() {
        let m = Model::<f32>::canonical(&[1, 2]).unwrap();
        let k = m.kl(&[0.1, 0.2, 0.3]);
        assert!((k - 0.0068).abs() < 1e-6, "k = {k}");
    }
}
