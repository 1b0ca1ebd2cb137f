//! Generator/discriminator training on pseudo-observations.
//!
//! The discriminator `D: [0,1]^d → (0,1)` ascends the empirical objective
//! `mean log D(u) + mean log(1 − D(G(z)))`, the generator `G: R^k → (0,1)^d`
//! descends its own loss, and the two alternate one step each with RMSProp.

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::copulas::PseudoObservations;
use crate::error::{Error, Result};
use crate::neuralnet::{mlp_init, rmsprop_step, Activation, Direction, InitScheme, Mlp, RmsPropConfig, RmsPropState};
use crate::rng::{self, derive_seed, hash_str};

/// Lower clamp for discriminator outputs inside logarithms.
pub const DISC_CLAMP: f64 = 1e-7;

/// Generated coordinates are kept inside `[2^-53, 1 - 2^-53]`.
pub const OUTPUT_MIN: f64 = f64::EPSILON / 2.0;
pub const OUTPUT_MAX: f64 = 1.0 - f64::EPSILON / 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorLoss {
    /// Minimize `mean log(1 − D(G(z)))`.
    #[default]
    Saturating,
    /// Minimize `−mean log D(G(z))`.
    NonSaturating,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GanConfig {
    pub k: usize,
    pub d: usize,
    pub gen_hidden: Vec<usize>,
    pub disc_hidden: Vec<usize>,
    pub batch_size: usize,
    pub iterations: usize,
    pub lr_g: f64,
    pub lr_d: f64,
    pub seed: u64,
    pub generator_loss: GeneratorLoss,
    pub init: InitScheme,
}

impl Default for GanConfig {
    fn default() -> Self {
        Self {
            k: 2,
            d: 2,
            gen_hidden: vec![64],
            disc_hidden: vec![256, 256],
            batch_size: 256,
            iterations: 5000,
            lr_g: 2e-4,
            lr_d: 2e-4,
            seed: 0,
            generator_loss: GeneratorLoss::Saturating,
            init: InitScheme::Scaled,
        }
    }
}

impl GanConfig {
    /// Defaults for output dimension `d` with latent dimension `k = d`.
    pub fn for_dim(d: usize) -> Self {
        Self { k: d, d, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.k == 0 || self.k > self.d {
            return Err(Error::invalid(format!("need 1 <= k <= d, got k = {}, d = {}", self.k, self.d)));
        }
        if self.gen_hidden.contains(&0) || self.disc_hidden.contains(&0) {
            return Err(Error::invalid("hidden layer widths must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be positive"));
        }
        if !(self.lr_g > 0.0 && self.lr_g.is_finite() && self.lr_d > 0.0 && self.lr_d.is_finite()) {
            return Err(Error::invalid("learning rates must be positive and finite"));
        }
        Ok(())
    }

    fn generator_dims(&self) -> (Vec<usize>, Vec<Activation>) {
        network_shape(self.k, &self.gen_hidden, self.d)
    }

    fn discriminator_dims(&self) -> (Vec<usize>, Vec<Activation>) {
        network_shape(self.d, &self.disc_hidden, 1)
    }
}

fn network_shape(input: usize, hidden: &[usize], output: usize) -> (Vec<usize>, Vec<Activation>) {
    let mut dims = vec![input];
    dims.extend_from_slice(hidden);
    dims.push(output);
    let mut acts = vec![Activation::Relu; hidden.len()];
    acts.push(Activation::Sigmoid);
    (dims, acts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossRecord {
    pub disc_loss: f64,
    pub gen_loss: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GanLoss {
    pub disc_loss: f64,
    pub gen_loss: f64,
    /// Number of discriminator outputs that had to be clamped.
    pub saturated: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GanModel {
    pub config: GanConfig,
    pub generator: Mlp,
    pub discriminator: Mlp,
    pub loss_trace: Vec<LossRecord>,
    /// Iterations in which at least one discriminator output was clamped.
    pub saturated_steps: usize,
    pub warnings: Vec<String>,
}

impl GanModel {
    pub fn k(&self) -> usize {
        self.generator.input_dim()
    }

    pub fn d(&self) -> usize {
        self.generator.output_dim()
    }

    pub fn final_loss(&self) -> Option<LossRecord> {
        self.loss_trace.last().copied()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("models always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: GanModel = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        model.config.validate()?;
        if model.generator.input_dim() != model.config.k
            || model.generator.output_dim() != model.config.d
            || model.discriminator.input_dim() != model.config.d
            || model.discriminator.output_dim() != 1
        {
            return Err(Error::Format("network shapes disagree with the stored configuration".into()));
        }
        Ok(model)
    }
}

fn clamp_disc(x: f64) -> (f64, bool) {
    let c = x.clamp(DISC_CLAMP, 1.0 - DISC_CLAMP);
    (c, c != x)
}

/// Mean of `f(clamped x)` plus the number of clamped entries.
fn clamped_mean(xs: &[f64], f: impl Fn(f64) -> f64) -> (f64, usize) {
    let mut saturated = 0;
    let sum: f64 = xs
        .iter()
        .map(|&x| {
            let (c, hit) = clamp_disc(x);
            saturated += hit as usize;
            f(c)
        })
        .sum();
    (sum / xs.len() as f64, saturated)
}

fn generator_objective(disc_out_fake: &[f64], kind: GeneratorLoss) -> f64 {
    match kind {
        GeneratorLoss::Saturating => clamped_mean(disc_out_fake, |x| (1.0 - x).ln()).0,
        GeneratorLoss::NonSaturating => -clamped_mean(disc_out_fake, f64::ln).0,
    }
}

/// Empirical objectives from discriminator outputs on a real and a generated batch.
pub fn gan_loss(disc_out_real: &[f64], disc_out_fake: &[f64], kind: GeneratorLoss) -> Result<GanLoss> {
    if disc_out_real.is_empty() || disc_out_fake.is_empty() {
        return Err(Error::invalid("discriminator batches must be non-empty"));
    }
    let (real, sat_real) = clamped_mean(disc_out_real, f64::ln);
    let (fake, sat_fake) = clamped_mean(disc_out_fake, |x| (1.0 - x).ln());
    Ok(GanLoss {
        disc_loss: real + fake,
        gen_loss: generator_objective(disc_out_fake, kind),
        saturated: sat_real + sat_fake,
    })
}

struct Trainer<'a> {
    config: &'a GanConfig,
    generator: Mlp,
    discriminator: Mlp,
    gen_state: RmsPropState,
    disc_state: RmsPropState,
    rng: rng::Rng,
    data: ArrayView2<'a, f64>,
    order: Vec<usize>,
    cursor: usize,
}

impl<'a> Trainer<'a> {
    fn new(data: ArrayView2<'a, f64>, config: &'a GanConfig) -> Result<Self> {
        let (gd, ga) = config.generator_dims();
        let (dd, da) = config.discriminator_dims();
        let generator = mlp_init(&gd, &ga, derive_seed(config.seed, hash_str("generator"), 0), config.init)?;
        let discriminator = mlp_init(&dd, &da, derive_seed(config.seed, hash_str("discriminator"), 0), config.init)?;
        let rms = |lr| RmsPropConfig { learning_rate: lr, ..RmsPropConfig::default() };
        let gen_state = RmsPropState::new(&generator, rms(config.lr_g))?;
        let disc_state = RmsPropState::new(&discriminator, rms(config.lr_d))?;
        let n = data.nrows();
        Ok(Self {
            config,
            generator,
            discriminator,
            gen_state,
            disc_state,
            rng: rng::stream(derive_seed(config.seed, hash_str("minibatches"), 0)),
            data,
            order: (0..n).collect(),
            cursor: n,
        })
    }

    fn latent_batch(&mut self) -> Array2<f64> {
        let rng = &mut self.rng;
        Array2::from_shape_simple_fn((self.config.batch_size, self.config.k), || rng.sample(StandardNormal))
    }

    /// Next data minibatch, reshuffling when the current epoch runs out.
    fn data_batch(&mut self) -> Array2<f64> {
        let b = self.config.batch_size;
        if self.cursor + b > self.order.len() {
            self.order.shuffle(&mut self.rng);
            self.cursor = 0;
        }
        let rows = &self.order[self.cursor..self.cursor + b];
        self.cursor += b;
        self.data.select(Axis(0), rows)
    }

    fn iteration(&mut self, it: usize) -> Result<(LossRecord, bool)> {
        let diverged = |reason: String| Error::TrainingDiverged { iteration: it, reason };

        let z = self.latent_batch();
        let real = self.data_batch();
        let fake = self.generator.forward(z.view())?;
        let (disc_loss, sat_d) = discriminator_step(&mut self.discriminator, &mut self.disc_state, real.view(), fake.view())
            .map_err(|e| diverged(format!("discriminator step: {e}")))?;

        let z = self.latent_batch();
        let (gen_loss, sat_g) = generator_step(
            &mut self.generator,
            &mut self.gen_state,
            &self.discriminator,
            z.view(),
            self.config.generator_loss,
        )
        .map_err(|e| diverged(format!("generator step: {e}")))?;

        if !disc_loss.is_finite() || !gen_loss.is_finite() {
            return Err(diverged(format!("losses {disc_loss}, {gen_loss}")));
        }
        Ok((LossRecord { disc_loss, gen_loss }, sat_d + sat_g > 0))
    }
}

fn column(a: &Array2<f64>) -> &[f64] {
    a.as_slice().expect("network outputs are contiguous")
}

/// One ascent step on the discriminator objective. Returns the objective
/// before the update and the number of clamped outputs.
fn discriminator_step(
    disc: &mut Mlp,
    state: &mut RmsPropState,
    real: ArrayView2<f64>,
    fake: ArrayView2<f64>,
) -> Result<(f64, usize)> {
    let real_cache = disc.forward_cached(real)?;
    let fake_cache = disc.forward_cached(fake)?;
    let loss = gan_loss(column(real_cache.output()), column(fake_cache.output()), GeneratorLoss::Saturating)?;
    if !loss.disc_loss.is_finite() {
        return Err(Error::NonFinite(format!("discriminator objective {}", loss.disc_loss)));
    }
    let up_real = real_cache.output().mapv(|x| 1.0 / clamp_disc(x).0);
    let up_fake = fake_cache.output().mapv(|x| -1.0 / (1.0 - clamp_disc(x).0));
    let (mut grads, _) = disc.backward(&real_cache, up_real.view())?;
    let (g_fake, _) = disc.backward(&fake_cache, up_fake.view())?;
    grads.add_assign(&g_fake);
    rmsprop_step(disc, &grads, state, Direction::Ascend)?;
    Ok((loss.disc_loss, loss.saturated))
}

/// One descent step on the generator loss through a frozen discriminator.
fn generator_step(
    generator: &mut Mlp,
    state: &mut RmsPropState,
    disc: &Mlp,
    z: ArrayView2<f64>,
    kind: GeneratorLoss,
) -> Result<(f64, usize)> {
    let gen_cache = generator.forward_cached(z)?;
    let disc_cache = disc.forward_cached(gen_cache.output().view())?;
    let out = disc_cache.output();
    let loss = generator_objective(column(out), kind);
    let saturated = clamped_mean(column(out), |x| x).1;
    let upstream = match kind {
        GeneratorLoss::Saturating => out.mapv(|x| -1.0 / (1.0 - clamp_disc(x).0)),
        GeneratorLoss::NonSaturating => out.mapv(|x| -1.0 / clamp_disc(x).0),
    };
    let (_, input_grad) = disc.backward(&disc_cache, upstream.view())?;
    let (grads, _) = generator.backward(&gen_cache, input_grad.view())?;
    rmsprop_step(generator, &grads, state, Direction::Descend)?;
    Ok((loss, saturated))
}

/// Trains the pair for `config.iterations` alternating steps.
pub fn gan_train(pseudo: &PseudoObservations, config: &GanConfig) -> Result<GanModel> {
    config.validate()?;
    if pseudo.d() != config.d {
        return Err(Error::DimensionMismatch { expected: config.d, got: pseudo.d() });
    }
    if pseudo.n() < config.batch_size {
        return Err(Error::invalid(format!(
            "need at least batch_size = {} observations, got {}",
            config.batch_size,
            pseudo.n()
        )));
    }
    let mut trainer = Trainer::new(pseudo.values().view(), config)?;
    let mut trace = Vec::with_capacity(config.iterations);
    let mut saturated_steps = 0;
    for it in 0..config.iterations {
        let (record, saturated) = trainer.iteration(it)?;
        saturated_steps += saturated as usize;
        trace.push(record);
        if it % 500 == 0 {
            log::debug!("iteration {it}: disc {:.5}, gen {:.5}", record.disc_loss, record.gen_loss);
        }
    }
    let mut warnings = Vec::new();
    if config.iterations > 0 && 2 * saturated_steps > config.iterations {
        let msg = format!(
            "discriminator outputs were clamped in {saturated_steps} of {} iterations",
            config.iterations
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }
    Ok(GanModel {
        config: config.clone(),
        generator: trainer.generator,
        discriminator: trainer.discriminator,
        loss_trace: trace,
        saturated_steps,
        warnings,
    })
}

/// Generator forward pass on latent rows, kept strictly inside the unit cube.
pub fn gan_generate(model: &GanModel, z: ArrayView2<f64>) -> Result<Array2<f64>> {
    if z.ncols() != model.k() {
        return Err(Error::DimensionMismatch { expected: model.k(), got: z.ncols() });
    }
    let mut out = model.generator.forward(z)?;
    out.mapv_inplace(|x| x.clamp(OUTPUT_MIN, OUTPUT_MAX));
    Ok(out)
}

/// Standard-normal latent rows from `seed`.
pub fn latent_normal(n: usize, k: usize, seed: u64) -> Array2<f64> {
    let mut rng = rng::stream(seed);
    Array2::from_shape_simple_fn((n, k), || rng.sample(StandardNormal))
}
