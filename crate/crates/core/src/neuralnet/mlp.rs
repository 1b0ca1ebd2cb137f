use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::Activation;
use crate::error::{Error, Result};
use crate::rng;

/// One affine map followed by a componentwise activation:
/// `a_l = σ_l(A_l a_{l-1} + b_l)` with `A_l` of shape `N_l × N_{l-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn fan_in(&self) -> usize {
        self.weights.ncols()
    }

    pub fn fan_out(&self) -> usize {
        self.weights.nrows()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "super::MlpRecord", try_from = "super::MlpRecord")]
pub struct Mlp {
    layers: Vec<Layer>,
}

/// Per-layer inputs and pre-activations recorded by [`Mlp::forward_cached`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    inputs: Vec<Array2<f64>>,
    pre_activations: Vec<Array2<f64>>,
    output: Array2<f64>,
}

impl ForwardCache {
    pub fn output(&self) -> &Array2<f64> {
        &self.output
    }

    pub fn pre_activations(&self) -> &[Array2<f64>] {
        &self.pre_activations
    }

    pub fn batch_size(&self) -> usize {
        self.output.nrows()
    }
}

/// Gradients with the same shapes as the network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl Gradients {
    pub fn zeros_like(m: &Mlp) -> Self {
        Self {
            weights: m.layers.iter().map(|l| Array2::zeros(l.weights.raw_dim())).collect(),
            biases: m.layers.iter().map(|l| Array1::zeros(l.bias.raw_dim())).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            *a += b;
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            *a += b;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|x| x.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|x| x.is_finite()))
    }

    pub fn max_abs(&self) -> f64 {
        self.weights
            .iter()
            .flat_map(|w| w.iter())
            .chain(self.biases.iter().flat_map(|b| b.iter()))
            .fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitScheme {
    /// Standard normal scaled by `1/sqrt(fan_in)`.
    #[default]
    Scaled,
    /// Unscaled standard normal.
    RawNormal,
}

/// Network with i.i.d. normal weights and biases, deterministic per seed.
pub fn mlp_init(layer_dims: &[usize], activations: &[Activation], seed: u64, scheme: InitScheme) -> Result<Mlp> {
    if layer_dims.len() < 2 {
        return Err(Error::invalid("a network needs at least an input and an output layer"));
    }
    if layer_dims.contains(&0) {
        return Err(Error::invalid(format!("layer widths must be positive: {layer_dims:?}")));
    }
    if activations.len() != layer_dims.len() - 1 {
        return Err(Error::invalid(format!(
            "{} activations for {} layers",
            activations.len(),
            layer_dims.len() - 1
        )));
    }
    let mut rng = rng::stream(seed);
    let mut normal = move || -> f64 { rng.sample(StandardNormal) };
    let layers = layer_dims
        .windows(2)
        .zip(activations)
        .map(|(w, &activation)| {
            let (fan_in, fan_out) = (w[0], w[1]);
            let scale = match scheme {
                InitScheme::Scaled => 1.0 / (fan_in as f64).sqrt(),
                InitScheme::RawNormal => 1.0,
            };
            let weights = Array2::from_shape_simple_fn((fan_out, fan_in), || scale * normal());
            let bias = Array1::from_shape_simple_fn(fan_out, || scale * normal());
            Layer { weights, bias, activation }
        })
        .collect();
    Ok(Mlp { layers })
}

impl Mlp {
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::invalid("a network needs at least one layer"));
        }
        for (l, layer) in layers.iter().enumerate() {
            if layer.bias.len() != layer.fan_out() {
                return Err(Error::invalid(format!("layer {l}: bias length does not match weight rows")));
            }
            if layer.fan_in() == 0 || layer.fan_out() == 0 {
                return Err(Error::invalid(format!("layer {l}: empty weight matrix")));
            }
            if l > 0 && layers[l - 1].fan_out() != layer.fan_in() {
                return Err(Error::invalid(format!(
                    "layer {l}: expects {} inputs but the previous layer has {} outputs",
                    layer.fan_in(),
                    layers[l - 1].fan_out()
                )));
            }
            if !layer.weights.iter().chain(layer.bias.iter()).all(|x| x.is_finite()) {
                return Err(Error::NonFinite(format!("layer {l} parameters")));
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    /// `(N_0, ..., N_{L+1})`.
    pub fn layer_dims(&self) -> Vec<usize> {
        std::iter::once(self.input_dim()).chain(self.layers.iter().map(Layer::fan_out)).collect()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].fan_in()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map(Layer::fan_out).unwrap_or(0)
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    fn check_input(&self, x: &ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), got: x.ncols() });
        }
        Ok(())
    }

    /// Row-wise forward pass of a batch (`batch × N_0`).
    pub fn forward(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(&x)?;
        let mut a = x.to_owned();
        for layer in &self.layers {
            let z = a.dot(&layer.weights.t()) + &layer.bias;
            a = layer.activation.forward(&z);
        }
        Ok(a)
    }

    pub fn forward_cached(&self, x: ArrayView2<f64>) -> Result<ForwardCache> {
        self.check_input(&x)?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre_activations = Vec::with_capacity(self.layers.len());
        let mut a = x.to_owned();
        for layer in &self.layers {
            let z = a.dot(&layer.weights.t()) + &layer.bias;
            let next = layer.activation.forward(&z);
            inputs.push(a);
            pre_activations.push(z);
            a = next;
        }
        Ok(ForwardCache { inputs, pre_activations, output: a })
    }

    /// Backpropagation for a loss `L = (1/B) Σ_i ℓ_i(y_i)`.
    ///
    /// `upstream[i]` is `∂ℓ_i/∂y_i`. Returns the parameter gradients of `L`
    /// and the per-sample input gradients `∂ℓ_i/∂x_i`.
    pub fn backward(&self, cache: &ForwardCache, upstream: ArrayView2<f64>) -> Result<(Gradients, Array2<f64>)> {
        if cache.inputs.len() != self.layers.len() || cache.pre_activations.len() != self.layers.len() {
            return Err(Error::invalid("forward cache does not belong to this network"));
        }
        if upstream.dim() != cache.output.dim() {
            return Err(Error::invalid(format!(
                "upstream gradient has shape {:?}, forward output {:?}",
                upstream.dim(),
                cache.output.dim()
            )));
        }
        let batch = cache.batch_size();
        let inv_batch = if batch == 0 { 0.0 } else { 1.0 / batch as f64 };
        let mut grads = Gradients::zeros_like(self);
        let mut grad_out = upstream.to_owned();
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let output = if l + 1 == self.layers.len() { cache.output.view() } else { cache.inputs[l + 1].view() };
            let delta = layer.activation.backward(cache.pre_activations[l].view(), output, grad_out.view());
            grads.weights[l] = delta.t().dot(&cache.inputs[l]) * inv_batch;
            grads.biases[l] = delta.sum_axis(Axis(0)) * inv_batch;
            grad_out = delta.dot(&layer.weights);
        }
        Ok((grads, grad_out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn loss(m: &Mlp, x: &Array2<f64>) -> f64 {
        // L = (1/B) Σ_i ½‖y_i‖²
        let y = m.forward(x.view()).unwrap();
        0.5 * y.mapv(|v| v * v).sum() / x.nrows() as f64
    }

    fn relative_error(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
    }

    fn check_gradients(m: &Mlp, x: &Array2<f64>) -> f64 {
        let cache = m.forward_cached(x.view()).unwrap();
        let upstream = cache.output().clone();
        let (g, _) = m.backward(&cache, upstream.view()).unwrap();
        let h = 1e-5;
        let mut worst = 0.0f64;
        for l in 0..m.layers.len() {
            for idx in 0..m.layers[l].weights.len() {
                let (r, c) = (idx / m.layers[l].fan_in(), idx % m.layers[l].fan_in());
                let mut p = m.clone();
                p.layers[l].weights[[r, c]] += h;
                let up = loss(&p, x);
                p.layers[l].weights[[r, c]] -= 2.0 * h;
                let down = loss(&p, x);
                worst = worst.max(relative_error(g.weights[l][[r, c]], (up - down) / (2.0 * h)));
            }
            for r in 0..m.layers[l].bias.len() {
                let mut p = m.clone();
                p.layers[l].bias[r] += h;
                let up = loss(&p, x);
                p.layers[l].bias[r] -= 2.0 * h;
                let down = loss(&p, x);
                worst = worst.max(relative_error(g.biases[l][r], (up - down) / (2.0 * h)));
            }
        }
        worst
    }

    fn random_batch(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
        let mut rng = rng::stream(seed);
        Array2::from_shape_simple_fn((rows, cols), || rng.sample(StandardNormal))
    }

    #[test]
    fn init_shapes_and_determinism() {
        let acts = [Activation::Relu, Activation::Sigmoid];
        let m = mlp_init(&[2, 3, 1], &acts, 4, InitScheme::Scaled).unwrap();
        assert_eq!(m.layers[0].weights.dim(), (3, 2));
        assert_eq!(m.layers[0].bias.len(), 3);
        assert_eq!(m.layers[1].weights.dim(), (1, 3));
        assert_eq!(m.layers[1].bias.len(), 1);
        assert_eq!(m.layer_dims(), vec![2, 3, 1]);
        assert_eq!(m, mlp_init(&[2, 3, 1], &acts, 4, InitScheme::Scaled).unwrap());
        assert_ne!(m, mlp_init(&[2, 3, 1], &acts, 5, InitScheme::Scaled).unwrap());
        assert!(mlp_init(&[2], &[], 0, InitScheme::Scaled).is_err());
        assert!(mlp_init(&[2, 0, 1], &acts, 0, InitScheme::Scaled).is_err());
        assert!(mlp_init(&[2, 3, 1], &acts[..1], 0, InitScheme::Scaled).is_err());
    }

    #[test]
    fn raw_normal_is_unscaled_scaled_init() {
        let acts = [Activation::Linear];
        let raw = mlp_init(&[16, 4], &acts, 8, InitScheme::RawNormal).unwrap();
        let scaled = mlp_init(&[16, 4], &acts, 8, InitScheme::Scaled).unwrap();
        for (a, b) in raw.layers[0].weights.iter().zip(scaled.layers[0].weights.iter()) {
            assert!((a / 4.0 - b).abs() < 1e-15);
        }
    }

    #[test]
    fn scalar_affine() {
        let m = Mlp::from_layers(vec![Layer {
            weights: array![[2.0]],
            bias: array![0.5],
            activation: Activation::Linear,
        }])
        .unwrap();
        assert_eq!(m.forward(array![[3.0]].view()).unwrap(), array![[6.5]]);
        // loss = output: dA = x, db = 1
        let cache = m.forward_cached(array![[3.0]].view()).unwrap();
        let (g, dx) = m.backward(&cache, array![[1.0]].view()).unwrap();
        assert_eq!(g.weights[0], array![[3.0]]);
        assert_eq!(g.biases[0], array![1.0]);
        assert_eq!(dx, array![[2.0]]);
    }

    #[test]
    fn identity_and_activation_examples() {
        let id = Mlp::from_layers(vec![Layer {
            weights: Array2::eye(2),
            bias: Array1::zeros(2),
            activation: Activation::Linear,
        }])
        .unwrap();
        let x = array![[0.3, -1.2], [4.0, 5.0]];
        assert_eq!(id.forward(x.view()).unwrap(), x);
        let relu = Mlp::from_layers(vec![Layer { activation: Activation::Relu, ..id.layers[0].clone() }]).unwrap();
        assert_eq!(relu.forward(array![[-1.0, 2.0]].view()).unwrap(), array![[0.0, 2.0]]);
        let sig = Mlp::from_layers(vec![Layer {
            weights: array![[1.0]],
            bias: array![0.0],
            activation: Activation::Sigmoid,
        }])
        .unwrap();
        assert_eq!(sig.forward(array![[0.0]].view()).unwrap(), array![[0.5]]);
    }

    #[test]
    fn shape_errors() {
        let m = mlp_init(&[3, 2], &[Activation::Tanh], 0, InitScheme::Scaled).unwrap();
        assert!(matches!(m.forward(Array2::zeros((4, 2)).view()), Err(Error::DimensionMismatch { .. })));
        let cache = m.forward_cached(Array2::zeros((4, 3)).view()).unwrap();
        assert!(m.backward(&cache, Array2::zeros((3, 2)).view()).is_err());
        let other = mlp_init(&[3, 2, 2], &[Activation::Tanh; 2], 0, InitScheme::Scaled).unwrap();
        assert!(other.backward(&cache, Array2::zeros((4, 2)).view()).is_err());
        let bad = Layer { weights: Array2::zeros((2, 2)), bias: Array1::zeros(3), activation: Activation::Linear };
        assert!(Mlp::from_layers(vec![bad]).is_err());
        let nan = Layer { weights: array![[f64::NAN]], bias: array![0.0], activation: Activation::Linear };
        assert!(Mlp::from_layers(vec![nan]).is_err());
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let m = mlp_init(&[3, 5, 2], &[Activation::Selu, Activation::Sigmoid], 1, InitScheme::Scaled).unwrap();
        let x = random_batch(6, 3, 2);
        let cache = m.forward_cached(x.view()).unwrap();
        let (g, dx) = m.backward(&cache, Array2::zeros((6, 2)).view()).unwrap();
        assert_eq!(g.max_abs(), 0.0);
        assert!(dx.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn three_layer_gradient_check() {
        let acts = [Activation::Tanh, Activation::Relu, Activation::Sigmoid];
        let m = mlp_init(&[3, 6, 5, 2], &acts, 11, InitScheme::Scaled).unwrap();
        let x = random_batch(10, 3, 12);
        let worst = check_gradients(&m, &x);
        assert!(worst < 1e-4, "max relative error {worst}");
    }

    #[test]
    fn gradient_check_every_activation() {
        for (i, &act) in Activation::ALL.iter().enumerate() {
            for depth in 1..=4 {
                let mut dims = vec![3];
                dims.extend(std::iter::repeat(5).take(depth - 1));
                dims.push(2);
                let acts = vec![act; depth];
                let m = mlp_init(&dims, &acts, 100 + i as u64 * 10 + depth as u64, InitScheme::Scaled).unwrap();
                let x = random_batch(8, 3, 200 + i as u64);
                let worst = check_gradients(&m, &x);
                assert!(worst < 1e-4, "{act:?} depth {depth}: {worst}");
            }
        }
    }

    #[test]
    fn input_gradient_matches_finite_differences() {
        let m = mlp_init(&[2, 4, 1], &[Activation::Softplus, Activation::Sigmoid], 3, InitScheme::Scaled).unwrap();
        let x = random_batch(3, 2, 4);
        let cache = m.forward_cached(x.view()).unwrap();
        let (_, dx) = m.backward(&cache, Array2::ones((3, 1)).view()).unwrap();
        let h = 1e-6;
        for i in 0..3 {
            for j in 0..2 {
                let mut xp = x.clone();
                xp[[i, j]] += h;
                let mut xm = x.clone();
                xm[[i, j]] -= h;
                let fd = (m.forward(xp.view()).unwrap()[[i, 0]] - m.forward(xm.view()).unwrap()[[i, 0]]) / (2.0 * h);
                assert!((fd - dx[[i, j]]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn outputs_do_not_depend_on_batch_composition() {
        let m = mlp_init(&[3, 8, 8, 2], &[Activation::Relu, Activation::Relu, Activation::Sigmoid], 5, InitScheme::Scaled)
            .unwrap();
        let x = random_batch(20, 3, 6);
        let full = m.forward(x.view()).unwrap();
        for i in 0..20 {
            let single = m.forward(x.slice(ndarray::s![i..i + 1, ..])).unwrap();
            for j in 0..2 {
                assert!((single[[0, j]] - full[[i, j]]).abs() <= 1e-15 * full[[i, j]].abs().max(1.0));
            }
        }
    }

    #[test]
    fn relu_network_is_locally_linear() {
        let m = mlp_init(&[2, 16, 16, 1], &[Activation::Relu, Activation::Relu, Activation::Linear], 7, InitScheme::Scaled)
            .unwrap();
        let x = random_batch(30, 2, 8);
        for row in x.rows() {
            let f = |t: f64| m.forward(row.mapv(|v| v * t).insert_axis(Axis(0)).view()).unwrap()[[0, 0]];
            // along a ray with a fixed activation pattern, f(t x) is affine in t
            let (a, b, c) = (f(1.0), f(1.0 + 1e-4), f(1.0 + 2e-4));
            assert!(((c - b) - (b - a)).abs() < 1e-9);
        }
    }
}
