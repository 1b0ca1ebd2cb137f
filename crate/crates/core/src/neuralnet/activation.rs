use ndarray::{Array2, ArrayView2, Zip};
use serde::{Deserialize, Serialize};

const SELU_LAMBDA: f64 = 1.050_700_987_355_480_5;
const SELU_ALPHA: f64 = 1.673_263_242_354_377_3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Sigmoid,
    Tanh,
    Softplus,
    Linear,
    Selu,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Sigmoid => sigmoid(z),
            Activation::Tanh => z.tanh(),
            // log(1 + e^z) = max(z, 0) + log1p(e^-|z|)
            Activation::Softplus => z.max(0.0) + (-z.abs()).exp().ln_1p(),
            Activation::Linear => z,
            Activation::Selu => {
                if z > 0.0 {
                    SELU_LAMBDA * z
                } else {
                    SELU_LAMBDA * SELU_ALPHA * z.exp_m1()
                }
            }
        }
    }

    /// Derivative in terms of the pre-activation `z` and output `a`.
    /// ReLU has derivative 0 at 0.
    pub fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => a * (1.0 - a),
            Activation::Tanh => 1.0 - a * a,
            Activation::Softplus => sigmoid(z),
            Activation::Linear => 1.0,
            Activation::Selu => {
                if z > 0.0 {
                    SELU_LAMBDA
                } else {
                    SELU_LAMBDA * SELU_ALPHA * z.exp()
                }
            }
        }
    }

    pub(crate) fn forward(self, z: &Array2<f64>) -> Array2<f64> {
        z.mapv(|v| self.apply(v))
    }

    /// `upstream ⊙ σ'(z)`.
    pub(crate) fn backward(self, z: ArrayView2<f64>, a: ArrayView2<f64>, upstream: ArrayView2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros(z.raw_dim());
        Zip::from(&mut out)
            .and(&z)
            .and(&a)
            .and(&upstream)
            .for_each(|o, &z, &a, &g| *o = g * self.derivative(z, a));
        out
    }

    pub const ALL: [Activation; 6] = [
        Activation::Relu,
        Activation::Sigmoid,
        Activation::Tanh,
        Activation::Softplus,
        Activation::Linear,
        Activation::Selu,
    ];
}
