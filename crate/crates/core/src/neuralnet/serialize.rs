//! Text format for networks: a JSON object with a format tag, version,
//! layer widths, activation tags, and row-major weights. Numbers are written
//! in shortest round-trip form, so parsing restores every parameter bit for
//! bit.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::{Activation, Layer, Mlp};
use crate::error::{Error, Result};

pub const MLP_FORMAT_VERSION: u32 = 1;
const FORMAT_TAG: &str = "gqrs-mlp";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerRecord {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpRecord {
    pub format: String,
    #[serde(default)]
    pub version: Option<u32>,
    pub layer_dims: Vec<usize>,
    pub activations: Vec<Activation>,
    pub layers: Vec<LayerRecord>,
}

impl From<&Mlp> for MlpRecord {
    fn from(m: &Mlp) -> Self {
        MlpRecord {
            format: FORMAT_TAG.to_string(),
            version: Some(MLP_FORMAT_VERSION),
            layer_dims: m.layer_dims(),
            activations: m.layers().iter().map(|l| l.activation).collect(),
            layers: m
                .layers()
                .iter()
                .map(|l| LayerRecord {
                    weights: l.weights.iter().copied().collect(),
                    bias: l.bias.to_vec(),
                })
                .collect(),
        }
    }
}

impl From<Mlp> for MlpRecord {
    fn from(m: Mlp) -> Self {
        MlpRecord::from(&m)
    }
}

impl TryFrom<MlpRecord> for Mlp {
    type Error = Error;

    fn try_from(rec: MlpRecord) -> Result<Mlp> {
        if rec.format != FORMAT_TAG {
            return Err(Error::Format(format!("expected format {FORMAT_TAG:?}, found {:?}", rec.format)));
        }
        match rec.version {
            None => return Err(Error::Format("missing version field".into())),
            Some(v) if v != MLP_FORMAT_VERSION => {
                return Err(Error::Format(format!("unsupported version {v}, expected {MLP_FORMAT_VERSION}")))
            }
            _ => {}
        }
        let n_layers = rec.layer_dims.len().saturating_sub(1);
        if n_layers == 0 || rec.activations.len() != n_layers || rec.layers.len() != n_layers {
            return Err(Error::Format(format!(
                "{} widths, {} activations and {} layers are inconsistent",
                rec.layer_dims.len(),
                rec.activations.len(),
                rec.layers.len()
            )));
        }
        let layers = rec
            .layers
            .into_iter()
            .zip(rec.activations)
            .zip(rec.layer_dims.windows(2))
            .map(|((l, activation), w)| {
                let weights = Array2::from_shape_vec((w[1], w[0]), l.weights)
                    .map_err(|e| Error::Format(format!("weights: {e}")))?;
                if l.bias.len() != w[1] {
                    return Err(Error::Format(format!("bias has {} entries, expected {}", l.bias.len(), w[1])));
                }
                Ok(Layer { weights, bias: Array1::from(l.bias), activation })
            })
            .collect::<Result<Vec<_>>>()?;
        Mlp::from_layers(layers).map_err(|e| Error::Format(e.to_string()))
    }
}

pub fn mlp_serialize(m: &Mlp) -> String {
    serde_json::to_string(&MlpRecord::from(m)).expect("network records always serialize")
}

pub fn mlp_deserialize(text: &str) -> Result<Mlp> {
    let rec: MlpRecord = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    Mlp::try_from(rec)
}
