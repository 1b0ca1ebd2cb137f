//! Feed-forward networks with analytic backpropagation and RMSProp.

mod activation;
mod mlp;
mod rmsprop;
mod serialize;

pub use activation::Activation;
pub use mlp::{mlp_init, ForwardCache, Gradients, InitScheme, Layer, Mlp};
pub use rmsprop::{rmsprop_step, Direction, RmsPropConfig, RmsPropState};
pub use serialize::{mlp_deserialize, mlp_serialize, MlpRecord, MLP_FORMAT_VERSION};
