//! Small fully connected Q-networks with hand-written gradients.
//!
//! Hidden layers are `Linear -> [LayerNorm] -> ReLU`. When normalization is
//! on, every hidden layer of the same width reuses one gain/bias pair, so
//! those parameters collect gradient from each layer that applies them. The
//! dueling head splits the last hidden features into a state value `V(s)` and
//! advantages `A(s, a)` and recombines them as `V + A - mean(A)`.

mod adam;
mod mlp;

pub use adam::{adam_step, AdamState};
pub use mlp::{Head, MlpConfig, QNetworkParams};
