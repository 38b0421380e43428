//! Encoder `f`, projector `g`, classifier `h`, and the class prototype store.

pub mod checkpoint;
pub mod forward;
pub mod params;
pub mod prototypes;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint};
pub use forward::{backward_view, classify, embed, encode_view, forward, ForwardCache, ViewCache};
pub use params::{init_params, ModelDims, ModelParams};
pub use prototypes::{init_prototypes, prototype_logits, Prototypes};
