//! Event temporal-relation extraction in hyperbolic space.
//!
//! The crate provides, bottom up:
//!
//! - [`ball`] — Poincaré-ball geometry: distances, angles, Möbius
//!   operations, exponential/logarithmic maps, numerically guarded.
//! - [`tape`] / [`tape_ball`] — a reverse-mode gradient tape over the scalar
//!   primitives the formulas decompose into, plus the ball operations
//!   recorded on it.
//! - [`optim`] — Adam for Euclidean parameters and Riemannian Adam for
//!   ball-point parameters.
//! - [`layers`] — hyperbolic feed-forward layer (HFFL), hyperbolic GRU
//!   (HGRU), and hyperbolic multinomial logistic regression (HMLR).
//! - [`data`] — labeled event pairs, per-document temporal graphs, negative
//!   sampling, and the evaluation metrics.
//! - [`embed`] — the Poincaré event-embedding method: distance plus angular
//!   loss, and the score-rule classifier with threshold tuning.
//! - [`relnet`] — the end-to-end HGRU classifier over token sequences.
//! - [`synth`] — a synthetic corpus generator for desk-scale experiments.
//! - [`viz`] — disk-coordinate dumps and SVG rendering for 2-D models.
//! - [`cli`] — the `validate` / `synth` / `train-embed` / `train-relnet` /
//!   `eval` / `predict` / `viz` subcommands used by the binary.
//!
//! See the crate `examples/` directory for one runnable walkthrough per
//! capability.

pub mod ball;
pub mod cli;
pub mod data;
pub mod embed;
pub mod layers;
pub mod mat;
pub mod optim;
pub mod relnet;
pub mod synth;
pub mod tape;
pub mod tape_ball;
pub mod viz;

// pub use ball::{BallPoint, GeometryConfig, TangentVector};
// pub use data::{ConfusionMatrix, EventPairExample, TempRelLabel, TemporalGraph};
// pub use embed::{EmbedModel, EmbedTrainConfig, RuleConfig};
// pub use relnet::{RelNetConfig, RelNetModel};
