//! Motion-vector prediction laboratory.
//!
//! The crate computes ground-truth motion vectors by exhaustive block matching,
//! builds causal neighbor datasets from them, and compares four predictors of a
//! block's motion vector:
//!
//! - the component-wise **median** of the left, top-left and top neighbors,
//! - the **best neighbor** per coordinate, with a side channel telling the
//!   decoder whether the pick lies below, at, or above the median,
//! - a small tanh **classifier** that guesses the best neighbor without side
//!   information,
//! - a small tanh **regressor** that outputs a motion vector directly.
//!
//! Residuals are scored by MSE, Shannon entropy and canonical Huffman bit counts.
//!
//! The modules follow the data flow:
//!
//! ```text
//! video_io -> motion_field -> neighborhood -> predictors -> entropy_coding
//!                                  \-> fcnn --/                 |
//!                                                            harness
//! ```
//!
//! Runnable walkthroughs live in `examples/`; `cargo run --example` lists them.

pub mod entropy_coding;
pub mod error;
pub mod fcnn;
pub mod harness;
pub mod motion_field;
pub mod neighborhood;
pub mod predictors;
pub mod video_io;

pub use error::{Error, Result};
pub use motion_field::MotionVector;
