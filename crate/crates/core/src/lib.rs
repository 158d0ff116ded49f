//! Orthogonal mates for Latin rectangles.
//!
//! The main entry point is [`process::run_process`], a guided random
//! process that places the rows of a mate one at a time. Each row is drawn
//! from a fractional perfect matching built by max-flow on the current
//! masses and decomposed into permutations. Verifiers, baselines and
//! diagnostics live alongside.
//!
//! ```
//! use latin_mate::latin::{verify_orthogonal, LatinRectangle};
//! use latin_mate::process::{run_process, ProcessConfig, ProcessResult};
//!
//! let j = LatinRectangle::cyclic(16, 4).unwrap();
//! let out = run_process(&j, 0.75, 1, &ProcessConfig::default()).unwrap();
//! if let ProcessResult::Success { mate } = out.result {
//!     assert!(verify_orthogonal(&mate, &j).unwrap().ok);
//! }
//! ```

pub mod baselines;
pub mod diagnostics;
pub mod error;
pub mod exec;
pub mod latin;
pub mod matching;
pub mod process;
pub mod scalar;
pub mod trials;

pub use error::{Error, Result};
