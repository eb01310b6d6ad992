//! Minimum-error quantum state discrimination.
//!
//! Computes optimal measurements for finite ensembles of prior-weighted
//! mixed states by Barnett–Croke ascent, and certifies how far any given
//! measurement is from optimal with a two-sided gap interval.
//!
//! ```
//! use mindisc::{iteration, model::{Ensemble, Povm}};
//!
//! let e = Ensemble::shifted_basis(4);
//! let trace = iteration::run(&e, &Povm::uniform(4, 4)?, &Default::default())?;
//! assert!(trace.final_p_succ > 1.0 - 1e-6);
//! # Ok::<(), mindisc::Error>(())
//! ```

pub mod error;
pub mod iteration;
pub mod linalg;
pub mod model;
pub mod optimality;
pub mod oracles;
pub mod random;

pub use error::{Error, Result};
