//! Exact dynamics of mutation loops on tropical cluster X-varieties.

pub mod conjecture;
pub mod entropy;
pub mod error;
pub mod io;
pub mod linalg;
pub mod seed;
pub mod simplex;
pub mod spectra;
pub mod stability;
pub mod surfaces;
pub mod tropical;

pub use error::{Error, Result};
pub use linalg::{IntMatrix, Rational};
pub use seed::{ExchangeMatrix, MutationLoop, MutationPath, Permutation};
pub use tropical::{PresentationMatrix, Sign, SignSequence, TropicalPoint};
