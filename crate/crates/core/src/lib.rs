//! Rate-distortion functions of multivariate Gaussian sources with side
//! information, and the test channels that achieve them.
//!
//! The crate is organised bottom-up:
//!
//! - [`gaussian`]: source specification, Schur-complement conditioning,
//!   spectral decomposition and Gaussian mutual information.
//! - [`waterfill`]: reverse water-filling and the conditional / marginal
//!   rate-distortion functions.
//! - [`channel`]: optimal realizations for side information at both ends,
//!   at the decoder only, and the causal case.
//! - [`verify`]: closed-form and Monte Carlo checks of the structural
//!   properties.
//! - [`audit`]: two auxiliary channels from earlier work, compared against
//!   the optimal one.
//!
//! ```
//! use nalgebra::dmatrix;
//! use rdkit_core::{gaussian::GaussianSourceSpec, waterfill::rdf_conditional};
//!
//! // Y = X + V with unit variances: var(X | Y) = 1/2.
//! let spec = GaussianSourceSpec::observation(dmatrix![1.0], dmatrix![1.0], dmatrix![1.0])?;
//! let (solution, _) = rdf_conditional(&spec, 0.25)?;
//! assert!((solution.rate_nats() - 0.5 * 2f64.ln()).abs() < 1e-15);
//! # Ok::<(), rdkit_core::Error>(())
//! ```

pub mod audit;
pub mod channel;
mod error;
pub mod gaussian;
pub mod verify;
pub mod waterfill;

pub use error::{Error, Result};
