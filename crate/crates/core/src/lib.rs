//! Weak values in pre- and post-selected systems.
//!
//! `weakval` computes weak values of observables on finite-dimensional pure
//! states, and the post-selection probabilities that per-path c-number
//! elements (phase shifters, attenuators) produce. It also simulates two
//! measurement models that read the same weak values out of a meter:
//!
//! - [`qstate`]: state vectors, spectral observables, weak values.
//! - [`backaction`]: exact and first-order post-selection probabilities under
//!   path components, and the estimators that invert them.
//! - [`pointer`]: the Gaussian von Neumann pointer on an FFT grid.
//! - [`qubitmeter`]: the CNOT meter-qubit model and its normalized readout.
//! - [`shotnoise`]: Poisson photon-counting Monte Carlo and error propagation.
//! - [`wvxfmt`]: the `.wvx` experiment description format.
//!
//! ```
//! use weakval::backaction::{exact_postselection_prob, estimate_re_weak_value,
//!     ComponentSet, PathComponent};
//! use weakval::qstate::{projector_weak_values, StateVector};
//!
//! let pre = StateVector::from_real(&[1.0, 1.0])?;
//! let post = StateVector::from_real(&[2.0, -1.0])?;
//! let wv = projector_weak_values(&pre, &post)?;
//! assert!((wv[1].re + 1.0).abs() < 1e-12);
//!
//! let alpha = 1e-3;
//! let set = ComponentSet::new().with(PathComponent::attenuator(1, alpha)?)?;
//! let report = exact_postselection_prob(&pre, &post, &set)?;
//! let n_est = estimate_re_weak_value(report.exact, report.baseline, alpha)?;
//! assert!((n_est + 1.0).abs() < 1e-3);
//! # Ok::<(), weakval::Error>(())
//! ```

pub mod backaction;
pub mod error;
pub mod pointer;
pub mod qstate;
pub mod qubitmeter;
pub mod shotnoise;
pub mod wvxfmt;

pub use error::{Error, Result};

/// Code listings from the guide under `book/`, compiled and run as doctests.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../README.md")]
    pub mod readme {}
    #[doc = include_str!("../../../book/src/intro.md")]
    pub mod intro {}
    #[doc = include_str!("../../../book/src/weak-values.md")]
    pub mod weak_values {}
    #[doc = include_str!("../../../book/src/back-action.md")]
    pub mod back_action {}
    #[doc = include_str!("../../../book/src/pointer.md")]
    pub mod pointer {}
    #[doc = include_str!("../../../book/src/qubit-meter.md")]
    pub mod qubit_meter {}
    #[doc = include_str!("../../../book/src/shot-noise.md")]
    pub mod shot_noise {}
    #[doc = include_str!("../../../book/src/wvx-format.md")]
    pub mod wvx_format {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
