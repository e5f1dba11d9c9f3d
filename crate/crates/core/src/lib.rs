//! Achievable-rate formulas, samplers, a multicast covariance solver and an
//! uncoded link simulator for physical-layer multicasting with stochastic
//! transmit beamforming and SBF-Alamouti space-time coding.
//!
//! Rates are in nats unless a function says otherwise.

pub mod capacity;
pub mod error;
pub mod gain;
pub mod linalg;
pub mod linksim;
pub mod quadrature;
pub mod rates;
pub mod sampling;
pub mod specfun;
pub mod stats;

pub use error::{Error, Result};

pub use num_complex::Complex64;
